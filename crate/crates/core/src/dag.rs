//! Parent-ordered DAGs.
//!
//! Vertices are `0..p` internally. Every edge `parent -> child` satisfies
//! `parent > child`, so acyclicity holds by construction. External formats
//! use 1-based labels (see [`crate::io`]).

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;

use crate::chol::CholeskyFactor;
use crate::error::{Error, Result};

#[derive(Debug, PartialEq, Eq, Hash)]
struct DagData {
    p: usize,
    // CSR by child: parents of `j` are `parents[offsets[j]..offsets[j + 1]]`, ascending.
    offsets: Vec<u32>,
    parents: Vec<u32>,
}

/// Immutable parent-ordered DAG. Cloning is cheap (shared storage).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag(Arc<DagData>);

/// Undirected edge set over `0..p`, stored as `(larger, smaller)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedEdgeSet {
    pub p: usize,
    pub pairs: BTreeSet<(usize, usize)>,
}

impl UndirectedEdgeSet {
    pub fn contains(&self, a: usize, b: usize) -> bool {
        let key = if a > b { (a, b) } else { (b, a) };
        self.pairs.contains(&key)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// The index sets attached to one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSets {
    pub parents: Vec<usize>,
    pub children: Vec<usize>,
    pub family: Vec<usize>,
    /// Later vertices that are not parents: `{j > i} \ pa(i)`.
    pub later_nonparents: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homogeneity {
    None,
    TypeI,
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub perfect: bool,
    pub transitive: bool,
    /// No induced `j <- i -> k` with `j`, `k` non-adjacent.
    pub no_induced_fork: bool,
    /// Type I takes precedence when both definitions hold.
    pub homogeneous: Homogeneity,
}

impl Classification {
    pub fn is_type_one(&self) -> bool {
        self.transitive && self.perfect
    }

    pub fn is_type_two(&self) -> bool {
        self.transitive && self.no_induced_fork
    }
}

impl Dag {
    /// Builds a DAG from `(parent, child)` pairs with 0-based vertices.
    pub fn new(p: usize, edges: &[(usize, usize)]) -> Result<Dag> {
        if p == 0 {
            return Err(Error::InvalidArgument("vertex count must be positive".into()));
        }
        let mut per_child: Vec<Vec<u32>> = vec![Vec::new(); p];
        for &(parent, child) in edges {
            for v in [parent, child] {
                if v >= p {
                    return Err(Error::VertexOutOfRange { vertex: v + 1, p });
                }
            }
            if parent <= child {
                return Err(Error::OrderViolation {
                    parent: parent + 1,
                    child: child + 1,
                });
            }
            per_child[child].push(parent as u32);
        }
        for (child, list) in per_child.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge {
                    parent: w[0] as usize + 1,
                    child: child + 1,
                });
            }
        }
        Ok(Self::from_sorted_lists(p, per_child))
    }

    /// Builds a DAG from 1-based `(parent, child)` labels.
    pub fn from_labels(p: usize, edges: &[(usize, usize)]) -> Result<Dag> {
        let mut zero = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == 0 || b == 0 {
                return Err(Error::VertexOutOfRange { vertex: 0, p });
            }
            zero.push((a - 1, b - 1));
        }
        Dag::new(p, &zero)
    }

    pub fn empty(p: usize) -> Dag {
        Self::from_sorted_lists(p, vec![Vec::new(); p])
    }

    pub fn complete(p: usize) -> Dag {
        Self::from_sorted_lists(p, (0..p).map(|j| ((j + 1) as u32..p as u32).collect()).collect())
    }

    fn from_sorted_lists(p: usize, lists: Vec<Vec<u32>>) -> Dag {
        let mut offsets = Vec::with_capacity(p + 1);
        let mut parents = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        offsets.push(0);
        for list in lists {
            parents.extend(list);
            offsets.push(parents.len() as u32);
        }
        Dag(Arc::new(DagData { p, offsets, parents }))
    }

    pub fn p(&self) -> usize {
        self.0.p
    }

    pub fn edge_count(&self) -> usize {
        self.0.parents.len()
    }

    /// Parents of `j` in ascending order.
    pub fn parents(&self, j: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        let lo = self.0.offsets[j] as usize;
        let hi = self.0.offsets[j + 1] as usize;
        self.0.parents[lo..hi].iter().map(|&v| v as usize)
    }

    pub fn parent_vec(&self, j: usize) -> Vec<usize> {
        self.parents(j).collect()
    }

    pub fn parent_count(&self, j: usize) -> usize {
        (self.0.offsets[j + 1] - self.0.offsets[j]) as usize
    }

    pub fn family(&self, j: usize) -> Vec<usize> {
        std::iter::once(j).chain(self.parents(j)).collect()
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        let lo = self.0.offsets[child] as usize;
        let hi = self.0.offsets[child + 1] as usize;
        self.0.parents[lo..hi].binary_search(&(parent as u32)).is_ok()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        match a.cmp(&b) {
            std::cmp::Ordering::Greater => self.has_edge(a, b),
            std::cmp::Ordering::Less => self.has_edge(b, a),
            std::cmp::Ordering::Equal => false,
        }
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..i).filter(|&j| self.has_edge(i, j)).collect()
    }

    /// All edges as `(parent, child)`, ordered by child then parent.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.p()).flat_map(move |j| self.parents(j).map(move |i| (i, j)))
    }

    pub fn vertex_sets(&self, i: usize) -> Result<VertexSets> {
        if i >= self.p() {
            return Err(Error::VertexOutOfRange {
                vertex: i + 1,
                p: self.p(),
            });
        }
        let parents = self.parent_vec(i);
        let mut family = parents.clone();
        family.insert(0, i);
        let later_nonparents = (i + 1..self.p()).filter(|&k| !self.has_edge(k, i)).collect();
        Ok(VertexSets {
            children: self.children(i),
            parents,
            family,
            later_nonparents,
        })
    }

    /// Undirected version plus one pair per pair of co-parents.
    pub fn moral_graph(&self) -> UndirectedEdgeSet {
        let mut pairs = BTreeSet::new();
        for j in 0..self.p() {
            let pa = self.parent_vec(j);
            for (a, &x) in pa.iter().enumerate() {
                pairs.insert((x, j));
                for &y in &pa[a + 1..] {
                    pairs.insert((y, x));
                }
            }
        }
        UndirectedEdgeSet { p: self.p(), pairs }
    }

    pub fn undirected(&self) -> UndirectedEdgeSet {
        UndirectedEdgeSet {
            p: self.p(),
            pairs: self.edges().collect(),
        }
    }

    pub fn classify(&self) -> Classification {
        let p = self.p();
        let perfect = (0..p).all(|j| {
            let pa = self.parent_vec(j);
            pa.iter()
                .enumerate()
                .all(|(a, &x)| pa[a + 1..].iter().all(|&y| self.has_edge(y, x)))
        });
        // a -> b -> c implies a -> c
        let transitive = (0..p).all(|c| self.parents(c).all(|b| self.parents(b).all(|a| self.has_edge(a, c))));
        let no_induced_fork = (0..p).all(|i| {
            let ch = self.children(i);
            ch.iter()
                .enumerate()
                .all(|(a, &x)| ch[a + 1..].iter().all(|&y| self.adjacent(x, y)))
        });
        let homogeneous = if transitive && perfect {
            Homogeneity::TypeI
        } else if transitive && no_induced_fork {
            Homogeneity::TypeII
        } else {
            Homogeneity::None
        };
        Classification {
            perfect,
            transitive,
            no_induced_fork,
            homogeneous,
        }
    }

    /// Copy of this graph with the candidate edge `parent -> child` toggled.
    pub fn with_toggled(&self, parent: usize, child: usize) -> Dag {
        debug_assert!(parent > child && parent < self.p());
        let lists = (0..self.p())
            .map(|j| {
                let mut pa: Vec<u32> = self.parents(j).map(|v| v as u32).collect();
                if j == child {
                    match pa.binary_search(&(parent as u32)) {
                        Ok(pos) => {
                            pa.remove(pos);
                        }
                        Err(pos) => pa.insert(pos, parent as u32),
                    }
                }
                pa
            })
            .collect();
        Self::from_sorted_lists(self.p(), lists)
    }

    /// Number of candidate ordered pairs `p(p-1)/2`.
    pub fn candidate_pairs(p: usize) -> usize {
        p * p.saturating_sub(1) / 2
    }

    /// Inverse of the pair enumeration used for neighbourhoods: pairs are
    /// listed child-major, `(1,0), (2,0), ..., (p-1,0), (2,1), ...`.
    pub fn pair_at(p: usize, mut idx: usize) -> (usize, usize) {
        for child in 0..p {
            let span = p - child - 1;
            if idx < span {
                return (child + 1 + idx, child);
            }
            idx -= span;
        }
        panic!("pair index out of range");
    }

    /// Samples up to `count` distinct graphs one edge toggle away from `self`,
    /// uniformly without replacement.
    pub fn one_edge_neighbors<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Dag> {
        self.neighbor_moves(count, rng)
            .into_iter()
            .map(|(i, j)| self.with_toggled(i, j))
            .collect()
    }

    /// Same sampling as [`Dag::one_edge_neighbors`] but returns the toggled
    /// `(parent, child)` pairs.
    pub fn neighbor_moves<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<(usize, usize)> {
        let total = Self::candidate_pairs(self.p());
        let k = count.min(total);
        index::sample(rng, total, k)
            .into_iter()
            .map(|idx| Self::pair_at(self.p(), idx))
            .collect()
    }

    /// Every parent-ordered DAG on `p` vertices (`2^(p(p-1)/2)` of them).
    pub fn enumerate(p: usize) -> impl Iterator<Item = Dag> {
        let m = Self::candidate_pairs(p);
        assert!(m < 40, "enumeration is only meant for small p");
        let pairs: Vec<(usize, usize)> = (0..m).map(|k| Self::pair_at(p, k)).collect();
        (0u64..(1u64 << m)).map(move |mask| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            Dag::new(p, &edges).expect("enumerated pairs respect the ordering")
        })
    }
}

/// Random parent-ordered DAG with regression weights.
///
/// Each candidate pair is included independently with probability `edge_prob`;
/// included edges get a weight uniform on `weight_range`, stored negated in
/// `L` so that `x_child = w * x_parent + noise`. Residual variances are 1.
pub fn random_dag<R: Rng + ?Sized>(
    p: usize,
    edge_prob: f64,
    weight_range: (f64, f64),
    rng: &mut R,
) -> Result<(Dag, CholeskyFactor)> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidArgument(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let (lo, hi) = weight_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "weight range [{lo}, {hi}] must lie in (0, inf)"
        )));
    }
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for k in 0..Dag::candidate_pairs(p) {
        if rng.random::<f64>() < edge_prob {
            let w = lo + (hi - lo) * rng.random::<f64>();
            edges.push(Dag::pair_at(p, k));
            weights.push(w);
        }
    }
    let dag = Dag::new(p, &edges)?;
    let mut l: Vec<Vec<f64>> = (0..p).map(|j| vec![0.0; dag.parent_count(j)]).collect();
    for (&(parent, child), w) in edges.iter().zip(weights) {
        let pos = dag.parents(child).position(|v| v == parent).unwrap();
        l[child][pos] = -w;
    }
    let theta = CholeskyFactor::new(dag.clone(), vec![1.0; p], l)?;
    Ok((dag, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn four_cycle() -> Dag {
        Dag::from_labels(4, &[(2, 1), (3, 1), (4, 2), (4, 3)]).unwrap()
    }

    #[test]
    fn four_cycle_parents() {
        let d = four_cycle();
        assert_eq!(d.parent_vec(0), vec![1, 2]);
        assert_eq!(d.parent_vec(1), vec![3]);
        assert_eq!(d.parent_vec(2), vec![3]);
        assert!(d.parent_vec(3).is_empty());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Dag::from_labels(3, &[(1, 2)]),
            Err(Error::OrderViolation { .. })
        ));
        assert!(matches!(
            Dag::from_labels(3, &[(4, 1)]),
            Err(Error::VertexOutOfRange { .. })
        ));
        assert!(matches!(
            Dag::from_labels(3, &[(3, 1), (3, 1)]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(Dag::from_labels(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn vertex_sets_examples() {
        let s = four_cycle().vertex_sets(0).unwrap();
        assert_eq!(s.parents, vec![1, 2]);
        assert!(s.children.is_empty());
        assert_eq!(s.family, vec![0, 1, 2]);
        assert_eq!(s.later_nonparents, vec![3]);

        let s = Dag::empty(3).vertex_sets(1).unwrap();
        assert!(s.parents.is_empty() && s.children.is_empty());
        assert_eq!(s.family, vec![1]);
        assert_eq!(s.later_nonparents, vec![2]);

        let s = Dag::complete(3).vertex_sets(1).unwrap();
        assert_eq!(s.parents, vec![2]);
        assert_eq!(s.children, vec![0]);
        assert_eq!(s.family, vec![1, 2]);
        assert!(s.later_nonparents.is_empty());

        assert!(Dag::empty(3).vertex_sets(3).is_err());
    }

    #[test]
    fn moral_graph_examples() {
        let m = four_cycle().moral_graph();
        assert_eq!(m.len(), 5);
        assert!(m.contains(1, 2));
        assert!(!m.contains(0, 3));
        assert!(Dag::empty(3).moral_graph().is_empty());
        assert_eq!(Dag::complete(3).moral_graph(), Dag::complete(3).undirected());
    }

    #[test]
    fn classify_examples() {
        let c = four_cycle().classify();
        assert!(!c.perfect);
        let c = Dag::complete(4).classify();
        assert!(c.perfect);
        assert_eq!(c.homogeneous, Homogeneity::TypeI);
        let star = Dag::from_labels(3, &[(3, 1), (3, 2)]).unwrap().classify();
        assert!(star.perfect && star.transitive);
        assert!(!star.no_induced_fork);
        assert!(!star.is_type_two());
        assert_eq!(star.homogeneous, Homogeneity::TypeI);
        // 3 -> 1 <- 2 with no 3 - 2 edge: not perfect, fork-free, transitive
        let v = Dag::from_labels(3, &[(3, 1), (2, 1)]).unwrap().classify();
        assert!(!v.perfect);
        assert_eq!(v.homogeneous, Homogeneity::TypeII);
    }

    #[test]
    fn parent_ordering_invariants_hold() {
        for d in Dag::enumerate(4) {
            for i in 0..4 {
                let s = d.vertex_sets(i).unwrap();
                assert!(s.parents.iter().all(|&v| v > i));
                let mut union: Vec<usize> = s.parents.iter().chain(&s.later_nonparents).copied().collect();
                union.sort_unstable();
                assert_eq!(union, (i + 1..4).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn moral_equals_undirected_iff_perfect() {
        for p in 1..=5 {
            for d in Dag::enumerate(p) {
                let m = d.moral_graph();
                let u = d.undirected();
                assert!(u.pairs.is_subset(&m.pairs));
                assert_eq!(m == u, d.classify().perfect);
            }
        }
    }

    #[test]
    fn neighbourhood_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = Dag::empty(3).one_edge_neighbors(3, &mut rng);
        assert_eq!(n.len(), 3);
        assert!(n.iter().all(|d| d.edge_count() == 1));
        let n = Dag::complete(3).one_edge_neighbors(10, &mut rng);
        assert_eq!(n.len(), 3);
        assert!(n.iter().all(|d| d.edge_count() == 2));
        let d = four_cycle();
        let n = d.one_edge_neighbors(1, &mut rng);
        let a: BTreeSet<_> = d.edges().collect();
        let b: BTreeSet<_> = n[0].edges().collect();
        assert_eq!(a.symmetric_difference(&b).count(), 1);
    }

    #[test]
    fn neighbourhood_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let all: Vec<Dag> = Dag::enumerate(4).collect();
        for d in all.iter().step_by(7) {
            for e in d.one_edge_neighbors(usize::MAX, &mut rng) {
                let back = e.one_edge_neighbors(usize::MAX, &mut rng);
                assert!(back.contains(d));
            }
        }
    }

    #[test]
    fn random_dag_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (d, _) = random_dag(5, 0.0, (0.2, 0.8), &mut rng).unwrap();
        assert_eq!(d.edge_count(), 0);
        let (d, theta) = random_dag(5, 1.0, (0.2, 0.8), &mut rng).unwrap();
        assert_eq!(d.edge_count(), 10);
        for j in 0..5 {
            for &v in theta.l_column(j) {
                assert!((0.2..=0.8).contains(&-v));
            }
        }
    }

    #[test]
    fn random_dag_edge_count_is_binomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| random_dag(20, 0.1, (0.2, 0.8), &mut rng).unwrap().0.edge_count())
            .sum();
        let mean = total as f64 / draws as f64;
        // per-draw sd is sqrt(190 * 0.1 * 0.9); the mean's sd divides by sqrt(draws)
        let sd = (190.0_f64 * 0.1 * 0.9).sqrt() / (draws as f64).sqrt();
        assert!((mean - 19.0).abs() < 4.0 * sd, "mean edge count {mean}");
    }
}
