//! Generators and independent reference computations shared by the
//! integration tests and the acceptance binary.
#![allow(dead_code)]

use dag_wishart::chol::{sigma_from_xi, CholeskyFactor};
use dag_wishart::completion::IncompleteMatrix;
use dag_wishart::dag::Dag;
use dag_wishart::linalg::SpdMatrix;
use dag_wishart::wishart::DagWishartParams;
use nalgebra::DMatrix;
use rand::Rng;

/// Independent Bernoulli edges over the ordered pairs.
pub fn random_graph<R: Rng>(p: usize, prob: f64, rng: &mut R) -> Dag {
    let mut edges = Vec::new();
    for j in 0..p {
        for i in j + 1..p {
            if rng.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    Dag::new(p, &edges).unwrap()
}

/// Adds every edge needed to make the graph perfect (parents of each vertex
/// pairwise adjacent), processing children from the last vertex down.
pub fn make_perfect(dag: &Dag) -> Dag {
    let p = dag.p();
    let mut adj = vec![vec![false; p]; p];
    for (i, j) in dag.edges() {
        adj[i][j] = true;
    }
    // closing one parent set can add parents elsewhere; repeat until stable
    loop {
        let mut changed = false;
        for j in 0..p {
            let pa: Vec<usize> = (j + 1..p).filter(|&i| adj[i][j]).collect();
            for a in 0..pa.len() {
                for b in a + 1..pa.len() {
                    let (hi, lo) = (pa[b], pa[a]);
                    if !adj[hi][lo] {
                        adj[hi][lo] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let edges: Vec<(usize, usize)> = (0..p)
        .flat_map(|j| (j + 1..p).map(move |i| (i, j)))
        .filter(|&(i, j)| adj[i][j])
        .collect();
    Dag::new(p, &edges).unwrap()
}

/// Random SPD matrix `A A^T / p + s I` with standard normal `A`.
pub fn random_spd<R: Rng>(p: usize, s: f64, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let mut m = &a * a.transpose() / p as f64 + DMatrix::identity(p, p) * s;
    for r in 0..p {
        for c in 0..r {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
    m
}

/// Random covariance that is Markov with respect to `dag`.
pub fn random_markov_sigma<R: Rng>(dag: &Dag, rng: &mut R) -> SpdMatrix {
    sigma_from_xi(&CholeskyFactor::random(dag.clone(), rng).to_xi())
}

/// Random hyperparameters with `alpha_i - pa_i` uniform on `[lo, hi]`.
pub fn random_params<R: Rng>(dag: &Dag, lo: f64, hi: f64, rng: &mut R) -> DagWishartParams {
    let u = SpdMatrix::new(random_spd(dag.p(), 0.5, rng)).unwrap();
    let alpha = (0..dag.p())
        .map(|i| dag.parent_count(i) as f64 + lo + (hi - lo) * rng.random::<f64>())
        .collect();
    DagWishartParams::new(dag.clone(), u, alpha).unwrap()
}

/// Free coordinates of a Cholesky factor: `D` then the `L` column entries.
pub fn theta_coords(theta: &CholeskyFactor) -> Vec<f64> {
    let mut v = theta.d().to_vec();
    for col in theta.l_columns() {
        v.extend_from_slice(col);
    }
    v
}

pub fn theta_from_coords(dag: &Dag, v: &[f64]) -> CholeskyFactor {
    let p = dag.p();
    let mut k = p;
    let l = (0..p)
        .map(|j| {
            let m = dag.parent_count(j);
            let c = v[k..k + m].to_vec();
            k += m;
            c
        })
        .collect();
    CholeskyFactor::new(dag.clone(), v[..p].to_vec(), l).unwrap()
}

/// Diagonal then edge entries, in the order of [`IncompleteMatrix::entries`].
pub fn incomplete_coords(m: &IncompleteMatrix) -> Vec<f64> {
    let mut v = m.diag().to_vec();
    v.extend(m.entries().filter(|(i, j, _)| i != j).map(|(_, _, x)| x));
    v
}

pub fn incomplete_from_coords(dag: &Dag, v: &[f64]) -> IncompleteMatrix {
    let p = dag.p();
    let entries: Vec<(usize, usize, f64)> = dag.edges().zip(&v[p..]).map(|((i, j), &x)| (i, j, x)).collect();
    IncompleteMatrix::from_entries(dag.clone(), v[..p].to_vec(), &entries).unwrap()
}

/// Central-difference Jacobian of `f` at `x` with relative step `h`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let m = f(x).len();
    let mut j = DMatrix::zeros(m, n);
    for k in 0..n {
        let step = h * x[k].abs().max(1.0);
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[k] += step;
        b[k] -= step;
        let (fa, fb) = (f(&a), f(&b));
        for r in 0..m {
            j[(r, k)] = (fa[r] - fb[r]) / (2.0 * step);
        }
    }
    j
}

/// Log determinant by LU, independent of the crate's Cholesky helpers.
pub fn ln_abs_det(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant().abs().ln()
}

pub fn principal(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// Standard normal CDF by composite Simpson integration of the density.
pub fn phi_simpson(z: f64) -> f64 {
    let n = 20_000;
    let h = z / n as f64;
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(z);
    for k in 1..n {
        s += pdf(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + s * h / 3.0
}

/// Upper `q` quantile of the standard normal by bisection on [`phi_simpson`].
pub fn upper_quantile_bisect(q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - phi_simpson(mid) > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
