//! Closed-form graph score with a per-vertex cache.

use std::collections::HashMap;
use std::sync::RwLock;

use nalgebra::DMatrix;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::wishart::{vertex_log_normalizer, AlphaRule, SuffStats};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

type Key = (u32, Box<[u32]>);

/// Log marginal likelihood of DAGs for fixed data, with `alpha_i = c pa_i + b`.
///
/// The score is a sum of per-vertex factors that depend only on the vertex and
/// its parent set; factors are memoized and always summed in vertex order, so
/// equal graphs get bitwise-equal scores.
#[derive(Debug)]
pub struct Scorer {
    p: usize,
    n: usize,
    rule: AlphaRule,
    u_prior: DMatrix<f64>,
    u_post: DMatrix<f64>,
    cache: RwLock<HashMap<Key, f64>>,
}

impl Scorer {
    pub fn new(stats: &SuffStats, rule: AlphaRule, u: &SpdMatrix) -> Result<Self> {
        let p = stats.p();
        if u.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: u.dim(),
            });
        }
        let mut u_post = u.as_matrix() + stats.scatter();
        crate::linalg::symmetrize(&mut u_post);
        Ok(Scorer {
            p,
            n: stats.n(),
            rule,
            u_prior: u.as_matrix().clone(),
            u_post,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rule(&self) -> AlphaRule {
        self.rule
    }

    /// Factor of vertex `i` with parents `pa` (ascending).
    pub fn vertex_score(&self, i: usize, pa: &[usize]) -> Result<f64> {
        let key: Key = (i as u32, pa.iter().map(|&v| v as u32).collect());
        if let Some(&v) = self.cache.read().expect("score cache poisoned").get(&key) {
            return Ok(v);
        }
        let alpha = self.rule.alpha(pa.len());
        let n = self.n as f64;
        let v = -n / 2.0 * LN_2PI + vertex_log_normalizer(&self.u_post, alpha + n, i, pa)?
            - vertex_log_normalizer(&self.u_prior, alpha, i, pa)?;
        self.cache.write().expect("score cache poisoned").insert(key, v);
        Ok(v)
    }

    pub fn factors(&self, dag: &Dag) -> Result<Vec<f64>> {
        if dag.p() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: dag.p(),
            });
        }
        (0..self.p).map(|i| self.vertex_score(i, &dag.parent_vec(i))).collect()
    }

    pub fn score(&self, dag: &Dag) -> Result<f64> {
        Ok(sum_factors(&self.factors(dag)?))
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().expect("score cache poisoned").len()
    }
}

/// Sum in vertex order.
pub fn sum_factors(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |acc, v| acc + v)
}

/// One-shot score of `dag` under the rule and `U = u I`.
pub fn graph_score(dag: &Dag, stats: &SuffStats, rule: AlphaRule, u: f64) -> Result<f64> {
    Scorer::new(stats, rule, &SpdMatrix::scaled_identity(dag.p(), u)?)?.score(dag)
}
