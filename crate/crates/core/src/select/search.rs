//! Annealed stochastic shotgun search over parent-ordered DAGs.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::lasso::lasso_dag;
use super::score::{sum_factors, Scorer};
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::rng::substream;
use crate::wishart::{AlphaRule, SuffStats};

/// Which graphs the next state is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFrom {
    /// The neighbours scored in the current iteration.
    Latest,
    /// Everything recorded so far in this restart.
    Accumulated,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub steps: usize,
    pub neighborhood: usize,
    pub gamma: f64,
    pub b: f64,
    pub c: f64,
    /// `U = u I`.
    pub u: f64,
    /// Starting-point levels; one restart each.
    pub kappa_grid: Vec<f64>,
    pub sample_from: SampleFrom,
    pub seed: u64,
}

/// `{(k / (n - 1))^4 p : k = 1..n-1} ∪ {0.1}`.
pub fn default_kappa_grid(restarts: usize, p: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (1..restarts)
        .map(|k| (k as f64 / (restarts - 1) as f64).powi(4) * p as f64)
        .collect();
    g.push(0.1);
    g
}

impl SearchConfig {
    /// Defaults for `p` variables; larger problems use fewer, shorter restarts.
    pub fn for_dimension(p: usize, seed: u64) -> Self {
        let (restarts, steps) = if p >= 500 { (9, 50) } else { (16, 100) };
        SearchConfig {
            restarts,
            steps,
            neighborhood: 30,
            gamma: 0.5,
            b: 3.0,
            c: 1.0,
            u: 1.0,
            kappa_grid: default_kappa_grid(restarts, p),
            sample_from: SampleFrom::Accumulated,
            seed,
        }
    }

    pub fn rule(&self) -> AlphaRule {
        AlphaRule { b: self.b, c: self.c }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.restarts == 0 || self.steps == 0 || self.neighborhood == 0 {
            return bad("restarts, steps and neighborhood must be at least 1");
        }
        if !(self.gamma > 0.0) {
            return bad("gamma must be positive");
        }
        if self.kappa_grid.len() != self.restarts {
            return bad("kappa grid length must equal the number of restarts");
        }
        if self.kappa_grid.iter().any(|k| !(*k > 0.0)) {
            return bad("kappa values must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredGraph {
    pub dag: Dag,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RestartSummary {
    pub kappa: f64,
    pub start_score: f64,
    pub best_score: f64,
    pub recorded: usize,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: ScoredGraph,
    /// Distinct visited graphs in first-visit order.
    pub visited: Vec<ScoredGraph>,
    pub per_restart: Vec<RestartSummary>,
    /// Graphs recorded before removing duplicates.
    pub recorded: usize,
}

/// Index drawn with probability proportional to `exp(gamma * s_i)`, given a
/// uniform draw `u` in `[0, 1)`. Normalized through log-sum-exp.
pub fn annealed_index(scores: &[f64], gamma: f64, u: f64) -> usize {
    let probs = annealed_probabilities(scores, gamma);
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver at the top; fall back to the last positive weight
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

pub fn annealed_probabilities(scores: &[f64], gamma: f64) -> Vec<f64> {
    let m = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let w: Vec<f64> = scores.iter().map(|s| (gamma * (s - m)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

struct Restart {
    list: Vec<ScoredGraph>,
    summary: RestartSummary,
}

fn run_restart<R: Rng>(start: Dag, kappa: f64, scorer: &Scorer, config: &SearchConfig, rng: &mut R) -> Result<Restart> {
    let mut factors = scorer.factors(&start)?;
    let start_score = sum_factors(&factors);
    let mut current = start.clone();
    let mut list = vec![ScoredGraph {
        dag: start,
        score: start_score,
    }];
    for _ in 0..config.steps {
        let batch_start = list.len();
        for (i, j) in current.neighbor_moves(config.neighborhood, rng) {
            let next = current.with_toggled(i, j);
            let f = match scorer.vertex_score(j, &next.parent_vec(j)) {
                Ok(f) => f,
                Err(e) => {
                    log::warn!("skipping candidate ({}, {}): {e}", i + 1, j + 1);
                    continue;
                }
            };
            let old = std::mem::replace(&mut factors[j], f);
            let score = sum_factors(&factors);
            factors[j] = old;
            list.push(ScoredGraph { dag: next, score });
        }
        let pool = match config.sample_from {
            SampleFrom::Latest => &list[batch_start..],
            SampleFrom::Accumulated => &list[..],
        };
        if pool.is_empty() {
            continue;
        }
        let scores: Vec<f64> = pool.iter().map(|g| g.score).collect();
        let k = annealed_index(&scores, config.gamma, rng.random::<f64>());
        current = pool[k].dag.clone();
        factors = scorer.factors(&current)?;
    }
    let best_score = list.iter().fold(f64::NEG_INFINITY, |a, g| a.max(g.score));
    Ok(Restart {
        summary: RestartSummary {
            kappa,
            start_score,
            best_score,
            recorded: list.len(),
        },
        list,
    })
}

/// Runs one restart per grid value in parallel and returns the best graph seen.
pub fn shotgun_search(data: &DMatrix<f64>, config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let p = data.ncols();
    let stats = SuffStats::from_data(data);
    let scorer = Scorer::new(&stats, config.rule(), &SpdMatrix::scaled_identity(p, config.u)?)?;
    let restarts: Vec<Result<Restart>> = config
        .kappa_grid
        .par_iter()
        .enumerate()
        .map(|(k, &kappa)| {
            let start = lasso_dag(data, kappa)?;
            let mut rng = substream("search", config.seed, &[k as u64]);
            let r = run_restart(start, kappa, &scorer, config, &mut rng)?;
            log::debug!("restart {k} (kappa {kappa}): best {}", r.summary.best_score);
            Ok(r)
        })
        .collect();
    let mut seen = HashSet::new();
    let mut visited = Vec::new();
    let mut per_restart = Vec::new();
    let mut recorded = 0;
    for r in restarts {
        let r = r?;
        recorded += r.list.len();
        per_restart.push(r.summary);
        for g in r.list {
            if seen.insert(g.dag.clone()) {
                visited.push(g);
            }
        }
    }
    let best = visited
        .iter()
        .fold(None::<&ScoredGraph>, |b, g| match b {
            Some(b) if b.score >= g.score => Some(b),
            _ => Some(g),
        })
        .cloned()
        .expect("every restart records its start");
    Ok(SearchResult {
        best,
        visited,
        per_restart,
        recorded,
    })
}
