//! Point estimators of `Sigma` and `Omega` for a known DAG, two losses, and the
//! relative-improvement harness.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chol::{precision_from_cholesky, sample_data, sigma_from_xi, xi_from_sigma, CholeskyFactor};
use crate::completion::{complete_covariance, complete_precision};
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::linalg::{chol_log_det, cholesky, submatrix, SpdMatrix};
use crate::rng::substream_seed;
use crate::wishart::{
    mean_incomplete_covariance, mean_incomplete_precision, mode_xi, posterior, AlphaRule, DagWishartParams, SuffStats,
};

/// Relative pivot floor for the parent blocks of `S` in [`mle`].
const MLE_PIVOT_EPS: f64 = 1e-12;

/// Graph-constrained maximum-likelihood estimate of `Sigma`.
pub fn mle(stats: &SuffStats, dag: &Dag) -> Result<SpdMatrix> {
    let p = dag.p();
    if stats.p() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: stats.p(),
        });
    }
    let required = (0..p).map(|i| dag.parent_count(i) + 1).max().unwrap_or(1);
    if stats.n() < required {
        return Err(Error::InsufficientSamples { n: stats.n(), required });
    }
    let s = stats.s();
    let floor = MLE_PIVOT_EPS * s.trace();
    for i in 0..p {
        let pa = dag.parent_vec(i);
        if pa.is_empty() {
            continue;
        }
        let ok = cholesky(submatrix(s, &pa, &pa))
            .map(|c| {
                let l = c.l_dirty();
                (0..pa.len()).all(|k| l[(k, k)] * l[(k, k)] > floor)
            })
            .unwrap_or(false);
        if !ok {
            return Err(Error::SingularParentBlock { vertex: i });
        }
    }
    let xi = xi_from_sigma(s, dag)?;
    Ok(sigma_from_xi(&xi))
}

/// Posterior mode mapped to the covariance space.
pub fn map_estimate(stats: &SuffStats, params: &DagWishartParams) -> Result<SpdMatrix> {
    let post = posterior(params, stats)?;
    Ok(sigma_from_xi(&mode_xi(&post)?))
}

/// Completion of the posterior mean of the incomplete covariance.
pub fn bayes_sigma(stats: &SuffStats, params: &DagWishartParams) -> Result<SpdMatrix> {
    let post = posterior(params, stats)?;
    complete_covariance(&mean_incomplete_covariance(&post)?)
}

/// Completion of the posterior mean of the incomplete precision.
pub fn bayes_omega(stats: &SuffStats, params: &DagWishartParams) -> Result<SpdMatrix> {
    let post = posterior(params, stats)?;
    Ok(complete_precision(&mean_incomplete_precision(&post)?)?.0)
}

/// Squared error over directed-edge positions.
pub fn loss_l2(m: &DMatrix<f64>, m_hat: &DMatrix<f64>, dag: &Dag) -> Result<f64> {
    let p = dag.p();
    for x in [m, m_hat] {
        if x.nrows() != p || x.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: x.nrows(),
            });
        }
    }
    Ok(dag.edges().map(|(i, j)| (m[(i, j)] - m_hat[(i, j)]).powi(2)).sum())
}

/// Stein's loss `tr(M_hat M^{-1}) - log det(M_hat M^{-1}) - p`.
pub fn loss_stein(m_hat: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<f64> {
    let p = m.nrows();
    if m_hat.nrows() != p || m_hat.ncols() != p || m.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: m_hat.nrows(),
        });
    }
    let cm = cholesky(m.clone()).ok_or_else(|| Error::NotPositiveDefinite("reference matrix".into()))?;
    let ch = cholesky(m_hat.clone()).ok_or_else(|| Error::NotPositiveDefinite("estimate".into()))?;
    // tr(C^{-1} M_hat C^{-T}) with M = C C^T
    let l = cm.l();
    let a = l.solve_lower_triangular(m_hat).expect("positive pivots");
    let b = l.solve_lower_triangular(&a.transpose()).expect("positive pivots");
    let loss = b.trace() - chol_log_det(&ch) + chol_log_det(&cm) - p as f64;
    Ok(loss.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Sigma,
    Omega,
}

/// Estimators exposed by `fit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Mle,
    Map,
    BayesSigma,
    BayesOmega,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Mle => "mle",
            Estimator::Map => "map",
            Estimator::BayesSigma => "bayes-sigma",
            Estimator::BayesOmega => "bayes-omega",
        }
    }

    pub fn target(&self) -> Target {
        match self {
            Estimator::BayesOmega => Target::Omega,
            _ => Target::Sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Losses {
    pub stein: f64,
    pub l2: f64,
}

/// Prior hyperparameters `alpha_i = c pa_i + b`, `U = u I`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Hyper {
    pub c: f64,
    pub b: f64,
    pub u: f64,
}

impl Hyper {
    pub fn params(&self, dag: &Dag) -> Result<DagWishartParams> {
        DagWishartParams::with_rule(
            dag.clone(),
            SpdMatrix::scaled_identity(dag.p(), self.u)?,
            AlphaRule { b: self.b, c: self.c },
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub estimator: Estimator,
    pub target: Target,
    pub estimate: SpdMatrix,
    pub losses: Option<Losses>,
    pub hyper: Option<Hyper>,
}

/// Runs one estimator; losses are reported when `truth` (a matrix of the same
/// target) is supplied.
pub fn estimate(
    estimator: Estimator,
    stats: &SuffStats,
    dag: &Dag,
    hyper: Hyper,
    truth: Option<&DMatrix<f64>>,
) -> Result<EstimatorReport> {
    let params = hyper.params(dag)?;
    let est = match estimator {
        Estimator::Mle => mle(stats, dag)?,
        Estimator::Map => map_estimate(stats, &params)?,
        Estimator::BayesSigma => bayes_sigma(stats, &params)?,
        Estimator::BayesOmega => bayes_omega(stats, &params)?,
    };
    let losses = truth
        .map(|t| -> Result<Losses> {
            Ok(Losses {
                stein: loss_stein(est.as_matrix(), t)?,
                l2: loss_l2(t, est.as_matrix(), dag)?,
            })
        })
        .transpose()?;
    Ok(EstimatorReport {
        estimator,
        target: estimator.target(),
        estimate: est,
        losses,
        hyper: (estimator != Estimator::Mle).then_some(hyper),
    })
}

/// Precision of a covariance Markov w.r.t. `dag`, with exact zeros off the moral pattern.
pub fn precision_of(sigma: &SpdMatrix, dag: &Dag) -> Result<SpdMatrix> {
    Ok(precision_from_cholesky(
        &xi_from_sigma(sigma.as_matrix(), dag)?.to_cholesky(),
    ))
}

/// Covariance of a precision Markov w.r.t. `dag`.
pub fn covariance_of(omega: &SpdMatrix, dag: &Dag) -> Result<SpdMatrix> {
    Ok(sigma_from_xi(
        &crate::chol::cholesky_from_precision(omega, dag)?.to_xi(),
    ))
}

/// Names of the compared estimates, reference (maximum likelihood) first.
pub fn table_estimates(target: Target) -> [&'static str; 4] {
    match target {
        Target::Omega => ["omega_ml", "omega_bayes", "sigma_bayes_inv", "omega_map"],
        Target::Sigma => ["sigma_ml", "sigma_bayes", "omega_bayes_inv", "sigma_map"],
    }
}

/// The four estimates of one target from one data set, in [`table_estimates`] order.
fn four_estimates(stats: &SuffStats, dag: &Dag, hyper: Hyper, target: Target) -> [Result<SpdMatrix>; 4] {
    let params = hyper.params(dag);
    let ml = mle(stats, dag);
    let (sb, ob, map) = match &params {
        Ok(pr) => (bayes_sigma(stats, pr), bayes_omega(stats, pr), map_estimate(stats, pr)),
        Err(e) => {
            let msg = || Error::InvalidArgument(e.to_string());
            (Err(msg()), Err(msg()), Err(msg()))
        }
    };
    let to_omega = |r: Result<SpdMatrix>| r.and_then(|s| precision_of(&s, dag));
    let to_sigma = |r: Result<SpdMatrix>| r.and_then(|o| covariance_of(&o, dag));
    match target {
        Target::Omega => [to_omega(ml), ob, to_omega(sb), to_omega(map)],
        Target::Sigma => [ml, sb, to_sigma(ob), map],
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ImprovementConfig {
    pub hypers: Vec<Hyper>,
    pub ns: Vec<usize>,
    pub replications: usize,
    pub targets: Vec<Target>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ImprovementRow {
    pub c: f64,
    pub u: f64,
    pub estimator: String,
    pub target: Target,
    pub n: usize,
    pub loss: String,
    pub improvement_pct: f64,
    pub mc_se: f64,
    pub replications: usize,
    pub failures: usize,
}

/// `100 (1 - mean(est) / mean(ref))` and its delta-method standard error over
/// paired replications.
pub fn relative_improvement(reference: &[f64], est: &[f64]) -> (f64, f64) {
    let n = reference.len() as f64;
    let mr = reference.iter().sum::<f64>() / n;
    let me = est.iter().sum::<f64>() / n;
    let r = me / mr;
    let var = if reference.len() > 1 {
        reference.iter().zip(est).map(|(a, b)| (b - r * a).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        f64::NAN
    };
    (100.0 * (1.0 - r), 100.0 * (var / n).sqrt() / mr)
}

/// Monte Carlo comparison of the Bayes estimators against maximum likelihood
/// for data drawn from `truth`.
type EstimateLosses = [Option<(f64, f64)>; 4];

pub fn improvement_table(truth: &CholeskyFactor, config: &ImprovementConfig) -> Result<Vec<ImprovementRow>> {
    if config.replications == 0 || config.ns.is_empty() || config.hypers.is_empty() || config.targets.is_empty() {
        return Err(Error::InvalidArgument("empty improvement design".into()));
    }
    let dag = truth.dag().clone();
    let sigma_true = sigma_from_xi(&truth.to_xi());
    let omega_true = precision_from_cholesky(truth);
    let mut rows = Vec::new();
    for &n in &config.ns {
        // losses[rep][hyper][target][estimate] = Some((stein, l2)) or None on failure
        let per_rep: Vec<Vec<Vec<EstimateLosses>>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng =
                    ChaCha8Rng::from_seed(substream_seed("improvement", config.seed, &[n as u64, rep as u64]));
                let stats = SuffStats::from_data(&sample_data(truth, n, &mut rng));
                config
                    .hypers
                    .iter()
                    .map(|&h| {
                        config
                            .targets
                            .iter()
                            .map(|&t| {
                                let truth_m = match t {
                                    Target::Sigma => sigma_true.as_matrix(),
                                    Target::Omega => omega_true.as_matrix(),
                                };
                                four_estimates(&stats, &dag, h, t).map(|r| {
                                    r.ok().and_then(|e| {
                                        let s = loss_stein(e.as_matrix(), truth_m).ok()?;
                                        let l = loss_l2(truth_m, e.as_matrix(), &dag).ok()?;
                                        Some((s, l))
                                    })
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for (hi, h) in config.hypers.iter().enumerate() {
            for (ti, &t) in config.targets.iter().enumerate() {
                let names = table_estimates(t);
                for k in 1..4 {
                    for (loss, pick) in [("L1", 0usize), ("L2", 1usize)] {
                        let mut reference = Vec::new();
                        let mut est = Vec::new();
                        let mut failures = 0;
                        for rep in &per_rep {
                            match (rep[hi][ti][0], rep[hi][ti][k]) {
                                (Some(a), Some(b)) => {
                                    let g = |x: (f64, f64)| if pick == 0 { x.0 } else { x.1 };
                                    reference.push(g(a));
                                    est.push(g(b));
                                }
                                _ => failures += 1,
                            }
                        }
                        let (imp, se) = if reference.is_empty() {
                            (f64::NAN, f64::NAN)
                        } else {
                            relative_improvement(&reference, &est)
                        };
                        rows.push(ImprovementRow {
                            c: h.c,
                            u: h.u,
                            estimator: names[k].to_string(),
                            target: t,
                            n,
                            loss: loss.to_string(),
                            improvement_pct: imp,
                            mc_se: se,
                            replications: reference.len(),
                            failures,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}
