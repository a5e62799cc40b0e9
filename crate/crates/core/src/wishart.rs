//! The DAG-Wishart family: normalizing constant, densities in the Cholesky,
//! precision and covariance spaces, exact sampling, conjugate updates and
//! closed-form moments.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::chol::{xi_from_sigma, CholeskyFactor, XiPoint};
use crate::completion::{complete_covariance, complete_precision, project, IncompleteMatrix};
use crate::dag::Dag;
use crate::error::{Error, Result, ShapeViolation};
use crate::linalg::{check_symmetric, regress, submatrix, SpdMatrix};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Shape rule `alpha_i = c * pa_i + b`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AlphaRule {
    pub b: f64,
    pub c: f64,
}

impl AlphaRule {
    pub fn alpha(&self, pa: usize) -> f64 {
        self.c * pa as f64 + self.b
    }

    pub fn alphas(&self, dag: &Dag) -> Vec<f64> {
        (0..dag.p()).map(|i| self.alpha(dag.parent_count(i))).collect()
    }
}

/// Scale matrix `U` and one shape parameter per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DagWishartParams {
    dag: Dag,
    u: SpdMatrix,
    alpha: Vec<f64>,
}

impl DagWishartParams {
    /// Checks dimensions only; use [`DagWishartParams::check_shape`] for the
    /// finiteness condition.
    pub fn new(dag: Dag, u: SpdMatrix, alpha: Vec<f64>) -> Result<Self> {
        let p = dag.p();
        if u.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: u.dim(),
            });
        }
        if alpha.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: alpha.len(),
            });
        }
        Ok(DagWishartParams { dag, u, alpha })
    }

    pub fn with_rule(dag: Dag, u: SpdMatrix, rule: AlphaRule) -> Result<Self> {
        let alpha = rule.alphas(&dag);
        Self::new(dag, u, alpha)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn u(&self) -> &SpdMatrix {
        &self.u
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Vertices with `alpha_i <= pa_i + margin`.
    pub fn shape_violations(&self, margin: f64) -> Vec<ShapeViolation> {
        (0..self.dag.p())
            .filter_map(|i| {
                let required = self.dag.parent_count(i) as f64 + margin;
                (self.alpha[i] <= required || self.alpha[i].is_nan()).then_some(ShapeViolation {
                    vertex: i,
                    alpha: self.alpha[i],
                    required_above: required,
                })
            })
            .collect()
    }

    /// `alpha_i > pa_i + 2` for densities, `> pa_i + 4` when moments are needed.
    pub fn check_shape(&self, need_moments: bool) -> Result<()> {
        self.check_margin(if need_moments { 4.0 } else { 2.0 })
    }

    fn check_margin(&self, margin: f64) -> Result<()> {
        let v = self.shape_violations(margin);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Shape(v))
        }
    }
}

/// Sample size and empirical covariance `S = X^T X / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    n: usize,
    s: DMatrix<f64>,
}

impl SuffStats {
    pub fn new(n: usize, s: DMatrix<f64>) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::DimensionMismatch {
                expected: s.nrows(),
                found: s.ncols(),
            });
        }
        check_symmetric(&s)?;
        if n == 0 && s.iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidArgument("zero observations with a non-zero S".into()));
        }
        Ok(SuffStats { n, s })
    }

    /// Statistics of no data.
    pub fn empty(p: usize) -> Self {
        SuffStats {
            n: 0,
            s: DMatrix::zeros(p, p),
        }
    }

    /// Uncentred statistics of an `n x p` data matrix.
    pub fn from_data(x: &DMatrix<f64>) -> Self {
        let n = x.nrows();
        if n == 0 {
            return Self::empty(x.ncols());
        }
        let mut s = x.transpose() * x / n as f64;
        crate::linalg::symmetrize(&mut s);
        SuffStats { n, s }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn p(&self) -> usize {
        self.s.nrows()
    }

    /// `n S`.
    pub fn scatter(&self) -> DMatrix<f64> {
        &self.s * self.n as f64
    }
}

/// Log of one vertex's factor of the normalizing constant.
///
/// `pa` must be ascending and contain only indices greater than `i`.
pub fn vertex_log_normalizer(u: &DMatrix<f64>, alpha: f64, i: usize, pa: &[usize]) -> Result<f64> {
    let k = pa.len() as f64;
    let nu = alpha / 2.0 - k / 2.0 - 1.0;
    if !(nu > 0.0) {
        return Err(Error::Shape(vec![ShapeViolation {
            vertex: i,
            alpha,
            required_above: k + 2.0,
        }]));
    }
    let r = regress(u, i, pa).ok_or_else(|| Error::NotPositiveDefinite(format!("scale block of vertex {}", i + 1)))?;
    if !(r.residual_var > 0.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "scale family block of vertex {}",
            i + 1
        )));
    }
    // det U_fa = det U_pa * U_{i|pa}
    Ok(ln_gamma(nu) + (alpha / 2.0 - 1.0) * LN_2 + k / 2.0 * PI.ln()
        - 0.5 * r.parent_log_det
        - nu * r.residual_var.ln())
}

/// `log z(U, alpha)`.
pub fn log_normalizer(params: &DagWishartParams) -> Result<f64> {
    params.check_shape(false)?;
    let u = params.u.as_matrix();
    (0..params.dag.p())
        .map(|i| vertex_log_normalizer(u, params.alpha[i], i, &params.dag.parent_vec(i)))
        .sum()
}

/// `tr(L D^{-1} L^T U)` using only family blocks of `U`.
pub fn trace_precision_scale(theta: &CholeskyFactor, u: &DMatrix<f64>) -> f64 {
    let dag = theta.dag();
    (0..dag.p())
        .map(|j| {
            let fa = dag.family(j);
            let v: Vec<f64> = std::iter::once(1.0).chain(theta.l_column(j).iter().copied()).collect();
            let mut q = 0.0;
            for (a, &r) in fa.iter().enumerate() {
                for (b, &c) in fa.iter().enumerate() {
                    q += v[a] * u[(r, c)] * v[b];
                }
            }
            q / theta.d()[j]
        })
        .sum()
}

fn check_same_dag(a: &Dag, b: &Dag) -> Result<()> {
    if a != b {
        return Err(Error::InvalidArgument("arguments refer to different graphs".into()));
    }
    Ok(())
}

/// Log density of `(D, L)` with respect to Lebesgue measure on the Cholesky space.
pub fn log_density_theta(theta: &CholeskyFactor, params: &DagWishartParams) -> Result<f64> {
    check_same_dag(theta.dag(), &params.dag)?;
    let log_z = log_normalizer(params)?;
    let tr = trace_precision_scale(theta, params.u.as_matrix());
    let pow: f64 = theta.d().iter().zip(&params.alpha).map(|(d, a)| a / 2.0 * d.ln()).sum();
    Ok(-log_z - 0.5 * tr - pow)
}

/// Log density on the regression space; the map from `(D, L)` has unit Jacobian.
pub fn log_density_xi(xi: &XiPoint, params: &DagWishartParams) -> Result<f64> {
    log_density_theta(&xi.to_cholesky(), params)
}

/// Log density of an incomplete precision matrix.
pub fn log_density_precision(upsilon: &IncompleteMatrix, params: &DagWishartParams) -> Result<f64> {
    check_same_dag(upsilon.dag(), &params.dag)?;
    let (_, theta) = complete_precision(upsilon)?;
    let base = log_density_theta(&theta, params)?;
    let jac: f64 = (0..params.dag.p())
        .map(|i| (params.dag.parent_count(i) as f64 + 2.0) * theta.d()[i].ln())
        .sum();
    Ok(base + jac)
}

/// Log density of an incomplete covariance matrix.
pub fn log_density_covariance(gamma: &IncompleteMatrix, params: &DagWishartParams) -> Result<f64> {
    check_same_dag(gamma.dag(), &params.dag)?;
    let log_z = log_normalizer(params)?;
    let sigma = complete_covariance(gamma)?;
    let xi = xi_from_sigma(sigma.as_matrix(), &params.dag)?;
    let tr = trace_precision_scale(&xi.to_cholesky(), params.u.as_matrix());
    let mut dets = 0.0;
    for i in 0..params.dag.p() {
        let pa = params.dag.parent_vec(i);
        let r = regress(sigma.as_matrix(), i, &pa).expect("completion has positive-definite families");
        // alpha/2 log det S_fa - (alpha/2 - 1) log det S_pa with det S_fa = det S_pa * lambda
        dets += params.alpha[i] / 2.0 * r.residual_var.ln() + r.parent_log_det;
    }
    Ok(-log_z - 0.5 * tr - dets)
}

#[derive(Debug, Clone)]
struct VertexSampler {
    gamma: Gamma<f64>,
    eta: f64,
    mean: DVector<f64>,
    // upper-triangular C^T where U_pa = C C^T
    chol_t: DMatrix<f64>,
}

/// Exact sampler for the prior on `(D, L)`; precomputes per-vertex factors.
#[derive(Debug, Clone)]
pub struct PriorSampler {
    dag: Dag,
    vertices: Vec<VertexSampler>,
}

impl PriorSampler {
    pub fn new(params: &DagWishartParams) -> Result<Self> {
        params.check_shape(false)?;
        let u = params.u.as_matrix();
        let mut vertices = Vec::with_capacity(params.dag.p());
        for i in 0..params.dag.p() {
            let pa = params.dag.parent_vec(i);
            let r = regress(u, i, &pa).ok_or_else(|| Error::NotPositiveDefinite("scale parent block".into()))?;
            let nu = params.alpha[i] / 2.0 - pa.len() as f64 / 2.0 - 1.0;
            let gamma = Gamma::new(nu, 1.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let chol_t = if pa.is_empty() {
                DMatrix::zeros(0, 0)
            } else {
                crate::linalg::cholesky(submatrix(u, &pa, &pa))
                    .expect("checked by regress")
                    .l()
                    .transpose()
            };
            vertices.push(VertexSampler {
                gamma,
                eta: r.residual_var / 2.0,
                mean: -r.coef,
                chol_t,
            });
        }
        Ok(PriorSampler {
            dag: params.dag.clone(),
            vertices,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CholeskyFactor {
        let mut d = Vec::with_capacity(self.vertices.len());
        let mut l = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let g: f64 = v.gamma.sample(rng);
            let di = v.eta / g;
            let k = v.mean.len();
            let col = if k == 0 {
                Vec::new()
            } else {
                let z = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
                // C^{-T} z has covariance U_pa^{-1}
                let w = v.chol_t.solve_upper_triangular(&z).expect("positive pivots");
                (&v.mean + w * di.sqrt()).iter().copied().collect()
            };
            d.push(di);
            l.push(col);
        }
        CholeskyFactor::new(self.dag.clone(), d, l).expect("sampler produces valid factors")
    }
}

/// One exact draw of `(D, L)` from the prior.
pub fn sample_prior<R: Rng + ?Sized>(params: &DagWishartParams, rng: &mut R) -> Result<CholeskyFactor> {
    Ok(PriorSampler::new(params)?.sample(rng))
}

/// Conjugate update `(nS + U, alpha + n)`.
pub fn posterior(params: &DagWishartParams, stats: &SuffStats) -> Result<DagWishartParams> {
    let p = params.dag.p();
    if stats.p() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: stats.p(),
        });
    }
    if stats.n == 0 {
        return Ok(params.clone());
    }
    let mut u = params.u.as_matrix() + stats.scatter();
    crate::linalg::symmetrize(&mut u);
    let n = stats.n as f64;
    Ok(DagWishartParams {
        dag: params.dag.clone(),
        u: SpdMatrix::new(u)?,
        alpha: params.alpha.iter().map(|a| a + n).collect(),
    })
}

/// Gaussian log-likelihood of centred data summarized by `stats` at precision `L D^{-1} L^T`.
pub fn gaussian_log_likelihood(theta: &CholeskyFactor, stats: &SuffStats) -> f64 {
    let n = stats.n as f64;
    let p = theta.dag().p() as f64;
    let log_det_omega: f64 = -theta.d().iter().map(|d| d.ln()).sum::<f64>();
    -n * p / 2.0 * LN_2PI + n / 2.0 * log_det_omega - n / 2.0 * trace_precision_scale(theta, &stats.s)
}

/// `log p(X | D)` in closed form.
pub fn log_marginal_likelihood(params: &DagWishartParams, stats: &SuffStats) -> Result<f64> {
    let post = posterior(params, stats)?;
    let n = stats.n as f64;
    Ok(-n * params.dag.p() as f64 / 2.0 * LN_2PI + log_normalizer(&post)? - log_normalizer(params)?)
}

/// Prior means of `D` and of the columns of `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyMoments {
    pub mean_d: Vec<f64>,
    pub mean_l: Vec<Vec<f64>>,
}

/// `E(L[pa(i), i]) = -U_pa^{-1} U_{pa,i}`; needs `alpha_i > pa_i + 3`
/// (the marginal of the column is a t law with `alpha_i - pa_i - 2` degrees of freedom).
pub fn prior_mean_l(params: &DagWishartParams) -> Result<Vec<Vec<f64>>> {
    params.check_margin(3.0)?;
    let u = params.u.as_matrix();
    (0..params.dag.p())
        .map(|i| {
            let r = regress(u, i, &params.dag.parent_vec(i))
                .ok_or_else(|| Error::NotPositiveDefinite("scale parent block".into()))?;
            Ok(r.coef.iter().map(|v| -v).collect())
        })
        .collect()
}

/// `E(D_ii) = U_{ii|pa} / (alpha_i - pa_i - 4)`.
pub fn prior_mean_d(params: &DagWishartParams) -> Result<Vec<f64>> {
    params.check_shape(true)?;
    let u = params.u.as_matrix();
    (0..params.dag.p())
        .map(|i| {
            let pa = params.dag.parent_vec(i);
            let r = regress(u, i, &pa).ok_or_else(|| Error::NotPositiveDefinite("scale parent block".into()))?;
            Ok(r.residual_var / (params.alpha[i] - pa.len() as f64 - 4.0))
        })
        .collect()
}

pub fn prior_moments_cholesky(params: &DagWishartParams) -> Result<CholeskyMoments> {
    Ok(CholeskyMoments {
        mean_d: prior_mean_d(params)?,
        mean_l: prior_mean_l(params)?,
    })
}

/// `Cov(L[pa(i), i]) = E(D_ii) U_pa^{-1}`.
pub fn prior_cov_l(params: &DagWishartParams, i: usize) -> Result<DMatrix<f64>> {
    let ed = prior_mean_d(params)?[i];
    let pa = params.dag.parent_vec(i);
    if pa.is_empty() {
        return Ok(DMatrix::zeros(0, 0));
    }
    let block = SpdMatrix::trusted(submatrix(params.u.as_matrix(), &pa, &pa));
    Ok(block.inverse().into_matrix() * ed)
}

fn add_inverse_block(acc: &mut DMatrix<f64>, u: &DMatrix<f64>, idx: &[usize], weight: f64) -> Result<()> {
    if idx.is_empty() {
        return Ok(());
    }
    let inv = SpdMatrix::new(submatrix(u, idx, idx))?.inverse();
    for (a, &r) in idx.iter().enumerate() {
        for (b, &c) in idx.iter().enumerate() {
            acc[(r, c)] += weight * inv[(a, b)];
        }
    }
    Ok(())
}

/// Prior mean of the incomplete precision matrix.
pub fn mean_incomplete_precision(params: &DagWishartParams) -> Result<IncompleteMatrix> {
    params.check_shape(false)?;
    let p = params.dag.p();
    let u = params.u.as_matrix();
    let mut acc = DMatrix::zeros(p, p);
    for j in 0..p {
        let pa = params.dag.parent_vec(j);
        let k = pa.len() as f64;
        add_inverse_block(&mut acc, u, &params.dag.family(j), params.alpha[j] - k - 2.0)?;
        add_inverse_block(&mut acc, u, &pa, -(params.alpha[j] - k - 3.0))?;
    }
    Ok(project(&acc, &params.dag))
}

/// Prior mean of the incomplete covariance matrix, by recursion from the last
/// vertex down over a dense table of expectations.
pub fn mean_incomplete_covariance(params: &DagWishartParams) -> Result<IncompleteMatrix> {
    params.check_shape(true)?;
    let p = params.dag.p();
    let u = params.u.as_matrix();
    let mut e = DMatrix::zeros(p, p);
    for i in (0..p).rev() {
        let pa = params.dag.parent_vec(i);
        let r = regress(u, i, &pa).ok_or_else(|| Error::NotPositiveDefinite("scale parent block".into()))?;
        let ed = r.residual_var / (params.alpha[i] - pa.len() as f64 - 4.0);
        let m = &r.coef;
        for k in i + 1..p {
            let v: f64 = pa.iter().zip(m.iter()).map(|(&c, w)| e[(k, c)] * w).sum();
            e[(k, i)] = v;
            e[(i, k)] = v;
        }
        let mut ii = ed;
        if !pa.is_empty() {
            let e_pa = submatrix(&e, &pa, &pa);
            let u_pa_inv = SpdMatrix::trusted(submatrix(u, &pa, &pa)).inverse().into_matrix();
            let second = u_pa_inv * ed + m * m.transpose();
            ii += crate::linalg::trace_product(&e_pa, &second);
        }
        e[(i, i)] = ii;
    }
    Ok(project(&e, &params.dag))
}

/// Mode of the density on the regression space:
/// `lambda_i = U_{ii|pa} / alpha_i`, `beta_i = U_pa^{-1} U_{pa,i}`.
pub fn mode_xi(params: &DagWishartParams) -> Result<XiPoint> {
    params.check_shape(false)?;
    let u = params.u.as_matrix();
    let mut lambda = Vec::with_capacity(params.dag.p());
    let mut beta = Vec::with_capacity(params.dag.p());
    for i in 0..params.dag.p() {
        let r = regress(u, i, &params.dag.parent_vec(i))
            .ok_or_else(|| Error::NotPositiveDefinite("scale parent block".into()))?;
        lambda.push(r.residual_var / params.alpha[i]);
        beta.push(r.coef.iter().copied().collect());
    }
    XiPoint::new(params.dag.clone(), lambda, beta)
}

/// `log z(2K + U, alpha) - log z(U, alpha)`.
pub fn log_laplace_ratio(k: &IncompleteMatrix, params: &DagWishartParams) -> Result<f64> {
    check_same_dag(k.dag(), &params.dag)?;
    let shifted = SpdMatrix::new(k.zero_fill() * 2.0 + params.u.as_matrix())?;
    let moved = DagWishartParams {
        dag: params.dag.clone(),
        u: shifted,
        alpha: params.alpha.clone(),
    };
    Ok(log_normalizer(&moved)? - log_normalizer(params)?)
}

/// Laplace transform of the incomplete-precision law at `K`.
pub fn laplace_ratio(k: &IncompleteMatrix, params: &DagWishartParams) -> Result<f64> {
    log_laplace_ratio(k, params).map(f64::exp)
}
