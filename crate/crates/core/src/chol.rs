//! The Cholesky space `(D, L)`, the regression space `(lambda, beta)`, and the
//! maps between them, covariances and precisions.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, regress, SpdMatrix};

/// Relative tolerance for fill outside the pattern in [`cholesky_from_precision`].
pub const PATTERN_TOL: f64 = 1e-9;

/// Default tolerance of [`is_dag_markov`].
pub const MARKOV_TOL: f64 = 1e-8;

/// `Omega = L D^{-1} L^T` with `L` unit lower triangular.
///
/// `l[j]` holds `L[pa(j)[k], j]` for the parents of `j` in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    dag: Dag,
    d: Vec<f64>,
    l: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn new(dag: Dag, d: Vec<f64>, l: Vec<Vec<f64>>) -> Result<Self> {
        let p = dag.p();
        if d.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: d.len(),
            });
        }
        if l.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: l.len(),
            });
        }
        for j in 0..p {
            if !(d[j] > 0.0 && d[j].is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "D[{}] = {} must be positive",
                    j + 1,
                    d[j]
                )));
            }
            if l[j].len() != dag.parent_count(j) {
                return Err(Error::DimensionMismatch {
                    expected: dag.parent_count(j),
                    found: l[j].len(),
                });
            }
            if l[j].iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite L entry in column {}",
                    j + 1
                )));
            }
        }
        Ok(CholeskyFactor { dag, d, l })
    }

    pub fn identity(dag: Dag) -> Self {
        let p = dag.p();
        let l = (0..p).map(|j| vec![0.0; dag.parent_count(j)]).collect();
        CholeskyFactor {
            dag,
            d: vec![1.0; p],
            l,
        }
    }

    /// Random point with `D` uniform on `[0.5, 2]` and `L` entries uniform on `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(dag: Dag, rng: &mut R) -> Self {
        let p = dag.p();
        let d = (0..p).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
        let l = (0..p)
            .map(|j| {
                (0..dag.parent_count(j))
                    .map(|_| 2.0 * rng.random::<f64>() - 1.0)
                    .collect()
            })
            .collect();
        CholeskyFactor { dag, d, l }
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn l_column(&self, j: usize) -> &[f64] {
        &self.l[j]
    }

    pub fn l_columns(&self) -> &[Vec<f64>] {
        &self.l
    }

    /// Dense unit lower-triangular `L`.
    pub fn l_dense(&self) -> DMatrix<f64> {
        let p = self.dag.p();
        let mut m = DMatrix::identity(p, p);
        for j in 0..p {
            for (i, &v) in self.dag.parents(j).zip(&self.l[j]) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn to_xi(&self) -> XiPoint {
        XiPoint {
            dag: self.dag.clone(),
            lambda: self.d.clone(),
            beta: self.l.iter().map(|c| c.iter().map(|v| -v).collect()).collect(),
        }
    }
}

/// Conditional variances `lambda_i` and regression coefficients `beta_i` of
/// each vertex on its parents. `beta_i = -L[pa(i), i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiPoint {
    dag: Dag,
    lambda: Vec<f64>,
    beta: Vec<Vec<f64>>,
}

impl XiPoint {
    pub fn new(dag: Dag, lambda: Vec<f64>, beta: Vec<Vec<f64>>) -> Result<Self> {
        let theta = CholeskyFactor::new(dag, lambda, beta)?;
        Ok(XiPoint {
            beta: theta.l,
            lambda: theta.d,
            dag: theta.dag,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn beta(&self, i: usize) -> &[f64] {
        &self.beta[i]
    }

    pub fn to_cholesky(&self) -> CholeskyFactor {
        CholeskyFactor {
            dag: self.dag.clone(),
            d: self.lambda.clone(),
            l: self.beta.iter().map(|c| c.iter().map(|v| -v).collect()).collect(),
        }
    }
}

/// `Omega = L D^{-1} L^T`, accumulated column by column so that entries outside
/// the moral pattern are exactly zero.
pub fn precision_from_cholesky(theta: &CholeskyFactor) -> SpdMatrix {
    let dag = &theta.dag;
    let p = dag.p();
    let mut omega = DMatrix::zeros(p, p);
    for j in 0..p {
        let inv = 1.0 / theta.d[j];
        let idx: Vec<usize> = dag.family(j);
        let val: Vec<f64> = std::iter::once(1.0).chain(theta.l[j].iter().copied()).collect();
        for (a, &r) in idx.iter().enumerate() {
            for (b, &c) in idx.iter().enumerate() {
                omega[(r, c)] += inv * val[a] * val[b];
            }
        }
    }
    SpdMatrix::trusted(omega)
}

/// Modified Cholesky factorization of a precision matrix that is Markov with
/// respect to `dag`. Fill outside the pattern is an error.
pub fn cholesky_from_precision(omega: &SpdMatrix, dag: &Dag) -> Result<CholeskyFactor> {
    let p = dag.p();
    if omega.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: omega.dim(),
        });
    }
    let mut w = omega.as_matrix().clone();
    let mut d = Vec::with_capacity(p);
    let mut l = Vec::with_capacity(p);
    for j in 0..p {
        let pivot = w[(j, j)];
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite(format!("pivot at vertex {}", j + 1)));
        }
        let col: Vec<f64> = (j + 1..p).map(|k| w[(k, j)] / pivot).collect();
        for k in j + 1..p {
            if !dag.has_edge(k, j) {
                let rel = w[(k, j)].abs() / (w[(k, k)].abs() * pivot).sqrt();
                if rel > PATTERN_TOL {
                    return Err(Error::PatternViolation {
                        row: k + 1,
                        col: j + 1,
                        magnitude: rel,
                    });
                }
            }
        }
        for a in j + 1..p {
            let ca = col[a - j - 1];
            if ca == 0.0 {
                continue;
            }
            for b in j + 1..p {
                w[(a, b)] -= pivot * ca * col[b - j - 1];
            }
        }
        d.push(1.0 / pivot);
        l.push(dag.parents(j).map(|k| col[k - j - 1]).collect());
    }
    CholeskyFactor::new(dag.clone(), d, l)
}

/// Rebuilds `Sigma` from the regression parameters, from the last vertex down.
pub fn sigma_from_xi(xi: &XiPoint) -> SpdMatrix {
    let dag = &xi.dag;
    let p = dag.p();
    let mut sigma = DMatrix::zeros(p, p);
    for i in (0..p).rev() {
        let pa = dag.parent_vec(i);
        let beta = &xi.beta[i];
        for k in i + 1..p {
            let v: f64 = pa.iter().zip(beta).map(|(&m, b)| sigma[(k, m)] * b).sum();
            sigma[(k, i)] = v;
            sigma[(i, k)] = v;
        }
        let mut quad = 0.0;
        for (a, &m) in pa.iter().enumerate() {
            for (b, &n) in pa.iter().enumerate() {
                quad += beta[a] * sigma[(m, n)] * beta[b];
            }
        }
        sigma[(i, i)] = xi.lambda[i] + quad;
    }
    SpdMatrix::trusted(sigma)
}

/// Regression parameters of `sigma` relative to `dag`.
///
/// Only the family blocks need to be positive definite, so a singular sample
/// covariance with enough observations per family is accepted.
pub fn xi_from_sigma(sigma: &DMatrix<f64>, dag: &Dag) -> Result<XiPoint> {
    let p = dag.p();
    if sigma.nrows() != p || sigma.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: sigma.nrows(),
        });
    }
    check_symmetric(sigma)?;
    let mut lambda = Vec::with_capacity(p);
    let mut beta = Vec::with_capacity(p);
    for i in 0..p {
        let pa = dag.parent_vec(i);
        let r = regress(sigma, i, &pa)
            .ok_or_else(|| Error::NotPositiveDefinite(format!("parent block of vertex {}", i + 1)))?;
        if !(r.residual_var > 0.0) {
            return Err(Error::NotPositiveDefinite(format!("family block of vertex {}", i + 1)));
        }
        lambda.push(r.residual_var);
        beta.push(r.coef.iter().copied().collect());
    }
    Ok(XiPoint {
        dag: dag.clone(),
        lambda,
        beta,
    })
}

/// Whether `sigma` satisfies the conditional independences of `dag`: every
/// later non-parent `k` of `i` has `Sigma[k,i] = Sigma[k,pa] Sigma[pa]^{-1} Sigma[pa,i]`.
pub fn is_dag_markov(sigma: &SpdMatrix, dag: &Dag, tol: f64) -> Result<bool> {
    let p = dag.p();
    if sigma.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: sigma.dim(),
        });
    }
    let s = sigma.as_matrix();
    for i in 0..p {
        let pa = dag.parent_vec(i);
        let r = regress(s, i, &pa)
            .ok_or_else(|| Error::NotPositiveDefinite(format!("parent block of vertex {}", i + 1)))?;
        for k in (i + 1..p).filter(|&k| !dag.has_edge(k, i)) {
            let fitted: f64 = pa.iter().zip(r.coef.iter()).map(|(&m, b)| s[(k, m)] * b).sum();
            let rel = (s[(k, i)] - fitted).abs() / (s[(k, k)] * s[(i, i)]).sqrt();
            if rel > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Draws `n` observations from the recursive system
/// `x_i = -sum_{j in pa(i)} L[j,i] x_j + e_i`, `e_i ~ N(0, D_ii)`.
pub fn sample_data<R: Rng + ?Sized>(theta: &CholeskyFactor, n: usize, rng: &mut R) -> DMatrix<f64> {
    let dag = &theta.dag;
    let p = dag.p();
    let sd: Vec<f64> = theta.d.iter().map(|v| v.sqrt()).collect();
    let mut x = DMatrix::zeros(n, p);
    let mut row = DVector::zeros(p);
    for r in 0..n {
        for i in (0..p).rev() {
            let e: f64 = rng.sample(StandardNormal);
            let mean: f64 = dag.parents(i).zip(&theta.l[i]).map(|(j, l)| -l * row[j]).sum();
            row[i] = mean + sd[i] * e;
        }
        x.set_row(r, &row.transpose());
    }
    x
}
