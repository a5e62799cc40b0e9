//! Dense linear-algebra helpers shared by the parametrization, completion and
//! prior modules.
//!
//! Index sets are always ascending `usize` slices; the empty set is allowed
//! everywhere and follows the zero-dimensional block conventions
//! (`det` of an empty block is 1, Schur complements reduce to the diagonal).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Relative symmetry tolerance accepted by [`SpdMatrix::new`].
const SYMMETRY_TOL: f64 = 1e-12;

/// A dense symmetric positive-definite matrix.
///
/// Used for covariances, precisions, scale matrices and Schur complements.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    /// Validates symmetry (relative 1e-12) and positive definiteness.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        check_symmetric(&m)?;
        if Cholesky::new(m.clone()).is_none() {
            return Err(Error::NotPositiveDefinite("Cholesky factorization failed".into()));
        }
        Ok(SpdMatrix(m))
    }

    /// Wraps a matrix whose positive definiteness is guaranteed by construction.
    pub(crate) fn trusted(m: DMatrix<f64>) -> Self {
        SpdMatrix(m)
    }

    pub fn identity(p: usize) -> Self {
        SpdMatrix(DMatrix::identity(p, p))
    }

    pub fn scaled_identity(p: usize, u: f64) -> Result<Self> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::NotPositiveDefinite(format!("scale {u} must be positive")));
        }
        Ok(SpdMatrix(DMatrix::identity(p, p) * u))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Inverse through the Cholesky factor.
    pub fn inverse(&self) -> SpdMatrix {
        let chol = Cholesky::new(self.0.clone()).expect("SpdMatrix holds a positive-definite matrix");
        let mut inv = chol.inverse();
        symmetrize(&mut inv);
        SpdMatrix(inv)
    }

    pub fn log_det(&self) -> f64 {
        log_det_spd(&self.0).expect("SpdMatrix holds a positive-definite matrix")
    }
}

impl std::ops::Index<(usize, usize)> for SpdMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::NotPositiveDefinite(format!(
                    "asymmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// Averages the two triangles in place.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let p = m.nrows();
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Principal or rectangular block `m[rows, cols]`.
pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])])
}

pub fn subvector(m: &DMatrix<f64>, rows: &[usize], col: usize) -> DVector<f64> {
    DVector::from_fn(rows.len(), |a, _| m[(rows[a], col)])
}

pub fn cholesky(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(m)
}

/// Log-determinant of a symmetric positive-definite matrix; `None` if the
/// Cholesky factorization fails. The empty matrix has log-determinant 0.
pub fn log_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    if m.nrows() == 0 {
        return Some(0.0);
    }
    let chol = Cholesky::new(m.clone())?;
    Some(chol_log_det(&chol))
}

pub(crate) fn chol_log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    let l = chol.l_dirty();
    (0..l.nrows()).map(|k| l[(k, k)].ln()).sum::<f64>() * 2.0
}

/// Regression of variable `i` on the variables `pa` under the covariance-like
/// matrix `m`: coefficients `m[pa,pa]^{-1} m[pa,i]`, residual variance
/// `m[i,i] - m[i,pa] coef` and `log det m[pa,pa]`.
#[derive(Debug, Clone)]
pub struct Regression {
    pub coef: DVector<f64>,
    pub residual_var: f64,
    pub parent_log_det: f64,
}

/// Computes [`Regression`] through a Cholesky solve of the parent block.
///
/// Returns `None` when the parent block is not positive definite.
pub fn regress(m: &DMatrix<f64>, i: usize, pa: &[usize]) -> Option<Regression> {
    if pa.is_empty() {
        return Some(Regression {
            coef: DVector::zeros(0),
            residual_var: m[(i, i)],
            parent_log_det: 0.0,
        });
    }
    let block = submatrix(m, pa, pa);
    let chol = Cholesky::new(block)?;
    let rhs = subvector(m, pa, i);
    let coef = chol.solve(&rhs);
    let residual_var = m[(i, i)] - rhs.dot(&coef);
    Some(Regression {
        coef,
        residual_var,
        parent_log_det: chol_log_det(&chol),
    })
}

/// `tr(A B)` for square matrices of equal size.
pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum()
}
