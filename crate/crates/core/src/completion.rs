//! Incomplete matrices (values on the diagonal and on edge positions only) and
//! their completions into precision or covariance matrices Markov w.r.t. a DAG.

use nalgebra::DMatrix;

use crate::chol::{precision_from_cholesky, CholeskyFactor};
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::linalg::{regress, submatrix, SpdMatrix};

/// Relative pivot threshold of [`complete_precision`].
pub const PIVOT_EPS: f64 = 1e-12;

/// Symmetric matrix specified on the diagonal and on the edges of a DAG.
///
/// `off[j][k]` is the value at `(pa(j)[k], j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteMatrix {
    dag: Dag,
    diag: Vec<f64>,
    off: Vec<Vec<f64>>,
}

impl IncompleteMatrix {
    pub fn new(dag: Dag, diag: Vec<f64>, off: Vec<Vec<f64>>) -> Result<Self> {
        let p = dag.p();
        if diag.len() != p || off.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: diag.len().min(off.len()),
            });
        }
        for (j, col) in off.iter().enumerate() {
            if col.len() != dag.parent_count(j) {
                return Err(Error::DimensionMismatch {
                    expected: dag.parent_count(j),
                    found: col.len(),
                });
            }
        }
        Ok(IncompleteMatrix { dag, diag, off })
    }

    /// Builds from `(row, col, value)` triples on edge positions (either orientation).
    pub fn from_entries(dag: Dag, diag: Vec<f64>, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut off: Vec<Vec<Option<f64>>> = (0..dag.p()).map(|j| vec![None; dag.parent_count(j)]).collect();
        for &(a, b, v) in entries {
            let (i, j) = if a > b { (a, b) } else { (b, a) };
            if i >= dag.p() {
                return Err(Error::VertexOutOfRange {
                    vertex: i + 1,
                    p: dag.p(),
                });
            }
            let pos = dag
                .parents(j)
                .position(|k| k == i)
                .ok_or_else(|| Error::InvalidArgument(format!("({}, {}) is not an edge position", i + 1, j + 1)))?;
            off[j][pos] = Some(v);
        }
        let mut filled = Vec::with_capacity(dag.p());
        for (j, col) in off.into_iter().enumerate() {
            let mut c = Vec::with_capacity(col.len());
            for (k, v) in col.into_iter().enumerate() {
                c.push(v.ok_or_else(|| {
                    let i = dag.parents(j).nth(k).unwrap();
                    Error::InvalidArgument(format!("missing value at ({}, {})", i + 1, j + 1))
                })?);
            }
            filled.push(c);
        }
        IncompleteMatrix::new(dag, diag, filled)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_column(&self, j: usize) -> &[f64] {
        &self.off[j]
    }

    /// Number of specified values, `#edges + p`.
    pub fn len(&self) -> usize {
        self.dag.edge_count() + self.dag.p()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at `(a, b)` if that position is specified.
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        if a == b {
            return self.diag.get(a).copied();
        }
        let (i, j) = if a > b { (a, b) } else { (b, a) };
        self.dag.parents(j).position(|k| k == i).map(|pos| self.off[j][pos])
    }

    /// `(row, col, value)` for every specified off-diagonal entry, `row > col`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dag.p()).flat_map(move |j| self.dag.parents(j).zip(&self.off[j]).map(move |(i, &v)| (i, j, v)))
    }

    /// Dense matrix with unspecified entries set to zero.
    pub fn zero_fill(&self) -> DMatrix<f64> {
        let p = self.dag.p();
        let mut m = DMatrix::zeros(p, p);
        for i in 0..p {
            m[(i, i)] = self.diag[i];
        }
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// Largest absolute difference over the specified positions.
    pub fn max_abs_diff(&self, other: &IncompleteMatrix) -> f64 {
        let d = self.diag.iter().zip(&other.diag).map(|(a, b)| (a - b).abs());
        let o = self
            .off
            .iter()
            .flatten()
            .zip(other.off.iter().flatten())
            .map(|(a, b)| (a - b).abs());
        d.chain(o).fold(0.0, f64::max)
    }
}

/// Keeps the diagonal and edge entries of `a`.
pub fn project(a: &DMatrix<f64>, dag: &Dag) -> IncompleteMatrix {
    let p = dag.p();
    assert_eq!(a.nrows(), p, "matrix dimension must match the graph");
    IncompleteMatrix {
        dag: dag.clone(),
        diag: (0..p).map(|i| a[(i, i)]).collect(),
        off: (0..p).map(|j| dag.parents(j).map(|i| a[(i, j)]).collect()).collect(),
    }
}

/// Unique completion of `upsilon` into a precision matrix Markov w.r.t. its DAG.
///
/// Returns the completed matrix and its factor `(D, L)`.
pub fn complete_precision(upsilon: &IncompleteMatrix) -> Result<(SpdMatrix, CholeskyFactor)> {
    let dag = &upsilon.dag;
    let p = dag.p();
    if upsilon.diag[0] == 0.0 {
        return Err(Error::ZeroLeadingPivot);
    }
    let scale = upsilon.diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut w = upsilon.zero_fill();
    let mut d = Vec::with_capacity(p);
    let mut l = Vec::with_capacity(p);
    for j in 0..p {
        let pivot = w[(j, j)];
        if !(pivot > PIVOT_EPS * scale) {
            return Err(Error::NoPrecisionCompletion { vertex: j, pivot });
        }
        let pa = dag.parent_vec(j);
        let col: Vec<f64> = pa.iter().map(|&i| w[(i, j)] / pivot).collect();
        for (a, &r) in pa.iter().enumerate() {
            for (b, &c) in pa.iter().enumerate() {
                w[(r, c)] -= pivot * col[a] * col[b];
            }
        }
        d.push(1.0 / pivot);
        l.push(col);
    }
    let theta = CholeskyFactor::new(dag.clone(), d, l)?;
    Ok((precision_from_cholesky(&theta), theta))
}

/// Unique completion of `gamma` into a covariance matrix Markov w.r.t. its DAG,
/// filling non-parent entries from the last vertex down.
pub fn complete_covariance(gamma: &IncompleteMatrix) -> Result<SpdMatrix> {
    let dag = &gamma.dag;
    let p = dag.p();
    let mut s = gamma.zero_fill();
    for j in (0..p).rev() {
        let fa = dag.family(j);
        if crate::linalg::cholesky(submatrix(&s, &fa, &fa)).is_none() {
            return Err(Error::NoCovarianceCompletion { vertex: j });
        }
        let pa = &fa[1..];
        let r = regress(&s, j, pa).ok_or(Error::NoCovarianceCompletion { vertex: j })?;
        for k in (j + 1..p).filter(|&k| !dag.has_edge(k, j)) {
            let v: f64 = pa.iter().zip(r.coef.iter()).map(|(&m, c)| s[(k, m)] * c).sum();
            s[(k, j)] = v;
            s[(j, k)] = v;
        }
    }
    Ok(SpdMatrix::trusted(s))
}
