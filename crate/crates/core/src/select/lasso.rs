//! Node-wise lasso baseline with the fixed parent ordering.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dag::Dag;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LassoOptions {
    /// Stop once every KKT residual is at most this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        LassoOptions {
            tol: 1e-6,
            max_sweeps: 100_000,
        }
    }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// `(1/2n) |y - X b|^2 + tau |b|_1`.
pub fn lasso_objective(y: &DVector<f64>, x: &DMatrix<f64>, beta: &DVector<f64>, tau: f64) -> f64 {
    let r = y - x * beta;
    r.norm_squared() / (2.0 * y.len() as f64) + tau * beta.lp_norm(1)
}

/// Largest violation of the subgradient optimality conditions.
pub fn kkt_residual(y: &DVector<f64>, x: &DMatrix<f64>, beta: &DVector<f64>, tau: f64) -> f64 {
    let n = y.len() as f64;
    let g = x.transpose() * (y - x * beta) / n;
    g.iter()
        .zip(beta.iter())
        .map(|(&gj, &bj)| {
            if bj != 0.0 {
                (gj - tau * bj.signum()).abs()
            } else {
                (gj.abs() - tau).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Cyclic coordinate descent for the lasso.
pub fn lasso_node(y: &DVector<f64>, x: &DMatrix<f64>, tau: f64) -> Result<DVector<f64>> {
    lasso_node_with(y, x, tau, LassoOptions::default())
}

pub fn lasso_node_with(y: &DVector<f64>, x: &DMatrix<f64>, tau: f64, opts: LassoOptions) -> Result<DVector<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("penalty {tau} must be non-negative")));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: x.nrows(),
        });
    }
    let mut beta: DVector<f64> = DVector::zeros(x.ncols());
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        lasso_sweep(y, x, &mut beta, tau);
        residual = kkt_residual(y, x, &beta, tau);
        if residual <= opts.tol {
            return Ok(beta);
        }
    }
    Err(Error::LassoNoConvergence {
        sweeps: opts.max_sweeps,
        residual,
    })
}

/// One cyclic pass of exact coordinate minimization, updating `beta` in place.
pub fn lasso_sweep(y: &DVector<f64>, x: &DMatrix<f64>, beta: &mut DVector<f64>, tau: f64) {
    let n = y.len() as f64;
    // recomputed each pass so rounding in the running residual cannot build up
    let mut r = y - x * &*beta;
    for j in 0..x.ncols() {
        let col = x.column(j);
        let norm = col.norm_squared() / n;
        if norm == 0.0 {
            continue;
        }
        let rho = col.dot(&r) / n + norm * beta[j];
        let new = soft_threshold(rho, tau) / norm;
        let delta = new - beta[j];
        if delta != 0.0 {
            r.axpy(-delta, &col, 1.0_f64);
            beta[j] = new;
        }
    }
}

/// Penalty `2 z_q / sqrt(n)` with `q = kappa / (2 p m)` and `z_q` the upper
/// `q` normal quantile; zero when `q >= 1/2`.
pub fn lasso_penalty(kappa: f64, p: usize, candidates: usize, n: usize) -> f64 {
    let q = kappa / (2.0 * p as f64 * candidates as f64);
    if q >= 0.5 {
        return 0.0;
    }
    let z = Normal::standard().inverse_cdf(1.0 - q);
    2.0 * z / (n as f64).sqrt()
}

/// Columns centred and scaled to unit (population) variance; constant columns become zero.
pub fn standardize(data: &DMatrix<f64>) -> DMatrix<f64> {
    let n = data.nrows() as f64;
    let mut out = data.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / n).sqrt();
        if sd > 0.0 {
            col /= sd;
        } else {
            col.fill(0.0);
        }
    }
    out
}

/// Regresses each vertex on all later vertices and keeps the non-zero coefficients as edges.
pub fn lasso_dag(data: &DMatrix<f64>, kappa: f64) -> Result<Dag> {
    let (n, p) = data.shape();
    if n < 2 {
        return Err(Error::InsufficientSamples { n, required: 2 });
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa {kappa} must be positive")));
    }
    let z = standardize(data);
    let mut edges = Vec::new();
    for i in 0..p.saturating_sub(1) {
        let m = p - i - 1;
        let tau = lasso_penalty(kappa, p, m, n);
        let y = z.column(i).into_owned();
        let x = z.columns(i + 1, m).into_owned();
        let beta = lasso_node(&y, &x, tau)?;
        for (k, b) in beta.iter().enumerate() {
            if *b != 0.0 {
                edges.push((i + 1 + k, i));
            }
        }
    }
    Dag::new(p, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(n, k, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn zero_penalty_is_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = gaussian(40, 4, &mut rng);
        let y = DVector::from_fn(40, |_, _| rng.sample::<f64, _>(StandardNormal));
        let beta = lasso_node_with(
            &y,
            &x,
            0.0,
            LassoOptions {
                tol: 1e-12,
                max_sweeps: 100_000,
            },
        )
        .unwrap();
        let ls = (x.transpose() * &x).cholesky().unwrap().solve(&(x.transpose() * &y));
        assert_relative_eq!(beta, ls, epsilon = 1e-9);
    }

    #[test]
    fn orthonormal_design_soft_thresholds() {
        let n = 4;
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        let y = DVector::from_vec(vec![2.0, 0.5, 0.3, -1.0]);
        let tau = 0.3;
        let beta = lasso_node(&y, &x, tau).unwrap();
        for j in 0..2 {
            let z = x.column(j).dot(&y) / n as f64;
            assert_relative_eq!(beta[j], soft_threshold(z, tau), epsilon = 1e-12);
        }
    }

    #[test]
    fn kkt_on_random_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = standardize(&gaussian(50, 5, &mut rng));
        let y = DVector::from_fn(50, |i, _| x[(i, 0)] * 0.8 + rng.sample::<f64, _>(StandardNormal));
        let tau = 0.1;
        let beta = lasso_node(&y, &x, tau).unwrap();
        assert!(kkt_residual(&y, &x, &beta, tau) <= 1e-6);
        let g = x.transpose() * (&y - &x * &beta) / 50.0;
        for j in 0..5 {
            assert!(g[j].abs() <= tau + 1e-6);
            if beta[j] != 0.0 {
                assert_relative_eq!(g[j], tau * beta[j].signum(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn penalty_example() {
        let tau = lasso_penalty(0.1, 11, 1, 7466);
        assert!((tau - 0.0604).abs() < 5e-4, "tau {tau}");
        assert_eq!(lasso_penalty(50.0, 50, 1, 100), 0.0);
    }

    #[test]
    fn lasso_dag_respects_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (_, theta) = crate::dag::random_dag(8, 0.3, (0.5, 0.9), &mut rng).unwrap();
        let x = crate::chol::sample_data(&theta, 200, &mut rng);
        let d = lasso_dag(&x, 0.1).unwrap();
        assert!(d.edges().all(|(i, j)| i > j));
    }
}
