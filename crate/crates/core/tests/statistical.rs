//! Monte Carlo checks of the densities and estimators.

mod common;

use dag_wishart::chol::{precision_from_cholesky, sample_data, sigma_from_xi, CholeskyFactor, XiPoint};
use dag_wishart::completion::project;
use dag_wishart::dag::Dag;
use dag_wishart::estimators::{bayes_sigma, map_estimate, mle};
use dag_wishart::wishart::{
    log_density_covariance, log_density_precision, log_density_theta, log_density_xi, log_normalizer, sample_prior,
    trace_precision_scale, AlphaRule, SuffStats,
};
use dag_wishart::{DagWishartParams, SpdMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `-tr(Omega U)/2 - sum alpha_i/2 log D_ii`, written out without the crate's
/// sparse trace.
fn unnormalized(theta: &CholeskyFactor, u: &DMatrix<f64>, alpha: &[f64]) -> f64 {
    let omega = precision_from_cholesky(theta).into_matrix();
    let tr = (omega * u).trace();
    -0.5 * tr - theta.d().iter().zip(alpha).map(|(d, a)| a / 2.0 * d.ln()).sum::<f64>()
}

fn mean_se(w: &[f64]) -> (f64, f64) {
    let n = w.len() as f64;
    let m = w.iter().sum::<f64>() / n;
    let v = w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn unnormalized_density_matches_library() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let dag = common::random_graph(4, 0.5, &mut r);
        let params = common::random_params(&dag, 3.0, 6.0, &mut r);
        let theta = CholeskyFactor::random(dag, &mut r);
        let a = log_density_theta(&theta, &params).unwrap() + log_normalizer(&params).unwrap();
        let b = unnormalized(&theta, params.u().as_matrix(), params.alpha());
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} {b}");
        let tr = trace_precision_scale(&theta, params.u().as_matrix());
        assert!((tr - (precision_from_cholesky(&theta).into_matrix() * params.u().as_matrix()).trace()).abs() < 1e-10);
    }
}

/// Mass of the unnormalized density over `log D` in `[-20, top]`, by uniform
/// sampling of `log D` and a wide Gaussian proposal for `L`.
fn truncated_mass(dag: &Dag, u: &DMatrix<f64>, alpha: &[f64], top: f64, n: usize, r: &mut ChaCha8Rng) -> f64 {
    let p = dag.p();
    let width = top + 20.0;
    let mut total = 0.0;
    for _ in 0..n {
        let t: Vec<f64> = (0..p).map(|_| r.random_range(-20.0..top)).collect();
        let d: Vec<f64> = t.iter().map(|x| x.exp()).collect();
        let mut log_q = -(p as f64) * width.ln();
        let l: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                dag.parents(j)
                    .map(|k| {
                        // conditional scale of L given D_jj is sqrt(D_jj / U_kk)
                        let s = 2.0 * (d[j] / u[(k, k)]).sqrt();
                        let z: f64 = r.sample(StandardNormal);
                        log_q += -0.5 * z * z - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
                        s * z
                    })
                    .collect()
            })
            .collect();
        let theta = CholeskyFactor::new(dag.clone(), d, l).unwrap();
        // Jacobian of D = exp(t)
        let log_f = unnormalized(&theta, u, alpha) + t.iter().sum::<f64>();
        total += (log_f - log_q).exp();
    }
    total / n as f64
}

#[test]
fn normalizer_is_finite_exactly_above_the_boundary() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let single = Dag::empty(1);
    let pair = Dag::new(2, &[(1, 0)]).unwrap();
    let u1 = DMatrix::from_element(1, 1, 2.0);
    let u2 = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    // (graph, U, alpha, expected finite)
    let probes: Vec<(&Dag, &DMatrix<f64>, Vec<f64>, bool)> = vec![
        (&single, &u1, vec![2.0], false),
        (&single, &u1, vec![1.5], false),
        (&single, &u1, vec![3.0], true),
        (&pair, &u2, vec![3.0, 4.0], false),
        (&pair, &u2, vec![4.0, 2.0], false),
        (&pair, &u2, vec![4.0, 3.0], true),
        (&pair, &u2, vec![4.0, 4.0], true),
    ];
    for (dag, u, alpha, finite) in probes {
        let masses: Vec<f64> = [10.0, 40.0, 160.0]
            .iter()
            .map(|&top| truncated_mass(dag, u, &alpha, top, 200_000, &mut r))
            .collect();
        let growth = masses[2] / masses[0];
        if finite {
            assert!(growth < 1.2, "alpha {alpha:?}: {masses:?}");
            let params = DagWishartParams::new(dag.clone(), SpdMatrix::new(u.clone()).unwrap(), alpha.clone()).unwrap();
            let z = log_normalizer(&params).unwrap().exp();
            assert!(
                (masses[2] / z - 1.0).abs() < 0.1,
                "alpha {alpha:?}: {} vs {z}",
                masses[2]
            );
        } else {
            assert!(growth > 3.0, "alpha {alpha:?}: {masses:?}");
            let params = DagWishartParams::new(dag.clone(), SpdMatrix::new(u.clone()).unwrap(), alpha.clone()).unwrap();
            assert!(params.check_shape(false).is_err());
        }
    }
}

fn xi_coords(xi: &XiPoint) -> Vec<f64> {
    let mut v = xi.lambda().to_vec();
    for i in 0..xi.dag().p() {
        v.extend_from_slice(xi.beta(i));
    }
    v
}

fn xi_from_coords(dag: &Dag, v: &[f64]) -> XiPoint {
    let p = dag.p();
    let mut k = p;
    let beta = (0..p)
        .map(|i| {
            let m = dag.parent_count(i);
            let b = v[k..k + m].to_vec();
            k += m;
            b
        })
        .collect();
    XiPoint::new(dag.clone(), v[..p].to_vec(), beta).unwrap()
}

/// Importance-sampling estimate of the total mass of each density, with the
/// proposal being the push-forward of a heavier-tailed prior on `(D, L)`.
#[test]
fn densities_integrate_to_one_in_every_space() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let n = 200_000;
    for case in 0..6 {
        let p = 1 + case % 3;
        let dag = common::random_graph(p, 0.7, &mut r);
        let params = common::random_params(&dag, 4.0, 7.0, &mut r);
        let heavy_u = SpdMatrix::new(params.u().as_matrix() * 0.7).unwrap();
        let heavy_alpha: Vec<f64> = params.alpha().iter().map(|a| a - 1.0).collect();
        let proposal = DagWishartParams::new(dag.clone(), heavy_u, heavy_alpha).unwrap();

        let mut w = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for _ in 0..n {
            let theta = sample_prior(&proposal, &mut r).unwrap();
            let log_q = log_density_theta(&theta, &proposal).unwrap();
            let tc = common::theta_coords(&theta);
            w[0].push((log_density_theta(&theta, &params).unwrap() - log_q).exp());

            let jx = common::fd_jacobian(|v| xi_coords(&common::theta_from_coords(&dag, v).to_xi()), &tc, 1e-6);
            let xi = theta.to_xi();
            w[1].push((log_density_xi(&xi, &params).unwrap() + common::ln_abs_det(&jx) - log_q).exp());

            let to_ups = |v: &[f64]| {
                let t = common::theta_from_coords(&dag, v);
                common::incomplete_coords(&project(precision_from_cholesky(&t).as_matrix(), &dag))
            };
            let ju = common::fd_jacobian(to_ups, &tc, 1e-6);
            let ups = project(precision_from_cholesky(&theta).as_matrix(), &dag);
            w[2].push((log_density_precision(&ups, &params).unwrap() + common::ln_abs_det(&ju) - log_q).exp());

            let to_gam = |v: &[f64]| {
                let t = common::theta_from_coords(&dag, v);
                common::incomplete_coords(&project(sigma_from_xi(&t.to_xi()).as_matrix(), &dag))
            };
            let jg = common::fd_jacobian(to_gam, &tc, 1e-6);
            let gam = project(sigma_from_xi(&theta.to_xi()).as_matrix(), &dag);
            w[3].push((log_density_covariance(&gam, &params).unwrap() + common::ln_abs_det(&jg) - log_q).exp());
        }
        for (space, ws) in ["cholesky", "regression", "precision", "covariance"].iter().zip(&w) {
            let (m, se) = mean_se(ws);
            assert!((m - 1.0).abs() < 3.0 * se.max(1e-3), "{space} case {case}: {m} +- {se}");
        }
    }
}

#[test]
fn xi_coordinates_round_trip() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let dag = common::random_graph(5, 0.5, &mut r);
    let xi = CholeskyFactor::random(dag.clone(), &mut r).to_xi();
    assert_eq!(xi_from_coords(&dag, &xi_coords(&xi)), xi);
}

fn sup_norm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

#[test]
fn estimators_shrink_towards_the_mle_as_n_grows() {
    let mut map_ok = 0;
    let mut bayes_ok = 0;
    for seed in 0..3 {
        let mut r = ChaCha8Rng::seed_from_u64(100 + seed);
        let dag = common::random_graph(8, 0.3, &mut r);
        let truth = CholeskyFactor::random(dag.clone(), &mut r);
        let x = sample_data(&truth, 5000, &mut r);
        let params =
            DagWishartParams::with_rule(dag.clone(), SpdMatrix::identity(8), AlphaRule { b: 3.0, c: 3.0 }).unwrap();
        let mut gaps_map = Vec::new();
        let mut gaps_bayes = Vec::new();
        for n in [50, 500, 5000] {
            let stats = SuffStats::from_data(&x.rows(0, n).into_owned());
            let ml = mle(&stats, &dag).unwrap().into_matrix();
            gaps_map.push(sup_norm(map_estimate(&stats, &params).unwrap().as_matrix(), &ml));
            gaps_bayes.push(sup_norm(bayes_sigma(&stats, &params).unwrap().as_matrix(), &ml));
        }
        map_ok += gaps_map.windows(2).all(|w| w[1] < w[0]) as usize;
        bayes_ok += gaps_bayes.windows(2).all(|w| w[1] < w[0]) as usize;
    }
    assert!(map_ok >= 2, "map decreasing on {map_ok}/3 seeds");
    assert!(bayes_ok >= 2, "bayes decreasing on {bayes_ok}/3 seeds");
}
