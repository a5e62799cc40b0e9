//! Fits the maximum-likelihood, MAP and posterior-mean estimators on simulated
//! data and prints their Stein and L2 losses.
//!
//!     cargo run --release --example estimators -- [n]

use dag_wishart::chol::{sample_data, sigma_from_xi};
use dag_wishart::dag::random_dag;
use dag_wishart::estimators::{bayes_omega, bayes_sigma, loss_l2, loss_stein, map_estimate, mle, precision_of};
use dag_wishart::rng::substream;
use dag_wishart::wishart::{AlphaRule, SuffStats};
use dag_wishart::{DagWishartParams, SpdMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(40);
    let p = 30;
    let (dag, theta) = random_dag(p, 0.1, (0.2, 0.8), &mut substream("graph", 3, &[]))?;
    let sigma = sigma_from_xi(&theta.to_xi());
    let omega = precision_of(&sigma, &dag)?;
    let stats = SuffStats::from_data(&sample_data(&theta, n, &mut substream("data", 3, &[])));
    let params = DagWishartParams::with_rule(
        dag.clone(),
        SpdMatrix::scaled_identity(p, 3.0)?,
        AlphaRule { b: 3.0, c: 3.0 },
    )?;

    println!("p = {p}, n = {n}, {} edges", dag.edge_count());
    let fits = [
        ("mle", mle(&stats, &dag)?),
        ("map", map_estimate(&stats, &params)?),
        ("bayes-sigma", bayes_sigma(&stats, &params)?),
    ];
    for (name, s) in &fits {
        println!(
            "{name:12} sigma: stein {:8.4}  l2 {:8.4}",
            loss_stein(s.as_matrix(), sigma.as_matrix())?,
            loss_l2(sigma.as_matrix(), s.as_matrix(), &dag)?
        );
    }
    let o = bayes_omega(&stats, &params)?;
    let o_ml = precision_of(&fits[0].1, &dag)?;
    for (name, m) in [("mle", &o_ml), ("bayes-omega", &o)] {
        println!(
            "{name:12} omega: stein {:8.4}  l2 {:8.4}",
            loss_stein(m.as_matrix(), omega.as_matrix())?,
            loss_l2(omega.as_matrix(), m.as_matrix(), &dag)?
        );
    }
    Ok(())
}
