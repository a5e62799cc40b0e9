//! A small version of the risk-improvement study: Bayes and MAP estimators
//! against maximum likelihood over replicated data sets.
//!
//!     cargo run --release --example relative_risk

use dag_wishart::dag::random_dag;
use dag_wishart::estimators::{improvement_table, Hyper, ImprovementConfig, Target};
use dag_wishart::rng::substream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (_, theta) = random_dag(20, 0.1, (0.2, 0.8), &mut substream("graph", 4, &[]))?;
    let config = ImprovementConfig {
        hypers: vec![Hyper { c: 3.0, b: 3.0, u: 3.0 }],
        ns: vec![30, 100],
        replications: 30,
        targets: vec![Target::Sigma, Target::Omega],
        seed: 4,
    };
    for row in improvement_table(&theta, &config)? {
        println!(
            "{:?} n={:3} {:16} {:3} {:+6.1}% (se {:.1})",
            row.target, row.n, row.estimator, row.loss, row.improvement_pct, row.mc_se
        );
    }
    Ok(())
}
