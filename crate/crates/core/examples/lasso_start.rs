//! Node-wise lasso graphs across the starting grid used by the search.
//!
//!     cargo run --release --example lasso_start

use dag_wishart::chol::sample_data;
use dag_wishart::dag::random_dag;
use dag_wishart::rng::substream;
use dag_wishart::select::{confusion, default_kappa_grid, lasso_dag, lasso_penalty};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (p, n) = (20, 400);
    let (truth, theta) = random_dag(p, 0.1, (0.3, 0.8), &mut substream("graph", 2, &[]))?;
    let data = sample_data(&theta, n, &mut substream("data", 2, &[]));
    println!("true graph has {} edges", truth.edge_count());
    println!(
        "penalty at kappa 0.1, one candidate: {:.5}",
        lasso_penalty(0.1, p, 1, n)
    );
    for kappa in default_kappa_grid(16, p) {
        let g = lasso_dag(&data, kappa)?;
        let c = confusion(&truth, &g)?;
        println!(
            "kappa {kappa:9.5}  edges {:3}  sensitivity {:.3}  specificity {:.3}",
            g.edge_count(),
            c.sensitivity,
            c.specificity
        );
    }
    Ok(())
}
