//! Completes partially specified precision and covariance matrices over a
//! DAG, including a covariance pattern that has no positive-definite completion.
//!
//!     cargo run --example completion

use dag_wishart::chol::{precision_from_cholesky, sigma_from_xi, CholeskyFactor};
use dag_wishart::completion::{complete_covariance, complete_precision, project, IncompleteMatrix};
use dag_wishart::dag::Dag;
use dag_wishart::rng::substream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // the four-cycle 1 <- 2, 1 <- 3, 2 <- 4, 3 <- 4 is not perfect
    let dag = Dag::from_labels(4, &[(2, 1), (3, 1), (4, 2), (4, 3)])?;
    println!("{:?}", dag.classify());

    let theta = CholeskyFactor::random(dag.clone(), &mut substream("completion", 1, &[]));
    let omega = precision_from_cholesky(&theta);
    let upsilon = project(omega.as_matrix(), &dag);
    let (omega_c, theta_c) = complete_precision(&upsilon)?;
    println!(
        "precision completion error {:.2e}",
        (omega_c.as_matrix() - omega.as_matrix()).amax()
    );
    println!("recovered D = {:?}", theta_c.d());
    println!("completed precision {:.4}", omega_c.as_matrix());

    let sigma = sigma_from_xi(&theta.to_xi());
    let gamma = project(sigma.as_matrix(), &dag);
    let sigma_c = complete_covariance(&gamma)?;
    println!(
        "covariance completion error {:.2e}",
        (sigma_c.as_matrix() - sigma.as_matrix()).amax()
    );

    // v-structure 2 -> 1 <- 3: strong correlations on both edges force
    // |corr(2, 3)| > 1 once the missing entry is filled by independence
    let v = Dag::from_labels(3, &[(2, 1), (3, 1)])?;
    let bad = IncompleteMatrix::from_entries(v, vec![1.0; 3], &[(1, 0, 0.9), (2, 0, 0.9)])?;
    match complete_covariance(&bad) {
        Ok(s) => println!("unexpected completion {s:?}"),
        Err(e) => println!("no covariance completion: {e}"),
    }
    match complete_precision(&bad) {
        Ok((o, _)) => println!("precision completion exists {:.4}", o.as_matrix()),
        Err(e) => println!("no precision completion: {e}"),
    }
    Ok(())
}
