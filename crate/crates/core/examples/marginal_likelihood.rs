//! Scores the true graph against its one-edge neighbours with the closed-form
//! marginal likelihood.
//!
//!     cargo run --release --example marginal_likelihood

use dag_wishart::chol::sample_data;
use dag_wishart::dag::{random_dag, Dag};
use dag_wishart::rng::substream;
use dag_wishart::select::Scorer;
use dag_wishart::wishart::{log_marginal_likelihood, AlphaRule, SuffStats};
use dag_wishart::{DagWishartParams, SpdMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = 8;
    let (truth, theta) = random_dag(p, 0.3, (0.4, 0.8), &mut substream("graph", 5, &[]))?;
    let stats = SuffStats::from_data(&sample_data(&theta, 200, &mut substream("data", 5, &[])));
    let rule = AlphaRule { b: 3.0, c: 1.0 };
    let scorer = Scorer::new(&stats, rule, &SpdMatrix::identity(p))?;

    let params = DagWishartParams::with_rule(truth.clone(), SpdMatrix::identity(p), rule)?;
    let base = scorer.score(&truth)?;
    println!("true graph: {} edges, score {base:.4}", truth.edge_count());
    println!(
        "direct marginal likelihood {:.4}",
        log_marginal_likelihood(&params, &stats)?
    );

    let mut better = 0;
    for k in 0..Dag::candidate_pairs(p) {
        let (i, j) = Dag::pair_at(p, k);
        let other = truth.with_toggled(i, j);
        let s = scorer.score(&other)?;
        let change = if truth.has_edge(i, j) { "drop" } else { "add " };
        println!("{change} {} -> {}  score change {:+9.4}", i + 1, j + 1, s - base);
        better += (s > base) as usize;
    }
    println!("{better} neighbours score above the truth");
    Ok(())
}
