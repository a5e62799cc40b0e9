//! Draws from a DAG-Wishart prior and compares sample means of `D` and `L`
//! with the closed forms.
//!
//!     cargo run --release --example prior_sampling

use dag_wishart::dag::Dag;
use dag_wishart::rng::substream;
use dag_wishart::wishart::{log_normalizer, prior_moments_cholesky, sample_prior, AlphaRule};
use dag_wishart::{DagWishartParams, SpdMatrix};
use nalgebra::DMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 1 <- 3, 2 <- 3, 1 <- 4 (labels are 1-based)
    let dag = Dag::from_labels(4, &[(3, 1), (3, 2), (4, 1)])?;
    let u = SpdMatrix::new(DMatrix::from_row_slice(
        4,
        4,
        &[
            2.0, 0.3, 0.2, 0.1, 0.3, 1.5, 0.4, 0.0, 0.2, 0.4, 1.0, 0.2, 0.1, 0.0, 0.2, 1.2,
        ],
    ))?;
    let params = DagWishartParams::with_rule(dag.clone(), u, AlphaRule { b: 6.0, c: 1.0 })?;
    println!("alpha = {:?}", params.alpha());
    println!("log normalizer = {:.6}", log_normalizer(&params)?);

    let exact = prior_moments_cholesky(&params)?;
    let draws = 200_000;
    let mut rng = substream("prior", 7, &[]);
    let mut sum_d = [0.0; 4];
    let mut sum_l: Vec<Vec<f64>> = (0..4).map(|j| vec![0.0; dag.parent_count(j)]).collect();
    for _ in 0..draws {
        let theta = sample_prior(&params, &mut rng)?;
        for j in 0..4 {
            sum_d[j] += theta.d()[j];
            for (s, v) in sum_l[j].iter_mut().zip(theta.l_column(j)) {
                *s += v;
            }
        }
    }
    for j in 0..4 {
        println!(
            "D{}   exact {:.4}  sample {:.4}",
            j + 1,
            exact.mean_d[j],
            sum_d[j] / draws as f64
        );
        for (k, pa) in dag.parents(j).enumerate() {
            println!(
                "L{}{}  exact {:+.4} sample {:+.4}",
                pa + 1,
                j + 1,
                exact.mean_l[j][k],
                sum_l[j][k] / draws as f64
            );
        }
    }
    Ok(())
}
