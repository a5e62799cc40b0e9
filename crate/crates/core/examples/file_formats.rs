//! Generates a graph and data set and writes them in the formats the `dagw`
//! binary reads: graph and Cholesky-factor JSON, and CSV data.
//!
//!     cargo run --example file_formats -- <dir>

use std::fs::File;
use std::path::PathBuf;

use dag_wishart::chol::sample_data;
use dag_wishart::dag::random_dag;
use dag_wishart::io::{read_data_file, read_json, write_data_csv, write_json, CholeskyJson, GraphJson};
use dag_wishart::rng::substream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;
    let (dag, theta) = random_dag(5, 0.4, (0.2, 0.8), &mut substream("generate", 0, &[]))?;
    write_json(&dir.join("graph.json"), &GraphJson::from_dag(&dag))?;
    write_json(&dir.join("theta.json"), &CholeskyJson::from_factor(&theta))?;
    let x = sample_data(&theta, 25, &mut substream("sample-data", 0, &[]));
    write_data_csv(File::create(dir.join("data.csv"))?, &x)?;

    let g: GraphJson = read_json(&dir.join("graph.json"))?;
    assert_eq!(g.to_dag()?, dag);
    let t: CholeskyJson = read_json(&dir.join("theta.json"))?;
    assert_eq!(t.to_factor()?, theta);
    assert_eq!(read_data_file(&dir.join("data.csv"))?, x);
    println!("{}", std::fs::read_to_string(dir.join("graph.json"))?);
    println!("wrote graph.json, theta.json and data.csv to {}", dir.display());
    Ok(())
}
