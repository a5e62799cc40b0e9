//! Structure-recovery metrics over the ordered candidate pairs.

use crate::dag::Dag;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Set when the truth has no edges, so sensitivity is reported as 1.
    pub vacuous_sensitivity: bool,
    /// Set when the truth is complete, so specificity is reported as 1.
    pub vacuous_specificity: bool,
}

pub fn confusion(truth: &Dag, estimate: &Dag) -> Result<Confusion> {
    let p = truth.p();
    if estimate.p() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: estimate.p(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for j in 0..p {
        for i in j + 1..p {
            match (truth.has_edge(i, j), estimate.has_edge(i, j)) {
                (true, true) => tp += 1,
                (true, false) => fn_ += 1,
                (false, true) => fp += 1,
                (false, false) => tn += 1,
            }
        }
    }
    let ratio = |a: usize, b: usize| if a + b == 0 { 1.0 } else { a as f64 / (a + b) as f64 };
    Ok(Confusion {
        tp,
        fp,
        tn,
        fn_,
        sensitivity: ratio(tp, fn_),
        specificity: ratio(tn, fp),
        vacuous_sensitivity: tp + fn_ == 0,
        vacuous_specificity: tn + fp == 0,
    })
}
