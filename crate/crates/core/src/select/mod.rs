//! Structure learning with a fixed vertex ordering.

pub mod lasso;
pub mod metrics;
pub mod score;
pub mod search;

pub use lasso::{lasso_dag, lasso_node, lasso_penalty, lasso_sweep};
pub use metrics::{confusion, Confusion};
pub use score::{graph_score, Scorer};
pub use search::{
    default_kappa_grid, shotgun_search, RestartSummary, SampleFrom, ScoredGraph, SearchConfig, SearchResult,
};
