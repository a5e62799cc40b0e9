use thiserror::Error;

/// A single vertex failing the shape condition `alpha_i > pa_i + margin`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeViolation {
    pub vertex: usize,
    pub alpha: f64,
    pub required_above: f64,
}

impl std::fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "vertex {}: alpha = {} must exceed {}",
            self.vertex + 1,
            self.alpha,
            self.required_above
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({parent}, {child}) violates the parent ordering (parent label must exceed child label)")]
    OrderViolation { parent: usize, child: usize },

    #[error("vertex {vertex} out of range for p = {p}")]
    VertexOutOfRange { vertex: usize, p: usize },

    #[error("duplicate edge ({parent}, {child})")]
    DuplicateEdge { parent: usize, child: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("precision matrix is not Markov with respect to the graph: fill at ({row}, {col}) of relative size {magnitude:e}")]
    PatternViolation { row: usize, col: usize, magnitude: f64 },

    #[error("incomplete matrix has a zero leading pivot")]
    ZeroLeadingPivot,

    #[error("no completion in the precision space: pivot {pivot:e} at vertex {}", vertex + 1)]
    NoPrecisionCompletion { vertex: usize, pivot: f64 },

    #[error("no completion in the covariance space: family block of vertex {} is not positive definite", vertex + 1)]
    NoCovarianceCompletion { vertex: usize },

    #[error("shape parameters violate the finiteness condition: {}", fmt_violations(.0))]
    Shape(Vec<ShapeViolation>),

    #[error("sample size {n} is below the required {required}")]
    InsufficientSamples { n: usize, required: usize },

    #[error("parent block of vertex {} is numerically singular", vertex + 1)]
    SingularParentBlock { vertex: usize },

    #[error("coordinate descent did not converge after {sweeps} sweeps (KKT residual {residual:e})")]
    LassoNoConvergence { sweeps: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_violations(v: &[ShapeViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Error {
    /// Short machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OrderViolation { .. } => "order_violation",
            Error::VertexOutOfRange { .. } => "vertex_out_of_range",
            Error::DuplicateEdge { .. } => "duplicate_edge",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::PatternViolation { .. } => "pattern_violation",
            Error::ZeroLeadingPivot => "zero_leading_pivot",
            Error::NoPrecisionCompletion { .. } => "no_precision_completion",
            Error::NoCovarianceCompletion { .. } => "no_covariance_completion",
            Error::Shape(_) => "shape_violation",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::SingularParentBlock { .. } => "singular_parent_block",
            Error::LassoNoConvergence { .. } => "lasso_no_convergence",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
