use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("unsupported base: {0}")]
    UnsupportedBase(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("height field leaves the tubular neighborhood: max |psi| = {max_abs} >= width {width}")]
    LeavesTubularNeighborhood { max_abs: f64, width: f64 },

    #[error("degenerate graph at grid point {point}: det g = {det}")]
    DegenerateGraph { point: usize, det: f64 },

    #[error("incomplete bundle: {0} missing")]
    IncompleteBundle(&'static str),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("derivative order {requested} unsupported (max {max})")]
    UnsupportedOrder { requested: usize, max: usize },

    #[error("projection undefined: {0}")]
    ProjectionUndefined(String),

    #[error("no valid exponent: 1/p = {inverse} is negative")]
    NoValidExponent { inverse: String },

    #[error("excluded case: r = n/(m-j) != 1 with theta = 1")]
    ExcludedCase,

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error(
        "eigen-iteration did not converge after {iterations} iterations \
         (last relative change {last_change:e}, estimate {estimate})"
    )]
    ConvergenceFailure {
        iterations: usize,
        last_change: f64,
        estimate: f64,
    },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
}

impl GraphError {
    /// Stable kebab-case tag, used as the status column of result tables.
    pub fn kind(&self) -> &'static str {
        match self {
            GraphError::UnsupportedBase(_) => "unsupported-base",
            GraphError::InvalidField(_) => "invalid-field",
            GraphError::InvalidGrid(_) => "invalid-grid",
            GraphError::LeavesTubularNeighborhood { .. } => "leaves-tubular-neighborhood",
            GraphError::DegenerateGraph { .. } => "degenerate-graph",
            GraphError::IncompleteBundle(_) => "incomplete-bundle",
            GraphError::InvalidExponent(_) => "invalid-exponent",
            GraphError::UnsupportedOrder { .. } => "unsupported-order",
            GraphError::ProjectionUndefined(_) => "projection-undefined",
            GraphError::NoValidExponent { .. } => "no-valid-exponent",
            GraphError::ExcludedCase => "excluded-case",
            GraphError::UndefinedRatio(_) => "undefined-ratio",
            GraphError::ConvergenceFailure { .. } => "convergence-failure",
            GraphError::InvalidFamily(_) => "invalid-family",
            GraphError::ShapeMismatch { .. } => "shape-mismatch",
        }
    }
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;
