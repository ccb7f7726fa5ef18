use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} lies outside the weight table (|n| <= {max})")]
    WeightRange { index: i64, max: i64 },

    #[error("potential is not of real type")]
    NotRealType,

    #[error("overflow while evaluating the discriminant at λ = {re} + {im}i; try a smaller |Im λ|")]
    Overflow { re: f64, im: f64 },

    #[error("|λ| = {abs} exceeds the evaluator cap {cap}")]
    LambdaCap { abs: f64, cap: f64 },

    #[error("indexing error: winding number {found}, expected {expected}")]
    Indexing { found: i64, expected: i64 },

    #[error("root search failed: {0}")]
    Convergence(String),

    #[error("Δ²-4 nearly vanishes on the contour after {attempts} perturbations")]
    Boundary { attempts: usize },

    #[error("spectrum inconsistency at n = {n}: {detail}")]
    SpectrumInconsistency { n: i64, detail: String },

    #[error("quadrature did not converge for n = {n}, k = {k}: last change {change:e}")]
    Quadrature { n: i64, k: u32, change: f64 },

    #[error("contour geometry error at n = {n}: {detail}")]
    Geometry { n: i64, detail: String },

    #[error("grid of size {given} is too small, need at least {required}")]
    GridSize { required: usize, given: usize },

    #[error("threshold not met: {0}")]
    Threshold(String),

    #[error("ill-conditioned reduction: {0}")]
    Conditioning(String),

    #[error("mean value node undefined for n = {0}: the gap is collapsed")]
    UndefinedNode(i64),

    #[error("index {n} not available (computed range |n| <= {n_max})")]
    IndexRange { n: i64, n_max: i64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::WeightRange { .. } => "weight-range",
            Error::NotRealType => "not-real-type",
            Error::Overflow { .. } => "overflow",
            Error::LambdaCap { .. } => "lambda-cap",
            Error::Indexing { .. } => "indexing",
            Error::Convergence(_) => "convergence",
            Error::Boundary { .. } => "boundary",
            Error::SpectrumInconsistency { .. } => "spectrum-inconsistency",
            Error::Quadrature { .. } => "quadrature",
            Error::Geometry { .. } => "geometry",
            Error::GridSize { .. } => "grid-size",
            Error::Threshold(_) => "threshold",
            Error::Conditioning(_) => "conditioning",
            Error::UndefinedNode(_) => "undefined-node",
            Error::IndexRange { .. } => "index-range",
            Error::Config(_) => "config",
        }
    }

    /// Errors caused by the input rather than by the numerics.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidArgument(_) | Error::NotRealType | Error::WeightRange { .. })
    }
}
