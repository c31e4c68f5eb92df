use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("raster shape mismatch: expected {expected}x{expected}, found {rows}x{cols}")]
    RasterShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("non-positive or non-finite value {value} at cell {cell}")]
    NonPositiveValue { cell: usize, value: f64 },

    #[error("shape mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("factorization failed: pivot {pivot} is not positive ({value:e}) in {context}")]
    SingularFactorization {
        context: &'static str,
        pivot: usize,
        value: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode index {index} out of range (0..{count})")]
    ModeOutOfRange { index: usize, count: usize },

    #[error("requested {requested} POD modes but numerical rank is {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("coarse edge {edge}: only {available} independent modes for {needed} requested")]
    InsufficientModes {
        edge: usize,
        needed: usize,
        available: usize,
    },

    #[error("reference solution is identically zero")]
    ZeroDenominator,

    #[error("krylov breakdown at iteration {iteration}: {reason}")]
    Breakdown {
        iteration: usize,
        reason: &'static str,
    },

    #[error("PCG requires a symmetric preconditioner; local domain {domain} is restrictive (use GMRES)")]
    NonSymmetricPcg { domain: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
