use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("element {element} has zero or negative area")]
    DegenerateElement { element: usize },

    #[error("tessellation contract violated on element {element}: {reason}")]
    Tessellation { element: usize, reason: String },

    /// The local volume Gram lost definiteness while the boundary term did
    /// not: the stabilization parameter is effectively unbounded.
    #[error("sliver cut on element {element}: local stabilization eigenproblem is degenerate")]
    SliverDegenerate { element: usize },

    #[error("missing stabilization parameter on Dirichlet cut element {element}")]
    MissingStabilization { element: usize },

    #[error("singular factorization at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
