use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown family identifier `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("level {requested} exceeds the supremum {supremum} of the scale function")]
    ScaleBounded { requested: f64, supremum: f64 },

    #[error("table too short: {len} entries, at least {min} required")]
    TableTooShort { len: usize, min: usize },

    #[error("slope {slope:.4} of the tail fit does not decide the decay class")]
    UndecidedTail { slope: f64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error:e})")]
    QuadratureDiverged { subdivisions: usize, error: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e} below tolerance {tolerance:e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("matrix has negative entry {value:e} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("circulant embedding failed: clipped spectral mass fraction {clipped:e}")]
    EmbeddingFailed { clipped: f64 },

    #[error("factorization failed at pivot {index}")]
    Factorization { index: usize },

    #[error("operation requires a {expected} correlation")]
    WrongTailClass { expected: &'static str },

    #[error("need at least {required} usable points, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("ladder point {point}: {source}")]
    AtLadderPoint {
        point: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
