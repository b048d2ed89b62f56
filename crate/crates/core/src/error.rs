use thiserror::Error;

/// Errors raised by group arithmetic, constructions, embeddings and verifiers.
///
/// A failed verification is never an error: reports carry pass/fail flags.
/// Errors are reserved for bad configuration and violated preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("radius exceeded: {element} not reached within word length {cap}")]
    RadiusExceeded { element: String, cap: usize },

    #[error("ball too large: radius {radius} exceeds the enumeration cap of {cap} elements")]
    BallTooLarge { radius: usize, cap: usize },

    #[error("bad letter: {0}")]
    BadLetter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("incompatible key spaces `{left}` and `{right}`")]
    KeySpace { left: String, right: String },

    #[error("truncation too deep: order {order} needs {entries} entries (cap {cap})")]
    TruncationTooDeep {
        order: usize,
        entries: usize,
        cap: usize,
    },

    #[error(
        "not conditionally negative definite on this ball: eigenvalue {eigenvalue:e} below {threshold:e}"
    )]
    NotCnd { eigenvalue: f64, threshold: f64 },

    #[error("incomplete coset table: {0}")]
    IncompleteCosets(String),

    #[error("profile too small: {0}")]
    ProfileTooSmall(String),

    #[error("too many pairs for exhaustive profiling ({pairs} > {cap}); use sampled mode")]
    TooManyPairs { pairs: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
