use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("not a basis projection: |P² − P|_max = {deviation:e}")]
    NotProjection { deviation: f64 },

    #[error("invalid Bogolubov transformation: unitarity deviation {unitarity:e}, Γ-commutation deviation {commutation:e}")]
    InvalidTransform { unitarity: f64, commutation: f64 },

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("state is not maximally entangled")]
    NotMaximal,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "initial state incompatible with the entangler: |H E H − (1 − E)|_max = {deviation:e}"
    )]
    IncompatibleInitialState { deviation: f64 },

    #[error("generator is singular: 1 − G is not invertible")]
    SingularGenerator,

    #[error("size cap exceeded: requested {requested}, cap {cap}")]
    SizeCap { requested: usize, cap: usize },

    #[error("degenerate vacuum: {0}")]
    Degenerate(String),

    #[error("unsupported mixture: parity block {block} is not pure (deviation {deviation:e})")]
    UnsupportedMixture { block: String, deviation: f64 },
}
