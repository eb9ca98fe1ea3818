use thiserror::Error;

/// Errors produced by parsing, construction, and validation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} is not a supported prime (need a prime below 256)")]
    BadPrime(u64),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("letter index {index} out of range for a context with {nvars} variables")]
    VariableRange { index: usize, nvars: usize },
    #[error("element is not a unit (zero constant term)")]
    NotAUnit,
    #[error("ambient dimension {dim} exceeds the budget of {max}")]
    DimBudget { dim: u128, max: u128 },
    #[error("quotient order exceeds the budget of {max} elements")]
    OrderBudget { max: usize },
    #[error("cutoff {0} is too large")]
    CutoffTooLarge(u32),
    #[error("presentation does not have the distinguished-generator commutator shape")]
    NotFlag,
    #[error("presentation has iterated commutator relations of depth above one")]
    NotMild,
    #[error("conjugation escapes the kernel subalgebra at this cutoff")]
    SigmaEscapes,
    #[error("twist difference fails to raise the filtration degree")]
    DeltaDegree,
    #[error("powers of the distinguished series variable do not span the quotient at cutoff {cutoff}")]
    SkewSpan { cutoff: u32 },
    #[error("series is not divisible by t^{0}")]
    NotDivisible(u32),
    #[error("commutator depth {0} exceeds the allocated variable range")]
    LambdaDepth(u32),
    #[error("matrix is not invertible over the evaluation ring")]
    NotInvertible,
    #[error("no canonical homomorphism from {src} to {dst}")]
    NoHom { src: String, dst: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
