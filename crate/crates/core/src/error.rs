use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field order {0} is not prime")]
    NotPrime(u32),
    #[error("value {value} is out of range for GF({q})")]
    OutOfRange { value: u32, q: u32 },
    #[error("operands from different fields: GF({left}) and GF({right})")]
    Mismatch { left: u32, right: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("empty alphabet")]
    Empty,
    #[error("negative probability at index {0}")]
    Negative(usize),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("table has {found} entries, shape requires {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("axis {axis} out of range for a {rank}-axis joint")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("axis {0} listed twice")]
    DuplicateAxis(usize),
    #[error("target and conditioning axes overlap at axis {0}")]
    OverlappingAxes(usize),
    #[error("function takes {expected} arguments, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("argument {position} has alphabet {found}, function expects {expected}")]
    AlphabetMismatch {
        position: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("entry {index} = {value} is outside codomain of size {codomain}")]
    EntryOutOfRange {
        index: usize,
        value: usize,
        codomain: usize,
    },
    #[error("table has {found} entries, domain requires {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected a {expected}-ary function, got {found}-ary")]
    Arity { expected: usize, found: usize },
    #[error("{0}")]
    Shape(String),
}

/// Crate-wide error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{what}: needs {needed} evaluations, cap is {cap}")]
    BudgetExceeded {
        what: &'static str,
        needed: f64,
        cap: f64,
    },
    #[error("syndrome is not in the column space of the parity-check matrix")]
    EmptyCoset,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
