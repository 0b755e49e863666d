use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QresetError {
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("generator is not anti-Hermitian (deviation {0:.3e})")]
    NotAntiHermitian(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("inverse temperature must be non-negative, got {0}")]
    NegativeBeta(f64),
    #[error("ancilla dimension {got} not supported here (expected {expected})")]
    WrongAncillaDim { expected: String, got: usize },
    #[error("no resonant amplitude found: {0}")]
    NoResonance(String),
    #[error("Cartan decomposition failed: {0}")]
    DecompositionFailure(String),
    #[error("coupling must be positive and finite, got {0}")]
    InvalidCoupling(f64),
    #[error("case {0} has no dressed-frame form")]
    NoDressedForm(String),
    #[error("ancilla state is not thermal")]
    AncillaNotThermal,
    #[error("case {0} cannot be purified")]
    NoPurification(String),
    #[error("pulse too short: {0}")]
    PulseTooShort(String),
    #[error("singular angle configuration: {0}")]
    SingularAngleConfiguration(String),
    #[error("vectors have different sums ({0} vs {1})")]
    SumMismatch(f64, f64),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("malformed JSON at {line}:{column}: {message}")]
    MalformedJson {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, QresetError>;

impl QresetError {
    /// Input that fails a precondition, as opposed to a computation that
    /// cannot produce a result.
    pub fn is_validation(&self) -> bool {
        use QresetError::*;
        matches!(
            self,
            NotHermitian(_)
                | NotAntiHermitian(_)
                | DimensionMismatch(_)
                | NotDensity(_)
                | NotUnitary(_)
                | NegativeBeta(_)
                | WrongAncillaDim { .. }
                | InvalidCoupling(_)
                | PulseTooShort(_)
                | SumMismatch(..)
                | InvalidEpsilon(_)
                | MalformedJson { .. }
                | InvalidInput(_)
        )
    }
}

impl From<serde_json::Error> for QresetError {
    fn from(e: serde_json::Error) -> Self {
        QresetError::MalformedJson {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
