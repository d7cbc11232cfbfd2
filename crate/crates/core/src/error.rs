use thiserror::Error;

use crate::model::Regime;

pub type Result<T> = std::result::Result<T, InarError>;

#[derive(Debug, Error)]
pub enum InarError {
    #[error("coefficient alpha_{index} = {value} is outside [0, 1]")]
    CoefficientOutOfRange { index: usize, value: f64 },

    #[error("malformed innovation: {0}")]
    MalformedInnovation(String),

    #[error("all coefficients are zero")]
    AllCoefficientsZero,

    #[error("degenerate model: the operation requires alpha_p > 0")]
    DegenerateModel,

    #[error("model is not primitive: gcd of the coefficient support is {d}")]
    NotPrimitive { d: usize },

    #[error("wrong regime: expected {expected}, model is {found}")]
    WrongRegime { expected: Regime, found: Regime },

    #[error("count overflow at step {step}")]
    HorizonOverflow { step: usize },

    #[error("time index {index} exceeds the path horizon {horizon}")]
    HorizonExceeded { index: usize, horizon: usize },

    #[error("horizon {requested} exceeds the supported maximum {max}")]
    HorizonTooLarge { requested: usize, max: usize },

    #[error("singular design: normal matrix has rank {rank} < {cols}")]
    SingularDesign { rank: usize, cols: usize },

    #[error("insufficient data: need more than {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("input contains no values")]
    EmptyFile,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl InarError {
    /// Errors raised by a computation rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            InarError::HorizonOverflow { .. }
                | InarError::SingularDesign { .. }
                | InarError::ZeroVariance
                | InarError::Numerical(_)
        )
    }
}
