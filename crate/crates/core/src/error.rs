use thiserror::Error;

/// Malformed textual input: fractions, directions, rule expressions, files.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid fraction `{0}`: expected reduced `p/q` with positive parts")]
    Fraction(String),
    #[error("`{0}` is not a direction: need a reduced fraction strictly between 0 and 1")]
    Direction(String),
    #[error("invalid rule expression `{input}`: {message}")]
    Expr { input: String, message: String },
    #[error("invalid integer `{0}`")]
    Integer(String),
    #[error("invalid family file: {0}")]
    FamilyFile(String),
    #[error("invalid level-set spec `{0}`: expected `stage:i,j,...`")]
    LevelSpec(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("stage {stage}: rule for `{param}` failed: {message}")]
    Rule { stage: u32, param: String, message: String },

    #[error("stage {stage}: {message}")]
    Schema { stage: u32, message: String },

    #[error("stage {stage} is not available: {reason}")]
    StageUnavailable { stage: u32, reason: String },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("level {index} out of range for stage {stage} (height {height})")]
    IndexOutOfRange { stage: u32, index: String, height: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("cannot represent the result: {0}")]
    Unrepresentable(String),

    #[error(
        "separation needs {needed} complement entries but only {supplied} were supplied; \
         extend the complement enumeration"
    )]
    InsufficientComplement { needed: usize, supplied: usize },

    #[error("inconsistent certificate: {0}")]
    InconsistentCertificate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("analytic test unavailable: {0}")]
    AnalyticTestUnavailable(String),

    #[error("tail condition fails at stage {stage}: computed tail bound {bound} is not below 1")]
    TailCondition { stage: u32, bound: String },

    #[error("tail condition cannot be verified analytically: {0}")]
    TailUnverifiable(String),

    #[error("no admissible vector: {0}")]
    NoAdmissibleVector(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by malformed input text rather than invalid content.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Json(_))
    }
}
