use thiserror::Error;

/// Failures while parsing an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier '{name}' at {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("function '{function}' takes {expected} argument(s), got {got} (at {position})")]
    Arity {
        function: String,
        expected: usize,
        got: usize,
        position: usize,
    },
    #[error("invalid coordinate list: {0}")]
    Coordinates(String),
}

/// Failures while evaluating an expression at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },
}

/// Hard numeric failures of the geometric pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("metric is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    DegenerateMetric { min_eigenvalue: f64 },
    #[error("singular matrix in linear solve")]
    Singular,
    #[error("Jacobian rank {rank} is below the target dimension {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("potential field has a horizontal part of norm {norm:e}")]
    NotVertical { norm: f64 },
    #[error("gradient of the potential has a horizontal part of norm {norm:e}")]
    NotVerticalGradient { norm: f64 },
    #[error("singular denominator 1 - m*rho/2 = {value:e}")]
    SingularDenominator { value: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Manifest loading and validation failures.
#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("JSON parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("expression error in {location}: {source}")]
    Expression {
        location: String,
        #[source]
        source: ExprError,
    },
    #[error("unknown example '{0}'")]
    UnknownExample(String),
    #[error("cannot read manifest: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for ManifestError {
    fn from(e: serde_json::Error) -> Self {
        ManifestError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
