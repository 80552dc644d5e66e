//! Error type shared by every module of the engine.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LckError {
    #[error("cannot contract a function")]
    CannotContractFunction,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("field `{field}` is not registered on {fixture}")]
    UnregisteredField { fixture: String, field: String },
    #[error("Lee form underdetermined on curves")]
    LeeUnderdetermined,
    #[error("singular {what} at point {point:?}")]
    Singular { what: String, point: Vec<f64> },
    #[error("stratified action, refine samples (ranks {ranks:?})")]
    StratifiedAction { ranks: Vec<usize> },
    #[error("generator {0} is not periodic")]
    NonPeriodicGenerator(usize),
    #[error("inadmissible f: {0}")]
    InadmissibleF(String),
    #[error("df is not colinear with theta (residual {0:.3e})")]
    NotColinear(f64),
    #[error("theta pairing with generator {generator} is not constant after averaging (spread {spread:.3e})")]
    PairingNotConstant { generator: String, spread: f64 },
    #[error("isotropy applies to horizontal actions")]
    VerticalGenerator,
    #[error("nonpositive conformal factor at {0:?}")]
    NonPositiveFactor(Vec<f64>),
    #[error("theta(C) = {0} but the construction needs theta(C) = 1")]
    NotNormalized(f64),
    #[error("{check} residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    ToleranceExceeded { check: String, residual: f64, tolerance: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("cannot parse `{0}`")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LckError>;
