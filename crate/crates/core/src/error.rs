use thiserror::Error;

/// Every failure the laboratory can report.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("delayed abscissa {x_minus} is not below x = {x}")]
    DelayOrder { x: f64, x_minus: f64 },
    #[error("jet is off the manifold: |E1| = {e1:e}, |E2| = {e2:e}")]
    Manifold { e1: f64, e2: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parameter error: {0}")]
    Param(String),
    #[error("degenerate family: {0}")]
    DegenerateFamily(String),
    #[error("flow blew up at epsilon = {0}")]
    BlowUp(f64),
    #[error("transformed abscissae are not increasing near x = {0}")]
    NonGraph(f64),
    #[error("initial data incompatible with the delay relation: defect {defect:e}")]
    Compatibility { defect: f64 },
    #[error("causality violated at x = {x}: delayed abscissa {x_minus}")]
    Causality { x: f64, x_minus: f64 },
    #[error("step size underflow at x = {x} (h = {h:e})")]
    Stiffness { x: f64, h: f64 },
    #[error("x = {x} outside [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("no root found: {0}")]
    NoRootFound(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("sigma is not a particular solution (residual {0:e})")]
    NotAParticularSolution(f64),
    #[error("transformation is not strictly monotone near x = {0}")]
    NonMonotoneTransform(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
