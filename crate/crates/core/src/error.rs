use thiserror::Error;

/// Errors raised by the symbolic engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("name `{0}` is already declared")]
    DeclarationConflict(String),
    #[error("`{0}` is not a valid identifier")]
    InvalidIdentifier(String),
    #[error("cannot mix time and space expressions")]
    KindMismatch,
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error("autonomy violation: {0}")]
    AutonomyViolation(String),
    #[error("invalid variable: {0}")]
    InvalidVariable(String),
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("reduction identity of order {order} exceeds the configured maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("rewrite step budget of {0} exhausted")]
    StepBudgetExceeded(usize),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("integrator did not converge: {0}")]
    Nonconvergence(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trial {trial}: {source}")]
    Trial { trial: usize, source: Box<Error> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
