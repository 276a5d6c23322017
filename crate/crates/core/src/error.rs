use thiserror::Error;

/// Errors raised while reading an instance document.
#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("negative value {value} at row {row}, column {col}")]
    NegativeValue { row: usize, col: usize, value: f64 },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

/// Errors shared by the library operations.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("malformed subgraph: {0}")]
    MalformedSubgraph(String),
    #[error("alternative {alternative} is not ranked by agent {agent}")]
    NotRelevant { agent: usize, alternative: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("query budget of {budget} exhausted for agent {agent}")]
    BudgetExceeded { agent: usize, budget: usize },
    #[error("not enough copies: {agents} picking agents but only {copies} copies")]
    InfeasibleCopies { agents: usize, copies: usize },
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("matching of size {size} cannot be extended (limit {limit})")]
    Extension { size: usize, limit: usize },
    #[error("degree violation: node {node} has degree {degree}")]
    DegreeViolation { node: usize, degree: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("ratio is unbounded: agent {0} has no revealed top value")]
    Unbounded(usize),
    #[error("bisection did not converge after {0} steps")]
    NonConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
