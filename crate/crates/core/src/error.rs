use thiserror::Error;

use crate::network::NodeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("root node {0} is not part of the electric network")]
    RootDisconnected(NodeId),
    #[error("branch references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("cycle detected at node {0}")]
    Cycle(NodeId),
    #[error("node {0} is reachable from more than one source")]
    MultipleSources(NodeId),
    #[error("node {0} is not connected to any source")]
    NoSource(NodeId),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("dangling reference in {location}: {message}")]
    Reference { location: String, message: String },
    #[error("unknown bundled dataset `{0}`")]
    UnknownDataset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for ScenarioError {
    fn from(err: serde_json::Error) -> Self {
        ScenarioError::Parse { line: err.line(), column: err.column(), message: err.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormulationError {
    #[error("system is structurally invalid: {0}")]
    InvalidSystem(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("closed-fixed branch {0} lies outside the root component")]
    InfeasibleStructure(String),
    #[error("customer {0} has all ratio weights equal to zero")]
    BadWeights(u32),
    #[error("missing bound needed for big-M: {0}")]
    UnboundedInput(String),
    #[error("baseline weights: {0}")]
    BaselineWeights(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConicError {
    #[error("variable index {index} out of range for {n_vars} variables")]
    IndexOutOfRange { index: usize, n_vars: usize },
    #[error("fixed value {value} for binary {index} is not 0 or 1")]
    BadFixing { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("program text, line {line}: {message}")]
    Text { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BnbError {
    #[error("root relaxation is infeasible")]
    Infeasible,
    #[error("root relaxation failed numerically")]
    NumericalFailure,
    #[error(transparent)]
    Conic(#[from] ConicError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance has {found} free binaries, limit is {limit}")]
    TooManyBinaries { found: usize, limit: usize },
    #[error("backward/forward sweep did not converge within {0} iterations")]
    Diverged(usize),
    #[error("island is not a tree rooted at the slack node")]
    NotATree,
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Conic(#[from] ConicError),
}
