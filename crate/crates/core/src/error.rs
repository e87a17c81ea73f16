use thiserror::Error;

use crate::model::{Move, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("edge ({u}, {v}) out of range for {vertex_count} vertices")]
    EdgeOutOfRange { u: Vertex, v: Vertex, vertex_count: usize },
    #[error("illegal move {0}")]
    IllegalMove(Move),
    #[error("{0} customers; positions track at most 64")]
    TooManyCustomers(usize),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("state budget of {budget} exceeded after visiting {visited} states")]
    BudgetExceeded { budget: usize, visited: usize },
    #[error("unsupported instance: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("unknown strategy kind {0:?}")]
    UnknownKind(String),
    #[error("priority list is not a permutation of the customers")]
    InvalidPriority,
    #[error("cannot steal: {0}")]
    CannotSteal(String),
    #[error("strategy {0} is not a deterministic positional policy")]
    NotPositional(String),
    #[error("ply cap {0} exceeded without terminal or repeated position")]
    PlyCapExceeded(usize),
    #[error("strategy {name} proposed illegal move {mv}")]
    IllegalProposal { name: String, mv: Move },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(String),
    #[error("unsupported instance file version {0}")]
    Version(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("formula not normalized: {0}")]
    NotNormalized(String),
}
