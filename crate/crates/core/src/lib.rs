//! Competing salesmen: two players walk a graph one edge per turn and capture
//! customers by arriving first; whoever captures more wins.
//!
//! The crate holds the rules ([`model`]), an exact solver ([`solver`]),
//! executable strategies and a match runner ([`strategy`]), the Q3SAT
//! reduction generator ([`reduction`]), instance generators ([`catalog`]) and
//! the verification suites built on top of them ([`verify`]).

pub mod catalog;
pub mod error;
pub mod format;
pub mod model;
pub mod solver;
pub mod reduction;
pub mod strategy;
pub mod verify;

pub use error::{FormatError, ModelError, ReductionError, SolveError, StrategyError};
pub use model::{
    apply_move, legal_moves, shortest_distance, terminal_status, validate_instance, CustomerSet,
    DrawRank, GameState, Graph, Instance, Move, Outcome, Player, Terminal, Vertex,
};
