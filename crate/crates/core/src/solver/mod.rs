//! Exact game values: the layered solver and an independent reference oracle.

mod layered;
mod oracle;
mod pack;

pub use layered::{
    replay_policy, solve, solve_from, solve_value, SolveResult, SolveStats, DEFAULT_BUDGET,
};
pub use oracle::{oracle_value, oracle_value_from};

#[cfg(test)]
mod tests;
