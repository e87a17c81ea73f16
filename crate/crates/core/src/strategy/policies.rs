use std::sync::Arc;

use crate::error::StrategyError;
use crate::model::{GameState, Instance, Move, Vertex};
use crate::solver::{solve, SolveResult};
use crate::strategy::{idle_move, Policy};

/// First step of a shortest path from `from` to `to`, lowest next vertex on ties.
fn step_towards(inst: &Instance, from: Vertex, to: Vertex) -> Option<Vertex> {
    let dist_to = inst.graph().bfs_to(to);
    let d = dist_to[from as usize]?;
    if d == 0 {
        return None;
    }
    inst.graph()
        .neighbors(from)
        .iter()
        .copied()
        .find(|&w| dist_to[w as usize] == Some(d - 1))
}

/// Moves towards the nearest remaining customer, re-targeting every turn.
///
/// Nearest is by `(distance, customer id, piece index)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyPolicy;

impl GreedyPolicy {
    /// The customer and piece the policy is heading for.
    pub fn target(inst: &Instance, state: &GameState) -> Option<(Vertex, usize)> {
        let remaining = state.remaining_vertices(inst);
        let mut best: Option<(u32, Vertex, usize)> = None;
        for (piece, &at) in state.pieces(state.turn).iter().enumerate() {
            let dist = inst.graph().bfs(at);
            for &c in &remaining {
                if let Some(d) = dist[c as usize] {
                    let cand = (d, c, piece);
                    if best.is_none_or(|b| cand < b) {
                        best = Some(cand);
                    }
                }
            }
        }
        best.map(|(_, c, p)| (c, p))
    }
}

impl Policy for GreedyPolicy {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn choose(&self, inst: &Instance, state: &GameState, _margin: i32) -> Move {
        match GreedyPolicy::target(inst, state) {
            Some((target, piece)) => {
                let at = state.pieces(state.turn)[piece];
                match step_towards(inst, at, target) {
                    Some(next) => Move::Step { piece, target: next },
                    None => idle_move(inst, state),
                }
            }
            None => idle_move(inst, state),
        }
    }
}

/// Always heads for the highest-priority remaining customer it can reach.
#[derive(Clone, Debug)]
pub struct AprioriPolicy {
    priority: Vec<Vertex>,
}

impl AprioriPolicy {
    pub fn new(inst: &Instance, priority: Vec<Vertex>) -> Result<AprioriPolicy, StrategyError> {
        let mut sorted = priority.clone();
        sorted.sort_unstable();
        if sorted != inst.customers() {
            return Err(StrategyError::InvalidPriority);
        }
        Ok(AprioriPolicy { priority })
    }

    pub fn priority(&self) -> &[Vertex] {
        &self.priority
    }
}

impl Policy for AprioriPolicy {
    fn name(&self) -> String {
        let ids: Vec<String> = self.priority.iter().map(u32::to_string).collect();
        format!("apriori:{}", ids.join(","))
    }

    fn choose(&self, inst: &Instance, state: &GameState, _margin: i32) -> Move {
        let pieces = state.pieces(state.turn);
        let dists: Vec<_> = pieces.iter().map(|&p| inst.graph().bfs(p)).collect();
        for &c in &self.priority {
            let Some(slot) = inst.customer_slot(c) else { continue };
            if !state.remaining.contains(slot) {
                continue;
            }
            let nearest = dists
                .iter()
                .enumerate()
                .filter_map(|(i, d)| d[c as usize].map(|d| (d, i)))
                .min();
            if let Some((_, piece)) = nearest {
                if let Some(next) = step_towards(inst, pieces[piece], c) {
                    return Move::Step { piece, target: next };
                }
            }
        }
        idle_move(inst, state)
    }
}

/// Plays the solver's optimal move.
#[derive(Clone, Debug)]
pub struct OptimalPolicy {
    result: Arc<SolveResult>,
}

impl OptimalPolicy {
    pub fn solve(inst: &Instance, budget: usize) -> Result<OptimalPolicy, StrategyError> {
        Ok(OptimalPolicy {
            result: Arc::new(solve(inst, budget)?),
        })
    }

    pub fn from_result(result: Arc<SolveResult>) -> OptimalPolicy {
        OptimalPolicy { result }
    }

    pub fn result(&self) -> &SolveResult {
        &self.result
    }
}

impl Policy for OptimalPolicy {
    fn name(&self) -> String {
        "optimal".into()
    }

    fn choose(&self, inst: &Instance, state: &GameState, margin: i32) -> Move {
        match self.result.best_move(inst, state, margin) {
            Some((m, _)) => m,
            None => idle_move(inst, state),
        }
    }
}
