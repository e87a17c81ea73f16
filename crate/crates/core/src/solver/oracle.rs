//! Reference solver used to cross-check the layered one.
//!
//! Builds the complete reachable graph of `(position, accumulated margin)`
//! nodes in one piece, then for every threshold in the outcome order runs a
//! plain fixpoint iteration over all nodes at once: a least fixpoint when the
//! threshold lies above a draw (I must make the game end well), a greatest
//! fixpoint otherwise (I only has to avoid bad endings). No layering, no
//! relative margins.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use crate::error::SolveError;
use crate::model::{apply_unchecked, is_terminal, legal_moves, GameState, Instance, Outcome, Player};

pub fn oracle_value(inst: &Instance, budget: usize) -> Result<Outcome, SolveError> {
    let root = inst.initial_state()?;
    oracle_value_from(inst, &root, budget)
}

pub fn oracle_value_from(inst: &Instance, root: &GameState, budget: usize) -> Result<Outcome, SolveError> {
    let mut index: FxHashMap<(GameState, i32), usize> = FxHashMap::default();
    let mut nodes: Vec<(GameState, i32)> = Vec::new();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::new();
    index.insert((root.clone(), 0), 0);
    nodes.push((root.clone(), 0));
    queue.push_back(0usize);
    while let Some(id) = queue.pop_front() {
        let (state, margin) = nodes[id].clone();
        let mut out = Vec::new();
        if !is_terminal(inst, &state) {
            for m in legal_moves(inst, &state) {
                let (next, delta) = apply_unchecked(inst, &state, m);
                let key = (next, margin + state.turn.sign() * delta as i32);
                let t = match index.get(&key) {
                    Some(&t) => t,
                    None => {
                        if nodes.len() >= budget {
                            return Err(SolveError::BudgetExceeded {
                                budget,
                                visited: nodes.len(),
                            });
                        }
                        let t = nodes.len();
                        index.insert(key.clone(), t);
                        nodes.push(key);
                        succ.push(Vec::new());
                        queue.push_back(t);
                        t
                    }
                };
                out.push(t);
            }
        }
        succ[id] = out;
    }

    let dr = inst.draw_rank();
    let c = inst.customer_count() as i32;
    let mut thresholds: Vec<Outcome> = (-c..=c).map(Outcome::Ended).collect();
    thresholds.push(Outcome::Draw);
    thresholds.sort_by(|a, b| a.cmp_under(*b, dr));

    let mut best = thresholds[0];
    for &t in &thresholds {
        let draw_ok = Outcome::Draw.rank(dr) >= t.rank(dr);
        let won = if draw_ok {
            greatest_fixpoint(&nodes, &succ, inst, t)
        } else {
            least_fixpoint(&nodes, &succ, inst, t)
        };
        if won[0] {
            best = t;
        }
    }
    // Indifferent draw and tie: report a tie when I can force the game to end there.
    if best.rank(dr) == 0 && dr == crate::model::DrawRank::EqualsTie {
        let forced_end = least_fixpoint(&nodes, &succ, inst, Outcome::Ended(0));
        best = if forced_end[0] {
            Outcome::Ended(0)
        } else {
            Outcome::Draw
        };
    }
    Ok(best)
}

fn terminal_outcome(inst: &Instance, node: &(GameState, i32)) -> Option<Outcome> {
    is_terminal(inst, &node.0).then_some(Outcome::Ended(node.1))
}

fn least_fixpoint(
    nodes: &[(GameState, i32)],
    succ: &[Vec<usize>],
    inst: &Instance,
    t: Outcome,
) -> Vec<bool> {
    let dr = inst.draw_rank();
    let mut won: Vec<bool> = nodes
        .iter()
        .map(|n| terminal_outcome(inst, n).is_some_and(|o| o.rank(dr) >= t.rank(dr)))
        .collect();
    loop {
        let mut changed = false;
        for id in (0..nodes.len()).rev() {
            if won[id] || succ[id].is_empty() {
                continue;
            }
            let now = match nodes[id].0.turn {
                Player::I => succ[id].iter().any(|&s| won[s]),
                Player::II => succ[id].iter().all(|&s| won[s]),
            };
            if now {
                won[id] = true;
                changed = true;
            }
        }
        if !changed {
            return won;
        }
    }
}

fn greatest_fixpoint(
    nodes: &[(GameState, i32)],
    succ: &[Vec<usize>],
    inst: &Instance,
    t: Outcome,
) -> Vec<bool> {
    let dr = inst.draw_rank();
    let mut safe: Vec<bool> = nodes
        .iter()
        .map(|n| terminal_outcome(inst, n).is_none_or(|o| o.rank(dr) >= t.rank(dr)))
        .collect();
    loop {
        let mut changed = false;
        for id in (0..nodes.len()).rev() {
            if !safe[id] || succ[id].is_empty() {
                continue;
            }
            let keep = match nodes[id].0.turn {
                Player::I => succ[id].iter().any(|&s| safe[s]),
                Player::II => succ[id].iter().all(|&s| safe[s]),
            };
            if !keep {
                safe[id] = false;
                changed = true;
            }
        }
        if !changed {
            return safe;
        }
    }
}
