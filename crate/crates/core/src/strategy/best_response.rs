use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use crate::error::{SolveError, StrategyError};
use crate::model::{apply_unchecked, is_terminal, legal_moves, GameState, Instance, Outcome, Player};
use crate::strategy::{Policy, StrategyKind};

/// Best outcome the free player can force against `fixed` playing `fixed_role`.
///
/// The fixed side's replies are determined, so this is a one-player search
/// over `(position, margin)` nodes: the free side picks the best reachable
/// ending, or a draw when it can reach a loop.
pub fn best_response(
    inst: &Instance,
    fixed: &StrategyKind,
    fixed_role: Player,
    budget: usize,
) -> Result<Outcome, StrategyError> {
    let policy = fixed.policy(inst, budget)?;
    best_response_policy(inst, policy.as_ref(), fixed_role, budget)
}

pub fn best_response_policy(
    inst: &Instance,
    fixed: &dyn Policy,
    fixed_role: Player,
    budget: usize,
) -> Result<Outcome, StrategyError> {
    let root = inst.initial_state()?;
    let mut index: FxHashMap<(GameState, i32), usize> = FxHashMap::default();
    let mut nodes: Vec<(GameState, i32)> = vec![(root.clone(), 0)];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    index.insert((root, 0), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let (state, margin) = nodes[id].clone();
        if is_terminal(inst, &state) {
            continue;
        }
        let moves = if state.turn == fixed_role {
            vec![fixed.choose(inst, &state, margin)]
        } else {
            legal_moves(inst, &state)
        };
        let mut out = Vec::with_capacity(moves.len());
        for m in moves {
            let (next, delta) = apply_unchecked(inst, &state, m);
            let key = (next, margin + state.turn.sign() * delta as i32);
            let t = match index.get(&key) {
                Some(&t) => t,
                None => {
                    if nodes.len() >= budget {
                        return Err(SolveError::BudgetExceeded {
                            budget,
                            visited: nodes.len(),
                        }
                        .into());
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
        succ[id] = out;
    }

    // A loop exists iff Kahn's peeling leaves nodes behind.
    let mut indegree = vec![0usize; nodes.len()];
    for list in &succ {
        for &t in list {
            indegree[t] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut peeled = 0;
    while let Some(id) = ready.pop() {
        peeled += 1;
        for &t in &succ[id] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.push(t);
            }
        }
    }

    let dr = inst.draw_rank();
    let free = fixed_role.other();
    let better = |a: Outcome, b: Outcome| match free {
        Player::I => a.rank(dr) > b.rank(dr),
        Player::II => a.rank(dr) < b.rank(dr),
    };
    let mut best: Option<Outcome> = (peeled < nodes.len()).then_some(Outcome::Draw);
    for (state, margin) in &nodes {
        if is_terminal(inst, state) {
            let o = Outcome::Ended(*margin);
            if best.is_none_or(|b| better(o, b)) {
                best = Some(o);
            }
        }
    }
    Ok(best.expect("a finite node set without loops has a terminal node"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Graph, Move};
    use crate::solver::solve_value;

    struct Passer;
    impl Policy for Passer {
        fn name(&self) -> String {
            "passer".into()
        }
        fn choose(&self, inst: &Instance, s: &GameState, _: i32) -> Move {
            crate::strategy::idle_move(inst, s)
        }
    }

    fn path_star() -> Instance {
        let g = Graph::from_edges(7, false, &[(0, 1), (1, 2), (0, 3), (3, 4), (4, 5), (0, 6)]).unwrap();
        Instance::same_start(g, [2, 5, 6], 0)
    }

    #[test]
    fn optimal_fixed_reproduces_value() {
        let inst = path_star();
        let v = solve_value(&inst, 100_000).unwrap();
        for role in [Player::I, Player::II] {
            assert_eq!(best_response(&inst, &StrategyKind::Optimal, role, 100_000).unwrap(), v);
        }
    }

    #[test]
    fn idle_opponent_loses_everything() {
        let inst = path_star().with_passing(true);
        assert_eq!(best_response_policy(&inst, &Passer, Player::II, 100_000).unwrap(), Outcome::Ended(3));
        assert_eq!(best_response_policy(&inst, &Passer, Player::I, 100_000).unwrap(), Outcome::Ended(-3));
    }

    #[test]
    fn random_is_rejected() {
        let inst = path_star();
        let err = best_response(&inst, &StrategyKind::Random(1), Player::I, 1000).unwrap_err();
        assert!(matches!(err, StrategyError::NotPositional(_)));
    }
}
