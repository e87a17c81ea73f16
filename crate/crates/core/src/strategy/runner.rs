use std::sync::Arc;

use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::error::{ModelError, StrategyError};
use crate::model::{apply_move, is_legal, is_terminal, GameState, Instance, Move, Outcome, Player};
use crate::strategy::{Strategy, StrategyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EndReason {
    Ended,
    RepetitionDraw,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchRecord {
    pub strategy_i: String,
    pub strategy_ii: String,
    pub moves: Vec<Move>,
    /// 1 where the move captured a customer.
    pub deltas: Vec<u32>,
    pub outcome: Outcome,
    pub reason: EndReason,
    /// Some strategy abandoned its plan during the match.
    pub flagged: bool,
}

impl MatchRecord {
    /// I's captures minus II's, recomputed from the move list.
    pub fn signed_captures(&self) -> i32 {
        self.deltas
            .iter()
            .enumerate()
            .map(|(ply, &d)| if ply % 2 == 0 { d as i32 } else { -(d as i32) })
            .sum()
    }
}

pub const DEFAULT_PLY_CAP: usize = 1_000_000;

/// Position, score and repetition bookkeeping of a match in progress.
///
/// A repeated position since the last capture ends the match as a draw.
#[derive(Clone, Debug)]
pub struct MatchProgress {
    pub state: GameState,
    /// I's captures minus II's so far.
    pub margin: i32,
    pub moves: Vec<Move>,
    pub deltas: Vec<u32>,
    seen: FxHashSet<GameState>,
    end: Option<EndReason>,
}

impl MatchProgress {
    pub fn new(inst: &Instance) -> Result<MatchProgress, ModelError> {
        let state = inst.initial_state()?;
        let mut seen = FxHashSet::default();
        seen.insert(state.clone());
        let end = is_terminal(inst, &state).then_some(EndReason::Ended);
        Ok(MatchProgress {
            state,
            margin: 0,
            moves: Vec::new(),
            deltas: Vec::new(),
            seen,
            end,
        })
    }

    pub fn end(&self) -> Option<EndReason> {
        self.end
    }

    /// Final outcome once ended.
    pub fn outcome(&self) -> Option<Outcome> {
        self.end.map(|r| match r {
            EndReason::Ended => Outcome::Ended(self.margin),
            EndReason::RepetitionDraw => Outcome::Draw,
        })
    }

    /// Plays `mv` for the player to move; returns 1 on a capture.
    pub fn apply(&mut self, inst: &Instance, mv: Move) -> Result<u32, ModelError> {
        if self.end.is_some() {
            return Err(ModelError::Invalid("the match is over".into()));
        }
        let (next, delta) = apply_move(inst, &self.state, mv)?;
        self.margin += self.state.turn.sign() * delta as i32;
        self.moves.push(mv);
        self.deltas.push(delta);
        self.state = next;
        if delta > 0 {
            self.seen.clear();
        }
        if is_terminal(inst, &self.state) {
            self.end = Some(EndReason::Ended);
        } else if !self.seen.insert(self.state.clone()) {
            self.end = Some(EndReason::RepetitionDraw);
        }
        Ok(delta)
    }
}

/// Initializes both strategies and plays them against each other.
pub fn run_match(
    inst: &Arc<Instance>,
    strat_i: &mut dyn Strategy,
    strat_ii: &mut dyn Strategy,
    ply_cap: usize,
) -> Result<MatchRecord, StrategyError> {
    strat_i.init(inst.clone(), Player::I)?;
    strat_ii.init(inst.clone(), Player::II)?;
    let mut progress = MatchProgress::new(inst)?;
    while progress.end().is_none() {
        if progress.moves.len() >= ply_cap {
            return Err(StrategyError::PlyCapExceeded(ply_cap));
        }
        let mover = progress.state.turn;
        let strat: &mut dyn Strategy = match mover {
            Player::I => &mut *strat_i,
            Player::II => &mut *strat_ii,
        };
        let mv = strat.propose();
        if !is_legal(inst, &progress.state, mv) {
            return Err(StrategyError::IllegalProposal {
                name: strat.name(),
                mv,
            });
        }
        strat_i.observe(mover, mv);
        strat_ii.observe(mover, mv);
        progress.apply(inst, mv)?;
    }
    let outcome = progress.outcome().expect("loop ends with the match");
    Ok(MatchRecord {
        strategy_i: strat_i.name(),
        strategy_ii: strat_ii.name(),
        reason: progress.end().expect("ended"),
        moves: progress.moves,
        deltas: progress.deltas,
        outcome,
        flagged: strat_i.flagged() || strat_ii.flagged(),
    })
}

/// Builds both strategies from their kinds and runs the match.
pub fn play(
    inst: &Arc<Instance>,
    kind_i: &StrategyKind,
    kind_ii: &StrategyKind,
    budget: usize,
    ply_cap: usize,
) -> Result<MatchRecord, StrategyError> {
    let mut a = kind_i.build(budget);
    let mut b = kind_ii.build(budget);
    run_match(inst, a.as_mut(), b.as_mut(), ply_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Graph;
    use crate::solver::solve_value;

    fn wheel(n: u32) -> Arc<Instance> {
        let mut adj = vec![(1..=n).collect::<Vec<_>>()];
        for j in 1..=n {
            adj.push(vec![((j - 1 + 2) % n) + 1]);
        }
        Arc::new(Instance::same_start(Graph::from_adjacency(true, adj), 1..=n, 0))
    }

    #[test]
    fn adjacent_customer_ends_in_one_ply() {
        let g = Graph::from_edges(2, false, &[(0, 1)]).unwrap();
        let inst = Arc::new(Instance::same_start(g, [1], 0));
        let rec = play(&inst, &StrategyKind::Greedy, &StrategyKind::Greedy, 100, 10).unwrap();
        assert_eq!(rec.outcome, Outcome::Ended(1));
        assert_eq!(rec.moves.len(), 1);
    }

    #[test]
    fn optimal_pair_on_wheel_five() {
        let inst = wheel(5);
        let rec = play(&inst, &StrategyKind::Optimal, &StrategyKind::Optimal, 100_000, 1000).unwrap();
        assert_eq!(rec.outcome, Outcome::Ended(-3));
        assert_eq!(rec.signed_captures(), -3);
    }

    #[test]
    fn repetition_ends_idle_play() {
        let g = Graph::from_edges(5, false, &[(0, 1), (2, 3)]).unwrap();
        let inst = Arc::new(Instance::new(g, [4], vec![0], vec![2]));
        // customer unreachable: terminal at once
        let rec = play(&inst, &StrategyKind::Greedy, &StrategyKind::Greedy, 100, 100).unwrap();
        assert_eq!(rec.reason, EndReason::Ended);
        // both sides pass forever although I could win
        let g = Graph::from_edges(4, false, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let inst = Arc::new(Instance::new(g, [3], vec![0], vec![0]).with_passing(true));
        let mut lazy = crate::strategy::PolicyStrategy::new(Box::new(Passer));
        let mut lazy2 = crate::strategy::PolicyStrategy::new(Box::new(Passer));
        let rec = run_match(&inst, &mut lazy, &mut lazy2, 100).unwrap();
        assert_eq!(rec.reason, EndReason::RepetitionDraw);
        assert_eq!(rec.outcome, Outcome::Draw);
        assert_eq!(solve_value(&inst, 1000).unwrap(), Outcome::Ended(1));
    }

    #[test]
    fn illegal_proposal_is_an_error() {
        let g = Graph::from_edges(3, false, &[(0, 1), (1, 2)]).unwrap();
        let inst = Arc::new(Instance::same_start(g, [2], 0));
        let mut bad = crate::strategy::PolicyStrategy::new(Box::new(Passer));
        let mut ok = StrategyKind::Greedy.build(100);
        let err = run_match(&inst, &mut bad, ok.as_mut(), 100).unwrap_err();
        assert!(matches!(err, StrategyError::IllegalProposal { .. }));
    }

    struct Passer;
    impl crate::strategy::Policy for Passer {
        fn name(&self) -> String {
            "passer".into()
        }
        fn choose(&self, _: &Instance, _: &crate::model::GameState, _: i32) -> Move {
            Move::Pass
        }
    }
}
