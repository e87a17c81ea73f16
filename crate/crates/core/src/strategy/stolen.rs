use std::sync::Arc;

use crate::error::StrategyError;
use crate::model::{is_legal, Instance, Move, Player, Vertex};
use crate::strategy::{GreedyPolicy, Policy, Strategy, Tracker};

/// First-player strategy built from a second-player one.
///
/// Spends two plies stepping off the start and back, then answers the real
/// opponent's moves one turn late with the inner strategy's replies, as if the
/// opponent were the first player of a phantom game.
pub struct StolenStrategy {
    inner: Box<dyn Strategy>,
    tracker: Option<Tracker>,
    detour: Option<(usize, Vertex)>,
    opp_moves: Vec<Move>,
    own_moves: usize,
    fallen_back: bool,
}

impl StolenStrategy {
    pub fn new(inner: Box<dyn Strategy>) -> StolenStrategy {
        StolenStrategy {
            inner,
            tracker: None,
            detour: None,
            opp_moves: Vec::new(),
            own_moves: 0,
            fallen_back: false,
        }
    }

    /// The `(piece, neighbor)` used for the opening detour.
    fn detour_for(inst: &Instance) -> Result<(usize, Vertex), StrategyError> {
        let mut starts = inst.starts(Player::I).to_vec();
        starts.sort_unstable();
        let start = starts[0];
        inst.graph()
            .neighbors(start)
            .iter()
            .copied()
            .find(|&w| inst.graph().has_edge(w, start))
            .map(|w| (0, w))
            .ok_or_else(|| StrategyError::CannotSteal(format!("start {start} has no neighbor to return from")))
    }

    fn greedy(&self) -> Move {
        let t = self.tracker.as_ref().expect("strategy initialized");
        GreedyPolicy.choose(&t.inst, &t.state, t.margin)
    }
}

impl Strategy for StolenStrategy {
    fn name(&self) -> String {
        format!("stolen:{}", self.inner.name())
    }

    fn init(&mut self, inst: Arc<Instance>, role: Player) -> Result<(), StrategyError> {
        if role != Player::I {
            return Err(StrategyError::CannotSteal("only the first player can steal".into()));
        }
        if !inst.has_same_start() {
            return Err(StrategyError::CannotSteal("players start on different vertices".into()));
        }
        self.detour = Some(Self::detour_for(&inst)?);
        self.inner.init(inst.clone(), Player::II)?;
        self.tracker = Some(Tracker::new(inst)?);
        self.opp_moves.clear();
        self.own_moves = 0;
        self.fallen_back = false;
        Ok(())
    }

    fn observe(&mut self, mover: Player, mv: Move) {
        if let Some(t) = &mut self.tracker {
            t.observe(mover, mv);
        }
        match mover {
            Player::I => self.own_moves += 1,
            Player::II => self.opp_moves.push(mv),
        }
    }

    fn propose(&mut self) -> Move {
        let (piece, w) = self.detour.expect("strategy initialized");
        if self.fallen_back {
            return self.greedy();
        }
        let t = self.tracker.as_ref().expect("strategy initialized");
        let i = self.own_moves;
        if i == 0 {
            return Move::Step { piece, target: w };
        }
        if i == 1 {
            let start = t.inst.starts(Player::I).iter().copied().min().expect("starts");
            let at = t.state.pieces(Player::I).iter().position(|&v| v == w).unwrap_or(piece);
            return Move::Step { piece: at, target: start };
        }
        let lagged = self.opp_moves[i - 2];
        self.inner.observe(Player::I, lagged);
        let reply = self.inner.propose();
        self.inner.observe(Player::II, reply);
        let t = self.tracker.as_ref().expect("strategy initialized");
        if self.inner.flagged() || !is_legal(&t.inst, &t.state, reply) {
            self.fallen_back = true;
            return self.greedy();
        }
        reply
    }

    fn flagged(&self) -> bool {
        self.fallen_back || self.tracker.as_ref().is_some_and(|t| t.desynced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Graph;
    use crate::strategy::{run_match, StrategyKind};

    fn cycle4() -> Arc<Instance> {
        let g = Graph::from_edges(4, false, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        Arc::new(Instance::same_start(g, [1, 3], 0))
    }

    #[test]
    fn opens_with_detour_to_lowest_neighbor() {
        let inst = cycle4();
        let mut s = StolenStrategy::new(StrategyKind::Greedy.build(1000));
        s.init(inst, Player::I).unwrap();
        assert_eq!(s.propose(), Move::Step { piece: 0, target: 1 });
        s.observe(Player::I, Move::Step { piece: 0, target: 1 });
        s.observe(Player::II, Move::Step { piece: 0, target: 3 });
        assert_eq!(s.propose(), Move::Step { piece: 0, target: 0 });
    }

    #[test]
    fn greedy_stolen_does_not_lose_on_square() {
        let inst = cycle4();
        let mut i = StrategyKind::Stolen(Box::new(StrategyKind::Greedy)).build(1000);
        let mut ii = StrategyKind::Greedy.build(1000);
        let rec = run_match(&inst, i.as_mut(), ii.as_mut(), 1000).unwrap();
        assert!(!rec.outcome.is_loss_for_i(), "{rec:?}");
        assert!(!rec.flagged);
    }

    // The guarantee needs a winning inner strategy for II. Optimal is not one
    // here: the detour hands II the near customer and the race for the far one.
    #[test]
    fn detour_loses_on_a_path_without_a_winning_inner() {
        let g = Graph::from_edges(4, false, &[(0, 1), (0, 2), (1, 3)]).unwrap();
        let inst = Arc::new(Instance::same_start(g, [1, 3], 2));
        let mut i = StrategyKind::Stolen(Box::new(StrategyKind::Optimal)).build(100_000);
        let mut ii = StrategyKind::Optimal.build(100_000);
        let rec = run_match(&inst, i.as_mut(), ii.as_mut(), 1000).unwrap();
        assert_eq!(rec.outcome, crate::model::Outcome::Ended(-2));
        assert!(!rec.flagged);
    }

    #[test]
    fn refuses_second_role_and_split_starts() {
        let inst = cycle4();
        let mut s = StolenStrategy::new(StrategyKind::Greedy.build(1000));
        assert!(s.init(inst.clone(), Player::II).is_err());
        let split = Instance::new(inst.graph().clone(), [1, 3], vec![0], vec![2]);
        assert!(s.init(Arc::new(split), Player::I).is_err());
        let g = Graph::from_edges(2, true, &[(0, 1)]).unwrap();
        let oneway = Instance::same_start(g, [1], 0);
        assert!(s.init(Arc::new(oneway), Player::I).is_err());
    }
}
