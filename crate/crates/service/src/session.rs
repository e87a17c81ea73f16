use std::sync::Arc;
use std::time::Instant;

use csp_core::format::InstanceFile;
use csp_core::solver::{solve, SolveResult};
use csp_core::strategy::{EndReason, GreedyPolicy, MatchProgress, Policy};
use csp_core::{legal_moves, Instance, Move, Outcome, Player, SolveError, Vertex};
use serde::{Deserialize, Serialize};

/// Safety net for engine-only play; repetition ends every match long before.
const ENGINE_PLY_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    HumanVsEngine { human: Player },
    HumanVsHuman,
    EngineVsEngine,
}

impl Mode {
    fn engine_plays(self, p: Player) -> bool {
        match self {
            Mode::HumanVsEngine { human } => human != p,
            Mode::HumanVsHuman => false,
            Mode::EngineVsEngine => true,
        }
    }
}

/// A move as it appears on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireMove {
    Step { piece: usize, target: Vertex },
    Pass { pass: bool },
}

impl WireMove {
    pub fn from_move(m: Move) -> WireMove {
        match m {
            Move::Step { piece, target } => WireMove::Step { piece, target },
            Move::Pass | Move::ForcedNull => WireMove::Pass { pass: true },
        }
    }

    /// `{"pass": true}` also stands for the null move of a stuck player.
    fn to_move(self, legal: &[Move]) -> Option<Move> {
        match self {
            WireMove::Step { piece, target } => Some(Move::Step { piece, target }),
            WireMove::Pass { pass: true } => legal
                .iter()
                .copied()
                .find(|m| matches!(m, Move::Pass | Move::ForcedNull)),
            WireMove::Pass { pass: false } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoryEntry {
    pub player: Player,
    #[serde(rename = "move")]
    pub mv: WireMove,
    pub capture: bool,
    /// Engine move chosen without an exact solution.
    pub heuristic: bool,
}

enum Engine {
    Exact(Arc<SolveResult>),
    OverBudget,
}

#[derive(Debug, PartialEq, Eq)]
pub enum MoveError {
    NotYourTurn,
    GameOver,
    Illegal(String),
}

pub struct Session {
    pub id: String,
    pub instance: Arc<Instance>,
    pub mode: Mode,
    pub budget: usize,
    progress: MatchProgress,
    engine: Engine,
    history: Vec<HistoryEntry>,
    start_value: Option<Outcome>,
    pub last_used: Instant,
}

#[derive(Clone, Debug, Serialize)]
pub struct View {
    pub id: String,
    pub mode: Mode,
    pub instance: InstanceFile,
    pub turn: Player,
    pub pieces_i: Vec<Vertex>,
    pub pieces_ii: Vec<Vertex>,
    pub remaining: Vec<Vertex>,
    pub score_i: u32,
    pub score_ii: u32,
    pub history: Vec<HistoryEntry>,
    pub terminal: bool,
    pub outcome: Option<String>,
    pub end_reason: Option<EndReason>,
    /// The engine's answer to the move just posted.
    pub engine_reply: Option<WireMove>,
    /// Solver value at session start, when the instance fit the budget.
    pub start_value: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MoveValue {
    #[serde(rename = "move")]
    pub mv: WireMove,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub available: bool,
    pub exact: bool,
    pub value: String,
    pub moves: Vec<MoveValue>,
}

impl Session {
    /// Solves the instance once for engine and analysis, then lets the
    /// engine move as far as the mode allows.
    pub fn new(id: String, instance: Instance, mode: Mode, budget: usize) -> Result<Session, String> {
        let progress = MatchProgress::new(&instance).map_err(|e| e.to_string())?;
        let engine = match solve(&instance, budget) {
            Ok(r) => Engine::Exact(Arc::new(r)),
            Err(SolveError::BudgetExceeded { .. }) => Engine::OverBudget,
            Err(e) => return Err(e.to_string()),
        };
        let start_value = match &engine {
            Engine::Exact(r) => Some(r.value()),
            Engine::OverBudget => None,
        };
        let mut s = Session {
            id,
            instance: Arc::new(instance),
            mode,
            budget,
            progress,
            engine,
            history: Vec::new(),
            start_value,
            last_used: Instant::now(),
        };
        s.engine_turns();
        Ok(s)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.engine, Engine::Exact(_))
    }

    /// Engine moves while it holds the turn; returns the last one.
    fn engine_turns(&mut self) -> Option<WireMove> {
        let mut last = None;
        while self.progress.end().is_none()
            && self.mode.engine_plays(self.progress.state.turn)
            && self.history.len() < ENGINE_PLY_CAP
        {
            let (mv, heuristic) = self.engine_move();
            self.record(mv, heuristic).expect("engine moves are legal");
            last = Some(WireMove::from_move(mv));
        }
        last
    }

    fn engine_move(&self) -> (Move, bool) {
        let state = &self.progress.state;
        if let Engine::Exact(r) = &self.engine {
            if let Some((mv, _)) = r.best_move(&self.instance, state, self.progress.margin) {
                return (mv, false);
            }
        }
        (GreedyPolicy.choose(&self.instance, state, self.progress.margin), true)
    }

    fn record(&mut self, mv: Move, heuristic: bool) -> Result<(), String> {
        let player = self.progress.state.turn;
        let delta = self.progress.apply(&self.instance, mv).map_err(|e| e.to_string())?;
        self.history.push(HistoryEntry {
            player,
            mv: WireMove::from_move(mv),
            capture: delta > 0,
            heuristic,
        });
        Ok(())
    }

    /// A human move, followed by the engine's reply when it is the engine's turn.
    pub fn post_move(&mut self, mv: WireMove) -> Result<Option<WireMove>, MoveError> {
        if self.progress.end().is_some() {
            return Err(MoveError::GameOver);
        }
        if self.mode.engine_plays(self.progress.state.turn) {
            return Err(MoveError::NotYourTurn);
        }
        let legal = legal_moves(&self.instance, &self.progress.state);
        let mv = mv
            .to_move(&legal)
            .ok_or_else(|| MoveError::Illegal("no pass available".into()))?;
        if !legal.contains(&mv) {
            return Err(MoveError::Illegal(format!("{mv} is not legal here")));
        }
        self.record(mv, false).map_err(MoveError::Illegal)?;
        Ok(self.engine_turns())
    }

    pub fn scores(&self) -> (u32, u32) {
        let mut s = (0, 0);
        for h in &self.history {
            if h.capture {
                match h.player {
                    Player::I => s.0 += 1,
                    Player::II => s.1 += 1,
                }
            }
        }
        s
    }

    pub fn view(&self, engine_reply: Option<WireMove>) -> View {
        let state = &self.progress.state;
        let (score_i, score_ii) = self.scores();
        View {
            id: self.id.clone(),
            mode: self.mode,
            instance: InstanceFile::from_instance(&self.instance),
            turn: state.turn,
            pieces_i: state.pieces_i.to_vec(),
            pieces_ii: state.pieces_ii.to_vec(),
            remaining: state.remaining_vertices(&self.instance),
            score_i,
            score_ii,
            history: self.history.clone(),
            terminal: self.progress.end().is_some(),
            outcome: self.progress.outcome().map(|o| o.to_string()),
            end_reason: self.progress.end(),
            engine_reply,
            start_value: self.start_value.map(|o| o.to_string()),
        }
    }

    /// Exact values of the position and of every legal move, or `None` when
    /// the instance is over the budget.
    pub fn analysis(&self) -> Option<Analysis> {
        let Engine::Exact(r) = &self.engine else { return None };
        let (state, margin) = (&self.progress.state, self.progress.margin);
        if let Some(o) = self.progress.outcome() {
            return Some(Analysis {
                available: true,
                exact: true,
                value: o.to_string(),
                moves: Vec::new(),
            });
        }
        let value = r.value_of(state, margin)?;
        let mut moves = Vec::new();
        for mv in legal_moves(&self.instance, state) {
            let (next, delta) = csp_core::apply_move(&self.instance, state, mv).ok()?;
            let after = margin + state.turn.sign() * delta as i32;
            moves.push(MoveValue {
                mv: WireMove::from_move(mv),
                value: r.value_of(&next, after)?.to_string(),
            });
        }
        Some(Analysis {
            available: true,
            exact: true,
            value: value.to_string(),
            moves,
        })
    }

    /// Replays the history from the initial position; used to check views.
    pub fn replay_matches(&self) -> bool {
        let Ok(mut p) = MatchProgress::new(&self.instance) else { return false };
        for (h, &mv) in self.history.iter().zip(&self.progress.moves) {
            if WireMove::from_move(mv) != h.mv || p.apply(&self.instance, mv).is_err() {
                return false;
            }
        }
        p.state == self.progress.state && p.margin == self.progress.margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use csp_core::catalog::{catalog_entry, gen_wheel};

    #[test]
    fn engine_answers_wheel_spokes_two_ahead() {
        let mut s = Session::new("t".into(), gen_wheel(5).unwrap(), Mode::HumanVsEngine { human: Player::I }, 1_000_000).unwrap();
        let reply = s.post_move(WireMove::Step { piece: 0, target: 1 }).unwrap();
        assert_eq!(reply, Some(WireMove::Step { piece: 0, target: 3 }));
        assert_eq!(s.scores(), (1, 1));
        assert!(s.replay_matches());
    }

    #[test]
    fn engine_vs_engine_reaches_the_value() {
        let s = Session::new("t".into(), gen_wheel(5).unwrap(), Mode::EngineVsEngine, 1_000_000).unwrap();
        let v = s.view(None);
        assert!(v.terminal);
        assert_eq!(v.outcome.as_deref(), Some("Ended(-3)"));
        assert_eq!(v.score_i as i32 - v.score_ii as i32, -3);
    }

    #[test]
    fn zugzwang_moves_all_lose() {
        let e = catalog_entry("zugzwang").unwrap();
        let s = Session::new("t".into(), e.instance, Mode::HumanVsHuman, 1_000_000).unwrap();
        let a = s.analysis().unwrap();
        assert!(!a.moves.is_empty());
        for m in &a.moves {
            let margin: i32 = m.value.trim_start_matches("Ended(").trim_end_matches(')').parse().unwrap();
            assert!(margin <= -1, "{}", m.value);
        }
    }

    #[test]
    fn over_budget_has_no_analysis_and_plays_greedy() {
        let mut s = Session::new("t".into(), gen_wheel(9).unwrap(), Mode::HumanVsEngine { human: Player::I }, 10).unwrap();
        assert!(s.analysis().is_none());
        s.post_move(WireMove::Step { piece: 0, target: 1 }).unwrap();
        assert!(s.view(None).history[1].heuristic);
    }

    #[test]
    fn wrong_turn_and_illegal_moves() {
        let mut s = Session::new("t".into(), gen_wheel(3).unwrap(), Mode::HumanVsEngine { human: Player::II }, 1_000_000).unwrap();
        // engine (I) already moved; now it is II's turn
        assert_eq!(s.history.len(), 1);
        assert!(matches!(s.post_move(WireMove::Step { piece: 0, target: 0 }), Err(MoveError::Illegal(_))));
        assert!(matches!(s.post_move(WireMove::Pass { pass: true }), Err(MoveError::Illegal(_))));
        let mut hh = Session::new("t".into(), gen_wheel(3).unwrap(), Mode::EngineVsEngine, 1_000_000).unwrap();
        assert_eq!(hh.post_move(WireMove::Step { piece: 0, target: 1 }), Err(MoveError::GameOver));
    }
}
