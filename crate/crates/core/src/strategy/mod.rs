//! Executable strategies, the match runner and best-response search.
//!
//! A [`Policy`] is a deterministic positional rule (it sees only the position
//! and the score). A [`Strategy`] is the stateful form used in matches: it is
//! initialized for a role, told every move, and asked to propose its own.

mod best_response;
mod policies;
mod runner;
mod stolen;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use best_response::{best_response, best_response_policy};
pub use policies::{AprioriPolicy, GreedyPolicy, OptimalPolicy};
pub use runner::{play, run_match, EndReason, MatchProgress, MatchRecord, DEFAULT_PLY_CAP};
pub use stolen::StolenStrategy;

use crate::error::StrategyError;
use crate::model::{apply_unchecked, is_legal, legal_moves, GameState, Instance, Move, Player, Vertex};
use crate::solver::DEFAULT_BUDGET;

/// Deterministic move rule depending only on the position and I's margin.
pub trait Policy: Send + Sync {
    fn name(&self) -> String;
    fn choose(&self, inst: &Instance, state: &GameState, margin: i32) -> Move;
}

/// Stateful player used by the match runner.
pub trait Strategy: Send {
    fn name(&self) -> String;
    fn init(&mut self, inst: Arc<Instance>, role: Player) -> Result<(), StrategyError>;
    /// Called for every move played, including the strategy's own.
    fn observe(&mut self, mover: Player, mv: Move);
    fn propose(&mut self) -> Move;
    /// Set when the strategy had to abandon its plan.
    fn flagged(&self) -> bool {
        false
    }
}

/// Shared position bookkeeping for strategies.
#[derive(Clone, Debug)]
pub(crate) struct Tracker {
    pub(crate) inst: Arc<Instance>,
    pub(crate) state: GameState,
    pub(crate) margin: i32,
    pub(crate) desynced: bool,
}

impl Tracker {
    pub(crate) fn new(inst: Arc<Instance>) -> Result<Tracker, StrategyError> {
        let state = inst.initial_state()?;
        Ok(Tracker {
            inst,
            state,
            margin: 0,
            desynced: false,
        })
    }

    pub(crate) fn observe(&mut self, mover: Player, mv: Move) {
        if mover != self.state.turn || !is_legal(&self.inst, &self.state, mv) {
            self.desynced = true;
            return;
        }
        let (next, delta) = apply_unchecked(&self.inst, &self.state, mv);
        self.margin += mover.sign() * delta as i32;
        self.state = next;
    }
}

/// Pass if allowed, otherwise the first legal move.
pub(crate) fn idle_move(inst: &Instance, state: &GameState) -> Move {
    if inst.passing_allowed() {
        Move::Pass
    } else {
        legal_moves(inst, state)[0]
    }
}

/// Adapts a [`Policy`] to the [`Strategy`] lifecycle.
pub struct PolicyStrategy {
    policy: Box<dyn Policy>,
    tracker: Option<Tracker>,
}

impl PolicyStrategy {
    pub fn new(policy: Box<dyn Policy>) -> PolicyStrategy {
        PolicyStrategy {
            policy,
            tracker: None,
        }
    }
}

impl Strategy for PolicyStrategy {
    fn name(&self) -> String {
        self.policy.name()
    }

    fn init(&mut self, inst: Arc<Instance>, _role: Player) -> Result<(), StrategyError> {
        self.tracker = Some(Tracker::new(inst)?);
        Ok(())
    }

    fn observe(&mut self, mover: Player, mv: Move) {
        if let Some(t) = &mut self.tracker {
            t.observe(mover, mv);
        }
    }

    fn propose(&mut self) -> Move {
        let t = self.tracker.as_ref().expect("strategy initialized");
        self.policy.choose(&t.inst, &t.state, t.margin)
    }

    fn flagged(&self) -> bool {
        self.tracker.as_ref().is_some_and(|t| t.desynced)
    }
}

/// Uniformly random legal moves from a seeded generator.
pub struct RandomStrategy {
    seed: u64,
    rng: ChaCha8Rng,
    tracker: Option<Tracker>,
}

impl RandomStrategy {
    pub fn new(seed: u64) -> RandomStrategy {
        RandomStrategy {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            tracker: None,
        }
    }
}

impl Strategy for RandomStrategy {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn init(&mut self, inst: Arc<Instance>, _role: Player) -> Result<(), StrategyError> {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.tracker = Some(Tracker::new(inst)?);
        Ok(())
    }

    fn observe(&mut self, mover: Player, mv: Move) {
        if let Some(t) = &mut self.tracker {
            t.observe(mover, mv);
        }
    }

    fn propose(&mut self) -> Move {
        let t = self.tracker.as_ref().expect("strategy initialized");
        let moves = legal_moves(&t.inst, &t.state);
        *moves.choose(&mut self.rng).expect("at least one legal move")
    }

    fn flagged(&self) -> bool {
        self.tracker.as_ref().is_some_and(|t| t.desynced)
    }
}

/// Strategy names as used on the command line and by the service.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyKind {
    Greedy,
    Apriori(Vec<Vertex>),
    Random(u64),
    Optimal,
    Stolen(Box<StrategyKind>),
}

impl StrategyKind {
    /// Uninitialized strategy; `budget` bounds any solver call made at init.
    pub fn build(&self, budget: usize) -> Box<dyn Strategy> {
        match self {
            StrategyKind::Random(seed) => Box::new(RandomStrategy::new(*seed)),
            StrategyKind::Stolen(inner) => Box::new(StolenStrategy::new(inner.build(budget))),
            _ => Box::new(DeferredPolicy {
                kind: self.clone(),
                budget,
                inner: None,
            }),
        }
    }

    /// The deterministic positional form, if this kind has one.
    pub fn policy(&self, inst: &Instance, budget: usize) -> Result<Box<dyn Policy>, StrategyError> {
        match self {
            StrategyKind::Greedy => Ok(Box::new(GreedyPolicy)),
            StrategyKind::Apriori(order) => Ok(Box::new(AprioriPolicy::new(inst, order.clone())?)),
            StrategyKind::Optimal => Ok(Box::new(OptimalPolicy::solve(inst, budget)?)),
            other => Err(StrategyError::NotPositional(other.to_string())),
        }
    }
}

/// Policy strategy whose policy is built at `init`, once the instance is known.
struct DeferredPolicy {
    kind: StrategyKind,
    budget: usize,
    inner: Option<PolicyStrategy>,
}

impl Strategy for DeferredPolicy {
    fn name(&self) -> String {
        self.kind.to_string()
    }

    fn init(&mut self, inst: Arc<Instance>, role: Player) -> Result<(), StrategyError> {
        let mut inner = PolicyStrategy::new(self.kind.policy(&inst, self.budget)?);
        inner.init(inst, role)?;
        self.inner = Some(inner);
        Ok(())
    }

    fn observe(&mut self, mover: Player, mv: Move) {
        if let Some(inner) = &mut self.inner {
            inner.observe(mover, mv);
        }
    }

    fn propose(&mut self) -> Move {
        self.inner.as_mut().expect("strategy initialized").propose()
    }

    fn flagged(&self) -> bool {
        self.inner.as_ref().is_some_and(|i| i.flagged())
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Greedy => f.write_str("greedy"),
            StrategyKind::Apriori(order) => {
                let ids: Vec<String> = order.iter().map(u32::to_string).collect();
                write!(f, "apriori:{}", ids.join(","))
            }
            StrategyKind::Random(seed) => write!(f, "random:{seed}"),
            StrategyKind::Optimal => f.write_str("optimal"),
            StrategyKind::Stolen(inner) => write!(f, "stolen:{inner}"),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || StrategyError::UnknownKind(s.to_string());
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match (head, rest) {
            ("greedy", None) => Ok(StrategyKind::Greedy),
            ("optimal", None) => Ok(StrategyKind::Optimal),
            ("random", Some(seed)) => seed.parse().map(StrategyKind::Random).map_err(|_| unknown()),
            ("apriori", Some(list)) => list
                .split(',')
                .map(|t| t.trim().parse::<Vertex>())
                .collect::<Result<Vec<_>, _>>()
                .map(StrategyKind::Apriori)
                .map_err(|_| unknown()),
            ("stolen", Some(inner)) => Ok(StrategyKind::Stolen(Box::new(inner.parse()?))),
            _ => Err(unknown()),
        }
    }
}

/// Budget used when a kind string does not say otherwise.
pub fn default_budget() -> usize {
    DEFAULT_BUDGET
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for name in ["greedy", "optimal", "random:7", "apriori:4,1,2", "stolen:greedy", "stolen:random:3"] {
            let kind: StrategyKind = name.parse().unwrap();
            assert_eq!(kind.to_string(), name);
        }
        assert!("apriori:".parse::<StrategyKind>().is_err());
        assert!("greedy:1".parse::<StrategyKind>().is_err());
        assert!("minimax".parse::<StrategyKind>().is_err());
    }
}
