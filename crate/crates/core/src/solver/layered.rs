//! Layered retrograde solver.
//!
//! States are grouped into layers by their remaining-customer set. Captures
//! only ever shrink that set, so layers are solved smallest first; inside a
//! layer the non-capturing moves form a (possibly cyclic) game whose exits
//! already carry exact values.
//!
//! A draw does not absorb later score changes, so where a draw sits relative
//! to a finished game depends on the score accumulated so far. Each state
//! therefore gets two score-independent values:
//!
//! * `forced_end`: the largest relative margin `θ` such that I can force the
//!   game to *end* with at least `θ` more for I than II from here on,
//!   or `NEG_INF` if I cannot force the game to end at all (least fixpoint,
//!   reachability attractor for I);
//! * `draw_tolerant`: the largest `θ` such that I can force "the game never
//!   ends, or ends with at least `θ`" (greatest fixpoint, computed as the
//!   complement of II's attractor towards endings below `θ`), or `POS_INF`
//!   when I can keep the game going forever.
//!
//! The outcome of a position reached with accumulated margin `a` follows from
//! `forced_end + a`, `draw_tolerant + a` and the instance's draw rank.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;

use crate::error::SolveError;
use crate::model::{
    apply_unchecked, is_terminal, legal_moves, CustomerSet, DrawRank, GameState, Instance, Move,
    Outcome, Player,
};
use crate::solver::pack::Packer;

pub(crate) const NEG_INF: i16 = -1000;
pub(crate) const POS_INF: i16 = 1000;
const UNRANKED: u32 = u32::MAX;

/// Default state budget.
pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Clone, Copy, Debug)]
struct Edge {
    target: u32,
    /// Margin change from I's point of view: +1, -1 or 0.
    delta: i8,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub states_visited: usize,
    pub layers_solved: usize,
    pub elapsed: Duration,
}

/// Exact values for every state reachable from a root position.
#[derive(Debug)]
pub struct SolveResult {
    value: Outcome,
    stats: SolveStats,
    draw_rank: DrawRank,
    packer: Packer,
    index: FxHashMap<(u64, u64), u32>,
    keys: Vec<(u64, u64)>,
    edge_start: Vec<u32>,
    edges: Vec<Edge>,
    terminal: Vec<bool>,
    forced_end: Vec<i16>,
    draw_tolerant: Vec<i16>,
    end_rank: Vec<u32>,
    hold_rank: Vec<u32>,
}

/// Which side of the draw the continuation is being played for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Goal {
    /// I forces an ending with relative margin `θ`; II keeps out of `θ + 1`.
    End(i32),
    /// II forces an ending with relative margin `θ`; I keeps `θ` or a draw.
    Hold(i32),
    /// Nobody can make the game end favourably: it goes on forever.
    /// I keeps `draw_tolerant + d >= floor`; II keeps `forced_end + d < ceiling`.
    Draw { floor: Option<i32>, ceiling: i32 },
}

/// Solves the game from the instance's initial position.
pub fn solve(inst: &Instance, budget: usize) -> Result<SolveResult, SolveError> {
    let root = inst.initial_state()?;
    solve_from(inst, &root, budget)
}

/// Solves the game from an arbitrary position.
pub fn solve_from(inst: &Instance, root: &GameState, budget: usize) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let packer = Packer::new(inst)?;
    let mut result = explore(inst, root, budget, packer)?;
    result.solve_layers();
    result.value = result.absolute(0, 0);
    result.stats.elapsed = started.elapsed();
    Ok(result)
}

/// Convenience wrapper: the value of the initial position.
pub fn solve_value(inst: &Instance, budget: usize) -> Result<Outcome, SolveError> {
    Ok(solve(inst, budget)?.value())
}

fn explore(
    inst: &Instance,
    root: &GameState,
    budget: usize,
    packer: Packer,
) -> Result<SolveResult, SolveError> {
    let mut index = FxHashMap::default();
    let mut keys = Vec::new();
    let mut queue = VecDeque::new();
    let root_key = packer.pack(root);
    index.insert(root_key, 0u32);
    keys.push(root_key);
    queue.push_back(0u32);

    let mut edge_start = vec![0u32];
    let mut edges = Vec::new();
    let mut terminal = Vec::new();
    // BFS order equals id order, so edges can be appended as states are expanded.
    while let Some(id) = queue.pop_front() {
        let (remaining, key) = keys[id as usize];
        let state = packer.unpack(remaining, key);
        let done = is_terminal(inst, &state);
        terminal.push(done);
        if !done {
            let sign = state.turn.sign() as i8;
            for m in legal_moves(inst, &state) {
                let (next, delta) = apply_unchecked(inst, &state, m);
                let next_key = packer.pack(&next);
                let target = match index.get(&next_key) {
                    Some(&t) => t,
                    None => {
                        let t = keys.len() as u32;
                        if keys.len() >= budget {
                            return Err(SolveError::BudgetExceeded {
                                budget,
                                visited: keys.len(),
                            });
                        }
                        index.insert(next_key, t);
                        keys.push(next_key);
                        queue.push_back(t);
                        t
                    }
                };
                edges.push(Edge {
                    target,
                    delta: sign * delta as i8,
                });
            }
        }
        edge_start.push(edges.len() as u32);
    }

    let n = keys.len();
    Ok(SolveResult {
        value: Outcome::Ended(0),
        stats: SolveStats {
            states_visited: n,
            ..SolveStats::default()
        },
        draw_rank: inst.draw_rank(),
        packer,
        index,
        keys,
        edge_start,
        edges,
        terminal,
        forced_end: vec![NEG_INF; n],
        draw_tolerant: vec![POS_INF; n],
        end_rank: vec![UNRANKED; n],
        hold_rank: vec![UNRANKED; n],
    })
}

/// One layer: global ids plus in-layer predecessor lists.
struct Layer {
    remaining: u64,
    ids: Vec<u32>,
    pred_start: Vec<u32>,
    preds: Vec<u32>,
}

/// Outcome of one attractor computation on a layer, in local indices.
pub(crate) struct Attractor {
    pub(crate) member: Vec<bool>,
    pub(crate) order: Vec<u32>,
    pub(crate) size: usize,
}

impl SolveResult {
    pub fn value(&self) -> Outcome {
        self.value
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn draw_rank(&self) -> DrawRank {
        self.draw_rank
    }

    pub fn state_count(&self) -> usize {
        self.keys.len()
    }

    pub fn contains(&self, s: &GameState) -> bool {
        self.index.contains_key(&self.packer.pack(s))
    }

    fn id_of(&self, s: &GameState) -> Option<u32> {
        self.index.get(&self.packer.pack(s)).copied()
    }

    fn edges_of(&self, id: u32) -> &[Edge] {
        let lo = self.edge_start[id as usize] as usize;
        let hi = self.edge_start[id as usize + 1] as usize;
        &self.edges[lo..hi]
    }

    fn mover(&self, id: u32) -> Player {
        Packer::turn_of(self.keys[id as usize].1)
    }

    /// All reachable states.
    pub fn states(&self) -> impl Iterator<Item = GameState> + '_ {
        self.keys.iter().map(|&(r, k)| self.packer.unpack(r, k))
    }

    /// Score-independent values `(forced_end, draw_tolerant)` of a state.
    /// `None` stands for minus infinity and plus infinity respectively.
    pub fn relative_values(&self, s: &GameState) -> Option<(Option<i32>, Option<i32>)> {
        let id = self.id_of(s)? as usize;
        let fe = self.forced_end[id];
        let dt = self.draw_tolerant[id];
        Some((
            (fe != NEG_INF).then_some(i32::from(fe)),
            (dt != POS_INF).then_some(i32::from(dt)),
        ))
    }

    /// Optimal outcome of the whole game when `s` is reached with I ahead by `margin`.
    pub fn value_of(&self, s: &GameState, margin: i32) -> Option<Outcome> {
        self.id_of(s).map(|id| self.absolute(id, margin))
    }

    fn absolute(&self, id: u32, margin: i32) -> Outcome {
        let fe = i32::from(self.forced_end[id as usize]);
        let dt = i32::from(self.draw_tolerant[id as usize]);
        let fe_finite = self.forced_end[id as usize] != NEG_INF;
        let dt_infinite = self.draw_tolerant[id as usize] == POS_INF;
        match self.draw_rank {
            DrawRank::BelowAll => {
                if fe_finite {
                    Outcome::Ended(fe + margin)
                } else {
                    Outcome::Draw
                }
            }
            // Under EqualsTie a tie-class value is reported as a tie exactly
            // when I can force the game to end there.
            DrawRank::BelowTie | DrawRank::EqualsTie => {
                if fe_finite && fe + margin >= 0 {
                    Outcome::Ended(fe + margin)
                } else if dt_infinite || dt + margin >= 0 {
                    Outcome::Draw
                } else {
                    Outcome::Ended(dt + margin)
                }
            }
        }
    }

    fn goal(&self, id: u32, margin: i32) -> Goal {
        let fe = i32::from(self.forced_end[id as usize]);
        let dt = i32::from(self.draw_tolerant[id as usize]);
        match self.draw_rank {
            DrawRank::BelowAll => {
                if fe != i32::from(NEG_INF) {
                    Goal::End(fe)
                } else {
                    Goal::Draw {
                        floor: None,
                        ceiling: i32::from(NEG_INF) / 2,
                    }
                }
            }
            DrawRank::BelowTie | DrawRank::EqualsTie => {
                if fe != i32::from(NEG_INF) && fe + margin >= 0 {
                    Goal::End(fe)
                } else if dt == i32::from(POS_INF) || dt + margin >= 0 {
                    Goal::Draw {
                        floor: Some(-margin),
                        ceiling: -margin,
                    }
                } else {
                    Goal::Hold(dt)
                }
            }
        }
    }

    /// Optimal move at `s` reached with I ahead by `margin`, and the outcome it
    /// keeps. Moves that make progress towards the value are preferred so that
    /// replaying the policy realizes it; ties go to the first move in
    /// `(piece, target)` order.
    pub fn best_move(&self, inst: &Instance, s: &GameState, margin: i32) -> Option<(Move, Outcome)> {
        let id = self.id_of(s)?;
        if self.terminal[id as usize] {
            return None;
        }
        let moves = legal_moves(inst, s);
        let edges = self.edges_of(id);
        debug_assert_eq!(moves.len(), edges.len());
        let chosen = self.choose_edge(id, margin)?;
        let e = edges[chosen];
        Some((moves[chosen], self.absolute(e.target, margin + i32::from(e.delta))))
    }

    fn choose_edge(&self, id: u32, margin: i32) -> Option<usize> {
        let goal = self.goal(id, margin);
        let mover = self.mover(id);
        let fe = |t: u32| i32::from(self.forced_end[t as usize]);
        let dt = |t: u32| i32::from(self.draw_tolerant[t as usize]);
        let own_fe = fe(id);
        let own_dt = dt(id);
        let end_rank = self.end_rank[id as usize];
        let hold_rank = self.hold_rank[id as usize];
        let in_layer = |e: &Edge| e.delta == 0 && self.keys[e.target as usize].0 == self.keys[id as usize].0;
        let edges = self.edges_of(id);
        edges.iter().position(|e| {
            let d = i32::from(e.delta);
            match (goal, mover) {
                (Goal::End(theta), Player::I) => {
                    if in_layer(e) {
                        fe(e.target) >= theta && self.end_rank[e.target as usize] < end_rank
                    } else {
                        fe(e.target) != i32::from(NEG_INF) && fe(e.target) + d >= theta
                    }
                }
                (Goal::End(_), Player::II) => fe(e.target) != i32::from(NEG_INF) && fe(e.target) + d <= own_fe,
                (Goal::Hold(theta), Player::II) => {
                    if in_layer(e) {
                        dt(e.target) <= theta && self.hold_rank[e.target as usize] < hold_rank
                    } else {
                        dt(e.target) != i32::from(POS_INF) && dt(e.target) + d <= theta
                    }
                }
                (Goal::Hold(_), Player::I) => {
                    dt(e.target) == i32::from(POS_INF) || dt(e.target) + d >= own_dt
                }
                (Goal::Draw { floor, .. }, Player::I) => match floor {
                    None => true,
                    Some(f) => dt(e.target) == i32::from(POS_INF) || dt(e.target) + d >= f,
                },
                (Goal::Draw { ceiling, .. }, Player::II) => {
                    fe(e.target) == i32::from(NEG_INF) || fe(e.target) + d < ceiling
                }
            }
        })
    }

    fn build_layers(&self) -> Vec<Layer> {
        let mut by_mask: FxHashMap<u64, Vec<u32>> = FxHashMap::default();
        for (id, &(remaining, _)) in self.keys.iter().enumerate() {
            by_mask.entry(remaining).or_default().push(id as u32);
        }
        let mut layers: Vec<Layer> = by_mask
            .into_iter()
            .map(|(remaining, ids)| Layer {
                remaining,
                ids,
                pred_start: Vec::new(),
                preds: Vec::new(),
            })
            .collect();
        layers.sort_by_key(|l| (l.remaining.count_ones(), l.remaining));
        layers
    }

    fn solve_layers(&mut self) {
        let mut layers = self.build_layers();
        let mut local = vec![0u32; self.keys.len()];
        for layer in &mut layers {
            for (i, &id) in layer.ids.iter().enumerate() {
                local[id as usize] = i as u32;
            }
            self.index_predecessors(layer, &local);
            self.solve_layer(layer);
        }
        self.stats.layers_solved = layers.len();
    }

    fn index_predecessors(&self, layer: &mut Layer, local: &[u32]) {
        let n = layer.ids.len();
        let mut counts = vec![0u32; n + 1];
        for &id in &layer.ids {
            for e in self.edges_of(id) {
                if self.keys[e.target as usize].0 == layer.remaining {
                    counts[local[e.target as usize] as usize + 1] += 1;
                }
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut preds = vec![0u32; counts[n] as usize];
        for (i, &id) in layer.ids.iter().enumerate() {
            for e in self.edges_of(id) {
                if self.keys[e.target as usize].0 == layer.remaining {
                    let t = local[e.target as usize] as usize;
                    preds[fill[t] as usize] = i as u32;
                    fill[t] += 1;
                }
            }
        }
        layer.pred_start = counts;
        layer.preds = preds;
    }

    /// Attractor for `player` inside one layer. `exit_good` judges capture
    /// edges (already solved layers), `terminal_good` judges terminal states.
    fn attract(
        &self,
        layer: &Layer,
        player: Player,
        terminal_good: bool,
        exit_good: impl Fn(&Edge) -> bool,
    ) -> Attractor {
        let n = layer.ids.len();
        let mut member = vec![false; n];
        let mut order = vec![UNRANKED; n];
        let mut counter = vec![0u32; n];
        let mut queue = VecDeque::new();
        let mut next_order = 0u32;
        let mut admit = |i: usize, member: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
            member[i] = true;
            order[i] = next_order;
            next_order += 1;
            queue.push_back(i);
        };
        for (i, &id) in layer.ids.iter().enumerate() {
            if self.terminal[id as usize] {
                if terminal_good {
                    admit(i, &mut member, &mut queue);
                }
                continue;
            }
            let ours = self.mover(id) == player;
            let mut inside = 0u32;
            let mut good_exit = false;
            let mut bad_exit = false;
            for e in self.edges_of(id) {
                if self.keys[e.target as usize].0 == layer.remaining {
                    inside += 1;
                } else if exit_good(e) {
                    good_exit = true;
                } else {
                    bad_exit = true;
                }
            }
            if ours {
                if good_exit {
                    admit(i, &mut member, &mut queue);
                } else {
                    counter[i] = 1;
                }
            } else if bad_exit {
                counter[i] = u32::MAX;
            } else if inside == 0 {
                admit(i, &mut member, &mut queue);
            } else {
                counter[i] = inside;
            }
        }
        while let Some(t) = queue.pop_front() {
            let lo = layer.pred_start[t] as usize;
            let hi = layer.pred_start[t + 1] as usize;
            for &p in &layer.preds[lo..hi] {
                let p = p as usize;
                if member[p] || counter[p] == u32::MAX {
                    continue;
                }
                counter[p] -= 1;
                if counter[p] == 0 {
                    admit(p, &mut member, &mut queue);
                }
            }
        }
        let size = member.iter().filter(|&&b| b).count();
        Attractor {
            member,
            order,
            size,
        }
    }

    /// `R(θ)`: states from which I forces an ending with relative margin ≥ θ.
    fn end_set(&self, layer: &Layer, theta: i32) -> Attractor {
        self.attract(layer, Player::I, 0 >= theta, |e| {
            let fe = self.forced_end[e.target as usize];
            fe != NEG_INF && i32::from(fe) + i32::from(e.delta) >= theta
        })
    }

    /// `A(θ)`: states from which II forces an ending with relative margin < θ.
    fn escape_set(&self, layer: &Layer, theta: i32) -> Attractor {
        self.attract(layer, Player::II, 0 < theta, |e| {
            let dt = self.draw_tolerant[e.target as usize];
            dt != POS_INF && i32::from(dt) + i32::from(e.delta) < theta
        })
    }

    fn solve_layer(&mut self, layer: &Layer) {
        let r = layer.remaining.count_ones() as i32;
        for theta in -r..=r {
            let set = self.end_set(layer, theta);
            if set.size == 0 {
                break;
            }
            for (i, &id) in layer.ids.iter().enumerate() {
                if set.member[i] {
                    self.forced_end[id as usize] = theta as i16;
                    self.end_rank[id as usize] = set.order[i];
                }
            }
        }
        let mut settled = 0;
        for theta in (-r + 1)..=(r + 1) {
            let set = self.escape_set(layer, theta);
            for (i, &id) in layer.ids.iter().enumerate() {
                if set.member[i] && self.hold_rank[id as usize] == UNRANKED {
                    self.draw_tolerant[id as usize] = (theta - 1) as i16;
                    self.hold_rank[id as usize] = set.order[i];
                    settled += 1;
                }
            }
            if settled == layer.ids.len() {
                break;
            }
        }
    }

    /// States of the layer with remaining set `remaining` from which I forces
    /// at least `threshold`, counting margins from this layer on. The
    /// attractor is recomputed from the solved exit values.
    pub fn force_set(&self, remaining: CustomerSet, threshold: Outcome) -> Vec<GameState> {
        let mut layers = self.build_layers();
        let Some(layer) = layers.iter_mut().find(|l| l.remaining == remaining.0) else {
            return Vec::new();
        };
        let mut local = vec![0u32; self.keys.len()];
        for (i, &id) in layer.ids.iter().enumerate() {
            local[id as usize] = i as u32;
        }
        self.index_predecessors(layer, &local);
        let members: Vec<bool> = match (self.draw_rank, threshold) {
            (DrawRank::BelowAll, Outcome::Draw) => vec![true; layer.ids.len()],
            (DrawRank::BelowAll, Outcome::Ended(x)) => self.end_set(layer, x).member,
            (DrawRank::BelowTie, Outcome::Ended(x)) if x >= 0 => self.end_set(layer, x).member,
            (DrawRank::EqualsTie, Outcome::Ended(x)) if x >= 1 => self.end_set(layer, x).member,
            (_, t) => {
                let x = t.margin().unwrap_or(0);
                self.escape_set(layer, x).member.iter().map(|b| !b).collect()
            }
        };
        layer
            .ids
            .iter()
            .zip(members)
            .filter(|(_, m)| *m)
            .map(|(&id, _)| {
                let (r, k) = self.keys[id as usize];
                self.packer.unpack(r, k)
            })
            .collect()
    }

    /// Every edge goes to the same or a strictly smaller remaining set.
    pub fn layers_are_sound(&self) -> bool {
        self.keys.iter().enumerate().all(|(id, &(remaining, _))| {
            self.edges_of(id as u32).iter().all(|e| {
                let to = self.keys[e.target as usize].0;
                let shrinks = to & !remaining == 0 && to != remaining;
                (e.delta == 0 && to == remaining) || (e.delta != 0 && shrinks)
            })
        })
    }

    /// Distinct remaining sets among reachable states.
    pub fn layer_sets(&self) -> Vec<CustomerSet> {
        self.build_layers()
            .into_iter()
            .map(|l| CustomerSet(l.remaining))
            .collect()
    }
}

/// Plays the solved policy for both sides from the root and reports the
/// realized outcome, using the repetition rule for draws.
pub fn replay_policy(inst: &Instance, result: &SolveResult, root: &GameState) -> Outcome {
    let mut state = root.clone();
    let mut margin = 0;
    let mut seen = rustc_hash::FxHashSet::default();
    seen.insert(state.clone());
    loop {
        if is_terminal(inst, &state) {
            return Outcome::Ended(margin);
        }
        let Some((m, _)) = result.best_move(inst, &state, margin) else {
            return Outcome::Ended(margin);
        };
        let (next, delta) = apply_unchecked(inst, &state, m);
        margin += state.turn.sign() * delta as i32;
        if delta > 0 {
            seen.clear();
        } else if seen.contains(&next) {
            return Outcome::Draw;
        }
        seen.insert(next.clone());
        state = next;
    }
}
