//! Game rules: graphs, instances, positions, moves and outcomes.
//!
//! Everything here is an immutable value and every rule is a pure function,
//! so the solver, strategies and service all share one definition of the game.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::ModelError;

/// Vertex identifier.
pub type Vertex = u32;

/// Piece positions of one side, kept sorted.
pub type Pieces = SmallVec<[Vertex; 2]>;

/// Largest customer count a playable position can track.
pub const MAX_TRACKED_CUSTOMERS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    I,
    II,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::I => Player::II,
            Player::II => Player::I,
        }
    }

    /// +1 for I, -1 for II: the sign a capture contributes to the margin.
    pub fn sign(self) -> i32 {
        match self {
            Player::I => 1,
            Player::II => -1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::I => "I",
            Player::II => "II",
        })
    }
}

/// Where a never-ending game sits among finished ones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawRank {
    /// `Ended(-1) < Draw < Ended(0)`.
    #[default]
    BelowTie,
    /// Draw is worse for I than any finished game.
    BelowAll,
    /// Draw and tie are indifferent.
    EqualsTie,
}

/// Result of a play from I's point of view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Draw,
    /// I's score minus II's score when the game ended.
    Ended(i32),
}

const BELOW_ALL_RANK: i32 = -(1 << 20);

impl Outcome {
    /// Integer embedding of the outcome order: I maximizes, II minimizes.
    pub fn rank(self, draw_rank: DrawRank) -> i32 {
        match self {
            Outcome::Ended(m) => 2 * m,
            Outcome::Draw => match draw_rank {
                DrawRank::BelowTie => -1,
                DrawRank::BelowAll => BELOW_ALL_RANK,
                DrawRank::EqualsTie => 0,
            },
        }
    }

    pub fn cmp_under(self, other: Outcome, draw_rank: DrawRank) -> Ordering {
        self.rank(draw_rank).cmp(&other.rank(draw_rank))
    }

    /// Adds captures made before this outcome was reached. Draws stay draws.
    pub fn shift(self, delta: i32) -> Outcome {
        match self {
            Outcome::Draw => Outcome::Draw,
            Outcome::Ended(m) => Outcome::Ended(m + delta),
        }
    }

    /// The same result seen from II's side.
    pub fn reversed(self) -> Outcome {
        match self {
            Outcome::Draw => Outcome::Draw,
            Outcome::Ended(m) => Outcome::Ended(-m),
        }
    }

    pub fn margin(self) -> Option<i32> {
        match self {
            Outcome::Draw => None,
            Outcome::Ended(m) => Some(m),
        }
    }

    pub fn is_loss_for_i(self) -> bool {
        matches!(self, Outcome::Ended(m) if m < 0)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Draw => f.write_str("Draw"),
            Outcome::Ended(m) => write!(f, "Ended({m})"),
        }
    }
}

/// Directed or undirected graph stored as sorted out-neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    directed: bool,
    adjacency: Vec<Vec<Vertex>>,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Builds a canonical graph from an edge list; undirected edges are
    /// listed once and symmetrized here.
    pub fn from_edges(
        vertex_count: usize,
        directed: bool,
        edges: &[(Vertex, Vertex)],
    ) -> Result<Graph, ModelError> {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(ModelError::EdgeOutOfRange { u, v, vertex_count });
            }
            adjacency[u as usize].push(v);
            if !directed {
                adjacency[v as usize].push(u);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph {
            directed,
            adjacency,
            labels: None,
        })
    }

    /// Takes adjacency lists verbatim. Use [`validate_instance`] to check them.
    pub fn from_adjacency(directed: bool, adjacency: Vec<Vec<Vertex>>) -> Graph {
        Graph {
            directed,
            adjacency,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Graph {
        self.labels = Some(labels);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v as usize]
    }

    pub fn adjacency(&self) -> &[Vec<Vertex>] {
        &self.adjacency
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adjacency
            .get(u as usize)
            .is_some_and(|list| list.binary_search(&v).is_ok())
    }

    /// Edge list with undirected edges reported once as `(min, max)`.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            let u = u as Vertex;
            for &v in list {
                if self.directed || u <= v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        let arcs: usize = self.adjacency.iter().map(Vec::len).sum();
        if self.directed {
            arcs
        } else {
            arcs / 2
        }
    }

    /// Breadth-first distances from `from` along out-edges.
    pub fn bfs(&self, from: Vertex) -> Vec<Option<u32>> {
        self.bfs_multi(std::iter::once(from))
    }

    pub fn bfs_multi(&self, sources: impl IntoIterator<Item = Vertex>) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s as usize].is_none() {
                dist[s as usize] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let d = dist[u as usize].unwrap_or(0);
            for &w in self.neighbors(u) {
                if dist[w as usize].is_none() {
                    dist[w as usize] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Distances *to* `to` along out-edges (BFS over reversed arcs).
    pub fn bfs_to(&self, to: Vertex) -> Vec<Option<u32>> {
        if !self.directed {
            return self.bfs(to);
        }
        let mut reverse = vec![Vec::new(); self.vertex_count()];
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                reverse[v as usize].push(u as Vertex);
            }
        }
        Graph::from_adjacency(true, reverse).bfs(to)
    }

    /// Proper 2-coloring if one exists; arcs are treated as undirected.
    pub fn two_coloring(&self) -> Option<Vec<u8>> {
        let n = self.vertex_count();
        let mut undirected = vec![Vec::new(); n];
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                undirected[u].push(v);
                undirected[v as usize].push(u as Vertex);
            }
        }
        let mut color = vec![u8::MAX; n];
        let mut queue = VecDeque::new();
        for root in 0..n {
            if color[root] != u8::MAX {
                continue;
            }
            color[root] = 0;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &v in &undirected[u] {
                    let v = v as usize;
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    pub fn is_bipartite(&self) -> bool {
        self.two_coloring().is_some()
    }

    /// Connectivity of the underlying undirected graph.
    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut undirected = vec![Vec::new(); n];
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                undirected[u].push(v as usize);
                undirected[v as usize].push(u);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &undirected[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }
}

/// A playable problem: graph, customers, starting pieces and rule switches.
#[derive(Debug)]
pub struct Instance {
    graph: Graph,
    customers: Vec<Vertex>,
    starts_i: Vec<Vertex>,
    starts_ii: Vec<Vertex>,
    passing_allowed: bool,
    draw_rank: DrawRank,
    slots: Vec<u32>,
    reach: OnceLock<Vec<u64>>,
}

impl Clone for Instance {
    fn clone(&self) -> Self {
        Instance {
            graph: self.graph.clone(),
            customers: self.customers.clone(),
            starts_i: self.starts_i.clone(),
            starts_ii: self.starts_ii.clone(),
            passing_allowed: self.passing_allowed,
            draw_rank: self.draw_rank,
            slots: self.slots.clone(),
            reach: OnceLock::new(),
        }
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
            && self.customers == other.customers
            && self.starts_i == other.starts_i
            && self.starts_ii == other.starts_ii
            && self.passing_allowed == other.passing_allowed
            && self.draw_rank == other.draw_rank
    }
}

impl Eq for Instance {}

const NO_SLOT: u32 = u32::MAX;

impl Instance {
    /// Customers are sorted and deduplicated; nothing else is checked here.
    pub fn new(
        graph: Graph,
        customers: impl IntoIterator<Item = Vertex>,
        starts_i: Vec<Vertex>,
        starts_ii: Vec<Vertex>,
    ) -> Instance {
        let mut customers: Vec<Vertex> = customers.into_iter().collect();
        customers.sort_unstable();
        customers.dedup();
        let mut slots = vec![NO_SLOT; graph.vertex_count()];
        for (slot, &c) in customers.iter().enumerate() {
            if let Some(entry) = slots.get_mut(c as usize) {
                *entry = slot as u32;
            }
        }
        Instance {
            graph,
            customers,
            starts_i,
            starts_ii,
            passing_allowed: false,
            draw_rank: DrawRank::BelowTie,
            slots,
            reach: OnceLock::new(),
        }
    }

    /// Both players start every piece on `start`.
    pub fn same_start(
        graph: Graph,
        customers: impl IntoIterator<Item = Vertex>,
        start: Vertex,
    ) -> Instance {
        Instance::new(graph, customers, vec![start], vec![start])
    }

    pub fn with_passing(mut self, allowed: bool) -> Instance {
        self.passing_allowed = allowed;
        self
    }

    pub fn with_draw_rank(mut self, draw_rank: DrawRank) -> Instance {
        self.draw_rank = draw_rank;
        self
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn customers(&self) -> &[Vertex] {
        &self.customers
    }

    pub fn customer_count(&self) -> usize {
        self.customers.len()
    }

    pub fn starts(&self, player: Player) -> &[Vertex] {
        match player {
            Player::I => &self.starts_i,
            Player::II => &self.starts_ii,
        }
    }

    pub fn passing_allowed(&self) -> bool {
        self.passing_allowed
    }

    pub fn draw_rank(&self) -> DrawRank {
        self.draw_rank
    }

    /// Index of `v` among the sorted customers.
    pub fn customer_slot(&self, v: Vertex) -> Option<usize> {
        match self.slots.get(v as usize) {
            Some(&s) if s != NO_SLOT => Some(s as usize),
            _ => None,
        }
    }

    pub fn is_customer(&self, v: Vertex) -> bool {
        self.customer_slot(v).is_some()
    }

    /// True when both sides start every piece on the same vertices.
    pub fn has_same_start(&self) -> bool {
        let mut a = self.starts_i.clone();
        let mut b = self.starts_ii.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// The same instance with the roles of I and II exchanged.
    pub fn swapped_roles(&self) -> Instance {
        Instance::new(
            self.graph.clone(),
            self.customers.iter().copied(),
            self.starts_ii.clone(),
            self.starts_i.clone(),
        )
        .with_passing(self.passing_allowed)
        .with_draw_rank(self.draw_rank)
    }

    /// Per-vertex bitset of customer slots reachable from that vertex.
    pub(crate) fn reach_masks(&self) -> &[u64] {
        self.reach.get_or_init(|| {
            let n = self.graph.vertex_count();
            (0..n as Vertex)
                .map(|v| {
                    let dist = self.graph.bfs(v);
                    let mut mask = 0u64;
                    for (slot, &c) in self.customers.iter().enumerate().take(MAX_TRACKED_CUSTOMERS) {
                        if dist[c as usize].is_some() {
                            mask |= 1 << slot;
                        }
                    }
                    mask
                })
                .collect()
        })
    }

    pub fn initial_state(&self) -> Result<GameState, ModelError> {
        if self.customers.len() > MAX_TRACKED_CUSTOMERS {
            return Err(ModelError::TooManyCustomers(self.customers.len()));
        }
        let mut pieces_i: Pieces = self.starts_i.iter().copied().collect();
        let mut pieces_ii: Pieces = self.starts_ii.iter().copied().collect();
        pieces_i.sort_unstable();
        pieces_ii.sort_unstable();
        Ok(GameState {
            turn: Player::I,
            pieces_i,
            pieces_ii,
            remaining: CustomerSet::full(self.customers.len()),
        })
    }
}

/// Bitset over customer slots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CustomerSet(pub u64);

impl CustomerSet {
    pub fn full(count: usize) -> CustomerSet {
        if count >= 64 {
            CustomerSet(u64::MAX)
        } else {
            CustomerSet((1u64 << count) - 1)
        }
    }

    pub fn contains(self, slot: usize) -> bool {
        slot < 64 && self.0 >> slot & 1 == 1
    }

    pub fn without(self, slot: usize) -> CustomerSet {
        CustomerSet(self.0 & !(1u64 << slot))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: CustomerSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn slots(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }
}

/// A position: whose turn, where every piece stands, which customers remain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    pub turn: Player,
    pub pieces_i: Pieces,
    pub pieces_ii: Pieces,
    pub remaining: CustomerSet,
}

impl GameState {
    pub fn pieces(&self, player: Player) -> &Pieces {
        match player {
            Player::I => &self.pieces_i,
            Player::II => &self.pieces_ii,
        }
    }

    fn pieces_mut(&mut self, player: Player) -> &mut Pieces {
        match player {
            Player::I => &mut self.pieces_i,
            Player::II => &mut self.pieces_ii,
        }
    }

    /// Remaining customers as vertices.
    pub fn remaining_vertices(&self, inst: &Instance) -> Vec<Vertex> {
        self.remaining.slots().map(|s| inst.customers[s]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    /// Move the mover's `piece`-th piece (sorted order) to `target`.
    Step { piece: usize, target: Vertex },
    Pass,
    /// The mover has no step and may not pass.
    ForcedNull,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Step { piece, target } => write!(f, "{piece}->{target}"),
            Move::Pass => f.write_str("pass"),
            Move::ForcedNull => f.write_str("null"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    NotTerminal,
    Terminal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyGraph,
    SelfLoop(Vertex),
    NeighborOutOfRange { from: Vertex, to: Vertex },
    NotCanonical(Vertex),
    Asymmetry { from: Vertex, to: Vertex },
    LabelCount { labels: usize, vertices: usize },
    CustomerOutOfRange(Vertex),
    NoStarts(Player),
    StartOutOfRange { player: Player, vertex: Vertex },
    StartInCustomers(Vertex),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => f.write_str("graph has no vertices"),
            Violation::SelfLoop(v) => write!(f, "self-loop at {v}"),
            Violation::NeighborOutOfRange { from, to } => {
                write!(f, "neighbor {to} of {from} out of range")
            }
            Violation::NotCanonical(v) => {
                write!(f, "neighbors of {v} not sorted and duplicate-free")
            }
            Violation::Asymmetry { from, to } => {
                write!(f, "asymmetry: {from} lists {to} but not vice versa")
            }
            Violation::LabelCount { labels, vertices } => {
                write!(f, "{labels} labels for {vertices} vertices")
            }
            Violation::CustomerOutOfRange(v) => write!(f, "customer {v} out of range"),
            Violation::NoStarts(p) => write!(f, "player {p} has no pieces"),
            Violation::StartOutOfRange { player, vertex } => {
                write!(f, "start {vertex} of player {player} out of range")
            }
            Violation::StartInCustomers(v) => write!(f, "start in V_C: vertex {v}"),
        }
    }
}

/// Every invariant violation of `inst`; empty means valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let g = inst.graph();
    let n = g.vertex_count();
    if n == 0 {
        out.push(Violation::EmptyGraph);
    }
    for (u, list) in g.adjacency().iter().enumerate() {
        let u = u as Vertex;
        if list.windows(2).any(|w| w[0] >= w[1]) {
            out.push(Violation::NotCanonical(u));
        }
        for &v in list {
            if v == u {
                out.push(Violation::SelfLoop(u));
            } else if v as usize >= n {
                out.push(Violation::NeighborOutOfRange { from: u, to: v });
            } else if !g.is_directed() && !g.adjacency()[v as usize].contains(&u) {
                out.push(Violation::Asymmetry { from: u, to: v });
            }
        }
    }
    if let Some(labels) = g.labels() {
        if labels.len() != n {
            out.push(Violation::LabelCount {
                labels: labels.len(),
                vertices: n,
            });
        }
    }
    for &c in inst.customers() {
        if c as usize >= n {
            out.push(Violation::CustomerOutOfRange(c));
        }
    }
    for player in [Player::I, Player::II] {
        let starts = inst.starts(player);
        if starts.is_empty() {
            out.push(Violation::NoStarts(player));
        }
        for &s in starts {
            if s as usize >= n {
                out.push(Violation::StartOutOfRange { player, vertex: s });
            } else if inst.is_customer(s) {
                out.push(Violation::StartInCustomers(s));
            }
        }
    }
    out.dedup();
    out
}

/// All moves for the player to move, steps in `(piece, target)` order.
pub fn legal_moves(inst: &Instance, s: &GameState) -> Vec<Move> {
    let mut moves = Vec::new();
    for (piece, &at) in s.pieces(s.turn).iter().enumerate() {
        for &target in inst.graph().neighbors(at) {
            moves.push(Move::Step { piece, target });
        }
    }
    if inst.passing_allowed() {
        moves.push(Move::Pass);
    } else if moves.is_empty() {
        moves.push(Move::ForcedNull);
    }
    moves
}

pub fn is_legal(inst: &Instance, s: &GameState, m: Move) -> bool {
    match m {
        Move::Step { piece, target } => s
            .pieces(s.turn)
            .get(piece)
            .is_some_and(|&at| inst.graph().has_edge(at, target)),
        Move::Pass => inst.passing_allowed(),
        Move::ForcedNull => {
            !inst.passing_allowed()
                && s
                    .pieces(s.turn)
                    .iter()
                    .all(|&at| inst.graph().neighbors(at).is_empty())
        }
    }
}

/// Plays `m`; returns the successor and 1 if the mover captured a customer.
pub fn apply_move(inst: &Instance, s: &GameState, m: Move) -> Result<(GameState, u32), ModelError> {
    if !is_legal(inst, s, m) {
        return Err(ModelError::IllegalMove(m));
    }
    Ok(apply_unchecked(inst, s, m))
}

pub(crate) fn apply_unchecked(inst: &Instance, s: &GameState, m: Move) -> (GameState, u32) {
    let mut next = s.clone();
    let mover = s.turn;
    let mut delta = 0;
    if let Move::Step { piece, target } = m {
        let pieces = next.pieces_mut(mover);
        pieces[piece] = target;
        pieces.sort_unstable();
        if let Some(slot) = inst.customer_slot(target) {
            if next.remaining.contains(slot) {
                next.remaining = next.remaining.without(slot);
                delta = 1;
            }
        }
    }
    next.turn = mover.other();
    (next, delta)
}

pub fn terminal_status(inst: &Instance, s: &GameState) -> Terminal {
    if is_terminal(inst, s) {
        Terminal::Terminal
    } else {
        Terminal::NotTerminal
    }
}

pub(crate) fn is_terminal(inst: &Instance, s: &GameState) -> bool {
    if s.remaining.is_empty() {
        return true;
    }
    let reach = inst.reach_masks();
    let reachable = s
        .pieces_i
        .iter()
        .chain(s.pieces_ii.iter())
        .fold(0u64, |acc, &v| acc | reach[v as usize]);
    reachable & s.remaining.0 == 0
}

/// Edge count of a shortest directed path, `None` when unreachable.
pub fn shortest_distance(inst: &Instance, from: Vertex, to: Vertex) -> Option<u32> {
    if from == to {
        return Some(0);
    }
    inst.graph().bfs(from)[to as usize]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n as Vertex - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, false, &edges).unwrap()
    }

    #[test]
    fn minimal_instance_is_valid() {
        let inst = Instance::same_start(path(2), [1], 0);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn start_in_customers_reported() {
        let inst = Instance::same_start(path(2), [0, 1], 0);
        let v = validate_instance(&inst);
        assert_eq!(v, vec![Violation::StartInCustomers(0)]);
        assert!(v[0].to_string().contains("start in V_C"));
    }

    #[test]
    fn asymmetric_undirected_adjacency_reported() {
        let g = Graph::from_adjacency(false, vec![vec![1], vec![]]);
        let inst = Instance::same_start(g, [1], 0);
        let v = validate_instance(&inst);
        assert!(v.iter().any(|x| x.to_string().contains("asymmetry")));
    }

    #[test]
    fn self_loop_and_range_reported() {
        let g = Graph::from_adjacency(true, vec![vec![0, 5], vec![]]);
        let inst = Instance::same_start(g, [1], 0);
        let v = validate_instance(&inst);
        assert!(v.contains(&Violation::SelfLoop(0)));
        assert!(v.contains(&Violation::NeighborOutOfRange { from: 0, to: 5 }));
    }

    #[test]
    fn steps_from_middle_of_path() {
        let inst = Instance::new(path(3), [0, 2], vec![1], vec![1]);
        let s = inst.initial_state().unwrap();
        assert_eq!(
            legal_moves(&inst, &s),
            vec![
                Move::Step { piece: 0, target: 0 },
                Move::Step { piece: 0, target: 2 }
            ]
        );
    }

    #[test]
    fn pass_listed_when_allowed() {
        let inst = Instance::same_start(path(2), [1], 0).with_passing(true);
        let s = inst.initial_state().unwrap();
        assert_eq!(
            legal_moves(&inst, &s),
            vec![Move::Step { piece: 0, target: 1 }, Move::Pass]
        );
    }

    #[test]
    fn dead_end_forces_null_move() {
        let g = Graph::from_edges(3, true, &[(0, 1), (2, 0)]).unwrap();
        let inst = Instance::new(g, [0], vec![1], vec![2]);
        let s = inst.initial_state().unwrap();
        assert_eq!(legal_moves(&inst, &s), vec![Move::ForcedNull]);
        let (next, delta) = apply_move(&inst, &s, Move::ForcedNull).unwrap();
        assert_eq!(delta, 0);
        assert_eq!(next.turn, Player::II);
        assert_eq!(next.pieces_i, s.pieces_i);
    }

    #[test]
    fn capture_removes_customer_once() {
        let inst = Instance::same_start(path(3), [1], 0);
        let s = inst.initial_state().unwrap();
        let (s1, d1) = apply_move(&inst, &s, Move::Step { piece: 0, target: 1 }).unwrap();
        assert_eq!(d1, 1);
        assert!(s1.remaining.is_empty());
        let (_, d2) = apply_move(&inst, &s1, Move::Step { piece: 0, target: 1 }).unwrap();
        assert_eq!(d2, 0, "captured vertex stays traversable but scores nothing");
    }

    #[test]
    fn pass_only_flips_turn() {
        let inst = Instance::same_start(path(3), [2], 0).with_passing(true);
        let s = inst.initial_state().unwrap();
        let (next, delta) = apply_move(&inst, &s, Move::Pass).unwrap();
        assert_eq!(delta, 0);
        assert_eq!((next.pieces_i.clone(), next.remaining), (s.pieces_i.clone(), s.remaining));
        assert_eq!(next.turn, Player::II);
    }

    #[test]
    fn illegal_moves_rejected() {
        let inst = Instance::same_start(path(3), [2], 0);
        let s = inst.initial_state().unwrap();
        assert!(apply_move(&inst, &s, Move::Step { piece: 0, target: 2 }).is_err());
        assert!(apply_move(&inst, &s, Move::Pass).is_err());
        assert!(apply_move(&inst, &s, Move::ForcedNull).is_err());
    }

    #[test]
    fn moving_onto_opponent_is_legal() {
        let inst = Instance::new(path(3), [2], vec![0], vec![1]);
        let s = inst.initial_state().unwrap();
        assert!(apply_move(&inst, &s, Move::Step { piece: 0, target: 1 }).is_ok());
    }

    #[test]
    fn terminal_when_nothing_remains_or_unreachable() {
        let inst = Instance::same_start(path(2), [1], 0);
        let mut s = inst.initial_state().unwrap();
        assert_eq!(terminal_status(&inst, &s), Terminal::NotTerminal);
        s.remaining = CustomerSet(0);
        assert_eq!(terminal_status(&inst, &s), Terminal::Terminal);

        let g = Graph::from_edges(4, false, &[(0, 1), (2, 3)]).unwrap();
        let split = Instance::same_start(g, [3], 0);
        let s = split.initial_state().unwrap();
        assert_eq!(terminal_status(&split, &s), Terminal::Terminal);
    }

    #[test]
    fn distances() {
        let inst = Instance::same_start(path(3), [2], 0);
        assert_eq!(shortest_distance(&inst, 1, 1), Some(0));
        assert_eq!(shortest_distance(&inst, 0, 2), Some(2));
        let g = Graph::from_edges(2, true, &[(0, 1)]).unwrap();
        let directed = Instance::same_start(g, [1], 0);
        assert_eq!(shortest_distance(&directed, 1, 0), None);
    }

    #[test]
    fn outcome_order_below_tie() {
        let dr = DrawRank::BelowTie;
        let mut xs = [
            Outcome::Ended(1),
            Outcome::Draw,
            Outcome::Ended(-1),
            Outcome::Ended(0),
            Outcome::Ended(-2),
        ];
        xs.sort_by(|a, b| a.cmp_under(*b, dr));
        assert_eq!(
            xs,
            [
                Outcome::Ended(-2),
                Outcome::Ended(-1),
                Outcome::Draw,
                Outcome::Ended(0),
                Outcome::Ended(1)
            ]
        );
        assert_eq!(Outcome::Draw.shift(3), Outcome::Draw);
        assert_eq!(Outcome::Ended(2).shift(-3), Outcome::Ended(-1));
        assert!(Outcome::Draw.rank(DrawRank::BelowAll) < Outcome::Ended(-64).rank(DrawRank::BelowAll));
        assert_eq!(Outcome::Draw.cmp_under(Outcome::Ended(0), DrawRank::EqualsTie), Ordering::Equal);
    }
}
