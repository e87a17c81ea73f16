//! Generators for the theorem instances, their certificates, and the
//! reconstruction searches that produced the shipped parameters.

use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::catalog::CatalogError;
use crate::model::{apply_move, DrawRank, GameState, Graph, Instance, Move, Outcome, Player, Vertex};
use crate::solver::{solve, solve_from, SolveResult};
use crate::strategy::{best_response, best_response_policy, AprioriPolicy, GreedyPolicy, StrategyKind};

fn worse_or_equal(o: Outcome, bound: Outcome, dr: DrawRank) -> bool {
    o.rank(dr) <= bound.rank(dr)
}

fn step(inst: &Instance, s: &GameState, target: Vertex) -> Option<GameState> {
    apply_move(inst, s, Move::Step { piece: 0, target }).ok().map(|(n, _)| n)
}

/// Directed wheel: spokes from the center, skip-two rim, customers on the rim.
pub fn gen_wheel(n: u32) -> Result<Instance, CatalogError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(CatalogError::InvalidParameters(format!("wheel needs odd n >= 3, got {n}")));
    }
    let mut edges: Vec<(Vertex, Vertex)> = (1..=n).map(|j| (0, j)).collect();
    for j in 1..=n {
        edges.push((j, (j - 1 + 2) % n + 1));
    }
    let g = Graph::from_edges(n as usize + 1, true, &edges).expect("wheel edges in range");
    Ok(Instance::same_start(g, 1..=n, 0))
}

/// Edges the zugzwang narrative forces on `v0..v8`.
pub const ZUGZWANG_FORCED: [(Vertex, Vertex); 4] = [(0, 1), (0, 2), (1, 3), (2, 4)];
pub const ZUGZWANG_CUSTOMERS: [Vertex; 3] = [3, 6, 8];
/// Extra edges of the shipped witness, found by [`zugzwang_search`].
pub const ZUGZWANG_EXTRA: &[(Vertex, Vertex)] = &[(3, 5), (3, 7), (4, 6), (4, 8), (5, 6), (7, 8)];

fn zugzwang_graph(extra: &[(Vertex, Vertex)], pendant: bool) -> Instance {
    let mut edges = ZUGZWANG_FORCED.to_vec();
    edges.extend_from_slice(extra);
    let n = if pendant {
        edges.push((0, 9));
        10
    } else {
        9
    };
    let g = Graph::from_edges(n, false, &edges).expect("zugzwang edges in range");
    Instance::same_start(g, ZUGZWANG_CUSTOMERS, 0)
}

pub fn gen_zugzwang() -> Instance {
    zugzwang_graph(ZUGZWANG_EXTRA, false)
}

/// The zugzwang narrative: I loses, II answers `v1` with `v2` and `v2` with
/// `v1` without giving anything up, and retreating to `v0` afterwards still loses.
pub fn zugzwang_certified(inst: &Instance, budget: usize) -> Result<bool, CatalogError> {
    let g = inst.graph();
    if g.is_bipartite() || !g.is_connected() {
        return Ok(false);
    }
    let res = solve(inst, budget)?;
    let dr = inst.draw_rank();
    let lose = Outcome::Ended(-1);
    if !worse_or_equal(res.value(), lose, dr) {
        return Ok(false);
    }
    let root = inst.initial_state()?;
    for (a, b) in [(1, 2), (2, 1)] {
        let Some(s1) = step(inst, &root, a) else { return Ok(false) };
        let Some(s2) = step(inst, &s1, b) else { return Ok(false) };
        let Some(s3) = step(inst, &s2, 0) else { return Ok(false) };
        let (v1, v2, v3) = (res.value_of(&s1, 0), res.value_of(&s2, 0), res.value_of(&s3, 0));
        let ok = match (v1, v2, v3) {
            (Some(v1), Some(v2), Some(v3)) => v1 == v2 && worse_or_equal(v2, lose, dr) && worse_or_equal(v3, lose, dr),
            _ => false,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Edge sets added to the forced ones, by increasing size then lexicographically.
fn supersets(allowed: &[(Vertex, Vertex)], size: usize) -> Vec<Vec<(Vertex, Vertex)>> {
    fn rec(allowed: &[(Vertex, Vertex)], size: usize, from: usize, cur: &mut Vec<(Vertex, Vertex)>, out: &mut Vec<Vec<(Vertex, Vertex)>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in from..allowed.len() {
            cur.push(allowed[i]);
            rec(allowed, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(allowed, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Candidate extra edges: among `v3..v8` when `tight` (the narrative's only
/// moves from `v0`, `v1`, `v2`), otherwise any non-forced pair.
pub fn zugzwang_allowed(tight: bool) -> Vec<(Vertex, Vertex)> {
    let lo = if tight { 3 } else { 0 };
    let mut out = Vec::new();
    for u in lo..9 {
        for v in u + 1..9 {
            if !ZUGZWANG_FORCED.contains(&(u, v)) {
                out.push((u, v));
            }
        }
    }
    out
}

/// First extra-edge set (fewest edges, then lexicographic) accepted by `accept`.
fn first_accepted<F>(allowed: &[(Vertex, Vertex)], max_extra: usize, accept: F) -> Option<Vec<(Vertex, Vertex)>>
where
    F: Fn(&[(Vertex, Vertex)]) -> bool + Sync,
{
    for size in 0..=max_extra.min(allowed.len()) {
        let cands = supersets(allowed, size);
        #[cfg(feature = "parallel")]
        let hit = cands.par_iter().position_first(|c| accept(c));
        #[cfg(not(feature = "parallel"))]
        let hit = cands.iter().position(|c| accept(c));
        if let Some(i) = hit {
            return Some(cands[i].clone());
        }
    }
    None
}

pub fn zugzwang_search(tight: bool, max_extra: usize, budget: usize) -> Option<Vec<(Vertex, Vertex)>> {
    first_accepted(&zugzwang_allowed(tight), max_extra, |extra| {
        zugzwang_certified(&zugzwang_graph(extra, false), budget).unwrap_or(false)
    })
}

/// The zugzwang graph plus the pendant `v0' = v9` at the start.
pub fn draw_candidate() -> Instance {
    zugzwang_graph(ZUGZWANG_EXTRA, true)
}

/// What the pendant search covered; reported when no witness certifies.
pub const DRAW_SEARCH_SCOPE: &str = "pendant v9 at v0 over the zugzwang's forced edges and customers, \
     every set of up to 6 extra edges among v0..v8: no candidate has value Draw";

/// The draw game, only when its certificate holds.
pub fn gen_draw_game(budget: usize) -> Result<Instance, CatalogError> {
    let inst = draw_candidate();
    if draw_certified(&inst, budget)? {
        Ok(inst)
    } else {
        Err(CatalogError::SearchExhausted(format!(
            "draw game: candidate value is {}; {DRAW_SEARCH_SCOPE}",
            solve(&inst, budget)?.value()
        )))
    }
}

/// Draw value, and nobody gains by leaving `{v0, v0'}`: stepping onto
/// `v1`/`v2` while the other stands on `v0` loses, and doing so while the
/// other is on `v0'` gets no more than a draw (the other is forced back to
/// `v0` and the leaver can only return to the mirrored start).
pub fn draw_certified(inst: &Instance, budget: usize) -> Result<bool, CatalogError> {
    let res = solve(inst, budget)?;
    if res.value() != Outcome::Draw {
        return Ok(false);
    }
    let dr = inst.draw_rank();
    for a in [1, 2] {
        for (y, bound_i, bound_ii) in [(0, Outcome::Ended(-1), Outcome::Ended(1)), (9, Outcome::Draw, Outcome::Draw)] {
            let mut s = inst.initial_state()?;
            s.pieces_i[0] = a;
            s.pieces_ii[0] = y;
            s.turn = Player::II;
            if !worse_or_equal(solve_from(inst, &s, budget)?.value(), bound_i, dr) {
                return Ok(false);
            }
            s.pieces_i[0] = y;
            s.pieces_ii[0] = a;
            s.turn = Player::I;
            if solve_from(inst, &s, budget)?.value().rank(dr) < bound_ii.rank(dr) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn draw_search(tight: bool, max_extra: usize, budget: usize) -> Option<Vec<(Vertex, Vertex)>> {
    first_accepted(&zugzwang_allowed(tight), max_extra, |extra| {
        draw_certified(&zugzwang_graph(extra, true), budget).unwrap_or(false)
    })
}

/// Rays of `(length, customer distances along the ray)` from a center `0`.
pub fn gen_star(rays: &[(u32, Vec<u32>)]) -> Result<Instance, CatalogError> {
    if rays.len() < 2 {
        return Err(CatalogError::InvalidParameters("a star needs at least two rays".into()));
    }
    let mut edges = Vec::new();
    let mut customers = Vec::new();
    let mut next: Vertex = 1;
    for (len, at) in rays {
        if *len == 0 {
            return Err(CatalogError::InvalidParameters("ray of length 0".into()));
        }
        let mut prev = 0;
        for pos in 1..=*len {
            edges.push((prev, next));
            if at.contains(&pos) {
                customers.push(next);
            }
            prev = next;
            next += 1;
        }
        if at.iter().any(|&p| p == 0 || p > *len) {
            return Err(CatalogError::InvalidParameters(format!("customer position outside ray of length {len}")));
        }
    }
    let g = Graph::from_edges(next as usize, false, &edges).expect("star edges in range");
    Ok(Instance::same_start(g, customers, 0))
}

/// Vertex ids along each ray, center excluded, in the layout of [`gen_star`].
pub fn star_ray_vertices(rays: &[(u32, Vec<u32>)]) -> Vec<Vec<Vertex>> {
    let mut next = 1;
    rays.iter()
        .map(|(len, _)| {
            let ids = (next..next + len).collect();
            next += len;
            ids
        })
        .collect()
}

/// `k` near rays of length `d` with a customer at each tip, and one ray of
/// length `L` continuing into `k+1` customers spaced `s` apart.
pub fn gen_trailing_tree(k: u32, d: u32, l: u32, s: u32) -> Result<Instance, CatalogError> {
    if k < 2 || d == 0 || l == 0 || s == 0 {
        return Err(CatalogError::InvalidParameters(format!("trailing tree needs k >= 2 and positive lengths (k={k}, d={d}, L={l}, s={s})")));
    }
    let mut rays: Vec<(u32, Vec<u32>)> = (0..k).map(|_| (d, vec![d])).collect();
    rays.push((l + k * s, (0..=k).map(|i| l + i * s).collect()));
    gen_star(&rays)
}

pub const TRAILING_DEFAULT: (u32, u32, u32, u32) = (2, 2, 7, 1);

/// Value `Ended(+1)`, every first step onto a near ray loses, and II has
/// time to sweep the near tips before I's first capture.
pub fn trailing_certified(k: u32, d: u32, l: u32, s: u32, budget: usize) -> Result<bool, CatalogError> {
    if (2 * k - 1) * d > l - 1 {
        return Ok(false);
    }
    let inst = gen_trailing_tree(k, d, l, s)?;
    let res = solve(&inst, budget)?;
    if res.value() != Outcome::Ended(1) {
        return Ok(false);
    }
    let root = inst.initial_state()?;
    let dr = inst.draw_rank();
    // near rays start at vertices 1, 1+d, 1+2d, ...
    for r in 0..k {
        let first = 1 + r * d;
        let Some(s1) = step(&inst, &root, first) else { return Ok(false) };
        match res.value_of(&s1, 0) {
            Some(v) if worse_or_equal(v, Outcome::Ended(-1), dr) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Smallest `(d, L)` in the grid certifying the trailing tree for `k`.
pub fn trailing_search(k: u32, budget: usize) -> Option<(u32, u32)> {
    for d in 2..=6 {
        for l in 6..=20 {
            if trailing_certified(k, d, l, 1, budget).unwrap_or(false) {
                return Some((d, l));
            }
        }
    }
    None
}

/// Three branches of length `p` from the root, each splitting into three
/// leaves at distance `q` below the branch vertex.
pub fn gen_apriori_tree(p: u32, q: u32) -> Result<Instance, CatalogError> {
    if p == 0 || q == 0 {
        return Err(CatalogError::InvalidParameters("apriori tree needs p, q >= 1".into()));
    }
    let mut edges = Vec::new();
    let mut next: Vertex = 1;
    let mut customers = Vec::new();
    let mut path = |from: Vertex, len: u32, edges: &mut Vec<(Vertex, Vertex)>| {
        let mut prev = from;
        for _ in 0..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        prev
    };
    for _ in 0..3 {
        let branch = path(0, p, &mut edges);
        for _ in 0..3 {
            customers.push(path(branch, q, &mut edges));
        }
    }
    let n = edges.len() + 1;
    let g = Graph::from_edges(n, false, &edges).expect("tree edges in range");
    Ok(Instance::same_start(g, customers, 0))
}

pub const APRIORI_DEFAULT: (u32, u32) = (1, 1);

/// Customers of [`gen_apriori_tree`] grouped by cluster.
pub fn apriori_clusters(inst: &Instance) -> [[Vertex; 3]; 3] {
    let c = inst.customers();
    [[c[0], c[1], c[2]], [c[3], c[4], c[5]], [c[6], c[7], c[8]]]
}

/// One priority ordering per class of the tree's symmetry group: clusters and
/// leaves are renamed in order of first appearance, so only the shape remains.
pub fn apriori_ordering_classes(inst: &Instance) -> Vec<Vec<Vertex>> {
    let clusters = apriori_clusters(inst);
    let mut seen: BTreeMap<Vec<(usize, usize)>, Vec<Vertex>> = BTreeMap::new();
    let mut perm: Vec<usize> = (0..9).collect();
    permutohedron_each(&mut perm, &mut |order| {
        let mut cluster_name = [usize::MAX; 3];
        let mut leaf_name = [[usize::MAX; 3]; 3];
        let mut used_clusters = 0;
        let mut used_leaves = [0usize; 3];
        let key: Vec<(usize, usize)> = order
            .iter()
            .map(|&x| {
                let (c, l) = (x / 3, x % 3);
                if cluster_name[c] == usize::MAX {
                    cluster_name[c] = used_clusters;
                    used_clusters += 1;
                }
                if leaf_name[c][l] == usize::MAX {
                    leaf_name[c][l] = used_leaves[c];
                    used_leaves[c] += 1;
                }
                (cluster_name[c], leaf_name[c][l])
            })
            .collect();
        seen.entry(key)
            .or_insert_with(|| order.iter().map(|&x| clusters[x / 3][x % 3]).collect());
    });
    seen.into_values().collect()
}

/// Calls `f` on every permutation of `items` (Heap's algorithm).
pub(crate) fn permutohedron_each(items: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// II's best response against each ordering class; all must be I losses.
pub fn apriori_results(inst: &Instance, budget: usize) -> Result<Vec<(Vec<Vertex>, Outcome)>, CatalogError> {
    let classes = apriori_ordering_classes(inst);
    let run = |order: &Vec<Vertex>| -> Result<(Vec<Vertex>, Outcome), CatalogError> {
        let policy = AprioriPolicy::new(inst, order.clone())?;
        let o = best_response_policy(inst, &policy, Player::I, budget)?;
        Ok((order.clone(), o))
    };
    #[cfg(feature = "parallel")]
    return classes.par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    return classes.iter().map(run).collect();
}

pub fn apriori_certified(p: u32, q: u32, budget: usize) -> Result<bool, CatalogError> {
    let inst = gen_apriori_tree(p, q)?;
    Ok(apriori_results(&inst, budget)?
        .iter()
        .all(|(_, o)| o.is_loss_for_i()))
}

pub fn apriori_search(max: u32, budget: usize) -> Option<(u32, u32)> {
    for total in 2..=2 * max {
        for p in 1..=max {
            let Some(q) = total.checked_sub(p) else { continue };
            if q == 0 || q > max {
                continue;
            }
            if apriori_certified(p, q, budget).unwrap_or(false) {
                return Some((p, q));
            }
        }
    }
    None
}

/// Rays of the shipped star for the open exercise: 5, 3 and 3 customers.
pub fn figure9_rays() -> Vec<(u32, Vec<u32>)> {
    FIGURE9_RAYS.iter().map(|(l, at)| (*l, at.to_vec())).collect()
}

pub const FIGURE9_RAYS: [(u32, &[u32]); 3] = [(5, &[1, 2, 3, 4, 5]), (3, &[1, 2, 3]), (3, &[1, 2, 3])];

/// Ordering that empties one ray outward first, then the rest nearest first.
pub fn single_ray_ordering(rays: &[(u32, Vec<u32>)], ray: usize) -> Vec<Vertex> {
    let ids = star_ray_vertices(rays);
    let mut first: Vec<Vertex> = rays[ray].1.iter().map(|&p| ids[ray][p as usize - 1]).collect();
    first.sort_unstable();
    let mut rest: Vec<(u32, Vertex)> = Vec::new();
    for (r, (_, at)) in rays.iter().enumerate() {
        if r != ray {
            rest.extend(at.iter().map(|&p| (p, ids[r][p as usize - 1])));
        }
    }
    rest.sort_unstable();
    first.extend(rest.into_iter().map(|(_, v)| v));
    first
}

/// I wins with optimal play, but loses to a best response when it clears a
/// single ray first (any ray) or plays nearest-customer greedy.
pub fn figure9_certified(rays: &[(u32, Vec<u32>)], budget: usize) -> Result<bool, CatalogError> {
    let inst = gen_star(rays)?;
    let res: SolveResult = solve(&inst, budget)?;
    if !matches!(res.value(), Outcome::Ended(m) if m >= 1) {
        return Ok(false);
    }
    for r in 0..rays.len() {
        let policy = AprioriPolicy::new(&inst, single_ray_ordering(rays, r))?;
        if !best_response_policy(&inst, &policy, Player::I, budget)?.is_loss_for_i() {
            return Ok(false);
        }
    }
    Ok(best_response_policy(&inst, &GreedyPolicy, Player::I, budget)?.is_loss_for_i())
}

/// Layouts with customer counts 5/3/3 on rays up to `max_len`, shortest total first.
pub fn figure9_search(max_len: u32, budget: usize) -> Option<Vec<(u32, Vec<u32>)>> {
    fn placements(len: u32, count: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let positions: Vec<u32> = (1..=len).collect();
        let total = 1u32 << len;
        for mask in 0..total {
            if mask.count_ones() as usize == count && mask & (1 << (len - 1)) != 0 {
                out.push(positions.iter().filter(|&&p| mask & (1 << (p - 1)) != 0).copied().collect());
            }
        }
        out
    }
    let mut layouts = Vec::new();
    for a in 5..=max_len {
        for b in 3..=max_len {
            for c in b..=max_len {
                for pa in placements(a, 5) {
                    for pb in placements(b, 3) {
                        for pc in placements(c, 3) {
                            layouts.push(vec![(a, pa.clone()), (b, pb.clone()), (c, pc)]);
                        }
                    }
                }
            }
        }
    }
    layouts.sort_by_key(|l| (l.iter().map(|r| r.0).sum::<u32>(), l.clone()));
    let ok = |l: &Vec<(u32, Vec<u32>)>| figure9_certified(l, budget).unwrap_or(false);
    #[cfg(feature = "parallel")]
    let hit = layouts.par_iter().position_first(ok);
    #[cfg(not(feature = "parallel"))]
    let hit = layouts.iter().position(ok);
    hit.map(|i| layouts[i].clone())
}

/// Greedy as I against a best-responding II, for reporting.
pub fn greedy_best_response(inst: &Instance, budget: usize) -> Result<Outcome, CatalogError> {
    Ok(best_response(inst, &StrategyKind::Greedy, Player::I, budget)?)
}
