//! Exhaustive small-graph families, one representative per isomorphism class.

use std::collections::BTreeMap;

use crate::catalog::figures::permutohedron_each;
use crate::model::{Graph, Instance, Vertex};

type Edges = Vec<(Vertex, Vertex)>;

fn adjacency(n: usize, edges: &Edges) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    adj
}

/// AHU encoding of the tree rooted at `root`.
fn ahu(adj: &[Vec<usize>], root: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[root]
        .iter()
        .filter(|&&c| c != parent)
        .map(|&c| ahu(adj, c, root))
        .collect();
    kids.sort_unstable();
    format!("({})", kids.concat())
}

fn tree_centers(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &leaf in &layer {
            for &w in &adj[leaf] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer
}

fn tree_code(n: usize, edges: &Edges) -> String {
    let adj = adjacency(n, edges);
    tree_centers(&adj)
        .into_iter()
        .map(|c| ahu(&adj, c, usize::MAX))
        .min()
        .unwrap_or_default()
}

/// All unlabelled trees on `n` vertices, grown by attaching leaves.
pub fn free_trees(n: usize) -> Vec<Edges> {
    let mut level: Vec<Edges> = vec![Vec::new()];
    for size in 1..n.max(1) {
        let mut next: BTreeMap<String, Edges> = BTreeMap::new();
        for t in &level {
            for v in 0..size {
                let mut e = t.clone();
                e.push((v as Vertex, size as Vertex));
                next.entry(tree_code(size + 1, &e)).or_insert(e);
            }
        }
        level = next.into_values().collect();
    }
    if n == 0 {
        Vec::new()
    } else {
        level
    }
}

fn subsets_between(pool: &[Vertex], lo: usize, hi: usize) -> Vec<Vec<Vertex>> {
    let mut out = Vec::new();
    for mask in 0u32..1 << pool.len() {
        let k = mask.count_ones() as usize;
        if (lo..=hi).contains(&k) {
            out.push((0..pool.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pool[i]).collect());
        }
    }
    out
}

/// Trees on up to `max_n` vertices, every start, every set of `lo..=hi` leaf customers.
pub fn tree_sweep_instances(max_n: usize, lo: usize, hi: usize) -> Vec<Instance> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for edges in free_trees(n) {
            let g = Graph::from_edges(n, false, &edges).expect("tree edges in range");
            for start in 0..n as Vertex {
                let leaves: Vec<Vertex> = (0..n as Vertex)
                    .filter(|&v| v != start && g.neighbors(v).len() == 1)
                    .collect();
                for cs in subsets_between(&leaves, lo, hi) {
                    out.push(Instance::same_start(g.clone(), cs, start));
                }
            }
        }
    }
    out
}

fn pair_bit(n: usize, u: usize, v: usize) -> u32 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    (a * n + b) as u32
}

fn graph_code(n: usize, adj: &[u32]) -> u64 {
    let mut best = u64::MAX;
    let mut perm: Vec<usize> = (0..n).collect();
    permutohedron_each(&mut perm, &mut |p| {
        let mut code = 0u64;
        for u in 0..n {
            let mut row = adj[u];
            while row != 0 {
                let v = row.trailing_zeros() as usize;
                row &= row - 1;
                if u < v {
                    code |= 1 << pair_bit(n, p[u], p[v]);
                }
            }
        }
        best = best.min(code);
    });
    best
}

fn two_color(n: usize, adj: &[u32]) -> Vec<u8> {
    let mut color = vec![u8::MAX; n];
    color[0] = 0;
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        let mut row = adj[u];
        while row != 0 {
            let v = row.trailing_zeros() as usize;
            row &= row - 1;
            if color[v] == u8::MAX {
                color[v] = 1 - color[u];
                stack.push(v);
            }
        }
    }
    color
}

/// All connected bipartite graphs on `n` vertices up to isomorphism.
///
/// Every connected graph has a vertex whose removal keeps it connected, so
/// each class arises from a smaller one by adding a vertex joined to a
/// nonempty subset of one color class.
pub fn connected_bipartite_graphs(n: usize) -> Vec<Edges> {
    if n == 0 {
        return Vec::new();
    }
    let mut level: Vec<Vec<u32>> = vec![vec![0]];
    for size in 1..n {
        let mut next: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for adj in &level {
            let color = two_color(size, adj);
            for side in 0..2u8 {
                let pool: Vec<usize> = (0..size).filter(|&v| color[v] == side).collect();
                for mask in 1u32..1 << pool.len() {
                    let mut grown = adj.clone();
                    grown.push(0);
                    for (i, &v) in pool.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            grown[v] |= 1 << size;
                            grown[size] |= 1 << v;
                        }
                    }
                    next.entry(graph_code(size + 1, &grown)).or_insert(grown);
                }
            }
        }
        level = next.into_values().collect();
    }
    level
        .into_iter()
        .map(|adj| {
            let mut e = Vec::new();
            for (u, &row) in adj.iter().enumerate() {
                for v in u + 1..n {
                    if row >> v & 1 == 1 {
                        e.push((u as Vertex, v as Vertex));
                    }
                }
            }
            e
        })
        .collect()
}

/// Connected bipartite graphs on up to `max_n` vertices, every start, every
/// set of `lo..=hi` customers away from the start.
pub fn bipartite_sweep_instances(max_n: usize, lo: usize, hi: usize) -> Vec<Instance> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for edges in connected_bipartite_graphs(n) {
            let g = Graph::from_edges(n, false, &edges).expect("edges in range");
            for start in 0..n as Vertex {
                let pool: Vec<Vertex> = (0..n as Vertex).filter(|&v| v != start).collect();
                for cs in subsets_between(&pool, lo, hi) {
                    out.push(Instance::same_start(g.clone(), cs, start));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_tree_counts() {
        // OEIS A000055
        let counts: Vec<usize> = (1..=9).map(|n| free_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23, 47]);
    }

    #[test]
    fn connected_bipartite_counts() {
        // OEIS A005142
        let counts: Vec<usize> = (1..=7).map(|n| connected_bipartite_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 3, 5, 17, 44]);
    }

    #[test]
    fn enumerated_graphs_have_their_family_shape() {
        for e in connected_bipartite_graphs(6) {
            let g = Graph::from_edges(6, false, &e).unwrap();
            assert!(g.is_connected() && g.is_bipartite());
        }
        for e in free_trees(8) {
            let g = Graph::from_edges(8, false, &e).unwrap();
            assert!(g.is_connected() && e.len() == 7);
        }
    }
}
