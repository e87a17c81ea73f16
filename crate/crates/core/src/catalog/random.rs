use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{gen_star, CatalogError};
use crate::model::{Graph, Instance, Vertex, MAX_TRACKED_CUSTOMERS};

/// Seeded instance families for property sweeps. All use one shared start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum RandomFamily {
    /// Uniform labelled tree (Prüfer code); customers on leaves when `leaf_customers`.
    Tree { vertices: usize, leaf_customers: bool },
    /// Star with 2..=`max_rays` rays of length 1..=`max_len`, customers on tips.
    Star { max_rays: usize, max_len: usize },
    /// Connected bipartite graph: a color-respecting spanning tree plus cross edges.
    Bipartite { vertices: usize, extra_edges: usize },
    /// Connected graph: a random recursive tree plus arbitrary extra edges.
    General { vertices: usize, extra_edges: usize },
}

fn invalid(msg: impl Into<String>) -> CatalogError {
    CatalogError::InvalidParameters(msg.into())
}

fn prufer_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(Vertex, Vertex)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf remains");
        edges.push((leaf as Vertex, c as Vertex));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0] as Vertex, rest[1] as Vertex));
    edges
}

fn add_extra(
    n: usize,
    edges: &mut Vec<(Vertex, Vertex)>,
    extra: usize,
    rng: &mut ChaCha8Rng,
    allowed: impl Fn(usize, usize) -> bool,
) {
    let mut present: std::collections::HashSet<(usize, usize)> =
        edges.iter().map(|&(u, v)| (u.min(v) as usize, u.max(v) as usize)).collect();
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| allowed(u, v) && !present.contains(&(u, v)))
        .collect();
    for &(u, v) in free.choose_multiple(rng, extra) {
        present.insert((u, v));
        edges.push((u as Vertex, v as Vertex));
    }
}

/// Picks the start and the customers among `pool` minus the start.
fn place(
    g: Graph,
    pool: &[Vertex],
    customers: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Instance, CatalogError> {
    let n = g.vertex_count() as Vertex;
    let start = rng.gen_range(0..n);
    let candidates: Vec<Vertex> = pool.iter().copied().filter(|&v| v != start).collect();
    if candidates.len() < customers {
        return Err(invalid(format!("{customers} customers requested, {} places available", candidates.len())));
    }
    let chosen: Vec<Vertex> = candidates.choose_multiple(rng, customers).copied().collect();
    Ok(Instance::same_start(g, chosen, start))
}

pub fn gen_random(family: RandomFamily, customers: usize, seed: u64) -> Result<Instance, CatalogError> {
    if customers > MAX_TRACKED_CUSTOMERS {
        return Err(invalid(format!("at most {MAX_TRACKED_CUSTOMERS} customers")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        RandomFamily::Tree { vertices, leaf_customers } => {
            if vertices < 2 {
                return Err(invalid("a tree needs at least 2 vertices"));
            }
            // resample until enough leaves stay free of the start
            if leaf_customers && customers > vertices - 1 {
                return Err(invalid(format!("a {vertices}-vertex tree has too few leaves for {customers} customers")));
            }
            for _ in 0..10_000 {
                let edges = prufer_tree(vertices, &mut rng);
                let g = Graph::from_edges(vertices, false, &edges).expect("tree edges in range");
                let pool: Vec<Vertex> = (0..vertices as Vertex)
                    .filter(|&v| !leaf_customers || g.neighbors(v).len() == 1)
                    .collect();
                if !leaf_customers {
                    return place(g, &pool, customers, &mut rng);
                }
                let inner: Vec<Vertex> = (0..vertices as Vertex).filter(|v| !pool.contains(v)).collect();
                if pool.len() > customers || (pool.len() == customers && !inner.is_empty()) {
                    // start off the chosen leaves
                    let start = if inner.is_empty() || (pool.len() > customers && rng.gen_bool(0.5)) {
                        pool[rng.gen_range(0..pool.len())]
                    } else {
                        inner[rng.gen_range(0..inner.len())]
                    };
                    let cands: Vec<Vertex> = pool.iter().copied().filter(|&v| v != start).collect();
                    let chosen: Vec<Vertex> = cands.choose_multiple(&mut rng, customers).copied().collect();
                    return Ok(Instance::same_start(g, chosen, start));
                }
            }
            Err(invalid(format!("no {vertices}-vertex tree with {customers} free leaves found")))
        }
        RandomFamily::Star { max_rays, max_len } => random_star(&mut rng, max_rays, max_len, customers),
        RandomFamily::Bipartite { vertices, extra_edges } => {
            if vertices < 2 {
                return Err(invalid("a bipartite graph needs at least 2 vertices"));
            }
            let mut color = vec![0u8, 1];
            color.extend((2..vertices).map(|_| rng.gen_range(0..2u8)));
            let mut edges = Vec::new();
            for v in 1..vertices {
                let other: Vec<usize> = (0..v).filter(|&u| color[u] != color[v]).collect();
                let u = *other.choose(&mut rng).expect("vertices 0 and 1 differ in color");
                edges.push((u as Vertex, v as Vertex));
            }
            add_extra(vertices, &mut edges, extra_edges, &mut rng, |u, v| color[u] != color[v]);
            let g = Graph::from_edges(vertices, false, &edges).expect("edges in range");
            let pool: Vec<Vertex> = (0..vertices as Vertex).collect();
            place(g, &pool, customers, &mut rng)
        }
        RandomFamily::General { vertices, extra_edges } => {
            if vertices < 2 {
                return Err(invalid("a graph needs at least 2 vertices"));
            }
            let mut edges: Vec<(Vertex, Vertex)> = (1..vertices)
                .map(|v| (rng.gen_range(0..v) as Vertex, v as Vertex))
                .collect();
            add_extra(vertices, &mut edges, extra_edges, &mut rng, |_, _| true);
            let g = Graph::from_edges(vertices, false, &edges).expect("edges in range");
            let pool: Vec<Vertex> = (0..vertices as Vertex).collect();
            place(g, &pool, customers, &mut rng)
        }
    }
}

/// Star with customers on `customers` distinct ray tips.
pub fn random_star(
    rng: &mut ChaCha8Rng,
    max_rays: usize,
    max_len: usize,
    customers: usize,
) -> Result<Instance, CatalogError> {
    let lo = customers.max(2);
    if max_rays < lo || max_len == 0 {
        return Err(invalid(format!("{customers} tip customers need at least {lo} rays of positive length")));
    }
    let rays = rng.gen_range(lo..=max_rays);
    let lengths: Vec<u32> = (0..rays).map(|_| rng.gen_range(1..=max_len as u32)).collect();
    let mut which: Vec<usize> = (0..rays).collect();
    which.shuffle(rng);
    which.truncate(customers);
    let spec: Vec<(u32, Vec<u32>)> = lengths
        .iter()
        .enumerate()
        .map(|(r, &len)| (len, if which.contains(&r) { vec![len] } else { Vec::new() }))
        .collect();
    gen_star(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree_like(inst: &Instance) -> bool {
        let g = inst.graph();
        g.is_connected() && g.edge_count() + 1 == g.vertex_count()
    }

    #[test]
    fn tree_family() {
        let inst = gen_random(RandomFamily::Tree { vertices: 13, leaf_customers: true }, 6, 7).unwrap();
        assert!(tree_like(&inst));
        assert_eq!(inst.customer_count(), 6);
        assert!(inst.customers().iter().all(|&c| inst.graph().neighbors(c).len() == 1));
        assert!(!inst.is_customer(inst.starts(crate::model::Player::I)[0]));
    }

    #[test]
    fn bipartite_family() {
        let inst = gen_random(RandomFamily::Bipartite { vertices: 12, extra_edges: 6 }, 6, 1).unwrap();
        assert!(inst.graph().is_bipartite());
        assert!(inst.graph().is_connected());
        assert_eq!(inst.graph().edge_count(), 17);
    }

    #[test]
    fn star_and_general_families() {
        for seed in 0..20 {
            let inst = gen_random(RandomFamily::Star { max_rays: 6, max_len: 4 }, 3, seed).unwrap();
            let g = inst.graph();
            assert!(tree_like(&inst));
            assert!((1..g.vertex_count() as Vertex).all(|v| g.neighbors(v).len() <= 2));
            let inst = gen_random(RandomFamily::General { vertices: 9, extra_edges: 4 }, 3, seed).unwrap();
            assert!(inst.graph().is_connected());
        }
    }

    #[test]
    fn seeds_reproduce() {
        let f = RandomFamily::General { vertices: 10, extra_edges: 5 };
        assert_eq!(gen_random(f, 4, 3).unwrap(), gen_random(f, 4, 3).unwrap());
        assert_ne!(gen_random(f, 4, 3).unwrap(), gen_random(f, 4, 4).unwrap());
    }

    #[test]
    fn infeasible_requests_fail() {
        assert!(gen_random(RandomFamily::Tree { vertices: 3, leaf_customers: true }, 3, 0).is_err());
        assert!(gen_random(RandomFamily::Star { max_rays: 2, max_len: 2 }, 3, 0).is_err());
    }
}
