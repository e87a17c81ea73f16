//! Property sweeps over instance corpora. Each suite either passes or
//! reports the first failing instance so it can be replayed.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::catalog::{
    bipartite_sweep_instances, catalog, catalog_gaps, gen_random, tree_sweep_instances, verify_entry, RandomFamily,
};
use crate::model::{Instance, Outcome, Player};
use crate::reduction::{build_reduction, pad_formula, parse_q3sat, verify_reduction};
use crate::solver::{oracle_value, solve, solve_value};
use crate::strategy::{best_response, play, StrategyKind, DEFAULT_PLY_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    BipartiteNoLoss,
    TreeMargin,
    StarGreedy,
    Stealing,
    Catalog,
    ReductionAudit,
    Conjecture,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::BipartiteNoLoss,
        Suite::TreeMargin,
        Suite::StarGreedy,
        Suite::Stealing,
        Suite::Catalog,
        Suite::ReductionAudit,
        Suite::Conjecture,
        Suite::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BipartiteNoLoss => "bipartite-no-loss",
            Suite::TreeMargin => "tree-margin",
            Suite::StarGreedy => "star-greedy",
            Suite::Stealing => "stealing",
            Suite::Catalog => "catalog",
            Suite::ReductionAudit => "reduction-audit",
            Suite::Conjecture => "conjecture",
            Suite::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

/// How independent instance checks are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    /// rayon when the `parallel` feature is on, otherwise sequential.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Largest exhaustive graph; suite default when `None`.
    pub max_n: Option<usize>,
    pub seed: u64,
    pub budget: usize,
    /// Random instances per suite; suite default when `None`.
    pub samples: Option<usize>,
    pub exec: Exec,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            max_n: None,
            seed: 0,
            budget: crate::solver::DEFAULT_BUDGET,
            samples: None,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub detail: String,
    /// The offending instance, when there is one.
    pub instance: Option<Instance>,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checked: usize,
    pub failure: Option<Failure>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// First item (in corpus order) whose check fails, with the failure text.
pub fn first_failure<T, F>(items: &[T], exec: Exec, check: F) -> Option<(usize, String)>
where
    T: Sync,
    F: Fn(&T) -> Result<(), String> + Sync,
{
    let probe = |(i, it): (usize, &T)| check(it).err().map(|e| (i, e));
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().enumerate().find_map_first(probe),
        _ => items.iter().enumerate().find_map(probe),
    }
}

fn map_all<T, R, F>(items: &[T], exec: Exec, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

fn rank(o: Outcome, inst: &Instance) -> i32 {
    o.rank(inst.draw_rank())
}

/// Exhaustive connected bipartite graphs up to `max_n` vertices with 2..=4
/// customers, then `samples` seeded random bipartite graphs up to 12 vertices.
pub fn bipartite_corpus(max_n: usize, seed: u64, samples: usize) -> Vec<Instance> {
    let mut out = bipartite_sweep_instances(max_n, 2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let vertices = rng.gen_range(5..=12);
        let extra = rng.gen_range(0..=vertices);
        let customers = rng.gen_range(2..=4);
        let family = RandomFamily::Bipartite { vertices, extra_edges: extra };
        out.push(gen_random(family, customers, rng.gen()).expect("feasible bipartite parameters"));
    }
    out
}

/// Exhaustive trees up to `max_n` vertices with 2..=4 leaf customers, then
/// `samples` random trees up to 13 vertices.
pub fn tree_corpus(max_n: usize, seed: u64, samples: usize) -> Vec<Instance> {
    let mut out = tree_sweep_instances(max_n, 2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = out.len() + samples;
    while out.len() < target {
        let vertices = rng.gen_range(5..=13);
        let customers = rng.gen_range(2..=4);
        let family = RandomFamily::Tree { vertices, leaf_customers: true };
        if let Ok(inst) = gen_random(family, customers, rng.gen()) {
            out.push(inst);
        }
    }
    out
}

/// Random stars with at most 6 rays of length at most 4, customers on tips.
pub fn star_corpus(seed: u64, samples: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let customers = rng.gen_range(1..=6);
            let family = RandomFamily::Star { max_rays: 6, max_len: 4 };
            gen_random(family, customers, rng.gen()).expect("feasible star parameters")
        })
        .collect()
}

/// Small random instances of every family for solver/oracle comparison.
pub fn oracle_corpus(seed: u64, samples: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|i| {
            let vertices = rng.gen_range(3..=8);
            let customers = rng.gen_range(1..vertices.min(6));
            let family = match i % 4 {
                0 => RandomFamily::Tree { vertices, leaf_customers: false },
                1 => RandomFamily::Star { max_rays: 4, max_len: 3 },
                2 => RandomFamily::Bipartite { vertices, extra_edges: vertices / 2 },
                _ => RandomFamily::General { vertices, extra_edges: vertices / 2 },
            };
            let customers = if i % 4 == 1 { customers.min(4) } else { customers };
            gen_random(family, customers, rng.gen()).expect("feasible parameters")
        })
        .collect()
}

/// The two padded formulas behind the reduction audit: (1,1) pads to
/// (4,3) and (3,3) pads to (6,5).
pub fn audit_formulas() -> Vec<&'static str> {
    vec![
        "p q3cnf 1 1\nq e\n1 -1 1 0\n",
        "p q3cnf 3 3\nq e a e\n1 2 3 0\n-1 -2 -3 0\n1 -2 3 0\n",
    ]
}

fn counterexample(items: &[Instance], hit: Option<(usize, String)>) -> Option<Failure> {
    hit.map(|(i, detail)| Failure {
        detail,
        instance: Some(items[i].clone()),
    })
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> SuiteReport {
    let t = Instant::now();
    let budget = cfg.budget;
    let mut notes = Vec::new();
    let (checked, failure) = match suite {
        Suite::BipartiteNoLoss => {
            let items = bipartite_corpus(cfg.max_n.unwrap_or(7), cfg.seed, cfg.samples.unwrap_or(200));
            let hit = first_failure(&items, cfg.exec, |inst| {
                let v = solve_value(inst, budget).map_err(|e| e.to_string())?;
                if rank(v, inst) >= rank(Outcome::Draw, inst) {
                    Ok(())
                } else {
                    Err(format!("I loses: value {v}"))
                }
            });
            (items.len(), counterexample(&items, hit))
        }
        Suite::TreeMargin => {
            let items = tree_corpus(cfg.max_n.unwrap_or(9), cfg.seed, cfg.samples.unwrap_or(500));
            let hit = first_failure(&items, cfg.exec, |inst| {
                let v = solve_value(inst, budget).map_err(|e| e.to_string())?;
                if rank(v, inst) <= rank(Outcome::Ended(1), inst) {
                    Ok(())
                } else {
                    Err(format!("II loses by more than one: value {v}"))
                }
            });
            (items.len(), counterexample(&items, hit))
        }
        Suite::StarGreedy => {
            let items = star_corpus(cfg.seed, cfg.samples.unwrap_or(200));
            let hit = first_failure(&items, cfg.exec, |inst| star_greedy_check(inst, budget));
            (items.len(), counterexample(&items, hit))
        }
        Suite::Stealing => {
            let items = bipartite_corpus(cfg.max_n.unwrap_or(7), cfg.seed, cfg.samples.unwrap_or(200));
            let inner = stealing_strategies(cfg.seed);
            let rows = map_all(&items, cfg.exec, |inst| stealing_losses(inst, &inner, budget));
            let mut losses = vec![0usize; inner.len()];
            let mut hit = None;
            for (i, row) in rows.into_iter().enumerate() {
                match row {
                    Ok(lost) => {
                        for (j, detail) in lost.into_iter().enumerate() {
                            if let Some(d) = detail {
                                losses[j] += 1;
                                hit.get_or_insert((i, d));
                            }
                        }
                    }
                    Err(e) => {
                        hit.get_or_insert((i, e));
                    }
                }
            }
            for (s, n) in inner.iter().zip(&losses) {
                notes.push(format!("stolen:{s} lost to {s} on {n} of {} instances", items.len()));
            }
            (items.len() * inner.len(), counterexample(&items, hit))
        }
        Suite::Catalog => {
            let entries = catalog();
            let hit = first_failure(&entries, cfg.exec, |e| match verify_entry(e, budget) {
                Ok(true) => Ok(()),
                Ok(false) => Err(format!("{} does not certify", e.name)),
                Err(err) => Err(format!("{}: {err}", e.name)),
            });
            let mut failure = hit.map(|(i, detail)| Failure {
                detail,
                instance: Some(entries[i].instance.clone()),
            });
            for (name, why) in catalog_gaps() {
                notes.push(format!("{name} not shipped: {why}"));
                failure.get_or_insert(Failure {
                    detail: format!("{name} has no certified witness"),
                    instance: None,
                });
            }
            (entries.len(), failure)
        }
        Suite::ReductionAudit => {
            let mut failure = None;
            let formulas = audit_formulas();
            for text in &formulas {
                let f = pad_formula(&parse_q3sat(text).expect("shipped formula parses"));
                let report = match build_reduction(&f, true) {
                    Ok(art) => verify_reduction(&art),
                    Err(e) => {
                        failure.get_or_insert(Failure { detail: e.to_string(), instance: None });
                        continue;
                    }
                };
                if let Some(c) = report.check("vertex_count_closed_form") {
                    notes.push(format!("n={} m={}: |V| delta vs closed form {:?}", report.n, report.m, c.delta()));
                }
                if !report.passed() {
                    failure.get_or_insert(Failure {
                        detail: format!("audit failed\n{report}"),
                        instance: None,
                    });
                }
            }
            (formulas.len(), failure)
        }
        Suite::Conjecture => {
            let items = tree_sweep_instances(cfg.max_n.unwrap_or(9), 2, 4);
            let draws = map_all(&items, cfg.exec, |inst| solve_value(inst, budget).map(|v| v == Outcome::Draw));
            let mut failure = None;
            let mut found = 0;
            for (inst, d) in items.iter().zip(&draws) {
                match d {
                    Ok(true) => {
                        found += 1;
                        if found <= 3 {
                            notes.push(format!("draw: {}", crate::format::to_json(inst)));
                        }
                    }
                    Ok(false) => {}
                    Err(e) => {
                        failure.get_or_insert(Failure {
                            detail: e.to_string(),
                            instance: Some(inst.clone()),
                        });
                    }
                }
            }
            notes.push(format!("{found} tree instances with value Draw"));
            (items.len(), failure)
        }
        Suite::Oracle => {
            let mut items: Vec<Instance> = catalog().into_iter().map(|e| e.instance).collect();
            items.extend(oracle_corpus(cfg.seed, cfg.samples.unwrap_or(100)));
            let hit = first_failure(&items, cfg.exec, |inst| {
                let fast = solve_value(inst, budget).map_err(|e| e.to_string())?;
                let slow = oracle_value(inst, budget).map_err(|e| e.to_string())?;
                if fast == slow {
                    Ok(())
                } else {
                    Err(format!("solver {fast}, oracle {slow}"))
                }
            });
            (items.len(), counterexample(&items, hit))
        }
    };
    SuiteReport {
        suite,
        checked,
        failure,
        notes,
        elapsed: t.elapsed(),
    }
}

/// Greedy vs Greedy realizes the value, and neither side gains by deviating
/// against a Greedy opponent.
pub fn star_greedy_check(inst: &Instance, budget: usize) -> Result<(), String> {
    let v = solve(inst, budget).map_err(|e| e.to_string())?.value();
    let shared = Arc::new(inst.clone());
    let rec = play(&shared, &StrategyKind::Greedy, &StrategyKind::Greedy, budget, DEFAULT_PLY_CAP)
        .map_err(|e| e.to_string())?;
    if rec.outcome != v {
        return Err(format!("greedy match {} but value {v}", rec.outcome));
    }
    let vs_i = best_response(inst, &StrategyKind::Greedy, Player::I, budget).map_err(|e| e.to_string())?;
    if rank(vs_i, inst) < rank(v, inst) {
        return Err(format!("II improves on greedy I: {vs_i} vs value {v}"));
    }
    let vs_ii = best_response(inst, &StrategyKind::Greedy, Player::II, budget).map_err(|e| e.to_string())?;
    if rank(vs_ii, inst) > rank(v, inst) {
        return Err(format!("I improves on greedy II: {vs_ii} vs value {v}"));
    }
    Ok(())
}

/// Greedy, three seeded random players, and Optimal.
pub fn stealing_strategies(seed: u64) -> Vec<StrategyKind> {
    vec![
        StrategyKind::Greedy,
        StrategyKind::Random(seed),
        StrategyKind::Random(seed + 1),
        StrategyKind::Random(seed + 2),
        StrategyKind::Optimal,
    ]
}

/// For each inner `S`, the loss (if any) of `Stolen(S)` as I against `S` as II.
pub fn stealing_losses(inst: &Instance, inner: &[StrategyKind], budget: usize) -> Result<Vec<Option<String>>, String> {
    let shared = Arc::new(inst.clone());
    inner
        .iter()
        .map(|s| {
            let thief = StrategyKind::Stolen(Box::new(s.clone()));
            let rec = play(&shared, &thief, s, budget, DEFAULT_PLY_CAP).map_err(|e| e.to_string())?;
            Ok(rec.outcome.is_loss_for_i().then(|| format!("{thief} lost to {s}: {}", rec.outcome)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn first_failure_is_in_corpus_order() {
        let items: Vec<u32> = (0..1000).collect();
        for exec in [Exec::Parallel, Exec::Sequential] {
            let hit = first_failure(&items, exec, |&x| if x % 97 == 50 { Err(x.to_string()) } else { Ok(()) });
            assert_eq!(hit, Some((50, "50".to_string())));
        }
    }

    #[test]
    fn small_suites_pass() {
        let cfg = SuiteConfig {
            max_n: Some(5),
            samples: Some(10),
            ..SuiteConfig::default()
        };
        for s in [Suite::BipartiteNoLoss, Suite::TreeMargin, Suite::StarGreedy, Suite::Conjecture] {
            let r = run_suite(s, &cfg);
            assert!(r.passed(), "{s}: {:?}", r.failure);
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn stealing_counts_losses_per_inner_strategy() {
        let cfg = SuiteConfig {
            max_n: Some(4),
            samples: Some(0),
            ..SuiteConfig::default()
        };
        let r = run_suite(Suite::Stealing, &cfg);
        assert_eq!(r.notes.len(), stealing_strategies(0).len());
        let lossy = r.notes.iter().any(|n| !n.contains(" on 0 of "));
        assert_eq!(lossy, !r.passed());
    }
}
