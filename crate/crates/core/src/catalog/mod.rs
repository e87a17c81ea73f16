//! Certified instances, random families and exhaustive enumerations.

mod enumerate;
mod figures;
mod random;

use serde::Serialize;
use thiserror::Error;

pub use enumerate::{bipartite_sweep_instances, connected_bipartite_graphs, free_trees, tree_sweep_instances};
pub use figures::*;
pub use random::{gen_random, random_star, RandomFamily};

use crate::error::{ModelError, SolveError, StrategyError};
use crate::model::{Instance, Outcome};
use crate::solver::solve_value;
use crate::strategy::{play, EndReason, StrategyKind, DEFAULT_PLY_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("no certified witness: {0}")]
    SearchExhausted(String),
    #[error("unknown catalog entry {0:?}")]
    UnknownEntry(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// What a shipped entry is certified to satisfy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Certificate {
    /// The solver value equals this outcome.
    Value { outcome: String },
    /// I loses by at least one with optimal play, plus the narrative's move checks.
    Zugzwang,
    /// Draw value, repetition in optimal play, and the leaving player loses.
    DrawGame,
    /// Ended(+1), and every first step onto a near ray loses.
    TrailingTree,
    /// II's best response beats every a-priori ordering class.
    AprioriLoses { classes: usize },
    /// I wins, but single-ray and greedy play lose to a best response.
    StarExercise,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub params: String,
    #[serde(skip)]
    pub instance: Instance,
    pub certificate: Certificate,
    pub note: String,
}

fn entry(name: &str, params: String, instance: Instance, certificate: Certificate, note: &str) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        params,
        instance,
        certificate,
        note: note.to_string(),
    }
}

/// Every shipped entry.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    for n in [3, 5, 7, 9] {
        out.push(entry(
            &format!("wheel-{n}"),
            format!("n={n}"),
            gen_wheel(n).expect("odd wheel"),
            Certificate::Value {
                outcome: Outcome::Ended(2 - n as i32).to_string(),
            },
            "directed wheel, II answers spoke i with spoke i+2",
        ));
    }
    out.push(entry(
        "zugzwang",
        format!("extra={ZUGZWANG_EXTRA:?}"),
        gen_zugzwang(),
        Certificate::Zugzwang,
        "forced edges v0-v1, v0-v2, v1-v3, v2-v4, customers v3 v6 v8; extra edges by search",
    ));
    if let Ok(inst) = gen_draw_game(crate::solver::DEFAULT_BUDGET) {
        out.push(entry(
            "draw-game",
            "pendant v9 at v0".to_string(),
            inst,
            Certificate::DrawGame,
            "zugzwang graph with pendant v9 = v0' at the start",
        ));
    }
    let (k, d, l, s) = TRAILING_DEFAULT;
    out.push(entry(
        "trailing-tree",
        format!("k={k} d={d} L={l} s={s}"),
        gen_trailing_tree(k, d, l, s).expect("default parameters"),
        Certificate::TrailingTree,
        "k near tips at distance d, k+1 clustered customers from distance L",
    ));
    let (p, q) = APRIORI_DEFAULT;
    out.push(entry(
        "apriori-tree",
        format!("p={p} q={q}"),
        gen_apriori_tree(p, q).expect("default parameters"),
        Certificate::AprioriLoses { classes: 280 },
        "three branches of length p, three leaves at depth q under each",
    ));
    out.push(entry(
        "star-exercise",
        format!("rays={:?}", figure9_rays()),
        gen_star(&figure9_rays()).expect("shipped layout"),
        Certificate::StarExercise,
        "three rays carrying 5, 3 and 3 customers",
    ));
    out
}

/// Entries whose reconstruction found no certified witness, with the reason.
pub fn catalog_gaps() -> Vec<(String, String)> {
    match gen_draw_game(crate::solver::DEFAULT_BUDGET) {
        Ok(_) => Vec::new(),
        Err(e) => vec![("draw-game".to_string(), e.to_string())],
    }
}

pub fn catalog_entry(name: &str) -> Result<CatalogEntry, CatalogError> {
    catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CatalogError::UnknownEntry(name.to_string()))
}

/// Re-checks `entry`'s certificate from scratch.
pub fn verify_entry(entry: &CatalogEntry, budget: usize) -> Result<bool, CatalogError> {
    let inst = &entry.instance;
    match &entry.certificate {
        Certificate::Value { outcome } => Ok(solve_value(inst, budget)?.to_string() == *outcome),
        Certificate::Zugzwang => Ok(inst.graph().vertex_count() <= 9
            && inst.customer_count() == 3
            && zugzwang_certified(inst, budget)?),
        Certificate::DrawGame => {
            if !draw_certified(inst, budget)? {
                return Ok(false);
            }
            let shared = std::sync::Arc::new(inst.clone());
            let rec = play(&shared, &StrategyKind::Optimal, &StrategyKind::Optimal, budget, DEFAULT_PLY_CAP)?;
            Ok(rec.reason == EndReason::RepetitionDraw)
        }
        Certificate::TrailingTree => {
            let (k, d, l, s) = TRAILING_DEFAULT;
            trailing_certified(k, d, l, s, budget)
        }
        Certificate::AprioriLoses { classes } => {
            let results = apriori_results(inst, budget)?;
            Ok(results.len() == *classes && results.iter().all(|(_, o)| o.is_loss_for_i()))
        }
        Certificate::StarExercise => figure9_certified(&figure9_rays(), budget),
    }
}
