use std::fmt;

use serde::Serialize;

use crate::model::Vertex;
use crate::reduction::{Clamp, Label, Part, ReductionArtifact};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CheckKind {
    Count { enumerated: i64, formula: i64 },
    Property(bool),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditCheck {
    pub name: &'static str,
    pub kind: CheckKind,
    /// Informational checks report a known discrepancy without failing the audit.
    pub asserted: bool,
}

impl AuditCheck {
    pub fn passed(&self) -> bool {
        match self.kind {
            CheckKind::Count { enumerated, formula } => enumerated == formula,
            CheckKind::Property(holds) => holds,
        }
    }

    /// Enumerated minus closed form.
    pub fn delta(&self) -> Option<i64> {
        match self.kind {
            CheckKind::Count { enumerated, formula } => Some(enumerated - formula),
            CheckKind::Property(_) => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub m: usize,
    pub b: usize,
    pub checks: Vec<AuditCheck>,
    /// Dropped edges rendered as `family: from -- to`.
    pub clamps: Vec<String>,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Every asserted check holds.
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.asserted).all(AuditCheck::passed)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "reduction audit n={} m={} B={}", self.n, self.m, self.b)?;
        for c in &self.checks {
            let status = match (c.passed(), c.asserted) {
                (true, _) => "ok",
                (false, true) => "FAIL",
                (false, false) => "delta",
            };
            match c.kind {
                CheckKind::Count { enumerated, formula } => writeln!(
                    f,
                    "  {status:5} {:28} enumerated={enumerated} formula={formula} delta={}",
                    c.name,
                    enumerated - formula
                )?,
                CheckKind::Property(holds) => writeln!(f, "  {status:5} {:28} holds={holds}", c.name)?,
            }
        }
        for c in &self.clamps {
            writeln!(f, "  clamp {c}")?;
        }
        for n in &self.notes {
            writeln!(f, "  note  {n}")?;
        }
        Ok(())
    }
}

fn count(name: &'static str, enumerated: usize, formula: i64, asserted: bool) -> AuditCheck {
    AuditCheck {
        name,
        kind: CheckKind::Count {
            enumerated: enumerated as i64,
            formula,
        },
        asserted,
    }
}

fn property(name: &'static str, holds: bool) -> AuditCheck {
    AuditCheck {
        name,
        kind: CheckKind::Property(holds),
        asserted: true,
    }
}

/// Compares the built artifact with the closed-form counts and structural claims.
pub fn verify_reduction(art: &ReductionArtifact) -> AuditReport {
    let n = art.n as i64;
    let m = art.m as i64;
    let pre = &art.pre_subdivision;
    let pre_count = pre.graph().vertex_count();
    let originals = &art.labels[..pre_count];
    let is_customer = |v: usize| pre.is_customer(v as Vertex);
    let mut checks = Vec::new();

    checks.push(count("b_half_n_squared", art.b, n * n / 2, true));
    checks.push(count(
        "vertex_count_closed_form",
        pre_count,
        2 * n.pow(4) + 3 * m * n * n / 2 + 3 * n * n - 3 * m * n + 12 * m + 3 * n - 4,
        false,
    ));
    // the same family sizes summed with n^3 for the extra q chain and -2 for the constants
    checks.push(count(
        "vertex_count_family_sum",
        pre_count,
        2 * n.pow(4) + n.pow(3) + 3 * n * n + 3 * m * n * n / 2 - 3 * m * n + 12 * m + 3 * n - 2,
        true,
    ));
    let customers = pre.customer_count();
    checks.push(count("customers", customers, 3 * n * n + 10 * m + 3 * n - 5, true));
    let in_part = |want: Part| {
        (0..pre_count)
            .filter(|&v| is_customer(v) && art.parts[v] == want)
            .count()
    };
    checks.push(count("cache_customers", in_part(Part::Cache), 5 * m + n - 6, true));
    checks.push(count("main_customers", in_part(Part::Main), 3 * n * n + 5 * m + 2 * n + 1, true));
    let literal_cache = (0..pre_count)
        .filter(|&v| is_customer(v) && matches!(originals[v], Label::D(_) | Label::Q(..)))
        .count();
    checks.push(count("cache_customers_with_d0", literal_cache, 5 * m + n - 6, false));
    checks.push(count(
        "majority_threshold",
        customers / 2 + 1,
        3 * n * n / 2 + 5 * m + 3 * n / 2 - 2,
        true,
    ));

    let parts_ok = originals.iter().zip(&art.parts).all(|(l, p)| {
        let cache = matches!(l, Label::Q(..)) || matches!(l, Label::D(i) if *i >= 1);
        (*p == Part::Cache) == cache
    });
    checks.push(property("cache_part_is_q_and_d", parts_ok));
    checks.push(property("feedback_paths_b_minus_n", feedback_paths_ok(art)));
    checks.push(property("ladder_rungs", ladder_ok(art)));

    let g = art.instance.graph();
    let v_i = art.id(Label::VI).expect("v_I");
    let v_ii = art.id(Label::VII).expect("v_II");
    let want_dist = if art.subdivided { 2 } else { 1 };
    checks.push(property("start_distance", g.bfs(v_i)[v_ii as usize] == Some(want_dist)));
    if art.subdivided {
        checks.push(property("subdivided_bipartite", g.is_bipartite()));
        let doubled = [v_i, v_ii].iter().all(|&s| {
            let before = pre.graph().bfs(s);
            let after = g.bfs(s);
            (0..pre_count).all(|v| before[v].map(|d| 2 * d) == after[v])
        });
        checks.push(property("subdivision_doubles_distances", doubled));
    }

    let mut notes = vec![
        "d_0 is counted with the main part; the cache customers are d_1 onwards".to_string(),
        "threshold read as floor(|V_C| / 2) + 1".to_string(),
    ];
    if let Some(c) = checks.iter().find(|c| c.name == "vertex_count_closed_form") {
        notes.push(format!(
            "closed-form |V| delta {} = n^3 + 2 ({}): the q family holds (2n+1)n^3 vertices and the listed constants sum to -2",
            c.delta().unwrap_or(0),
            n.pow(3) + 2
        ));
    }
    AuditReport {
        n: art.n,
        m: art.m,
        b: art.b,
        checks,
        clamps: art.clamps.iter().map(render_clamp).collect(),
        notes,
    }
}

fn render_clamp(c: &Clamp) -> String {
    format!("{}: {} -- {}", c.family, c.from, c.to)
}

/// Every `p^k_j` chain has `B - n` vertices joining `y_j^k` to literal `k` of clause `j`.
fn feedback_paths_ok(art: &ReductionArtifact) -> bool {
    let g = art.pre_subdivision.graph();
    let len = art.b as i32 - art.n as i32;
    let id = |l| art.id(l);
    for (j, clause) in art.formula.clauses.iter().enumerate() {
        let j = j as i32 + 1;
        for (k, &lit) in clause.iter().enumerate() {
            let k = k as i32 + 1;
            let chain: Vec<Vertex> = (1..).map_while(|h| id(Label::P(k, j, h))).collect();
            if chain.len() as i32 != len {
                return false;
            }
            if len == 0 {
                continue;
            }
            let target = if lit > 0 { Label::X(lit) } else { Label::XBar(-lit) };
            let ends = [id(Label::Y(j, k)), Some(chain[0])];
            if !g.has_edge(ends[0].unwrap(), ends[1].unwrap()) {
                return false;
            }
            if !chain.windows(2).all(|w| g.has_edge(w[0], w[1])) {
                return false;
            }
            if !g.has_edge(*chain.last().unwrap(), id(target).unwrap()) {
                return false;
            }
        }
    }
    true
}

/// Ladder edges join consecutive `h`; rungs join ladders `2i+1` and `2i+2` at equal `h`
/// and nothing else joins two ladders.
fn ladder_ok(art: &ReductionArtifact) -> bool {
    let g = art.pre_subdivision.graph();
    let n = art.n as i32;
    let mut rung_seen = 0usize;
    for (u, v) in g.edges() {
        let (Label::U(i1, h1), Label::U(i2, h2)) = (art.labels[u as usize], art.labels[v as usize]) else {
            continue;
        };
        let (lo, hi) = if i1 <= i2 { (i1, i2) } else { (i2, i1) };
        let ladder = i1 == i2 && (h1 - h2).abs() == 1;
        let rung = h1 == h2 && hi == lo + 1 && lo.rem_euclid(2) == 1;
        if !(ladder || rung) {
            return false;
        }
        if rung {
            rung_seen += 1;
        }
    }
    // pairs (-1,0), (1,2), ..., (n-1,n); each spans the shorter of its two ladders
    let len = |i: i32| if i <= n - 2 { 2 * n } else { n * n / 2 };
    let expected: i32 = (-1..=n / 2 - 1).map(|i| len(2 * i + 1).min(len(2 * i + 2))).sum();
    rung_seen == expected as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{build_reduction, pad_formula, parse_q3sat};

    #[test]
    fn four_three_audit() {
        let f = pad_formula(&parse_q3sat("p q3cnf 1 1\nq e\n1 -1 1 0\n").unwrap());
        let art = build_reduction(&f, true).unwrap();
        let r = verify_reduction(&art);
        assert!(r.passed(), "{r}");
        assert_eq!(r.check("customers").unwrap().kind, CheckKind::Count { enumerated: 85, formula: 85 });
        assert_eq!(r.check("cache_customers").unwrap().delta(), Some(0));
        assert_eq!(r.check("vertex_count_closed_form").unwrap().delta(), Some(66));
        assert_eq!(r.check("cache_customers_with_d0").unwrap().delta(), Some(1));
        assert_eq!(r.b, 8);
    }

    #[test]
    fn six_five_and_two_variable_audits() {
        let f = pad_formula(&parse_q3sat("p q3cnf 3 3\nq e a e\n1 2 3 0\n-1 -2 -3 0\n1 -2 3 0\n").unwrap());
        assert_eq!((f.n(), f.m()), (6, 5));
        let r = verify_reduction(&build_reduction(&f, true).unwrap());
        assert!(r.passed(), "{r}");
        assert_eq!(r.check("vertex_count_closed_form").unwrap().delta(), Some(218));
        // B - n = 0: feedback paths are empty and their end edges dangle
        let f = parse_q3sat("p q3cnf 2 1\nq e a\n1 -1 2 0\n").unwrap();
        let art = build_reduction(&f, true).unwrap();
        let r = verify_reduction(&art);
        assert!(r.passed(), "{r}");
        assert!(art.clamps.iter().any(|c| c.family == "feedback"));
    }
}
