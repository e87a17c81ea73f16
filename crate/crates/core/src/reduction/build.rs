use std::fmt;

use rustc_hash::FxHashMap;

use crate::error::ReductionError;
use crate::model::{Graph, Instance, Vertex};
use crate::reduction::QFormula;

/// Structured vertex name. Indices follow the construction's own ranges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    X(i32),
    XBar(i32),
    VI,
    VII,
    U(i32, i32),
    V(i32),
    A(i32),
    B(i32),
    C(i32),
    Y(i32, i32),
    V0,
    /// `P(k, j, h)`: step `h` of the feedback path of literal `k` in clause `j`.
    P(i32, i32, i32),
    Q(i32, i32),
    D(i32),
    /// Midpoint of an original edge, by endpoint ids.
    Sub(Vertex, Vertex),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Label::X(i) => write!(f, "x_{i}"),
            Label::XBar(i) => write!(f, "xbar_{i}"),
            Label::VI => f.write_str("v_I"),
            Label::VII => f.write_str("v_II"),
            Label::U(i, h) => write!(f, "u_{i},{h}"),
            Label::V(j) => write!(f, "v_{j}"),
            Label::A(j) => write!(f, "a_{j}"),
            Label::B(j) => write!(f, "b_{j}"),
            Label::C(j) => write!(f, "c_{j}"),
            Label::Y(j, k) => write!(f, "y_{j}^{k}"),
            Label::V0 => f.write_str("v_0"),
            Label::P(k, j, h) => write!(f, "p^{k}_{j},{h}"),
            Label::Q(i, h) => write!(f, "q_{i},{h}"),
            Label::D(i) => write!(f, "d_{i}"),
            Label::Sub(u, v) => write!(f, "sub({u},{v})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    Main,
    Cache,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::Main => "main",
            Part::Cache => "cache",
        })
    }
}

/// An edge of a listed family that was dropped because an endpoint does not exist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clamp {
    pub family: &'static str,
    pub from: Label,
    pub to: Label,
}

#[derive(Clone, Debug)]
pub struct ReductionArtifact {
    pub formula: QFormula,
    pub n: usize,
    pub m: usize,
    pub b: usize,
    /// Final instance; subdivided when requested.
    pub instance: Instance,
    pub pre_subdivision: Instance,
    pub subdivided: bool,
    /// Labels of `instance`'s vertices; the first ids coincide with `pre_subdivision`.
    pub labels: Vec<Label>,
    pub parts: Vec<Part>,
    pub clamps: Vec<Clamp>,
    ids: FxHashMap<Label, Vertex>,
}

impl ReductionArtifact {
    pub fn id(&self, label: Label) -> Option<Vertex> {
        self.ids.get(&label).copied()
    }

    /// One line per vertex: `<id> <label> <main|cache>`.
    pub fn label_file(&self) -> String {
        let mut out = String::new();
        for (v, (l, p)) in self.labels.iter().zip(&self.parts).enumerate() {
            out.push_str(&format!("{v} {l} {p}\n"));
        }
        out
    }
}

struct Builder {
    labels: Vec<Label>,
    ids: FxHashMap<Label, Vertex>,
    edges: Vec<(Vertex, Vertex)>,
    clamps: Vec<Clamp>,
}

impl Builder {
    fn vertex(&mut self, l: Label) {
        let id = self.labels.len() as Vertex;
        let fresh = self.ids.insert(l, id).is_none();
        debug_assert!(fresh, "duplicate label {l}");
        self.labels.push(l);
    }

    fn edge(&mut self, family: &'static str, a: Label, b: Label) {
        match (self.ids.get(&a), self.ids.get(&b)) {
            (Some(&u), Some(&v)) => self.edges.push((u, v)),
            _ => self.clamps.push(Clamp {
                family,
                from: a,
                to: b,
            }),
        }
    }
}

/// Builds the CSP(1,1) instance for a normalized formula.
pub fn build_reduction(f: &QFormula, subdivide: bool) -> Result<ReductionArtifact, ReductionError> {
    if f.n() % 2 == 1 {
        return Err(ReductionError::NotNormalized(format!("odd variable count {}", f.n())));
    }
    if !f.has_complementary_clause() {
        return Err(ReductionError::NotNormalized("no clause holds a complementary pair".into()));
    }
    let n = f.n() as i32;
    let m = f.m() as i32;
    let b = n * n / 2;
    let mut g = Builder {
        labels: Vec::new(),
        ids: FxHashMap::default(),
        edges: Vec::new(),
        clamps: Vec::new(),
    };
    let u_len = |i: i32| if i <= n - 2 { 2 * n } else { b };

    for i in 1..=n {
        g.vertex(Label::X(i));
        g.vertex(Label::XBar(i));
    }
    g.vertex(Label::VI);
    g.vertex(Label::VII);
    for i in -1..=n {
        for h in 1..=u_len(i) {
            g.vertex(Label::U(i, h));
        }
    }
    for j in 1..=m {
        for l in [Label::V(j), Label::A(j), Label::B(j), Label::C(j)] {
            g.vertex(l);
        }
        for k in 1..=3 {
            g.vertex(Label::Y(j, k));
        }
    }
    g.vertex(Label::V0);
    for k in 1..=3 {
        for j in 1..=m {
            for h in 1..=b - n {
                g.vertex(Label::P(k, j, h));
            }
        }
    }
    for i in 0..=2 * n {
        for h in 1..=n * n * n {
            g.vertex(Label::Q(i, h));
        }
    }
    let d_last = 5 * m + n - 6;
    for i in 0..=d_last {
        g.vertex(Label::D(i));
    }

    g.edge("start", Label::VI, Label::VII);
    g.edge("start", Label::VI, Label::U(-1, 1));
    g.edge("start", Label::VII, Label::U(0, 1));
    for i in -1..=n {
        for h in 1..=u_len(i) {
            g.edge("ladder", Label::U(i, h), Label::U(i, h + 1));
        }
    }
    for i in -1..=n - 2 {
        g.edge("diamond", Label::U(i, 2 * n), Label::X(i + 2));
        g.edge("diamond", Label::U(i, 2 * n), Label::XBar(i + 2));
    }
    for i in 1..=n {
        g.edge("diamond", Label::X(i), Label::U(i, 1));
        g.edge("diamond", Label::XBar(i), Label::U(i, 1));
    }
    for i in -1..=n / 2 - 1 {
        for h in 1..=2 * n {
            g.edge("rung", Label::U(2 * i + 1, h), Label::U(2 * i + 2, h));
        }
    }
    for h in 1..=b {
        g.edge("rung", Label::U(n - 1, h), Label::U(n, h));
    }
    g.edge("clause", Label::U(n - 1, b), Label::V0);
    for j in 1..=m {
        g.edge("clause", Label::U(n, b), Label::A(j));
        g.edge("clause", Label::V0, Label::V(j));
        g.edge("clause", Label::A(j), Label::B(j));
        g.edge("clause", Label::B(j), Label::C(j));
        g.edge("triangle", Label::Y(j, 1), Label::Y(j, 2));
        g.edge("triangle", Label::Y(j, 1), Label::Y(j, 3));
        g.edge("triangle", Label::Y(j, 2), Label::Y(j, 3));
        for k in 1..=3 {
            g.edge("clause", Label::V(j), Label::Y(j, k));
            g.edge("clause", Label::C(j), Label::Y(j, k));
        }
    }
    for k in 1..=3 {
        for j in 1..=m {
            g.edge("feedback", Label::Y(j, k), Label::P(k, j, 1));
            for h in 1..=b - n {
                g.edge("feedback", Label::P(k, j, h), Label::P(k, j, h + 1));
            }
            let lit = f.clauses[(j - 1) as usize][(k - 1) as usize];
            let target = if lit > 0 { Label::X(lit) } else { Label::XBar(-lit) };
            g.edge("feedback", Label::P(k, j, b - n), target);
        }
    }
    for i in 1..=n {
        g.edge("cache", Label::X(i), Label::Q(2 * i, 1));
        g.edge("cache", Label::XBar(i), Label::Q(2 * i - 1, 1));
        g.edge("cache", Label::X(i), Label::D(0));
        g.edge("cache", Label::XBar(i), Label::D(0));
    }
    for i in 0..=2 * n {
        for h in 1..n * n * n {
            g.edge("cache", Label::Q(i, h), Label::Q(i, h + 1));
        }
    }
    g.edge("cache", Label::D(0), Label::Q(0, 1));
    for i in 0..=2 * n {
        g.edge("cache", Label::Q(i, n * n * n), Label::D(1));
    }
    for h in 1..=d_last {
        g.edge("cache", Label::D(h), Label::D(h + 1));
    }

    let customers: Vec<Vertex> = g
        .labels
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            matches!(l, Label::X(_) | Label::XBar(_) | Label::A(_) | Label::B(_) | Label::Y(..) | Label::U(..) | Label::D(_))
        })
        .map(|(v, _)| v as Vertex)
        .collect();
    let v_i = g.ids[&Label::VI];
    let v_ii = g.ids[&Label::VII];
    let string_labels: Vec<String> = g.labels.iter().map(Label::to_string).collect();
    let pre_graph = Graph::from_edges(g.labels.len(), false, &g.edges)
        .expect("builder edges are in range")
        .with_labels(string_labels);
    let pre = Instance::new(pre_graph, customers.iter().copied(), vec![v_i], vec![v_ii]);

    let mut labels = g.labels.clone();
    let mut ids = g.ids.clone();
    let instance = if subdivide {
        let original = pre.graph().edges();
        let mut edges = Vec::with_capacity(2 * original.len());
        for (u, v) in original {
            let mid = labels.len() as Vertex;
            let l = Label::Sub(u, v);
            labels.push(l);
            ids.insert(l, mid);
            edges.push((u, mid));
            edges.push((mid, v));
        }
        let names = labels.iter().map(Label::to_string).collect();
        let graph = Graph::from_edges(labels.len(), false, &edges)
            .expect("subdivision edges are in range")
            .with_labels(names);
        Instance::new(graph, customers, vec![v_i], vec![v_ii])
    } else {
        pre.clone()
    };
    let parts = labels.iter().map(|l| part_of(l, &g.labels)).collect();
    Ok(ReductionArtifact {
        formula: f.clone(),
        n: n as usize,
        m: m as usize,
        b: b as usize,
        instance,
        pre_subdivision: pre,
        subdivided: subdivide,
        labels,
        parts,
        clamps: g.clamps,
        ids,
    })
}

/// `d_0` sits next to every variable vertex and counts with the main part;
/// midpoints belong to the cache only between two cache vertices.
fn part_of(l: &Label, originals: &[Label]) -> Part {
    match *l {
        Label::Q(..) => Part::Cache,
        Label::D(i) if i >= 1 => Part::Cache,
        Label::Sub(u, v) => {
            let both = [u, v]
                .iter()
                .all(|&w| part_of(&originals[w as usize], originals) == Part::Cache);
            if both {
                Part::Cache
            } else {
                Part::Main
            }
        }
        _ => Part::Main,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{pad_formula, parse_q3sat};

    fn four_three() -> QFormula {
        pad_formula(&parse_q3sat("p q3cnf 1 1\nq e\n1 1 1 0\n").unwrap())
    }

    #[test]
    fn padded_single_variable_gives_four_three() {
        let f = four_three();
        assert_eq!((f.n(), f.m()), (4, 3));
    }

    #[test]
    fn labels_are_unique_and_total() {
        let art = build_reduction(&four_three(), true).unwrap();
        assert_eq!(art.labels.len(), art.instance.graph().vertex_count());
        assert_eq!(art.parts.len(), art.labels.len());
        for (v, l) in art.labels.iter().enumerate() {
            assert_eq!(art.id(*l), Some(v as Vertex));
        }
        let file = art.label_file();
        assert_eq!(file.lines().count(), art.labels.len());
        assert!(file.lines().all(|l| l.split(' ').count() == 3));
    }

    #[test]
    fn rejects_unpadded_formula() {
        let f = parse_q3sat("p q3cnf 1 1\nq e\n1 1 1 0\n").unwrap();
        assert!(build_reduction(&f, false).is_err());
        let f = parse_q3sat("p q3cnf 2 1\nq e a\n1 2 2 0\n").unwrap();
        assert!(build_reduction(&f, false).is_err());
    }

    #[test]
    fn build_is_deterministic() {
        let a = build_reduction(&four_three(), true).unwrap();
        let b = build_reduction(&four_three(), true).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.instance, b.instance);
    }

    #[test]
    fn clamps_only_drop_out_of_range_endpoints() {
        let art = build_reduction(&four_three(), false).unwrap();
        for c in &art.clamps {
            assert!(art.id(c.from).is_none() || art.id(c.to).is_none(), "{c:?}");
        }
        let n = 4;
        let b = 8;
        let expected = [Label::U(-1, 2 * n + 1), Label::U(n - 1, b + 1), Label::P(1, 1, b - n + 1), Label::D(5 * 3 + n - 5)];
        for l in expected {
            assert!(art.clamps.iter().any(|c| c.to == l), "{l}");
        }
    }
}
