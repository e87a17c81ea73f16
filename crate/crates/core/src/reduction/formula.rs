use std::fmt;

use crate::error::ReductionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Literal `+i` is `x_i`, `-i` is its negation; `i` counts from 1.
pub type Literal = i32;

/// Prenex 3-CNF with an alternating prefix that opens with an existential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QFormula {
    pub prefix: Vec<Quantifier>,
    pub clauses: Vec<[Literal; 3]>,
}

impl QFormula {
    pub fn new(prefix: Vec<Quantifier>, clauses: Vec<[Literal; 3]>) -> Result<QFormula, ReductionError> {
        let f = QFormula { prefix, clauses };
        if let Some(msg) = f.problem() {
            return Err(ReductionError::NotNormalized(msg));
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.prefix.len()
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    fn problem(&self) -> Option<String> {
        for (i, q) in self.prefix.iter().enumerate() {
            let want = if i % 2 == 0 { Quantifier::Exists } else { Quantifier::Forall };
            if *q != want {
                return Some(format!("quantifier {} breaks alternation", i + 1));
            }
        }
        let n = self.n() as i32;
        for (j, c) in self.clauses.iter().enumerate() {
            if let Some(l) = c.iter().find(|l| **l == 0 || l.abs() > n) {
                return Some(format!("clause {} literal {l} out of range", j + 1));
            }
        }
        None
    }

    /// Some clause holds a literal and its negation.
    pub fn has_complementary_clause(&self) -> bool {
        self.clauses
            .iter()
            .any(|c| c.iter().any(|&l| c.contains(&-l)))
    }

    pub fn is_normalized(&self) -> bool {
        self.n().is_multiple_of(2) && self.has_complementary_clause()
    }

    /// Text form accepted by [`parse_q3sat`].
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for QFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p q3cnf {} {}", self.n(), self.m())?;
        f.write_str("q")?;
        for q in &self.prefix {
            f.write_str(match q {
                Quantifier::Exists => " e",
                Quantifier::Forall => " a",
            })?;
        }
        writeln!(f)?;
        for c in &self.clauses {
            writeln!(f, "{} {} {} 0", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ReductionError {
    ReductionError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// Whitespace-separated tokens with their 1-based column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Reads the `p q3cnf <n> <m>` text format.
pub fn parse_q3sat(text: &str) -> Result<QFormula, ReductionError> {
    let mut header: Option<(usize, usize)> = None;
    let mut prefix: Option<Vec<Quantifier>> = None;
    let mut clauses = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokens(raw);
        let Some(&(col, first)) = toks.first() else { continue };
        if first == "c" {
            continue;
        }
        let Some((n, m)) = header else {
            if first != "p" || toks.len() != 4 || toks[1].1 != "q3cnf" {
                return Err(err(line, col, "malformed header, expected \"p q3cnf <n> <m>\""));
            }
            let num = |t: (usize, &str)| {
                t.1.parse::<usize>()
                    .map_err(|_| err(line, t.0, format!("malformed header count {:?}", t.1)))
            };
            header = Some((num(toks[2])?, num(toks[3])?));
            continue;
        };
        let Some(_) = &prefix else {
            if first != "q" {
                return Err(err(line, col, "expected quantifier line \"q ...\""));
            }
            let mut qs = Vec::new();
            for &(c, t) in &toks[1..] {
                let q = match t {
                    "e" => Quantifier::Exists,
                    "a" => Quantifier::Forall,
                    _ => return Err(err(line, c, format!("unknown quantifier {t:?}"))),
                };
                let want = if qs.len() % 2 == 0 { Quantifier::Exists } else { Quantifier::Forall };
                if q != want {
                    return Err(err(line, c, "quantifier alternation broken"));
                }
                qs.push(q);
            }
            if qs.len() != n {
                return Err(err(line, col, format!("{} quantifiers for {n} variables", qs.len())));
            }
            prefix = Some(qs);
            continue;
        };
        let mut lits = Vec::new();
        let mut closed = false;
        for &(c, t) in &toks {
            if closed {
                return Err(err(line, c, "tokens after clause terminator"));
            }
            let l: i64 = t
                .parse()
                .map_err(|_| err(line, c, format!("not an integer: {t:?}")))?;
            if l == 0 {
                closed = true;
                continue;
            }
            if l.unsigned_abs() as usize > n {
                return Err(err(line, c, format!("variable index {l} out of range 1..={n}")));
            }
            lits.push(l as Literal);
        }
        if !closed {
            return Err(err(line, raw.len() + 1, "clause not terminated by 0"));
        }
        if lits.len() != 3 {
            return Err(err(line, col, format!("arity {} clause, expected 3 literals", lits.len())));
        }
        if clauses.len() == m {
            return Err(err(line, col, format!("more than {m} clauses")));
        }
        clauses.push([lits[0], lits[1], lits[2]]);
    }
    let Some((_, m)) = header else {
        return Err(err(last_line.max(1), 1, "missing header"));
    };
    let Some(prefix) = prefix else {
        return Err(err(last_line.max(1), 1, "missing quantifier line"));
    };
    if clauses.len() != m {
        return Err(err(last_line.max(1), 1, format!("{} clauses, header declares {m}", clauses.len())));
    }
    Ok(QFormula { prefix, clauses })
}

fn extend(f: &mut QFormula, count: usize, clauses: impl Fn(i32) -> Vec<[Literal; 3]>) {
    let n = f.n() as i32;
    for _ in 0..count {
        let q = if f.prefix.len().is_multiple_of(2) { Quantifier::Exists } else { Quantifier::Forall };
        f.prefix.push(q);
    }
    f.clauses.extend(clauses(n));
}

/// Makes `n` even, then guarantees a clause with a complementary pair.
pub fn pad_formula(f: &QFormula) -> QFormula {
    let mut out = f.clone();
    if out.n() % 2 == 1 {
        extend(&mut out, 3, |n| vec![[n + 1, -(n + 1), n + 2], [-(n + 2), n + 3, -(n + 3)]]);
    }
    if !out.has_complementary_clause() {
        extend(&mut out, 2, |n| vec![[n + 1, -(n + 1), n + 2], [n + 1, n + 2, -(n + 2)]]);
    }
    out
}
