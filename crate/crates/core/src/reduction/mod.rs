//! Quantified 3-CNF input, normalization, and the CSP(1,1) hardness construction
//! with a structural audit against its closed-form counts.

mod audit;
mod build;
mod formula;

pub use audit::{verify_reduction, AuditCheck, AuditReport, CheckKind};
pub use build::{build_reduction, Clamp, Label, Part, ReductionArtifact};
pub use formula::{pad_formula, parse_q3sat, Literal, QFormula, Quantifier};
