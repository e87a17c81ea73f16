//! JSON instance files.
//!
//! ```json
//! {"version":1,"directed":false,"vertices":3,"edges":[[0,1],[1,2]],
//!  "customers":[2],"starts_i":[0],"starts_ii":[0],
//!  "passing_allowed":false,"draw_rank":"below_tie"}
//! ```
//!
//! Undirected edges are listed once and symmetrized on load.

use serde::{Deserialize, Serialize};

use crate::error::FormatError;
use crate::model::{DrawRank, Graph, Instance, Vertex};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: u32,
    pub directed: bool,
    pub vertices: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub edges: Vec<[Vertex; 2]>,
    pub customers: Vec<Vertex>,
    pub starts_i: Vec<Vertex>,
    pub starts_ii: Vec<Vertex>,
    pub passing_allowed: bool,
    #[serde(default)]
    pub draw_rank: DrawRank,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> InstanceFile {
        let g = inst.graph();
        InstanceFile {
            version: FORMAT_VERSION,
            directed: g.is_directed(),
            vertices: g.vertex_count(),
            labels: g.labels().map(<[String]>::to_vec),
            edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            customers: inst.customers().to_vec(),
            starts_i: inst.starts(crate::model::Player::I).to_vec(),
            starts_ii: inst.starts(crate::model::Player::II).to_vec(),
            passing_allowed: inst.passing_allowed(),
            draw_rank: inst.draw_rank(),
        }
    }

    pub fn into_instance(self) -> Result<Instance, FormatError> {
        if self.version != FORMAT_VERSION {
            return Err(FormatError::Version(self.version));
        }
        let edges: Vec<(Vertex, Vertex)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut graph = Graph::from_edges(self.vertices, self.directed, &edges)?;
        if let Some(labels) = self.labels {
            graph = graph.with_labels(labels);
        }
        Ok(Instance::new(graph, self.customers, self.starts_i, self.starts_ii)
            .with_passing(self.passing_allowed)
            .with_draw_rank(self.draw_rank))
    }
}

pub fn to_json(inst: &Instance) -> String {
    serde_json::to_string(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

pub fn to_json_pretty(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

pub fn from_json(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    file.into_instance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn loads_and_symmetrizes() {
        let text = r#"{"version":1,"directed":false,"vertices":3,"edges":[[0,1],[1,2]],
            "customers":[2],"starts_i":[0],"starts_ii":[0],"passing_allowed":false,
            "draw_rank":"below_tie"}"#;
        let inst = from_json(text).unwrap();
        assert_eq!(inst.graph().neighbors(1), &[0, 2]);
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(from_json(&to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn draw_rank_names() {
        let text = r#"{"version":1,"directed":true,"vertices":2,"edges":[[0,1]],
            "customers":[1],"starts_i":[0],"starts_ii":[0],"passing_allowed":true,
            "draw_rank":"equals_tie"}"#;
        let inst = from_json(text).unwrap();
        assert_eq!(inst.draw_rank(), DrawRank::EqualsTie);
        assert!(inst.passing_allowed());
        assert!(to_json(&inst).contains("\"equals_tie\""));
    }

    #[test]
    fn rejects_bad_version_and_range() {
        let bad_version = r#"{"version":2,"directed":true,"vertices":2,"edges":[],
            "customers":[],"starts_i":[0],"starts_ii":[0],"passing_allowed":false}"#;
        assert_eq!(from_json(bad_version), Err(FormatError::Version(2)));
        let bad_edge = r#"{"version":1,"directed":true,"vertices":2,"edges":[[0,7]],
            "customers":[],"starts_i":[0],"starts_ii":[0],"passing_allowed":false}"#;
        assert!(matches!(from_json(bad_edge), Err(FormatError::Model(_))));
    }
}
