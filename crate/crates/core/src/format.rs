//! Instance text format.
//!
//! Instances are JSON objects:
//!
//! ```json
//! {
//!   "agents": 3,
//!   "goods": 2,
//!   "initial": [[1, 0], [0, 1], [1, 1]],
//!   "beta": [[0, 0.1, 0.2], [0.1, 0, 0.3], [0.2, 0.3, 0]],
//!   "names": ["i", "j", "k"]
//! }
//! ```
//!
//! `names` is optional. `initial` rows hold 0/1 entries; `beta` must be a
//! symmetric square matrix with zero diagonal and off-diagonal entries in
//! the open interval (0, 1).

use serde::{Deserialize, Serialize};

use crate::error::{ClearError, Result};
use crate::model::Instance;

/// An instance together with display names for its agents.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub instance: Instance,
    pub names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    agents: usize,
    goods: usize,
    initial: Vec<Vec<u8>>,
    beta: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

/// Default agent labels: `0`, `1`, ...
pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|a| a.to_string()).collect()
}

/// Line (1-based) on which `needle` first occurs, or 1.
fn line_of(text: &str, needle: &str) -> usize {
    text.lines().position(|l| l.contains(needle)).map_or(1, |p| p + 1)
}

pub fn parse_instance(text: &str) -> Result<Document> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| ClearError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let at = |key: &str, message: String| ClearError::Parse {
        line: line_of(text, &format!("\"{key}\"")),
        message,
    };
    if file.agents == 0 {
        return Err(at("agents", "an instance needs at least one agent".into()));
    }
    if file.initial.len() != file.agents {
        return Err(at(
            "initial",
            format!("expected {} rows, found {}", file.agents, file.initial.len()),
        ));
    }
    let mut rows = Vec::with_capacity(file.agents);
    for (a, row) in file.initial.iter().enumerate() {
        if row.len() != file.goods {
            return Err(at(
                "initial",
                format!("row {a} has {} entries, expected {}", row.len(), file.goods),
            ));
        }
        if let Some(v) = row.iter().find(|&&v| v > 1) {
            return Err(at("initial", format!("row {a} contains {v}; entries must be 0 or 1")));
        }
        rows.push(row.iter().map(|&v| v == 1).collect());
    }
    if file.beta.len() != file.agents || file.beta.iter().any(|r| r.len() != file.agents) {
        return Err(at("beta", format!("beta must be a {0}x{0} matrix", file.agents)));
    }
    for (a, row) in file.beta.iter().enumerate() {
        if row[a] != 0.0 {
            return Err(at(
                "beta",
                format!("beta[{a}][{a}] = {} but the diagonal must be 0", row[a]),
            ));
        }
    }
    let instance = Instance::new(rows, file.beta).map_err(|e| at("beta", e.to_string()))?;
    let names = match file.names {
        Some(names) if names.len() != file.agents => {
            return Err(at(
                "names",
                format!("{} names given for {} agents", names.len(), file.agents),
            ))
        }
        Some(names) => names,
        None => default_names(file.agents),
    };
    Ok(Document { instance, names })
}

pub fn write_instance(doc: &Document) -> String {
    let inst = &doc.instance;
    let file = InstanceFile {
        agents: inst.num_agents(),
        goods: inst.num_goods(),
        initial: inst
            .initial_rows()
            .iter()
            .map(|r| r.iter().map(|&b| u8::from(b)).collect())
            .collect(),
        beta: inst.beta_matrix().to_vec(),
        names: (doc.names != default_names(inst.num_agents())).then(|| doc.names.clone()),
    };
    serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
}

/// Serde adapter storing boolean matrices as 0/1 rows.
pub(crate) mod bits {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<bool>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<u8>> = m.iter().map(|r| r.iter().map(|&b| u8::from(b)).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<bool>>, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(d)?;
        Ok(rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v != 0).collect())
            .collect())
    }
}
