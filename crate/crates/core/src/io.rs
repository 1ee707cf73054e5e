//! System files and the plain-text output formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynsys::{Digraph, FiniteMap, Interval, OdeSystem, SpecError, SystemSpec};
use crate::lyapunov::LyapunovRow;
use crate::morse::MorseDecomposition;
use crate::transition::MorseGraph;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{0}")]
    Field(SpecError),
}

impl From<SpecError> for LoadError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Schema(m) => LoadError::Schema(m),
            other => LoadError::Field(other),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Name {
    Text(String),
    Int(i64),
}

impl Name {
    fn into_string(self) -> String {
        match self {
            Name::Text(s) => s,
            Name::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct IntegratorFile {
    method: String,
    dt: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SpecFile {
    FiniteMap {
        states: Vec<Name>,
        map: BTreeMap<String, Name>,
    },
    Digraph {
        cells: Vec<Name>,
        edges: Vec<(Name, Name)>,
    },
    Ode {
        dim: usize,
        field: Vec<String>,
        domain: Vec<(f64, f64)>,
        integrator: IntegratorFile,
        #[serde(default)]
        magnitude_cap: Option<f64>,
    },
}

/// Reads and validates a system file.
pub fn load_spec(path: &Path) -> Result<SystemSpec, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec(&text)
}

pub fn parse_spec(text: &str) -> Result<SystemSpec, LoadError> {
    let file: SpecFile = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => LoadError::Schema(e.to_string()),
        _ => LoadError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
    })?;
    Ok(match file {
        SpecFile::FiniteMap { states, map } => {
            let states: Vec<String> = states.into_iter().map(Name::into_string).collect();
            let pairs: Vec<(String, String)> = map.into_iter().map(|(k, v)| (k, v.into_string())).collect();
            SystemSpec::FiniteMap(FiniteMap::new(states, &pairs)?)
        }
        SpecFile::Digraph { cells, edges } => {
            let cells: Vec<String> = cells.into_iter().map(Name::into_string).collect();
            let edges: Vec<(String, String)> = edges
                .into_iter()
                .map(|(u, v)| (u.into_string(), v.into_string()))
                .collect();
            SystemSpec::Digraph(Digraph::new(cells, &edges)?)
        }
        SpecFile::Ode {
            dim,
            field,
            domain,
            integrator,
            magnitude_cap,
        } => {
            if field.len() != dim {
                return Err(LoadError::Schema(format!(
                    "ode: dim is {dim} but field has {} components",
                    field.len()
                )));
            }
            if domain.len() != dim {
                return Err(LoadError::Schema(format!(
                    "ode: dim is {dim} but domain has {} intervals",
                    domain.len()
                )));
            }
            let domain = domain.into_iter().map(|(lo, hi)| Interval::new(lo, hi)).collect();
            let mut ode = OdeSystem::new(&field, domain, &integrator.method, integrator.dt)?;
            if let Some(cap) = magnitude_cap {
                if cap.is_nan() || cap <= 0.0 {
                    return Err(LoadError::Schema(format!(
                        "ode: magnitude_cap must be positive, got {cap}"
                    )));
                }
                ode = ode.with_magnitude_cap(cap);
            }
            SystemSpec::Ode(ode)
        }
    })
}

pub fn morse_node_name(k: usize) -> String {
    format!("M{}", k + 1)
}

/// One node per Morse set, labeled with its cell count, and one edge per
/// direct connection.
pub fn morse_dot(graph: &MorseGraph) -> String {
    let mut out = String::from("digraph morse {\n");
    for (k, node) in graph.nodes.iter().enumerate() {
        let name = morse_node_name(k);
        let _ = writeln!(out, "  {name} [label=\"{name} ({})\"];", node.len());
    }
    for &(a, b) in &graph.edges {
        let _ = writeln!(out, "  {} -> {};", morse_node_name(a), morse_node_name(b));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Serialize)]
pub struct MorseJsonNode {
    pub id: String,
    pub index: usize,
    pub size: usize,
    pub cells: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct MorseJson {
    pub nodes: Vec<MorseJsonNode>,
    pub edges: Vec<(String, String)>,
}

pub fn morse_json(md: &MorseDecomposition, graph: &MorseGraph) -> MorseJson {
    MorseJson {
        nodes: md
            .morse_sets
            .iter()
            .enumerate()
            .map(|(k, m)| MorseJsonNode {
                id: morse_node_name(k),
                index: k + 1,
                size: m.len(),
                cells: m.to_vec(),
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|&(a, b)| (morse_node_name(a), morse_node_name(b)))
            .collect(),
    }
}

pub fn basins_csv(assignment: &[Option<usize>]) -> String {
    let mut out = String::from("cell_index,attractor_id\n");
    for (c, a) in assignment.iter().enumerate() {
        match a {
            Some(id) => {
                let _ = writeln!(out, "{c},{id}");
            }
            None => {
                let _ = writeln!(out, "{c},-1");
            }
        }
    }
    out
}

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn lyapunov_csv(rows: &[LyapunovRow], dim: usize) -> String {
    let mut out = String::from("cell_index");
    for i in 1..=dim {
        let _ = write!(out, ",center_{i}");
    }
    out.push_str(",zeta,xi,L\n");
    for r in rows {
        let _ = write!(out, "{}", r.cell);
        if let Some(c) = &r.center {
            for v in c {
                let _ = write!(out, ",{}", fmt_f64(*v));
            }
        }
        let _ = writeln!(out, ",{},{},{}", fmt_f64(r.zeta), fmt_f64(r.xi), fmt_f64(r.l));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_each_kind() {
        let f = parse_spec(r#"{"type":"finite_map","states":[0,1],"map":{"0":0,"1":"0"}}"#).unwrap();
        assert_eq!(f.kind(), "finite_map");
        let g = parse_spec(r#"{"type":"digraph","cells":["a","b"],"edges":[["a","b"]]}"#).unwrap();
        assert_eq!(g.kind(), "digraph");
        let o = parse_spec(
            r#"{"type":"ode","dim":1,"field":["x - x^3"],"domain":[[-2,2]],"integrator":{"method":"rk4","dt":0.001}}"#,
        )
        .unwrap();
        assert_eq!(o.as_ode().unwrap().dim(), 1);
    }

    #[test]
    fn reports_errors() {
        let e = parse_spec(r#"{"type":"finite_map","states":["0"],"map":{"0":"7"}}"#).unwrap_err();
        assert!(matches!(&e, LoadError::Schema(m) if m.contains("`7`")), "{e}");
        let e = parse_spec(
            r#"{"type":"ode","dim":2,"field":["x"],"domain":[[0,1],[0,1]],"integrator":{"method":"rk4","dt":0.1}}"#,
        )
        .unwrap_err();
        assert!(matches!(e, LoadError::Schema(_)));
        let e = parse_spec("{\n  \"type\": \"digraph\",\n  \"cells\": [\"a\",]\n}").unwrap_err();
        assert!(matches!(e, LoadError::Parse { line: 3, .. }), "{e:?}");
        let e = parse_spec(r#"{"type":"digraph","cells":["a"],"edges":[],"extra":1}"#).unwrap_err();
        assert!(matches!(&e, LoadError::Schema(m) if m.contains("extra")), "{e}");
        let e = parse_spec(
            r#"{"type":"ode","dim":1,"field":["x +"],"domain":[[0,1]],"integrator":{"method":"rk4","dt":0.1}}"#,
        )
        .unwrap_err();
        assert!(matches!(e, LoadError::Field(_)));
    }

    #[test]
    fn dot_layout() {
        use crate::cellset::CellSet;
        let g = MorseGraph {
            nodes: vec![CellSet::from_cells(4, [0]), CellSet::from_cells(4, [2, 3])],
            edges: vec![(1, 0)],
        };
        assert_eq!(
            morse_dot(&g),
            "digraph morse {\n  M1 [label=\"M1 (1)\"];\n  M2 [label=\"M2 (2)\"];\n  M2 -> M1;\n}\n"
        );
    }

    #[test]
    fn csv_number_format() {
        let v = 4.0 + (-1f64).exp();
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(basins_csv(&[Some(0), None]), "cell_index,attractor_id\n0,0\n1,-1\n");
    }
}
