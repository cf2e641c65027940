//! Graph text, JSON and DOT formats.
//!
//! Text form: a header line `n <count>`, then one `e <i> <j>` line per edge
//! with `i < j`. Lines starting with `#` and blank lines are ignored.

use crate::designer::DesignedNetwork;
use crate::graph::{Graph, GraphError};
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing `n <count>` header")]
    MissingHeader,
    #[error("invalid graph JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn parse_graph_text(text: &str) -> Result<Graph, FormatError> {
    let mut graph: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| FormatError::Parse { line, message };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let number = |s: &str| s.parse::<usize>().map_err(|_| err(format!("`{s}` is not a node index")));
        match (&mut graph, fields.as_slice()) {
            (None, ["n", count]) => {
                let count = count
                    .parse::<usize>()
                    .map_err(|_| err(format!("`{count}` is not a node count")))?;
                graph = Some(Graph::empty(count));
            }
            (None, _) => return Err(err(format!("expected `n <count>`, found `{trimmed}`"))),
            (Some(_), ["n", ..]) => return Err(err("duplicate header".into())),
            (Some(g), ["e", a, b]) => {
                let (i, j) = (number(a)?, number(b)?);
                if i >= j {
                    return Err(err(format!("edge `{i} {j}` must satisfy i < j")));
                }
                g.add_edge(i, j).map_err(|e| err(e.to_string()))?;
            }
            (Some(_), _) => return Err(err(format!("expected `e <i> <j>`, found `{trimmed}`"))),
        }
    }
    graph.ok_or(FormatError::MissingHeader)
}

pub fn write_graph_text(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.node_count());
    for (i, j) in g.edges() {
        writeln!(out, "e {i} {j}").unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson {
            n: g.node_count(),
            edges: g.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }
}

impl TryFrom<&GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(json: &GraphJson) -> Result<Self, GraphError> {
        Graph::from_edges(json.n, json.edges.iter().map(|e| (e[0], e[1])))
    }
}

pub fn parse_graph_json(text: &str) -> Result<Graph, FormatError> {
    let json: GraphJson = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    Ok(Graph::try_from(&json)?)
}

/// Accepts either the text or the JSON form.
pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    if text.trim_start().starts_with('{') {
        parse_graph_json(text)
    } else {
        parse_graph_text(text)
    }
}

pub fn graph_to_dot(g: &Graph) -> String {
    let mut out = String::from("graph G {\n");
    for v in 0..g.node_count() {
        writeln!(out, "  {v};").unwrap();
    }
    for (i, j) in g.edges() {
        writeln!(out, "  {i} -- {j};").unwrap();
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a designed network with nodes coloured by role.
pub fn network_to_dot(net: &DesignedNetwork) -> String {
    let role = |v: usize| {
        if net.middle_orphan == Some(v) {
            ("middle_orphan", "red")
        } else if net.orphans.contains(&v) {
            ("orphan", "orange")
        } else if net.periphery.contains(&v) {
            ("periphery", "lightblue")
        } else if net.core.contains(&v) {
            ("core", "gold")
        } else if net.singletons.contains(&v) {
            ("singleton", "gray")
        } else {
            ("cycle", "palegreen")
        }
    };
    let mut out = format!("graph G {{\n  label=\"{}\";\n  node [style=filled];\n", net.topology);
    for v in 0..net.graph.node_count() {
        let (name, color) = role(v);
        writeln!(out, "  {v} [fillcolor={color}, role={name}];").unwrap();
    }
    for (i, j) in net.graph.edges() {
        writeln!(out, "  {i} -- {j};").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designer::design_network;
    use crate::payoff::UtilitySpec;
    use crate::rational::int;

    #[test]
    fn text_round_trip() {
        let text = "# four cycle\nn 4\ne 0 1\ne 1 2\n\ne 2 3\ne 0 3\n";
        let g = parse_graph_text(text).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(parse_graph_text(&write_graph_text(&g)).unwrap(), g);
        assert_eq!(write_graph_text(&g), "n 4\ne 0 1\ne 0 3\ne 1 2\ne 2 3\n");
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("n 3\ne 0 1\ne 1\n", 3),
            ("n 3\ne 1 0\n", 2),
            ("n 3\ne 0 7\n", 2),
            ("n 3\ne 0 1\ne 0 1\n", 3),
            ("# c\ne 0 1\n", 2),
            ("n x\n", 1),
        ];
        for (text, line) in cases {
            match parse_graph_text(text) {
                Err(FormatError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert_eq!(parse_graph_text("# only\n"), Err(FormatError::MissingHeader));
    }

    #[test]
    fn json_round_trip() {
        let g = parse_graph_text("n 3\ne 0 2\n").unwrap();
        let json = serde_json::to_string(&GraphJson::from(&g)).unwrap();
        assert_eq!(json, r#"{"n":3,"edges":[[0,2]]}"#);
        assert_eq!(parse_graph(&json).unwrap(), g);
        assert!(parse_graph_json(r#"{"n":2,"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn dot_output() {
        let net = design_network(9, 0, &UtilitySpec::identity(int(10))).unwrap();
        let dot = network_to_dot(&net);
        assert!(dot.contains("role=middle_orphan"));
        assert!(dot.contains("role=periphery"));
        assert_eq!(dot.matches(" -- ").count(), net.graph.edge_count());
        assert!(graph_to_dot(&net.graph).starts_with("graph G {"));
    }
}
