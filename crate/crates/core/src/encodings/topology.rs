//! Network topologies: directed graphs with optional integer link latencies.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("edge {0} -> {1} has no latency")]
    MissingLatency(String, String),
    #[error("latency must be a positive integer")]
    BadLatency,
    #[error("{0}")]
    Sampling(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub latency: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Topology {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    present: HashSet<(usize, usize)>,
    /// Built from an undirected graph; every edge appears in both directions.
    pub undirected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyFormat {
    GraphMl,
    EdgeList,
}

impl Topology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str) -> Result<usize, TopologyError> {
        if self.index.contains_key(name) {
            return Err(TopologyError::DuplicateNode(name.to_string()));
        }
        Ok(self.ensure_node(name))
    }

    /// Returns the id of `name`, declaring it if needed.
    pub fn ensure_node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.nodes.push(name.to_string());
        self.index.insert(name.to_string(), self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// Adds a directed edge; returns false if the edge already exists.
    pub fn add_edge(&mut self, source: usize, target: usize, latency: Option<u64>) -> Result<bool, TopologyError> {
        if source == target {
            return Err(TopologyError::SelfLoop(self.nodes[source].clone()));
        }
        if latency == Some(0) {
            return Err(TopologyError::BadLatency);
        }
        if !self.present.insert((source, target)) {
            return Ok(false);
        }
        self.edges.push(Edge { source, target, latency });
        Ok(true)
    }

    pub fn add_edge_by_name(&mut self, source: &str, target: &str, latency: Option<u64>) -> Result<bool, TopologyError> {
        let s = self.node(source)?;
        let t = self.node(target)?;
        self.add_edge(s, t, latency)
    }

    pub fn node(&self, name: &str) -> Result<usize, TopologyError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| TopologyError::UnknownNode(name.to_string()))
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.source == v).count()
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.source == v)
    }

    pub fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for e in self.successors(v) {
                if !seen[e.target] {
                    seen[e.target] = true;
                    stack.push(e.target);
                }
            }
        }
        seen
    }

    /// Same graph with latencies replaced by `f(edge index)`.
    pub fn with_latencies(&self, mut f: impl FnMut(usize) -> u64) -> Topology {
        let mut t = self.clone();
        for (i, e) in t.edges.iter_mut().enumerate() {
            e.latency = Some(f(i));
        }
        t
    }

    pub fn to_edgelist(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = write!(out, "{} {}", self.nodes[e.source], self.nodes[e.target]);
            if let Some(w) = e.latency {
                let _ = write!(out, " {w}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn parse_topology(bytes: &[u8], format: TopologyFormat) -> Result<Topology, TopologyError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TopologyError::Parse {
        line: 1,
        col: 1,
        msg: format!("invalid UTF-8: {e}"),
    })?;
    match format {
        TopologyFormat::GraphMl => parse_graphml(text),
        TopologyFormat::EdgeList => parse_edgelist(text),
    }
}

/// `u v [latency]` per line; `#` starts a comment. Edges are directed.
pub fn parse_edgelist(text: &str) -> Result<Topology, TopologyError> {
    let mut t = Topology::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let err = |col: usize, msg: &str| TopologyError::Parse {
            line: n + 1,
            col,
            msg: msg.to_string(),
        };
        let col_of = |k: usize| raw.find(fields[k]).map_or(1, |c| c + 1);
        if fields.len() < 2 || fields.len() > 3 {
            return Err(err(1, "expected `source target [latency]`"));
        }
        let latency = match fields.get(2) {
            Some(w) => match w.parse::<u64>() {
                Ok(v) if v >= 1 => Some(v),
                _ => return Err(err(col_of(2), "latency must be a positive integer")),
            },
            None => None,
        };
        let s = t.ensure_node(fields[0]);
        let d = t.ensure_node(fields[1]);
        if s == d {
            return Err(err(col_of(0), "self-loop"));
        }
        t.add_edge(s, d, latency)?;
    }
    Ok(t)
}

fn parse_latency(text: &str) -> Option<u64> {
    let v: f64 = text.trim().parse().ok()?;
    (v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64).then_some(v as u64)
}

/// GraphML subset: `node` ids, `edge` source/target, `edgedefault`, and an
/// edge data key named `latency` or `weight` (case-insensitive). Self-loops
/// and repeated edges are dropped.
pub fn parse_graphml(text: &str) -> Result<Topology, TopologyError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let p = e.pos();
        TopologyError::Parse {
            line: p.row as usize,
            col: p.col as usize,
            msg: e.to_string(),
        }
    })?;
    let at = |n: roxmltree::Node, msg: String| {
        let p = doc.text_pos_at(n.range().start);
        TopologyError::Parse {
            line: p.row as usize,
            col: p.col as usize,
            msg,
        }
    };
    let root = doc.root_element();
    if root.tag_name().name() != "graphml" {
        return Err(at(root, "expected <graphml> root".into()));
    }
    let latency_keys: HashSet<&str> = root
        .children()
        .filter(|n| n.has_tag_name("key"))
        .filter(|n| matches!(n.attribute("for"), Some("edge") | Some("all") | None))
        .filter(|n| {
            n.attribute("attr.name")
                .is_some_and(|a| a.eq_ignore_ascii_case("latency") || a.eq_ignore_ascii_case("weight"))
        })
        .filter_map(|n| n.attribute("id"))
        .collect();
    let graph = root
        .children()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| at(root, "missing <graph>".into()))?;
    let default_undirected = graph.attribute("edgedefault") != Some("directed");

    let mut t = Topology::new();
    t.undirected = default_undirected;
    for n in graph.children().filter(|n| n.has_tag_name("node")) {
        let id = n.attribute("id").ok_or_else(|| at(n, "node without id".into()))?;
        t.add_node(id).map_err(|e| at(n, e.to_string()))?;
    }
    for e in graph.children().filter(|n| n.has_tag_name("edge")) {
        let s = e.attribute("source").ok_or_else(|| at(e, "edge without source".into()))?;
        let d = e.attribute("target").ok_or_else(|| at(e, "edge without target".into()))?;
        let s = t.node(s).map_err(|x| at(e, x.to_string()))?;
        let d = t.node(d).map_err(|x| at(e, x.to_string()))?;
        let undirected = match e.attribute("directed") {
            Some("true") => false,
            Some("false") => true,
            _ => default_undirected,
        };
        let mut latency = None;
        for data in e.children().filter(|c| c.has_tag_name("data")) {
            if data.attribute("key").is_some_and(|k| latency_keys.contains(k)) {
                let text = data.text().unwrap_or("");
                latency = Some(parse_latency(text).ok_or_else(|| at(data, format!("bad latency `{}`", text.trim())))?);
            }
        }
        if s == d {
            continue;
        }
        t.add_edge(s, d, latency)?;
        if undirected {
            t.add_edge(d, s, latency)?;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undirected_graphml_edge_becomes_two() {
        let xml = r#"<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <graph edgedefault="undirected">
    <node id="a"/><node id="b"/>
    <edge source="a" target="b"/>
  </graph>
</graphml>"#;
        let t = parse_topology(xml.as_bytes(), TopologyFormat::GraphMl).unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.edge_count(), 2);
        assert!(t.undirected);
    }

    #[test]
    fn graphml_latency_key_and_multi_edges() {
        let xml = r#"<graphml>
  <key id="d3" for="edge" attr.name="Latency" attr.type="double"/>
  <graph edgedefault="directed">
    <node id="0"/><node id="1"/>
    <edge source="0" target="1"><data key="d3">4</data></edge>
    <edge source="0" target="1"><data key="d3">9</data></edge>
    <edge source="1" target="1"/>
  </graph>
</graphml>"#;
        let t = parse_graphml(xml).unwrap();
        assert_eq!(t.edges(), &[Edge { source: 0, target: 1, latency: Some(4) }]);
    }

    #[test]
    fn graphml_errors_carry_positions() {
        let err = parse_graphml("<graphml>\n<graph><node id=\"a\"/>\n<node id=\"a\"/></graph></graphml>").unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 3, col: 1, .. }), "{err:?}");
        let err = parse_graphml("<graphml><graph>\n  <node id='a'></graph>").unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn edgelist() {
        let t = parse_edgelist("# comment\na b 3\n").unwrap();
        assert_eq!(t.edges(), &[Edge { source: 0, target: 1, latency: Some(3) }]);
        let err = parse_edgelist("a b\nc d x\n").unwrap_err();
        assert_eq!(
            err,
            TopologyError::Parse {
                line: 2,
                col: 5,
                msg: "latency must be a positive integer".into()
            }
        );
        assert!(parse_edgelist("a a\n").is_err());
    }

    #[test]
    fn routing_graph() {
        let text = "v0 v1\nv1 v0\nv0 v2\nv2 v0\nv0 v3\nv3 v0\nv1 v2\nv2 v1\nv3 v1\nv1 v3\n";
        let t = parse_edgelist(text).unwrap();
        assert_eq!((t.node_count(), t.edge_count()), (4, 10));
        assert_eq!(parse_edgelist(&t.to_edgelist()).unwrap(), t);
    }
}
