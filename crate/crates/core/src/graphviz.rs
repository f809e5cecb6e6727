//! Term graphs and Pajek `.net` interchange.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::cocluster::{CoClustering, TermDocMatrix};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("a node cannot be combined with itself (`{0}`)")]
    SameNode(String),
    #[error("node label `{0}` already exists")]
    DuplicateLabel(String),
    #[error("label {0:?} cannot be written as a Pajek vertex name")]
    InvalidLabel(String),
    #[error("pajek line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub label: String,
    pub payload: BTreeSet<String>,
    /// Set on an intersection node whose payload came out empty.
    pub empty_combination: bool,
}

impl Node {
    pub fn new(label: impl Into<String>, payload: impl IntoIterator<Item = String>) -> Self {
        Node {
            label: label.into(),
            payload: payload.into_iter().collect(),
            empty_combination: false,
        }
    }
}

/// Undirected weighted graph with unique node labels and no self-loops.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermGraph {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    Union,
    Intersection,
}

impl TermGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label == label)
    }

    pub fn add_node(&mut self, node: Node) -> Result<usize, GraphError> {
        if self.node_index(&node.label).is_some() {
            return Err(GraphError::DuplicateLabel(node.label));
        }
        self.nodes.push(node);
        Ok(self.nodes.len() - 1)
    }

    /// Adds an edge, summing weights if it already exists.
    pub fn add_edge(&mut self, a: usize, b: usize, weight: f64) {
        assert!(a != b, "self-loop");
        assert!(a < self.nodes.len() && b < self.nodes.len(), "edge endpoint out of range");
        assert!(weight > 0.0, "edge weight must be positive");
        match self
            .edges
            .iter_mut()
            .find(|(x, y, _)| (*x, *y) == (a, b) || (*x, *y) == (b, a))
        {
            Some(edge) => edge.2 += weight,
            None => self.edges.push((a, b, weight)),
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).fold(0.0, |acc, w| acc + w)
    }

    /// Total weight of edges touching `node`.
    pub fn incident_weight(&self, node: usize) -> f64 {
        self.edges
            .iter()
            .filter(|(a, b, _)| *a == node || *b == node)
            .map(|e| e.2)
            .fold(0.0, |acc, w| acc + w)
    }

    pub fn to_pajek(&self) -> Result<String, GraphError> {
        let mut out = String::new();
        let _ = writeln!(out, "*Vertices {}", self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            if node.label.contains(['"', '\n', '\r']) {
                return Err(GraphError::InvalidLabel(node.label.clone()));
            }
            let _ = writeln!(out, "{} \"{}\"", i + 1, node.label);
        }
        out.push_str("*Edges\n");
        for &(a, b, w) in &self.edges {
            let _ = writeln!(out, "{} {} {}", a + 1, b + 1, format_weight(w));
        }
        Ok(out)
    }

    pub fn parse_pajek(text: &str) -> Result<TermGraph, GraphError> {
        let err = |line: usize, message: &str| GraphError::Parse {
            line,
            message: message.to_string(),
        };
        let mut graph = TermGraph::new();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (no, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let count: usize = header
            .strip_prefix("*Vertices")
            .or_else(|| header.strip_prefix("*vertices"))
            .and_then(|rest| rest.split_whitespace().next())
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| err(no, "expected `*Vertices N`"))?;
        for expected in 1..=count {
            let (no, line) = lines.next().ok_or_else(|| err(no, "missing vertex line"))?;
            let (index, rest) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(no, "expected `i \"label\"`"))?;
            if index.parse::<usize>().ok() != Some(expected) {
                return Err(err(no, "vertex numbers must run 1..N in order"));
            }
            let rest = rest.trim_start();
            let label = rest
                .strip_prefix('"')
                .and_then(|r| r.split_once('"'))
                .map(|(label, _)| label)
                .ok_or_else(|| err(no, "vertex label must be quoted"))?;
            graph
                .add_node(Node::new(label, []))
                .map_err(|_| err(no, "duplicate vertex label"))?;
        }
        match lines.next() {
            Some((_, l)) if l.eq_ignore_ascii_case("*edges") => {}
            Some((no, _)) => return Err(err(no, "expected `*Edges`")),
            None => return Err(err(count + 2, "missing `*Edges`")),
        }
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let endpoint = |s: &str| {
                s.parse::<usize>()
                    .ok()
                    .filter(|&v| (1..=count).contains(&v))
                    .map(|v| v - 1)
                    .ok_or_else(|| err(no, "edge endpoint out of range"))
            };
            if fields.len() < 2 {
                return Err(err(no, "expected `i j w`"));
            }
            let a = endpoint(fields[0])?;
            let b = endpoint(fields[1])?;
            let w: f64 = match fields.get(2) {
                Some(w) => w.parse().map_err(|_| err(no, "bad edge weight"))?,
                None => 1.0,
            };
            if a == b || w.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(err(no, "self-loop or non-positive weight"));
            }
            graph.edges.push((a, b, w));
        }
        Ok(graph)
    }
}

/// Shortest decimal that round-trips; integral values print without a
/// decimal point.
pub fn format_weight(w: f64) -> String {
    format!("{w}")
}

pub fn export_pajek(g: &TermGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    fs::write(path, g.to_pajek()?).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Star graph around `term`: one neighbor per co-occurring term, weighted by
/// the number of shared documents, carrying those documents as payload.
pub fn ego_network(m: &TermDocMatrix, term: &str) -> Result<TermGraph, GraphError> {
    let center = m
        .term_index(term)
        .ok_or_else(|| GraphError::UnknownTerm(term.to_string()))?;
    let support: Vec<BTreeSet<usize>> = (0..m.n_terms())
        .map(|i| m.counts().row(i).map(|(j, _)| j).collect())
        .collect();
    let doc_names = |docs: &BTreeSet<usize>| docs.iter().map(|&j| m.docs()[j].clone()).collect::<Vec<_>>();

    let mut g = TermGraph::new();
    g.add_node(Node::new(term, doc_names(&support[center])))?;
    for (i, docs) in support.iter().enumerate() {
        if i == center {
            continue;
        }
        let shared: BTreeSet<usize> = docs.intersection(&support[center]).copied().collect();
        if shared.is_empty() {
            continue;
        }
        let node = g.add_node(Node::new(m.terms()[i].clone(), doc_names(&shared)))?;
        g.add_edge(0, node, shared.len() as f64);
    }
    Ok(g)
}

/// One node per cluster (`cluster1`, ...) holding its documents; edges carry
/// the matrix mass linking words of one cluster to documents of another.
pub fn cluster_graph(m: &TermDocMatrix, result: &CoClustering) -> TermGraph {
    let mut g = TermGraph::new();
    for (c, docs) in result.doc_clusters().into_iter().enumerate() {
        g.add_node(Node::new(
            format!("cluster{}", c + 1),
            docs.into_iter().map(|j| m.docs()[j].clone()),
        ))
        .expect("cluster labels are unique");
    }
    let mut mass: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, j, a) in m.counts().entries() {
        let (x, y) = (result.word_labels[i], result.doc_labels[j]);
        if x != y {
            *mass.entry((x.min(y), x.max(y))).or_default() += a;
        }
    }
    for ((a, b), w) in mass {
        g.add_edge(a, b, w);
    }
    g
}

/// Replaces nodes `a` and `b` by their union (`a+b`) or intersection
/// (`a·b`). Edges move to the new node, colliding weights are summed and any
/// `a`-`b` edge disappears.
pub fn combine_nodes(g: &TermGraph, a: &str, b: &str, mode: CombineMode) -> Result<TermGraph, GraphError> {
    if a == b {
        return Err(GraphError::SameNode(a.to_string()));
    }
    let ia = g.node_index(a).ok_or_else(|| GraphError::UnknownNode(a.to_string()))?;
    let ib = g.node_index(b).ok_or_else(|| GraphError::UnknownNode(b.to_string()))?;
    let (na, nb) = (&g.nodes[ia], &g.nodes[ib]);
    let (label, payload): (String, BTreeSet<String>) = match mode {
        CombineMode::Union => (
            format!("{a}+{b}"),
            na.payload.union(&nb.payload).cloned().collect(),
        ),
        CombineMode::Intersection => (
            format!("{a}·{b}"),
            na.payload.intersection(&nb.payload).cloned().collect(),
        ),
    };
    if g.node_index(&label).is_some() {
        return Err(GraphError::DuplicateLabel(label));
    }
    let merged_at = ia.min(ib);
    let mut out = TermGraph::new();
    let mut remap = vec![usize::MAX; g.nodes.len()];
    for (i, node) in g.nodes.iter().enumerate() {
        if i == merged_at {
            remap[ia] = out.nodes.len();
            remap[ib] = out.nodes.len();
            out.nodes.push(Node {
                label: label.clone(),
                empty_combination: mode == CombineMode::Intersection && payload.is_empty(),
                payload: payload.clone(),
            });
        } else if i != ia && i != ib {
            remap[i] = out.nodes.len();
            out.nodes.push(node.clone());
        }
    }
    for &(x, y, w) in &g.edges {
        let (x, y) = (remap[x], remap[y]);
        if x != y {
            out.add_edge(x, y, w);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn two_node_file() {
        let mut g = TermGraph::new();
        let a = g.add_node(Node::new("a", [])).unwrap();
        let b = g.add_node(Node::new("b", [])).unwrap();
        g.add_edge(a, b, 1.0);
        assert_eq!(g.to_pajek().unwrap(), "*Vertices 2\n1 \"a\"\n2 \"b\"\n*Edges\n1 2 1\n");
    }

    #[test]
    fn empty_graph_file() {
        assert_eq!(TermGraph::new().to_pajek().unwrap(), "*Vertices 0\n*Edges\n");
    }

    #[test]
    fn weights_print_minimally() {
        assert_eq!(format_weight(3.0), "3");
        assert_eq!(format_weight(0.5), "0.5");
        assert_eq!(format_weight(2.25), "2.25");
    }

    #[test]
    fn parse_round_trip() {
        let text = "*Vertices 3\n1 \"port\"\n2 \"quay side\"\n3 \"ship\"\n*Edges\n1 2 2\n2 3 0.5\n";
        let g = TermGraph::parse_pajek(text).unwrap();
        assert_eq!(g.nodes()[1].label, "quay side");
        assert_eq!(g.edges(), [(0, 1, 2.0), (1, 2, 0.5)]);
        assert_eq!(g.to_pajek().unwrap(), text);
    }

    #[test]
    fn quoted_labels_refused() {
        let mut g = TermGraph::new();
        g.add_node(Node::new("say \"hi\"", [])).unwrap();
        assert!(matches!(g.to_pajek(), Err(GraphError::InvalidLabel(_))));
    }

    fn pair_graph() -> TermGraph {
        let mut g = TermGraph::new();
        let a = g.add_node(Node::new("a", docs(&["d1", "d2"]))).unwrap();
        let b = g.add_node(Node::new("b", docs(&["d2", "d3"]))).unwrap();
        let c = g.add_node(Node::new("c", docs(&["d9"]))).unwrap();
        g.add_edge(a, b, 1.0);
        g.add_edge(a, c, 2.0);
        g.add_edge(b, c, 3.0);
        g
    }

    #[test]
    fn union_and_intersection() {
        let g = pair_graph();
        let u = combine_nodes(&g, "a", "b", CombineMode::Union).unwrap();
        assert_eq!(u.nodes()[0].label, "a+b");
        assert_eq!(u.nodes()[0].payload, docs(&["d1", "d2", "d3"]).into_iter().collect());
        assert_eq!(u.edges(), [(0, 1, 5.0)]);

        let i = combine_nodes(&g, "a", "b", CombineMode::Intersection).unwrap();
        assert_eq!(i.nodes()[0].label, "a·b");
        assert_eq!(i.nodes()[0].payload, docs(&["d2"]).into_iter().collect());
        assert!(!i.nodes()[0].empty_combination);
    }

    #[test]
    fn empty_intersection_is_flagged() {
        let g = pair_graph();
        let i = combine_nodes(&g, "a", "c", CombineMode::Intersection).unwrap();
        let node = &i.nodes()[i.node_index("a·c").unwrap()];
        assert!(node.payload.is_empty());
        assert!(node.empty_combination);
    }

    #[test]
    fn combine_errors() {
        let g = pair_graph();
        assert!(matches!(
            combine_nodes(&g, "a", "zz", CombineMode::Union),
            Err(GraphError::UnknownNode(_))
        ));
        assert!(matches!(
            combine_nodes(&g, "a", "a", CombineMode::Union),
            Err(GraphError::SameNode(_))
        ));
    }

    fn m_star_with_w5() -> TermDocMatrix {
        TermDocMatrix::from_dense(&[
            vec![2.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn ego_of_first_block_term() {
        let g = ego_network(&m_star_with_w5(), "w1").unwrap();
        let labels: Vec<&str> = g.nodes().iter().map(|n| n.label.as_str()).collect();
        assert_eq!(labels, ["w1", "w2", "w5"]);
        assert_eq!(g.edges(), [(0, 1, 1.0), (0, 2, 1.0)]);
        assert_eq!(g.nodes()[1].payload, docs(&["d1"]).into_iter().collect());
    }

    #[test]
    fn isolated_ego_and_unknown_term() {
        let m = TermDocMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let g = ego_network(&m, "w1").unwrap();
        assert_eq!(g.nodes().len(), 1);
        assert!(g.edges().is_empty());
        assert!(matches!(ego_network(&m, "zz"), Err(GraphError::UnknownTerm(_))));
    }
}
