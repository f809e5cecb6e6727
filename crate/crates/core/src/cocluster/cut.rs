//! Ratio-cut objective on the term-document bipartite graph.

use std::cmp::Ordering;

use super::matrix::TermDocMatrix;
use super::CoclusterError;

pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Vertices `0..n_terms` are terms, `n_terms..n_terms + n_docs` documents.
/// Every edge joins a term to a document.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    term_labels: Vec<String>,
    doc_labels: Vec<String>,
    edges: Vec<(usize, usize, f64)>,
}

impl BipartiteGraph {
    /// `edges` are `(term, doc, weight)`; non-positive weights are ignored.
    pub fn new(term_labels: Vec<String>, doc_labels: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|&(i, j, w)| {
                assert!(i < term_labels.len() && j < doc_labels.len(), "edge out of range");
                w > 0.0
            })
            .collect();
        BipartiteGraph {
            term_labels,
            doc_labels,
            edges,
        }
    }

    pub fn from_matrix(m: &TermDocMatrix) -> Self {
        Self::new(
            m.terms().to_vec(),
            m.docs().to_vec(),
            m.counts().entries().collect(),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.term_labels.len() + self.doc_labels.len()
    }

    pub fn n_terms(&self) -> usize {
        self.term_labels.len()
    }

    pub fn term_vertex(&self, term: usize) -> usize {
        term
    }

    pub fn doc_vertex(&self, doc: usize) -> usize {
        self.term_labels.len() + doc
    }

    pub fn label(&self, vertex: usize) -> &str {
        match vertex.checked_sub(self.term_labels.len()) {
            None => &self.term_labels[vertex],
            Some(d) => &self.doc_labels[d],
        }
    }

    /// Edges as `(term vertex, doc vertex, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges
            .iter()
            .map(|&(i, j, w)| (i, self.doc_vertex(j), w))
    }

    fn cut_weight(&self, side: &[bool]) -> f64 {
        self.edges()
            .filter(|&(a, b, _)| side[a] != side[b])
            .map(|(_, _, w)| w)
            .fold(0.0, |acc, w| acc + w)
    }
}

fn membership(g: &BipartiteGraph, v1: &[usize], v2: &[usize]) -> Result<Vec<bool>, CoclusterError> {
    let n = g.vertex_count();
    if v1.is_empty() || v2.is_empty() {
        return Err(CoclusterError::EmptySide);
    }
    let mut seen = vec![0u8; n];
    for &v in v1.iter().chain(v2) {
        if v >= n {
            return Err(CoclusterError::NotAPartition(format!("vertex {v} out of range")));
        }
        seen[v] += 1;
    }
    if let Some(v) = seen.iter().position(|&c| c != 1) {
        return Err(CoclusterError::NotAPartition(format!(
            "vertex `{}` appears {} times",
            g.label(v),
            seen[v]
        )));
    }
    let mut side = vec![false; n];
    v1.iter().for_each(|&v| side[v] = true);
    Ok(side)
}

/// `cut/|V1| + cut/|V2|`
pub fn ratio_cut(g: &BipartiteGraph, v1: &[usize], v2: &[usize]) -> Result<f64, CoclusterError> {
    let side = membership(g, v1, v2)?;
    let cut = g.cut_weight(&side);
    Ok(cut / v1.len() as f64 + cut / v2.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinRatioCut {
    /// Side 1 vertices, in increasing vertex order.
    pub side: Vec<usize>,
    pub value: f64,
}

/// Exhaustive minimum over all two-sided partitions. Among equal values the
/// side whose sorted label list is lexicographically smallest wins.
pub fn brute_force_min_ratio_cut(g: &BipartiteGraph) -> Result<MinRatioCut, CoclusterError> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(CoclusterError::TooLarge {
            vertices: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n < 2 {
        return Err(CoclusterError::EmptySide);
    }
    let edges: Vec<(usize, usize, f64)> = g.edges().collect();
    let sorted_labels = |mask: u32| {
        let mut labels: Vec<&str> = (0..n).filter(|v| mask >> v & 1 == 1).map(|v| g.label(v)).collect();
        labels.sort_unstable();
        labels
    };

    let full = (1u32 << n) - 1;
    let mut best_mask = 0u32;
    let mut best_value = f64::INFINITY;
    for mask in 1..full {
        let cut: f64 = edges
            .iter()
            .filter(|&&(a, b, _)| (mask >> a & 1) != (mask >> b & 1))
            .map(|&(_, _, w)| w)
            .fold(0.0, |acc, w| acc + w);
        let size = mask.count_ones() as f64;
        let value = cut / size + cut / (n as f64 - size);
        let tie = best_value.is_finite()
            && (value - best_value).abs() <= 1e-12 * best_value.abs().max(1.0);
        let better = match (value < best_value, tie) {
            (_, true) => sorted_labels(mask).cmp(&sorted_labels(best_mask)) == Ordering::Less,
            (true, false) => true,
            (false, false) => false,
        };
        if better {
            best_mask = mask;
            best_value = value;
        }
    }
    Ok(MinRatioCut {
        side: (0..n).filter(|v| best_mask >> v & 1 == 1).collect(),
        value: best_value,
    })
}
