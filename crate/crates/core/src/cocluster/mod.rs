//! Bipartite spectral co-clustering of terms and documents.
//!
//! The count matrix is degree-normalized, its leading nontrivial singular
//! vectors give a joint embedding of terms and documents, k-means groups the
//! embedded vertices, and the word/document duality rules turn the groups
//! into paired clusters:
//!
//! * a word joins the cluster whose documents hold most of its mass;
//! * a document joins the cluster whose words hold most of its mass.

mod cut;
mod kmeans;
mod matrix;
mod svd;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cut::{brute_force_min_ratio_cut, ratio_cut, BipartiteGraph, MinRatioCut, BRUTE_FORCE_LIMIT};
pub use kmeans::{kmeans_partition, MAX_LLOYD_ITERATIONS, RESTARTS};
pub use matrix::{build_matrix, normalize_matrix, NormalizedMatrix, SparseMatrix, TermDocMatrix};
pub use svd::{
    embedding_dimensions, nontrivial_singular_pairs, spectral_embed, SingularTriplet,
    SpectralEmbedding, MAX_ITERATIONS, VALUE_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum CoclusterError {
    #[error("matrix is empty after pruning zero rows and columns")]
    EmptyMatrix,
    #[error("negative or non-finite count {value} for term `{term}` in `{doc}`")]
    NegativeEntry { term: String, doc: String, value: f64 },
    #[error("zero degree for `{0}`")]
    ZeroDegree(String),
    #[error("k = {k} is outside 1..={max}")]
    InvalidK { k: usize, max: usize },
    #[error("singular vectors did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("a side of the partition is empty")]
    EmptySide,
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("{vertices} vertices exceed the exhaustive search limit of {limit}")]
    TooLarge { vertices: usize, limit: usize },
}

// Relative slack under which two cluster sums count as equal, so that
// rounding in the sums cannot break a tie differently after rescaling.
const TIE_EPSILON: f64 = 1e-12;

fn argmax_first(sums: &[f64]) -> usize {
    let mut best = 0;
    for (m, &s) in sums.iter().enumerate().skip(1) {
        if s > sums[best] + TIE_EPSILON * sums[best].abs().max(s.abs()) {
            best = m;
        }
    }
    best
}

fn check_labels(labels: &[usize], len: usize, k: usize, what: &str) -> Result<(), CoclusterError> {
    if labels.len() != len {
        return Err(CoclusterError::NotAPartition(format!(
            "{} {what} labels for {len} {what}s",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(CoclusterError::NotAPartition(format!(
            "{what} cluster {bad} is outside 0..{k}"
        )));
    }
    Ok(())
}

/// Each word goes to the cluster whose documents carry the largest share of
/// its counts; ties go to the lowest cluster index. Labels are 0-based.
pub fn assign_word_clusters(
    m: &TermDocMatrix,
    doc_labels: &[usize],
    k: usize,
) -> Result<Vec<usize>, CoclusterError> {
    check_labels(doc_labels, m.n_docs(), k, "document")?;
    Ok((0..m.n_terms())
        .map(|i| {
            let mut sums = vec![0.0; k];
            for (j, a) in m.counts().row(i) {
                sums[doc_labels[j]] += a;
            }
            argmax_first(&sums)
        })
        .collect())
}

/// Each document goes to the cluster whose words carry the largest share of
/// its counts; ties go to the lowest cluster index.
pub fn assign_doc_clusters(
    m: &TermDocMatrix,
    word_labels: &[usize],
    k: usize,
) -> Result<Vec<usize>, CoclusterError> {
    check_labels(word_labels, m.n_terms(), k, "word")?;
    let mut sums = vec![vec![0.0; k]; m.n_docs()];
    for (i, j, a) in m.counts().entries() {
        sums[j][word_labels[i]] += a;
    }
    Ok(sums.iter().map(|s| argmax_first(s)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoclusterConfig {
    pub k: usize,
    pub seed: u64,
    /// Word-then-document reassignment passes after k-means.
    pub refine_passes: usize,
}

impl CoclusterConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        CoclusterConfig {
            k,
            seed,
            refine_passes: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoClustering {
    /// Number of clusters actually produced.
    pub k: usize,
    /// 0-based cluster per matrix row.
    pub word_labels: Vec<usize>,
    /// 0-based cluster per matrix column.
    pub doc_labels: Vec<usize>,
    /// Coordinates of terms followed by documents.
    pub embedding: Vec<Vec<f64>>,
    pub dimensions: usize,
    pub singular_values: Vec<f64>,
    /// k-means groups (0-based) dropped because they held no document.
    pub dropped_groups: Vec<usize>,
}

impl CoClustering {
    pub fn word_clusters(&self) -> Vec<Vec<usize>> {
        members(&self.word_labels, self.k)
    }

    pub fn doc_clusters(&self) -> Vec<Vec<usize>> {
        members(&self.doc_labels, self.k)
    }

    /// Vertex sets of the two sides when exactly two clusters remain, using
    /// the vertex numbering of [`BipartiteGraph`].
    pub fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        if self.k != 2 {
            return None;
        }
        let mut sides = (Vec::new(), Vec::new());
        let labels = self.word_labels.iter().chain(&self.doc_labels);
        for (v, &l) in labels.enumerate() {
            if l == 0 { &mut sides.0 } else { &mut sides.1 }.push(v);
        }
        Some(sides)
    }
}

fn members(labels: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        out[l].push(i);
    }
    out
}

/// Renumbers clusters by first document, then first word, removing clusters
/// that ended up with neither.
fn canonical_relabel(word_labels: &mut [usize], doc_labels: &mut [usize], k: usize) -> usize {
    let mut order: Vec<usize> = Vec::with_capacity(k);
    for &l in doc_labels.iter().chain(word_labels.iter()) {
        if !order.contains(&l) {
            order.push(l);
        }
    }
    let mut map = vec![usize::MAX; k];
    for (new, &old) in order.iter().enumerate() {
        map[old] = new;
    }
    word_labels.iter_mut().for_each(|l| *l = map[*l]);
    doc_labels.iter_mut().for_each(|l| *l = map[*l]);
    order.len()
}

pub fn cocluster(m: &TermDocMatrix, config: &CoclusterConfig) -> Result<CoClustering, CoclusterError> {
    let max = m.n_terms().min(m.n_docs());
    let k = config.k;
    if k == 0 || (k > 1 && k > max) {
        return Err(CoclusterError::InvalidK { k, max });
    }
    let n_vertices = m.n_terms() + m.n_docs();
    if k == 1 {
        return Ok(CoClustering {
            k: 1,
            word_labels: vec![0; m.n_terms()],
            doc_labels: vec![0; m.n_docs()],
            embedding: vec![vec![0.0]; n_vertices],
            dimensions: 1,
            singular_values: Vec::new(),
            dropped_groups: Vec::new(),
        });
    }

    let an = normalize_matrix(m)?;
    let emb = spectral_embed(&an, k)?;
    let embedding: Vec<Vec<f64>> = emb
        .term_coords
        .iter()
        .chain(&emb.doc_coords)
        .cloned()
        .collect();
    let groups = kmeans_partition(&embedding, k, config.seed);
    let doc_groups = &groups[m.n_terms()..];

    let mut kept: Vec<usize> = Vec::new();
    for &g in doc_groups {
        if !kept.contains(&g) {
            kept.push(g);
        }
    }
    let dropped_groups: Vec<usize> = (0..k).filter(|g| !kept.contains(g)).collect();
    let mut k_eff = kept.len();
    let mut doc_labels: Vec<usize> = doc_groups
        .iter()
        .map(|g| kept.iter().position(|x| x == g).unwrap())
        .collect();

    let mut word_labels = Vec::new();
    for _ in 0..config.refine_passes.max(1) {
        word_labels = assign_word_clusters(m, &doc_labels, k_eff)?;
        doc_labels = assign_doc_clusters(m, &word_labels, k_eff)?;
    }
    k_eff = canonical_relabel(&mut word_labels, &mut doc_labels, k_eff);

    Ok(CoClustering {
        k: k_eff,
        word_labels,
        doc_labels,
        embedding,
        dimensions: emb.dimensions,
        singular_values: emb.pairs.iter().map(|p| p.value).collect(),
        dropped_groups,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub id: usize,
    pub words: Vec<String>,
    pub docs: Vec<String>,
}

/// JSON cluster report. Cluster ids are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    pub clusters: Vec<ClusterEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ratio_cut_2way: Option<f64>,
    pub dropped_groups: Vec<usize>,
}

impl ClusterReport {
    pub fn new(m: &TermDocMatrix, result: &CoClustering) -> Self {
        let clusters = result
            .word_clusters()
            .into_iter()
            .zip(result.doc_clusters())
            .enumerate()
            .map(|(c, (words, docs))| ClusterEntry {
                id: c + 1,
                words: words.into_iter().map(|i| m.terms()[i].clone()).collect(),
                docs: docs.into_iter().map(|j| m.docs()[j].clone()).collect(),
            })
            .collect();
        let ratio_cut_2way = result.bipartition().and_then(|(v1, v2)| {
            ratio_cut(&BipartiteGraph::from_matrix(m), &v1, &v2).ok()
        });
        ClusterReport {
            k: result.k,
            clusters,
            ratio_cut_2way,
            dropped_groups: result.dropped_groups.iter().map(|g| g + 1).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
