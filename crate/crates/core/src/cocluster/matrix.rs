use std::collections::HashMap;

use crate::agents::{IndexedDocument, Routing, TermStatus};
use crate::lexicon::Vocabulary;

use super::CoclusterError;

/// Compressed sparse row storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        };
        m.drop_zeros();
        m
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let triplets: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                assert_eq!(r.len(), cols, "ragged dense matrix");
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(move |(j, &v)| (i, j, v))
            })
            .collect();
        Self::from_triplets(rows.len(), cols, &triplets)
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut row_ptr = vec![0; self.rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr[i + 1] = values.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(at) => self.values[span.start + at],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (i, j, v) in self.entries() {
            out[i][j] = v;
        }
        out
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `y = Aᵀ x`
    pub fn mul_t_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (i, j, v) in self.entries() {
            y[j] += v * x[i];
        }
        y
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for (_, j, v) in self.entries() {
            sums[j] += v;
        }
        sums
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SparseMatrix {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    fn map_entries(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                values.push(f(i, j, v));
            }
        }
        SparseMatrix {
            values,
            ..self.clone()
        }
    }
}

/// Term × document count matrix with its degree vectors. Rows and columns
/// without any nonzero entry are pruned at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocMatrix {
    terms: Vec<String>,
    docs: Vec<String>,
    counts: SparseMatrix,
    row_degrees: Vec<f64>,
    col_degrees: Vec<f64>,
    pruned_terms: Vec<String>,
    pruned_docs: Vec<String>,
}

impl TermDocMatrix {
    pub fn new(
        terms: Vec<String>,
        docs: Vec<String>,
        counts: SparseMatrix,
    ) -> Result<Self, CoclusterError> {
        assert_eq!(terms.len(), counts.rows());
        assert_eq!(docs.len(), counts.cols());
        if let Some((i, j, v)) = counts.entries().find(|&(_, _, v)| !(v >= 0.0 && v.is_finite())) {
            return Err(CoclusterError::NegativeEntry {
                term: terms[i].clone(),
                doc: docs[j].clone(),
                value: v,
            });
        }
        let row_sums = counts.row_sums();
        let col_sums = counts.col_sums();
        let keep_rows: Vec<usize> = (0..terms.len()).filter(|&i| row_sums[i] > 0.0).collect();
        let keep_cols: Vec<usize> = (0..docs.len()).filter(|&j| col_sums[j] > 0.0).collect();
        if keep_rows.is_empty() || keep_cols.is_empty() {
            return Err(CoclusterError::EmptyMatrix);
        }
        let pruned_terms = (0..terms.len())
            .filter(|&i| row_sums[i] <= 0.0)
            .map(|i| terms[i].clone())
            .collect();
        let pruned_docs = (0..docs.len())
            .filter(|&j| col_sums[j] <= 0.0)
            .map(|j| docs[j].clone())
            .collect();

        let mut row_map = vec![usize::MAX; terms.len()];
        for (new, &old) in keep_rows.iter().enumerate() {
            row_map[old] = new;
        }
        let mut col_map = vec![usize::MAX; docs.len()];
        for (new, &old) in keep_cols.iter().enumerate() {
            col_map[old] = new;
        }
        let triplets: Vec<_> = counts
            .entries()
            .map(|(i, j, v)| (row_map[i], col_map[j], v))
            .collect();
        let counts = SparseMatrix::from_triplets(keep_rows.len(), keep_cols.len(), &triplets);
        Ok(TermDocMatrix {
            terms: keep_rows.iter().map(|&i| terms[i].clone()).collect(),
            docs: keep_cols.iter().map(|&j| docs[j].clone()).collect(),
            row_degrees: counts.row_sums(),
            col_degrees: counts.col_sums(),
            counts,
            pruned_terms,
            pruned_docs,
        })
    }

    /// Convenience constructor from dense rows with generated labels
    /// `w1..` and `d1..`.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, CoclusterError> {
        let counts = SparseMatrix::from_dense(rows);
        let terms = (1..=counts.rows()).map(|i| format!("w{i}")).collect();
        let docs = (1..=counts.cols()).map(|j| format!("d{j}")).collect();
        Self::new(terms, docs, counts)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn docs(&self) -> &[String] {
        &self.docs
    }

    pub fn counts(&self) -> &SparseMatrix {
        &self.counts
    }

    pub fn row_degrees(&self) -> &[f64] {
        &self.row_degrees
    }

    pub fn col_degrees(&self) -> &[f64] {
        &self.col_degrees
    }

    pub fn pruned_terms(&self) -> &[String] {
        &self.pruned_terms
    }

    pub fn pruned_docs(&self) -> &[String] {
        &self.pruned_docs
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.terms.iter().position(|t| t == term)
    }

    /// Same labels, every count multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0);
        let counts = self.counts.scaled(factor);
        TermDocMatrix {
            row_degrees: counts.row_sums(),
            col_degrees: counts.col_sums(),
            counts,
            ..self.clone()
        }
    }
}

/// Rows restricted to the vocabulary, columns to documents routed `Index`.
pub fn build_matrix(
    vocab: &Vocabulary,
    indexed_docs: &[IndexedDocument],
) -> Result<TermDocMatrix, CoclusterError> {
    let row_of: HashMap<&str, usize> = vocab
        .terms()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let docs: Vec<&IndexedDocument> = indexed_docs
        .iter()
        .filter(|d| d.routing == Routing::Index)
        .collect();
    if vocab.is_empty() || docs.is_empty() {
        return Err(CoclusterError::EmptyMatrix);
    }
    let mut triplets = Vec::new();
    for (j, doc) in docs.iter().enumerate() {
        for (term, entry) in &doc.terms {
            if entry.status == TermStatus::Rejected {
                continue;
            }
            if let Some(&i) = row_of.get(term.as_str()) {
                triplets.push((i, j, entry.count as f64));
            }
        }
    }
    TermDocMatrix::new(
        vocab.terms().to_vec(),
        docs.iter().map(|d| d.doc_id.clone()).collect(),
        SparseMatrix::from_triplets(vocab.len(), docs.len(), &triplets),
    )
}

/// Degree-normalized matrix `D1^(-1/2) A D2^(-1/2)`.
#[derive(Debug, Clone)]
pub struct NormalizedMatrix {
    values: SparseMatrix,
    row_sqrt_degrees: Vec<f64>,
    col_sqrt_degrees: Vec<f64>,
}

impl NormalizedMatrix {
    pub fn values(&self) -> &SparseMatrix {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn row_sqrt_degrees(&self) -> &[f64] {
        &self.row_sqrt_degrees
    }

    pub fn col_sqrt_degrees(&self) -> &[f64] {
        &self.col_sqrt_degrees
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }
}

pub fn normalize_matrix(m: &TermDocMatrix) -> Result<NormalizedMatrix, CoclusterError> {
    if let Some(i) = m.row_degrees.iter().position(|&d| d <= 0.0) {
        return Err(CoclusterError::ZeroDegree(m.terms[i].clone()));
    }
    if let Some(j) = m.col_degrees.iter().position(|&d| d <= 0.0) {
        return Err(CoclusterError::ZeroDegree(m.docs[j].clone()));
    }
    let values = m
        .counts
        .map_entries(|i, j, a| a / (m.row_degrees[i] * m.col_degrees[j]).sqrt());
    Ok(NormalizedMatrix {
        values,
        row_sqrt_degrees: m.row_degrees.iter().map(|d| d.sqrt()).collect(),
        col_sqrt_degrees: m.col_degrees.iter().map(|d| d.sqrt()).collect(),
    })
}
