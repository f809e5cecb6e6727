#![allow(dead_code)]

use std::path::PathBuf;

use coindex::cocluster::{SparseMatrix, TermDocMatrix};
use coindex::corpus::Document;
use coindex::graphviz::{Node, TermGraph};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn mini_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mini")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub const M_STAR: [[f64; 3]; 4] = [
    [2.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 3.0, 1.0],
    [0.0, 1.0, 2.0],
];

pub fn m_star() -> TermDocMatrix {
    let rows: Vec<Vec<f64>> = M_STAR.iter().map(|r| r.to_vec()).collect();
    TermDocMatrix::from_dense(&rows).unwrap()
}

pub fn labelled(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Dense matrix with every row and column nonzero.
pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; cols]; rows];
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            if rng.gen_bool(density) {
                *x = rng.gen_range(1..=5) as f64;
            }
        }
    }
    for i in 0..rows {
        if a[i].iter().all(|&x| x == 0.0) {
            let j = rng.gen_range(0..cols);
            a[i][j] = rng.gen_range(1..=5) as f64;
        }
    }
    for j in 0..cols {
        if (0..rows).all(|i| a[i][j] == 0.0) {
            let i = rng.gen_range(0..rows);
            a[i][j] = rng.gen_range(1..=5) as f64;
        }
    }
    a
}

pub fn matrix(a: &[Vec<f64>]) -> TermDocMatrix {
    TermDocMatrix::from_dense(a).unwrap()
}

/// Planted block model: `blocks` diagonal blocks of `size × size` counts
/// plus off-block noise totalling at most `noise` of the overall mass.
/// Returns the matrix and the planted row/column labels.
pub fn planted_blocks(rng: &mut ChaCha8Rng, blocks: usize, size: usize, noise: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let n = blocks * size;
    let block_of: Vec<usize> = (0..n).map(|i| i / size).collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if block_of[i] == block_of[j] && rng.gen_bool(0.6) {
                a[i][j] = rng.gen_range(1..=4) as f64;
            }
        }
        // keep every row and column inside its own block
        let j = block_of[i] * size + i % size;
        if a[i][j] == 0.0 {
            a[i][j] = 1.0;
        }
    }
    let mass: f64 = a.iter().flatten().sum();
    let budget = (noise * mass / (1.0 - noise)).floor() as usize;
    for _ in 0..budget {
        loop {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if block_of[i] != block_of[j] {
                a[i][j] += 1.0;
                break;
            }
        }
    }
    (a, block_of)
}

/// Fraction of items whose label agrees with `truth` under the best
/// relabeling of `k` clusters.
pub fn best_agreement(labels: &[usize], truth: &[usize], k: usize) -> f64 {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0;
    permutations(&mut perm, 0, &mut |p| {
        let hits = labels
            .iter()
            .zip(truth)
            .filter(|(&l, &t)| l < k && p[l] == t)
            .count();
        best = best.max(hits);
    });
    best as f64 / truth.len() as f64
}

fn permutations(p: &mut Vec<usize>, start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permutations(p, start + 1, visit);
        p.swap(start, i);
    }
}

/// Two connected components, so the graph has a zero-cut split and exactly
/// one. At most `max_vertices` vertices in total.
pub fn two_component_matrix(rng: &mut ChaCha8Rng, max_vertices: usize) -> TermDocMatrix {
    let total = rng.gen_range(4..=max_vertices);
    let first = rng.gen_range(2..=total - 2);
    let sizes = [first, total - first];
    let mut terms_per = [0; 2];
    let mut docs_per = [0; 2];
    for c in 0..2 {
        terms_per[c] = rng.gen_range(1..sizes[c]);
        docs_per[c] = sizes[c] - terms_per[c];
    }
    let n_terms = terms_per[0] + terms_per[1];
    let n_docs = docs_per[0] + docs_per[1];
    let mut triplets = Vec::new();
    let (mut t0, mut d0) = (0, 0);
    for c in 0..2 {
        let terms: Vec<usize> = (t0..t0 + terms_per[c]).collect();
        let docs: Vec<usize> = (d0..d0 + docs_per[c]).collect();
        // random spanning tree over the component's vertices
        let mut order: Vec<(bool, usize)> = terms
            .iter()
            .map(|&t| (true, t))
            .chain(docs.iter().map(|&d| (false, d)))
            .collect();
        order.shuffle(rng);
        let first_term = order.iter().position(|v| v.0).unwrap();
        let first_doc = order.iter().position(|v| !v.0).unwrap();
        let mut placed_terms = vec![order[first_term].1];
        let mut placed_docs = vec![order[first_doc].1];
        let weight = |rng: &mut ChaCha8Rng| rng.gen_range(1..=4) as f64;
        triplets.push((placed_terms[0], placed_docs[0], weight(rng)));
        for (idx, &(is_term, v)) in order.iter().enumerate() {
            if idx == first_term || idx == first_doc {
                continue;
            }
            if is_term {
                let d = *placed_docs.choose(rng).unwrap();
                triplets.push((v, d, weight(rng)));
                placed_terms.push(v);
            } else {
                let t = *placed_terms.choose(rng).unwrap();
                triplets.push((t, v, weight(rng)));
                placed_docs.push(v);
            }
        }
        for &t in &terms {
            for &d in &docs {
                if rng.gen_bool(0.3) {
                    triplets.push((t, d, weight(rng)));
                }
            }
        }
        t0 += terms_per[c];
        d0 += docs_per[c];
    }
    // shuffle vertex order so components are interleaved
    let mut term_perm: Vec<usize> = (0..n_terms).collect();
    let mut doc_perm: Vec<usize> = (0..n_docs).collect();
    term_perm.shuffle(rng);
    doc_perm.shuffle(rng);
    let triplets: Vec<(usize, usize, f64)> = triplets
        .into_iter()
        .map(|(t, d, w)| (term_perm[t], doc_perm[d], w))
        .collect();
    TermDocMatrix::new(
        labelled("t", n_terms),
        labelled("d", n_docs),
        SparseMatrix::from_triplets(n_terms, n_docs, &triplets),
    )
    .unwrap()
}

const WORDS: &[&str] = &[
    "harbor", "Harbors", "port", "ports.", "Vessel", "vessels,", "ships", "cargo", "freight", "dock",
    "docks", "wharf", "cranes", "Columbus", "colon", "America", "americas", "Spain", "voyage",
    "expeditions", "the", "The", "of", "and", "in", "a", "an", "loading", "unloaded", "containers",
    "cities", "classes", "NOAA", "UNESCO", "St.", "st.", "http://example.org", "and/or", "X9",
    "b2b", "1492", "2009,", "...", "(quay)", "\"pier\"", "I", "é", "Ñandú", "straße", "ports'",
];

pub fn random_text(rng: &mut ChaCha8Rng, words: usize) -> String {
    let seps = [" ", "  ", "\n", "\t", " "];
    let mut text = String::new();
    for i in 0..words {
        if i > 0 {
            text.push_str(seps.choose(rng).unwrap());
        }
        if rng.gen_bool(0.1) {
            let len = rng.gen_range(1..8);
            text.extend((0..len).map(|_| rng.gen_range(b'a'..=b'z') as char));
        } else {
            text.push_str(WORDS.choose(rng).unwrap());
        }
    }
    text
}

pub fn random_documents(rng: &mut ChaCha8Rng, n: usize, years: std::ops::RangeInclusive<i32>) -> Vec<Document> {
    (0..n)
        .map(|i| {
            let words = rng.gen_range(0..40);
            Document {
                id: format!("r{i:04}"),
                title: format!("random {i}"),
                year: rng.gen_range(years.clone()),
                text: random_text(rng, words),
            }
        })
        .collect()
}

const LABEL_CHARS: &[char] = &['a', 'b', 'z', 'Q', '0', '7', ' ', '-', '_', '+', '·', 'é', 'ß', '中', '\'', '/'];

pub fn random_graph(rng: &mut ChaCha8Rng) -> TermGraph {
    let mut g = TermGraph::new();
    let n = rng.gen_range(0..12);
    while g.nodes().len() < n {
        let len = rng.gen_range(1..10);
        let label: String = (0..len).map(|_| *LABEL_CHARS.choose(rng).unwrap()).collect();
        let _ = g.add_node(Node::new(label, []));
    }
    if n >= 2 {
        for _ in 0..rng.gen_range(0..3 * n) {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a == b {
                continue;
            }
            let w = match rng.gen_range(0..3) {
                0 => rng.gen_range(1..100) as f64,
                1 => rng.gen_range(1..1000) as f64 / 8.0,
                _ => rng.gen_range(1e-6..1e6),
            };
            g.add_edge(a, b, w);
        }
    }
    g
}
