//! The indexing agents and the blackboard they communicate through.
//!
//! Each document goes through four pure stages (tokenizing, reading,
//! standardizing, proposition search) that may run in parallel, then through
//! a serial routing section: the query agent checks for vocabulary not yet on
//! the blackboard, and the relevance agent judges age and thematic overlap
//! with the most recent blackboard entry.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize, Document, Token};
use crate::kb::KnowledgeBase;
use crate::lexicon::{extract_terms, stem, ExtractionLevel, LexiconError};

/// Four-valued term status: initial, accepted (true), rejected (false) and
/// morphological error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermStatus {
    #[serde(rename = "I")]
    Initial,
    #[serde(rename = "T")]
    Accepted,
    #[serde(rename = "F")]
    Rejected,
    #[serde(rename = "J")]
    MorphError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Routing {
    Index,
    StoreOnly,
    Discard,
}

impl Routing {
    pub fn as_str(self) -> &'static str {
        match self {
            Routing::Index => "index",
            Routing::StoreOnly => "store-only",
            Routing::Discard => "discard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermEntry {
    #[serde(rename = "n")]
    pub count: u64,
    pub status: TermStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedDocument {
    #[serde(rename = "id")]
    pub doc_id: String,
    pub year: i32,
    pub routing: Routing,
    pub new_term_count: usize,
    pub terms: BTreeMap<String, TermEntry>,
}

impl IndexedDocument {
    pub fn accepted_terms(&self) -> impl Iterator<Item = (&str, u64)> {
        self.terms
            .iter()
            .filter(|(_, e)| e.status == TermStatus::Accepted)
            .map(|(t, e)| (t.as_str(), e.count))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryRoute {
    ToReading,
    ToRelevance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relevance {
    Relevant,
    Obsolete,
    Irrelevant,
}

/// Maximum age in years before a document is obsolete.
pub const OBSOLESCENCE_YEARS: i32 = 5;

/// Anything that can answer "has this term been seen before".
pub trait KnownTerms {
    fn is_known(&self, term: &str) -> bool;
}

impl KnownTerms for HashSet<String> {
    fn is_known(&self, term: &str) -> bool {
        self.contains(term)
    }
}

impl KnownTerms for BTreeSet<String> {
    fn is_known(&self, term: &str) -> bool {
        self.contains(term)
    }
}

pub fn query_agent<K: KnownTerms + ?Sized>(doc_terms: &BTreeSet<String>, known: &K) -> QueryRoute {
    if doc_terms.iter().any(|t| !known.is_known(t)) {
        QueryRoute::ToReading
    } else {
        QueryRoute::ToRelevance
    }
}

/// Candidate terms: known KB surfaces of any category plus unknown words,
/// stop words excluded.
pub fn reading_agent(kb: &KnowledgeBase, tokens: &[Token]) -> Vec<(String, TermStatus)> {
    tokens
        .iter()
        .filter(|t| !kb.is_stop_word(&t.text))
        .map(|t| (t.text.clone(), TermStatus::Initial))
        .collect()
}

fn standardize_one(kb: &KnowledgeBase, surface: &str) -> (String, TermStatus) {
    if kb.is_stop_word(surface) || surface.chars().count() <= 1 {
        return (surface.to_string(), TermStatus::Rejected);
    }
    if let Some(canonical) = kb.normalize_term(surface) {
        return (canonical.to_string(), TermStatus::Accepted);
    }
    let stemmed = stem(surface);
    match kb.normalize_term(&stemmed) {
        Some(canonical) => (canonical.to_string(), TermStatus::Accepted),
        None => (stemmed, TermStatus::MorphError),
    }
}

/// Contrasts candidates against the KB, stemming on a miss. Stop words and
/// single characters come out `Rejected` and are dropped.
pub fn standardizing_agent(
    kb: &KnowledgeBase,
    candidates: &[(String, TermStatus)],
) -> Vec<(String, TermStatus)> {
    candidates
        .iter()
        .map(|(surface, _)| standardize_one(kb, surface))
        .filter(|(_, status)| *status != TermStatus::Rejected)
        .collect()
}

/// Renegotiates morphological errors: a failed term becomes accepted when an
/// accepted term of the same document is quasi-synonymous with it.
pub fn proposition_agent(
    kb: &KnowledgeBase,
    terms: &[(String, TermStatus)],
) -> Vec<(String, TermStatus)> {
    let rescuable: HashSet<String> = terms
        .iter()
        .filter(|(_, s)| *s == TermStatus::Accepted)
        .filter_map(|(t, _)| kb.quasi_synonyms(t).ok())
        .flatten()
        .collect();
    terms
        .iter()
        .map(|(term, status)| match status {
            TermStatus::MorphError if rescuable.contains(term) => {
                (term.clone(), TermStatus::Accepted)
            }
            _ => (term.clone(), *status),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub entry: usize,
    pub year: i32,
    pub count: u64,
}

/// Hash index from canonical term to postings, newest document first.
#[derive(Debug, Clone, Default)]
pub struct TermIndex {
    postings: HashMap<String, Vec<Posting>>,
}

impl TermIndex {
    fn add(&mut self, term: &str, posting: Posting) {
        let list = self.postings.entry(term.to_string()).or_default();
        let at = list.partition_point(|p| (p.year, p.entry) > (posting.year, posting.entry));
        list.insert(at, posting);
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.postings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.postings.is_empty()
    }
}

impl KnownTerms for TermIndex {
    fn is_known(&self, term: &str) -> bool {
        self.postings.contains_key(term)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardEntry {
    pub doc_id: String,
    pub routing: Routing,
    pub year: i32,
    pub terms: BTreeMap<String, TermEntry>,
}

/// Append-only record of processed documents.
#[derive(Debug, Clone, Default)]
pub struct Blackboard {
    entries: Vec<BoardEntry>,
    index: TermIndex,
    last_accepted: HashMap<String, u64>,
    last_norm: f64,
}

impl Blackboard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[BoardEntry] {
        &self.entries
    }

    pub fn last_entry(&self) -> Option<&BoardEntry> {
        self.entries.last()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index(&self) -> &TermIndex {
        &self.index
    }

    pub fn append(&mut self, entry: BoardEntry) {
        let position = self.entries.len();
        for (term, e) in &entry.terms {
            self.index.add(
                term,
                Posting {
                    entry: position,
                    year: entry.year,
                    count: e.count,
                },
            );
        }
        self.last_accepted = entry
            .terms
            .iter()
            .filter(|(_, e)| e.status == TermStatus::Accepted)
            .map(|(t, e)| (t.clone(), e.count))
            .collect();
        self.last_norm = norm(self.last_accepted.values().copied());
        self.entries.push(entry);
    }

    /// Cosine between accepted-term counts and those of the last entry.
    pub fn similarity_to_last(&self, accepted: &BTreeMap<String, u64>) -> f64 {
        let doc_norm = norm(accepted.values().copied());
        if doc_norm == 0.0 || self.last_norm == 0.0 {
            return 0.0;
        }
        let dot: f64 = accepted
            .iter()
            .filter_map(|(t, &n)| self.last_accepted.get(t).map(|&m| (n * m) as f64))
            .sum();
        dot / (doc_norm * self.last_norm)
    }

    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<blackboard>\n");
        for entry in &self.entries {
            let _ = write!(
                out,
                "  <doc id=\"{}\" routing=\"{}\" year=\"{}\"",
                escape_attr(&entry.doc_id),
                entry.routing.as_str(),
                entry.year
            );
            if entry.terms.is_empty() {
                out.push_str("/>\n");
                continue;
            }
            out.push_str(">\n");
            for (term, e) in &entry.terms {
                let _ = writeln!(out, "    <term c=\"{}\" n=\"{}\"/>", escape_attr(term), e.count);
            }
            out.push_str("  </doc>\n");
        }
        out.push_str("</blackboard>\n");
        out
    }
}

fn norm(values: impl Iterator<Item = u64>) -> f64 {
    values.map(|v| (v * v) as f64).sum::<f64>().sqrt()
}

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn is_obsolete(doc_year: i32, reference_year: i32) -> bool {
    reference_year - doc_year > OBSOLESCENCE_YEARS
}

pub fn relevance_agent(
    board: &Blackboard,
    accepted: &BTreeMap<String, u64>,
    doc_year: i32,
    reference_year: i32,
    tau: f64,
) -> Relevance {
    if is_obsolete(doc_year, reference_year) {
        Relevance::Obsolete
    } else if board.is_empty() || board.similarity_to_last(accepted) >= tau {
        Relevance::Relevant
    } else {
        Relevance::Irrelevant
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("cannot write blackboard {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub tau: f64,
    pub reference_year: i32,
    pub level: ExtractionLevel,
    /// Rewritten after every append when set.
    pub blackboard_path: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(reference_year: i32) -> Self {
        PipelineConfig {
            tau: 0.2,
            reference_year,
            level: ExtractionLevel::Lexical,
            blackboard_path: None,
        }
    }
}

/// Runs the per-document stages: extraction, reading, standardizing and
/// proposition search, then folds occurrences into term counts.
pub fn standardize_document(
    kb: &KnowledgeBase,
    doc: &Document,
    level: ExtractionLevel,
) -> Result<BTreeMap<String, TermEntry>, LexiconError> {
    let tokens = tokenize(kb, &doc.text);
    let extracted = extract_terms(kb, &tokens, level)?;
    let tokens: Vec<Token> = extracted
        .into_iter()
        .enumerate()
        .map(|(position, t)| Token {
            text: t.text,
            position,
            acronym: false,
        })
        .collect();
    let candidates = reading_agent(kb, &tokens);
    let standardized = standardizing_agent(kb, &candidates);
    let proposed = proposition_agent(kb, &standardized);

    let mut terms: BTreeMap<String, TermEntry> = BTreeMap::new();
    for (term, status) in proposed {
        let entry = terms.entry(term).or_insert(TermEntry {
            count: 0,
            status: TermStatus::MorphError,
        });
        entry.count += 1;
        if status == TermStatus::Accepted {
            entry.status = TermStatus::Accepted;
        }
    }
    Ok(terms)
}

pub fn run_pipeline(
    kb: &KnowledgeBase,
    corpus: &[Document],
    config: &PipelineConfig,
) -> Result<(Vec<IndexedDocument>, Blackboard), PipelineError> {
    if config.level == ExtractionLevel::Pragmatic {
        return Err(LexiconError::UnimplementedLevel(config.level).into());
    }
    let standardized: Vec<BTreeMap<String, TermEntry>> = corpus
        .par_iter()
        .map(|doc| standardize_document(kb, doc, config.level))
        .collect::<Result<_, _>>()?;

    let mut board = Blackboard::new();
    let mut indexed = Vec::with_capacity(corpus.len());
    for (doc, terms) in corpus.iter().zip(standardized) {
        let doc_terms: BTreeSet<String> = terms.keys().cloned().collect();
        let new_term_count = doc_terms.iter().filter(|t| !board.index.is_known(t)).count();
        let accepted: BTreeMap<String, u64> = terms
            .iter()
            .filter(|(_, e)| e.status == TermStatus::Accepted)
            .map(|(t, e)| (t.clone(), e.count))
            .collect();

        let routing = match query_agent(&doc_terms, &board.index) {
            QueryRoute::ToReading if is_obsolete(doc.year, config.reference_year) => {
                Routing::Discard
            }
            QueryRoute::ToReading => Routing::Index,
            QueryRoute::ToRelevance => {
                match relevance_agent(&board, &accepted, doc.year, config.reference_year, config.tau)
                {
                    Relevance::Relevant => Routing::StoreOnly,
                    Relevance::Obsolete | Relevance::Irrelevant => Routing::Discard,
                }
            }
        };

        if routing != Routing::Discard {
            board.append(BoardEntry {
                doc_id: doc.id.clone(),
                routing,
                year: doc.year,
                terms: terms.clone(),
            });
            if let Some(path) = &config.blackboard_path {
                fs::write(path, board.to_xml()).map_err(|source| PipelineError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
        }
        indexed.push(IndexedDocument {
            doc_id: doc.id.clone(),
            year: doc.year,
            routing,
            new_term_count,
            terms,
        });
    }
    Ok((indexed, board))
}
