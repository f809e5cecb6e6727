//! Term extraction levels and vocabulary reduction: stop words, suffix
//! stemming and count thresholds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::agents::{IndexedDocument, Routing, TermStatus};
use crate::corpus::Token;
use crate::kb::{Category, KnowledgeBase};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("extraction level `{0}` is not implemented")]
    UnimplementedLevel(ExtractionLevel),
    #[error("no term survives the vocabulary threshold")]
    EmptyVocabulary,
    #[error("invalid value `{0}`")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractionLevel {
    Grapheme,
    #[default]
    Lexical,
    Syntactic,
    Semantic,
    Pragmatic,
}

impl fmt::Display for ExtractionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtractionLevel::Grapheme => "grapheme",
            ExtractionLevel::Lexical => "lexical",
            ExtractionLevel::Syntactic => "syntactic",
            ExtractionLevel::Semantic => "semantic",
            ExtractionLevel::Pragmatic => "pragmatic",
        })
    }
}

impl FromStr for ExtractionLevel {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grapheme" => Ok(ExtractionLevel::Grapheme),
            "lexical" => Ok(ExtractionLevel::Lexical),
            "syntactic" => Ok(ExtractionLevel::Syntactic),
            "semantic" => Ok(ExtractionLevel::Semantic),
            "pragmatic" => Ok(ExtractionLevel::Pragmatic),
            _ => Err(LexiconError::Parse(s.to_string())),
        }
    }
}

// Ordered suffix table: (suffix, replacement, minimum remaining stem length).
const SUFFIX_RULES: &[(&str, &str, usize)] = &[
    ("sses", "ss", 0),
    ("ies", "y", 0),
    ("ations", "ate", 0),
    ("ing", "", 3),
    ("ed", "", 3),
    ("s", "", 2),
];

fn apply_first_rule(word: &str) -> Option<String> {
    for &(suffix, replacement, min_stem) in SUFFIX_RULES {
        let Some(stem) = word.strip_suffix(suffix) else {
            continue;
        };
        if suffix == "s" && stem.ends_with('s') {
            return None;
        }
        if stem.chars().count() < min_stem {
            return None;
        }
        return Some(format!("{stem}{replacement}"));
    }
    None
}

/// Heuristic suffix stripping. The first matching rule of the table is
/// applied, and the result is fed back through the table until no rule
/// fires, so `stem` is idempotent.
pub fn stem(word: &str) -> String {
    let mut current = word.to_string();
    while let Some(next) = apply_first_rule(&current) {
        current = next;
    }
    current
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedTerm {
    pub text: String,
    pub category: Option<Category>,
}

impl ExtractedTerm {
    fn plain(text: impl Into<String>) -> Self {
        ExtractedTerm {
            text: text.into(),
            category: None,
        }
    }
}

fn is_link_or_acronym(token: &Token) -> bool {
    token.acronym || token.text.contains('/') || token.text.contains("://")
}

pub fn extract_terms(
    kb: &KnowledgeBase,
    tokens: &[Token],
    level: ExtractionLevel,
) -> Result<Vec<ExtractedTerm>, LexiconError> {
    let lexical = || {
        tokens
            .iter()
            .filter(|t| !is_link_or_acronym(t) && !kb.is_stop_word(&t.text))
    };
    let terms = match level {
        ExtractionLevel::Pragmatic => return Err(LexiconError::UnimplementedLevel(level)),
        ExtractionLevel::Grapheme => tokens
            .iter()
            .flat_map(|t| {
                let chars: Vec<char> = t.text.chars().collect();
                chars
                    .windows(3)
                    .map(|w| ExtractedTerm::plain(w.iter().collect::<String>()))
                    .collect::<Vec<_>>()
            })
            .collect(),
        ExtractionLevel::Lexical => lexical().map(|t| ExtractedTerm::plain(&t.text)).collect(),
        ExtractionLevel::Syntactic => lexical()
            .map(|t| ExtractedTerm {
                text: t.text.clone(),
                category: kb.record(&t.text).map(|r| r.category),
            })
            .collect(),
        ExtractionLevel::Semantic => {
            let mut out = Vec::new();
            for token in lexical() {
                match kb.record(&token.text) {
                    Some(record) => {
                        out.push(ExtractedTerm {
                            text: record.canonical.clone(),
                            category: Some(record.category),
                        });
                        for hyper in kb.hyperonyms(&record.canonical) {
                            out.push(ExtractedTerm {
                                text: hyper,
                                category: Some(Category::Hyperonym),
                            });
                        }
                    }
                    None => out.push(ExtractedTerm::plain(&token.text)),
                }
            }
            out
        }
    };
    Ok(terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    MinCount(u64),
    TopN(usize),
}

impl Default for ThresholdMode {
    fn default() -> Self {
        ThresholdMode::MinCount(2)
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMode::MinCount(c) => write!(f, "min_count:{c}"),
            ThresholdMode::TopN(n) => write!(f, "top_n:{n}"),
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = LexiconError;

    /// Accepts `min_count:C` or `top_n:N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LexiconError::Parse(s.to_string());
        let (kind, value) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "min_count" => Ok(ThresholdMode::MinCount(
                value.trim().parse().map_err(|_| bad())?,
            )),
            "top_n" => Ok(ThresholdMode::TopN(value.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    scores: BTreeMap<String, f64>,
}

impl Vocabulary {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn score(&self, term: &str) -> Option<f64> {
        self.scores.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.scores.contains_key(term)
    }

    /// `term<TAB>score` lines in vocabulary order.
    pub fn to_tsv(&self) -> String {
        self.terms
            .iter()
            .map(|t| format!("{t}\t{}\n", self.scores[t]))
            .collect()
    }
}

pub fn build_vocabulary(
    indexed_docs: &[IndexedDocument],
    mode: ThresholdMode,
) -> Result<Vocabulary, LexiconError> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in indexed_docs.iter().filter(|d| d.routing == Routing::Index) {
        for (term, entry) in &doc.terms {
            if entry.status != TermStatus::Rejected {
                *counts.entry(term).or_default() += entry.count;
            }
        }
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    match mode {
        ThresholdMode::MinCount(c) => ranked.retain(|&(_, n)| n >= c),
        ThresholdMode::TopN(n) => ranked.truncate(n),
    }
    if ranked.is_empty() {
        return Err(LexiconError::EmptyVocabulary);
    }
    Ok(Vocabulary {
        terms: ranked.iter().map(|(t, _)| t.to_string()).collect(),
        scores: ranked.iter().map(|&(t, n)| (t.to_string(), n as f64)).collect(),
    })
}
