//! Document ingestion and token cleanup.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kb::KnowledgeBase;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing or invalid `{field}` header")]
    MissingMetadata { path: String, field: &'static str },
    #[error("duplicate document id `{id}` in {path}")]
    DuplicateId { id: String, path: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub year: i32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    pub position: usize,
    /// The source form was written entirely in capitals (two or more letters).
    pub acronym: bool,
}

pub type Corpus = Vec<Document>;

/// Parses a document file: `id:`, `title:` and `year:` header lines, a
/// blank line, then the body.
pub fn parse_document(source: &str, path: &str) -> Result<Document, CorpusError> {
    let missing = |field| CorpusError::MissingMetadata {
        path: path.to_string(),
        field,
    };
    let mut lines = source.split_inclusive('\n');
    let mut header = |name: &'static str| -> Result<String, CorpusError> {
        let line = lines.next().ok_or_else(|| missing(name))?;
        let line = line.trim_end_matches(['\n', '\r']);
        let (key, value) = line.split_once(':').ok_or_else(|| missing(name))?;
        if key.trim() != name {
            return Err(missing(name));
        }
        Ok(value.trim().to_string())
    };
    let id = header("id")?;
    let title = header("title")?;
    let year = header("year")?;
    if id.is_empty() {
        return Err(missing("id"));
    }
    let year: i32 = year.parse().map_err(|_| missing("year"))?;
    if year <= 0 {
        return Err(missing("year"));
    }
    let rest: String = lines.collect();
    let text = match rest.split_once('\n') {
        Some((blank, body)) if blank.trim().is_empty() => body.to_string(),
        _ if rest.trim().is_empty() => String::new(),
        _ => rest,
    };
    Ok(Document {
        id,
        title,
        year,
        text,
    })
}

pub fn ingest<P: AsRef<Path>>(paths: &[P]) -> Result<Corpus, CorpusError> {
    let mut seen = HashSet::new();
    let mut corpus = Vec::with_capacity(paths.len());
    for path in paths {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let source = fs::read_to_string(path).map_err(|source| CorpusError::UnreadableFile {
            path: shown.clone(),
            source,
        })?;
        let doc = parse_document(&source, &shown)?;
        if !seen.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: doc.id,
                path: shown,
            });
        }
        corpus.push(doc);
    }
    Ok(corpus)
}

/// Lists the `.txt` files of a directory in file-name order.
pub fn corpus_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, CorpusError> {
    let dir = dir.as_ref();
    let unreadable = |source| CorpusError::UnreadableFile {
        path: dir.display().to_string(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(unreadable)? {
        let path = entry.map_err(unreadable)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn is_mixed_alphanumeric(s: &str) -> bool {
    s.chars().any(char::is_alphabetic) && s.chars().any(char::is_numeric)
}

fn trim_edges(s: &str) -> &str {
    s.trim_matches(|c: char| !c.is_alphanumeric())
}

fn is_acronym(source: &str) -> bool {
    let letters: Vec<char> = trim_edges(source)
        .chars()
        .filter(|c| c.is_alphabetic())
        .collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

/// Splits on whitespace, expands abbreviations, lowercases, strips edge
/// punctuation and drops tokens that mix letters and digits.
pub fn tokenize(kb: &KnowledgeBase, text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        let lower = raw.to_lowercase();
        let lead_trimmed =
            lower.trim_start_matches(|c: char| !c.is_alphanumeric());
        let keep_dot = lead_trimmed.trim_end_matches(|c: char| !c.is_alphanumeric() && c != '.');
        let expansion = [lower.as_str(), keep_dot, trim_edges(&lower)]
            .into_iter()
            .find_map(|candidate| kb.abbreviation(candidate));

        let mut push = |piece: &str, acronym: bool| {
            let lowered = piece.to_lowercase();
            let cleaned = trim_edges(&lowered);
            if cleaned.is_empty() || is_mixed_alphanumeric(cleaned) {
                return;
            }
            tokens.push(Token {
                text: cleaned.to_string(),
                position: tokens.len(),
                acronym,
            });
        };
        match expansion {
            Some(expansion) => expansion.split_whitespace().for_each(|p| push(p, false)),
            None => push(raw, is_acronym(raw)),
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb() -> KnowledgeBase {
        KnowledgeBase::from_json(r#"{"abbreviations": {"intl.": "international"}}"#).unwrap()
    }

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn lowercases_and_strips_full_stops() {
        assert_eq!(
            texts(&tokenize(&kb(), "The Port. arrived")),
            ["the", "port", "arrived"]
        );
    }

    #[test]
    fn drops_mixed_alphanumerics_keeps_numbers() {
        assert_eq!(texts(&tokenize(&kb(), "cargo X9 dock")), ["cargo", "dock"]);
        assert_eq!(texts(&tokenize(&kb(), "in 1492, ships")), ["in", "1492", "ships"]);
    }

    #[test]
    fn expands_abbreviations() {
        assert_eq!(
            texts(&tokenize(&kb(), "Intl. trade")),
            ["international", "trade"]
        );
    }

    #[test]
    fn keeps_internal_hyphens_and_positions() {
        let tokens = tokenize(&kb(), "(roll-on) -- roll-off!");
        assert_eq!(texts(&tokens), ["roll-on", "roll-off"]);
        assert_eq!(tokens[1].position, 1);
    }

    #[test]
    fn flags_acronyms() {
        let tokens = tokenize(&kb(), "NASA Port A");
        assert!(tokens[0].acronym);
        assert!(!tokens[1].acronym);
        assert!(!tokens[2].acronym);
    }

    #[test]
    fn parses_headers() {
        let doc = parse_document("id: d1\ntitle: Ports\nyear: 2009\n\nBody text\n", "x").unwrap();
        assert_eq!(doc.id, "d1");
        assert_eq!(doc.year, 2009);
        assert_eq!(doc.text, "Body text\n");
    }

    #[test]
    fn missing_year_header() {
        let err = parse_document("id: d1\ntitle: Ports\n\nBody\n", "x").unwrap_err();
        assert!(matches!(err, CorpusError::MissingMetadata { field: "year", .. }));
    }
}
