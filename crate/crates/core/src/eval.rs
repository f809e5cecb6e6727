//! Set-based precision and recall of index terms against a gold standard.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no gold-standard document appears in the produced index")]
    NoOverlap,
    #[error("gold file line {line}: expected `doc_id<TAB>term`")]
    MalformedGold { line: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type TermSets = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldStandard {
    pub docs: TermSets,
}

impl GoldStandard {
    /// Parses `doc_id<TAB>term` lines. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut docs = TermSets::new();
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (doc, term) = line
                .split_once('\t')
                .map(|(d, t)| (d.trim(), t.trim()))
                .filter(|(d, t)| !d.is_empty() && !t.is_empty() && !t.contains('\t'))
                .ok_or(EvalError::MalformedGold { line: no + 1 })?;
            docs.entry(doc.to_string())
                .or_default()
                .insert(term.to_lowercase());
        }
        Ok(GoldStandard { docs })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    #[default]
    Micro,
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
}

fn ratio(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Scores every gold document; a gold document missing from `produced`
/// counts as an empty term set, and produced documents without gold
/// judgements are ignored.
pub fn precision_recall(
    produced: &TermSets,
    gold: &GoldStandard,
    averaging: Averaging,
) -> Result<PrecisionRecall, EvalError> {
    if !gold.docs.keys().any(|d| produced.contains_key(d)) {
        return Err(EvalError::NoOverlap);
    }
    let empty = BTreeSet::new();
    let per_doc: Vec<(usize, usize, usize)> = gold
        .docs
        .iter()
        .map(|(doc, relevant)| {
            let found = produced.get(doc).unwrap_or(&empty);
            (found.intersection(relevant).count(), found.len(), relevant.len())
        })
        .collect();
    Ok(match averaging {
        Averaging::Micro => {
            let (hits, found, relevant) = per_doc
                .iter()
                .fold((0, 0, 0), |acc, d| (acc.0 + d.0, acc.1 + d.1, acc.2 + d.2));
            PrecisionRecall {
                precision: ratio(hits, found),
                recall: ratio(hits, relevant),
            }
        }
        Averaging::Macro => {
            let n = per_doc.len() as f64;
            PrecisionRecall {
                precision: per_doc.iter().map(|d| ratio(d.0, d.1)).sum::<f64>() / n,
                recall: per_doc.iter().map(|d| ratio(d.0, d.2)).sum::<f64>() / n,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(items: &[(&str, &[&str])]) -> TermSets {
        items
            .iter()
            .map(|(d, ts)| (d.to_string(), ts.iter().map(|t| t.to_string()).collect()))
            .collect()
    }

    fn gold(items: &[(&str, &[&str])]) -> GoldStandard {
        GoldStandard { docs: sets(items) }
    }

    #[test]
    fn half_and_half() {
        let pr = precision_recall(&sets(&[("d1", &["a", "b"])]), &gold(&[("d1", &["a", "c"])]), Averaging::Micro)
            .unwrap();
        assert_eq!(pr, PrecisionRecall { precision: 0.5, recall: 0.5 });
    }

    #[test]
    fn identical_sets() {
        let s: &[(&str, &[&str])] = &[("d1", &["a", "b"]), ("d2", &["c"])];
        let pr = precision_recall(&sets(s), &gold(s), Averaging::Micro).unwrap();
        assert_eq!(pr, PrecisionRecall { precision: 1.0, recall: 1.0 });
    }

    #[test]
    fn empty_produced_set() {
        let pr = precision_recall(&sets(&[("d1", &[])]), &gold(&[("d1", &["a"])]), Averaging::Micro).unwrap();
        assert_eq!(pr, PrecisionRecall { precision: 0.0, recall: 0.0 });
    }

    #[test]
    fn disjoint_documents() {
        assert!(matches!(
            precision_recall(&sets(&[("d9", &["a"])]), &gold(&[("d1", &["a"])]), Averaging::Micro),
            Err(EvalError::NoOverlap)
        ));
    }

    #[test]
    fn micro_and_macro_differ() {
        let produced = sets(&[("d1", &["a"]), ("d2", &["x", "y", "z"])]);
        let g = gold(&[("d1", &["a"]), ("d2", &["x", "q"])]);
        let micro = precision_recall(&produced, &g, Averaging::Micro).unwrap();
        // 2 hits of 4 produced, 2 of 3 relevant
        assert_eq!(micro.precision, 0.5);
        assert_eq!(micro.recall, 2.0 / 3.0);
        let macro_ = precision_recall(&produced, &g, Averaging::Macro).unwrap();
        assert_eq!(macro_.precision, (1.0 + 1.0 / 3.0) / 2.0);
        assert_eq!(macro_.recall, (1.0 + 0.5) / 2.0);
    }

    #[test]
    fn gold_file_parsing() {
        let g = GoldStandard::parse("d1\tPort\nd1\tquay\n\nd2\tship\n").unwrap();
        assert_eq!(g.docs["d1"].len(), 2);
        assert!(g.docs["d1"].contains("port"));
        assert!(matches!(
            GoldStandard::parse("d1 port\n"),
            Err(EvalError::MalformedGold { line: 1 })
        ));
    }
}
