//! File-backed index store: one JSON document per run holding every
//! processed document's routing, year and standardized term counts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{IndexedDocument, Routing, TermStatus};
use crate::eval::TermSets;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed index store {path}: {message}")]
    Malformed { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexStore {
    pub documents: Vec<IndexedDocument>,
}

impl IndexStore {
    pub fn new(documents: Vec<IndexedDocument>) -> Self {
        IndexStore { documents }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("index store serializes") + "\n"
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| StoreError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
            path: shown.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| StoreError::Malformed {
            path: shown,
            message: e.to_string(),
        })
    }

    /// Accepted canonical terms per document; discarded documents map to
    /// the empty set.
    pub fn produced_terms(&self) -> TermSets {
        self.documents
            .iter()
            .map(|d| {
                let terms = if d.routing == Routing::Discard {
                    Default::default()
                } else {
                    d.terms
                        .iter()
                        .filter(|(_, e)| e.status == TermStatus::Accepted)
                        .map(|(t, _)| t.clone())
                        .collect()
                };
                (d.doc_id.clone(), terms)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::TermEntry;

    #[test]
    fn json_shape_and_round_trip() {
        let doc = IndexedDocument {
            doc_id: "d1".into(),
            year: 2009,
            routing: Routing::StoreOnly,
            new_term_count: 0,
            terms: [
                ("port".to_string(), TermEntry { count: 2, status: TermStatus::Accepted }),
                ("crane".to_string(), TermEntry { count: 1, status: TermStatus::MorphError }),
            ]
            .into_iter()
            .collect(),
        };
        let store = IndexStore::new(vec![doc]);
        let json = store.to_json();
        assert!(json.contains("\"routing\": \"store-only\""));
        assert!(json.contains("\"status\": \"J\""));
        let back: IndexStore = serde_json::from_str(&json).unwrap();
        assert_eq!(back, store);
        let produced = store.produced_terms();
        assert_eq!(produced["d1"].iter().collect::<Vec<_>>(), ["port"]);
    }
}
