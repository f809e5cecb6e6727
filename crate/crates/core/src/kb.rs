//! Knowledge base: canonical terms, synonym classes, quasi-synonym links,
//! grammatical categories, stop words and abbreviation expansions.
//!
//! A [`KnowledgeBase`] is immutable once loaded and can be shared freely
//! between worker threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed knowledge base: {0}")]
    Malformed(String),
    #[error("inconsistent knowledge base: {0}")]
    Inconsistent(String),
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
}

/// Grammatical or entity category attached to a KB surface form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Noun,
    Verb,
    Adjective,
    Homonym,
    Hyponym,
    Hyperonym,
    Meronym,
    ContextualExpression,
    EntityPerson,
    EntityPlace,
    EntityOrganization,
    EntityProduct,
}

impl Category {
    pub fn is_entity(self) -> bool {
        matches!(
            self,
            Category::EntityPerson
                | Category::EntityPlace
                | Category::EntityOrganization
                | Category::EntityProduct
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Noun => "noun",
            Category::Verb => "verb",
            Category::Adjective => "adjective",
            Category::Homonym => "homonym",
            Category::Hyponym => "hyponym",
            Category::Hyperonym => "hyperonym",
            Category::Meronym => "meronym",
            Category::ContextualExpression => "contextual-expression",
            Category::EntityPerson => "entity-person",
            Category::EntityPlace => "entity-place",
            Category::EntityOrganization => "entity-organization",
            Category::EntityProduct => "entity-product",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermRecord {
    pub surface: String,
    pub canonical: String,
    pub category: Category,
    pub class_id: String,
}

/// One synonym class: a hyperedge over its member surfaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynonymClass {
    pub class_id: String,
    pub members: BTreeSet<String>,
    pub canonical: String,
    pub quasi_synonym_of: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    records: BTreeMap<String, TermRecord>,
    classes: BTreeMap<String, SynonymClass>,
    stop_words: BTreeSet<String>,
    abbreviations: BTreeMap<String, String>,
    // canonical -> class_id
    by_canonical: BTreeMap<String, String>,
    // symmetric closure of the declared quasi links, keyed by class_id
    quasi_links: BTreeMap<String, BTreeSet<String>>,
}

// On-disk schema.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KbFile {
    #[serde(default)]
    classes: Vec<ClassEntry>,
    #[serde(default)]
    categories: Vec<CategoryEntry>,
    #[serde(default)]
    stop_words: Vec<String>,
    #[serde(default)]
    abbreviations: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    id: String,
    canonical: String,
    members: Vec<String>,
    #[serde(default)]
    quasi: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryEntry {
    surface: String,
    category: Category,
}

fn is_valid_surface(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace) && s.to_lowercase() == s
}

pub fn load_kb(path: impl AsRef<Path>) -> Result<KnowledgeBase, KbError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    KnowledgeBase::from_json(&text)
}

impl KnowledgeBase {
    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let file: KbFile =
            serde_json::from_str(text).map_err(|e| KbError::Malformed(e.to_string()))?;
        Self::from_file(file)
    }

    fn from_file(file: KbFile) -> Result<Self, KbError> {
        let mut categories: BTreeMap<String, Category> = BTreeMap::new();
        for entry in file.categories {
            if !is_valid_surface(&entry.surface) {
                return Err(KbError::Inconsistent(format!(
                    "surface `{}` must be nonempty, lowercase and without whitespace",
                    entry.surface
                )));
            }
            if categories.insert(entry.surface.clone(), entry.category).is_some() {
                return Err(KbError::Inconsistent(format!(
                    "surface `{}` is categorized twice",
                    entry.surface
                )));
            }
        }

        let mut classes = BTreeMap::new();
        let mut records = BTreeMap::new();
        let mut by_canonical = BTreeMap::new();
        for entry in file.classes {
            if entry.id.is_empty() {
                return Err(KbError::Inconsistent("class with empty id".into()));
            }
            if classes.contains_key(&entry.id) {
                return Err(KbError::Inconsistent(format!(
                    "class `{}` declared twice",
                    entry.id
                )));
            }
            let members: BTreeSet<String> = entry.members.into_iter().collect();
            if !members.contains(&entry.canonical) {
                return Err(KbError::Inconsistent(format!(
                    "class `{}`: canonical `{}` is not a member",
                    entry.id, entry.canonical
                )));
            }
            let quasi: BTreeSet<String> = entry.quasi.into_iter().collect();
            if quasi.contains(&entry.id) {
                return Err(KbError::Inconsistent(format!(
                    "class `{}` is quasi-linked to itself",
                    entry.id
                )));
            }
            for member in &members {
                if !is_valid_surface(member) {
                    return Err(KbError::Inconsistent(format!(
                        "class `{}`: surface `{member}` must be nonempty, lowercase and without whitespace",
                        entry.id
                    )));
                }
                let Some(&category) = categories.get(member) else {
                    return Err(KbError::Inconsistent(format!(
                        "class `{}` lists `{member}` but no record exists for it",
                        entry.id
                    )));
                };
                let record = TermRecord {
                    surface: member.clone(),
                    canonical: entry.canonical.clone(),
                    category,
                    class_id: entry.id.clone(),
                };
                if let Some(prev) = records.insert(member.clone(), record) {
                    return Err(KbError::Inconsistent(format!(
                        "surface `{member}` belongs to both `{}` and `{}`",
                        prev.class_id, entry.id
                    )));
                }
            }
            if let Some(other) = by_canonical.insert(entry.canonical.clone(), entry.id.clone()) {
                return Err(KbError::Inconsistent(format!(
                    "canonical `{}` is shared by classes `{other}` and `{}`",
                    entry.canonical, entry.id
                )));
            }
            classes.insert(
                entry.id.clone(),
                SynonymClass {
                    class_id: entry.id,
                    members,
                    canonical: entry.canonical,
                    quasi_synonym_of: quasi,
                },
            );
        }

        if let Some(orphan) = categories.keys().find(|s| !records.contains_key(*s)) {
            return Err(KbError::Inconsistent(format!(
                "surface `{orphan}` has a category but belongs to no class"
            )));
        }

        let mut quasi_links: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for class in classes.values() {
            for target in &class.quasi_synonym_of {
                if !classes.contains_key(target) {
                    return Err(KbError::Inconsistent(format!(
                        "class `{}` is quasi-linked to unknown class `{target}`",
                        class.class_id
                    )));
                }
                quasi_links
                    .entry(class.class_id.clone())
                    .or_default()
                    .insert(target.clone());
                quasi_links
                    .entry(target.clone())
                    .or_default()
                    .insert(class.class_id.clone());
            }
        }

        let mut stop_words = BTreeSet::new();
        for word in file.stop_words {
            if !is_valid_surface(&word) {
                return Err(KbError::Inconsistent(format!(
                    "stop word `{word}` must be nonempty, lowercase and without whitespace"
                )));
            }
            if by_canonical.contains_key(&word) {
                return Err(KbError::Inconsistent(format!(
                    "canonical term `{word}` is also a stop word"
                )));
            }
            stop_words.insert(word);
        }

        for (key, expansion) in &file.abbreviations {
            if !is_valid_surface(key) {
                return Err(KbError::Inconsistent(format!(
                    "abbreviation `{key}` must be nonempty, lowercase and without whitespace"
                )));
            }
            if expansion.trim().is_empty() {
                return Err(KbError::Inconsistent(format!(
                    "abbreviation `{key}` has an empty expansion"
                )));
            }
        }
        // An expansion must not itself expand again, otherwise tokenizing
        // the tokenized text would not be a fixed point.
        for (key, expansion) in &file.abbreviations {
            for piece in expansion.split_whitespace() {
                let lower = piece.to_lowercase();
                let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
                if file.abbreviations.contains_key(trimmed) || file.abbreviations.contains_key(&lower)
                {
                    return Err(KbError::Inconsistent(format!(
                        "expansion of abbreviation `{key}` contains abbreviation `{piece}`"
                    )));
                }
            }
        }

        Ok(KnowledgeBase {
            records,
            classes,
            stop_words,
            abbreviations: file.abbreviations,
            by_canonical,
            quasi_links,
        })
    }

    /// Serializes back into the on-disk JSON schema. Entries are sorted, so
    /// equal knowledge bases always produce identical text.
    pub fn to_json(&self) -> String {
        let file = KbFile {
            classes: self
                .classes
                .values()
                .map(|c| ClassEntry {
                    id: c.class_id.clone(),
                    canonical: c.canonical.clone(),
                    members: c.members.iter().cloned().collect(),
                    quasi: c.quasi_synonym_of.iter().cloned().collect(),
                })
                .collect(),
            categories: self
                .records
                .values()
                .map(|r| CategoryEntry {
                    surface: r.surface.clone(),
                    category: r.category,
                })
                .collect(),
            stop_words: self.stop_words.iter().cloned().collect(),
            abbreviations: self.abbreviations.clone(),
        };
        serde_json::to_string_pretty(&file).expect("kb schema serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), KbError> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn record(&self, surface: &str) -> Option<&TermRecord> {
        self.records.get(surface)
    }

    pub fn records(&self) -> impl Iterator<Item = &TermRecord> {
        self.records.values()
    }

    pub fn class(&self, class_id: &str) -> Option<&SynonymClass> {
        self.classes.get(class_id)
    }

    pub fn classes(&self) -> impl Iterator<Item = &SynonymClass> {
        self.classes.values()
    }

    pub fn class_of_canonical(&self, canonical: &str) -> Option<&SynonymClass> {
        self.by_canonical
            .get(canonical)
            .and_then(|id| self.classes.get(id))
    }

    pub fn is_stop_word(&self, word: &str) -> bool {
        self.stop_words.contains(word)
    }

    pub fn stop_words(&self) -> &BTreeSet<String> {
        &self.stop_words
    }

    pub fn abbreviation(&self, key: &str) -> Option<&str> {
        self.abbreviations.get(key).map(String::as_str)
    }

    pub fn abbreviations(&self) -> &BTreeMap<String, String> {
        &self.abbreviations
    }

    pub fn is_canonical(&self, term: &str) -> bool {
        self.by_canonical.contains_key(term)
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty() && self.stop_words.is_empty() && self.abbreviations.is_empty()
    }

    /// Canonical form of a known surface, `None` for anything not in the KB.
    pub fn normalize_term(&self, surface: &str) -> Option<&str> {
        self.records.get(surface).map(|r| r.canonical.as_str())
    }

    /// Canonicals one quasi-synonym hop away, links counted in either direction.
    pub fn quasi_synonyms(&self, canonical: &str) -> Result<BTreeSet<String>, KbError> {
        let class_id = self
            .by_canonical
            .get(canonical)
            .ok_or_else(|| KbError::UnknownTerm(canonical.to_string()))?;
        Ok(self
            .quasi_links
            .get(class_id)
            .into_iter()
            .flatten()
            .map(|id| self.classes[id].canonical.clone())
            .filter(|c| c != canonical)
            .collect())
    }

    /// Quasi-linked classes whose canonical record is tagged as a hyperonym.
    pub fn hyperonyms(&self, canonical: &str) -> Vec<String> {
        match self.quasi_synonyms(canonical) {
            Ok(linked) => linked
                .into_iter()
                .filter(|c| {
                    self.records
                        .get(c)
                        .is_some_and(|r| r.category == Category::Hyperonym)
                })
                .collect(),
            Err(_) => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PORT_KB: &str = r#"{
        "classes": [
            {"id": "c-port", "canonical": "port", "members": ["harbor", "port"]},
            {"id": "c-wharf", "canonical": "wharf", "members": ["wharf"], "quasi": ["c-dock"]},
            {"id": "c-dock", "canonical": "dock", "members": ["dock"]},
            {"id": "c-quay", "canonical": "quay", "members": ["quay"]}
        ],
        "categories": [
            {"surface": "harbor", "category": "noun"},
            {"surface": "port", "category": "noun"},
            {"surface": "wharf", "category": "noun"},
            {"surface": "dock", "category": "noun"},
            {"surface": "quay", "category": "noun"}
        ],
        "stop_words": ["the"],
        "abbreviations": {"intl.": "international"}
    }"#;

    #[test]
    fn synonym_lookup() {
        let kb = KnowledgeBase::from_json(PORT_KB).unwrap();
        assert_eq!(kb.normalize_term("harbor"), Some("port"));
        assert_eq!(kb.normalize_term("port"), Some("port"));
        assert_eq!(kb.normalize_term("zeppelin"), None);
    }

    #[test]
    fn empty_kb_is_valid() {
        let kb = KnowledgeBase::from_json(
            r#"{"classes": [], "categories": [], "stop_words": [], "abbreviations": {}}"#,
        )
        .unwrap();
        assert!(kb.is_empty());
        assert!(KnowledgeBase::from_json("{}").unwrap().is_empty());
    }

    #[test]
    fn member_without_record_is_inconsistent() {
        let err = KnowledgeBase::from_json(
            r#"{"classes": [{"id": "c1", "canonical": "pier", "members": ["pier", "dock"]}],
                "categories": [{"surface": "pier", "category": "noun"}]}"#,
        )
        .unwrap_err();
        match err {
            KbError::Inconsistent(msg) => assert!(msg.contains("dock") && msg.contains("c1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_and_unknown_keys_are_malformed() {
        assert!(matches!(
            KnowledgeBase::from_json("{not json"),
            Err(KbError::Malformed(_))
        ));
        assert!(matches!(
            KnowledgeBase::from_json(r#"{"synonyms": []}"#),
            Err(KbError::Malformed(_))
        ));
    }

    #[test]
    fn canonical_stop_word_rejected() {
        let err = KnowledgeBase::from_json(
            r#"{"classes": [{"id": "c", "canonical": "the", "members": ["the"]}],
                "categories": [{"surface": "the", "category": "noun"}],
                "stop_words": ["the"]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, KbError::Inconsistent(_)));
    }

    #[test]
    fn self_quasi_link_rejected() {
        let err = KnowledgeBase::from_json(
            r#"{"classes": [{"id": "c", "canonical": "a", "members": ["a"], "quasi": ["c"]}],
                "categories": [{"surface": "a", "category": "noun"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, KbError::Inconsistent(_)));
    }

    #[test]
    fn quasi_synonyms_are_symmetric() {
        let kb = KnowledgeBase::from_json(PORT_KB).unwrap();
        let wharf = kb.quasi_synonyms("wharf").unwrap();
        assert_eq!(wharf.into_iter().collect::<Vec<_>>(), vec!["dock"]);
        let dock = kb.quasi_synonyms("dock").unwrap();
        assert_eq!(dock.into_iter().collect::<Vec<_>>(), vec!["wharf"]);
        assert!(kb.quasi_synonyms("quay").unwrap().is_empty());
        assert!(matches!(
            kb.quasi_synonyms("harbor"),
            Err(KbError::UnknownTerm(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let kb = KnowledgeBase::from_json(PORT_KB).unwrap();
        let again = KnowledgeBase::from_json(&kb.to_json()).unwrap();
        assert_eq!(kb, again);
    }

    #[test]
    fn chained_abbreviation_rejected() {
        let err = KnowledgeBase::from_json(
            r#"{"abbreviations": {"us": "united states", "states": "sts"}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, KbError::Inconsistent(_)));
    }
}
