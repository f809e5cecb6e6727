//! Agent-driven text indexing with bipartite spectral co-clustering.
//!
//! Documents are tokenized, standardized against a knowledge base by a
//! chain of indexing agents, and routed to the index, to storage only, or
//! discarded. Indexed documents form a term × document count matrix that is
//! co-clustered through the singular vectors of its degree-normalized form.
//! Results are written as a JSON index store, an XML blackboard, a JSON
//! cluster report and Pajek network files.

pub mod agents;
pub mod cli;
pub mod cocluster;
pub mod corpus;
pub mod eval;
pub mod graphviz;
pub mod kb;
pub mod lexicon;
pub mod store;

pub use agents::{run_pipeline, Blackboard, IndexedDocument, PipelineConfig, Routing, TermStatus};
pub use cocluster::{cocluster, ClusterReport, CoClustering, CoclusterConfig, TermDocMatrix};
pub use corpus::{ingest, tokenize, Document, Token};
pub use kb::{load_kb, KnowledgeBase};
pub use lexicon::{build_vocabulary, stem, ExtractionLevel, ThresholdMode, Vocabulary};
