//! Knowledge base: schema, triple store, inference and corpus ingest.

mod graph;
mod ingest;
mod schema;

pub use graph::{
    apply_inference, ConsistencyError, EntityId, EntityKey, Graph, GraphStats, LiteralId, Term,
    Triple, Violation,
};
pub use ingest::{
    graph_from_records, insert_statements, load_corpus, load_corpus_str, record_to_triples,
    CorpusError, CourseRecord, IngestError, LoadReport, Statement, StatementObject,
};
pub use schema::{Class, Property, Range};

/// The demo corpus shipped with the crate.
pub const DEMO_CORPUS: &str = include_str!("../../data/demo_corpus.jsonl");
