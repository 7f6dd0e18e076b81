//! Streaming N-Triples ingestion into a deduplicated, predicate-indexed
//! triple store.

mod dictionary;
pub mod ntriples;
mod store;
mod term;

pub use dictionary::{Dictionary, TermRef};
pub use store::{
    load_paths, parse_stream, BlankNodeScope, Format, IngestReport, StoreBuilder, Triple,
    TripleStore,
};
pub use term::{Term, TermId, TermKind};
