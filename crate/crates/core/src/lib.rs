//! Equivalence set graphs over RDF data.
//!
//! Load N-Triples with [`ingest`], pick entities with [`select`], build an
//! [`EquivalenceSetGraph`] with [`esg::build`], and measure it with
//! [`metrics`].

pub mod error;
pub mod esg;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod select;
pub mod vocab;

pub use error::{Error, Result};
pub use esg::{EquivalenceSetGraph, EsId, EsgParams};
pub use ingest::{Dictionary, Term, TermId, TermKind, TripleStore};
