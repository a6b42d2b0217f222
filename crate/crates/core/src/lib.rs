//! Semantic-aware partitioning, allocation and replication of RDF triples,
//! with a simulated distributed query engine for measuring locality.

pub mod allocator;
pub mod error;
pub mod partitioner;
pub mod pipeline;
pub mod plan;
pub mod query_engine;
pub mod replicator;
pub mod stats;
pub mod triple_io;

pub use error::{Error, Result};
pub use triple_io::{Triple, TriplePos, TripleStore};
