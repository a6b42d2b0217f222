//! Triples, the indexed in-memory store, and the readers/writers around it.
//!
//! A [`TripleStore`] is built once and then only read. It keeps the triples in
//! insertion order and three position indices (subject, resource object,
//! predicate) whose keys iterate in first-occurrence order, so everything that
//! walks an index is deterministic.

mod csv_ingest;
mod generator;
mod ntriples;

pub use csv_ingest::{ingest_csv, ColumnMapping, CsvMapping, IngestReport};
pub use generator::{generate_lod_like, LodVocabulary};
pub use ntriples::{parse_ntriples, read_ntriples_file, serialize_ntriples, write_ntriples_file};

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single `(subject, predicate, object)` statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    /// Literal objects never join with subjects.
    pub object_is_literal: bool,
}

impl Triple {
    pub fn resource(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
            object_is_literal: false,
        }
    }

    pub fn literal(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
            object_is_literal: true,
        }
    }

    /// The object if it is a resource (IRI or blank node), `None` for literals.
    pub fn resource_object(&self) -> Option<&str> {
        (!self.object_is_literal).then_some(self.object.as_str())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ntriples::write_statement(f, self)
    }
}

/// Position of a triple inside a [`TripleStore`].
pub type TriplePos = usize;

/// Ordered, duplicate-free collection of triples with position indices.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    triples: Vec<Triple>,
    subject_index: IndexMap<String, Vec<TriplePos>>,
    object_index: IndexMap<String, Vec<TriplePos>>,
    predicate_index: IndexMap<String, Vec<TriplePos>>,
}

impl PartialEq for TripleStore {
    fn eq(&self, other: &Self) -> bool {
        // Indices are a pure function of the triple list.
        self.triples == other.triples
    }
}

impl Eq for TripleStore {}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a store, dropping exact duplicate statements (first occurrence wins).
    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Result<Self> {
        let mut store = TripleStore::new();
        let mut seen = HashSet::new();
        for triple in triples {
            if triple.subject.is_empty() || triple.predicate.is_empty() {
                return Err(Error::EmptyTerm(triple.to_string()));
            }
            if seen.contains(&triple) {
                continue;
            }
            seen.insert(triple.clone());
            store.push_unchecked(triple);
        }
        Ok(store)
    }

    fn push_unchecked(&mut self, triple: Triple) {
        let pos = self.triples.len();
        self.subject_index
            .entry(triple.subject.clone())
            .or_default()
            .push(pos);
        self.predicate_index
            .entry(triple.predicate.clone())
            .or_default()
            .push(pos);
        if !triple.object_is_literal {
            self.object_index
                .entry(triple.object.clone())
                .or_default()
                .push(pos);
        }
        self.triples.push(triple);
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn get(&self, pos: TriplePos) -> Option<&Triple> {
        self.triples.get(pos)
    }

    pub fn subject_index(&self) -> &IndexMap<String, Vec<TriplePos>> {
        &self.subject_index
    }

    pub fn object_index(&self) -> &IndexMap<String, Vec<TriplePos>> {
        &self.object_index
    }

    pub fn predicate_index(&self) -> &IndexMap<String, Vec<TriplePos>> {
        &self.predicate_index
    }

    pub fn with_subject(&self, subject: &str) -> &[TriplePos] {
        self.subject_index
            .get(subject)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn with_object(&self, object: &str) -> &[TriplePos] {
        self.object_index
            .get(object)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn with_predicate(&self, predicate: &str) -> &[TriplePos] {
        self.predicate_index
            .get(predicate)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn distinct_subjects(&self) -> usize {
        self.subject_index.len()
    }
}
