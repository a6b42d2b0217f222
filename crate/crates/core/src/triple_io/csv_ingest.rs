//! Tabular ingestion: one triple per row per mapped object column.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{Triple, TripleStore};
use crate::error::{Error, Result};

/// Which CSV column becomes the subject and which become objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvMapping {
    pub subject_column: String,
    /// Prepended to every subject cell, e.g. `http://example.org/sensor/`.
    #[serde(default)]
    pub subject_prefix: String,
    pub columns: Vec<ColumnMapping>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub predicate: String,
    pub column: String,
    /// Emit the cell as a resource (IRI) instead of a literal.
    #[serde(default)]
    pub resource: bool,
}

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub store: TripleStore,
    pub rows: usize,
    /// Empty object cells (and the object cells of rows without a subject).
    pub skipped_cells: usize,
}

pub fn ingest_csv<R: Read>(reader: R, mapping: &CsvMapping) -> Result<IngestReport> {
    if mapping.columns.is_empty() {
        return Err(Error::Config(
            "CSV mapping needs at least one (predicate, column) pair".into(),
        ));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column_of = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })
    };
    let subject_col = column_of(&mapping.subject_column)?;
    let object_cols = mapping
        .columns
        .iter()
        .map(|c| column_of(&c.column).map(|idx| (idx, c)))
        .collect::<Result<Vec<_>>>()?;

    let mut triples = Vec::new();
    let mut rows = 0;
    let mut skipped_cells = 0;
    for record in rdr.records() {
        let record = record?;
        rows += 1;
        let subject = record.get(subject_col).unwrap_or("").trim();
        if subject.is_empty() {
            skipped_cells += object_cols.len();
            continue;
        }
        let subject = format!("{}{}", mapping.subject_prefix, subject);
        for &(idx, col) in &object_cols {
            let cell = record.get(idx).unwrap_or("").trim();
            if cell.is_empty() {
                skipped_cells += 1;
                continue;
            }
            triples.push(if col.resource {
                Triple::resource(subject.clone(), col.predicate.clone(), cell)
            } else {
                Triple::literal(subject.clone(), col.predicate.clone(), cell)
            });
        }
    }
    Ok(IngestReport {
        store: TripleStore::from_triples(triples)?,
        rows,
        skipped_cells,
    })
}
