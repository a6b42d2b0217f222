//! Line-oriented N-Triples subset: `<s> <p> <o> .` and `<s> <p> "literal" .`
//!
//! Blank nodes (`_:x`) are accepted as plain identifiers. A fourth term before
//! the final dot (a quad context) is accepted and dropped.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Triple, TripleStore};
use crate::error::{Error, Result};

/// Parses a whole N-Triples stream into a store, dropping exact duplicates.
pub fn parse_ntriples<R: BufRead>(reader: R) -> Result<TripleStore> {
    let mut triples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        if let Some(triple) = parse_line(&line).map_err(|message| Error::Parse {
            line: idx + 1,
            message,
        })? {
            triples.push(triple);
        }
    }
    TripleStore::from_triples(triples)
}

pub fn read_ntriples_file(path: impl AsRef<Path>) -> Result<TripleStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ntriples(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Canonical serialization: one statement per line, store order.
pub fn serialize_ntriples(store: &TripleStore) -> String {
    let mut out = String::with_capacity(store.len() * 48);
    for triple in store.triples() {
        out.push_str(&triple.to_string());
        out.push('\n');
    }
    out
}

pub fn write_ntriples_file(store: &TripleStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for triple in store.triples() {
        writeln!(w, "{triple}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(super) fn write_statement(f: &mut fmt::Formatter<'_>, t: &Triple) -> fmt::Result {
    write_resource(f, &t.subject)?;
    f.write_str(" ")?;
    write_resource(f, &t.predicate)?;
    f.write_str(" ")?;
    if t.object_is_literal {
        f.write_str("\"")?;
        for c in t.object.chars() {
            match c {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                '\r' => f.write_str("\\r")?,
                '\t' => f.write_str("\\t")?,
                c => write!(f, "{c}")?,
            }
        }
        f.write_str("\"")?;
    } else {
        write_resource(f, &t.object)?;
    }
    f.write_str(" .")
}

fn write_resource(f: &mut fmt::Formatter<'_>, value: &str) -> fmt::Result {
    if value.starts_with("_:") {
        f.write_str(value)
    } else {
        write!(f, "<{value}>")
    }
}

enum Term {
    Resource(String),
    Literal(String),
}

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn at_end_or_comment(&self) -> bool {
        self.rest.is_empty() || self.rest.starts_with('#')
    }

    fn term(&mut self) -> Result<Term, String> {
        self.skip_ws();
        if let Some(rest) = self.rest.strip_prefix('<') {
            let end = rest
                .find('>')
                .ok_or_else(|| "unterminated IRI".to_string())?;
            let iri = &rest[..end];
            if iri.is_empty() {
                return Err("empty IRI".into());
            }
            if iri.chars().any(char::is_whitespace) {
                return Err(format!("whitespace inside IRI <{iri}>"));
            }
            self.rest = &rest[end + 1..];
            Ok(Term::Resource(iri.to_string()))
        } else if self.rest.starts_with("_:") {
            let end = self
                .rest
                .find(char::is_whitespace)
                .unwrap_or(self.rest.len());
            let label = &self.rest[..end];
            if label.len() == 2 {
                return Err("empty blank node label".into());
            }
            self.rest = &self.rest[end..];
            Ok(Term::Resource(label.to_string()))
        } else if let Some(rest) = self.rest.strip_prefix('"') {
            let mut value = String::new();
            let mut chars = rest.char_indices();
            loop {
                match chars.next() {
                    None => return Err("unterminated literal".into()),
                    Some((i, '"')) => {
                        self.rest = &rest[i + 1..];
                        break;
                    }
                    Some((_, '\\')) => match chars.next() {
                        Some((_, '"')) => value.push('"'),
                        Some((_, '\\')) => value.push('\\'),
                        Some((_, 'n')) => value.push('\n'),
                        Some((_, 'r')) => value.push('\r'),
                        Some((_, 't')) => value.push('\t'),
                        Some((_, c)) => return Err(format!("unsupported escape \\{c}")),
                        None => return Err("unterminated literal".into()),
                    },
                    Some((_, c)) => value.push(c),
                }
            }
            if self.rest.starts_with("^^") || self.rest.starts_with('@') {
                return Err("typed or language-tagged literals are not supported".into());
            }
            Ok(Term::Literal(value))
        } else if self.rest.is_empty() {
            Err("unexpected end of line".into())
        } else {
            Err(format!("unexpected token near `{}`", truncate(self.rest)))
        }
    }
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(16) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor { rest: line };
    cur.skip_ws();
    if cur.at_end_or_comment() {
        return Ok(None);
    }
    let subject = match cur.term()? {
        Term::Resource(s) => s,
        Term::Literal(_) => return Err("literal in subject position".into()),
    };
    let predicate = match cur.term()? {
        Term::Resource(p) if !p.starts_with("_:") => p,
        _ => return Err("predicate must be an IRI".into()),
    };
    let (object, object_is_literal) = match cur.term()? {
        Term::Resource(o) => (o, false),
        Term::Literal(o) => (o, true),
    };
    cur.skip_ws();
    if !cur.rest.starts_with('.') {
        // Optional graph context, ignored.
        match cur.term()? {
            Term::Resource(_) => {}
            Term::Literal(_) => return Err("literal in graph position".into()),
        }
        cur.skip_ws();
    }
    let Some(rest) = cur.rest.strip_prefix('.') else {
        return Err("missing terminating `.`".into());
    };
    cur.rest = rest;
    cur.skip_ws();
    if !cur.at_end_or_comment() {
        return Err(format!("trailing content `{}`", truncate(cur.rest)));
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
        object_is_literal,
    }))
}
