//! Pattern queries over a centralized store and over a simulated cluster.
//!
//! Four query shapes are supported: linear chains, stars, single-pattern range
//! filters (optionally counted), and snowflakes (a star whose center also heads
//! a chain). Centralized evaluation is the correctness oracle; distributed
//! evaluation walks the cluster node by node and records how many nodes had to
//! serve data.

mod cluster;
mod eval;
mod report;
mod workload;

pub use cluster::{Cluster, NodeView};
pub use eval::{evaluate_centralized, evaluate_distributed, evaluate_on_home, REMOTE_HOP_COST};
pub use report::{inc_report, HomePolicy, IncSummary, QueryReport};
pub use workload::{generate_workload, read_workload, write_workload, WorkloadCounts};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::triple_io::Triple;

/// A bound value: resources and literals never compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Iri(String),
    Literal(String),
}

/// One position of a triple pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Iri(String),
    Literal(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn iri(value: impl Into<String>) -> Self {
        Term::Iri(value.into())
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term::Literal(value.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    fn resolve<'a>(&'a self, row: &'a Binding) -> Option<Resolved<'a>> {
        match self {
            Term::Var(v) => match row.get(v) {
                Some(Value::Iri(s)) => Some(Resolved::Iri(s)),
                Some(Value::Literal(s)) => Some(Resolved::Literal(s)),
                None => None,
            },
            Term::Iri(s) => Some(Resolved::Iri(s)),
            Term::Literal(s) => Some(Resolved::Literal(s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Resolved<'a> {
    Iri(&'a str),
    Literal(&'a str),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Iri(s) if s.starts_with("_:") => f.write_str(s),
            Term::Iri(s) => write!(f, "<{s}>"),
            Term::Literal(s) => write!(f, "\"{s}\""),
        }
    }
}

impl std::str::FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(v) = s.strip_prefix('?') {
            if v.is_empty() {
                return Err(Error::InvalidQuery("empty variable name".into()));
            }
            Ok(Term::Var(v.to_string()))
        } else if let Some(iri) = s.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
            Ok(Term::Iri(iri.to_string()))
        } else if s.starts_with("_:") {
            Ok(Term::Iri(s.to_string()))
        } else if let Some(lit) = s
            .strip_prefix('"')
            .and_then(|r| r.strip_suffix('"'))
            .filter(|_| s.len() >= 2)
        {
            Ok(Term::Literal(lit.to_string()))
        } else {
            Err(Error::InvalidQuery(format!(
                "term `{s}` is not ?var, <iri>, _:blank or \"literal\""
            )))
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriplePattern {
    #[serde(rename = "s")]
    pub subject: Term,
    #[serde(rename = "p")]
    pub predicate: Term,
    #[serde(rename = "o")]
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(Term::as_var)
    }

    /// All three positions are variables.
    pub fn is_full_scan(&self) -> bool {
        self.subject.is_var() && self.predicate.is_var() && self.object.is_var()
    }

    /// Binds the pattern against a triple, extending `row` (which must agree
    /// with any variable it already binds).
    pub(crate) fn bind(&self, triple: &Triple, row: &Binding) -> Option<Binding> {
        let mut out = row.clone();
        let slots = [
            (&self.subject, Value::Iri(triple.subject.clone())),
            (&self.predicate, Value::Iri(triple.predicate.clone())),
            (
                &self.object,
                if triple.object_is_literal {
                    Value::Literal(triple.object.clone())
                } else {
                    Value::Iri(triple.object.clone())
                },
            ),
        ];
        for (term, value) in slots {
            match term {
                Term::Var(v) => match out.get(v) {
                    Some(bound) if *bound != value => return None,
                    Some(_) => {}
                    None => {
                        out.insert(v.clone(), value);
                    }
                },
                Term::Iri(s) => {
                    if value != Value::Iri(s.clone()) {
                        return None;
                    }
                }
                Term::Literal(s) => {
                    if value != Value::Literal(s.clone()) {
                        return None;
                    }
                }
            }
        }
        Some(out)
    }

    /// Constant (or already-bound) positions under `row`.
    pub(crate) fn resolve<'a>(&'a self, row: &'a Binding) -> ResolvedPattern<'a> {
        ResolvedPattern {
            subject: self.subject.resolve(row),
            predicate: self.predicate.resolve(row),
            object: self.object.resolve(row),
        }
    }
}

pub(crate) struct ResolvedPattern<'a> {
    pub subject: Option<Resolved<'a>>,
    pub predicate: Option<Resolved<'a>>,
    pub object: Option<Resolved<'a>>,
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Linear,
    Star,
    Range,
    Snowflake,
}

impl QueryKind {
    pub const ALL: [QueryKind; 4] = [
        QueryKind::Linear,
        QueryKind::Star,
        QueryKind::Range,
        QueryKind::Snowflake,
    ];

    pub fn type_number(self) -> u8 {
        match self {
            QueryKind::Linear => 1,
            QueryKind::Star => 2,
            QueryKind::Range => 3,
            QueryKind::Snowflake => 4,
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryKind::Linear => "linear",
            QueryKind::Star => "star",
            QueryKind::Range => "range",
            QueryKind::Snowflake => "snowflake",
        })
    }
}

/// Inclusive numeric bounds on the object of triples with `predicate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeFilter {
    pub predicate: String,
    pub lower: f64,
    pub upper: f64,
}

impl RangeFilter {
    pub(crate) fn admits(&self, triple: &Triple) -> bool {
        if triple.predicate != self.predicate {
            return true;
        }
        triple
            .object
            .trim()
            .parse::<f64>()
            .is_ok_and(|v| v >= self.lower && v <= self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPattern {
    #[serde(rename = "type")]
    pub kind: QueryKind,
    pub patterns: Vec<TriplePattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<RangeFilter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregate>,
}

impl QueryPattern {
    /// Checks the shape rule of the query's kind.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidQuery(format!("{} query: {msg}", self.kind)));
        if self.patterns.is_empty() {
            return bad("no patterns".into());
        }
        for p in &self.patterns {
            if matches!(p.subject, Term::Literal(_)) || matches!(p.predicate, Term::Literal(_)) {
                return bad(format!("literal outside object position in `{p}`"));
            }
        }
        if self.kind != QueryKind::Range && self.filter.is_some() {
            return bad("only range queries carry a filter".into());
        }
        match self.kind {
            QueryKind::Linear => {
                for w in self.patterns.windows(2) {
                    match (w[0].object.as_var(), w[1].subject.as_var()) {
                        (Some(a), Some(b)) if a == b => {}
                        _ => return bad(format!("`{}` does not chain into `{}`", w[0], w[1])),
                    }
                }
            }
            QueryKind::Star => {
                let center = &self.patterns[0].subject;
                if self.patterns.iter().any(|p| &p.subject != center) {
                    return bad("patterns do not share one subject".into());
                }
            }
            QueryKind::Range => {
                let Some(filter) = &self.filter else {
                    return bad("missing range filter".into());
                };
                if self.patterns.len() != 1 {
                    return bad("exactly one pattern expected".into());
                }
                if self.patterns[0].predicate != Term::Iri(filter.predicate.clone()) {
                    return bad("filter predicate differs from the pattern predicate".into());
                }
                if filter.lower.is_nan() || filter.upper.is_nan() || filter.lower > filter.upper {
                    return bad("empty or NaN bounds".into());
                }
            }
            QueryKind::Snowflake => {
                let center = &self.patterns[0].subject;
                for w in self.patterns.windows(2) {
                    let continues_chain = w[0]
                        .object
                        .as_var()
                        .is_some_and(|v| w[1].subject.as_var() == Some(v));
                    if w[1].subject != *center && !continues_chain {
                        return bad(format!("`{}` is neither on the center nor on the chain", w[1]));
                    }
                }
            }
        }
        Ok(())
    }

    /// Logical pattern joins.
    pub fn joins(&self) -> usize {
        match self.kind {
            QueryKind::Range => 0,
            _ => self.patterns.len().saturating_sub(1),
        }
    }
}

impl fmt::Display for QueryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.kind)?;
        for (i, p) in self.patterns.iter().enumerate() {
            if i > 0 {
                f.write_str(" . ")?;
            }
            write!(f, "{p}")?;
        }
        if let Some(r) = &self.filter {
            write!(f, " FILTER({} in [{}, {}])", r.predicate, r.lower, r.upper)?;
        }
        Ok(())
    }
}

pub type Binding = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryMetrics {
    pub nodes_touched: usize,
    pub locally_answered: bool,
    pub joins: usize,
    pub triples_scanned: usize,
}

impl QueryMetrics {
    /// Scanned triples plus a fixed cost per remote node.
    pub fn qet_proxy(&self) -> usize {
        self.triples_scanned + REMOTE_HOP_COST * self.nodes_touched.saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub bindings: BTreeSet<Binding>,
    pub metrics: QueryMetrics,
    /// Set when the query asks for `COUNT`.
    pub count: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(s: &str, p: &str, o: &str) -> TriplePattern {
        TriplePattern::new(s.parse().unwrap(), p.parse().unwrap(), o.parse().unwrap())
    }

    #[test]
    fn term_syntax() {
        assert_eq!("?x".parse::<Term>().unwrap(), Term::var("x"));
        assert_eq!("<a>".parse::<Term>().unwrap(), Term::iri("a"));
        assert_eq!("_:b".parse::<Term>().unwrap(), Term::iri("_:b"));
        assert_eq!("\"1 2\"".parse::<Term>().unwrap(), Term::literal("1 2"));
        assert_eq!("\"\"".parse::<Term>().unwrap(), Term::literal(""));
        assert!("a".parse::<Term>().is_err());
        assert!("?".parse::<Term>().is_err());
        assert!("\"".parse::<Term>().is_err());
        for t in [Term::var("v"), Term::iri("x/y"), Term::literal("3.5")] {
            assert_eq!(t.to_string().parse::<Term>().unwrap(), t);
        }
    }

    #[test]
    fn shape_rules() {
        let linear = QueryPattern {
            kind: QueryKind::Linear,
            patterns: vec![tp("<a>", "<p>", "?x"), tp("?x", "<q>", "?y")],
            filter: None,
            aggregate: None,
        };
        linear.validate().unwrap();
        assert_eq!(linear.joins(), 1);

        let broken = QueryPattern {
            patterns: vec![tp("<a>", "<p>", "?x"), tp("?z", "<q>", "?y")],
            ..linear.clone()
        };
        assert!(broken.validate().is_err());

        let star = QueryPattern {
            kind: QueryKind::Star,
            patterns: vec![tp("?s", "<p>", "\"1\""), tp("?s", "<q>", "?o")],
            filter: None,
            aggregate: None,
        };
        star.validate().unwrap();
        let not_star = QueryPattern {
            patterns: vec![tp("?s", "<p>", "?x"), tp("?x", "<q>", "?o")],
            ..star.clone()
        };
        assert!(not_star.validate().is_err());

        let snowflake = QueryPattern {
            kind: QueryKind::Snowflake,
            patterns: vec![
                tp("?c", "<p>", "\"1\""),
                tp("?c", "<q>", "?y"),
                tp("?y", "<r>", "?z"),
            ],
            filter: None,
            aggregate: None,
        };
        snowflake.validate().unwrap();
        assert_eq!(snowflake.joins(), 2);

        let range = QueryPattern {
            kind: QueryKind::Range,
            patterns: vec![tp("?s", "<t>", "?v")],
            filter: Some(RangeFilter {
                predicate: "t".into(),
                lower: 10.0,
                upper: 30.0,
            }),
            aggregate: Some(Aggregate::Count),
        };
        range.validate().unwrap();
        assert_eq!(range.joins(), 0);
        let unfiltered = QueryPattern {
            filter: None,
            ..range.clone()
        };
        assert!(unfiltered.validate().is_err());
        let filtered_star = QueryPattern {
            filter: range.filter.clone(),
            ..star
        };
        assert!(filtered_star.validate().is_err());
    }

    #[test]
    fn workload_json_shape() {
        let q = QueryPattern {
            kind: QueryKind::Range,
            patterns: vec![tp("?s", "<t>", "?v")],
            filter: Some(RangeFilter {
                predicate: "t".into(),
                lower: 1.0,
                upper: 2.5,
            }),
            aggregate: None,
        };
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(
            json,
            r#"{"type":"range","patterns":[{"s":"?s","p":"<t>","o":"?v"}],"filter":{"predicate":"t","lower":1.0,"upper":2.5}}"#
        );
        let back: QueryPattern = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn bind_respects_literal_flag_and_repeated_vars() {
        let t = Triple::resource("a", "p", "a");
        let row = Binding::new();
        assert!(tp("?x", "<p>", "?x").bind(&t, &row).is_some());
        assert!(tp("?x", "<p>", "\"a\"").bind(&t, &row).is_none());
        let lit = Triple::literal("a", "p", "b");
        assert!(tp("?x", "<p>", "?x").bind(&lit, &row).is_none());
    }
}
