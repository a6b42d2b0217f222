use std::collections::{BTreeSet, HashMap, HashSet};

use super::{Binding, Cluster, QueryMetrics, QueryPattern, QueryResult, Resolved, Value};
use crate::error::{Error, Result};
use crate::query_engine::Aggregate;
use crate::triple_io::{TriplePos, TripleStore};

/// Cost charged per remote node in [`QueryMetrics::qet_proxy`].
pub const REMOTE_HOP_COST: usize = 1000;

fn finish(q: &QueryPattern, bindings: BTreeSet<Binding>, metrics: QueryMetrics) -> QueryResult {
    let count = q.aggregate.map(|Aggregate::Count| bindings.len());
    QueryResult {
        bindings,
        metrics,
        count,
    }
}

fn global_candidates(store: &TripleStore, pattern: &super::TriplePattern) -> Vec<TriplePos> {
    use super::Term;
    match (&pattern.subject, &pattern.predicate, &pattern.object) {
        (Term::Literal(_), _, _) | (_, Term::Literal(_), _) => Vec::new(),
        (Term::Iri(s), _, _) => store.with_subject(s).to_vec(),
        (_, _, Term::Iri(o)) => store.with_object(o).to_vec(),
        (_, Term::Iri(p), _) => store.with_predicate(p).to_vec(),
        _ => (0..store.len()).collect(),
    }
}

/// Reference evaluation: per-pattern index lookup, then hash joins on the
/// variables shared with what is already bound.
pub fn evaluate_centralized(store: &TripleStore, q: &QueryPattern) -> Result<QueryResult> {
    q.validate()?;
    let empty = Binding::new();
    let mut rows: Vec<Binding> = vec![Binding::new()];
    let mut bound: HashSet<String> = HashSet::new();
    let mut scanned = 0;

    for pattern in &q.patterns {
        let candidates = global_candidates(store, pattern);
        scanned += candidates.len();
        let matches: Vec<Binding> = candidates
            .iter()
            .map(|&p| &store.triples()[p])
            .filter(|t| q.filter.as_ref().is_none_or(|f| f.admits(t)))
            .filter_map(|t| pattern.bind(t, &empty))
            .collect();

        let mut shared: Vec<&str> = pattern.vars().filter(|v| bound.contains(*v)).collect();
        shared.sort_unstable();
        shared.dedup();
        let key = |row: &Binding| -> Vec<Value> { shared.iter().map(|v| row[*v].clone()).collect() };

        let mut table: HashMap<Vec<Value>, Vec<&Binding>> = HashMap::new();
        for m in &matches {
            table.entry(key(m)).or_default().push(m);
        }
        let mut joined = Vec::new();
        for row in &rows {
            if let Some(hits) = table.get(&key(row)) {
                for hit in hits {
                    let mut merged = row.clone();
                    merged.extend(hit.iter().map(|(k, v)| (k.clone(), v.clone())));
                    joined.push(merged);
                }
            }
        }
        rows = joined;
        bound.extend(pattern.vars().map(str::to_string));
    }

    let metrics = QueryMetrics {
        nodes_touched: 1,
        locally_answered: true,
        joins: q.joins(),
        triples_scanned: scanned,
    };
    Ok(finish(q, rows.into_iter().collect(), metrics))
}

struct Traversal {
    rows: BTreeSet<Binding>,
    remote_nodes: BTreeSet<usize>,
    scanned: usize,
}

/// Pattern-at-a-time traversal starting at `home`. Each partial row is
/// extended by looking up the instantiated pattern on `home` (owned and
/// replicated data) and, when allowed, on every other node (owned data only).
fn traverse(cluster: &Cluster<'_>, q: &QueryPattern, home: usize, remote: bool) -> Traversal {
    let store = cluster.store();
    let mut rows: Vec<Binding> = vec![Binding::new()];
    let mut remote_nodes = BTreeSet::new();
    let mut scanned = 0;
    let admits = |pos: TriplePos| q.filter.as_ref().is_none_or(|f| f.admits(&store.triples()[pos]));

    for pattern in &q.patterns {
        let mut next = Vec::new();
        for row in &rows {
            let resolved = pattern.resolve(row);
            if matches!(resolved.subject, Some(Resolved::Literal(_))) {
                continue;
            }
            let local = cluster.node(home).candidates(&resolved);
            scanned += local.len();
            for &pos in local {
                if admits(pos) {
                    next.extend(pattern.bind(&store.triples()[pos], row));
                }
            }
            if !remote {
                continue;
            }
            for node in cluster.nodes().iter().filter(|n| n.id != home) {
                let found = node.candidates(&resolved);
                scanned += found.len();
                for &pos in found {
                    if cluster.owner(pos) != node.id || cluster.visible_on(home, pos) || !admits(pos) {
                        continue;
                    }
                    if let Some(b) = pattern.bind(&store.triples()[pos], row) {
                        remote_nodes.insert(node.id);
                        next.push(b);
                    }
                }
            }
        }
        rows = next;
    }
    Traversal {
        rows: rows.into_iter().collect(),
        remote_nodes,
        scanned,
    }
}

/// Rows reachable from `home`'s own data and replicas alone.
pub fn evaluate_on_home(cluster: &Cluster<'_>, q: &QueryPattern, home: usize) -> Result<BTreeSet<Binding>> {
    q.validate()?;
    check_home(cluster, home)?;
    Ok(traverse(cluster, q, home, false).rows)
}

fn check_home(cluster: &Cluster<'_>, home: usize) -> Result<()> {
    if home >= cluster.m() {
        return Err(Error::InvalidQuery(format!(
            "home node {home} out of range for {} nodes",
            cluster.m()
        )));
    }
    Ok(())
}

/// Evaluates `q` on the cluster, coordinated by `home`.
///
/// `nodes_touched` counts `home` plus every other node whose own triples had
/// to be fetched; `locally_answered` holds when `home` alone yields the full
/// answer.
pub fn evaluate_distributed(cluster: &Cluster<'_>, q: &QueryPattern, home: usize) -> Result<QueryResult> {
    q.validate()?;
    check_home(cluster, home)?;
    let full = traverse(cluster, q, home, true);
    let locally_answered =
        full.remote_nodes.is_empty() || traverse(cluster, q, home, false).rows == full.rows;
    let metrics = QueryMetrics {
        nodes_touched: 1 + full.remote_nodes.len(),
        locally_answered,
        joins: q.joins(),
        triples_scanned: full.scanned,
    };
    Ok(finish(q, full.rows, metrics))
}
