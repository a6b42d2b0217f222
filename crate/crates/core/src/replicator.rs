//! Predicate degree centrality and threshold-driven partial replication.
//!
//! The centrality of a predicate is the number of distinct subjects using it
//! divided by the number of triples labelled with it. It reaches 1 exactly when
//! every subject uses the predicate once, and approaches 0 for predicates that
//! a few hubs repeat many times.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::triple_io::{TriplePos, TripleStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateCounts {
    pub distinct_subjects: usize,
    pub edge_count: usize,
}

impl PredicateCounts {
    pub fn centrality(&self) -> f64 {
        self.distinct_subjects as f64 / self.edge_count as f64
    }
}

/// Centrality per predicate, ordered by predicate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CentralityTable {
    entries: BTreeMap<String, PredicateCounts>,
}

impl CentralityTable {
    pub fn get(&self, predicate: &str) -> Option<f64> {
        self.entries.get(predicate).map(PredicateCounts::centrality)
    }

    pub fn counts(&self, predicate: &str) -> Option<PredicateCounts> {
        self.entries.get(predicate).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, PredicateCounts)> {
        self.entries.iter().map(|(p, c)| (p.as_str(), *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_centrality(&self) -> Option<f64> {
        self.iter().map(|(_, c)| c.centrality()).reduce(f64::min)
    }

    /// `predicate,distinct_subjects,edge_count,centrality`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["predicate", "distinct_subjects", "edge_count", "centrality"])?;
        for (p, c) in self.iter() {
            w.write_record([
                p.to_string(),
                c.distinct_subjects.to_string(),
                c.edge_count.to_string(),
                format!("{:.6}", c.centrality()),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<centrality report>", e))?;
        Ok(())
    }
}

pub fn compute_centrality(store: &TripleStore) -> Result<CentralityTable> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let triples = store.triples();
    let entries = store
        .predicate_index()
        .iter()
        .map(|(p, positions)| {
            let subjects: HashSet<&str> = positions
                .iter()
                .map(|&i| triples[i].subject.as_str())
                .collect();
            (
                p.clone(),
                PredicateCounts {
                    distinct_subjects: subjects.len(),
                    edge_count: positions.len(),
                },
            )
        })
        .collect();
    Ok(CentralityTable { entries })
}

/// Replication threshold: the centrality of the predicate that occurs most
/// often among the triples of the top subjects (ties: smallest predicate).
/// An override short-circuits the derivation.
pub fn derive_threshold(
    table: &CentralityTable,
    store: &TripleStore,
    top_subjects: &[String],
    override_value: Option<f64>,
) -> Result<f64> {
    if let Some(t) = override_value {
        return check_threshold(t);
    }
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for subject in top_subjects {
        for &pos in store.with_subject(subject) {
            *occurrences
                .entry(store.triples()[pos].predicate.as_str())
                .or_default() += 1;
        }
    }
    let (predicate, _) = occurrences
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .ok_or(Error::NoTopSubjectTriples)?;
    table
        .get(predicate)
        .ok_or_else(|| Error::InvalidPlan(format!("predicate `{predicate}` missing from centrality table")))
}

pub fn check_threshold(t: f64) -> Result<f64> {
    if t > 0.0 && t <= 1.0 {
        Ok(t)
    } else {
        Err(Error::InvalidThreshold(t))
    }
}

/// How the threshold comparison is applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// `centrality >= threshold`
    #[default]
    Inclusive,
    /// `centrality > threshold`
    Strict,
}

impl ThresholdMode {
    pub fn qualifies(self, centrality: f64, threshold: f64) -> bool {
        match self {
            ThresholdMode::Inclusive => centrality >= threshold,
            ThresholdMode::Strict => centrality > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationDecision {
    pub threshold: f64,
    pub mode: ThresholdMode,
    pub replicated_predicates: BTreeSet<String>,
    /// Sorted ascending.
    pub replicated_positions: Vec<TriplePos>,
    /// Per node: replicated triples the node does not own, sorted ascending.
    pub replicas: Vec<Vec<TriplePos>>,
    /// `replicated_positions.len() / n`
    pub replication_level: f64,
}

impl ReplicationDecision {
    /// Physical extra copies across all nodes.
    pub fn replica_copies(&self) -> usize {
        self.replicas.iter().map(Vec::len).sum()
    }
}

/// Copies every qualifying triple to every node that does not own it.
///
/// `owner[pos]` is the node holding triple `pos`; `m` is the node count.
pub fn replicate(
    owner: &[usize],
    m: usize,
    table: &CentralityTable,
    threshold: f64,
    mode: ThresholdMode,
    store: &TripleStore,
) -> Result<ReplicationDecision> {
    check_threshold(threshold)?;
    if owner.len() != store.len() {
        return Err(Error::InvalidPlan(format!(
            "owner map covers {} triples, store has {}",
            owner.len(),
            store.len()
        )));
    }
    let replicated_predicates: BTreeSet<String> = table
        .iter()
        .filter(|(_, c)| mode.qualifies(c.centrality(), threshold))
        .map(|(p, _)| p.to_string())
        .collect();
    let mut replicated_positions: Vec<TriplePos> = replicated_predicates
        .iter()
        .flat_map(|p| store.with_predicate(p).iter().copied())
        .collect();
    replicated_positions.sort_unstable();

    let mut replicas = vec![Vec::new(); m];
    for &pos in &replicated_positions {
        for (node, list) in replicas.iter_mut().enumerate() {
            if owner[pos] != node {
                list.push(pos);
            }
        }
    }
    let replication_level = if store.is_empty() {
        0.0
    } else {
        replicated_positions.len() as f64 / store.len() as f64
    };
    Ok(ReplicationDecision {
        threshold,
        mode,
        replicated_predicates,
        replicated_positions,
        replicas,
        replication_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triple_io::Triple;
    use proptest::prelude::*;

    fn store(triples: &[(&str, &str, &str)]) -> TripleStore {
        TripleStore::from_triples(triples.iter().map(|(s, p, o)| Triple::resource(*s, *p, *o)))
            .unwrap()
    }

    #[test]
    fn one_edge_per_subject_is_one() {
        let t = compute_centrality(&store(&[("a", "p", "x"), ("b", "p", "y")])).unwrap();
        assert_eq!(t.get("p"), Some(1.0));
    }

    #[test]
    fn repeated_subject_halves() {
        let t = compute_centrality(&store(&[("a", "p", "x"), ("a", "p", "y")])).unwrap();
        assert_eq!(t.get("p"), Some(0.5));
        assert_eq!(
            t.counts("p"),
            Some(PredicateCounts {
                distinct_subjects: 1,
                edge_count: 2
            })
        );
    }

    #[test]
    fn empty_store_has_no_centrality() {
        assert!(matches!(
            compute_centrality(&TripleStore::new()).unwrap_err(),
            Error::EmptyStore
        ));
    }

    #[test]
    fn override_wins() {
        let s = store(&[("a", "p", "x")]);
        let t = compute_centrality(&s).unwrap();
        assert_eq!(derive_threshold(&t, &s, &[], Some(0.65)).unwrap(), 0.65);
        assert_eq!(derive_threshold(&t, &s, &[], Some(0.51)).unwrap(), 0.51);
        assert!(derive_threshold(&t, &s, &[], Some(0.0)).is_err());
        assert!(derive_threshold(&t, &s, &[], Some(1.5)).is_err());
    }

    #[test]
    fn single_candidate_threshold() {
        let s = store(&[("a", "p", "x"), ("a", "p", "y"), ("b", "p", "z"), ("c", "q", "z")]);
        let t = compute_centrality(&s).unwrap();
        let th = derive_threshold(&t, &s, &["a".into()], None).unwrap();
        assert_eq!(th, 2.0 / 3.0);
    }

    #[test]
    fn most_frequent_top_predicate_decides() {
        let s = store(&[
            ("a", "p", "x"),
            ("a", "q", "y"),
            ("a", "q", "z"),
            ("b", "q", "w"),
            ("c", "p", "w"),
        ]);
        let t = compute_centrality(&s).unwrap();
        // q occurs twice among a's triples
        let th = derive_threshold(&t, &s, &["a".into()], None).unwrap();
        assert_eq!(th, t.get("q").unwrap());
    }

    #[test]
    fn top_subjects_without_triples() {
        let s = store(&[("a", "p", "x")]);
        let t = compute_centrality(&s).unwrap();
        assert!(matches!(
            derive_threshold(&t, &s, &["zz".into()], None).unwrap_err(),
            Error::NoTopSubjectTriples
        ));
    }

    #[test]
    fn nothing_qualifies_at_one() {
        let s = store(&[("a", "p", "x"), ("a", "p", "y"), ("b", "q", "x"), ("b", "q", "z")]);
        let t = compute_centrality(&s).unwrap();
        let d = replicate(&[0, 0, 1, 1], 2, &t, 1.0, ThresholdMode::Inclusive, &s).unwrap();
        assert_eq!(d.replication_level, 0.0);
        assert_eq!(d.replica_copies(), 0);
    }

    #[test]
    fn minimum_threshold_replicates_everything() {
        let s = store(&[("a", "p", "x"), ("a", "p", "y"), ("b", "q", "x"), ("c", "q", "z")]);
        let t = compute_centrality(&s).unwrap();
        let min = t.min_centrality().unwrap();
        let owner = [0, 1, 2, 0];
        let d = replicate(&owner, 3, &t, min, ThresholdMode::Inclusive, &s).unwrap();
        assert_eq!(d.replication_level, 1.0);
        for (node, list) in d.replicas.iter().enumerate() {
            assert!(list.iter().all(|&p| owner[p] != node));
            assert_eq!(list.len(), owner.iter().filter(|&&o| o != node).count());
        }
    }

    #[test]
    fn strict_mode_excludes_the_threshold_itself() {
        let s = store(&[("a", "p", "x"), ("b", "p", "y"), ("a", "q", "x"), ("a", "q", "y")]);
        let t = compute_centrality(&s).unwrap();
        let inclusive = replicate(&[0, 0, 0, 0], 2, &t, 1.0, ThresholdMode::Inclusive, &s).unwrap();
        let strict = replicate(&[0, 0, 0, 0], 2, &t, 1.0, ThresholdMode::Strict, &s).unwrap();
        assert_eq!(inclusive.replicated_positions, vec![0, 1]);
        assert!(strict.replicated_positions.is_empty());
    }

    #[test]
    fn csv_report() {
        let s = store(&[("a", "p", "x"), ("a", "p", "y"), ("b", "q", "x")]);
        let mut out = Vec::new();
        compute_centrality(&s).unwrap().write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "predicate,distinct_subjects,edge_count,centrality\np,1,2,0.500000\nq,1,1,1.000000\n"
        );
    }

    fn random_store() -> impl Strategy<Value = TripleStore> {
        prop::collection::vec((0u8..20, 0u8..6, 0u8..20), 1..150).prop_map(|ts| {
            TripleStore::from_triples(ts.into_iter().map(|(s, p, o)| {
                Triple::resource(format!("s{s}"), format!("p{p}"), format!("o{o}"))
            }))
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn centrality_bounds(s in random_store()) {
            let t = compute_centrality(&s).unwrap();
            for (_, c) in t.iter() {
                let v = c.centrality();
                prop_assert!(v > 0.0 && v <= 1.0);
                prop_assert_eq!(v == 1.0, c.distinct_subjects == c.edge_count);
            }
        }

        #[test]
        fn lower_threshold_replicates_more(s in random_store(), a in 0.01f64..1.0, b in 0.01f64..1.0, m in 1usize..4) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let t = compute_centrality(&s).unwrap();
            let owner: Vec<usize> = (0..s.len()).map(|i| i % m).collect();
            let low = replicate(&owner, m, &t, lo, ThresholdMode::Inclusive, &s).unwrap();
            let high = replicate(&owner, m, &t, hi, ThresholdMode::Inclusive, &s).unwrap();
            let low_set: HashSet<_> = low.replicated_positions.iter().collect();
            prop_assert!(high.replicated_positions.iter().all(|p| low_set.contains(p)));
            prop_assert!(low.replication_level >= high.replication_level);
            for (pos, t) in s.triples().iter().enumerate() {
                prop_assert_eq!(
                    low.replicated_positions.binary_search(&pos).is_ok(),
                    low.replicated_predicates.contains(&t.predicate)
                );
            }
        }
    }
}
