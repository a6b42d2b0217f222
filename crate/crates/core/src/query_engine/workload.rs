use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Aggregate, QueryKind, QueryPattern, RangeFilter, Term, TriplePattern};
use crate::error::{Error, Result};
use crate::triple_io::{Triple, TriplePos, TripleStore};

/// Number of queries per shape. Defaults to 3 linear, 4 star, 3 range and
/// 2 snowflake queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadCounts {
    pub linear: usize,
    pub star: usize,
    pub range: usize,
    pub snowflake: usize,
}

impl Default for WorkloadCounts {
    fn default() -> Self {
        WorkloadCounts {
            linear: 3,
            star: 4,
            range: 3,
            snowflake: 2,
        }
    }
}

impl WorkloadCounts {
    pub fn total(&self) -> usize {
        self.linear + self.star + self.range + self.snowflake
    }

    pub fn zero() -> Self {
        WorkloadCounts {
            linear: 0,
            star: 0,
            range: 0,
            snowflake: 0,
        }
    }
}

struct Sampler<'s> {
    store: &'s TripleStore,
    rng: ChaCha8Rng,
    literal_counts: HashMap<&'s str, HashMap<&'s str, usize>>,
}

fn links_onward(store: &TripleStore, t: &Triple) -> bool {
    t.resource_object()
        .is_some_and(|o| !store.with_subject(o).is_empty())
}

fn constant(t: &Triple) -> Term {
    if t.object_is_literal {
        Term::literal(&t.object)
    } else {
        Term::iri(&t.object)
    }
}

impl<'s> Sampler<'s> {
    fn triple(&self, pos: TriplePos) -> &'s Triple {
        &self.store.triples()[pos]
    }

    /// First position satisfying `pred`, scanning cyclically from a random start.
    fn find(&mut self, pred: impl Fn(&Triple) -> bool) -> Option<TriplePos> {
        let n = self.store.len();
        let start = self.rng.gen_range(0..n);
        (0..n).map(|i| (start + i) % n).find(|&p| pred(self.triple(p)))
    }

    fn any(&mut self) -> TriplePos {
        self.rng.gen_range(0..self.store.len())
    }

    fn pick(&mut self, positions: &[TriplePos]) -> TriplePos {
        *positions.choose(&mut self.rng).expect("non-empty")
    }

    /// How many triples share this triple's predicate and object.
    fn rarity(&mut self, pos: TriplePos) -> usize {
        let store = self.store;
        let t = self.triple(pos);
        if !t.object_is_literal {
            return store
                .with_object(&t.object)
                .iter()
                .filter(|&&p| store.triples()[p].predicate == t.predicate)
                .count();
        }
        let counts = self.literal_counts.entry(&t.predicate).or_insert_with(|| {
            let mut m: HashMap<&str, usize> = HashMap::new();
            for &p in store.with_predicate(&t.predicate) {
                let other = &store.triples()[p];
                if other.object_is_literal {
                    *m.entry(other.object.as_str()).or_default() += 1;
                }
            }
            m
        });
        counts[t.object.as_str()]
    }

    /// Most selective triple among `positions` (ties: earliest).
    fn rarest(&mut self, positions: &[TriplePos]) -> Option<TriplePos> {
        let mut best: Option<(usize, TriplePos)> = None;
        for &p in positions {
            let r = self.rarity(p);
            if best.is_none_or(|(br, bp)| (r, p) < (br, bp)) {
                best = Some((r, p));
            }
        }
        best.map(|(_, p)| p)
    }

    fn distinct_predicates(&self, subject: &str) -> Vec<&'s str> {
        let mut preds: Vec<&str> = Vec::new();
        for &p in self.store.with_subject(subject) {
            let pred = self.triple(p).predicate.as_str();
            if !preds.contains(&pred) {
                preds.push(pred);
            }
        }
        preds
    }

    fn linear(&mut self) -> QueryPattern {
        let store = self.store;
        let mut patterns = Vec::new();
        if let Some(first) = self.find(|t| links_onward(store, t)) {
            let t1 = self.triple(first);
            patterns.push(TriplePattern::new(Term::iri(&t1.subject), Term::iri(&t1.predicate), Term::var("v1")));
            let mut current = t1;
            let mut hops = if self.rng.gen_bool(0.5) { 2 } else { 1 };
            let mut depth = 1;
            while hops > 0 {
                let Some(next_subject) = current.resource_object() else { break };
                let candidates = self.store.with_subject(next_subject);
                if candidates.is_empty() {
                    break;
                }
                let pos = self.pick(candidates);
                let t = self.triple(pos);
                patterns.push(TriplePattern::new(
                    Term::var(format!("v{depth}")),
                    Term::iri(&t.predicate),
                    Term::var(format!("v{}", depth + 1)),
                ));
                current = t;
                depth += 1;
                hops -= 1;
            }
        } else {
            let pos = self.any();
            let t = self.triple(pos);
            patterns.push(TriplePattern::new(Term::iri(&t.subject), Term::iri(&t.predicate), Term::var("v1")));
        }
        QueryPattern {
            kind: QueryKind::Linear,
            patterns,
            filter: None,
            aggregate: None,
        }
    }

    fn star(&mut self) -> QueryPattern {
        let store = self.store;
        let pos = self
            .find(|t| {
                let preds = store.with_subject(&t.subject);
                preds
                    .iter()
                    .any(|&p| store.triples()[p].predicate != t.predicate)
            })
            .unwrap_or_else(|| self.any());
        let subject = self.triple(pos).subject.as_str();
        let anchor_pos = self
            .rarest(store.with_subject(subject))
            .expect("subject has triples");
        let anchor = self.triple(anchor_pos);
        let mut others: Vec<&str> = self
            .distinct_predicates(subject)
            .into_iter()
            .filter(|p| *p != anchor.predicate)
            .collect();
        others.shuffle(&mut self.rng);
        let extra = others.len().min(self.rng.gen_range(1..=2));
        let mut patterns = vec![TriplePattern::new(Term::var("s"), Term::iri(&anchor.predicate), constant(anchor))];
        for (i, p) in others[..extra].iter().enumerate() {
            patterns.push(TriplePattern::new(Term::var("s"), Term::iri(*p), Term::var(format!("o{}", i + 1))));
        }
        QueryPattern {
            kind: QueryKind::Star,
            patterns,
            filter: None,
            aggregate: None,
        }
    }

    fn range(&mut self, count: bool) -> QueryPattern {
        let numeric = |t: &Triple| t.object_is_literal && t.object.trim().parse::<f64>().is_ok_and(f64::is_finite);
        let (predicate, lower, upper) = match self.find(numeric) {
            Some(pos) => {
                let t = self.triple(pos);
                let value: f64 = t.object.trim().parse().expect("checked numeric");
                let (lo, hi) = self
                    .store
                    .with_predicate(&t.predicate)
                    .iter()
                    .filter_map(|&p| self.triple(p).object.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .fold((value, value), |(lo, hi), v| (lo.min(v), hi.max(v)));
                let half = if hi > lo { (hi - lo) * 0.05 } else { 0.5 };
                (t.predicate.clone(), value - half, value + half)
            }
            None => {
                let pos = self.any();
            let t = self.triple(pos);
                (t.predicate.clone(), 0.0, 0.0)
            }
        };
        QueryPattern {
            kind: QueryKind::Range,
            patterns: vec![TriplePattern::new(Term::var("s"), Term::iri(&predicate), Term::var("v"))],
            filter: Some(RangeFilter {
                predicate,
                lower,
                upper,
            }),
            aggregate: count.then_some(Aggregate::Count),
        }
    }

    fn snowflake(&mut self) -> QueryPattern {
        let store = self.store;
        let Some(link_pos) = self.find(|t| links_onward(store, t) && store.with_subject(&t.subject).len() >= 2) else {
            let mut q = self.star();
            q.kind = QueryKind::Snowflake;
            return q;
        };
        let link = self.triple(link_pos);
        let own: Vec<TriplePos> = store.with_subject(&link.subject).to_vec();
        let off_chain: Vec<TriplePos> = own
            .iter()
            .copied()
            .filter(|&p| self.triple(p).predicate != link.predicate)
            .collect();
        let anchor_pool: Vec<TriplePos> = if off_chain.is_empty() {
            own.iter().copied().filter(|&p| p != link_pos).collect()
        } else {
            off_chain
        };
        let anchor_pos = self.rarest(&anchor_pool).expect("at least two triples");
        let anchor = self.triple(anchor_pos);
        let next_subject = link.resource_object().expect("links onward");
        let tail_pos = self.pick(store.with_subject(next_subject));
        let tail = self.triple(tail_pos);
        QueryPattern {
            kind: QueryKind::Snowflake,
            patterns: vec![
                TriplePattern::new(Term::var("c"), Term::iri(&anchor.predicate), constant(anchor)),
                TriplePattern::new(Term::var("c"), Term::iri(&link.predicate), Term::var("y")),
                TriplePattern::new(Term::var("y"), Term::iri(&tail.predicate), Term::var("z")),
            ],
            filter: None,
            aggregate: None,
        }
    }
}

/// Deterministic workload whose constants are sampled from `store`.
pub fn generate_workload(store: &TripleStore, seed: u64, counts: WorkloadCounts) -> Result<Vec<QueryPattern>> {
    if counts.total() == 0 {
        return Ok(Vec::new());
    }
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let mut sampler = Sampler {
        store,
        rng: ChaCha8Rng::seed_from_u64(seed),
        literal_counts: HashMap::new(),
    };
    let mut out = Vec::with_capacity(counts.total());
    for _ in 0..counts.linear {
        out.push(sampler.linear());
    }
    for _ in 0..counts.star {
        out.push(sampler.star());
    }
    for i in 0..counts.range {
        out.push(sampler.range(i % 2 == 1));
    }
    for _ in 0..counts.snowflake {
        out.push(sampler.snowflake());
    }
    for q in &out {
        q.validate()?;
    }
    Ok(out)
}

pub fn write_workload(path: impl AsRef<Path>, workload: &[QueryPattern]) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(workload)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_workload(path: impl AsRef<Path>) -> Result<Vec<QueryPattern>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let workload: Vec<QueryPattern> = serde_json::from_str(&text)?;
    for q in &workload {
        q.validate()?;
    }
    Ok(workload)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query_engine::evaluate_centralized;
    use crate::triple_io::generate_lod_like;

    #[test]
    fn default_mix_is_3_4_3_2() {
        let store = generate_lod_like(1, 4, 20);
        let w = generate_workload(&store, 9, WorkloadCounts::default()).unwrap();
        assert_eq!(w.len(), 12);
        let hist: Vec<usize> = QueryKind::ALL
            .iter()
            .map(|k| w.iter().filter(|q| q.kind == *k).count())
            .collect();
        assert_eq!(hist, vec![3, 4, 3, 2]);
    }

    #[test]
    fn zero_counts_give_empty_workload() {
        let store = generate_lod_like(1, 2, 5);
        assert!(generate_workload(&store, 1, WorkloadCounts::zero()).unwrap().is_empty());
        assert!(generate_workload(&TripleStore::new(), 1, WorkloadCounts::zero()).unwrap().is_empty());
        assert!(generate_workload(&TripleStore::new(), 1, WorkloadCounts::default()).is_err());
    }

    #[test]
    fn same_seed_same_workload() {
        let store = generate_lod_like(2, 3, 15);
        let a = generate_workload(&store, 5, WorkloadCounts::default()).unwrap();
        let b = generate_workload(&store, 5, WorkloadCounts::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn queries_on_generated_data_have_answers() {
        let store = generate_lod_like(4, 5, 30);
        for seed in 0..5 {
            for q in generate_workload(&store, seed, WorkloadCounts::default()).unwrap() {
                let r = evaluate_centralized(&store, &q).unwrap();
                assert!(!r.bindings.is_empty(), "empty answer for {q}");
            }
        }
    }

    #[test]
    fn degenerate_store_still_yields_valid_queries() {
        let store = TripleStore::from_triples([Triple::literal("a", "p", "x")]).unwrap();
        let w = generate_workload(&store, 3, WorkloadCounts::default()).unwrap();
        assert_eq!(w.len(), 12);
        for q in &w {
            q.validate().unwrap();
        }
    }

    #[test]
    fn json_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = generate_lod_like(1, 3, 10);
        let w = generate_workload(&store, 1, WorkloadCounts::default()).unwrap();
        let path = dir.path().join("workload.json");
        write_workload(&path, &w).unwrap();
        assert_eq!(read_workload(&path).unwrap(), w);
    }
}
