//! Deployable plan files.
//!
//! Triple references are positions into the canonical serialization of the
//! store (`serialize_ntriples`), so a plan is self-contained next to that file.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocator::AllocationPlan;
use crate::error::{Error, Result};
use crate::partitioner::PartitionResult;
use crate::replicator::ReplicationDecision;
use crate::triple_io::{TriplePos, TripleStore};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentRecord {
    pub id: usize,
    pub master: String,
    #[serde(rename = "tripleRefs")]
    pub triple_refs: Vec<TriplePos>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    #[serde(rename = "fragmentIds")]
    pub fragment_ids: Vec<usize>,
}

/// Output of the partitioning stage on its own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentFile {
    pub k: usize,
    #[serde(rename = "orphanCount")]
    pub orphan_count: usize,
    pub fragments: Vec<FragmentRecord>,
}

impl FragmentFile {
    pub fn from_partition(partition: &PartitionResult) -> Self {
        FragmentFile {
            k: partition.k(),
            orphan_count: partition.orphan_count,
            fragments: fragment_records(partition),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.fragments.iter().map(|f| f.triple_refs.len()).collect()
    }
}

/// `{ k, m, fragments, nodes, replicas }`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub k: usize,
    pub m: usize,
    pub fragments: Vec<FragmentRecord>,
    pub nodes: Vec<NodeRecord>,
    /// Per node, replicated triples it does not own.
    pub replicas: Vec<Vec<TriplePos>>,
}

fn fragment_records(partition: &PartitionResult) -> Vec<FragmentRecord> {
    partition
        .fragments
        .iter()
        .map(|f| FragmentRecord {
            id: f.id,
            master: f.master.clone(),
            triple_refs: f.members.clone(),
        })
        .collect()
}

impl PlanFile {
    pub fn new(
        fragments: Vec<FragmentRecord>,
        allocation: &AllocationPlan,
        replication: Option<&ReplicationDecision>,
    ) -> Self {
        let m = allocation.m();
        PlanFile {
            k: fragments.len(),
            m,
            fragments,
            nodes: allocation
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.node_id,
                    fragment_ids: n.fragment_ids.clone(),
                })
                .collect(),
            replicas: replication
                .map(|r| r.replicas.clone())
                .unwrap_or_else(|| vec![Vec::new(); m]),
        }
    }

    pub fn from_parts(
        partition: &PartitionResult,
        allocation: &AllocationPlan,
        replication: Option<&ReplicationDecision>,
    ) -> Self {
        Self::new(fragment_records(partition), allocation, replication)
    }

    /// Owning node per triple position.
    pub fn owner_map(&self, n: usize) -> Result<Vec<usize>> {
        let fragment_node = self.fragment_nodes()?;
        let mut owner = vec![usize::MAX; n];
        for f in &self.fragments {
            let node = fragment_node[f.id];
            for &pos in &f.triple_refs {
                let slot = owner.get_mut(pos).ok_or_else(|| {
                    Error::InvalidPlan(format!("fragment {} references triple {pos} beyond {n}", f.id))
                })?;
                if *slot != usize::MAX {
                    return Err(Error::InvalidPlan(format!("triple {pos} is in two fragments")));
                }
                *slot = node;
            }
        }
        if let Some(pos) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidPlan(format!("triple {pos} belongs to no fragment")));
        }
        Ok(owner)
    }

    fn fragment_nodes(&self) -> Result<Vec<usize>> {
        if self.m == 0 || self.nodes.len() != self.m || self.replicas.len() != self.m {
            return Err(Error::InvalidPlan(format!(
                "m = {} but {} node records and {} replica lists",
                self.m,
                self.nodes.len(),
                self.replicas.len()
            )));
        }
        if self.fragments.len() != self.k
            || self.fragments.iter().enumerate().any(|(i, f)| f.id != i)
        {
            return Err(Error::InvalidPlan("fragment ids must be 0..k in order".into()));
        }
        let mut fragment_node = vec![usize::MAX; self.k];
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidPlan("node ids must be 0..m in order".into()));
            }
            for &f in &node.fragment_ids {
                match fragment_node.get_mut(f) {
                    Some(slot) if *slot == usize::MAX => *slot = i,
                    Some(_) => {
                        return Err(Error::InvalidPlan(format!("fragment {f} placed twice")))
                    }
                    None => return Err(Error::InvalidPlan(format!("unknown fragment {f}"))),
                }
            }
        }
        if let Some(f) = fragment_node.iter().position(|&n| n == usize::MAX) {
            return Err(Error::InvalidPlan(format!("fragment {f} is not placed")));
        }
        Ok(fragment_node)
    }

    /// Checks every structural invariant of the plan against its store.
    pub fn validate(&self, store: &TripleStore) -> Result<()> {
        let owner = self.owner_map(store.len())?;
        let triples = store.triples();
        let fragment_of: HashMap<TriplePos, usize> = self
            .fragments
            .iter()
            .flat_map(|f| f.triple_refs.iter().map(move |&p| (p, f.id)))
            .collect();

        for f in &self.fragments {
            for &p in store.with_subject(&f.master) {
                if fragment_of[&p] != f.id {
                    return Err(Error::InvalidPlan(format!(
                        "triple {p} of master `{}` is outside fragment {}",
                        f.master, f.id
                    )));
                }
            }
        }
        for (subject, positions) in store.subject_index() {
            let first = fragment_of[&positions[0]];
            if positions.iter().any(|p| fragment_of[p] != first) {
                return Err(Error::InvalidPlan(format!("subject `{subject}` is split across fragments")));
            }
        }

        let sizes: Vec<usize> = self.fragments.iter().map(|f| f.triple_refs.len()).collect();
        let loads: Vec<usize> = self
            .nodes
            .iter()
            .map(|n| n.fragment_ids.iter().map(|&f| sizes[f]).sum())
            .collect();
        let largest = sizes.iter().copied().max().unwrap_or(0);
        let spread = loads.iter().max().unwrap_or(&0) - loads.iter().min().unwrap_or(&0);
        if spread > largest {
            return Err(Error::InvalidPlan(format!(
                "load spread {spread} exceeds the largest fragment ({largest})"
            )));
        }

        let mut replicated = BTreeSet::new();
        for (node, list) in self.replicas.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidPlan(format!("replica list of node {node} is not strictly ascending")));
            }
            for &p in list {
                if p >= store.len() {
                    return Err(Error::InvalidPlan(format!("replica {p} out of range")));
                }
                if owner[p] == node {
                    return Err(Error::InvalidPlan(format!("node {node} holds a replica of its own triple {p}")));
                }
                replicated.insert(p);
            }
        }
        for &p in &replicated {
            for (node, list) in self.replicas.iter().enumerate() {
                if owner[p] != node && list.binary_search(&p).is_err() {
                    return Err(Error::InvalidPlan(format!("replicated triple {p} is missing on node {node}")));
                }
            }
        }
        let predicates: BTreeSet<&str> = replicated
            .iter()
            .map(|&p| triples[p].predicate.as_str())
            .collect();
        for predicate in predicates {
            if store
                .with_predicate(predicate)
                .iter()
                .any(|p| !replicated.contains(p))
            {
                return Err(Error::InvalidPlan(format!(
                    "predicate `{predicate}` is only partly replicated"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes") + "\n"
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path.as_ref())
    }
}

impl FragmentFile {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path.as_ref())
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::allocate;
    use crate::partitioner::{extract_popular_subjects, grow_fragments, GrowthMode};
    use crate::replicator::{compute_centrality, replicate, ThresholdMode};
    use crate::triple_io::Triple;

    fn fixture() -> (TripleStore, PlanFile) {
        let store = TripleStore::from_triples([
            Triple::resource("a", "p", "b"),
            Triple::resource("a", "p", "c"),
            Triple::resource("b", "q", "x"),
            Triple::resource("d", "p", "e"),
            Triple::literal("d", "r", "1"),
            Triple::literal("f", "r", "2"),
        ])
        .unwrap();
        let masters = extract_popular_subjects(&store, 2).unwrap();
        let partition = grow_fragments(&store, &masters, GrowthMode::Fixpoint).unwrap();
        let allocation = allocate(&partition.sizes(), 2).unwrap();
        let owner = PlanFile::from_parts(&partition, &allocation, None)
            .owner_map(store.len())
            .unwrap();
        let table = compute_centrality(&store).unwrap();
        let decision = replicate(&owner, 2, &table, 1.0, ThresholdMode::Inclusive, &store).unwrap();
        (
            store,
            PlanFile::from_parts(&partition, &allocation, Some(&decision)),
        )
    }

    #[test]
    fn valid_plan_round_trips() {
        let (store, plan) = fixture();
        plan.validate(&store).unwrap();
        let back: PlanFile = serde_json::from_str(&plan.to_json()).unwrap();
        assert_eq!(back, plan);
        assert!(plan.to_json().contains("\"tripleRefs\""));
        assert!(plan.to_json().contains("\"fragmentIds\""));
    }

    #[test]
    fn detects_missing_triple() {
        let (store, mut plan) = fixture();
        plan.fragments[0].triple_refs.pop();
        assert!(matches!(plan.validate(&store), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn detects_own_replica() {
        let (store, mut plan) = fixture();
        let owner = plan.owner_map(store.len()).unwrap();
        let own = owner.iter().position(|&o| o == 0).unwrap();
        plan.replicas[0].push(own);
        plan.replicas[0].sort_unstable();
        plan.replicas[0].dedup();
        assert!(plan.validate(&store).is_err());
    }

    #[test]
    fn detects_partial_predicate_replication() {
        let (store, mut plan) = fixture();
        let owner = plan.owner_map(store.len()).unwrap();
        // replicate a single `p` triple everywhere it is not owned
        let p = store.with_predicate("p")[0];
        for (node, list) in plan.replicas.iter_mut().enumerate() {
            list.retain(|&x| x != p);
            if owner[p] != node {
                list.push(p);
                list.sort_unstable();
            }
        }
        assert!(plan.validate(&store).is_err());
    }

    #[test]
    fn detects_unplaced_fragment() {
        let (store, mut plan) = fixture();
        plan.nodes[0].fragment_ids.clear();
        plan.nodes[1].fragment_ids.clear();
        assert!(plan.validate(&store).is_err());
    }
}
