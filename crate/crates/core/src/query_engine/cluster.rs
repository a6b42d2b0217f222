use std::collections::HashMap;

use super::{Resolved, ResolvedPattern};
use crate::error::{Error, Result};
use crate::plan::PlanFile;
use crate::triple_io::{TriplePos, TripleStore};

/// What one simulated node stores: its own triples plus replicas, indexed.
#[derive(Debug, Clone)]
pub struct NodeView<'a> {
    pub id: usize,
    pub owned: Vec<TriplePos>,
    pub replicas: Vec<TriplePos>,
    replica_mask: Vec<bool>,
    by_subject: HashMap<&'a str, Vec<TriplePos>>,
    by_predicate: HashMap<&'a str, Vec<TriplePos>>,
    by_resource: HashMap<&'a str, Vec<TriplePos>>,
    by_literal: HashMap<&'a str, Vec<TriplePos>>,
    visible: Vec<TriplePos>,
}

impl<'a> NodeView<'a> {
    fn build(id: usize, store: &'a TripleStore, owned: Vec<TriplePos>, replicas: Vec<TriplePos>) -> Self {
        let mut replica_mask = vec![false; store.len()];
        for &p in &replicas {
            replica_mask[p] = true;
        }
        let mut visible: Vec<TriplePos> = owned.iter().chain(&replicas).copied().collect();
        visible.sort_unstable();
        let mut by_subject: HashMap<&str, Vec<TriplePos>> = HashMap::new();
        let mut by_predicate: HashMap<&str, Vec<TriplePos>> = HashMap::new();
        let mut by_resource: HashMap<&str, Vec<TriplePos>> = HashMap::new();
        let mut by_literal: HashMap<&str, Vec<TriplePos>> = HashMap::new();
        for &p in &visible {
            let t = &store.triples()[p];
            by_subject.entry(&t.subject).or_default().push(p);
            by_predicate.entry(&t.predicate).or_default().push(p);
            let by_object = if t.object_is_literal { &mut by_literal } else { &mut by_resource };
            by_object.entry(&t.object).or_default().push(p);
        }
        NodeView {
            id,
            owned,
            replicas,
            replica_mask,
            by_subject,
            by_predicate,
            by_resource,
            by_literal,
            visible,
        }
    }

    pub fn holds_replica(&self, pos: TriplePos) -> bool {
        self.replica_mask[pos]
    }

    /// Candidate positions for a (partially bound) pattern, owned and replica
    /// alike, using the most selective bound position.
    pub(crate) fn candidates(&self, pattern: &ResolvedPattern<'_>) -> &[TriplePos] {
        let empty: &[TriplePos] = &[];
        let mut chosen: Option<&[TriplePos]> = None;
        match pattern.subject {
            Some(Resolved::Iri(s)) => {
                chosen = Some(self.by_subject.get(s).map_or(empty, Vec::as_slice));
            }
            Some(Resolved::Literal(_)) => return empty,
            None => {}
        }
        match pattern.predicate {
            Some(Resolved::Iri(p)) => {
                let list = self.by_predicate.get(p).map_or(empty, Vec::as_slice);
                if chosen.is_none_or(|c| list.len() < c.len()) {
                    chosen = Some(list);
                }
            }
            Some(Resolved::Literal(_)) => return empty,
            None => {}
        }
        if let Some(o) = pattern.object {
            let list = match o {
                Resolved::Iri(v) => self.by_resource.get(v),
                Resolved::Literal(v) => self.by_literal.get(v),
            }
            .map_or(empty, Vec::as_slice);
            if chosen.is_none_or(|c| list.len() < c.len()) {
                chosen = Some(list);
            }
        }
        chosen.unwrap_or(&self.visible)
    }
}

/// A store spread over `m` nodes, each with its own indices.
#[derive(Debug, Clone)]
pub struct Cluster<'a> {
    store: &'a TripleStore,
    owner: Vec<usize>,
    nodes: Vec<NodeView<'a>>,
}

impl<'a> Cluster<'a> {
    /// `owner[pos]` is the home node of each triple; `replicas[node]` lists the
    /// extra triples that node holds.
    pub fn new(store: &'a TripleStore, owner: Vec<usize>, replicas: Vec<Vec<TriplePos>>) -> Result<Self> {
        let m = replicas.len();
        if m == 0 {
            return Err(Error::ZeroNodes);
        }
        if owner.len() != store.len() {
            return Err(Error::InvalidPlan(format!(
                "owner map covers {} triples, store has {}",
                owner.len(),
                store.len()
            )));
        }
        let mut owned = vec![Vec::new(); m];
        for (pos, &node) in owner.iter().enumerate() {
            owned
                .get_mut(node)
                .ok_or_else(|| Error::InvalidPlan(format!("triple {pos} owned by unknown node {node}")))?
                .push(pos);
        }
        let nodes = owned
            .into_iter()
            .zip(replicas)
            .enumerate()
            .map(|(id, (own, mut rep))| {
                rep.retain(|&p| p < store.len() && owner[p] != id);
                rep.sort_unstable();
                rep.dedup();
                NodeView::build(id, store, own, rep)
            })
            .collect();
        Ok(Cluster { store, owner, nodes })
    }

    pub fn from_plan(store: &'a TripleStore, plan: &PlanFile) -> Result<Self> {
        let owner = plan.owner_map(store.len())?;
        Cluster::new(store, owner, plan.replicas.clone())
    }

    /// Triple `i` lives on node `i mod m`.
    pub fn round_robin_owner(n: usize, m: usize) -> Vec<usize> {
        (0..n).map(|i| i % m.max(1)).collect()
    }

    pub fn store(&self) -> &'a TripleStore {
        self.store
    }

    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    pub fn owner(&self, pos: TriplePos) -> usize {
        self.owner[pos]
    }

    pub fn node(&self, id: usize) -> &NodeView<'a> {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[NodeView<'a>] {
        &self.nodes
    }

    pub fn visible_on(&self, node: usize, pos: TriplePos) -> bool {
        self.owner[pos] == node || self.nodes[node].holds_replica(pos)
    }
}
