//! Greedy fragment placement: largest fragment first, into the lightest node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeAssignment {
    pub node_id: usize,
    /// In placement order.
    pub fragment_ids: Vec<usize>,
    pub load_triples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub nodes: Vec<NodeAssignment>,
}

impl AllocationPlan {
    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    pub fn loads(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.load_triples).collect()
    }

    pub fn max_load(&self) -> usize {
        self.loads().into_iter().max().unwrap_or(0)
    }

    pub fn min_load(&self) -> usize {
        self.loads().into_iter().min().unwrap_or(0)
    }

    /// Node per fragment id.
    pub fn node_of_fragment(&self, k: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; k];
        for node in &self.nodes {
            for &f in &node.fragment_ids {
                if f < k {
                    out[f] = Some(node.node_id);
                }
            }
        }
        out
    }
}

/// Places fragments (given by size, indexed by fragment id) onto `m` nodes.
///
/// Fragments are taken in descending size order (ties: ascending id) and each
/// goes to the node with the smallest current load (ties: lowest node id).
pub fn allocate(fragment_sizes: &[usize], m: usize) -> Result<AllocationPlan> {
    if m == 0 {
        return Err(Error::ZeroNodes);
    }
    let mut order: Vec<usize> = (0..fragment_sizes.len()).collect();
    order.sort_by(|&a, &b| fragment_sizes[b].cmp(&fragment_sizes[a]).then(a.cmp(&b)));

    let mut nodes: Vec<NodeAssignment> = (0..m)
        .map(|node_id| NodeAssignment {
            node_id,
            fragment_ids: Vec::new(),
            load_triples: 0,
        })
        .collect();
    for f in order {
        let target = nodes
            .iter_mut()
            .min_by_key(|n| (n.load_triples, n.node_id))
            .expect("m >= 1");
        target.fragment_ids.push(f);
        target.load_triples += fragment_sizes[f];
    }
    Ok(AllocationPlan { nodes })
}
