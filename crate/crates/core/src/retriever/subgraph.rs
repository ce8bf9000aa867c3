use std::collections::BTreeSet;

use rayon::prelude::*;

use super::path::{shortest_path, PathResult};
use crate::error::Result;
use crate::kg::{KgStore, NodeId, RelationId};
use crate::matcher::AnchorSets;

/// Union of the retrieved paths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KgSubgraph {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<(NodeId, RelationId, NodeId)>,
}

impl KgSubgraph {
    pub fn add_path(&mut self, path: &PathResult) {
        self.nodes.extend(path.nodes.iter().copied());
        self.edges
            .extend(path.edges.iter().map(|e| (e.src, e.rel, e.dst)));
    }
}

/// Ordered anchor pairs drawn from different source events, without
/// repeats and without self-pairs.
pub fn anchor_pairs(anchors: &AnchorSets) -> BTreeSet<(NodeId, NodeId)> {
    let per_event: Vec<BTreeSet<NodeId>> = anchors
        .iter()
        .map(|(_, ms)| ms.iter().map(|m| m.node_id).collect())
        .collect();
    let mut pairs = BTreeSet::new();
    for (i, a) in per_event.iter().enumerate() {
        for (j, b) in per_event.iter().enumerate() {
            if i == j {
                continue;
            }
            for &va in a {
                for &vb in b {
                    if va != vb {
                        pairs.insert((va, vb));
                    }
                }
            }
        }
    }
    pairs
}

/// Searches every anchor pair in both orientations and unions the paths found.
pub fn retrieve_subgraph(
    store: &KgStore,
    anchors: &AnchorSets,
    max_hops: usize,
) -> Result<KgSubgraph> {
    let pairs: Vec<(NodeId, NodeId)> = anchor_pairs(anchors).into_iter().collect();
    let paths: Vec<Option<PathResult>> = pairs
        .par_iter()
        .map(|&(a, b)| shortest_path(store, a, b, max_hops))
        .collect::<Result<_>>()?;
    let mut sub = KgSubgraph::default();
    for p in paths.iter().flatten() {
        sub.add_path(p);
    }
    Ok(sub)
}
