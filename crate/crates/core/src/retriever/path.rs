use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kg::{Direction, KgStore, NodeId, TypedEdge};

/// Hop limit between two anchors: at most two intermediate nodes.
pub const DEFAULT_MAX_HOPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub src: NodeId,
    pub dst: NodeId,
    pub nodes: Vec<NodeId>,
    pub edges: Vec<TypedEdge>,
}

impl PathResult {
    pub fn hops(&self) -> usize {
        self.edges.len()
    }
}

/// Minimal-hop directed path `from -> to` of at most `max_hops` edges.
///
/// Among equally short paths the lexicographically smallest node-id
/// sequence wins; between two consecutive nodes the edge with the smallest
/// relation id is used.
pub fn shortest_path(
    store: &KgStore,
    from: NodeId,
    to: NodeId,
    max_hops: usize,
) -> Result<Option<PathResult>> {
    if max_hops == 0 {
        return Err(Error::Config("hop limit must be at least 1".into()));
    }
    for n in [from, to] {
        if !store.contains(n) {
            return Err(Error::UnknownNode(n.0 as u64));
        }
    }
    if from == to {
        return Ok(Some(PathResult {
            src: from,
            dst: to,
            nodes: vec![from],
            edges: Vec::new(),
        }));
    }

    // Backward BFS from the target, level by level, until the source is reached.
    let mut dist: HashMap<NodeId, usize> = HashMap::from([(to, 0)]);
    let mut frontier = vec![to];
    let mut depth = 0;
    while !dist.contains_key(&from) && depth < max_hops && !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &n in &frontier {
            for adj in store.adjacency(n, Direction::In)? {
                if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(adj.other) {
                    slot.insert(depth);
                    next.push(adj.other);
                }
            }
        }
        frontier = next;
    }
    let Some(&total) = dist.get(&from) else {
        return Ok(None);
    };

    // Walk forward picking the smallest next node that stays on a shortest path.
    let mut nodes = vec![from];
    let mut edges = Vec::with_capacity(total);
    let mut cur = from;
    for remaining in (0..total).rev() {
        let mut best: Option<(NodeId, TypedEdge)> = None;
        for adj in store.adjacency(cur, Direction::Out)? {
            if dist.get(&adj.other) != Some(&remaining) {
                continue;
            }
            // rows are sorted by (rel, other): the first hit per node has the smallest rel
            if best.is_none_or(|(b, _)| adj.other < b) {
                best = Some((
                    adj.other,
                    TypedEdge {
                        src: cur,
                        rel: adj.rel,
                        dst: adj.other,
                        weight: adj.weight,
                    },
                ));
            }
        }
        let (next, edge) =
            best.ok_or_else(|| Error::Invariant("broken shortest-path layering".into()))?;
        nodes.push(next);
        edges.push(edge);
        cur = next;
    }
    Ok(Some(PathResult {
        src: from,
        dst: to,
        nodes,
        edges,
    }))
}
