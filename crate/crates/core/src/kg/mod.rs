//! Immutable eventuality knowledge graph with interned relations and
//! forward/backward adjacency.

mod load;
mod snapshot;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::{load_kg, read_edges, read_nodes};
pub use snapshot::{restore, snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

/// Dense node identifier, `0..N` in node-file order of ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventualityNode {
    pub id: u64,
    pub text: String,
    pub freq: u64,
}

/// Bijective relation-name interner. Append-only while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationTable {
    names: Vec<String>,
    ids: HashMap<String, RelationId>,
}

impl RelationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> RelationId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = RelationId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<RelationId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: RelationId) -> Option<&str> {
        self.names.get(id.0 as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypedEdge {
    pub src: NodeId,
    pub rel: RelationId,
    pub dst: NodeId,
    pub weight: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

/// One adjacency slot: relation, the node on the other end, and the merged weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjEntry {
    pub rel: RelationId,
    pub other: NodeId,
    pub weight: f32,
}

/// Compressed adjacency in one direction.
#[derive(Debug, Clone, Default, PartialEq)]
struct Csr {
    offsets: Vec<usize>,
    entries: Vec<AdjEntry>,
}

impl Csr {
    fn build(node_count: usize, edges: &[TypedEdge], direction: Direction) -> Self {
        let key = |e: &TypedEdge| match direction {
            Direction::Out => (e.src, e.dst),
            Direction::In => (e.dst, e.src),
        };
        let mut counts = vec![0usize; node_count + 1];
        for e in edges {
            counts[key(e).0.index() + 1] += 1;
        }
        for i in 0..node_count {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut entries = vec![
            AdjEntry {
                rel: RelationId(0),
                other: NodeId(0),
                weight: 0.0,
            };
            edges.len()
        ];
        for e in edges {
            let (owner, other) = key(e);
            let slot = &mut cursor[owner.index()];
            entries[*slot] = AdjEntry {
                rel: e.rel,
                other,
                weight: e.weight,
            };
            *slot += 1;
        }
        for n in 0..node_count {
            entries[offsets[n]..offsets[n + 1]].sort_by_key(|a| (a.rel, a.other));
        }
        Csr { offsets, entries }
    }

    fn row(&self, node: NodeId) -> &[AdjEntry] {
        let i = node.index();
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// The loaded eventuality graph. Immutable once built; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct KgStore {
    nodes: Vec<EventualityNode>,
    relations: RelationTable,
    out_adj: Csr,
    in_adj: Csr,
}

impl KgStore {
    /// Builds a store from dense nodes and raw edges. Duplicate `(src, rel, dst)`
    /// rows are merged by summing weights in input order.
    pub fn from_parts(
        nodes: Vec<EventualityNode>,
        relations: RelationTable,
        raw_edges: Vec<TypedEdge>,
    ) -> Result<Self> {
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i as u64 {
                return Err(Error::SparseNodeIds(i as u64));
            }
            if node.text.is_empty() {
                return Err(Error::InvalidInput(format!("node {i} has empty text")));
            }
        }
        let n = nodes.len();
        for e in &raw_edges {
            for id in [e.src, e.dst] {
                if id.index() >= n {
                    return Err(Error::UnknownNode(id.0 as u64));
                }
            }
            if relations.name(e.rel).is_none() {
                return Err(Error::UnknownRelation(format!("#{}", e.rel.0)));
            }
        }
        let edges = merge_duplicates(raw_edges);
        Ok(KgStore {
            out_adj: Csr::build(n, &edges, Direction::Out),
            in_adj: Csr::build(n, &edges, Direction::In),
            nodes,
            relations,
        })
    }

    pub fn empty() -> Self {
        KgStore::from_parts(Vec::new(), RelationTable::new(), Vec::new())
            .expect("empty store is valid")
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.entries.len()
    }

    pub fn relations(&self) -> &RelationTable {
        &self.relations
    }

    pub fn nodes(&self) -> &[EventualityNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&EventualityNode> {
        self.nodes
            .get(id.index())
            .ok_or(Error::UnknownNode(id.0 as u64))
    }

    pub fn text(&self, id: NodeId) -> Result<&str> {
        self.node(id).map(|n| n.text.as_str())
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    /// Raw adjacency row, sorted by `(rel, other)`.
    pub fn adjacency(&self, node: NodeId, direction: Direction) -> Result<&[AdjEntry]> {
        if !self.contains(node) {
            return Err(Error::UnknownNode(node.0 as u64));
        }
        Ok(match direction {
            Direction::Out => self.out_adj.row(node),
            Direction::In => self.in_adj.row(node),
        })
    }

    /// Edges incident to `node` in the given direction paired with the
    /// neighbor on the far end, sorted by `(rel, neighbor)`.
    pub fn neighbors(
        &self,
        node: NodeId,
        direction: Direction,
    ) -> Result<Vec<(TypedEdge, NodeId)>> {
        Ok(self
            .adjacency(node, direction)?
            .iter()
            .map(|a| {
                let edge = match direction {
                    Direction::Out => TypedEdge {
                        src: node,
                        rel: a.rel,
                        dst: a.other,
                        weight: a.weight,
                    },
                    Direction::In => TypedEdge {
                        src: a.other,
                        rel: a.rel,
                        dst: node,
                        weight: a.weight,
                    },
                };
                (edge, a.other)
            })
            .collect())
    }

    /// All edges in `(src, rel, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = TypedEdge> + '_ {
        (0..self.nodes.len()).flat_map(move |i| {
            let src = NodeId(i as u32);
            self.out_adj.row(src).iter().map(move |a| TypedEdge {
                src,
                rel: a.rel,
                dst: a.other,
                weight: a.weight,
            })
        })
    }

    /// Smallest relation id among parallel edges `src -> dst`, if any.
    pub fn first_relation(&self, src: NodeId, dst: NodeId) -> Option<RelationId> {
        if !self.contains(src) {
            return None;
        }
        // rows are sorted by rel first, so the first hit is the smallest rel
        self.out_adj
            .row(src)
            .iter()
            .find(|a| a.other == dst)
            .map(|a| a.rel)
    }
}

fn merge_duplicates(mut edges: Vec<TypedEdge>) -> Vec<TypedEdge> {
    // stable sort keeps file order among duplicates so the weight sum is reproducible
    edges.sort_by_key(|e| (e.src, e.rel, e.dst));
    let mut merged: Vec<TypedEdge> = Vec::with_capacity(edges.len());
    for e in edges {
        match merged.last_mut() {
            Some(last) if (last.src, last.rel, last.dst) == (e.src, e.rel, e.dst) => {
                last.weight += e.weight;
            }
            _ => merged.push(e),
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nodes(n: usize) -> Vec<EventualityNode> {
        (0..n)
            .map(|i| EventualityNode {
                id: i as u64,
                text: format!("[P0] event {i}"),
                freq: 1,
            })
            .collect()
    }

    fn edge(src: u32, rel: RelationId, dst: u32, weight: f32) -> TypedEdge {
        TypedEdge {
            src: NodeId(src),
            rel,
            dst: NodeId(dst),
            weight,
        }
    }

    #[test]
    fn isolated_node_has_no_neighbors() {
        let store = KgStore::from_parts(nodes(2), RelationTable::new(), vec![]).unwrap();
        assert!(store
            .neighbors(NodeId(0), Direction::Out)
            .unwrap()
            .is_empty());
        assert!(store
            .neighbors(NodeId(1), Direction::In)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn neighbors_sorted_by_rel_then_id() {
        let mut rels = RelationTable::new();
        let reason = rels.intern("Reason");
        let edges = vec![edge(0, reason, 5, 1.0), edge(0, reason, 2, 1.0)];
        let store = KgStore::from_parts(nodes(6), rels, edges).unwrap();
        let got: Vec<_> = store
            .neighbors(NodeId(0), Direction::Out)
            .unwrap()
            .into_iter()
            .map(|(e, n)| (store.relations().name(e.rel).unwrap().to_string(), n.0))
            .collect();
        assert_eq!(
            got,
            vec![("Reason".to_string(), 2), ("Reason".to_string(), 5)]
        );
    }

    #[test]
    fn unknown_node_is_an_error() {
        let store = KgStore::from_parts(nodes(1), RelationTable::new(), vec![]).unwrap();
        assert!(matches!(
            store.neighbors(NodeId(3), Direction::Out),
            Err(Error::UnknownNode(3))
        ));
    }

    #[test]
    fn duplicate_edges_sum_weights() {
        let mut rels = RelationTable::new();
        let r = rels.intern("Precedence");
        let store =
            KgStore::from_parts(nodes(2), rels, vec![edge(0, r, 1, 1.0), edge(0, r, 1, 2.0)])
                .unwrap();
        assert_eq!(store.edge_count(), 1);
        assert_eq!(store.edges().next().unwrap().weight, 3.0);
    }

    #[test]
    fn every_edge_in_both_views_exactly_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rels = RelationTable::new();
        let ids: Vec<_> = ["Reason", "Result", "Contrast"]
            .iter()
            .map(|r| rels.intern(r))
            .collect();
        let raw: Vec<_> = (0..100)
            .map(|_| {
                edge(
                    rng.gen_range(0..30),
                    ids[rng.gen_range(0..3)],
                    rng.gen_range(0..30),
                    1.0,
                )
            })
            .collect();
        let store = KgStore::from_parts(nodes(30), rels, raw.clone()).unwrap();

        // oracle: distinct (src, rel, dst) triples of the raw rows
        let mut expected: Vec<_> = raw.iter().map(|e| (e.src, e.rel, e.dst)).collect();
        expected.sort();
        expected.dedup();

        let mut from_out = Vec::new();
        let mut from_in = Vec::new();
        for i in 0..30 {
            let n = NodeId(i);
            for (e, _) in store.neighbors(n, Direction::Out).unwrap() {
                assert_eq!(e.src, n);
                from_out.push((e.src, e.rel, e.dst));
            }
            for (e, _) in store.neighbors(n, Direction::In).unwrap() {
                assert_eq!(e.dst, n);
                from_in.push((e.src, e.rel, e.dst));
            }
        }
        from_out.sort();
        from_in.sort();
        assert_eq!(from_out, expected);
        assert_eq!(from_in, expected);
    }

    #[test]
    fn relation_interning_round_trips() {
        let mut rels = RelationTable::new();
        for name in ["Reason", "reason", "Co_Occurrence", "Reason"] {
            let id = rels.intern(name);
            assert_eq!(rels.name(id), Some(name));
            assert_eq!(rels.id(name), Some(id));
        }
        assert_eq!(rels.len(), 3);
    }
}
