use std::collections::BTreeSet;

use super::params::RgcnParams;
use crate::error::{Error, Result};
use crate::retriever::JointSubgraph;

/// A typed multigraph over dense node indices, ready for message passing.
/// Messages flow along `(src, slot, dst)` from `src` into `dst`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelGraph {
    pub num_nodes: usize,
    /// Sorted by `(slot, dst, src)`, no duplicates.
    edges: Vec<(u32, u32, u32)>,
}

impl RelGraph {
    /// Builds from `(src, slot, dst)` triples; duplicates collapse.
    pub fn new(
        num_nodes: usize,
        triples: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (src, slot, dst) in triples {
            if src >= num_nodes || dst >= num_nodes {
                return Err(Error::InvalidInput(format!(
                    "edge {src}->{dst} outside graph of {num_nodes} nodes"
                )));
            }
            set.insert((slot as u32, dst as u32, src as u32));
        }
        Ok(RelGraph {
            num_nodes,
            edges: set.into_iter().collect(),
        })
    }

    /// Maps a joint subgraph onto the parameter relation table. Nodes keep
    /// the canonical order of [`JointSubgraph::nodes`]. With inverse
    /// relations every edge also appears reversed under slot `R + r`.
    pub fn from_joint(graph: &JointSubgraph, params: &RgcnParams) -> Result<Self> {
        let ids: Vec<_> = graph.nodes().map(|n| n.id).collect();
        let index = |id| {
            ids.binary_search(&id)
                .map_err(|_| Error::InvalidInput(format!("edge endpoint {id} is not a node")))
        };
        let base = params.relations.len();
        let mut triples = Vec::with_capacity(graph.edges.len() * 2);
        for e in &graph.edges {
            let r = params
                .relations
                .iter()
                .position(|n| *n == e.rel)
                .ok_or_else(|| Error::UnknownRelation(e.rel.clone()))?;
            let (s, d) = (index(e.src)?, index(e.dst)?);
            triples.push((s, r, d));
            if params.inverse_relations {
                triples.push((d, base + r, s));
            }
        }
        RelGraph::new(ids.len(), triples)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(src, slot, dst)` in `(slot, dst, src)` order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges
            .iter()
            .map(|&(r, d, s)| (s as usize, r as usize, d as usize))
    }

    pub(crate) fn max_slot(&self) -> Option<usize> {
        self.edges.last().map(|e| e.0 as usize)
    }

    /// Runs of edges sharing `(slot, dst)`, as `(slot, dst, sources)`.
    pub(crate) fn groups(&self) -> impl Iterator<Item = (usize, usize, Vec<usize>)> + '_ {
        self.edges
            .chunk_by(|a, b| a.0 == b.0 && a.1 == b.1)
            .map(|run| {
                let (r, d, _) = run[0];
                (
                    r as usize,
                    d as usize,
                    run.iter().map(|e| e.2 as usize).collect(),
                )
            })
    }
}
