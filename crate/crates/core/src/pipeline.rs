//! Stage glue shared by the command-line tool and the benchmarks:
//! frames → events → ladders → queries → anchors → joint subgraphs.

use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{
    build_person_index, extract_partial_events, group_by_document, normalize_event, raw_event,
    sentence_events, AbstractionCap, NormalizedEvent, PartialEvent, PartialEventSequence,
    RenderStyle, SrlFrame,
};
use crate::kg::KgStore;
use crate::matcher::{
    ground, sentence_ground, AnchorSets, EmbeddingMatrix, EventIndex, Query, TextEmbedder,
};
use crate::retriever::{
    build_joint_graph, check_reserved_relations, retrieve_subgraph, ContextEvent, JointNodeId,
    JointSubgraph, CONTEXT_RELATION, GROUNDING_RELATION,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub threshold: f64,
    pub max_hops: usize,
    pub cap: AbstractionCap,
    /// Skip event extraction and ground whole sentences. Implies no ladder.
    pub no_extract: bool,
    /// Keep raw person mentions.
    pub no_norm: bool,
    /// Query only the full event (cap `NONE`).
    pub no_pie: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            threshold: crate::matcher::DEFAULT_THRESHOLD,
            max_hops: crate::retriever::DEFAULT_MAX_HOPS,
            cap: AbstractionCap::default(),
            no_extract: false,
            no_norm: false,
            no_pie: false,
        }
    }
}

impl PipelineOptions {
    pub fn effective_cap(&self) -> AbstractionCap {
        if self.no_pie || self.no_extract {
            AbstractionCap::None
        } else {
            self.cap
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() || self.threshold < 0.0 {
            return Err(Error::Config(format!(
                "threshold must be finite and >= 0, got {}",
                self.threshold
            )));
        }
        if self.max_hops == 0 {
            return Err(Error::Config("max hops must be at least 1".into()));
        }
        Ok(())
    }
}

/// A document's context events in narrative order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub events: Vec<NormalizedEvent>,
}

impl Document {
    pub fn context_events(&self) -> Vec<ContextEvent> {
        self.events
            .iter()
            .map(|e| ContextEvent {
                event: e.event.clone(),
                text: e.render(RenderStyle::Plain),
            })
            .collect()
    }
}

/// Groups frames by document and turns them into events, honouring the
/// extraction and normalization switches. Documents come out sorted by id.
pub fn prepare_documents(frames: Vec<SrlFrame>, opts: &PipelineOptions) -> Result<Vec<Document>> {
    group_by_document(frames)
        .into_iter()
        .map(|(doc_id, mut frames)| {
            frames.sort_by_key(|a| (a.sent_idx, a.frame_idx));
            let index = (!opts.no_norm).then(|| build_person_index(&frames));
            let events = if opts.no_extract {
                sentence_events(&frames, index.as_ref())?
            } else if let Some(index) = &index {
                frames
                    .iter()
                    .map(|f| normalize_event(f, index))
                    .collect::<Result<_>>()?
            } else {
                frames.iter().map(raw_event).collect()
            };
            Ok(Document { doc_id, events })
        })
        .collect()
}

pub fn ladders(doc: &Document, cap: AbstractionCap) -> Vec<PartialEventSequence> {
    doc.events
        .iter()
        .map(|e| extract_partial_events(e, cap))
        .collect()
}

/// Embeds every distinct text once.
pub fn embed_texts<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    embedder: &dyn TextEmbedder,
) -> Result<HashMap<&'a str, Vec<f32>>> {
    let mut unique: Vec<&str> = texts.into_iter().collect();
    unique.sort_unstable();
    unique.dedup();
    let vectors = unique
        .par_iter()
        .map(|t| embedder.embed(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(unique.into_iter().zip(vectors).collect())
}

/// Every ladder rung of every document, in document / event / level order.
pub fn partial_events(docs: &[Document], opts: &PipelineOptions) -> Vec<PartialEvent> {
    docs.iter()
        .flat_map(|d| ladders(d, opts.effective_cap()))
        .flat_map(|s| s.levels)
        .collect()
}

/// One query per rung, embedding the plain rendering.
pub fn queries_from_partials(
    partials: &[PartialEvent],
    embedder: &dyn TextEmbedder,
) -> Result<Vec<Query>> {
    let vectors = embed_texts(partials.iter().map(|p| p.plain.as_str()), embedder)?;
    Ok(partials
        .iter()
        .map(|p| Query {
            event: p.event.clone(),
            level: p.level,
            vector: vectors[p.plain.as_str()].clone(),
        })
        .collect())
}

pub fn build_queries(
    docs: &[Document],
    opts: &PipelineOptions,
    embedder: &dyn TextEmbedder,
) -> Result<Vec<Query>> {
    queries_from_partials(&partial_events(docs, opts), embedder)
}

pub fn ground_queries(
    index: &EventIndex,
    queries: &[Query],
    opts: &PipelineOptions,
) -> Result<AnchorSets> {
    if opts.no_extract {
        sentence_ground(index, queries, opts.threshold)
    } else {
        ground(index, queries, opts.threshold)
    }
}

/// Retrieves and assembles the joint subgraph of every document (in
/// parallel; output in document order). The instance id is the document id.
pub fn retrieve_documents(
    store: &KgStore,
    docs: &[Document],
    anchors: &AnchorSets,
    opts: &PipelineOptions,
) -> Result<Vec<JointSubgraph>> {
    check_reserved_relations(store)?;
    docs.par_iter()
        .map(|doc| {
            let mine = anchors.for_document(&doc.doc_id);
            let subgraph = retrieve_subgraph(store, &mine, opts.max_hops)?;
            build_joint_graph(store, &doc.doc_id, &subgraph, &doc.context_events(), &mine)
        })
        .collect()
}

/// Initial scorer features, one row per joint node in canonical order. KG
/// nodes take their stored embedding row when `kg_vectors` is given.
pub fn node_features(
    graph: &JointSubgraph,
    embedder: &dyn TextEmbedder,
    kg_vectors: Option<&EmbeddingMatrix>,
) -> Result<Array2<f32>> {
    let dim = kg_vectors.map_or(embedder.dim(), |m| m.dim());
    if embedder.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: embedder.dim(),
        });
    }
    let mut out = Array2::zeros((graph.node_count(), dim));
    for (mut row, node) in out.rows_mut().into_iter().zip(graph.nodes()) {
        let vector = match (node.id, kg_vectors) {
            (JointNodeId::Kg(n), Some(m)) => {
                if n.index() >= m.len() {
                    return Err(Error::UnknownNode(n.0 as u64));
                }
                m.row(n.index()).to_vec()
            }
            _ => embedder.embed(&node.text)?,
        };
        row.assign(&ndarray::ArrayView1::from(&vector[..]));
    }
    Ok(out)
}

/// Sizes of one instance's retrieved and joint graphs. The retrieved part
/// is recovered from the joint graph: every path has at least one edge, so
/// its nodes are exactly the endpoints of the KG-relation edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSizes {
    pub sub_nodes: usize,
    pub sub_edges: usize,
    pub joint_nodes: usize,
    pub joint_edges: usize,
}

impl GraphSizes {
    pub fn of(joint: &JointSubgraph) -> Self {
        let kg_edges: Vec<_> = joint
            .edges
            .iter()
            .filter(|e| e.rel != GROUNDING_RELATION && e.rel != CONTEXT_RELATION)
            .collect();
        let nodes: BTreeSet<JointNodeId> = kg_edges.iter().flat_map(|e| [e.src, e.dst]).collect();
        GraphSizes {
            sub_nodes: nodes.len(),
            sub_edges: kg_edges.len(),
            joint_nodes: joint.node_count(),
            joint_edges: joint.edges.len(),
        }
    }
}
