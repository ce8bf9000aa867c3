//! One function per stage. Each `*_records` function is pure over in-memory
//! inputs, so `pipeline` and the single commands share exactly one code path.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use evkg_core::event::{extract_partial_events, read_frames, PartialEvent};
use evkg_core::kg::{load_kg, restore, KgStore};
use evkg_core::matcher::{
    embed_store, grounding_stats, AnchorSets, EmbeddingMatrix, EventIndex, GroundingMode,
    HashingEmbedder, TextEmbedder, VectorTable,
};
use evkg_core::pipeline::{
    ground_queries, node_features, prepare_documents, queries_from_partials, retrieve_documents,
    Document, GraphSizes,
};
use evkg_core::rgcn::{score_choices, ChoiceInput, RelGraph, RgcnParams};
use evkg_core::serializer::{build_prompt, serialize, PromptSpec, SerializeOptions};
use evkg_core::{Error, Result};
use ndarray::Array1;

use crate::io::{display_name, open};
use crate::records::{
    documents, AnchorRecord, AttentionEntry, ChoiceSpec, GraphRecord, NormalizedRecord,
    ScoreRecord, StatsRecord, TextRecord,
};
use crate::settings::Settings;

pub fn load_store(s: &Settings) -> Result<KgStore> {
    match (&s.kg_snapshot, &s.kg_nodes, &s.kg_edges) {
        (Some(snap), _, _) => {
            let blob = std::fs::read(snap)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", snap.display())))?;
            restore(&blob)
        }
        (None, Some(nodes), Some(edges)) => load_kg(nodes, edges),
        _ => Err(Error::Config(
            "no knowledge graph: give --kg-snapshot or --kg-nodes with --kg-edges".into(),
        )),
    }
}

/// Name stamped into outputs so that runs with different embeddings are
/// never mixed up. Depends only on settings.
pub fn embedder_name(s: &Settings) -> String {
    match (&s.kg_embeddings, &s.text_vectors) {
        (Some(kg), Some(text)) => {
            format!("precomputed:{}+{}", display_name(kg), display_name(text))
        }
        _ => HashingEmbedder::new(s.hash_dim).name(),
    }
}

/// Text embedder plus, with real embeddings, the stored node matrix.
pub struct Embedding {
    pub embedder: Box<dyn TextEmbedder>,
    pub kg_vectors: Option<Arc<EmbeddingMatrix>>,
}

pub fn load_embedding(s: &Settings) -> Result<Embedding> {
    match (&s.kg_embeddings, &s.text_vectors) {
        (None, None) => Ok(Embedding {
            embedder: Box::new(HashingEmbedder::new(s.hash_dim)),
            kg_vectors: None,
        }),
        (Some(kg), Some(text)) => {
            let matrix = EmbeddingMatrix::read_from(open(kg)?)?;
            let table = VectorTable::read(open(text)?, &display_name(text))?;
            if table.dim() != matrix.dim() {
                return Err(Error::DimensionMismatch {
                    expected: matrix.dim(),
                    actual: table.dim(),
                });
            }
            Ok(Embedding {
                embedder: Box::new(table),
                kg_vectors: Some(Arc::new(matrix)),
            })
        }
        _ => Err(Error::Config(
            "--kg-embeddings and --text-vectors must be given together".into(),
        )),
    }
}

pub fn build_index(s: &Settings, store: &KgStore, emb: &Embedding) -> Result<EventIndex> {
    let matrix = match &emb.kg_vectors {
        Some(m) => {
            m.check_attached(store)?;
            m.clone()
        }
        None => Arc::new(embed_store(store, emb.embedder.as_ref())?),
    };
    EventIndex::build_shared(matrix, s.backend)
}

pub fn mode(s: &Settings) -> GroundingMode {
    if s.pipeline.no_extract {
        GroundingMode::Sentences
    } else {
        GroundingMode::Events
    }
}

pub fn read_events(path: &Path) -> Result<Vec<evkg_core::event::SrlFrame>> {
    read_frames(open(path)?, &display_name(path))
}

pub fn normalize_records(
    s: &Settings,
    frames: Vec<evkg_core::event::SrlFrame>,
) -> Result<Vec<NormalizedRecord>> {
    let docs = prepare_documents(frames, &s.pipeline)?;
    Ok(docs
        .into_iter()
        .flat_map(|d| d.events)
        .map(NormalizedRecord::from)
        .collect())
}

pub fn pie_records(s: &Settings, normalized: &[NormalizedRecord]) -> Vec<PartialEvent> {
    let mut out: Vec<PartialEvent> = normalized
        .iter()
        .flat_map(|r| extract_partial_events(&r.event, s.pipeline.effective_cap()).levels)
        .collect();
    out.sort_by(|a, b| (&a.event, a.level).cmp(&(&b.event, b.level)));
    out
}

pub fn ground_records(
    s: &Settings,
    index: &EventIndex,
    emb: &Embedding,
    partials: &[PartialEvent],
) -> Result<Vec<AnchorRecord>> {
    let queries = queries_from_partials(partials, emb.embedder.as_ref())?;
    let anchors = ground_queries(index, &queries, &s.pipeline)?;
    let name = embedder_name(s);
    Ok(anchors
        .matches()
        .map(|m| AnchorRecord {
            anchor: m.clone(),
            embedder: name.clone(),
        })
        .collect())
}

pub fn anchor_sets(s: &Settings, records: &[AnchorRecord]) -> Result<AnchorSets> {
    AnchorSets::from_matches(mode(s), records.iter().map(|r| r.anchor.clone()).collect())
}

pub fn retrieve_records(
    s: &Settings,
    store: &KgStore,
    normalized: &[NormalizedRecord],
    anchors: &[AnchorRecord],
) -> Result<Vec<GraphRecord>> {
    let docs: Vec<Document> = documents(normalized.to_vec());
    let sets = anchor_sets(s, anchors)?;
    let name = embedder_name(s);
    Ok(retrieve_documents(store, &docs, &sets, &s.pipeline)?
        .into_iter()
        .map(|graph| GraphRecord {
            graph,
            embedder: name.clone(),
        })
        .collect())
}

fn options(s: &Settings) -> SerializeOptions {
    SerializeOptions {
        relation_labels: s.relation_labels,
    }
}

pub fn serialize_records(s: &Settings, graphs: &[GraphRecord]) -> Vec<TextRecord> {
    let mut out: Vec<TextRecord> = graphs
        .iter()
        .map(|g| TextRecord {
            instance_id: g.graph.instance_id.clone(),
            variant: s.variant.to_string(),
            text: serialize(&g.graph, s.variant, options(s)),
            embedder: g.embedder.clone(),
        })
        .collect();
    out.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    out
}

fn graph_map(graphs: &[GraphRecord]) -> Result<BTreeMap<&str, &GraphRecord>> {
    let mut map = BTreeMap::new();
    for g in graphs {
        if map.insert(g.graph.instance_id.as_str(), g).is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate graph for instance {:?}",
                g.graph.instance_id
            )));
        }
    }
    Ok(map)
}

fn lookup<'a>(
    map: &BTreeMap<&str, &'a GraphRecord>,
    doc: &str,
    instance: &str,
) -> Result<&'a GraphRecord> {
    map.get(doc).copied().ok_or_else(|| {
        Error::InvalidInput(format!("instance {instance:?} names unknown story {doc:?}"))
    })
}

pub fn prompt_records(
    s: &Settings,
    graphs: &[GraphRecord],
    choices: &[ChoiceSpec],
) -> Result<Vec<TextRecord>> {
    let map = graph_map(graphs)?;
    let name = embedder_name(s);
    let mut out = choices
        .iter()
        .map(|c| {
            let blocks = c
                .choices
                .iter()
                .map(|doc| {
                    Ok(serialize(
                        &lookup(&map, doc, &c.instance_id)?.graph,
                        s.variant,
                        options(s),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TextRecord {
                instance_id: c.instance_id.clone(),
                variant: s.variant.to_string(),
                text: build_prompt(&PromptSpec {
                    question: c.question.clone(),
                    blocks,
                })?,
                embedder: name.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    Ok(out)
}

pub fn load_params(s: &Settings) -> Result<RgcnParams> {
    let path = s
        .params
        .as_ref()
        .ok_or_else(|| Error::Config("scoring needs --params".into()))?;
    RgcnParams::read_from(open(path)?)
}

pub fn score_records(
    s: &Settings,
    params: &RgcnParams,
    emb: &Embedding,
    graphs: &[GraphRecord],
    choices: &[ChoiceSpec],
) -> Result<Vec<ScoreRecord>> {
    let map = graph_map(graphs)?;
    let name = embedder_name(s);
    let mut out = Vec::with_capacity(choices.len());
    for c in choices {
        if c.choices.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "instance {:?} has fewer than two choices",
                c.instance_id
            )));
        }
        let inputs = c
            .choices
            .iter()
            .map(|doc| {
                let g = &lookup(&map, doc, &c.instance_id)?.graph;
                let story: Vec<&str> = g.context_nodes.iter().map(|n| n.text.as_str()).collect();
                Ok(ChoiceInput {
                    text: Array1::from(emb.embedder.embed(&story.join(" "))?),
                    graph: RelGraph::from_joint(g, params)?,
                    features: node_features(g, emb.embedder.as_ref(), emb.kg_vectors.as_deref())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let scores = score_choices(&inputs, params)?;
        let attention = scores
            .attention
            .iter()
            .zip(&c.choices)
            .filter_map(|(w, doc)| w.as_ref().map(|w| (w, doc)))
            .map(|(weights, doc)| {
                let g = &map[doc.as_str()].graph;
                let mut ranked: Vec<AttentionEntry> = g
                    .nodes()
                    .zip(weights)
                    .map(|(n, &weight)| AttentionEntry {
                        node: n.id,
                        text: n.text.clone(),
                        weight,
                    })
                    .collect();
                ranked.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.node.cmp(&b.node)));
                ranked.truncate(s.top_k);
                ranked
            })
            .collect();
        out.push(ScoreRecord {
            instance_id: c.instance_id.clone(),
            answer: c.choices[scores.argmax].clone(),
            choices: c.choices.clone(),
            logits: scores.logits,
            probabilities: scores.probabilities,
            argmax: scores.argmax,
            attention,
            embedder: name.clone(),
        });
    }
    out.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    Ok(out)
}

pub fn stats_record(
    s: &Settings,
    partials: &[PartialEvent],
    anchors: &[AnchorRecord],
    graphs: &[GraphRecord],
) -> Result<StatsRecord> {
    let sets = anchor_sets(s, anchors)?;
    let source_events: BTreeSet<_> = partials.iter().map(|p| &p.event).collect();
    let sizes: Vec<GraphSizes> = graphs.iter().map(|g| GraphSizes::of(&g.graph)).collect();
    let mean = |f: fn(&GraphSizes) -> usize| {
        if sizes.is_empty() {
            0.0
        } else {
            sizes.iter().map(f).sum::<usize>() as f64 / sizes.len() as f64
        }
    };
    Ok(StatsRecord {
        grounding: grounding_stats(&sets, partials.len()),
        source_events: source_events.len(),
        grounded_events: sets.grounded_events(),
        instances: graphs.len(),
        mean_sub_nodes: mean(|g| g.sub_nodes),
        mean_sub_edges: mean(|g| g.sub_edges),
        mean_joint_nodes: mean(|g| g.joint_nodes),
        mean_joint_edges: mean(|g| g.joint_edges),
        embedder: embedder_name(s),
    })
}
