//! Line-delimited output records.

use evkg_core::event::{NormalizedEvent, RenderStyle};
use evkg_core::matcher::{AnchorMatch, GroundingStats};
use evkg_core::pipeline::Document;
use evkg_core::retriever::{JointNodeId, JointSubgraph};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRecord {
    #[serde(flatten)]
    pub event: NormalizedEvent,
    pub role_tagged: String,
    pub plain: String,
}

impl From<NormalizedEvent> for NormalizedRecord {
    fn from(event: NormalizedEvent) -> Self {
        NormalizedRecord {
            role_tagged: event.render(RenderStyle::RoleTagged),
            plain: event.render(RenderStyle::Plain),
            event,
        }
    }
}

/// Regroups normalized records into documents sorted by id, events sorted
/// by position.
pub fn documents(records: Vec<NormalizedRecord>) -> Vec<Document> {
    let mut events: Vec<NormalizedEvent> = records.into_iter().map(|r| r.event).collect();
    events.sort_by(|a, b| a.event.cmp(&b.event));
    let mut docs: Vec<Document> = Vec::new();
    for e in events {
        match docs.last_mut() {
            Some(d) if d.doc_id == e.event.doc_id => d.events.push(e),
            _ => docs.push(Document {
                doc_id: e.event.doc_id.clone(),
                events: vec![e],
            }),
        }
    }
    docs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    #[serde(flatten)]
    pub anchor: AnchorMatch,
    pub embedder: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    #[serde(flatten)]
    pub graph: JointSubgraph,
    pub embedder: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRecord {
    pub instance_id: String,
    pub variant: String,
    pub text: String,
    pub embedder: String,
}

/// A multiple-choice instance; each choice names a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceSpec {
    pub instance_id: String,
    pub question: String,
    pub choices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionEntry {
    pub node: JointNodeId,
    pub text: String,
    pub weight: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub instance_id: String,
    pub choices: Vec<String>,
    pub logits: Vec<f32>,
    pub probabilities: Vec<f32>,
    pub argmax: usize,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attention: Vec<Vec<AttentionEntry>>,
    pub embedder: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    #[serde(flatten)]
    pub grounding: GroundingStats,
    pub source_events: usize,
    pub grounded_events: usize,
    pub instances: usize,
    pub mean_sub_nodes: f64,
    pub mean_sub_edges: f64,
    pub mean_joint_nodes: f64,
    pub mean_joint_edges: f64,
    pub embedder: String,
}
