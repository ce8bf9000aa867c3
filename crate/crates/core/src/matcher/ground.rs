use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::{check_threshold, EventIndex};
use crate::error::{Error, Result};
use crate::event::EventRef;
use crate::kg::NodeId;

/// Threshold on L2 distance below which a match counts as grounded.
pub const DEFAULT_THRESHOLD: f64 = 0.65;

/// One query: a partial event (or whole sentence) and its embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub event: EventRef,
    pub level: u32,
    pub vector: Vec<f32>,
}

/// An accepted anchor for one rung of an event's ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorMatch {
    #[serde(flatten)]
    pub event: EventRef,
    pub level: u32,
    pub node_id: NodeId,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundingMode {
    #[default]
    Events,
    Sentences,
}

/// Accepted anchors per source event, ordered by level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnchorSets {
    pub mode: GroundingMode,
    sets: BTreeMap<EventRef, Vec<AnchorMatch>>,
}

impl AnchorSets {
    /// Collects matches into canonical `(event, level)` order. At most one
    /// match per `(event, level)` is allowed.
    pub fn from_matches(mode: GroundingMode, mut matches: Vec<AnchorMatch>) -> Result<Self> {
        matches.sort_by(|a, b| (&a.event, a.level).cmp(&(&b.event, b.level)));
        let mut sets: BTreeMap<EventRef, Vec<AnchorMatch>> = BTreeMap::new();
        for m in matches {
            let list = sets.entry(m.event.clone()).or_default();
            if list.last().is_some_and(|prev| prev.level == m.level) {
                return Err(Error::InvalidInput(format!(
                    "two anchors for {}/{}/{} level {}",
                    m.event.doc_id, m.event.sent_idx, m.event.frame_idx, m.level
                )));
            }
            list.push(m);
        }
        Ok(AnchorSets { mode, sets })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EventRef, &[AnchorMatch])> {
        self.sets.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn matches(&self) -> impl Iterator<Item = &AnchorMatch> {
        self.sets.values().flatten()
    }

    pub fn get(&self, event: &EventRef) -> &[AnchorMatch] {
        self.sets.get(event).map_or(&[], Vec::as_slice)
    }

    /// Number of source events with at least one accepted anchor.
    pub fn grounded_events(&self) -> usize {
        self.sets.len()
    }

    pub fn match_count(&self) -> usize {
        self.sets.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Restricts to the events of one document.
    pub fn for_document(&self, doc_id: &str) -> AnchorSets {
        AnchorSets {
            mode: self.mode,
            sets: self
                .sets
                .iter()
                .filter(|(k, _)| k.doc_id == doc_id)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

/// Matches every query independently against the index. Rejected queries
/// are dropped. Runs on the current rayon pool; output order is canonical.
pub fn ground(index: &EventIndex, queries: &[Query], threshold: f64) -> Result<AnchorSets> {
    ground_with_mode(index, queries, threshold, GroundingMode::Events)
}

/// Grounds whole-sentence vectors instead of extracted events.
pub fn sentence_ground(
    index: &EventIndex,
    sentences: &[Query],
    threshold: f64,
) -> Result<AnchorSets> {
    ground_with_mode(index, sentences, threshold, GroundingMode::Sentences)
}

fn ground_with_mode(
    index: &EventIndex,
    queries: &[Query],
    threshold: f64,
    mode: GroundingMode,
) -> Result<AnchorSets> {
    check_threshold(threshold)?;
    let found: Vec<Option<AnchorMatch>> = queries
        .par_iter()
        .map(|q| {
            Ok(index
                .match_vector(&q.vector, threshold)?
                .map(|hit| AnchorMatch {
                    event: q.event.clone(),
                    level: q.level,
                    node_id: hit.node,
                    distance: hit.distance,
                }))
        })
        .collect::<Result<_>>()?;
    AnchorSets::from_matches(mode, found.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingStats {
    pub mode: GroundingMode,
    pub queries: usize,
    pub hits: usize,
    pub hit_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_distance: Option<f64>,
}

pub fn grounding_stats(anchors: &AnchorSets, total_queries: usize) -> GroundingStats {
    let hits = anchors.match_count();
    let sum: f64 = anchors.matches().map(|m| m.distance).sum();
    GroundingStats {
        mode: anchors.mode,
        queries: total_queries,
        hits,
        hit_rate: if total_queries == 0 {
            0.0
        } else {
            hits as f64 / total_queries as f64
        },
        mean_distance: (hits > 0).then(|| sum / hits as f64),
    }
}
