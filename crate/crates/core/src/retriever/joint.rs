use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::subgraph::KgSubgraph;
use crate::error::{Error, Result};
use crate::event::EventRef;
use crate::kg::{KgStore, NodeId};
use crate::matcher::AnchorSets;

pub const GROUNDING_RELATION: &str = "grounding";
pub const CONTEXT_RELATION: &str = "context";

/// Joint-graph node id. Context nodes order before KG nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JointNodeId {
    Context(u32),
    Kg(NodeId),
}

impl fmt::Display for JointNodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointNodeId::Context(k) => write!(f, "ctx:{k}"),
            JointNodeId::Kg(n) => write!(f, "kg:{n}"),
        }
    }
}

impl FromStr for JointNodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad joint node id {s:?}"));
        if let Some(k) = s.strip_prefix("ctx:") {
            k.parse().map(JointNodeId::Context).map_err(|_| bad())
        } else if let Some(n) = s.strip_prefix("kg:") {
            n.parse()
                .map(|n| JointNodeId::Kg(NodeId(n)))
                .map_err(|_| bad())
        } else {
            Err(bad())
        }
    }
}

impl Serialize for JointNodeId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for JointNodeId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointNode {
    pub id: JointNodeId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointEdge {
    pub src: JointNodeId,
    pub dst: JointNodeId,
    pub rel: String,
}

/// Retrieved KG subgraph plus the narrative's own events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointSubgraph {
    pub instance_id: String,
    pub context_nodes: Vec<JointNode>,
    pub kg_nodes: Vec<JointNode>,
    pub edges: Vec<JointEdge>,
}

impl JointSubgraph {
    /// Context nodes in narrative order, then KG nodes by id.
    pub fn nodes(&self) -> impl Iterator<Item = &JointNode> {
        self.context_nodes.iter().chain(&self.kg_nodes)
    }

    pub fn node_count(&self) -> usize {
        self.context_nodes.len() + self.kg_nodes.len()
    }

    pub fn text_of(&self, id: JointNodeId) -> Option<&str> {
        let list = match id {
            JointNodeId::Context(_) => &self.context_nodes,
            JointNodeId::Kg(_) => &self.kg_nodes,
        };
        list.binary_search_by(|n| n.id.cmp(&id))
            .ok()
            .map(|i| list[i].text.as_str())
    }

    pub fn edges_with(&self, rel: &str) -> impl Iterator<Item = &JointEdge> {
        let rel = rel.to_string();
        self.edges.iter().filter(move |e| e.rel == rel)
    }
}

/// A context event and its plain text, in narrative order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextEvent {
    pub event: EventRef,
    pub text: String,
}

/// Rejects KGs whose own relation names collide with the joint-graph ones.
pub fn check_reserved_relations(store: &KgStore) -> Result<()> {
    for name in [GROUNDING_RELATION, CONTEXT_RELATION] {
        if store.relations().id(name).is_some() {
            return Err(Error::InvalidInput(format!(
                "KG uses reserved relation name {name:?}"
            )));
        }
    }
    Ok(())
}

/// Adds context nodes, grounding edges (context event to each distinct anchor
/// its ladder matched) and a context chain over consecutive events. Anchors
/// are kept as nodes even when no path touches them.
pub fn build_joint_graph(
    store: &KgStore,
    instance_id: &str,
    subgraph: &KgSubgraph,
    events: &[ContextEvent],
    anchors: &AnchorSets,
) -> Result<JointSubgraph> {
    let position: BTreeMap<&EventRef, u32> = events
        .iter()
        .enumerate()
        .map(|(k, e)| (&e.event, k as u32))
        .collect();
    let mut edges: BTreeSet<JointEdge> = BTreeSet::new();
    let mut kg: BTreeSet<NodeId> = subgraph.nodes.clone();
    for (event, matches) in anchors.iter() {
        let k = *position.get(event).ok_or_else(|| {
            Error::InvalidInput(format!(
                "anchor refers to unknown event {}/{}/{}",
                event.doc_id, event.sent_idx, event.frame_idx
            ))
        })?;
        for m in matches {
            kg.insert(m.node_id);
            edges.insert(JointEdge {
                src: JointNodeId::Context(k),
                dst: JointNodeId::Kg(m.node_id),
                rel: GROUNDING_RELATION.to_string(),
            });
        }
    }
    for &(src, rel, dst) in &subgraph.edges {
        let name = store
            .relations()
            .name(rel)
            .ok_or_else(|| Error::UnknownRelation(format!("#{}", rel.0)))?;
        edges.insert(JointEdge {
            src: JointNodeId::Kg(src),
            dst: JointNodeId::Kg(dst),
            rel: name.to_string(),
        });
    }
    for k in 1..events.len() as u32 {
        edges.insert(JointEdge {
            src: JointNodeId::Context(k - 1),
            dst: JointNodeId::Context(k),
            rel: CONTEXT_RELATION.to_string(),
        });
    }
    let kg_nodes = kg
        .into_iter()
        .map(|n| {
            Ok(JointNode {
                id: JointNodeId::Kg(n),
                text: store.text(n)?.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JointSubgraph {
        instance_id: instance_id.to_string(),
        context_nodes: events
            .iter()
            .enumerate()
            .map(|(k, e)| JointNode {
                id: JointNodeId::Context(k as u32),
                text: e.text.clone(),
            })
            .collect(),
        kg_nodes,
        edges: edges.into_iter().collect(),
    })
}
