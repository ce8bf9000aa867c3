//! Text renderings of a joint subgraph and the multiple-choice prompt.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::retriever::{JointNodeId, JointSubgraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SerializationVariant {
    /// Graphviz digraph with indexed nodes and relation edge labels.
    Dot,
    /// Node texts only.
    Node,
    /// `src --> dst` per edge; with `relation_labels`, `src --[rel]--> dst`.
    #[default]
    NodeEdge,
}

impl fmt::Display for SerializationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SerializationVariant::Dot => "dot",
            SerializationVariant::Node => "node",
            SerializationVariant::NodeEdge => "node_edge",
        })
    }
}

impl FromStr for SerializationVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(SerializationVariant::Dot),
            "node" => Ok(SerializationVariant::Node),
            "node_edge" | "node-edge" | "node&edge" => Ok(SerializationVariant::NodeEdge),
            _ => Err(Error::Config(format!(
                "unknown serialization variant {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SerializeOptions {
    /// Only affects [`SerializationVariant::NodeEdge`].
    pub relation_labels: bool,
}

const SEPARATOR: &str = "; ";

pub fn serialize(
    graph: &JointSubgraph,
    variant: SerializationVariant,
    opts: SerializeOptions,
) -> String {
    match variant {
        SerializationVariant::Node => graph
            .nodes()
            .map(|n| n.text.as_str())
            .collect::<Vec<_>>()
            .join(SEPARATOR),
        SerializationVariant::NodeEdge => {
            let text = |id| graph.text_of(id).unwrap_or_default();
            graph
                .edges
                .iter()
                .map(|e| {
                    if opts.relation_labels {
                        format!("{} --[{}]--> {}", text(e.src), e.rel, text(e.dst))
                    } else {
                        format!("{} --> {}", text(e.src), text(e.dst))
                    }
                })
                .collect::<Vec<_>>()
                .join(SEPARATOR)
        }
        SerializationVariant::Dot => {
            let index: HashMap<JointNodeId, usize> =
                graph.nodes().enumerate().map(|(i, n)| (n.id, i)).collect();
            let mut out = String::from("digraph G {");
            for (i, n) in graph.nodes().enumerate() {
                out.push_str(&format!(" n{i} [label=\"{}\"];", escape_dot(&n.text)));
            }
            for e in &graph.edges {
                let (Some(s), Some(d)) = (index.get(&e.src), index.get(&e.dst)) else {
                    continue;
                };
                out.push_str(&format!(
                    " n{s} -> n{d} [label=\"{}\"];",
                    escape_dot(&e.rel)
                ));
            }
            out.push_str(" }");
            out
        }
    }
}

fn escape_dot(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

/// Question plus one serialized graph block per answer choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub question: String,
    pub blocks: Vec<String>,
}

pub fn choice_label(i: usize) -> Option<char> {
    (i < 26).then(|| (b'A' + i as u8) as char)
}

pub fn build_prompt(spec: &PromptSpec) -> Result<String> {
    if spec.question.trim().is_empty() {
        return Err(Error::InvalidInput("prompt question is empty".into()));
    }
    if spec.blocks.len() < 2 {
        return Err(Error::InvalidInput(
            "a prompt needs at least two choices".into(),
        ));
    }
    let mut out = String::new();
    for (i, block) in spec.blocks.iter().enumerate() {
        let label =
            choice_label(i).ok_or_else(|| Error::InvalidInput("more than 26 choices".into()))?;
        out.push_str(&format!(
            "Event knowledge on narrative choice {label}: {block}\n"
        ));
    }
    out.push_str(&format!("Question:{}\nAnswer:", spec.question));
    Ok(out)
}
