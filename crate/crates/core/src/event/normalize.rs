//! Person-token normalization.
//!
//! Every coreference cluster that carries a person span is numbered by
//! first appearance in the document, and its mentions are rewritten to
//! `[Pk]` (or `[Pk's]` for possessives).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::frame::{Argument, EventRef, Role, SrlFrame};
use super::render::{render_segments, RenderStyle};
use crate::error::{Error, Result};

/// Cluster id to person ordinal, scoped to one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PersonIndex {
    pub doc_id: String,
    ordinals: HashMap<i64, usize>,
}

impl PersonIndex {
    pub fn ordinal(&self, cluster: i64) -> Option<usize> {
        self.ordinals.get(&cluster).copied()
    }

    pub fn len(&self) -> usize {
        self.ordinals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinals.is_empty()
    }
}

pub fn person_token(ordinal: usize, possessive: bool) -> String {
    if possessive {
        format!("[P{ordinal}'s]")
    } else {
        format!("[P{ordinal}]")
    }
}

/// Numbers clusters by first appearance in `(sent_idx, frame_idx, argument
/// position, span start)` order. All frames must belong to one document.
pub fn build_person_index(frames: &[SrlFrame]) -> PersonIndex {
    let mut ordered: Vec<&SrlFrame> = frames.iter().collect();
    ordered.sort_by_key(|f| (f.sent_idx, f.frame_idx));
    let mut index = PersonIndex {
        doc_id: ordered
            .first()
            .map(|f| f.doc_id.clone())
            .unwrap_or_default(),
        ordinals: HashMap::new(),
    };
    for frame in ordered {
        debug_assert_eq!(frame.doc_id, index.doc_id);
        for arg in &frame.args {
            let mut spans: Vec<_> = arg.person_spans.iter().collect();
            spans.sort_by_key(|s| s.start);
            for span in spans {
                let next = index.ordinals.len();
                index.ordinals.entry(span.cluster).or_insert(next);
            }
        }
    }
    index
}

/// Groups frames by document, preserving document ids in sorted order.
pub fn group_by_document(frames: Vec<SrlFrame>) -> BTreeMap<String, Vec<SrlFrame>> {
    let mut docs: BTreeMap<String, Vec<SrlFrame>> = BTreeMap::new();
    for f in frames {
        docs.entry(f.doc_id.clone()).or_default().push(f);
    }
    for frames in docs.values_mut() {
        frames.sort_by_key(|f| (f.sent_idx, f.frame_idx));
    }
    docs
}

/// One rendered piece of an event: the verb, an argument, or a whole sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub role: Role,
    pub text: String,
    /// Never dropped by abstraction (verb, negation, modal).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub protected: bool,
}

/// An event with person mentions rewritten, segments in source order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedEvent {
    #[serde(flatten)]
    pub event: EventRef,
    pub verb_lemma: String,
    pub segments: Vec<Segment>,
}

impl NormalizedEvent {
    pub fn render(&self, style: RenderStyle) -> String {
        render_segments(self.segments.iter(), style)
    }

    /// Turns the event back into a frame without person spans, so that it can
    /// be fed through normalization again.
    pub fn to_frame(&self) -> SrlFrame {
        let mut pos = 0u32;
        let mut verb = None;
        let mut args = Vec::new();
        for seg in &self.segments {
            let len = seg.text.split_whitespace().count() as u32;
            if seg.role == Role::Verb {
                verb = Some(super::frame::Verb {
                    text: seg.text.clone(),
                    lemma: self.verb_lemma.clone(),
                    start: Some(pos),
                    end: Some(pos + len.max(1)),
                });
                pos += len.max(1);
            } else {
                args.push(Argument {
                    role: seg.role.clone(),
                    text: seg.text.clone(),
                    start: pos,
                    end: pos + len,
                    person_spans: Vec::new(),
                });
                pos += len;
            }
        }
        // flag-protected modifiers keep their protection through the frame flags
        let flagged: Vec<&Segment> = self
            .segments
            .iter()
            .filter(|s| {
                s.protected && matches!(s.role, Role::Modifier(_)) && !s.role.is_negation_or_modal()
            })
            .collect();
        let negated = flagged
            .iter()
            .any(|s| super::frame::NEGATION_WORDS.contains(&s.text.trim().to_lowercase().as_str()));
        let modal = flagged
            .iter()
            .find(|s| {
                !super::frame::NEGATION_WORDS.contains(&s.text.trim().to_lowercase().as_str())
            })
            .map(|s| s.text.clone());
        SrlFrame {
            doc_id: self.event.doc_id.clone(),
            sent_idx: self.event.sent_idx,
            frame_idx: self.event.frame_idx,
            verb: verb.unwrap_or(super::frame::Verb {
                text: self.verb_lemma.clone(),
                lemma: self.verb_lemma.clone(),
                start: None,
                end: None,
            }),
            args,
            negated,
            modal,
        }
    }
}

/// Rewrites an argument's person spans to person tokens.
fn rewrite_argument(arg: &Argument, index: &PersonIndex) -> Result<String> {
    if arg.person_spans.is_empty() {
        return Ok(arg.text.clone());
    }
    let tokens: Vec<&str> = arg.text.split_whitespace().collect();
    let mut spans: Vec<_> = arg.person_spans.iter().collect();
    spans.sort_by_key(|s| s.start);
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    let mut spans = spans.into_iter().peekable();
    let mut pos = arg.start;
    while pos < arg.end {
        match spans.peek() {
            Some(span) if span.start == pos => {
                let ordinal = index
                    .ordinal(span.cluster)
                    .ok_or_else(|| Error::MissingCluster {
                        doc_id: index.doc_id.clone(),
                        cluster: span.cluster,
                    })?;
                out.push(person_token(ordinal, span.possessive));
                pos = span.end;
                spans.next();
            }
            _ => {
                let i = (pos - arg.start) as usize;
                let token = tokens.get(i).ok_or_else(|| {
                    Error::InvalidInput(format!("argument {:?} shorter than its span", arg.text))
                })?;
                out.push((*token).to_string());
                pos += 1;
            }
        }
    }
    Ok(out.join(" "))
}

/// Orders arguments by start offset and slots the verb in. A verb without
/// offsets goes right after `ARG0`, or first when there is no `ARG0`.
fn ordered_segments(frame: &SrlFrame, texts: Vec<String>) -> Vec<Segment> {
    let mut args: Vec<(u32, Segment)> = frame
        .args
        .iter()
        .zip(texts)
        .map(|(arg, text)| {
            (
                arg.start,
                Segment {
                    role: arg.role.clone(),
                    text,
                    protected: frame.is_protected(arg),
                },
            )
        })
        .collect();
    args.sort_by_key(|(start, _)| *start);
    let verb = Segment {
        role: Role::Verb,
        text: frame.verb.text.clone(),
        protected: true,
    };
    let at = match frame.verb.start {
        Some(vs) => args.iter().take_while(|(s, _)| *s < vs).count(),
        None => args
            .iter()
            .position(|(_, s)| s.role == Role::Numbered(0))
            .map_or(0, |i| i + 1),
    };
    let mut segments: Vec<Segment> = args.into_iter().map(|(_, s)| s).collect();
    segments.insert(at, verb);
    segments
}

/// Replaces every person span with its `[Pk]` / `[Pk's]` token. Other tokens
/// are left as delivered.
pub fn normalize_event(frame: &SrlFrame, index: &PersonIndex) -> Result<NormalizedEvent> {
    let texts = frame
        .args
        .iter()
        .map(|a| rewrite_argument(a, index))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizedEvent {
        event: frame.event_ref(),
        verb_lemma: frame.verb.lemma.clone(),
        segments: ordered_segments(frame, texts),
    })
}

/// The same event with person mentions left verbatim (normalization bypassed).
pub fn raw_event(frame: &SrlFrame) -> NormalizedEvent {
    let texts = frame.args.iter().map(|a| a.text.clone()).collect();
    NormalizedEvent {
        event: frame.event_ref(),
        verb_lemma: frame.verb.lemma.clone(),
        segments: ordered_segments(frame, texts),
    }
}

/// Rebuilds one pseudo event per sentence from the tokens covered by that
/// sentence's frames. Used when event extraction is bypassed.
///
/// `index` applies person normalization; pass `None` to keep raw mentions.
/// Sentence events use `frame_idx = 0`.
pub fn sentence_events(
    frames: &[SrlFrame],
    index: Option<&PersonIndex>,
) -> Result<Vec<NormalizedEvent>> {
    // (token position, 0 = unpositioned verb slot / 1 = token) -> text
    let mut sentences: BTreeMap<(String, u32), BTreeMap<(u32, u8), String>> = BTreeMap::new();
    let mut ordered: Vec<&SrlFrame> = frames.iter().collect();
    ordered.sort_by_key(|f| (&f.doc_id, f.sent_idx, f.frame_idx));
    for frame in ordered {
        let tokens = sentences
            .entry((frame.doc_id.clone(), frame.sent_idx))
            .or_default();
        for arg in &frame.args {
            let words: Vec<&str> = arg.text.split_whitespace().collect();
            let mut pos = arg.start;
            let mut spans: Vec<_> = arg.person_spans.iter().collect();
            spans.sort_by_key(|s| s.start);
            let mut spans = spans.into_iter().peekable();
            while pos < arg.end {
                match (index, spans.peek()) {
                    (Some(idx), Some(span)) if span.start == pos => {
                        let ordinal =
                            idx.ordinal(span.cluster)
                                .ok_or_else(|| Error::MissingCluster {
                                    doc_id: idx.doc_id.clone(),
                                    cluster: span.cluster,
                                })?;
                        tokens
                            .entry((pos, 1))
                            .or_insert_with(|| person_token(ordinal, span.possessive));
                        // the rest of the span collapses into the token
                        for p in pos + 1..span.end {
                            tokens.entry((p, 1)).or_default();
                        }
                        pos = span.end;
                        spans.next();
                    }
                    _ => {
                        let word = words.get((pos - arg.start) as usize).copied().unwrap_or("");
                        tokens.entry((pos, 1)).or_insert_with(|| word.to_string());
                        pos += 1;
                    }
                }
            }
        }
        match (frame.verb.start, frame.verb.end) {
            (Some(s), Some(e)) => {
                for (i, word) in frame.verb.text.split_whitespace().enumerate() {
                    let p = s + i as u32;
                    if p < e {
                        tokens.entry((p, 1)).or_insert_with(|| word.to_string());
                    }
                }
            }
            _ => {
                let slot = frame
                    .args
                    .iter()
                    .find(|a| a.role == Role::Numbered(0))
                    .map_or(0, |a| a.end);
                tokens
                    .entry((slot, 0))
                    .or_insert_with(|| frame.verb.text.clone());
            }
        }
    }
    Ok(sentences
        .into_iter()
        .map(|((doc_id, sent_idx), tokens)| {
            let text = tokens
                .into_values()
                .filter(|t| !t.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            NormalizedEvent {
                event: EventRef {
                    doc_id,
                    sent_idx,
                    frame_idx: 0,
                },
                verb_lemma: String::new(),
                segments: vec![Segment {
                    role: Role::Sentence,
                    text,
                    protected: true,
                }],
            }
        })
        .collect())
}
