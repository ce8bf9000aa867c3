//! Partial information extraction: an abstraction ladder built by dropping
//! one argument at a time, least important tier first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::frame::{EventRef, Tier};
use super::normalize::NormalizedEvent;
use super::render::{render_segments, RenderStyle};
use crate::error::Error;

/// Deepest argument tier abstraction may drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum AbstractionCap {
    /// No abstraction: only the full event.
    None,
    Argm,
    Arg234,
    #[default]
    Arg1,
    Arg0,
}

impl AbstractionCap {
    pub const ALL: [AbstractionCap; 5] = [
        AbstractionCap::None,
        AbstractionCap::Argm,
        AbstractionCap::Arg234,
        AbstractionCap::Arg1,
        AbstractionCap::Arg0,
    ];

    fn allows(self, tier: Tier) -> bool {
        let reach = match self {
            AbstractionCap::None => 0,
            AbstractionCap::Argm => 1,
            AbstractionCap::Arg234 => 2,
            AbstractionCap::Arg1 => 3,
            AbstractionCap::Arg0 => 4,
        };
        (tier as u8) <= reach
    }
}

impl fmt::Display for AbstractionCap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbstractionCap::None => "NONE",
            AbstractionCap::Argm => "ARGM",
            AbstractionCap::Arg234 => "ARG234",
            AbstractionCap::Arg1 => "ARG1",
            AbstractionCap::Arg0 => "ARG0",
        })
    }
}

impl FromStr for AbstractionCap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "NONE" => Ok(AbstractionCap::None),
            "ARGM" => Ok(AbstractionCap::Argm),
            "ARG234" | "ARG2,3,4" => Ok(AbstractionCap::Arg234),
            "ARG1" => Ok(AbstractionCap::Arg1),
            "ARG0" => Ok(AbstractionCap::Arg0),
            _ => Err(Error::Config(format!("unknown abstraction cap {s:?}"))),
        }
    }
}

/// One rung of the ladder. `level` counts the arguments dropped so far.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialEvent {
    #[serde(flatten)]
    pub event: EventRef,
    pub level: u32,
    pub role_tagged: String,
    pub plain: String,
    /// Indices of the retained segments of the source event.
    #[serde(skip)]
    pub retained: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialEventSequence {
    pub event: EventRef,
    pub levels: Vec<PartialEvent>,
}

fn make_partial(event: &NormalizedEvent, level: u32, retained: &[usize]) -> PartialEvent {
    let segs = retained.iter().map(|&i| &event.segments[i]);
    PartialEvent {
        event: event.event.clone(),
        level,
        role_tagged: render_segments(segs.clone(), RenderStyle::RoleTagged),
        plain: render_segments(segs, RenderStyle::Plain),
        retained: retained.to_vec(),
    }
}

/// Builds the abstraction ladder of `event` up to `cap`.
///
/// Tier order is modifiers (negation and modals excluded), then
/// `ARG2..ARG5`, then `ARG1`, then `ARG0`; inside a tier the rightmost
/// argument goes first. Rungs whose plain text repeats an earlier rung are
/// skipped.
pub fn extract_partial_events(
    event: &NormalizedEvent,
    cap: AbstractionCap,
) -> PartialEventSequence {
    let mut retained: Vec<usize> = (0..event.segments.len()).collect();
    let mut levels = vec![make_partial(event, 0, &retained)];
    let tiers = [Tier::Modifier, Tier::Secondary, Tier::Object, Tier::Agent];
    let mut level = 0;
    for tier in tiers.into_iter().filter(|t| cap.allows(*t)) {
        let droppable: Vec<usize> = event
            .segments
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, s)| !s.protected && s.role.tier() == Some(tier))
            .map(|(i, _)| i)
            .collect();
        for idx in droppable {
            retained.retain(|&i| i != idx);
            level += 1;
            let partial = make_partial(event, level, &retained);
            if levels.iter().all(|p| p.plain != partial.plain) {
                levels.push(partial);
            }
        }
    }
    PartialEventSequence {
        event: event.event.clone(),
        levels,
    }
}
