//! Semantic-role frames, person normalization and the abstraction ladder.

mod frame;
mod normalize;
mod pie;
mod render;

pub use frame::{read_frames, Argument, EventRef, PersonSpan, Role, SrlFrame, Tier, Verb};
pub use normalize::{
    build_person_index, group_by_document, normalize_event, person_token, raw_event,
    sentence_events, NormalizedEvent, PersonIndex, Segment,
};
pub use pie::{extract_partial_events, AbstractionCap, PartialEvent, PartialEventSequence};
pub use render::{render_segments, RenderStyle};
