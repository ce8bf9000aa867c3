use super::frame::Role;
use super::normalize::Segment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderStyle {
    /// Segment texts joined by single spaces.
    #[default]
    Plain,
    /// `ROLE: text` pieces, e.g. `ARG0: [P0] V: evacuated`.
    RoleTagged,
}

pub fn render_segments<'a>(
    segments: impl IntoIterator<Item = &'a Segment>,
    style: RenderStyle,
) -> String {
    let mut out = String::new();
    for seg in segments {
        let text = seg.text.trim();
        if text.is_empty() {
            continue;
        }
        let piece = match style {
            RenderStyle::Plain => text.to_string(),
            RenderStyle::RoleTagged if seg.role == Role::Sentence => text.to_string(),
            RenderStyle::RoleTagged => format!("{}: {}", seg.role.tag(), text),
        };
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&piece);
    }
    out
}
