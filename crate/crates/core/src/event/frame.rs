use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Identity of one extracted event inside a document.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventRef {
    pub doc_id: String,
    pub sent_idx: u32,
    pub frame_idx: u32,
}

/// Semantic role label of a frame segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Role {
    Verb,
    /// `ARG0` .. `ARG5`.
    Numbered(u8),
    /// `ARGA`, the causative agent; ranked with `ARG0`.
    Causer,
    /// `ARGM` or `ARGM-<subtype>`; subtype is empty for bare `ARGM`.
    Modifier(String),
    /// `R-ARGn` reference arguments.
    Reference(u8),
    /// `C-ARGn` continuation arguments.
    Continuation(u8),
    /// Whole-sentence pseudo segment used when event extraction is bypassed.
    Sentence,
}

/// Drop tiers, in the order arguments are abstracted away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Modifier = 1,
    Secondary = 2,
    Object = 3,
    Agent = 4,
}

impl Role {
    pub fn tier(&self) -> Option<Tier> {
        let numbered = |n: u8| match n {
            0 => Tier::Agent,
            1 => Tier::Object,
            _ => Tier::Secondary,
        };
        match self {
            Role::Verb | Role::Sentence => None,
            Role::Numbered(n) | Role::Reference(n) | Role::Continuation(n) => Some(numbered(*n)),
            Role::Causer => Some(Tier::Agent),
            Role::Modifier(_) => Some(Tier::Modifier),
        }
    }

    pub fn is_negation_or_modal(&self) -> bool {
        matches!(self, Role::Modifier(sub) if sub == "NEG" || sub == "MOD")
    }

    /// Label used in role-tagged rendering. Modifier subtypes collapse to `ARGM`.
    pub fn tag(&self) -> String {
        match self {
            Role::Modifier(_) => "ARGM".to_string(),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Verb => f.write_str("V"),
            Role::Numbered(n) => write!(f, "ARG{n}"),
            Role::Causer => f.write_str("ARGA"),
            Role::Modifier(sub) if sub.is_empty() => f.write_str("ARGM"),
            Role::Modifier(sub) => write!(f, "ARGM-{sub}"),
            Role::Reference(n) => write!(f, "R-ARG{n}"),
            Role::Continuation(n) => write!(f, "C-ARG{n}"),
            Role::Sentence => f.write_str("S"),
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let numbered = |rest: &str| -> Option<u8> {
            let n: u8 = rest.parse().ok()?;
            (rest.len() == 1 && n <= 5).then_some(n)
        };
        let bad = || Error::InvalidInput(format!("unsupported role label {s:?}"));
        match s {
            "V" => Ok(Role::Verb),
            "S" => Ok(Role::Sentence),
            "ARGA" => Ok(Role::Causer),
            "ARGM" => Ok(Role::Modifier(String::new())),
            _ => {
                if let Some(sub) = s.strip_prefix("ARGM-") {
                    if sub.is_empty() || !sub.chars().all(|c| c.is_ascii_alphanumeric()) {
                        return Err(bad());
                    }
                    Ok(Role::Modifier(sub.to_string()))
                } else if let Some(rest) = s.strip_prefix("R-ARG") {
                    numbered(rest).map(Role::Reference).ok_or_else(bad)
                } else if let Some(rest) = s.strip_prefix("C-ARG") {
                    numbered(rest).map(Role::Continuation).ok_or_else(bad)
                } else if let Some(rest) = s.strip_prefix("ARG") {
                    numbered(rest).map(Role::Numbered).ok_or_else(bad)
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl Serialize for Role {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Role {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verb {
    pub text: String,
    pub lemma: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonSpan {
    pub start: u32,
    pub end: u32,
    pub cluster: i64,
    #[serde(default)]
    pub possessive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Argument {
    pub role: Role,
    pub text: String,
    pub start: u32,
    pub end: u32,
    #[serde(default)]
    pub person_spans: Vec<PersonSpan>,
}

/// One verb-centric event as delivered by the semantic-role labeler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrlFrame {
    pub doc_id: String,
    pub sent_idx: u32,
    pub frame_idx: u32,
    pub verb: Verb,
    pub args: Vec<Argument>,
    #[serde(default)]
    pub negated: bool,
    #[serde(default)]
    pub modal: Option<String>,
}

pub(crate) const NEGATION_WORDS: [&str; 4] = ["not", "n't", "never", "no longer"];

impl SrlFrame {
    pub fn event_ref(&self) -> EventRef {
        EventRef {
            doc_id: self.doc_id.clone(),
            sent_idx: self.sent_idx,
            frame_idx: self.frame_idx,
        }
    }

    /// Checks the structural invariants the rest of the pipeline relies on.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| {
            Err(Error::InvalidInput(format!(
                "frame {}/{}/{}: {msg}",
                self.doc_id, self.sent_idx, self.frame_idx
            )))
        };
        if self.verb.text.trim().is_empty() {
            return fail("empty verb".into());
        }
        let mut spans: Vec<(u32, u32)> = Vec::new();
        match (self.verb.start, self.verb.end) {
            (Some(s), Some(e)) if s < e => spans.push((s, e)),
            (None, None) => {}
            _ => return fail("verb offsets must both be set with start < end".into()),
        }
        for arg in &self.args {
            if matches!(arg.role, Role::Verb | Role::Sentence) {
                return fail(format!("role {} is not an argument role", arg.role));
            }
            if arg.end < arg.start {
                return fail(format!("argument {} has end < start", arg.role));
            }
            let tokens = arg.text.split_whitespace().count() as u32;
            if tokens != arg.end - arg.start {
                return fail(format!(
                    "argument {} spans {} tokens but its text has {tokens}",
                    arg.role,
                    arg.end - arg.start
                ));
            }
            if arg.start < arg.end {
                spans.push((arg.start, arg.end));
            }
            let mut last_end = arg.start;
            let mut person: Vec<&PersonSpan> = arg.person_spans.iter().collect();
            person.sort_by_key(|p| p.start);
            for p in person {
                if p.start >= p.end || p.start < arg.start || p.end > arg.end {
                    return fail(format!(
                        "person span [{}, {}) outside argument",
                        p.start, p.end
                    ));
                }
                if p.start < last_end {
                    return fail("overlapping person spans".into());
                }
                last_end = p.end;
            }
        }
        spans.sort_unstable();
        if spans.windows(2).any(|w| w[1].0 < w[0].1) {
            return fail("overlapping argument spans".into());
        }
        Ok(())
    }

    /// Whether an argument must survive every abstraction step.
    pub fn is_protected(&self, arg: &Argument) -> bool {
        if arg.role.is_negation_or_modal() {
            return true;
        }
        if !matches!(arg.role, Role::Modifier(_)) {
            return false;
        }
        let text = arg.text.trim().to_lowercase();
        (self.negated && NEGATION_WORDS.contains(&text.as_str()))
            || self
                .modal
                .as_deref()
                .is_some_and(|m| m.trim().eq_ignore_ascii_case(&text))
    }
}

/// Reads and validates a line-delimited frames file.
pub fn read_frames<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<SrlFrame>> {
    let mut frames = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: SrlFrame = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(source_name, i + 1, e.to_string()))?;
        frame
            .validate()
            .map_err(|e| Error::malformed(source_name, i + 1, e.to_string()))?;
        frames.push(frame);
    }
    Ok(frames)
}
