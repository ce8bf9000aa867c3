use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use super::hashing::TextEmbedder;
use crate::error::{Error, Result};

/// Precomputed vectors keyed by exact text, read from JSON lines
/// `{"text": ..., "vector": [...]}`. Unknown texts are an error rather than
/// a silent fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    name: String,
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    text: String,
    vector: Vec<f32>,
}

impl VectorTable {
    pub fn read<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line)
                .map_err(|e| Error::malformed(source_name, i + 1, e.to_string()))?;
            if row.vector.is_empty() || row.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::malformed(
                    source_name,
                    i + 1,
                    "vector must be non-empty and finite",
                ));
            }
            match dim {
                None => dim = Some(row.vector.len()),
                Some(d) if d != row.vector.len() => {
                    return Err(Error::malformed(
                        source_name,
                        i + 1,
                        format!("vector has {} values, expected {d}", row.vector.len()),
                    ))
                }
                _ => {}
            }
            vectors.insert(row.text, row.vector);
        }
        let dim = dim.ok_or_else(|| Error::InvalidInput(format!("{source_name}: no vectors")))?;
        Ok(VectorTable {
            name: format!("table:{source_name}"),
            dim,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl TextEmbedder for VectorTable {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        self.vectors
            .get(text)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("no vector for text {text:?}")))
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}
