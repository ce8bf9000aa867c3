use std::cmp::Ordering;
use std::sync::Arc;

use super::embedding::EmbeddingMatrix;
use super::hnsw::Hnsw;
use crate::error::{Error, Result};
use crate::kg::NodeId;

/// Graph-index parameters for the approximate backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HnswParams {
    /// Links per node on upper layers (twice this on the base layer).
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
    pub seed: u64,
}

impl Default for HnswParams {
    fn default() -> Self {
        HnswParams {
            m: 16,
            ef_construction: 100,
            ef_search: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Exact,
    Approximate(HnswParams),
}

/// Nearest node found for a query vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub node: NodeId,
    pub distance: f64,
}

/// Immutable nearest-neighbor index over node embeddings.
#[derive(Debug, Clone)]
pub struct EventIndex {
    matrix: Arc<EmbeddingMatrix>,
    graph: Option<Arc<Hnsw>>,
}

pub(crate) fn squared_l2(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x as f64 - *y as f64;
            d * d
        })
        .sum()
}

/// Orders candidates by distance, then by node id.
fn closer(a: (f64, u64), b: (f64, u64)) -> bool {
    match a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.1 < b.1,
    }
}

impl EventIndex {
    pub fn build(matrix: EmbeddingMatrix, backend: Backend) -> Result<Self> {
        Self::build_shared(Arc::new(matrix), backend)
    }

    pub fn build_shared(matrix: Arc<EmbeddingMatrix>, backend: Backend) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::InvalidInput(
                "embedding dimension must be positive".into(),
            ));
        }
        if matrix.ids().iter().any(|&id| id > u32::MAX as u64) {
            return Err(Error::InvalidInput(
                "embedding id exceeds node id range".into(),
            ));
        }
        let graph = match backend {
            Backend::Exact => None,
            Backend::Approximate(params) => {
                if params.m < 2 || params.ef_search == 0 || params.ef_construction == 0 {
                    return Err(Error::Config(
                        "hnsw needs m >= 2 and positive ef values".into(),
                    ));
                }
                Some(Arc::new(Hnsw::build(&matrix, params)))
            }
        };
        Ok(EventIndex { matrix, graph })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.graph.is_none()
    }

    /// Backend description for output metadata.
    pub fn describe(&self) -> String {
        match &self.graph {
            None => "exact".to_string(),
            Some(g) => format!(
                "approximate-hnsw(m={},ef_construction={},ef_search={},seed={})",
                g.params.m, g.params.ef_construction, g.params.ef_search, g.params.seed
            ),
        }
    }

    /// Best node for `query`; ties go to the smallest node id.
    pub fn nearest(&self, query: &[f32]) -> Result<Option<Hit>> {
        if query.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: query.len(),
            });
        }
        if query.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "query vector has non-finite values".into(),
            ));
        }
        let best = match &self.graph {
            None => self.scan(query, 0..self.matrix.len()),
            Some(g) => {
                let rows = g.search(&self.matrix, query);
                self.scan(query, rows.into_iter())
            }
        };
        Ok(best.map(|(d2, id)| Hit {
            node: NodeId(id as u32),
            distance: d2.sqrt(),
        }))
    }

    fn scan(&self, query: &[f32], rows: impl Iterator<Item = usize>) -> Option<(f64, u64)> {
        let ids = self.matrix.ids();
        let mut best: Option<(f64, u64)> = None;
        for r in rows {
            let cand = (squared_l2(query, self.matrix.row(r)), ids[r]);
            if best.is_none_or(|b| closer(cand, b)) {
                best = Some(cand);
            }
        }
        best
    }

    /// Nearest node if it lies within `threshold` (inclusive).
    pub fn match_vector(&self, query: &[f32], threshold: f64) -> Result<Option<Hit>> {
        check_threshold(threshold)?;
        Ok(self.nearest(query)?.filter(|h| h.distance <= threshold))
    }
}

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(Error::Config(format!(
            "threshold must be finite and >= 0, got {threshold}"
        )));
    }
    Ok(())
}
