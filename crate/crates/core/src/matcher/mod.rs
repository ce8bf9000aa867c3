//! Nearest-anchor grounding by L2 distance with threshold filtering.

mod embedding;
mod ground;
mod hashing;
mod hnsw;
mod index;
mod table;

pub use embedding::{EmbeddingMatrix, EMBEDDING_MAGIC, EMBEDDING_VERSION};
pub use ground::{
    ground, grounding_stats, sentence_ground, AnchorMatch, AnchorSets, GroundingMode,
    GroundingStats, Query, DEFAULT_THRESHOLD,
};
pub use hashing::{HashingEmbedder, TextEmbedder, DEFAULT_HASH_DIM};
pub use index::{Backend, EventIndex, Hit, HnswParams};
pub use table::VectorTable;

use crate::error::Result;
use crate::kg::KgStore;

/// Embeds every node text of `store`, row `i` for node `i`.
pub fn embed_store(store: &KgStore, embedder: &dyn TextEmbedder) -> Result<EmbeddingMatrix> {
    let rows = store
        .nodes()
        .iter()
        .map(|n| embedder.embed(&n.text))
        .collect::<Result<Vec<_>>>()?;
    EmbeddingMatrix::from_rows(embedder.dim(), rows)
}
