//! Relational graph convolution over joint subgraphs, pooling, and the
//! per-choice score head.

mod forward;
mod graph;
mod params;

pub use forward::{
    forward, pool, rgcn_layer, score, score_choices, softmax, ChoiceInput, ChoiceScores,
    PooledGraph,
};
pub use graph::RelGraph;
pub use params::{
    Pooling, RelationWeights, RgcnConfig, RgcnLayer, RgcnParams, ScoreHead, PARAMS_MAGIC,
    PARAMS_VERSION,
};
