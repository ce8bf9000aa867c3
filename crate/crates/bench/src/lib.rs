//! Seeded synthetic inputs shared by the benchmarks.

use evkg_core::event::EventRef;
use evkg_core::kg::{EventualityNode, KgStore, NodeId, RelationTable, TypedEdge};
use evkg_core::matcher::{AnchorMatch, AnchorSets, EmbeddingMatrix, GroundingMode, Query};
use evkg_core::rgcn::RelGraph;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RELATIONS: [&str; 4] = ["Precedence", "Result", "Reason", "Conjunction"];

/// Random multigraph with `n` nodes and `m` edges over [`RELATIONS`].
pub fn random_store(seed: u64, n: usize, m: usize) -> KgStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut relations = RelationTable::new();
    let rels: Vec<_> = RELATIONS.iter().map(|r| relations.intern(r)).collect();
    let nodes = (0..n)
        .map(|i| EventualityNode {
            id: i as u64,
            text: format!("[P0] event {i}"),
            freq: 1,
        })
        .collect();
    let edges = (0..m)
        .map(|_| TypedEdge {
            src: NodeId(rng.gen_range(0..n as u32)),
            rel: rels[rng.gen_range(0..rels.len())],
            dst: NodeId(rng.gen_range(0..n as u32)),
            weight: 1.0,
        })
        .collect();
    KgStore::from_parts(nodes, relations, edges).expect("valid synthetic store")
}

/// Uniform vectors in `[-1, 1)^dim`.
pub fn random_matrix(seed: u64, n: usize, dim: usize) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0f32)).collect())
        .collect();
    EmbeddingMatrix::from_rows(dim, rows).expect("valid synthetic matrix")
}

/// One query per row, one event per query.
pub fn random_queries(seed: u64, count: usize, dim: usize) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| Query {
            event: EventRef {
                doc_id: "bench".into(),
                sent_idx: i as u32,
                frame_idx: 0,
            },
            level: 0,
            vector: (0..dim).map(|_| rng.gen_range(-1.0..1.0f32)).collect(),
        })
        .collect()
}

/// `events` source events, each anchored to up to three random nodes.
pub fn random_anchors(seed: u64, n: usize, events: usize) -> AnchorSets {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matches = (0..events)
        .flat_map(|k| {
            (0..rng.gen_range(1..=3u32))
                .map(|level| AnchorMatch {
                    event: EventRef {
                        doc_id: "bench".into(),
                        sent_idx: k as u32,
                        frame_idx: 0,
                    },
                    level,
                    node_id: NodeId(rng.gen_range(0..n as u32)),
                    distance: 0.0,
                })
                .collect::<Vec<_>>()
        })
        .collect();
    AnchorSets::from_matches(GroundingMode::Events, matches).expect("one match per level")
}

/// Random relational graph and node features.
pub fn random_rel_graph(
    seed: u64,
    n: usize,
    m: usize,
    slots: usize,
    dim: usize,
) -> (RelGraph, Array2<f32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<_> = (0..m)
        .map(|_| {
            (
                rng.gen_range(0..n),
                rng.gen_range(0..slots),
                rng.gen_range(0..n),
            )
        })
        .collect();
    let graph = RelGraph::new(n, triples).expect("in-range nodes");
    let x = Array2::from_shape_fn((n, dim), |_| rng.gen_range(-1.0..1.0f32));
    (graph, x)
}
