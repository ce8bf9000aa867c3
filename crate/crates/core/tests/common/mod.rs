#![allow(dead_code)]

use evkg_core::event::EventRef;
use evkg_core::kg::{EventualityNode, KgStore, NodeId, RelationTable, TypedEdge};
use evkg_core::matcher::{AnchorMatch, AnchorSets, GroundingMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RELATIONS: [&str; 4] = ["Precedence", "Result", "Reason", "Conjunction"];

pub fn store(n: usize, edges: &[(u32, &str, u32)]) -> KgStore {
    let mut relations = RelationTable::new();
    for r in RELATIONS {
        relations.intern(r);
    }
    let nodes = (0..n)
        .map(|i| EventualityNode {
            id: i as u64,
            text: format!("event {i}"),
            freq: 1,
        })
        .collect();
    let edges = edges
        .iter()
        .map(|&(s, r, d)| TypedEdge {
            src: NodeId(s),
            rel: relations.intern(r),
            dst: NodeId(d),
            weight: 1.0,
        })
        .collect();
    KgStore::from_parts(nodes, relations, edges).unwrap()
}

pub fn random_store(seed: u64, n: usize, m: usize) -> KgStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(u32, &str, u32)> = (0..m)
        .map(|_| {
            (
                rng.gen_range(0..n as u32),
                RELATIONS[rng.gen_range(0..RELATIONS.len())],
                rng.gen_range(0..n as u32),
            )
        })
        .collect();
    store(n, &edges)
}

pub fn event(doc: &str, sent: u32) -> EventRef {
    EventRef {
        doc_id: doc.to_string(),
        sent_idx: sent,
        frame_idx: 0,
    }
}

/// `anchors[k]` lists the nodes matched by event `k` (one per level).
pub fn anchors(doc: &str, per_event: &[&[u32]]) -> AnchorSets {
    let matches = per_event
        .iter()
        .enumerate()
        .flat_map(|(k, nodes)| {
            nodes
                .iter()
                .enumerate()
                .map(move |(level, &n)| AnchorMatch {
                    event: event(doc, k as u32),
                    level: level as u32,
                    node_id: NodeId(n),
                    distance: 0.1,
                })
        })
        .collect();
    AnchorSets::from_matches(GroundingMode::Events, matches).unwrap()
}
