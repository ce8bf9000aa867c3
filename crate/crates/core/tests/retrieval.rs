mod common;

use std::collections::BTreeSet;

use common::{anchors, random_store, store};
use evkg_core::kg::{Direction, KgStore, NodeId, RelationId};
use evkg_core::retriever::{retrieve_subgraph, shortest_path, KgSubgraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Enumerates every simple directed path of at most `max_hops` edges and
/// keeps the shortest, lexicographically smallest node sequence.
fn oracle_path(store: &KgStore, from: NodeId, to: NodeId, max_hops: usize) -> Option<Vec<NodeId>> {
    fn dfs(
        store: &KgStore,
        path: &mut Vec<NodeId>,
        to: NodeId,
        max_hops: usize,
        best: &mut Option<Vec<NodeId>>,
    ) {
        let here = *path.last().unwrap();
        if here == to {
            let better = match best {
                None => true,
                Some(b) => (path.len(), &path[..]) < (b.len(), &b[..]),
            };
            if better {
                *best = Some(path.clone());
            }
            return;
        }
        if path.len() > max_hops {
            return;
        }
        let next: BTreeSet<NodeId> = store
            .neighbors(here, Direction::Out)
            .unwrap()
            .into_iter()
            .map(|(_, n)| n)
            .collect();
        for n in next {
            if !path.contains(&n) {
                path.push(n);
                dfs(store, path, to, max_hops, best);
                path.pop();
            }
        }
    }
    let mut best = None;
    dfs(store, &mut vec![from], to, max_hops, &mut best);
    best
}

fn smallest_relation(store: &KgStore, a: NodeId, b: NodeId) -> RelationId {
    store
        .neighbors(a, Direction::Out)
        .unwrap()
        .into_iter()
        .filter(|(_, n)| *n == b)
        .map(|(e, _)| e.rel)
        .min()
        .unwrap()
}

fn oracle_subgraph(store: &KgStore, groups: &[Vec<u32>], max_hops: usize) -> KgSubgraph {
    let mut sub = KgSubgraph::default();
    for (i, a) in groups.iter().enumerate() {
        for (j, b) in groups.iter().enumerate() {
            if i == j {
                continue;
            }
            for &x in a {
                for &y in b {
                    if x == y {
                        continue;
                    }
                    if let Some(p) = oracle_path(store, NodeId(x), NodeId(y), max_hops) {
                        for w in p.windows(2) {
                            sub.edges
                                .insert((w[0], smallest_relation(store, w[0], w[1]), w[1]));
                        }
                        sub.nodes.extend(p);
                    }
                }
            }
        }
    }
    sub
}

fn random_groups(rng: &mut ChaCha8Rng, n: u32) -> Vec<Vec<u32>> {
    let events = rng.gen_range(2..6);
    (0..events)
        .map(|_| {
            let k = rng.gen_range(1..4);
            let mut v: Vec<u32> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            v.dedup();
            v
        })
        .collect()
}

fn run(store: &KgStore, groups: &[Vec<u32>], max_hops: usize) -> KgSubgraph {
    let refs: Vec<&[u32]> = groups.iter().map(|g| g.as_slice()).collect();
    retrieve_subgraph(store, &anchors("d", &refs), max_hops).unwrap()
}

#[test]
fn paths_match_brute_force_on_random_graphs() {
    for seed in 0..20 {
        let store = random_store(seed, 50, 150);
        for a in 0..50 {
            for b in [0, 7, 19, 33, 49] {
                let got = shortest_path(&store, NodeId(a), NodeId(b), 3).unwrap();
                let want = oracle_path(&store, NodeId(a), NodeId(b), 3);
                assert_eq!(
                    got.as_ref().map(|p| p.nodes.clone()),
                    want,
                    "seed {seed} {a}->{b}"
                );
                if let Some(p) = got {
                    for (e, w) in p.edges.iter().zip(p.nodes.windows(2)) {
                        assert_eq!((e.src, e.dst), (w[0], w[1]));
                        assert_eq!(e.rel, smallest_relation(&store, w[0], w[1]));
                    }
                }
            }
        }
    }
}

#[test]
fn subgraph_equals_union_of_oracle_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..20 {
        let store = random_store(100 + seed, 50, 150);
        let groups = random_groups(&mut rng, 50);
        assert_eq!(
            run(&store, &groups, 3),
            oracle_subgraph(&store, &groups, 3),
            "seed {seed}"
        );
    }
}

#[test]
fn two_anchors_two_hops() {
    let store = store(
        4,
        &[(0, "Precedence", 1), (1, "Result", 2), (3, "Reason", 0)],
    );
    let sub = run(&store, &[vec![0], vec![2]], 3);
    assert_eq!(sub.nodes.len(), 3);
    assert_eq!(sub.edges.len(), 2);
    assert!(sub.nodes.contains(&NodeId(1)));
}

#[test]
fn path_longer_than_limit_is_dropped() {
    let store = store(
        5,
        &[
            (0, "Result", 1),
            (1, "Result", 2),
            (2, "Result", 3),
            (3, "Result", 4),
        ],
    );
    assert!(run(&store, &[vec![0], vec![4]], 3).nodes.is_empty());
    assert_eq!(run(&store, &[vec![0], vec![3]], 3).nodes.len(), 4);
    assert_eq!(run(&store, &[vec![0], vec![4]], 4).nodes.len(), 5);
}

#[test]
fn single_event_anchors_give_empty_subgraph() {
    let store = store(3, &[(0, "Result", 1), (1, "Result", 2)]);
    // Two anchors, but both come from the same source event.
    let sub = run(&store, &[vec![0, 2]], 3);
    assert!(sub.nodes.is_empty() && sub.edges.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn subgraph_matches_oracle(seed in 0u64..10_000, n in 2usize..200, density in 1usize..4) {
        let store = random_store(seed, n, n * density);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let groups = random_groups(&mut rng, n as u32);
        prop_assert_eq!(run(&store, &groups, 3), oracle_subgraph(&store, &groups, 3));
    }
}
