//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Each check has a wall-clock budget.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use evkg_core::event::{
    build_person_index, extract_partial_events, normalize_event, read_frames, AbstractionCap,
    EventRef, RenderStyle,
};
use evkg_core::kg::{
    load_kg, Direction, EventualityNode, KgStore, NodeId, RelationId, RelationTable, TypedEdge,
};
use evkg_core::matcher::{
    embed_store, ground, AnchorMatch, AnchorSets, Backend, EmbeddingMatrix, EventIndex,
    GroundingMode, HashingEmbedder, Query,
};
use evkg_core::pipeline::{build_queries, prepare_documents, PipelineOptions};
use evkg_core::retriever::{
    build_joint_graph, retrieve_subgraph, shortest_path, ContextEvent, JointEdge, JointNode,
    JointNodeId, JointSubgraph, KgSubgraph, CONTEXT_RELATION, GROUNDING_RELATION,
};
use evkg_core::rgcn::{
    forward, pool, rgcn_layer, score, RelGraph, RelationWeights, RgcnConfig, RgcnLayer, RgcnParams,
};
use evkg_core::serializer::{
    build_prompt, serialize, PromptSpec, SerializationVariant, SerializeOptions,
};
use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (u32, &'static str, u64, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> PathBuf {
    manifest().join("tests/fixtures").join(name)
}

// [1] ---------------------------------------------------------------------

fn pie_ladder() -> Check {
    let frame = r#"{"doc_id":"e","sent_idx":0,"frame_idx":0,"verb":{"text":"evacuated","lemma":"evacuate","start":1,"end":2},"args":[{"role":"ARG0","text":"She","start":0,"end":1,"person_spans":[{"start":0,"end":1,"cluster":4}]},{"role":"ARG2","text":"to a relative 's house","start":2,"end":7},{"role":"ARGM-TMP","text":"last night","start":7,"end":9}]}"#;
    let frames = read_frames(frame.as_bytes(), "evacuation").map_err(|e| e.to_string())?;
    let event =
        normalize_event(&frames[0], &build_person_index(&frames)).map_err(|e| e.to_string())?;
    let ladder = extract_partial_events(&event, AbstractionCap::Arg0);
    let got: Vec<&str> = ladder
        .levels
        .iter()
        .map(|p| p.role_tagged.as_str())
        .collect();
    let want = [
        "ARG0: [P0] V: evacuated ARG2: to a relative 's house ARGM: last night",
        "ARG0: [P0] V: evacuated ARG2: to a relative 's house",
        "ARG0: [P0] V: evacuated",
        "V: evacuated",
    ];
    ensure!(got == want, "ladder {got:?}");
    Ok(())
}

// [2] ---------------------------------------------------------------------

fn normalization() -> Check {
    let input = [
        r#"{"doc_id":"g","sent_idx":0,"frame_idx":0,"verb":{"text":"had","lemma":"have","start":2,"end":3},"args":[{"role":"ARG0","text":"The general","start":0,"end":2,"person_spans":[{"start":0,"end":2,"cluster":11}]},{"role":"ARG1","text":"some wine","start":3,"end":5},{"role":"ARGM-LOC","text":"at a party","start":5,"end":8}]}"#,
        r#"{"doc_id":"g","sent_idx":1,"frame_idx":0,"verb":{"text":"felt","lemma":"feel","start":1,"end":2},"args":[{"role":"ARG0","text":"He","start":0,"end":1,"person_spans":[{"start":0,"end":1,"cluster":11}]},{"role":"ARG1","text":"sleepy","start":2,"end":3}]}"#,
        r#"{"doc_id":"g","sent_idx":2,"frame_idx":0,"verb":{"text":"said","lemma":"say","start":1,"end":2},"args":[{"role":"ARG0","text":"He","start":0,"end":1,"person_spans":[{"start":0,"end":1,"cluster":11}]},{"role":"ARG1","text":"goodbye","start":2,"end":3},{"role":"ARG2","text":"to them","start":3,"end":5,"person_spans":[{"start":4,"end":5,"cluster":2}]}]}"#,
    ]
    .join("\n");
    let frames = read_frames(input.as_bytes(), "general").map_err(|e| e.to_string())?;
    let index = build_person_index(&frames);
    let got = frames
        .iter()
        .map(|f| normalize_event(f, &index).map(|e| e.render(RenderStyle::Plain)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let want = [
        "[P0] had some wine at a party",
        "[P0] felt sleepy",
        "[P0] said goodbye to [P1]",
    ];
    ensure!(got == want, "normalized {got:?}");
    Ok(())
}

// [3] ---------------------------------------------------------------------

fn matching() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, dim) = (1000, 32);
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-0.2..0.2f32)).collect())
        .collect();
    let matrix = EmbeddingMatrix::from_rows(dim, rows.clone()).map_err(|e| e.to_string())?;
    let index = EventIndex::build(matrix, Backend::Exact).map_err(|e| e.to_string())?;
    let threshold = 0.65;
    let mut queries = Vec::new();
    let mut accepted_oracle = BTreeSet::new();
    for q in 0..100u32 {
        // Half the queries sit near a stored row, half are random.
        let vector: Vec<f32> = if q % 2 == 0 {
            let base = &rows[rng.gen_range(0..n)];
            base.iter()
                .map(|v| v + rng.gen_range(-0.12..0.12f32))
                .collect()
        } else {
            (0..dim).map(|_| rng.gen_range(-0.3..0.3f32)).collect()
        };
        let (best, dist) = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d2: f64 = r
                    .iter()
                    .zip(&vector)
                    .map(|(a, b)| (*a as f64 - *b as f64).powi(2))
                    .sum();
                (i, d2.sqrt())
            })
            .fold((usize::MAX, f64::INFINITY), |acc, x| {
                if x.1 < acc.1 {
                    x
                } else {
                    acc
                }
            });
        let hit = index
            .nearest(&vector)
            .map_err(|e| e.to_string())?
            .ok_or("no hit")?;
        ensure!(
            hit.node.index() == best,
            "query {q}: node {} vs oracle {best}",
            hit.node.0
        );
        ensure!(
            (hit.distance - dist).abs() <= 1e-6,
            "query {q}: distance {} vs {dist}",
            hit.distance
        );
        if dist <= threshold {
            accepted_oracle.insert(q);
        }
        queries.push(Query {
            event: EventRef {
                doc_id: "m".into(),
                sent_idx: q,
                frame_idx: 0,
            },
            level: 0,
            vector,
        });
    }
    let anchors = ground(&index, &queries, threshold).map_err(|e| e.to_string())?;
    let accepted: BTreeSet<u32> = anchors.matches().map(|m| m.event.sent_idx).collect();
    ensure!(
        accepted == accepted_oracle,
        "accepted {accepted:?} vs {accepted_oracle:?}"
    );
    ensure!(
        !accepted.is_empty() && accepted.len() < 100,
        "degenerate accepted set ({})",
        accepted.len()
    );
    Ok(())
}

// [4] ---------------------------------------------------------------------

fn monotonicity() -> Check {
    let store =
        load_kg(&fixture("kg_nodes.jsonl"), &fixture("kg_edges.tsv")).map_err(|e| e.to_string())?;
    ensure!(
        store.node_count() == 200,
        "fixture has {} nodes",
        store.node_count()
    );
    let embedder = HashingEmbedder::default();
    let index = EventIndex::build(
        embed_store(&store, &embedder).map_err(|e| e.to_string())?,
        Backend::Exact,
    )
    .map_err(|e| e.to_string())?;
    let frames = read_frames(
        fs::read(fixture("stories.jsonl"))
            .map_err(|e| e.to_string())?
            .as_slice(),
        "stories",
    )
    .map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for cap in [
        AbstractionCap::None,
        AbstractionCap::Argm,
        AbstractionCap::Arg234,
        AbstractionCap::Arg1,
    ] {
        let opts = PipelineOptions {
            cap,
            ..Default::default()
        };
        let docs = prepare_documents(frames.clone(), &opts).map_err(|e| e.to_string())?;
        let queries = build_queries(&docs, &opts, &embedder).map_err(|e| e.to_string())?;
        let anchors = ground(&index, &queries, opts.threshold).map_err(|e| e.to_string())?;
        counts.push((cap, anchors.grounded_events()));
    }
    let summary = counts
        .iter()
        .map(|(c, n)| format!("{c}={n}"))
        .collect::<Vec<_>>()
        .join(" ");
    ensure!(
        counts.windows(2).all(|w| w[0].1 <= w[1].1),
        "not monotone: {summary}"
    );
    println!("      grounded events: {summary}");
    Ok(())
}

// [5] ---------------------------------------------------------------------

fn random_store(rng: &mut ChaCha8Rng, n: usize, m: usize) -> KgStore {
    let mut relations = RelationTable::new();
    let rels: Vec<RelationId> = ["Precedence", "Result", "Reason", "Conjunction"]
        .iter()
        .map(|r| relations.intern(r))
        .collect();
    let nodes = (0..n)
        .map(|i| EventualityNode {
            id: i as u64,
            text: format!("e{i}"),
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
    KgStore::from_parts(nodes, relations, edges).unwrap()
}

fn successors(store: &KgStore, v: NodeId) -> BTreeSet<NodeId> {
    store
        .neighbors(v, Direction::Out)
        .unwrap()
        .into_iter()
        .map(|(_, n)| n)
        .collect()
}

/// Plain BFS hop count.
fn bfs_hops(store: &KgStore, from: NodeId, to: NodeId) -> Option<usize> {
    let mut dist = vec![usize::MAX; store.node_count()];
    let mut queue = std::collections::VecDeque::from([from]);
    dist[from.index()] = 0;
    while let Some(v) = queue.pop_front() {
        if v == to {
            return Some(dist[v.index()]);
        }
        for w in successors(store, v) {
            if dist[w.index()] == usize::MAX {
                dist[w.index()] = dist[v.index()] + 1;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Shortest, then lexicographically smallest, path by enumeration.
fn brute_force_path(
    store: &KgStore,
    from: NodeId,
    to: NodeId,
    max_hops: usize,
) -> Option<Vec<NodeId>> {
    fn go(
        store: &KgStore,
        path: &mut Vec<NodeId>,
        to: NodeId,
        max: usize,
        best: &mut Option<Vec<NodeId>>,
    ) {
        let here = *path.last().unwrap();
        if here == to {
            if best
                .as_ref()
                .is_none_or(|b| (path.len(), &path[..]) < (b.len(), &b[..]))
            {
                *best = Some(path.clone());
            }
            return;
        }
        if path.len() > max {
            return;
        }
        for n in successors(store, here) {
            if !path.contains(&n) {
                path.push(n);
                go(store, path, to, max, best);
                path.pop();
            }
        }
    }
    let mut best = None;
    go(store, &mut vec![from], to, max_hops, &mut best);
    best
}

fn retrieval() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gamma = 3;
    for g in 0..20 {
        let store = random_store(&mut rng, 50, 150);
        let groups: Vec<Vec<u32>> = (0..4)
            .map(|_| {
                (0..rng.gen_range(1..4))
                    .map(|_| rng.gen_range(0..50))
                    .collect()
            })
            .collect();
        let matches = groups
            .iter()
            .enumerate()
            .flat_map(|(k, nodes)| {
                nodes
                    .iter()
                    .enumerate()
                    .map(move |(level, &n)| AnchorMatch {
                        event: EventRef {
                            doc_id: "r".into(),
                            sent_idx: k as u32,
                            frame_idx: 0,
                        },
                        level: level as u32,
                        node_id: NodeId(n),
                        distance: 0.0,
                    })
            })
            .collect();
        let anchors =
            AnchorSets::from_matches(GroundingMode::Events, matches).map_err(|e| e.to_string())?;
        let mut oracle = KgSubgraph::default();
        for (i, a) in groups.iter().enumerate() {
            for (j, b) in groups.iter().enumerate() {
                for (&x, &y) in a.iter().flat_map(|x| b.iter().map(move |y| (x, y))) {
                    if i == j || x == y {
                        continue;
                    }
                    let (x, y) = (NodeId(x), NodeId(y));
                    let got = shortest_path(&store, x, y, gamma).map_err(|e| e.to_string())?;
                    let bfs = bfs_hops(&store, x, y).filter(|&h| h <= gamma);
                    ensure!(
                        got.as_ref().map(|p| p.hops()) == bfs,
                        "graph {g} {x:?}->{y:?}: {:?} vs BFS {bfs:?}",
                        got.as_ref().map(|p| p.hops())
                    );
                    if let Some(p) = &got {
                        ensure!(p.hops() <= gamma, "path longer than {gamma}");
                    }
                    if let Some(path) = brute_force_path(&store, x, y, gamma) {
                        for w in path.windows(2) {
                            let rel = store
                                .neighbors(w[0], Direction::Out)
                                .unwrap()
                                .into_iter()
                                .filter(|(_, n)| *n == w[1])
                                .map(|(e, _)| e.rel)
                                .min()
                                .unwrap();
                            oracle.edges.insert((w[0], rel, w[1]));
                        }
                        oracle.nodes.extend(path);
                    }
                }
            }
        }
        let sub = retrieve_subgraph(&store, &anchors, gamma).map_err(|e| e.to_string())?;
        ensure!(
            sub == oracle,
            "graph {g}: subgraph differs from oracle union"
        );
    }
    Ok(())
}

// [6] ---------------------------------------------------------------------

fn joint_structure() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..50 {
        let store = random_store(&mut rng, 30, 60);
        let m = rng.gen_range(1..10);
        let events: Vec<ContextEvent> = (0..m)
            .map(|k| ContextEvent {
                event: EventRef {
                    doc_id: "j".into(),
                    sent_idx: k,
                    frame_idx: 0,
                },
                text: format!("context {k}"),
            })
            .collect();
        let mut matches = Vec::new();
        for e in &events {
            let mut used = BTreeSet::new();
            for level in 0..rng.gen_range(0..3u32) {
                // Distinct nodes per event on even trials; repeats allowed otherwise.
                let node = rng.gen_range(0..30u32);
                if trial % 2 == 0 && !used.insert(node) {
                    continue;
                }
                matches.push(AnchorMatch {
                    event: e.event.clone(),
                    level,
                    node_id: NodeId(node),
                    distance: 0.1,
                });
            }
        }
        let anchors = AnchorSets::from_matches(GroundingMode::Events, matches.clone())
            .map_err(|e| e.to_string())?;
        let sub = retrieve_subgraph(&store, &anchors, 3).map_err(|e| e.to_string())?;
        let g =
            build_joint_graph(&store, "j", &sub, &events, &anchors).map_err(|e| e.to_string())?;
        let distinct: BTreeSet<_> = matches
            .iter()
            .map(|m| (m.event.sent_idx, m.node_id))
            .collect();
        ensure!(
            g.context_nodes.len() == m as usize,
            "trial {trial}: context nodes"
        );
        ensure!(
            g.edges_with(CONTEXT_RELATION).count() == m as usize - 1,
            "trial {trial}: context edges"
        );
        let grounding = g.edges_with(GROUNDING_RELATION).count();
        ensure!(
            grounding == distinct.len(),
            "trial {trial}: grounding edges {grounding}"
        );
        if trial % 2 == 0 {
            ensure!(
                grounding == matches.len(),
                "trial {trial}: one edge per accepted match"
            );
        }
    }
    Ok(())
}

// [7] ---------------------------------------------------------------------

fn boat_graph() -> JointSubgraph {
    let kg = |id: u32, text: &str| JointNode {
        id: JointNodeId::Kg(NodeId(id)),
        text: text.into(),
    };
    let edge = |s: u32, d: u32, rel: &str| JointEdge {
        src: JointNodeId::Kg(NodeId(s)),
        dst: JointNodeId::Kg(NodeId(d)),
        rel: rel.into(),
    };
    JointSubgraph {
        instance_id: "boat".into(),
        context_nodes: vec![],
        kg_nodes: vec![
            kg(0, "[P0] buy a boat"),
            kg(1, "[P0's] nearby marina have a race"),
            kg(2, "[P2] prepare"),
            kg(3, "[P2] go to sleep"),
        ],
        edges: vec![edge(0, 1, "Precedence"), edge(2, 3, "Precedence")],
    }
}

fn serialization() -> Check {
    let golden = manifest().join("tests/golden");
    let g = boat_graph();
    let opts = SerializeOptions::default();
    for (variant, file) in [
        (SerializationVariant::Dot, "boat.dot"),
        (SerializationVariant::Node, "boat.node.txt"),
        (SerializationVariant::NodeEdge, "boat.node_edge.txt"),
    ] {
        let want = fs::read_to_string(golden.join(file)).map_err(|e| format!("{file}: {e}"))?;
        let got = serialize(&g, variant, opts);
        ensure!(
            got == want.trim_end_matches('\n'),
            "{file} differs: {got:?}"
        );
    }
    let node_edge = serialize(&g, SerializationVariant::NodeEdge, opts);
    ensure!(
        node_edge == "[P0] buy a boat --> [P0's] nearby marina have a race; [P2] prepare --> [P2] go to sleep",
        "node&edge string {node_edge:?}"
    );
    let prompt = build_prompt(&PromptSpec {
        question: "Q".into(),
        blocks: vec!["X".into(), "Y".into()],
    })
    .map_err(|e| e.to_string())?;
    ensure!(
        prompt == "Event knowledge on narrative choice A: X\nEvent knowledge on narrative choice B: Y\nQuestion:Q\nAnswer:",
        "prompt {prompt:?}"
    );
    Ok(())
}

// [8] ---------------------------------------------------------------------

fn to_dense(a: &Array2<f32>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]] as f64)
}

fn dense_layer(graph: &RelGraph, h: &DMatrix<f64>, layer: &RgcnLayer) -> DMatrix<f64> {
    let n = graph.num_nodes;
    let mut out = match &layer.self_loop {
        Some(w) => h * to_dense(w).transpose(),
        None => DMatrix::zeros(n, layer.d_out()),
    };
    for r in 0..layer.relation_slots() {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (s, slot, d) in graph.triples() {
            if slot == r {
                a[(d, s)] = 1.0;
            }
        }
        for i in 0..n {
            let deg = a.row(i).sum();
            if deg > 0.0 {
                a.row_mut(i).scale_mut(1.0 / deg);
            }
        }
        out += a * h * to_dense(layer.relation_weight(r).unwrap()).transpose();
    }
    DMatrix::from_fn(n, layer.d_out(), |i, j| {
        (out[(i, j)] + layer.bias[j] as f64).max(0.0)
    })
}

fn rel_close(got: &Array2<f32>, want: &DMatrix<f64>) -> bool {
    got.indexed_iter()
        .all(|((i, j), &g)| (g as f64 - want[(i, j)]).abs() <= 1e-5 * want[(i, j)].abs().max(1.0))
}

fn rgcn() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..30u64 {
        let config = RgcnConfig {
            relations: vec![
                "Result".into(),
                GROUNDING_RELATION.into(),
                CONTEXT_RELATION.into(),
            ],
            inverse_relations: true,
            dims: vec![12, 10, 8],
            num_bases: if trial % 2 == 0 { -1 } else { 3 },
            self_loop: trial % 3 != 0,
            attention: trial % 2 == 1,
            text_dim: 6,
            mlp_hidden: vec![5],
        };
        let mut params = RgcnParams::random(&config, trial).map_err(|e| e.to_string())?;
        for l in &mut params.layers {
            l.bias.mapv_inplace(|_| rng.gen_range(-0.2..0.2));
        }
        let n = rng.gen_range(1..=50);
        let slots = params.relation_slots();
        let triples: Vec<_> = (0..rng.gen_range(0..4 * n))
            .map(|_| {
                (
                    rng.gen_range(0..n),
                    rng.gen_range(0..slots),
                    rng.gen_range(0..n),
                )
            })
            .collect();
        let graph = RelGraph::new(n, triples.iter().copied()).map_err(|e| e.to_string())?;
        let x = Array2::from_shape_fn((n, 12), |_| rng.gen_range(-1.0..1.0f32));

        let one = rgcn_layer(&graph, &x, &params.layers[0]).map_err(|e| e.to_string())?;
        let dense_one = dense_layer(&graph, &to_dense(&x), &params.layers[0]);
        ensure!(
            rel_close(&one, &dense_one),
            "trial {trial}: layer differs from dense oracle"
        );
        let two = forward(&graph, &x, &params).map_err(|e| e.to_string())?;
        let dense_two = dense_layer(&graph, &dense_one, &params.layers[1]);
        ensure!(
            rel_close(&two, &dense_two),
            "trial {trial}: 2-layer forward differs from dense oracle"
        );

        // Relabel nodes and compare logits.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let graph2 = RelGraph::new(n, triples.iter().map(|&(s, r, d)| (perm[s], r, perm[d])))
            .map_err(|e| e.to_string())?;
        let mut x2 = Array2::zeros((n, 12));
        for (i, &p) in perm.iter().enumerate() {
            x2.row_mut(p).assign(&x.row(i));
        }
        let text = ndarray::Array1::from_shape_fn(6, |_| rng.gen_range(-1.0..1.0f32));
        let logit = |g: &RelGraph, x: &Array2<f32>| -> Result<f32, String> {
            let h = forward(g, x, &params).map_err(|e| e.to_string())?;
            let pooled = pool(&h, &params.pooling).map_err(|e| e.to_string())?;
            score(text.view(), pooled.vector.view(), &params.head).map_err(|e| e.to_string())
        };
        let (a, b) = (logit(&graph, &x)?, logit(&graph2, &x2)?);
        ensure!(
            (a - b).abs() <= 1e-5 * a.abs().max(1.0),
            "trial {trial}: logit {a} vs relabelled {b}"
        );

        if let RelationWeights::Full(ws) = &params.layers[0].weights {
            let basis = RgcnLayer::new(
                RelationWeights::Basis {
                    bases: ws.clone(),
                    coeffs: Array2::eye(ws.len()),
                },
                params.layers[0].self_loop.clone(),
                params.layers[0].bias.clone(),
            )
            .map_err(|e| e.to_string())?;
            for (r, w) in ws.iter().enumerate() {
                ensure!(
                    basis.relation_weight(r) == Some(w),
                    "trial {trial}: basis slot {r} not exact"
                );
            }
        }
    }
    Ok(())
}

// [9] ---------------------------------------------------------------------

fn run_pipeline(dir: &Path, threads: &str) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_evkg"))
        .args(["pipeline", "--threads", threads, "--events"])
        .arg(fixture("stories.jsonl"))
        .arg("--kg-nodes")
        .arg(fixture("kg_nodes.jsonl"))
        .arg("--kg-edges")
        .arg(fixture("kg_edges.tsv"))
        .arg("--choices")
        .arg(fixture("choices.jsonl"))
        .arg("--out-dir")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "pipeline failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name, fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn determinism() -> Check {
    let tmp = std::env::temp_dir().join(format!("evkg-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&tmp);
    let runs = [("first", "1"), ("second", "1"), ("wide", "4")];
    let mut outputs = Vec::new();
    for (name, threads) in runs {
        outputs.push(run_pipeline(&tmp.join(name), threads)?);
    }
    let _ = fs::remove_dir_all(&tmp);
    let graphs = outputs[0].get("graphs.jsonl").ok_or("no graphs.jsonl")?;
    let count = graphs
        .split(|b| *b == b'\n')
        .filter(|l| !l.is_empty())
        .count();
    ensure!(count == 5, "expected 5 joint subgraphs, got {count}");
    for (i, other) in outputs.iter().enumerate().skip(1) {
        ensure!(
            other == &outputs[0],
            "run {} differs from the first",
            runs[i].0
        );
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "abstraction ladder exactness", 1, pie_ladder),
        (2, "person normalization exactness", 1, normalization),
        (
            3,
            "exact matching vs linear scan, threshold set",
            5,
            matching,
        ),
        (4, "grounded events monotone across caps", 10, monotonicity),
        (5, "retrieval vs brute-force paths", 10, retrieval),
        (6, "joint graph structure", 1, joint_structure),
        (7, "serialization goldens and prompt", 1, serialization),
        (8, "relational convolution vs dense oracle", 10, rgcn),
        (9, "end-to-end determinism", 10, determinism),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = result.and_then(|()| {
            if took > Duration::from_secs(budget) {
                Err(format!("took {took:.2?}, budget {budget}s"))
            } else {
                Ok(())
            }
        });
        match result {
            Ok(()) => println!("PASS [{id}] {name} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL [{id}] {name} ({took:.2?}): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
