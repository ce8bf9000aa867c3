//! Hierarchical navigable small-world graph used by the approximate backend.
//!
//! Built sequentially in row order with a seeded level generator, so the
//! same matrix and parameters always give the same graph.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::embedding::EmbeddingMatrix;
use super::index::{squared_l2, HnswParams};

/// `(squared distance, row)` with a total order.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored(f64, u32);

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Debug)]
pub(crate) struct Hnsw {
    pub(crate) params: HnswParams,
    /// `links[row][layer]`
    links: Vec<Vec<Vec<u32>>>,
    entry: Option<u32>,
    top: usize,
}

impl Hnsw {
    pub(crate) fn build(matrix: &EmbeddingMatrix, params: HnswParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let level_mult = 1.0 / (params.m as f64).ln();
        let mut g = Hnsw {
            params,
            links: Vec::with_capacity(matrix.len()),
            entry: None,
            top: 0,
        };
        for row in 0..matrix.len() {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            let level = (-u.ln() * level_mult).floor() as usize;
            g.insert(matrix, row as u32, level);
        }
        g
    }

    fn max_links(&self, layer: usize) -> usize {
        if layer == 0 {
            self.params.m * 2
        } else {
            self.params.m
        }
    }

    fn insert(&mut self, matrix: &EmbeddingMatrix, row: u32, level: usize) {
        self.links.push(vec![Vec::new(); level + 1]);
        let Some(mut ep) = self.entry else {
            self.entry = Some(row);
            self.top = level;
            return;
        };
        let q = matrix.row(row as usize);
        for layer in (level + 1..=self.top).rev() {
            ep = self.greedy(matrix, q, ep, layer);
        }
        let mut eps = vec![ep];
        for layer in (0..=level.min(self.top)).rev() {
            let found = self.search_layer(matrix, q, &eps, self.params.ef_construction, layer);
            let chosen: Vec<u32> = found
                .iter()
                .take(self.max_links(layer))
                .map(|s| s.1)
                .collect();
            for &nb in &chosen {
                self.links[nb as usize][layer].push(row);
                if self.links[nb as usize][layer].len() > self.max_links(layer) {
                    self.prune(matrix, nb, layer);
                }
            }
            self.links[row as usize][layer] = chosen;
            eps = found.into_iter().map(|s| s.1).collect();
        }
        if level > self.top {
            self.top = level;
            self.entry = Some(row);
        }
    }

    fn prune(&mut self, matrix: &EmbeddingMatrix, node: u32, layer: usize) {
        let base = matrix.row(node as usize);
        let mut scored: Vec<Scored> = self.links[node as usize][layer]
            .iter()
            .map(|&n| Scored(squared_l2(base, matrix.row(n as usize)), n))
            .collect();
        scored.sort();
        scored.truncate(self.max_links(layer));
        self.links[node as usize][layer] = scored.into_iter().map(|s| s.1).collect();
    }

    fn greedy(&self, matrix: &EmbeddingMatrix, q: &[f32], mut ep: u32, layer: usize) -> u32 {
        let mut best = Scored(squared_l2(q, matrix.row(ep as usize)), ep);
        loop {
            let mut moved = false;
            for &n in &self.links[ep as usize][layer] {
                let s = Scored(squared_l2(q, matrix.row(n as usize)), n);
                if s < best {
                    best = s;
                    moved = true;
                }
            }
            if !moved {
                return best.1;
            }
            ep = best.1;
        }
    }

    /// Best-first search on one layer; returns up to `ef` rows sorted by distance.
    fn search_layer(
        &self,
        matrix: &EmbeddingMatrix,
        q: &[f32],
        eps: &[u32],
        ef: usize,
        layer: usize,
    ) -> Vec<Scored> {
        let mut visited: HashSet<u32> = eps.iter().copied().collect();
        let mut candidates: BinaryHeap<Reverse<Scored>> = BinaryHeap::new();
        let mut results: BinaryHeap<Scored> = BinaryHeap::new();
        for &e in eps {
            let s = Scored(squared_l2(q, matrix.row(e as usize)), e);
            candidates.push(Reverse(s));
            results.push(s);
            if results.len() > ef {
                results.pop();
            }
        }
        while let Some(Reverse(c)) = candidates.pop() {
            if results.len() >= ef && results.peek().is_some_and(|w| c > *w) {
                break;
            }
            for &n in &self.links[c.1 as usize][layer] {
                if !visited.insert(n) {
                    continue;
                }
                let s = Scored(squared_l2(q, matrix.row(n as usize)), n);
                if results.len() < ef || results.peek().is_some_and(|w| s < *w) {
                    candidates.push(Reverse(s));
                    results.push(s);
                    if results.len() > ef {
                        results.pop();
                    }
                }
            }
        }
        results.into_sorted_vec()
    }

    /// Candidate rows for `q`, best first.
    pub(crate) fn search(&self, matrix: &EmbeddingMatrix, q: &[f32]) -> Vec<usize> {
        let Some(mut ep) = self.entry else {
            return Vec::new();
        };
        for layer in (1..=self.top).rev() {
            ep = self.greedy(matrix, q, ep, layer);
        }
        self.search_layer(matrix, q, &[ep], self.params.ef_search.max(1), 0)
            .into_iter()
            .map(|s| s.1 as usize)
            .collect()
    }
}
