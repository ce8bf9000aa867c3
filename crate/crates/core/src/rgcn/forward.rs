use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;

use super::graph::RelGraph;
use super::params::{Pooling, RgcnLayer, RgcnParams, ScoreHead};
use crate::error::{Error, Result};

/// One layer:
/// `h_i' = relu( sum_r sum_{j in N_r(i)} W_r h_j / |N_r(i)| + W_self h_i + b )`.
pub fn rgcn_layer(graph: &RelGraph, h: &Array2<f32>, layer: &RgcnLayer) -> Result<Array2<f32>> {
    if h.nrows() != graph.num_nodes {
        return Err(Error::DimensionMismatch {
            expected: graph.num_nodes,
            actual: h.nrows(),
        });
    }
    if h.ncols() != layer.d_in() {
        return Err(Error::DimensionMismatch {
            expected: layer.d_in(),
            actual: h.ncols(),
        });
    }
    if let Some(slot) = graph.max_slot() {
        if slot >= layer.relation_slots() {
            return Err(Error::InvalidInput(format!(
                "relation slot {slot} outside {} parameter slots",
                layer.relation_slots()
            )));
        }
    }
    let mut out = match &layer.self_loop {
        Some(w) => h.dot(&w.t()),
        None => Array2::zeros((h.nrows(), layer.d_out())),
    };
    let mut mean = Array1::<f32>::zeros(layer.d_in());
    for (slot, dst, sources) in graph.groups() {
        mean.fill(0.0);
        for &j in &sources {
            mean += &h.row(j);
        }
        mean /= sources.len() as f32;
        let w = layer.relation_weight(slot).expect("slot checked above");
        let mut row = out.row_mut(dst);
        row += &w.dot(&mean);
    }
    out += &layer.bias;
    out.mapv_inplace(|v| v.max(0.0));
    Ok(out)
}

/// All layers; returns final node states `n x d_L`.
pub fn forward(
    graph: &RelGraph,
    features: &Array2<f32>,
    params: &RgcnParams,
) -> Result<Array2<f32>> {
    let mut h = rgcn_layer(graph, features, &params.layers[0])?;
    for layer in &params.layers[1..] {
        h = rgcn_layer(graph, &h, layer)?;
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PooledGraph {
    pub vector: Array1<f32>,
    /// Attention weights per node, when attention pooling is used.
    pub weights: Option<Vec<f32>>,
}

/// Mean or attention pooling. An empty graph pools to the zero vector.
pub fn pool(h: &Array2<f32>, pooling: &Pooling) -> Result<PooledGraph> {
    let d = h.ncols();
    if h.nrows() == 0 {
        return Ok(PooledGraph {
            vector: Array1::zeros(d),
            weights: matches!(pooling, Pooling::Attention(_)).then(Vec::new),
        });
    }
    match pooling {
        Pooling::Mean => Ok(PooledGraph {
            vector: h.mean_axis(Axis(0)).expect("non-empty"),
            weights: None,
        }),
        Pooling::Attention(w) => {
            if w.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: w.len(),
                });
            }
            let alpha = softmax(&h.dot(w).to_vec());
            let mut vector = Array1::zeros(d);
            for (a, row) in alpha.iter().zip(h.rows()) {
                vector.scaled_add(*a, &row);
            }
            Ok(PooledGraph {
                vector,
                weights: Some(alpha),
            })
        }
    }
}

/// Scalar plausibility of one choice: `MLP(s + g)`, where `g` is projected to
/// the text dimension if needed.
pub fn score(
    text: ArrayView1<'_, f32>,
    graph: ArrayView1<'_, f32>,
    head: &ScoreHead,
) -> Result<f32> {
    let g = match &head.projection {
        Some(p) => {
            if p.ncols() != graph.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.ncols(),
                    actual: graph.len(),
                });
            }
            p.dot(&graph)
        }
        None => graph.to_owned(),
    };
    if g.len() != text.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            actual: text.len(),
        });
    }
    let mut z = g + text;
    let last = head.mlp.len().saturating_sub(1);
    for (i, (w, b)) in head.mlp.iter().enumerate() {
        z = w.dot(&z) + b;
        if i < last {
            z.mapv_inplace(|v| v.max(0.0));
        }
    }
    match z.as_slice() {
        Some([v]) => Ok(*v),
        _ => Err(Error::Invariant(format!(
            "score head produced {} outputs",
            z.len()
        ))),
    }
}

/// Numerically stable softmax (accumulated in f64).
pub fn softmax(logits: &[f32]) -> Vec<f32> {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
    let exps: Vec<f64> = logits.iter().map(|&v| (v as f64 - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| (e / total) as f32).collect()
}

#[derive(Debug, Clone)]
pub struct ChoiceInput {
    /// Text embedding of the narrative with this choice, length `text_dim`.
    pub text: Array1<f32>,
    pub graph: RelGraph,
    /// Initial node features, `n x d_0`, in graph node order.
    pub features: Array2<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceScores {
    pub logits: Vec<f32>,
    pub probabilities: Vec<f32>,
    /// First index of the highest probability.
    pub argmax: usize,
    pub attention: Vec<Option<Vec<f32>>>,
}

/// Scores every choice (in parallel) and normalises across choices.
pub fn score_choices(choices: &[ChoiceInput], params: &RgcnParams) -> Result<ChoiceScores> {
    if choices.is_empty() {
        return Err(Error::InvalidInput("no choices to score".into()));
    }
    let scored = choices
        .par_iter()
        .map(|c| {
            let h = forward(&c.graph, &c.features, params)?;
            let pooled = pool(&h, &params.pooling)?;
            let logit = score(c.text.view(), pooled.vector.view(), &params.head)?;
            if !logit.is_finite() {
                return Err(Error::Invariant("non-finite logit".into()));
            }
            Ok((logit, pooled.weights))
        })
        .collect::<Result<Vec<_>>>()?;
    let (logits, attention): (Vec<f32>, Vec<_>) = scored.into_iter().unzip();
    let probabilities = softmax(&logits);
    let argmax =
        probabilities.iter().enumerate().fold(
            0,
            |best, (i, p)| if *p > probabilities[best] { i } else { best },
        );
    Ok(ChoiceScores {
        logits,
        probabilities,
        argmax,
        attention,
    })
}
