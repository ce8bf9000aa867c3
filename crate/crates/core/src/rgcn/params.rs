//! Scorer parameters and the `EVGW` parameter file.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic "EVGW" | u32 version (=1)
//! u32 layer count L | u32 dims[L + 1]            (d_0 .. d_L)
//! u32 base relation count R | i32 num_bases (-1 = full matrices)
//! u32 flags (bit 0 self loop, bit 1 attention pooling, bit 2 inverse relations)
//! u32 text dim | u32 mlp layer count M | u32 mlp out dims[M] (last = 1)
//! relation names: R x (u32 byte length, UTF-8)
//! tensors, f32, row-major, in this order:
//!   per layer: full  -> W_r for every relation slot (d_out x d_in)
//!              basis -> V_b (B x d_out x d_in), then a (slots x B)
//!              W_self (d_out x d_in) if self loop; bias (d_out)
//!   attention vector (d_L) if attention pooling
//!   projection (text_dim x d_L) if d_L != text_dim
//!   per mlp layer: W (out x in), b (out)
//! ```
//! Relation slots are `R`, or `2R` with inverse relations (inverse of
//! relation `r` is slot `R + r`).

use std::io::{self, Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const PARAMS_MAGIC: [u8; 4] = *b"EVGW";
pub const PARAMS_VERSION: u32 = 1;

const FLAG_SELF_LOOP: u32 = 1;
const FLAG_ATTENTION: u32 = 1 << 1;
const FLAG_INVERSE: u32 = 1 << 2;

#[derive(Debug, Clone, PartialEq)]
pub enum RelationWeights {
    /// One `d_out x d_in` matrix per relation slot.
    Full(Vec<Array2<f32>>),
    /// `W_r = sum_b coeffs[r, b] * bases[b]`.
    Basis {
        bases: Vec<Array2<f32>>,
        coeffs: Array2<f32>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgcnLayer {
    pub weights: RelationWeights,
    pub self_loop: Option<Array2<f32>>,
    pub bias: Array1<f32>,
    /// Per-slot weights, materialized from `weights`.
    materialized: Vec<Array2<f32>>,
}

impl RgcnLayer {
    pub fn new(
        weights: RelationWeights,
        self_loop: Option<Array2<f32>>,
        bias: Array1<f32>,
    ) -> Result<Self> {
        let materialized = match &weights {
            RelationWeights::Full(ws) => ws.clone(),
            RelationWeights::Basis { bases, coeffs } => {
                if coeffs.ncols() != bases.len() {
                    return Err(Error::DimensionMismatch {
                        expected: bases.len(),
                        actual: coeffs.ncols(),
                    });
                }
                let shape = bases.first().map(|b| b.dim()).unwrap_or((bias.len(), 0));
                coeffs
                    .rows()
                    .into_iter()
                    .map(|a| {
                        let mut w = Array2::<f32>::zeros(shape);
                        for (coef, basis) in a.iter().zip(bases) {
                            w.scaled_add(*coef, basis);
                        }
                        w
                    })
                    .collect()
            }
        };
        let layer = RgcnLayer {
            weights,
            self_loop,
            bias,
            materialized,
        };
        layer.check_shapes()?;
        Ok(layer)
    }

    fn check_shapes(&self) -> Result<()> {
        let d_out = self.bias.len();
        let d_in = self.d_in();
        let all =
            self.materialized
                .iter()
                .chain(self.self_loop.iter())
                .chain(match &self.weights {
                    RelationWeights::Basis { bases, .. } => bases.iter(),
                    RelationWeights::Full(_) => [].iter(),
                });
        for w in all {
            if w.dim() != (d_out, d_in) {
                return Err(Error::DimensionMismatch {
                    expected: d_out * d_in,
                    actual: w.len(),
                });
            }
        }
        Ok(())
    }

    pub fn d_in(&self) -> usize {
        self.materialized
            .first()
            .or(self.self_loop.as_ref())
            .map_or(0, |w| w.ncols())
    }

    pub fn d_out(&self) -> usize {
        self.bias.len()
    }

    pub fn relation_slots(&self) -> usize {
        self.materialized.len()
    }

    pub fn relation_weight(&self, slot: usize) -> Option<&Array2<f32>> {
        self.materialized.get(slot)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pooling {
    Mean,
    /// Softmax over `w . h_i`.
    Attention(Array1<f32>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreHead {
    /// Maps the pooled graph vector to the text dimension when they differ.
    pub projection: Option<Array2<f32>>,
    /// `(W, b)` per layer; rectifier between layers, scalar output.
    pub mlp: Vec<(Array2<f32>, Array1<f32>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgcnParams {
    pub relations: Vec<String>,
    pub inverse_relations: bool,
    pub num_bases: i32,
    pub layers: Vec<RgcnLayer>,
    pub pooling: Pooling,
    pub head: ScoreHead,
    pub text_dim: usize,
}

/// Shape description used to initialise parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RgcnConfig {
    pub relations: Vec<String>,
    pub inverse_relations: bool,
    /// `d_0 .. d_L`.
    pub dims: Vec<usize>,
    /// `-1` for full per-relation matrices.
    pub num_bases: i32,
    pub self_loop: bool,
    pub attention: bool,
    pub text_dim: usize,
    pub mlp_hidden: Vec<usize>,
}

impl RgcnParams {
    pub fn relation_slots(&self) -> usize {
        self.relations.len() * if self.inverse_relations { 2 } else { 1 }
    }

    pub fn graph_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.d_out())
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.d_in())
    }

    /// Glorot-uniform initialisation from a seed. Used for demos and tests;
    /// trained parameters come from a file.
    pub fn random(config: &RgcnConfig, seed: u64) -> Result<Self> {
        if config.dims.len() < 2 {
            return Err(Error::Config("need at least one layer".into()));
        }
        if config.num_bases == 0 || config.num_bases < -1 {
            return Err(Error::Config(format!(
                "num_bases must be -1 or positive, got {}",
                config.num_bases
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mat = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols).max(1) as f32).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-a..a))
        };
        let slots = config.relations.len() * if config.inverse_relations { 2 } else { 1 };
        let mut layers = Vec::new();
        for w in config.dims.windows(2) {
            let (d_in, d_out) = (w[0], w[1]);
            let weights = if config.num_bases < 0 {
                RelationWeights::Full((0..slots).map(|_| mat(d_out, d_in)).collect())
            } else {
                let b = config.num_bases as usize;
                RelationWeights::Basis {
                    bases: (0..b).map(|_| mat(d_out, d_in)).collect(),
                    coeffs: mat(slots, b),
                }
            };
            let self_loop = config.self_loop.then(|| mat(d_out, d_in));
            layers.push(RgcnLayer::new(weights, self_loop, Array1::zeros(d_out))?);
        }
        let d_l = *config.dims.last().unwrap();
        let pooling = if config.attention {
            Pooling::Attention(mat(1, d_l).row(0).to_owned())
        } else {
            Pooling::Mean
        };
        let projection = (d_l != config.text_dim).then(|| mat(config.text_dim, d_l));
        let mut mlp = Vec::new();
        let mut d = config.text_dim;
        for &h in config.mlp_hidden.iter().chain(std::iter::once(&1)) {
            mlp.push((mat(h, d), Array1::zeros(h)));
            d = h;
        }
        let params = RgcnParams {
            relations: config.relations.clone(),
            inverse_relations: config.inverse_relations,
            num_bases: config.num_bases,
            layers,
            pooling,
            head: ScoreHead { projection, mlp },
            text_dim: config.text_dim,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("scorer has no layers".into()));
        }
        for pair in self.layers.windows(2) {
            if pair[0].d_out() != pair[1].d_in() {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].d_out(),
                    actual: pair[1].d_in(),
                });
            }
        }
        for l in &self.layers {
            if l.relation_slots() != self.relation_slots() {
                return Err(Error::DimensionMismatch {
                    expected: self.relation_slots(),
                    actual: l.relation_slots(),
                });
            }
            let is_full = matches!(l.weights, RelationWeights::Full(_));
            if is_full != (self.num_bases == -1) {
                return Err(Error::Config(
                    "num_bases disagrees with stored weights".into(),
                ));
            }
        }
        let d_l = self.graph_dim();
        if let Pooling::Attention(w) = &self.pooling {
            if w.len() != d_l {
                return Err(Error::DimensionMismatch {
                    expected: d_l,
                    actual: w.len(),
                });
            }
        }
        match &self.head.projection {
            Some(p) if p.dim() != (self.text_dim, d_l) => {
                return Err(Error::DimensionMismatch {
                    expected: self.text_dim * d_l,
                    actual: p.len(),
                })
            }
            None if d_l != self.text_dim => {
                return Err(Error::DimensionMismatch {
                    expected: self.text_dim,
                    actual: d_l,
                })
            }
            _ => {}
        }
        let mut d = self.text_dim;
        for (w, b) in &self.head.mlp {
            if w.ncols() != d || w.nrows() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: w.ncols(),
                });
            }
            d = w.nrows();
        }
        if d != 1 {
            return Err(Error::Config(
                "score head must end in a single output".into(),
            ));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&PARAMS_MAGIC)?;
        w.write_u32::<LE>(PARAMS_VERSION)?;
        w.write_u32::<LE>(self.layers.len() as u32)?;
        w.write_u32::<LE>(self.input_dim() as u32)?;
        for l in &self.layers {
            w.write_u32::<LE>(l.d_out() as u32)?;
        }
        w.write_u32::<LE>(self.relations.len() as u32)?;
        w.write_i32::<LE>(self.num_bases)?;
        let mut flags = 0;
        if self.layers[0].self_loop.is_some() {
            flags |= FLAG_SELF_LOOP;
        }
        if matches!(self.pooling, Pooling::Attention(_)) {
            flags |= FLAG_ATTENTION;
        }
        if self.inverse_relations {
            flags |= FLAG_INVERSE;
        }
        w.write_u32::<LE>(flags)?;
        w.write_u32::<LE>(self.text_dim as u32)?;
        w.write_u32::<LE>(self.head.mlp.len() as u32)?;
        for (m, _) in &self.head.mlp {
            w.write_u32::<LE>(m.nrows() as u32)?;
        }
        for name in &self.relations {
            w.write_u32::<LE>(name.len() as u32)?;
            w.write_all(name.as_bytes())?;
        }
        let put = |w: &mut W, values: &mut dyn Iterator<Item = &f32>| -> io::Result<()> {
            for v in values {
                w.write_f32::<LE>(*v)?;
            }
            Ok(())
        };
        for l in &self.layers {
            match &l.weights {
                RelationWeights::Full(ws) => {
                    for m in ws {
                        put(&mut w, &mut m.iter())?;
                    }
                }
                RelationWeights::Basis { bases, coeffs } => {
                    for b in bases {
                        put(&mut w, &mut b.iter())?;
                    }
                    put(&mut w, &mut coeffs.iter())?;
                }
            }
            if let Some(s) = &l.self_loop {
                put(&mut w, &mut s.iter())?;
            }
            put(&mut w, &mut l.bias.iter())?;
        }
        if let Pooling::Attention(a) = &self.pooling {
            put(&mut w, &mut a.iter())?;
        }
        if let Some(p) = &self.head.projection {
            put(&mut w, &mut p.iter())?;
        }
        for (m, b) in &self.head.mlp {
            put(&mut w, &mut m.iter())?;
            put(&mut w, &mut b.iter())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let eof = |e: io::Error| {
            if e.kind() == io::ErrorKind::UnexpectedEof {
                Error::Truncated("unexpected end of parameter file".into())
            } else {
                Error::Io(e)
            }
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(eof)?;
        if magic != PARAMS_MAGIC {
            return Err(Error::Version(format!("bad parameter magic {magic:?}")));
        }
        let version = r.read_u32::<LE>().map_err(eof)?;
        if version != PARAMS_VERSION {
            return Err(Error::Version(format!("parameter version {version}")));
        }
        let u32_ = |r: &mut R| r.read_u32::<LE>().map_err(eof).map(|v| v as usize);
        let layer_count = u32_(&mut r)?;
        const LIMIT: usize = 1 << 16;
        if layer_count == 0 || layer_count > 64 {
            return Err(Error::InvalidInput(format!(
                "implausible layer count {layer_count}"
            )));
        }
        let dims = (0..=layer_count)
            .map(|_| u32_(&mut r))
            .collect::<Result<Vec<_>>>()?;
        let rel_count = u32_(&mut r)?;
        let num_bases = r.read_i32::<LE>().map_err(eof)?;
        let flags = u32_(&mut r)? as u32;
        let text_dim = u32_(&mut r)?;
        let mlp_count = u32_(&mut r)?;
        if mlp_count == 0 || mlp_count > 64 {
            return Err(Error::InvalidInput(format!(
                "implausible mlp layer count {mlp_count}"
            )));
        }
        let mlp_dims = (0..mlp_count)
            .map(|_| u32_(&mut r))
            .collect::<Result<Vec<_>>>()?;
        if dims
            .iter()
            .chain(&mlp_dims)
            .chain([&rel_count, &text_dim])
            .any(|&d| d > LIMIT)
            || num_bases > LIMIT as i32
            || num_bases < -1
            || num_bases == 0
        {
            return Err(Error::InvalidInput(
                "parameter header has implausible sizes".into(),
            ));
        }
        let mut relations = Vec::with_capacity(rel_count);
        for _ in 0..rel_count {
            let len = u32_(&mut r)?;
            if len > LIMIT {
                return Err(Error::InvalidInput("relation name too long".into()));
            }
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf).map_err(eof)?;
            relations.push(String::from_utf8(buf).map_err(|e| Error::InvalidInput(e.to_string()))?);
        }
        let inverse = flags & FLAG_INVERSE != 0;
        let slots = rel_count * if inverse { 2 } else { 1 };
        let take = |r: &mut R, rows: usize, cols: usize| -> Result<Array2<f32>> {
            let mut data = vec![0f32; rows * cols];
            r.read_f32_into::<LE>(&mut data).map_err(eof)?;
            if data.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite parameter".into()));
            }
            Ok(Array2::from_shape_vec((rows, cols), data).expect("shape matches length"))
        };
        let mut layers = Vec::with_capacity(layer_count);
        for w in dims.windows(2) {
            let (d_in, d_out) = (w[0], w[1]);
            let weights = if num_bases == -1 {
                RelationWeights::Full(
                    (0..slots)
                        .map(|_| take(&mut r, d_out, d_in))
                        .collect::<Result<_>>()?,
                )
            } else {
                let b = num_bases as usize;
                let bases = (0..b)
                    .map(|_| take(&mut r, d_out, d_in))
                    .collect::<Result<_>>()?;
                RelationWeights::Basis {
                    bases,
                    coeffs: take(&mut r, slots, b)?,
                }
            };
            let self_loop = if flags & FLAG_SELF_LOOP != 0 {
                Some(take(&mut r, d_out, d_in)?)
            } else {
                None
            };
            let bias = take(&mut r, 1, d_out)?.row(0).to_owned();
            layers.push(RgcnLayer::new(weights, self_loop, bias)?);
        }
        let d_l = *dims.last().unwrap();
        let pooling = if flags & FLAG_ATTENTION != 0 {
            Pooling::Attention(take(&mut r, 1, d_l)?.row(0).to_owned())
        } else {
            Pooling::Mean
        };
        let projection = if d_l != text_dim {
            Some(take(&mut r, text_dim, d_l)?)
        } else {
            None
        };
        let mut mlp = Vec::new();
        let mut d = text_dim;
        for &out in &mlp_dims {
            let m = take(&mut r, out, d)?;
            let b = take(&mut r, 1, out)?.row(0).to_owned();
            mlp.push((m, b));
            d = out;
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::InvalidInput(
                "trailing bytes after parameters".into(),
            ));
        }
        let params = RgcnParams {
            relations,
            inverse_relations: inverse,
            num_bases,
            layers,
            pooling,
            head: ScoreHead { projection, mlp },
            text_dim,
        };
        params.validate()?;
        Ok(params)
    }
}
