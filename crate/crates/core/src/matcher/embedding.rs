//! Row-major `f32` embedding matrix and its `EVGE` file format.
//!
//! Layout (little-endian): magic `EVGE`, u32 version (=1), u64 count,
//! u32 dim, `count` u64 ids, then `count * dim` f32 values.

use std::io::{self, Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::kg::KgStore;

pub const EMBEDDING_MAGIC: [u8; 4] = *b"EVGE";
pub const EMBEDDING_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<u64>,
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    /// Builds a matrix whose row `i` belongs to node id `i`.
    pub fn from_rows(dim: usize, rows: Vec<Vec<f32>>) -> Result<Self> {
        let ids = (0..rows.len() as u64).collect();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend(row);
        }
        Self::new(ids, dim, data)
    }

    pub fn new(ids: Vec<u64>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "embedding dimension must be positive".into(),
            ));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: ids.len() * dim,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(EmbeddingMatrix { ids, dim, data })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    /// Checks that this matrix can serve as the node embeddings of `store`:
    /// one row per node and ids equal to row positions.
    pub fn check_attached(&self, store: &KgStore) -> Result<()> {
        if self.len() != store.node_count() {
            return Err(Error::InvalidInput(format!(
                "embedding count {} does not match node count {}",
                self.len(),
                store.node_count()
            )));
        }
        if let Some((i, id)) = self
            .ids
            .iter()
            .enumerate()
            .find(|(i, id)| **id != *i as u64)
        {
            return Err(Error::InvalidInput(format!(
                "embedding ids must be the identity permutation: row {i} has id {id}"
            )));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&EMBEDDING_MAGIC)?;
        w.write_u32::<LE>(EMBEDDING_VERSION)?;
        w.write_u64::<LE>(self.ids.len() as u64)?;
        w.write_u32::<LE>(self.dim as u32)?;
        for id in &self.ids {
            w.write_u64::<LE>(*id)?;
        }
        for v in &self.data {
            w.write_f32::<LE>(*v)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + self.ids.len() * 8 + self.data.len() * 4);
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let eof = |e: io::Error| {
            if e.kind() == io::ErrorKind::UnexpectedEof {
                Error::Truncated("unexpected end of embedding file".into())
            } else {
                Error::Io(e)
            }
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(eof)?;
        if magic != EMBEDDING_MAGIC {
            return Err(Error::Version(format!("bad embedding magic {magic:?}")));
        }
        let version = r.read_u32::<LE>().map_err(eof)?;
        if version != EMBEDDING_VERSION {
            return Err(Error::Version(format!("embedding version {version}")));
        }
        let count = r.read_u64::<LE>().map_err(eof)? as usize;
        let dim = r.read_u32::<LE>().map_err(eof)? as usize;
        let mut ids = Vec::new();
        for _ in 0..count {
            ids.push(r.read_u64::<LE>().map_err(eof)?);
        }
        let mut data = vec![0f32; count * dim];
        r.read_f32_into::<LE>(&mut data).map_err(eof)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::InvalidInput(
                "trailing bytes after embedding data".into(),
            ));
        }
        Self::new(ids, dim, data)
    }
}
