//! Binary snapshot of a [`KgStore`].
//!
//! Layout (little-endian): magic `EVGS`, u32 version, u64 node count,
//! u64 edge count, u32 relation count; relation table (u32 byte length +
//! UTF-8 per name); node table (u64 freq, u32 byte length, UTF-8 text per
//! node, ids implicit); then columnar edge arrays `src: u64[E]`,
//! `rel: u32[E]`, `dst: u64[E]`, `weight: f32[E]` in `(src, rel, dst)` order.

use std::io::{self, Cursor, Read};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{EventualityNode, KgStore, NodeId, RelationId, RelationTable, TypedEdge};
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"EVGS";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn snapshot(store: &KgStore) -> Vec<u8> {
    let mut out = Vec::new();
    write_snapshot(store, &mut out).expect("writing to a Vec cannot fail");
    out
}

fn write_snapshot(store: &KgStore, out: &mut Vec<u8>) -> io::Result<()> {
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.write_u32::<LE>(SNAPSHOT_VERSION)?;
    out.write_u64::<LE>(store.node_count() as u64)?;
    out.write_u64::<LE>(store.edge_count() as u64)?;
    out.write_u32::<LE>(store.relations().len() as u32)?;
    for name in store.relations().names() {
        write_str(out, name)?;
    }
    for node in store.nodes() {
        out.write_u64::<LE>(node.freq)?;
        write_str(out, &node.text)?;
    }
    let edges: Vec<TypedEdge> = store.edges().collect();
    for e in &edges {
        out.write_u64::<LE>(e.src.0 as u64)?;
    }
    for e in &edges {
        out.write_u32::<LE>(e.rel.0)?;
    }
    for e in &edges {
        out.write_u64::<LE>(e.dst.0 as u64)?;
    }
    for e in &edges {
        out.write_f32::<LE>(e.weight)?;
    }
    Ok(())
}

fn write_str(out: &mut Vec<u8>, s: &str) -> io::Result<()> {
    out.write_u32::<LE>(s.len() as u32)?;
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

pub fn restore(blob: &[u8]) -> Result<KgStore> {
    let mut r = Cursor::new(blob);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if magic != SNAPSHOT_MAGIC {
        return Err(Error::Version(format!("bad snapshot magic {magic:?}")));
    }
    let version = r.read_u32::<LE>().map_err(truncated)?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Version(format!(
            "snapshot version {version}, expected {SNAPSHOT_VERSION}"
        )));
    }
    let node_count = r.read_u64::<LE>().map_err(truncated)?;
    let edge_count = r.read_u64::<LE>().map_err(truncated)?;
    let rel_count = r.read_u32::<LE>().map_err(truncated)?;
    let remaining = blob.len() as u64;
    // every node needs >= 12 bytes and every edge 24, so absurd counts are truncation
    if node_count.saturating_mul(12) > remaining || edge_count.saturating_mul(24) > remaining {
        return Err(Error::Truncated("counts exceed blob size".into()));
    }

    let mut relations = RelationTable::new();
    for _ in 0..rel_count {
        let name = read_str(&mut r)?;
        let before = relations.len();
        relations.intern(&name);
        if relations.len() == before {
            return Err(Error::InvalidInput(format!(
                "duplicate relation {name:?} in snapshot"
            )));
        }
    }
    let mut nodes = Vec::with_capacity(node_count as usize);
    for id in 0..node_count {
        let freq = r.read_u64::<LE>().map_err(truncated)?;
        let text = read_str(&mut r)?;
        nodes.push(EventualityNode { id, text, freq });
    }
    let e = edge_count as usize;
    let mut src = Vec::with_capacity(e);
    for _ in 0..e {
        src.push(r.read_u64::<LE>().map_err(truncated)?);
    }
    let mut rel = Vec::with_capacity(e);
    for _ in 0..e {
        rel.push(r.read_u32::<LE>().map_err(truncated)?);
    }
    let mut dst = Vec::with_capacity(e);
    for _ in 0..e {
        dst.push(r.read_u64::<LE>().map_err(truncated)?);
    }
    let mut edges = Vec::with_capacity(e);
    for i in 0..e {
        let weight = r.read_f32::<LE>().map_err(truncated)?;
        if src[i] >= node_count {
            return Err(Error::UnknownNode(src[i]));
        }
        if dst[i] >= node_count {
            return Err(Error::UnknownNode(dst[i]));
        }
        edges.push(TypedEdge {
            src: NodeId(src[i] as u32),
            rel: RelationId(rel[i]),
            dst: NodeId(dst[i] as u32),
            weight,
        });
    }
    if (r.position() as usize) != blob.len() {
        return Err(Error::InvalidInput("trailing bytes after snapshot".into()));
    }
    let store = KgStore::from_parts(nodes, relations, edges)?;
    if store.edge_count() != e {
        return Err(Error::InvalidInput(
            "snapshot contains duplicate edges".into(),
        ));
    }
    Ok(store)
}

fn read_str(r: &mut Cursor<&[u8]>) -> Result<String> {
    let len = r.read_u32::<LE>().map_err(truncated)? as usize;
    let start = r.position() as usize;
    let buf = r.get_ref();
    if start + len > buf.len() {
        return Err(Error::Truncated("string runs past end".into()));
    }
    let s = std::str::from_utf8(&buf[start..start + len])
        .map_err(|e| Error::InvalidInput(format!("invalid UTF-8 in snapshot: {e}")))?
        .to_string();
    r.set_position((start + len) as u64);
    Ok(s)
}

fn truncated(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::Truncated("unexpected end of snapshot".into())
    } else {
        Error::Io(e)
    }
}
