use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::{EventualityNode, KgStore, NodeId, RelationTable, TypedEdge};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct NodeRecord {
    id: u64,
    text: String,
    #[serde(default)]
    freq: u64,
}

/// Loads the line-delimited node file and the tab-separated edge file.
pub fn load_kg(nodes_path: &Path, edges_path: &Path) -> Result<KgStore> {
    let nodes_name = nodes_path.display().to_string();
    let edges_name = edges_path.display().to_string();
    let nodes = read_nodes(BufReader::new(File::open(nodes_path)?), &nodes_name)?;
    let mut relations = RelationTable::new();
    let edges = read_edges(
        BufReader::new(File::open(edges_path)?),
        &mut relations,
        nodes.len(),
        &edges_name,
    )?;
    KgStore::from_parts(nodes, relations, edges)
}

/// Parses node records; ids must cover `0..N` exactly once.
pub fn read_nodes<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<EventualityNode>> {
    let mut rows: Vec<(u64, usize, EventualityNode)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: NodeRecord = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(source_name, line_no, e.to_string()))?;
        if rec.text.is_empty() {
            return Err(Error::malformed(source_name, line_no, "empty node text"));
        }
        rows.push((
            rec.id,
            line_no,
            EventualityNode {
                id: rec.id,
                text: rec.text,
                freq: rec.freq,
            },
        ));
    }
    rows.sort_by_key(|(id, line, _)| (*id, *line));
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::DuplicateNode {
                id: pair[1].0,
                line: pair[1].1,
            });
        }
    }
    for (expected, (id, _, _)) in rows.iter().enumerate() {
        if *id != expected as u64 {
            return Err(Error::SparseNodeIds(expected as u64));
        }
    }
    if rows.len() > u32::MAX as usize {
        return Err(Error::InvalidInput("too many nodes".into()));
    }
    Ok(rows.into_iter().map(|(_, _, n)| n).collect())
}

/// Parses `src<TAB>rel<TAB>dst[<TAB>weight]` rows, interning relation names.
pub fn read_edges<R: BufRead>(
    reader: R,
    relations: &mut RelationTable,
    node_count: usize,
    source_name: &str,
) -> Result<Vec<TypedEdge>> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::malformed(
                source_name,
                line_no,
                format!("expected 3 or 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let node = |field: &str, what: &str| -> Result<NodeId> {
            let id: u64 = field.parse().map_err(|_| {
                Error::malformed(source_name, line_no, format!("bad {what} id {field:?}"))
            })?;
            if id >= node_count as u64 {
                return Err(Error::malformed(
                    source_name,
                    line_no,
                    format!("unknown node id {id}"),
                ));
            }
            Ok(NodeId(id as u32))
        };
        let src = node(fields[0], "src")?;
        let dst = node(fields[2], "dst")?;
        if fields[1].is_empty() {
            return Err(Error::malformed(
                source_name,
                line_no,
                "empty relation name",
            ));
        }
        let weight = match fields.get(3) {
            Some(w) => {
                let w: f32 = w.parse().map_err(|_| {
                    Error::malformed(source_name, line_no, format!("bad weight {w:?}"))
                })?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::malformed(
                        source_name,
                        line_no,
                        format!("weight must be finite and non-negative, got {w}"),
                    ));
                }
                w
            }
            None => 1.0,
        };
        edges.push(TypedEdge {
            src,
            rel: relations.intern(fields[1]),
            dst,
            weight,
        });
    }
    Ok(edges)
}
