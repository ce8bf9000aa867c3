//! Run settings: a `key = value` config file, overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use evkg_core::matcher::{Backend, HnswParams, DEFAULT_HASH_DIM};
use evkg_core::pipeline::PipelineOptions;
use evkg_core::serializer::SerializationVariant;
use evkg_core::Error;

/// Options shared by every command. Any of them may also be set in the
/// config file under the same name with underscores (`max_hops = 3`).
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Config file with `key = value` lines; `#` starts a comment
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// KG nodes, JSON lines {id, text, freq}
    #[arg(long, global = true)]
    pub kg_nodes: Option<PathBuf>,
    /// KG edges, TSV src rel dst [weight]
    #[arg(long, global = true)]
    pub kg_edges: Option<PathBuf>,
    /// KG binary snapshot (instead of nodes + edges)
    #[arg(long, global = true)]
    pub kg_snapshot: Option<PathBuf>,
    /// Node embeddings file; without it the hashing embedder is used
    #[arg(long, global = true)]
    pub kg_embeddings: Option<PathBuf>,
    /// Query/context vectors, JSON lines {text, vector}; needed with --kg-embeddings
    #[arg(long, global = true)]
    pub text_vectors: Option<PathBuf>,
    /// Scorer parameter file
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Distance threshold for accepting an anchor
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Maximum path length in edges
    #[arg(long, global = true)]
    pub max_hops: Option<usize>,
    /// Deepest tier the ladder may drop: NONE, ARGM, ARG234, ARG1, ARG0
    #[arg(long, global = true)]
    pub cap: Option<String>,
    /// Ground whole sentences instead of extracted events (implies --no-pie)
    #[arg(long, global = true)]
    pub no_extract: bool,
    /// Keep raw person mentions
    #[arg(long, global = true)]
    pub no_norm: bool,
    /// Query only the full event
    #[arg(long, global = true)]
    pub no_pie: bool,
    /// Serialization: dot, node, node_edge
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// Print relation names in node_edge output
    #[arg(long, global = true)]
    pub relation_labels: bool,
    /// Dimension of the hashing embedder
    #[arg(long, global = true)]
    pub hash_dim: Option<usize>,
    /// Nearest-neighbor backend: exact or hnsw
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Seed for randomized internals
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Attention nodes reported per choice by `score`
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub kg_nodes: Option<PathBuf>,
    pub kg_edges: Option<PathBuf>,
    pub kg_snapshot: Option<PathBuf>,
    pub kg_embeddings: Option<PathBuf>,
    pub text_vectors: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub pipeline: PipelineOptions,
    pub variant: SerializationVariant,
    pub relation_labels: bool,
    pub hash_dim: usize,
    pub backend: Backend,
    pub threads: Option<usize>,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            kg_nodes: None,
            kg_edges: None,
            kg_snapshot: None,
            kg_embeddings: None,
            text_vectors: None,
            params: None,
            pipeline: PipelineOptions::default(),
            variant: SerializationVariant::default(),
            relation_labels: false,
            hash_dim: DEFAULT_HASH_DIM,
            backend: Backend::Exact,
            threads: None,
            top_k: 10,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean {value:?} for {key}"))),
    }
}

/// Reads `key = value` pairs. Relative paths in the file resolve against
/// the file's directory.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{}:{}: expected key = value",
                path.display(),
                i + 1
            ))
        })?;
        let key = key.trim().replace('-', "_");
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!(
                "{}:{}: duplicate key {key}",
                path.display(),
                i + 1
            )));
        }
    }
    Ok(out)
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Result<Self, Error> {
        let mut s = Settings::default();
        let mut seed = None;
        let mut backend = None;
        if let Some(path) = &args.config {
            let base = path.parent().unwrap_or(Path::new(""));
            let path_of = |v: &str| Some(base.join(v));
            for (key, value) in read_config(path)? {
                let v = value.as_str();
                match key.as_str() {
                    "kg_nodes" => s.kg_nodes = path_of(v),
                    "kg_edges" => s.kg_edges = path_of(v),
                    "kg_snapshot" => s.kg_snapshot = path_of(v),
                    "kg_embeddings" => s.kg_embeddings = path_of(v),
                    "text_vectors" => s.text_vectors = path_of(v),
                    "params" => s.params = path_of(v),
                    "threshold" => s.pipeline.threshold = parse(&key, v)?,
                    "max_hops" => s.pipeline.max_hops = parse(&key, v)?,
                    "cap" => s.pipeline.cap = v.parse()?,
                    "no_extract" => s.pipeline.no_extract = parse_bool(&key, v)?,
                    "no_norm" => s.pipeline.no_norm = parse_bool(&key, v)?,
                    "no_pie" => s.pipeline.no_pie = parse_bool(&key, v)?,
                    "variant" => {
                        s.variant = v
                            .parse()
                            .map_err(|_| Error::Config(format!("bad variant {v:?}")))?
                    }
                    "relation_labels" => s.relation_labels = parse_bool(&key, v)?,
                    "hash_dim" => s.hash_dim = parse(&key, v)?,
                    "backend" => backend = Some(v.to_string()),
                    "seed" => seed = Some(parse(&key, v)?),
                    "threads" => s.threads = Some(parse(&key, v)?),
                    "top_k" => s.top_k = parse(&key, v)?,
                    _ => return Err(Error::Config(format!("unknown config key {key:?}"))),
                }
            }
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &args.$field {
                    s.$field = Some(v.clone());
                }
            )*};
        }
        take!(
            kg_nodes,
            kg_edges,
            kg_snapshot,
            kg_embeddings,
            text_vectors,
            params
        );
        if let Some(v) = args.threshold {
            s.pipeline.threshold = v;
        }
        if let Some(v) = args.max_hops {
            s.pipeline.max_hops = v;
        }
        if let Some(v) = &args.cap {
            s.pipeline.cap = v.parse()?;
        }
        s.pipeline.no_extract |= args.no_extract;
        s.pipeline.no_norm |= args.no_norm;
        s.pipeline.no_pie |= args.no_pie;
        if let Some(v) = &args.variant {
            s.variant = v
                .parse()
                .map_err(|_| Error::Config(format!("bad variant {v:?}")))?;
        }
        s.relation_labels |= args.relation_labels;
        if let Some(v) = args.hash_dim {
            s.hash_dim = v;
        }
        if let Some(v) = args.threads {
            s.threads = Some(v);
        }
        if let Some(v) = args.top_k {
            s.top_k = v;
        }
        seed = args.seed.or(seed);
        s.seed = seed.unwrap_or(0);
        backend = args.backend.clone().or(backend);
        s.backend = match backend.as_deref() {
            None | Some("exact") => Backend::Exact,
            Some("hnsw") => Backend::Approximate(HnswParams {
                seed: s.seed,
                ..HnswParams::default()
            }),
            Some(other) => return Err(Error::Config(format!("unknown backend {other:?}"))),
        };
        if s.hash_dim == 0 {
            return Err(Error::Config("hash_dim must be positive".into()));
        }
        if s.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        s.pipeline.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use evkg_core::event::AbstractionCap;
    use std::io::Write;

    #[test]
    fn defaults() {
        let s = Settings::resolve(&GlobalArgs::default()).unwrap();
        assert_eq!(s.pipeline.threshold, 0.65);
        assert_eq!(s.pipeline.max_hops, 3);
        assert_eq!(s.pipeline.cap, AbstractionCap::Arg1);
        assert_eq!(s.backend, Backend::Exact);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# experiment\nthreshold = 0.5\ncap = ARGM\nkg-nodes = kg/nodes.jsonl\nno_pie = true  # ablation\nbackend = hnsw").unwrap();
        let args = GlobalArgs {
            config: Some(path),
            threshold: Some(0.7),
            seed: Some(9),
            ..Default::default()
        };
        let s = Settings::resolve(&args).unwrap();
        assert_eq!(s.pipeline.threshold, 0.7);
        assert_eq!(s.pipeline.cap, AbstractionCap::Argm);
        assert!(s.pipeline.no_pie);
        assert_eq!(s.kg_nodes, Some(dir.path().join("kg/nodes.jsonl")));
        assert!(matches!(
            s.backend,
            Backend::Approximate(HnswParams { seed: 9, .. })
        ));
    }

    #[test]
    fn bad_config_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        for body in [
            "nonsense",
            "colour = red",
            "max_hops = x",
            "a = 1\na = 2",
            "max_hops = 0",
        ] {
            let path = dir.path().join("bad.conf");
            std::fs::write(&path, body).unwrap();
            let args = GlobalArgs {
                config: Some(path),
                ..Default::default()
            };
            assert!(
                matches!(Settings::resolve(&args), Err(Error::Config(_))),
                "{body}"
            );
        }
    }
}
