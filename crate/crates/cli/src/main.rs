use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evkg_core::kg::snapshot;
use evkg_core::matcher::EmbeddingMatrix;
use evkg_core::retriever::{CONTEXT_RELATION, GROUNDING_RELATION};
use evkg_core::rgcn::{RgcnConfig, RgcnParams};
use evkg_core::Error;
use serde::Serialize;

mod commands;
mod io;
mod records;
mod settings;

use commands::*;
use io::{read_jsonl, to_jsonl, Outputs};
use settings::{GlobalArgs, Settings};

/// Ground narratives to an eventuality knowledge graph and retrieve
/// supporting subgraphs.
#[derive(Parser)]
#[command(name = "evkg", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load nodes + edges and write a binary snapshot
    IngestKg {
        /// Output file
        #[arg(long)]
        out: PathBuf,
    },
    /// Frames -> person-normalized events
    Normalize {
        /// Semantic-role frames, JSON lines
        #[arg(long)]
        events: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalized events -> abstraction ladders
    Pie {
        /// Normalized events, JSON lines
        #[arg(long)]
        input: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partial events -> accepted anchors
    Ground {
        /// Abstraction ladders, JSON lines
        #[arg(long)]
        input: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Anchors + normalized events -> joint subgraphs
    Retrieve {
        /// Anchors, JSON lines
        #[arg(long)]
        anchors: PathBuf,
        /// Normalized events, JSON lines
        #[arg(long)]
        events: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint subgraphs -> text; with --choices, one prompt per instance
    Serialize {
        /// Joint subgraphs, JSON lines
        #[arg(long)]
        graphs: PathBuf,
        /// Choice sets, JSON lines {instance_id, question, choices}
        #[arg(long)]
        choices: Option<PathBuf>,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score the choices of each instance with the graph scorer
    Score {
        /// Joint subgraphs, JSON lines
        #[arg(long)]
        graphs: PathBuf,
        /// Choice sets, JSON lines {instance_id, question, choices}
        #[arg(long)]
        choices: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grounding and subgraph size statistics
    Stats {
        /// Abstraction ladders, JSON lines
        #[arg(long)]
        partial: PathBuf,
        /// Anchors, JSON lines
        #[arg(long)]
        anchors: PathBuf,
        /// Joint subgraphs, JSON lines
        #[arg(long)]
        graphs: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// normalize -> pie -> ground -> retrieve -> serialize [-> score], all
    /// outputs written to one directory
    Pipeline {
        /// Semantic-role frames, JSON lines
        #[arg(long)]
        events: PathBuf,
        /// Directory for all outputs
        #[arg(long)]
        out_dir: PathBuf,
        /// Choice sets, JSON lines {instance_id, question, choices}
        #[arg(long)]
        choices: Option<PathBuf>,
    },
    /// Write randomly initialised scorer parameters
    InitParams {
        /// Output file
        #[arg(long)]
        out: PathBuf,
        /// Hidden layer widths
        #[arg(long, value_delimiter = ',', default_value = "32")]
        hidden: Vec<usize>,
        /// Score head hidden widths
        #[arg(long, value_delimiter = ',', default_value = "16")]
        mlp: Vec<usize>,
        /// Basis count, or -1 for one matrix per relation
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        num_bases: i32,
        #[arg(long)]
        attention: bool,
        /// Drop the self-loop term
        #[arg(long)]
        no_self_loop: bool,
        /// Do not add inverse relations
        #[arg(long)]
        no_inverse: bool,
    },
}

fn write<T: Serialize>(
    outputs: &mut Outputs,
    path: Option<&Path>,
    records: impl IntoIterator<Item = T>,
) -> Result<(), Error> {
    outputs.put(path, &to_jsonl(records)?)
}

fn run(cli: Cli) -> Result<(), Error> {
    let s = Settings::resolve(&cli.global)?;
    if let Some(n) = s.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let mut out = Outputs::new();
    match cli.command {
        Command::IngestKg { out: path } => {
            let store = load_store(&s)?;
            out.put(Some(&path), &snapshot(&store))?;
        }
        Command::Normalize { events, out: path } => {
            let records = normalize_records(&s, read_events(&events)?)?;
            write(&mut out, path.as_deref(), records)?;
        }
        Command::Pie { input, out: path } => {
            let records = pie_records(&s, &read_jsonl(&input)?);
            write(&mut out, path.as_deref(), records)?;
        }
        Command::Ground { input, out: path } => {
            let store = load_store(&s)?;
            let emb = load_embedding(&s)?;
            let index = build_index(&s, &store, &emb)?;
            let records = ground_records(&s, &index, &emb, &read_jsonl(&input)?)?;
            write(&mut out, path.as_deref(), records)?;
        }
        Command::Retrieve {
            anchors,
            events,
            out: path,
        } => {
            let store = load_store(&s)?;
            let records =
                retrieve_records(&s, &store, &read_jsonl(&events)?, &read_jsonl(&anchors)?)?;
            write(&mut out, path.as_deref(), records)?;
        }
        Command::Serialize {
            graphs,
            choices,
            out: path,
        } => {
            let graphs = read_jsonl(&graphs)?;
            let records = match choices {
                Some(c) => prompt_records(&s, &graphs, &read_jsonl(&c)?)?,
                None => serialize_records(&s, &graphs),
            };
            write(&mut out, path.as_deref(), records)?;
        }
        Command::Score {
            graphs,
            choices,
            out: path,
        } => {
            let params = load_params(&s)?;
            let emb = load_embedding(&s)?;
            let records = score_records(
                &s,
                &params,
                &emb,
                &read_jsonl(&graphs)?,
                &read_jsonl(&choices)?,
            )?;
            write(&mut out, path.as_deref(), records)?;
        }
        Command::Stats {
            partial,
            anchors,
            graphs,
            out: path,
        } => {
            let record = stats_record(
                &s,
                &read_jsonl(&partial)?,
                &read_jsonl(&anchors)?,
                &read_jsonl(&graphs)?,
            )?;
            write(&mut out, path.as_deref(), [record])?;
        }
        Command::Pipeline {
            events,
            out_dir,
            choices,
        } => {
            std::fs::create_dir_all(&out_dir)?;
            let store = load_store(&s)?;
            let emb = load_embedding(&s)?;
            let index = build_index(&s, &store, &emb)?;
            let normalized = normalize_records(&s, read_events(&events)?)?;
            let partials = pie_records(&s, &normalized);
            let anchors = ground_records(&s, &index, &emb, &partials)?;
            let graphs = retrieve_records(&s, &store, &normalized, &anchors)?;
            let stats = stats_record(&s, &partials, &anchors, &graphs)?;
            let file = |name: &str| out_dir.join(name);
            write(&mut out, Some(&file("normalized.jsonl")), &normalized)?;
            write(&mut out, Some(&file("partial.jsonl")), &partials)?;
            write(&mut out, Some(&file("anchors.jsonl")), &anchors)?;
            write(&mut out, Some(&file("graphs.jsonl")), &graphs)?;
            write(
                &mut out,
                Some(&file("serialized.jsonl")),
                serialize_records(&s, &graphs),
            )?;
            write(&mut out, Some(&file("stats.jsonl")), [stats])?;
            if let Some(c) = choices {
                let choices = read_jsonl(&c)?;
                write(
                    &mut out,
                    Some(&file("prompts.jsonl")),
                    prompt_records(&s, &graphs, &choices)?,
                )?;
                if s.params.is_some() {
                    let params = load_params(&s)?;
                    let scores = score_records(&s, &params, &emb, &graphs, &choices)?;
                    write(&mut out, Some(&file("scores.jsonl")), scores)?;
                }
            }
        }
        Command::InitParams {
            out: path,
            hidden,
            mlp,
            num_bases,
            attention,
            no_self_loop,
            no_inverse,
        } => {
            let store = load_store(&s)?;
            let dim = match &s.kg_embeddings {
                Some(p) => EmbeddingMatrix::read_from(io::open(p)?)?.dim(),
                None => s.hash_dim,
            };
            let mut relations: Vec<String> =
                store.relations().names().map(str::to_string).collect();
            relations.extend([GROUNDING_RELATION.to_string(), CONTEXT_RELATION.to_string()]);
            let config = RgcnConfig {
                relations,
                inverse_relations: !no_inverse,
                dims: std::iter::once(dim).chain(hidden).collect(),
                num_bases,
                self_loop: !no_self_loop,
                attention,
                text_dim: dim,
                mlp_hidden: mlp,
            };
            out.put(
                Some(&path),
                &RgcnParams::random(&config, s.seed)?.to_bytes(),
            )?;
        }
    }
    out.commit()
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    code: u8,
    message: String,
}

fn report(kind: &str, code: u8, message: String) -> ExitCode {
    let record = ErrorRecord {
        error: kind,
        code,
        message,
    };
    eprintln!(
        "{}",
        serde_json::to_string(&record).expect("error record serializes")
    );
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("");
            return report("config", 3, first.trim_start_matches("error: ").to_string());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => report("config", 3, e.to_string()),
        Err(e @ Error::Invariant(_)) => report("invariant", 4, e.to_string()),
        Err(e) => report("input", 2, e.to_string()),
    }
}
