use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hnsir::{cmd_eval, cmd_index, cmd_repl, cmd_search, cmd_search_remote, EngineConfig};
use hnsir_core::{MaxEdit, SearchOptions, WeightingMode};
use hnsir_server::AppState;

#[derive(Parser)]
#[command(name = "hnsir", version, about = "Hypercomplex vector-space retrieval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index file from a newline-delimited JSON corpus.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "standard")]
        mode: WeightingMode,
    },
    /// Rank documents for one query.
    Search {
        #[arg(long, required_unless_present = "remote")]
        index: Option<PathBuf>,
        /// Ask a running service instead of opening the index file.
        #[arg(long)]
        remote: Option<String>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        expansion: Expansion,
        #[arg(allow_hyphen_values = true)]
        query: String,
    },
    /// Interactive search loop.
    Repl {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        expansion: Expansion,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        listen: String,
        /// Default k when a request omits it.
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        synonyms: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = parse_max_edit)]
        max_edit: u8,
    },
    /// Precision and recall at k for Sim and the cosine baseline.
    Eval {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args)]
struct Expansion {
    /// Expand `term~` clauses with near-miss vocabulary terms.
    #[arg(long)]
    fuzzy: bool,
    /// Synonym file (term<TAB>synonym<TAB>prob); enables synonym expansion.
    #[arg(long)]
    synonyms: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = parse_max_edit)]
    max_edit: u8,
}

fn parse_max_edit(s: &str) -> Result<u8, String> {
    let v: u8 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    MaxEdit::try_from(v).map(u8::from)
}

fn config(index: PathBuf, k: usize, synonyms: Option<PathBuf>, max_edit: u8) -> EngineConfig {
    EngineConfig {
        k,
        synonyms_path: synonyms,
        max_edit: MaxEdit::try_from(max_edit).expect("validated by clap"),
        ..EngineConfig::new(index)
    }
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(io::stderr)
        .init();

    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut err = io::stderr();

    match cli.command {
        Command::Index { corpus, out: path, mode } => {
            cmd_index(&corpus, &path, mode, &mut out)?;
        }
        Command::Search { index, remote, k, expansion, query } => {
            let opts = SearchOptions { k, fuzzy: expansion.fuzzy, synonyms: expansion.synonyms.is_some() };
            if let Some(url) = remote {
                let rt = tokio::runtime::Runtime::new()?;
                rt.block_on(cmd_search_remote(&url, &query, opts, &mut out, &mut err))?;
            } else {
                let index = index.expect("required unless --remote");
                let engine = config(index, k, expansion.synonyms, expansion.max_edit).open()?;
                cmd_search(&engine, &query, opts, &mut out, &mut err)?;
            }
        }
        Command::Repl { index, k, expansion } => {
            let opts = SearchOptions { k, fuzzy: expansion.fuzzy, synonyms: expansion.synonyms.is_some() };
            let engine = config(index, k, expansion.synonyms, expansion.max_edit).open()?;
            let stdin = io::stdin();
            cmd_repl(&engine, opts, stdin.lock(), &mut out, &mut err)?;
        }
        Command::Serve { index, listen, k, synonyms, max_edit } => {
            let engine = config(index, k, synonyms, max_edit).open()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(&listen)
                    .await
                    .with_context(|| format!("cannot bind {listen}"))?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                hnsir_server::serve(listener, AppState::new(engine, k), shutdown).await?;
                anyhow::Ok(())
            })?;
        }
        Command::Eval { index, queries, qrels, k } => {
            let engine = config(index, k, None, 1).open()?;
            cmd_eval(&engine, &queries, &qrels, k, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}
