//! Command implementations behind the `hnsir` binary. Each command writes
//! to caller-supplied streams so it can be driven from tests.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hnsir_core::engine::EngineError;
use hnsir_core::eval::{evaluate, read_queries, EvalReport, Qrels};
use hnsir_core::index::{index_corpus, Explanation, IndexStats};
use hnsir_core::persist::{load_index, save_index};
use hnsir_core::query::ParseError;
use hnsir_core::weighting::read_corpus;
use hnsir_core::{Engine, MaxEdit, ScoredHit, SearchOptions, SynonymTable, WeightingMode};

/// Settings shared by the commands that open an index.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub index_path: PathBuf,
    pub mode: WeightingMode,
    pub max_edit: MaxEdit,
    pub synonyms_path: Option<PathBuf>,
    pub k: usize,
}

impl EngineConfig {
    pub fn new(index_path: impl Into<PathBuf>) -> Self {
        Self {
            index_path: index_path.into(),
            mode: WeightingMode::Standard,
            max_edit: MaxEdit::One,
            synonyms_path: None,
            k: 10,
        }
    }

    pub fn open(&self) -> Result<Engine> {
        if self.k == 0 {
            bail!("k must be at least 1");
        }
        let index = load_index(&self.index_path)
            .with_context(|| format!("cannot load index {}", self.index_path.display()))?;
        let synonyms = match &self.synonyms_path {
            Some(p) => load_synonyms(p)?,
            None => SynonymTable::new(),
        };
        Ok(Engine::new(index, synonyms, self.max_edit))
    }
}

pub fn load_synonyms(path: &Path) -> Result<SynonymTable> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    SynonymTable::read(BufReader::new(file)).with_context(|| format!("in {}", path.display()))
}

fn open_reader(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

/// Builds and saves an index. Nothing is written if the corpus is rejected.
pub fn cmd_index(corpus: &Path, out_path: &Path, mode: WeightingMode, out: &mut impl Write) -> Result<IndexStats> {
    let records = read_corpus(open_reader(corpus)?).with_context(|| format!("in {}", corpus.display()))?;
    let index = index_corpus(records, mode).with_context(|| format!("cannot index {}", corpus.display()))?;
    save_index(&index, out_path).with_context(|| format!("cannot write {}", out_path.display()))?;
    let stats = index.stats();
    writeln!(out, "indexed {} docs, {} terms, {} postings ({mode})", stats.docs, stats.terms, stats.postings)?;
    Ok(stats)
}

/// `rank doc_id score`, score to 6 decimal places.
pub fn write_hits(hits: &[ScoredHit], out: &mut impl Write) -> std::io::Result<()> {
    for (rank, hit) in hits.iter().enumerate() {
        writeln!(out, "{} {} {:.6}", rank + 1, hit.doc_id, hit.score)?;
    }
    Ok(())
}

pub fn write_unknown(unknown: &[String], err: &mut impl Write) -> std::io::Result<()> {
    if !unknown.is_empty() {
        writeln!(err, "unknown terms: {}", unknown.join(", "))?;
    }
    Ok(())
}

fn describe_parse_error(query: &str, e: &ParseError) -> String {
    format!("{e}\n  {query}\n  {}^", " ".repeat(e.position))
}

fn engine_error(query: &str, e: EngineError) -> anyhow::Error {
    match e {
        EngineError::Parse(p) => anyhow::anyhow!(describe_parse_error(query, &p)),
        other => other.into(),
    }
}

pub fn cmd_search(
    engine: &Engine,
    query: &str,
    opts: SearchOptions,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<()> {
    let outcome = engine.search(query, opts).map_err(|e| engine_error(query, e))?;
    write_hits(&outcome.hits, out)?;
    write_unknown(&outcome.unknown_terms, err)?;
    Ok(())
}

/// Same output as [`cmd_search`], answered by a running service.
pub async fn cmd_search_remote(
    base_url: &str,
    query: &str,
    opts: SearchOptions,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<()> {
    let resp = hnsir_client::Client::new(base_url).search(query, opts).await?;
    write_hits(&resp.hits, out)?;
    write_unknown(&resp.unknown_terms, err)?;
    Ok(())
}

pub fn write_explanation(ex: &Explanation, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{:<16} {:>9} {:>9} {:>9} {:>9} {:>12}", "term", "q+", "q-", "d+", "d-", "contribution")?;
    for r in &ex.rows {
        writeln!(
            out,
            "{:<16} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>12.6}",
            r.term, r.q_plus, r.q_minus, r.d_plus, r.d_minus, r.contribution
        )?;
    }
    writeln!(out, "total {:.6}", ex.total)
}

/// Line-oriented loop: a query prints hits, `:explain DOC` breaks down the
/// last query's score for DOC, `:quit` ends the session.
pub fn cmd_repl(
    engine: &Engine,
    opts: SearchOptions,
    input: impl BufRead,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<()> {
    let mut last_query: Option<String> = None;
    write!(out, "> ")?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line == ":quit" {
            break;
        }
        if let Some(doc) = line.strip_prefix(":explain") {
            let doc = doc.trim();
            match (&last_query, doc.is_empty()) {
                (_, true) => writeln!(err, "usage: :explain <doc_id>")?,
                (None, _) => writeln!(err, "no query yet")?,
                (Some(q), _) => match engine.explain(q, doc, opts.fuzzy, opts.synonyms) {
                    Ok(ex) => write_explanation(&ex, out)?,
                    Err(e) => writeln!(err, "error: {}", engine_error(q, e))?,
                },
            }
        } else if !line.is_empty() {
            match cmd_search(engine, line, opts, out, err) {
                Ok(()) => last_query = Some(line.to_string()),
                Err(e) => writeln!(err, "error: {e}")?,
            }
        }
        write!(out, "> ")?;
        out.flush()?;
    }
    writeln!(out)?;
    Ok(())
}

/// Runs every query through Sim and the cosine baseline and scores both.
pub fn run_eval(engine: &Engine, queries: &[(String, String)], qrels: &Qrels, k: usize) -> Result<(EvalReport, EvalReport)> {
    if qrels.is_empty() {
        bail!("no relevance judgments");
    }
    let opts = SearchOptions { k, ..Default::default() };
    let mut hns = Vec::with_capacity(queries.len());
    let mut cosine = Vec::with_capacity(queries.len());
    for (id, q) in queries {
        if !qrels.contains_query(id) {
            bail!("query {id:?} has no relevance judgments");
        }
        let ids = |hits: Vec<ScoredHit>| hits.into_iter().map(|h| h.doc_id).collect::<Vec<_>>();
        let ctx = || format!("query {id:?}");
        hns.push((id.clone(), ids(engine.search(q, opts).map_err(|e| engine_error(q, e)).with_context(ctx)?.hits)));
        cosine.push((id.clone(), ids(engine.search_cosine(q, opts).map_err(|e| engine_error(q, e)).with_context(ctx)?.hits)));
    }
    Ok((evaluate(&hns, qrels, k)?, evaluate(&cosine, qrels, k)?))
}

pub fn write_eval(hns: &EvalReport, cosine: &EvalReport, out: &mut impl Write) -> std::io::Result<()> {
    let k = hns.k;
    writeln!(out, "query\thns_p@{k}\thns_r@{k}\tcos_p@{k}\tcos_r@{k}")?;
    for (h, c) in hns.per_query.iter().zip(&cosine.per_query) {
        writeln!(out, "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}", h.query_id, h.precision, h.recall, c.precision, c.recall)?;
    }
    writeln!(
        out,
        "macro\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
        hns.macro_precision, hns.macro_recall, cosine.macro_precision, cosine.macro_recall
    )
}

pub fn cmd_eval(
    engine: &Engine,
    queries_path: &Path,
    qrels_path: &Path,
    k: usize,
    out: &mut impl Write,
) -> Result<(EvalReport, EvalReport)> {
    let queries = read_queries(open_reader(queries_path)?).with_context(|| format!("in {}", queries_path.display()))?;
    let qrels = Qrels::read(open_reader(qrels_path)?).with_context(|| format!("in {}", qrels_path.display()))?;
    let (hns, cosine) = run_eval(engine, &queries, &qrels, k)?;
    write_eval(&hns, &cosine, out)?;
    Ok((hns, cosine))
}
