//! Precision/recall at k against binary relevance judgments.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("no relevance judgments")]
    EmptyQrels,
    #[error("query {0:?} has no relevance judgments")]
    UnknownQuery(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Judgments per query: doc_id → relevance (0 or 1).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u8>>,
}

impl Qrels {
    pub fn insert(&mut self, query_id: &str, doc_id: &str, relevance: u8) {
        self.judgments
            .entry(query_id.to_string())
            .or_default()
            .insert(doc_id.to_string(), relevance);
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    pub fn contains_query(&self, query_id: &str) -> bool {
        self.judgments.contains_key(query_id)
    }

    fn relevant(&self, query_id: &str) -> Option<BTreeSet<&str>> {
        self.judgments.get(query_id).map(|docs| {
            docs.iter().filter(|(_, &r)| r > 0).map(|(d, _)| d.as_str()).collect()
        })
    }

    /// Reads `query_id<TAB>doc_id<TAB>relevance` lines, relevance 0 or 1.
    pub fn read(reader: impl BufRead) -> Result<Self, EvalError> {
        let mut qrels = Self::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| EvalError::Malformed { line: n + 1, message };
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [query, doc, rel] = fields[..] else {
                return Err(malformed("expected query_id<TAB>doc_id<TAB>relevance".into()));
            };
            let relevance = match rel {
                "0" => 0,
                "1" => 1,
                other => return Err(malformed(format!("relevance must be 0 or 1, got {other:?}"))),
            };
            qrels.insert(query, doc, relevance);
        }
        Ok(qrels)
    }
}

/// Reads `query_id<TAB>query_string` lines in file order.
pub fn read_queries(reader: impl BufRead) -> Result<Vec<(String, String)>, EvalError> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, query)) = line.split_once('\t') else {
            return Err(EvalError::Malformed {
                line: n + 1,
                message: "expected query_id<TAB>query_string".into(),
            });
        };
        out.push((id.trim().to_string(), query.to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryMetrics {
    pub query_id: String,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub k: usize,
    pub per_query: Vec<QueryMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
}

/// `runs` pairs each query id with its ranked doc ids. Unjudged documents
/// count as non-relevant; recall is 0 for queries with no relevant docs.
pub fn evaluate(
    runs: &[(String, Vec<String>)],
    qrels: &Qrels,
    k: usize,
) -> Result<EvalReport, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let mut per_query = Vec::with_capacity(runs.len());
    for (query_id, ranked) in runs {
        let relevant =
            qrels.relevant(query_id).ok_or_else(|| EvalError::UnknownQuery(query_id.clone()))?;
        let hits = ranked.iter().take(k).filter(|d| relevant.contains(d.as_str())).count() as f64;
        per_query.push(QueryMetrics {
            query_id: query_id.clone(),
            precision: hits / k as f64,
            recall: if relevant.is_empty() { 0.0 } else { hits / relevant.len() as f64 },
        });
    }
    let n = per_query.len().max(1) as f64;
    let macro_precision = per_query.iter().map(|m| m.precision).sum::<f64>() / n;
    let macro_recall = per_query.iter().map(|m| m.recall).sum::<f64>() / n;
    Ok(EvalReport { k, per_query, macro_precision, macro_recall })
}
