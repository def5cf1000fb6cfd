//! JSON bodies exchanged between the search service and its clients.

use serde::{Deserialize, Serialize};

use crate::index::{ExplainRow, IndexStats, ScoredHit};
use crate::weighting::{DocumentRecord, WeightingMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub hits: Vec<ScoredHit>,
    pub unknown_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainResponse {
    pub rows: Vec<ExplainRow>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsResponse {
    pub docs: usize,
    pub terms: usize,
    pub postings: usize,
    pub mode: WeightingMode,
}

impl StatsResponse {
    pub fn new(stats: IndexStats, mode: WeightingMode) -> Self {
        Self { docs: stats.docs, terms: stats.terms, postings: stats.postings, mode }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRequest {
    pub documents: Vec<DocumentRecord>,
}

pub type IndexSummary = IndexStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    /// Stable machine-readable code, e.g. `parse_error`.
    pub code: String,
    pub message: String,
    /// Character offset for query parse errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}
