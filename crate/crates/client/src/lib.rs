//! Async client for the search service API.

use hnsir_core::api::{
    ErrorBody, ExplainResponse, IndexRequest, IndexSummary, SearchResponse, StatsResponse,
};
use hnsir_core::{DocumentRecord, SearchOptions};
use reqwest::{RequestBuilder, StatusCode};
use serde::de::DeserializeOwned;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("{status}: {message}")]
    Api { status: StatusCode, code: String, message: String },
    #[error(transparent)]
    Http(#[from] reqwest::Error),
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            ClientError::Http(e) => e.status(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

fn flag(on: bool) -> &'static str {
    if on {
        "1"
    } else {
        "0"
    }
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self { base: base.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn send<T: DeserializeOwned>(req: RequestBuilder) -> Result<T, ClientError> {
        let resp = req.send().await?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        Err(match serde_json::from_str::<ErrorBody>(&text) {
            Ok(body) => ClientError::Api { status, code: body.error.code, message: body.error.message },
            Err(_) => ClientError::Api { status, code: String::new(), message: text },
        })
    }

    pub async fn search(&self, query: &str, opts: SearchOptions) -> Result<SearchResponse, ClientError> {
        let k = opts.k.to_string();
        let params = [
            ("q", query),
            ("k", &k),
            ("fuzzy", flag(opts.fuzzy)),
            ("synonyms", flag(opts.synonyms)),
        ];
        Self::send(self.http.get(self.url("/api/search")).query(&params)).await
    }

    pub async fn explain(
        &self,
        query: &str,
        doc_id: &str,
        fuzzy: bool,
        synonyms: bool,
    ) -> Result<ExplainResponse, ClientError> {
        let params = [("q", query), ("doc", doc_id), ("fuzzy", flag(fuzzy)), ("synonyms", flag(synonyms))];
        Self::send(self.http.get(self.url("/api/explain")).query(&params)).await
    }

    pub async fn doc(&self, id: &str) -> Result<DocumentRecord, ClientError> {
        let mut url = reqwest::Url::parse(&self.url("/api/doc/")).expect("valid base url");
        url.path_segments_mut().expect("http url").pop_if_empty().push(id);
        Self::send(self.http.get(url)).await
    }

    pub async fn stats(&self) -> Result<StatsResponse, ClientError> {
        Self::send(self.http.get(self.url("/api/stats"))).await
    }

    pub async fn reindex(&self, documents: Vec<DocumentRecord>) -> Result<IndexSummary, ClientError> {
        Self::send(self.http.post(self.url("/api/index")).json(&IndexRequest { documents })).await
    }
}
