//! On-disk index format.
//!
//! Layout: 8-byte magic, format version (u32 LE), payload length (u64 LE),
//! SHA-256 of the payload, then the JSON payload. The vocabulary is stored
//! in id order so term ids survive a round trip.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::index::{InvertedIndex, Posting};
use crate::weighting::{DocumentRecord, TermWeight, Vocabulary, WeightingMode};

pub const MAGIC: &[u8; 8] = b"HNSIDX\0\0";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 32;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("unsupported index format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("corrupt index file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct Payload {
    mode: WeightingMode,
    terms: Vec<String>,
    df: Vec<u32>,
    docs: Vec<DocumentRecord>,
    /// Per term: (doc ordinal, w⁺, w⁻).
    postings: Vec<Vec<(u32, f64, f64)>>,
}

pub fn encode(index: &InvertedIndex) -> Vec<u8> {
    let payload = Payload {
        mode: index.mode(),
        terms: index.vocab().terms().to_vec(),
        df: index.vocab().dfs().to_vec(),
        docs: index.docs().to_vec(),
        postings: index
            .all_postings()
            .iter()
            .map(|list| list.iter().map(|p| (p.doc, p.weight.plus, p.weight.minus)).collect())
            .collect(),
    };
    let body = serde_json::to_vec(&payload).expect("index payload serializes");
    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&body));
    out.extend_from_slice(&body);
    out
}

pub fn decode(bytes: &[u8]) -> Result<InvertedIndex, PersistError> {
    let corrupt = |m: &str| PersistError::Corrupt(m.to_string());
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(corrupt("missing header"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(PersistError::Version { found: version });
    }
    if bytes.len() < HEADER_LEN {
        return Err(corrupt("truncated header"));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let body = &bytes[HEADER_LEN..];
    if body.len() as u64 != len {
        return Err(corrupt("payload length mismatch"));
    }
    if Sha256::digest(body).as_slice() != &bytes[20..52] {
        return Err(corrupt("checksum mismatch"));
    }
    let payload: Payload =
        serde_json::from_slice(body).map_err(|e| PersistError::Corrupt(e.to_string()))?;

    let vocab = Vocabulary::from_parts(payload.terms, payload.df)
        .map_err(|e| PersistError::Corrupt(e.to_string()))?;
    if payload.postings.len() != vocab.len() {
        return Err(corrupt("posting table does not match vocabulary"));
    }
    if payload.docs.windows(2).any(|w| w[0].id >= w[1].id) {
        return Err(corrupt("document table not sorted"));
    }
    let n_docs = payload.docs.len() as u32;
    let mut postings = Vec::with_capacity(payload.postings.len());
    for list in payload.postings {
        if list.windows(2).any(|w| w[0].0 >= w[1].0) || list.iter().any(|p| p.0 >= n_docs) {
            return Err(corrupt("posting list out of order"));
        }
        postings.push(
            list.into_iter()
                .map(|(doc, plus, minus)| Posting { doc, weight: TermWeight::new(plus, minus) })
                .collect(),
        );
    }
    Ok(InvertedIndex::from_parts(vocab, payload.mode, payload.docs, postings))
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn save_index(index: &InvertedIndex, path: &Path) -> Result<(), PersistError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&encode(index))?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn load_index(path: &Path) -> Result<InvertedIndex, PersistError> {
    decode(&fs::read(path)?)
}
