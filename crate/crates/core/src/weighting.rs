//! Text to term weights: tokenizer, vocabulary and tf·idf weighting.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, HyperNumber};

pub type TermId = u32;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("document id must not be empty")]
    EmptyId,
    #[error("term {0:?} is not in the vocabulary")]
    UnknownTerm(String),
    #[error("term id {id} out of range for a vocabulary of {len} terms")]
    TermIdOutOfRange { id: TermId, len: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub text: String,
}

impl DocumentRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { id: id.into(), text: text.into() }
    }
}

/// Reads newline-delimited JSON records (`{"id": ..., "text": ...}`).
/// Blank lines are skipped; line numbers in errors are 1-based.
pub fn read_corpus(reader: impl BufRead) -> Result<Vec<DocumentRecord>, CorpusError> {
    let mut records = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(&line)
            .map_err(|e| CorpusError::Malformed { line: n + 1, message: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Frozen term ↔ id mapping with document frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<u32>,
    ids: HashMap<String, TermId>,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from terms listed in id order.
    pub fn from_parts(terms: Vec<String>, df: Vec<u32>) -> Result<Self, CorpusError> {
        if terms.len() != df.len() {
            return Err(CorpusError::Malformed {
                line: 0,
                message: format!("{} terms but {} document frequencies", terms.len(), df.len()),
            });
        }
        let mut ids = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if ids.insert(t.clone(), i as TermId).is_some() {
                return Err(CorpusError::Malformed {
                    line: 0,
                    message: format!("term {t:?} listed twice"),
                });
            }
        }
        Ok(Self { terms, df, ids })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn df(&self, id: TermId) -> Option<u32> {
        self.df.get(id as usize).copied()
    }

    /// Terms in id order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn dfs(&self) -> &[u32] {
        &self.df
    }
}

pub fn build_vocabulary(corpus: &[DocumentRecord]) -> Result<Vocabulary, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut seen_ids = HashSet::new();
    let mut vocab = Vocabulary::default();
    for doc in corpus {
        if doc.id.is_empty() {
            return Err(CorpusError::EmptyId);
        }
        if !seen_ids.insert(doc.id.as_str()) {
            return Err(CorpusError::DuplicateId(doc.id.clone()));
        }
        let mut in_doc = HashSet::new();
        for token in tokenize(&doc.text) {
            let next = vocab.terms.len() as TermId;
            let id = *vocab.ids.entry(token.clone()).or_insert_with(|| {
                vocab.terms.push(token);
                vocab.df.push(0);
                next
            });
            if in_doc.insert(id) {
                vocab.df[id as usize] += 1;
            }
        }
    }
    Ok(vocab)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingMode {
    /// `w⁻ = 0` for every document term.
    #[default]
    Standard,
    /// `w⁻ = 1 - w⁺` for every document term.
    Complement,
}

impl fmt::Display for WeightingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightingMode::Standard => "standard",
            WeightingMode::Complement => "complement",
        })
    }
}

impl FromStr for WeightingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Self::Standard),
            "complement" => Ok(Self::Complement),
            other => Err(format!("unknown weighting mode {other:?}")),
        }
    }
}

/// Positive and negative weight of one term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TermWeight {
    pub plus: f64,
    pub minus: f64,
}

impl TermWeight {
    pub fn new(plus: f64, minus: f64) -> Self {
        Self { plus, minus }
    }

    /// `w⁺ - w⁻`.
    pub fn signed(&self) -> f64 {
        self.plus - self.minus
    }

    pub fn is_zero(&self) -> bool {
        self.plus == 0.0 && self.minus == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDoc {
    pub doc_id: String,
    pub weights: BTreeMap<TermId, TermWeight>,
}

/// Log-tf times smoothed idf, max-normalized per document:
/// `raw = (1 + ln tf) · ln((1 + |D|) / (1 + df))`, `w⁺ = raw / max raw`.
pub fn weigh_document(
    doc: &DocumentRecord,
    vocab: &Vocabulary,
    corpus_size: usize,
    mode: WeightingMode,
) -> Result<WeightedDoc, CorpusError> {
    let mut tf: BTreeMap<TermId, u32> = BTreeMap::new();
    for token in tokenize(&doc.text) {
        let id = vocab.id(&token).ok_or(CorpusError::UnknownTerm(token))?;
        *tf.entry(id).or_insert(0) += 1;
    }

    let n = corpus_size as f64;
    let raw: Vec<(TermId, f64)> = tf
        .into_iter()
        .map(|(id, count)| {
            let df = f64::from(vocab.df[id as usize]);
            let idf = ((1.0 + n) / (1.0 + df)).ln();
            (id, (1.0 + f64::from(count).ln()) * idf)
        })
        .collect();
    let max = raw.iter().map(|&(_, r)| r).fold(0.0, f64::max);

    let weights = raw
        .into_iter()
        .map(|(id, r)| {
            // df > corpus_size would make idf negative
            let plus = if max > 0.0 { (r / max).clamp(0.0, 1.0) } else { 0.0 };
            let minus = match mode {
                WeightingMode::Standard => 0.0,
                WeightingMode::Complement => 1.0 - plus,
            };
            (id, TermWeight::new(plus, minus))
        })
        .collect();
    Ok(WeightedDoc { doc_id: doc.id.clone(), weights })
}

/// Places term `i` at `e_{2i+1}` (w⁺) and `e_{2i+2}` (w⁻), 1-based.
pub fn to_hypernumber(
    weights: &BTreeMap<TermId, TermWeight>,
    vocab: &Vocabulary,
) -> Result<HyperNumber, CorpusError> {
    let len = vocab.len();
    let mut coeffs = Vec::with_capacity(2 * weights.len());
    for (&id, w) in weights {
        if id as usize >= len {
            return Err(CorpusError::TermIdOutOfRange { id, len });
        }
        let p = 2 * id as usize + 1;
        coeffs.push((p, w.plus));
        coeffs.push((p + 1, w.minus));
    }
    Ok(HyperNumber::from_coeffs(2 * len, coeffs)?)
}

/// Reads odd/even coefficient pairs back into term weights.
pub fn from_hypernumber(x: &HyperNumber) -> BTreeMap<TermId, TermWeight> {
    let mut out: BTreeMap<TermId, TermWeight> = BTreeMap::new();
    for (i, c) in x.nonzeros() {
        let w = out.entry(((i - 1) / 2) as TermId).or_default();
        if i % 2 == 1 {
            w.plus = c;
        } else {
            w.minus = c;
        }
    }
    out
}
