//! Inverted index over (w⁺, w⁻) postings and the scorers built on it.
//!
//! Ranking relies on the closed form of Sim: because cross-block products
//! vanish and Est is linear, `Sim(Q, D) = Σ_t (q⁺ − q⁻)(d⁺ − d⁻)`, so a
//! score only needs the postings of the query's terms.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{est, AlgebraError, MultiplicationTable};
use crate::query::HyperQuery;
use crate::weighting::{
    build_vocabulary, to_hypernumber, weigh_document, CorpusError, DocumentRecord, TermId,
    TermWeight, Vocabulary, WeightedDoc, WeightingMode,
};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("unknown document {0:?}")]
    UnknownDoc(String),
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("document {doc:?}: weight of term {term} outside [0, 1]")]
    InvalidWeight { doc: String, term: TermId },
    #[error("document {doc:?}: term id {term} not in the vocabulary")]
    TermOutOfRange { doc: String, term: TermId },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posting {
    /// Ordinal into the document table; ordinals follow doc_id order.
    pub doc: u32,
    pub weight: TermWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredHit {
    pub doc_id: String,
    pub score: f64,
}

/// Score descending, then doc_id ascending.
pub fn hit_order(a: &ScoredHit, b: &ScoredHit) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainRow {
    pub term: String,
    pub q_plus: f64,
    pub q_minus: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub rows: Vec<ExplainRow>,
    /// Nonzero coefficients of the blockwise product, as (basis index, value).
    pub product_coeffs: Vec<(usize, f64)>,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexStats {
    pub docs: usize,
    pub terms: usize,
    pub postings: usize,
}

#[derive(Debug, Clone)]
pub struct InvertedIndex {
    vocab: Vocabulary,
    mode: WeightingMode,
    docs: Vec<DocumentRecord>,
    postings: Vec<Vec<Posting>>,
    plus_norms: Vec<f64>,
}

/// Builds an index from pre-weighed documents. The document table keeps
/// ids only; use [`index_corpus`] to keep the text as well.
pub fn build_index(
    docs: &[WeightedDoc],
    vocab: Vocabulary,
    mode: WeightingMode,
) -> Result<InvertedIndex, IndexError> {
    let entries = docs
        .iter()
        .map(|d| (DocumentRecord::new(d.doc_id.clone(), String::new()), &d.weights))
        .collect();
    InvertedIndex::assemble(vocab, mode, entries)
}

/// Tokenizes, weighs and indexes a corpus in one pass.
pub fn index_corpus(
    records: Vec<DocumentRecord>,
    mode: WeightingMode,
) -> Result<InvertedIndex, IndexError> {
    let vocab = build_vocabulary(&records)?;
    let weighted = records
        .iter()
        .map(|r| weigh_document(r, &vocab, records.len(), mode))
        .collect::<Result<Vec<_>, _>>()?;
    let entries = records.into_iter().zip(weighted.iter().map(|w| &w.weights)).collect();
    InvertedIndex::assemble(vocab, mode, entries)
}

impl InvertedIndex {
    fn assemble(
        vocab: Vocabulary,
        mode: WeightingMode,
        mut entries: Vec<(DocumentRecord, &BTreeMap<TermId, TermWeight>)>,
    ) -> Result<Self, IndexError> {
        entries.sort_by(|a, b| a.0.id.cmp(&b.0.id));
        if let Some(pair) = entries.windows(2).find(|w| w[0].0.id == w[1].0.id) {
            return Err(IndexError::DuplicateId(pair[0].0.id.clone()));
        }
        let mut postings = vec![Vec::new(); vocab.len()];
        for (ordinal, (record, weights)) in entries.iter().enumerate() {
            for (&term, &w) in weights.iter() {
                let ok = |v: f64| (0.0..=1.0).contains(&v);
                if !ok(w.plus) || !ok(w.minus) {
                    return Err(IndexError::InvalidWeight { doc: record.id.clone(), term });
                }
                let list: &mut Vec<Posting> = postings
                    .get_mut(term as usize)
                    .ok_or_else(|| IndexError::TermOutOfRange { doc: record.id.clone(), term })?;
                if !w.is_zero() {
                    list.push(Posting { doc: ordinal as u32, weight: w });
                }
            }
        }
        let docs = entries.into_iter().map(|(r, _)| r).collect();
        Ok(Self::from_parts(vocab, mode, docs, postings))
    }

    /// Reassembles an index from stored parts. `docs` must be sorted by id
    /// and every posting list sorted by ordinal.
    pub(crate) fn from_parts(
        vocab: Vocabulary,
        mode: WeightingMode,
        docs: Vec<DocumentRecord>,
        postings: Vec<Vec<Posting>>,
    ) -> Self {
        let mut sq = vec![0.0; docs.len()];
        for p in postings.iter().flatten() {
            sq[p.doc as usize] += p.weight.plus * p.weight.plus;
        }
        let plus_norms = sq.into_iter().map(f64::sqrt).collect();
        Self { vocab, mode, docs, postings, plus_norms }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn mode(&self) -> WeightingMode {
        self.mode
    }

    /// Document table in doc_id order.
    pub fn docs(&self) -> &[DocumentRecord] {
        &self.docs
    }

    pub fn postings(&self, term: TermId) -> &[Posting] {
        self.postings.get(term as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn all_postings(&self) -> &[Vec<Posting>] {
        &self.postings
    }

    pub fn doc(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.ordinal(doc_id).map(|o| &self.docs[o])
    }

    fn ordinal(&self, doc_id: &str) -> Option<usize> {
        self.docs.binary_search_by(|d| d.id.as_str().cmp(doc_id)).ok()
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            docs: self.docs.len(),
            terms: self.vocab.len(),
            postings: self.postings.iter().map(Vec::len).sum(),
        }
    }

    /// Ranks documents by Sim through the posting lists. Documents that
    /// share no term with the query are not listed.
    pub fn score(&self, q: &HyperQuery, k: usize) -> Result<Vec<ScoredHit>, IndexError> {
        if k == 0 {
            return Err(IndexError::ZeroK);
        }
        let mut acc = Accumulator::new(self.docs.len());
        for (&term, qw) in &q.weights {
            let qs = qw.signed();
            for p in self.postings(term) {
                acc.add(p.doc, qs * p.weight.signed());
            }
        }
        Ok(self.top_k(acc, k))
    }

    /// Cosine over the w⁺ components only.
    pub fn baseline_cosine(&self, q: &HyperQuery, k: usize) -> Result<Vec<ScoredHit>, IndexError> {
        if k == 0 {
            return Err(IndexError::ZeroK);
        }
        let q_norm = q.weights.values().map(|w| w.plus * w.plus).sum::<f64>().sqrt();
        let mut acc = Accumulator::new(self.docs.len());
        for (&term, qw) in q.weights.iter().filter(|(_, w)| w.plus > 0.0) {
            for p in self.postings(term).iter().filter(|p| p.weight.plus > 0.0) {
                acc.add(p.doc, qw.plus * p.weight.plus);
            }
        }
        for &doc in &acc.touched {
            let denom = q_norm * self.plus_norms[doc as usize];
            let s = &mut acc.scores[doc as usize];
            *s = if denom > 0.0 { *s / denom } else { 0.0 };
        }
        Ok(self.top_k(acc, k))
    }

    fn top_k(&self, acc: Accumulator, k: usize) -> Vec<ScoredHit> {
        let mut ranked: Vec<(u32, f64)> =
            acc.touched.iter().map(|&d| (d, acc.scores[d as usize])).collect();
        // ordinals follow doc_id order, so comparing them breaks ties by id
        let order = |a: &(u32, f64), b: &(u32, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
        if ranked.len() > k {
            ranked.select_nth_unstable_by(k - 1, order);
            ranked.truncate(k);
        }
        ranked.sort_unstable_by(order);
        ranked
            .into_iter()
            .map(|(d, score)| ScoredHit { doc_id: self.docs[d as usize].id.clone(), score })
            .collect()
    }

    fn doc_weight(&self, term: TermId, ordinal: u32) -> Option<TermWeight> {
        let list = self.postings(term);
        list.binary_search_by_key(&ordinal, |p| p.doc).ok().map(|i| list[i].weight)
    }

    /// Per-term breakdown of the score of one document. Rows cover the
    /// terms weighted on both sides; the total is Est of their product.
    pub fn explain(&self, q: &HyperQuery, doc_id: &str) -> Result<Explanation, IndexError> {
        let ordinal =
            self.ordinal(doc_id).ok_or_else(|| IndexError::UnknownDoc(doc_id.to_string()))? as u32;

        let mut rows = Vec::new();
        let mut q_side = BTreeMap::new();
        let mut d_side = BTreeMap::new();
        for (&term, &qw) in q.weights.iter().filter(|(_, w)| !w.is_zero()) {
            let Some(dw) = self.doc_weight(term, ordinal) else { continue };
            q_side.insert(term, qw);
            d_side.insert(term, dw);
            rows.push(ExplainRow {
                term: self.vocab.term(term).unwrap_or_default().to_string(),
                q_plus: qw.plus,
                q_minus: qw.minus,
                d_plus: dw.plus,
                d_minus: dw.minus,
                contribution: qw.signed() * dw.signed(),
            });
        }
        if rows.is_empty() {
            return Ok(Explanation { rows, product_coeffs: Vec::new(), total: 0.0 });
        }

        let table = MultiplicationTable::new(self.vocab.len())?;
        let product =
            table.mul(&to_hypernumber(&q_side, &self.vocab)?, &to_hypernumber(&d_side, &self.vocab)?)?;
        Ok(Explanation {
            rows,
            product_coeffs: product.nonzeros().collect(),
            total: est(&product),
        })
    }
}

struct Accumulator {
    scores: Vec<f64>,
    seen: Vec<bool>,
    touched: Vec<u32>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self { scores: vec![0.0; n], seen: vec![false; n], touched: Vec::new() }
    }

    fn add(&mut self, doc: u32, v: f64) {
        let i = doc as usize;
        if !self.seen[i] {
            self.seen[i] = true;
            self.touched.push(doc);
        }
        self.scores[i] += v;
    }
}

/// Reference scorer: converts query and every document into the algebra,
/// multiplies with the full table and applies Est. Every document is
/// listed, including zero scores.
pub fn score_oracle(
    docs: &[WeightedDoc],
    q: &HyperQuery,
    vocab: &Vocabulary,
) -> Result<Vec<ScoredHit>, IndexError> {
    let mut hits = Vec::with_capacity(docs.len());
    if vocab.is_empty() {
        hits.extend(docs.iter().map(|d| ScoredHit { doc_id: d.doc_id.clone(), score: 0.0 }));
    } else {
        let table = MultiplicationTable::new(vocab.len())?;
        let query = to_hypernumber(&q.weights, vocab)?;
        for d in docs {
            let doc = to_hypernumber(&d.weights, vocab)?;
            hits.push(ScoredHit { doc_id: d.doc_id.clone(), score: table.sim(&query, &doc)? });
        }
    }
    hits.sort_by(hit_order);
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_term_index(plus: f64, minus: f64) -> InvertedIndex {
        let vocab = Vocabulary::from_parts(vec!["t".into()], vec![1]).unwrap();
        let doc = WeightedDoc {
            doc_id: "D".into(),
            weights: BTreeMap::from([(0, TermWeight::new(plus, minus))]),
        };
        build_index(&[doc], vocab, WeightingMode::Standard).unwrap()
    }

    fn query(plus: f64, minus: f64) -> HyperQuery {
        HyperQuery { weights: BTreeMap::from([(0, TermWeight::new(plus, minus))]), ..Default::default() }
    }

    #[test]
    fn score_unit_match() {
        let idx = single_term_index(1.0, 0.0);
        assert_eq!(idx.score(&query(1.0, 0.0), 10).unwrap(), vec![ScoredHit { doc_id: "D".into(), score: 1.0 }]);
    }

    #[test]
    fn score_worked_case() {
        let idx = single_term_index(0.8, 0.2);
        let hits = idx.score(&query(1.0, 0.0), 10).unwrap();
        assert!((hits[0].score - 0.6).abs() < 1e-12);
    }

    #[test]
    fn score_negated_term() {
        let idx = single_term_index(1.0, 0.0);
        assert_eq!(idx.score(&query(0.0, 1.0), 1).unwrap()[0].score, -1.0);
    }

    #[test]
    fn score_rejects_zero_k() {
        let idx = single_term_index(1.0, 0.0);
        assert!(matches!(idx.score(&query(1.0, 0.0), 0), Err(IndexError::ZeroK)));
        assert!(matches!(idx.baseline_cosine(&query(1.0, 0.0), 0), Err(IndexError::ZeroK)));
    }

    #[test]
    fn build_index_shapes() {
        let vocab = Vocabulary::from_parts(vec!["a".into(), "b".into(), "c".into()], vec![2, 1, 1]).unwrap();
        let docs = vec![
            WeightedDoc {
                doc_id: "z".into(),
                weights: BTreeMap::from([(0, TermWeight::new(1.0, 0.0)), (1, TermWeight::new(0.5, 0.0))]),
            },
            WeightedDoc { doc_id: "a".into(), weights: BTreeMap::from([(0, TermWeight::new(0.3, 0.0))]) },
        ];
        let idx = build_index(&docs, vocab.clone(), WeightingMode::Standard).unwrap();
        // ordinal 0 is "a"
        assert_eq!(idx.postings(0).iter().map(|p| p.doc).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(idx.postings(1).len(), 1);
        assert!(idx.postings(2).is_empty());
        assert_eq!(idx.stats(), IndexStats { docs: 2, terms: 3, postings: 3 });

        let dup = vec![docs[0].clone(), docs[0].clone()];
        assert!(matches!(
            build_index(&dup, vocab.clone(), WeightingMode::Standard),
            Err(IndexError::DuplicateId(_))
        ));
        let bad = vec![WeightedDoc { doc_id: "x".into(), weights: BTreeMap::from([(0, TermWeight::new(1.5, 0.0))]) }];
        assert!(matches!(
            build_index(&bad, vocab, WeightingMode::Standard),
            Err(IndexError::InvalidWeight { .. })
        ));
    }

    #[test]
    fn zero_weight_pairs_are_not_posted() {
        let idx = index_corpus(
            vec![DocumentRecord::new("1", "common x"), DocumentRecord::new("2", "common y")],
            WeightingMode::Standard,
        )
        .unwrap();
        let common = idx.vocab().id("common").unwrap();
        assert!(idx.postings(common).is_empty());
    }

    #[test]
    fn ties_break_by_doc_id() {
        let idx = index_corpus(
            vec![
                DocumentRecord::new("c", "t x"),
                DocumentRecord::new("a", "t y"),
                DocumentRecord::new("b", "t z"),
                DocumentRecord::new("d", "w"),
            ],
            WeightingMode::Standard,
        )
        .unwrap();
        let t = idx.vocab().id("t").unwrap();
        let q = HyperQuery { weights: BTreeMap::from([(t, TermWeight::new(1.0, 0.0))]), ..Default::default() };
        let ids: Vec<_> = idx.score(&q, 10).unwrap().into_iter().map(|h| h.doc_id).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        let ids: Vec<_> = idx.score(&q, 2).unwrap().into_iter().map(|h| h.doc_id).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn explain_worked_case() {
        let idx = single_term_index(0.8, 0.2);
        let ex = idx.explain(&query(1.0, 0.0), "D").unwrap();
        assert_eq!(ex.rows.len(), 1);
        let r = &ex.rows[0];
        assert_eq!((r.q_plus, r.q_minus, r.d_plus, r.d_minus), (1.0, 0.0, 0.8, 0.2));
        assert!((r.contribution - 0.6).abs() < 1e-12);
        assert!((ex.total - 0.6).abs() < 1e-12);
        assert_eq!(ex.product_coeffs, vec![(1, 0.8), (2, 0.2)]);
        assert!(matches!(idx.explain(&query(1.0, 0.0), "nope"), Err(IndexError::UnknownDoc(_))));
    }

    #[test]
    fn explain_without_overlap_is_empty() {
        let idx = index_corpus(
            vec![DocumentRecord::new("1", "a"), DocumentRecord::new("2", "b")],
            WeightingMode::Standard,
        )
        .unwrap();
        let a = idx.vocab().id("a").unwrap();
        let q = HyperQuery { weights: BTreeMap::from([(a, TermWeight::new(1.0, 0.0))]), ..Default::default() };
        let ex = idx.explain(&q, "2").unwrap();
        assert!(ex.rows.is_empty());
        assert_eq!(ex.total, 0.0);
    }

    #[test]
    fn explain_sums_rows() {
        let idx = index_corpus(
            vec![DocumentRecord::new("1", "a a b"), DocumentRecord::new("2", "c")],
            WeightingMode::Complement,
        )
        .unwrap();
        let (a, b) = (idx.vocab().id("a").unwrap(), idx.vocab().id("b").unwrap());
        let q = HyperQuery {
            weights: BTreeMap::from([(a, TermWeight::new(0.7, 0.1)), (b, TermWeight::new(0.0, 0.9))]),
            ..Default::default()
        };
        let ex = idx.explain(&q, "1").unwrap();
        assert_eq!(ex.rows.len(), 2);
        let sum: f64 = ex.rows.iter().map(|r| r.contribution).sum();
        assert!((ex.total - sum).abs() < 1e-12);
        let score = idx.score(&q, 5).unwrap()[0].score;
        assert!((ex.total - score).abs() < 1e-12);
    }

    #[test]
    fn cosine_examples() {
        let idx = single_term_index(0.8, 0.0);
        assert!((idx.baseline_cosine(&query(1.0, 0.0), 1).unwrap()[0].score - 1.0).abs() < 1e-15);

        let idx = index_corpus(
            vec![DocumentRecord::new("1", "a"), DocumentRecord::new("2", "b")],
            WeightingMode::Standard,
        )
        .unwrap();
        let a = idx.vocab().id("a").unwrap();
        let b = idx.vocab().id("b").unwrap();
        let q = HyperQuery {
            weights: BTreeMap::from([(a, TermWeight::new(1.0, 0.0)), (b, TermWeight::new(0.0, 1.0))]),
            ..Default::default()
        };
        // doc 2 only matches on w⁻, which cosine ignores
        let hits = idx.baseline_cosine(&q, 5).unwrap();
        assert_eq!(hits, vec![ScoredHit { doc_id: "1".into(), score: 1.0 }]);
    }

    #[test]
    fn oracle_lists_every_document() {
        let vocab = Vocabulary::from_parts(vec!["t".into()], vec![1]).unwrap();
        let docs = vec![
            WeightedDoc { doc_id: "D".into(), weights: BTreeMap::from([(0, TermWeight::new(1.0, 0.0))]) },
            WeightedDoc { doc_id: "E".into(), weights: BTreeMap::new() },
        ];
        let zero = HyperQuery::default();
        let hits = score_oracle(&docs, &zero, &vocab).unwrap();
        assert_eq!(hits.len(), 2);
        assert!(hits.iter().all(|h| h.score == 0.0));

        let half = query(0.5, 0.5);
        assert_eq!(score_oracle(&docs[..1], &half, &vocab).unwrap()[0].score, 0.0);
    }
}
