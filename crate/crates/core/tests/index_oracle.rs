use std::collections::BTreeMap;

use hnsir_core::index::{build_index, score_oracle};
use hnsir_core::query::HyperQuery;
use hnsir_core::weighting::{TermWeight, Vocabulary, WeightedDoc, WeightingMode};
use proptest::prelude::*;

fn sparse_weights(n: usize, with_minus: bool) -> impl Strategy<Value = BTreeMap<u32, TermWeight>> {
    let minus = if with_minus { (0.0f64..=1.0).boxed() } else { Just(0.0).boxed() };
    prop::collection::btree_map(0..n as u32, (0.0f64..=1.0, minus).prop_map(|(p, m)| TermWeight::new(p, m)), 0..=n)
}

fn fixture(with_minus: bool) -> impl Strategy<Value = (Vocabulary, Vec<WeightedDoc>, HyperQuery)> {
    (1usize..=16).prop_flat_map(move |n| {
        let docs = prop::collection::vec(sparse_weights(n, with_minus), 1..=20);
        (Just(n), docs, sparse_weights(n, with_minus))
    })
    .prop_map(|(n, docs, q)| {
        let terms = (0..n).map(|i| format!("t{i}")).collect();
        let vocab = Vocabulary::from_parts(terms, vec![1; n]).unwrap();
        let docs = docs
            .into_iter()
            .enumerate()
            .map(|(i, weights)| WeightedDoc { doc_id: format!("doc{i:02}"), weights })
            .collect();
        (vocab, docs, HyperQuery { weights: q, unknown_terms: vec![] })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverted_index_matches_full_algebra((vocab, docs, q) in fixture(true)) {
        let index = build_index(&docs, vocab.clone(), WeightingMode::Standard).unwrap();
        let fast = index.score(&q, docs.len()).unwrap();
        let slow = score_oracle(&docs, &q, &vocab).unwrap();
        let slow_by_id: BTreeMap<_, _> = slow.iter().map(|h| (h.doc_id.clone(), h.score)).collect();
        for hit in &fast {
            prop_assert!((hit.score - slow_by_id[&hit.doc_id]).abs() <= 1e-9);
        }
        // omitted documents score zero in the oracle
        for h in &slow {
            if !fast.iter().any(|f| f.doc_id == h.doc_id) {
                prop_assert!(h.score.abs() <= 1e-12);
            }
        }
        let fast_order: Vec<_> = fast.iter().map(|h| &h.doc_id).collect();
        let slow_order: Vec<_> = slow.iter().filter(|h| fast.iter().any(|f| f.doc_id == h.doc_id)).map(|h| &h.doc_id).collect();
        prop_assert_eq!(fast_order, slow_order);
    }

    #[test]
    fn reduces_to_plus_dot_product((vocab, docs, q) in fixture(false)) {
        let index = build_index(&docs, vocab.clone(), WeightingMode::Standard).unwrap();
        for hit in index.score(&q, docs.len()).unwrap() {
            let doc = docs.iter().find(|d| d.doc_id == hit.doc_id).unwrap();
            let dot: f64 = q.weights.iter()
                .filter_map(|(t, qw)| doc.weights.get(t).map(|dw| qw.plus * dw.plus))
                .sum();
            prop_assert!((hit.score - dot).abs() <= 1e-12);
        }
    }

    #[test]
    fn uncertain_query_terms_contribute_nothing((vocab, docs, q) in fixture(true), w in 0.0f64..=1.0) {
        let index = build_index(&docs, vocab.clone(), WeightingMode::Standard).unwrap();
        let mut uncertain = q.clone();
        let term = *q.weights.keys().next().unwrap_or(&0);
        uncertain.weights.insert(term, TermWeight::new(w, w));
        let mut without = q.clone();
        without.weights.remove(&term);
        let a: BTreeMap<_, _> = index.score(&uncertain, docs.len()).unwrap().into_iter().map(|h| (h.doc_id, h.score)).collect();
        let b: BTreeMap<_, _> = index.score(&without, docs.len()).unwrap().into_iter().map(|h| (h.doc_id, h.score)).collect();
        for (id, s) in &a {
            prop_assert!((s - b.get(id).copied().unwrap_or(0.0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn negated_term_demotes_heavier_documents(
        base in 0.0f64..0.9, bump in 0.01f64..0.1, q_minus in 0.1f64..=1.0,
    ) {
        let vocab = Vocabulary::from_parts(vec!["t".into()], vec![1]).unwrap();
        let q = HyperQuery { weights: BTreeMap::from([(0, TermWeight::new(0.0, q_minus))]), unknown_terms: vec![] };
        let score_with = |plus: f64| {
            let doc = WeightedDoc { doc_id: "d".into(), weights: BTreeMap::from([(0, TermWeight::new(plus, 0.0))]) };
            build_index(&[doc], vocab.clone(), WeightingMode::Standard).unwrap().score(&q, 1).unwrap()
                .first().map(|h| h.score).unwrap_or(0.0)
        };
        prop_assert!(score_with(base + bump) < score_with(base));
    }

    #[test]
    fn ranking_is_deterministic((vocab, docs, q) in fixture(true)) {
        let index = build_index(&docs, vocab.clone(), WeightingMode::Standard).unwrap();
        let mut reversed = docs.clone();
        reversed.reverse();
        let other = build_index(&reversed, vocab, WeightingMode::Standard).unwrap();
        prop_assert_eq!(index.score(&q, 5).unwrap(), other.score(&q, 5).unwrap());
    }
}
