//! Retrieval over a hypercomplex extension of the vector-space model.
//!
//! Each term carries a positive weight (asserted present) and a negative
//! weight (asserted absent). Documents and queries live in a 2N-dimensional
//! commutative algebra made of N split-complex blocks, and are ranked by
//! `Sim(Q, D) = Est(Q · D)`, which can be negative.

pub mod algebra;
pub mod api;
pub mod engine;
pub mod eval;
pub mod index;
pub mod persist;
pub mod query;
pub mod weighting;

pub use algebra::{est, signed_projection, HyperNumber, MultiplicationTable};
pub use engine::{Engine, EngineError, SearchOptions, SearchOutcome};
pub use index::{build_index, index_corpus, score_oracle, InvertedIndex, ScoredHit};
pub use query::{compile_query, parse_query, HyperQuery, MaxEdit, SynonymTable};
pub use weighting::{DocumentRecord, TermWeight, Vocabulary, WeightedDoc, WeightingMode};
