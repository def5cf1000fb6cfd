//! Query-string front end shared by the CLI and the HTTP service.

use thiserror::Error;

use crate::index::{Explanation, IndexError, InvertedIndex, ScoredHit};
use crate::query::{
    compile_query, expand_fuzzy, expand_synonyms, parse_query, HyperQuery, MaxEdit, ParseError,
    SynonymTable,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub k: usize,
    pub fuzzy: bool,
    pub synonyms: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { k: 10, fuzzy: false, synonyms: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub hits: Vec<ScoredHit>,
    pub unknown_terms: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Engine {
    index: InvertedIndex,
    synonyms: SynonymTable,
    max_edit: MaxEdit,
}

impl Engine {
    pub fn new(index: InvertedIndex, synonyms: SynonymTable, max_edit: MaxEdit) -> Self {
        Self { index, synonyms, max_edit }
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    pub fn synonyms(&self) -> &SynonymTable {
        &self.synonyms
    }

    pub fn max_edit(&self) -> MaxEdit {
        self.max_edit
    }

    /// Same expansion settings over a different index.
    pub fn with_index(&self, index: InvertedIndex) -> Self {
        Self { index, synonyms: self.synonyms.clone(), max_edit: self.max_edit }
    }

    pub fn compile(&self, query: &str, fuzzy: bool, synonyms: bool) -> Result<HyperQuery, ParseError> {
        let mut ast = parse_query(query)?;
        if fuzzy {
            ast = expand_fuzzy(&ast, self.index.vocab(), self.max_edit);
        }
        if synonyms {
            ast = expand_synonyms(&ast, &self.synonyms);
        }
        Ok(compile_query(&ast, self.index.vocab()))
    }

    pub fn search(&self, query: &str, opts: SearchOptions) -> Result<SearchOutcome, EngineError> {
        let q = self.compile(query, opts.fuzzy, opts.synonyms)?;
        let hits = self.index.score(&q, opts.k)?;
        Ok(SearchOutcome { hits, unknown_terms: q.unknown_terms })
    }

    pub fn search_cosine(&self, query: &str, opts: SearchOptions) -> Result<SearchOutcome, EngineError> {
        let q = self.compile(query, opts.fuzzy, opts.synonyms)?;
        let hits = self.index.baseline_cosine(&q, opts.k)?;
        Ok(SearchOutcome { hits, unknown_terms: q.unknown_terms })
    }

    pub fn explain(
        &self,
        query: &str,
        doc_id: &str,
        fuzzy: bool,
        synonyms: bool,
    ) -> Result<Explanation, EngineError> {
        let q = self.compile(query, fuzzy, synonyms)?;
        Ok(self.index.explain(&q, doc_id)?)
    }
}
