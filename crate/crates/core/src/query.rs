//! Query mini-language.
//!
//! ```text
//! query  = clause { ws clause } ;
//! clause = [ weight ":" ] [ "-" ] term [ "~" ] ;
//! weight = real in [0,1] ;
//! term   = 1*(letter | digit) ;
//! ```
//!
//! `-` asserts the term absent (its weight goes to w⁻), `~` asks for fuzzy
//! expansion against the vocabulary.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weighting::{TermId, TermWeight, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyQuery,
    /// Weight text is not a plain decimal such as `0.25`.
    MalformedWeight(String),
    /// Weight parsed but lies outside `[0, 1]`.
    WeightOutOfRange(String),
    /// `:` with nothing in front of it.
    MissingWeight,
    /// `weight:` with no term after it.
    DanglingWeight,
    /// `-` with no term after it.
    DanglingNegation,
    MissingTerm,
    InvalidCharacter(char),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyQuery => f.write_str("empty query"),
            Self::MalformedWeight(w) => write!(f, "malformed weight {w:?}"),
            Self::WeightOutOfRange(w) => write!(f, "weight {w} outside [0, 1]"),
            Self::MissingWeight => f.write_str("':' without a weight"),
            Self::DanglingWeight => f.write_str("weight without a term"),
            Self::DanglingNegation => f.write_str("dangling negation"),
            Self::MissingTerm => f.write_str("missing term"),
            Self::InvalidCharacter(c) => write!(f, "unexpected character {c:?}"),
        }
    }
}

/// Parse failure. `position` is a 0-based character offset into the query.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at column {}", .position + 1)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl ParseError {
    fn new(kind: ParseErrorKind, position: usize) -> Self {
        Self { kind, position }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    User,
    FuzzyExpansion,
    SynonymExpansion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub term: String,
    pub weight: f64,
    pub negated: bool,
    pub fuzzy: bool,
    pub origin: Origin,
}

impl Clause {
    pub fn user(term: impl Into<String>, weight: f64, negated: bool, fuzzy: bool) -> Self {
        Self { term: term.into(), weight, negated, fuzzy, origin: Origin::User }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryAst {
    pub clauses: Vec<Clause>,
}

pub fn parse_query(q: &str) -> Result<QueryAst, ParseError> {
    let chars: Vec<char> = q.chars().collect();
    let mut clauses = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        clauses.push(parse_clause(&chars[start..i], start)?);
    }
    if clauses.is_empty() {
        return Err(ParseError::new(ParseErrorKind::EmptyQuery, 0));
    }
    Ok(QueryAst { clauses })
}

fn parse_clause(chunk: &[char], offset: usize) -> Result<Clause, ParseError> {
    let mut rest = chunk;
    let mut pos = offset;
    let mut weight = None;

    if let Some(colon) = chunk.iter().position(|&c| c == ':') {
        if colon == 0 {
            return Err(ParseError::new(ParseErrorKind::MissingWeight, offset));
        }
        weight = Some(parse_weight(&chunk[..colon], offset)?);
        rest = &chunk[colon + 1..];
        pos = offset + colon + 1;
    }

    let negated = rest.first() == Some(&'-');
    if negated {
        rest = &rest[1..];
        pos += 1;
    }
    let fuzzy = rest.last() == Some(&'~');
    if fuzzy {
        rest = &rest[..rest.len() - 1];
    }

    if rest.is_empty() {
        let kind = if negated {
            ParseErrorKind::DanglingNegation
        } else if weight.is_some() {
            ParseErrorKind::DanglingWeight
        } else {
            ParseErrorKind::MissingTerm
        };
        return Err(ParseError::new(kind, pos));
    }
    if let Some(bad) = rest.iter().position(|c| !c.is_alphanumeric()) {
        return Err(ParseError::new(ParseErrorKind::InvalidCharacter(rest[bad]), pos + bad));
    }

    let term: String = rest.iter().collect::<String>().to_lowercase();
    Ok(Clause::user(term, weight.unwrap_or(1.0), negated, fuzzy))
}

fn parse_weight(text: &[char], offset: usize) -> Result<f64, ParseError> {
    let s: String = text.iter().collect();
    let digits = text.iter().filter(|c| c.is_ascii_digit()).count();
    let dots = text.iter().filter(|&&c| c == '.').count();
    if digits == 0 || dots > 1 || digits + dots != text.len() {
        return Err(ParseError::new(ParseErrorKind::MalformedWeight(s), offset));
    }
    let w: f64 = s
        .parse()
        .map_err(|_| ParseError::new(ParseErrorKind::MalformedWeight(s.clone()), offset))?;
    if !(0.0..=1.0).contains(&w) {
        return Err(ParseError::new(ParseErrorKind::WeightOutOfRange(s), offset));
    }
    Ok(w)
}

/// Largest edit distance considered by fuzzy expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum MaxEdit {
    #[default]
    One,
    Two,
}

impl MaxEdit {
    pub fn get(self) -> usize {
        match self {
            MaxEdit::One => 1,
            MaxEdit::Two => 2,
        }
    }
}

impl TryFrom<u8> for MaxEdit {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(MaxEdit::One),
            2 => Ok(MaxEdit::Two),
            other => Err(format!("max edit distance must be 1 or 2, got {other}")),
        }
    }
}

impl From<MaxEdit> for u8 {
    fn from(m: MaxEdit) -> u8 {
        m.get() as u8
    }
}

/// Appends, for every fuzzy clause, each vocabulary term within
/// `1..=max_edit` Damerau–Levenshtein edits, weighted `parent / (1 + d)`.
pub fn expand_fuzzy(ast: &QueryAst, vocab: &Vocabulary, max_edit: MaxEdit) -> QueryAst {
    let max = max_edit.get();
    let mut out = ast.clone();
    for clause in ast.clauses.iter().filter(|c| c.fuzzy) {
        let len = clause.term.chars().count();
        for candidate in vocab.terms() {
            if candidate.chars().count().abs_diff(len) > max {
                continue;
            }
            let d = strsim::damerau_levenshtein(&clause.term, candidate);
            if (1..=max).contains(&d) {
                out.clauses.push(Clause {
                    term: candidate.clone(),
                    weight: clause.weight / (1.0 + d as f64),
                    negated: clause.negated,
                    fuzzy: false,
                    origin: Origin::FuzzyExpansion,
                });
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum SynonymError {
    #[error("line {line}: expected term<TAB>synonym<TAB>prob")]
    FieldCount { line: usize },
    #[error("line {line}: probability {value:?} is not in (0, 1]")]
    BadProbability { line: usize, value: String },
    #[error("line {line}: {term:?} is listed as its own synonym")]
    SelfSynonym { line: usize, term: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Query-side synonym expansions: term → [(synonym, probability)].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynonymTable {
    entries: BTreeMap<String, Vec<(String, f64)>>,
}

impl SynonymTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: &str, synonym: &str, prob: f64) -> Result<(), SynonymError> {
        let (term, synonym) = (term.to_lowercase(), synonym.to_lowercase());
        if !(prob > 0.0 && prob <= 1.0) {
            return Err(SynonymError::BadProbability { line: 0, value: prob.to_string() });
        }
        if term == synonym {
            return Err(SynonymError::SelfSynonym { line: 0, term });
        }
        self.entries.entry(term).or_default().push((synonym, prob));
        Ok(())
    }

    pub fn get(&self, term: &str) -> &[(String, f64)] {
        self.entries.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `term<TAB>synonym<TAB>prob` lines. Blank lines are skipped.
    pub fn read(reader: impl BufRead) -> Result<Self, SynonymError> {
        let mut table = Self::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [term, synonym, prob] = fields[..] else {
                return Err(SynonymError::FieldCount { line: line_no });
            };
            let p: f64 = prob.trim().parse().map_err(|_| SynonymError::BadProbability {
                line: line_no,
                value: prob.to_string(),
            })?;
            table.insert(term.trim(), synonym.trim(), p).map_err(|e| match e {
                SynonymError::BadProbability { value, .. } => {
                    SynonymError::BadProbability { line: line_no, value }
                }
                SynonymError::SelfSynonym { term, .. } => {
                    SynonymError::SelfSynonym { line: line_no, term }
                }
                other => other,
            })?;
        }
        Ok(table)
    }
}

/// One level of synonym expansion over user-written clauses.
pub fn expand_synonyms(ast: &QueryAst, syn: &SynonymTable) -> QueryAst {
    let mut out = ast.clone();
    for clause in ast.clauses.iter().filter(|c| c.origin == Origin::User) {
        for (synonym, prob) in syn.get(&clause.term) {
            out.clauses.push(Clause {
                term: synonym.clone(),
                weight: clause.weight * prob,
                negated: clause.negated,
                fuzzy: false,
                origin: Origin::SynonymExpansion,
            });
        }
    }
    out
}

/// Compiled query: per-term (w⁺, w⁻) plus terms the vocabulary lacks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HyperQuery {
    pub weights: BTreeMap<TermId, TermWeight>,
    pub unknown_terms: Vec<String>,
}

impl HyperQuery {
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Negated clauses feed w⁻, the rest w⁺; repeated terms keep the maximum
/// per side.
pub fn compile_query(ast: &QueryAst, vocab: &Vocabulary) -> HyperQuery {
    let mut q = HyperQuery::default();
    for clause in &ast.clauses {
        let Some(id) = vocab.id(&clause.term) else {
            if !q.unknown_terms.contains(&clause.term) {
                q.unknown_terms.push(clause.term.clone());
            }
            continue;
        };
        let w = q.weights.entry(id).or_default();
        let side = if clause.negated { &mut w.minus } else { &mut w.plus };
        *side = side.max(clause.weight);
    }
    q.unknown_terms.sort_unstable();
    q
}
