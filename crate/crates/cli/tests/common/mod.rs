#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hnsir_core::persist::save_index;
use hnsir_core::{build_index, TermWeight, Vocabulary, WeightedDoc, WeightingMode};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hnsir"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("run hnsir")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Three documents where only `d1` mentions banana. For `apple -banana`,
/// Sim puts d1 last (negative score) while w⁺-only cosine puts it first.
pub const NEGATION_CORPUS: &str = concat!(
    "{\"id\":\"d1\",\"text\":\"apple apple apple banana\"}\n",
    "{\"id\":\"d2\",\"text\":\"apple cherry date\"}\n",
    "{\"id\":\"d3\",\"text\":\"cherry date\"}\n",
);
pub const NEGATION_QUERIES: &str = "q1\tapple -banana\n";
pub const NEGATION_QRELS: &str = "q1\td2\t1\nq1\td1\t0\n";

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

/// One-term, one-document index holding D = 4/5·e₁ + 1/5·e₂ under term `t`.
pub fn worked_case_index(path: &Path) {
    let vocab = Vocabulary::from_parts(vec!["t".into()], vec![1]).unwrap();
    let doc = WeightedDoc {
        doc_id: "D".into(),
        weights: BTreeMap::from([(0, TermWeight::new(0.8, 0.2))]),
    };
    save_index(&build_index(&[doc], vocab, WeightingMode::Standard).unwrap(), path).unwrap();
}
