//! Similarity and rating benchmarks scored by Spearman correlation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::corpus::Context;
use crate::embedding::{cosine, EmbeddingSpace, Vector};
use crate::error::{Error, Result};
use crate::eval::stats::spearman;

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityEntry {
    pub first: String,
    /// `None` for single-word rating entries.
    pub second: Option<String>,
    pub gold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityBenchmark {
    entries: Vec<SimilarityEntry>,
}

impl SimilarityBenchmark {
    pub fn new(entries: Vec<SimilarityEntry>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Dataset(format!(
                "a benchmark needs at least 2 entries, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.gold.is_finite()) {
            return Err(Error::Dataset("non-finite gold score".into()));
        }
        Ok(SimilarityBenchmark { entries })
    }

    pub fn entries(&self) -> &[SimilarityEntry] {
        &self.entries
    }

    /// Read `word_a<TAB>word_b<TAB>score` or `word<TAB>score` lines.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let (first, second, score) = match fields.as_slice() {
                [a, b, s] => (a, Some(b.to_string()), s),
                [a, s] => (a, None, s),
                _ => return Err(Error::parse(i + 1, "expected 2 or 3 tab-separated fields")),
            };
            let gold = score
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad score `{score}`")))?;
            entries.push(SimilarityEntry {
                first: first.to_string(),
                second,
                gold,
            });
        }
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

/// Spearman between `cos(emb(a), emb(b))` and the gold scores of pair
/// entries. `infer` is asked first for every word; when it yields `None`
/// the word is looked up in `space`.
pub fn eval_similarity<F>(benchmark: &SimilarityBenchmark, space: &EmbeddingSpace, mut infer: F) -> Result<f64>
where
    F: FnMut(&str) -> Result<Option<Vector>>,
{
    let mut lookup = |word: &str| -> Result<Vector> {
        if let Some(v) = infer(word)? {
            return Ok(v);
        }
        space
            .get(word)
            .map(|v| v.to_owned())
            .ok_or_else(|| Error::MissingEmbedding(word.to_string()))
    };
    let mut pred = Vec::with_capacity(benchmark.entries.len());
    let mut gold = Vec::with_capacity(benchmark.entries.len());
    for entry in &benchmark.entries {
        let second = entry
            .second
            .as_deref()
            .ok_or_else(|| Error::Dataset(format!("`{}` is not a word pair", entry.first)))?;
        let a = lookup(&entry.first)?;
        let b = lookup(second)?;
        pred.push(cosine(a.view(), b.view())?);
        gold.push(entry.gold);
    }
    spearman(&pred, &gold)
}

/// Spearman between `predict(word)` and the gold ratings of single-word entries.
pub fn eval_ratings<F>(benchmark: &SimilarityBenchmark, mut predict: F) -> Result<f64>
where
    F: FnMut(&str) -> Result<f64>,
{
    let mut pred = Vec::with_capacity(benchmark.entries.len());
    let mut gold = Vec::with_capacity(benchmark.entries.len());
    for entry in &benchmark.entries {
        pred.push(predict(&entry.first)?);
        gold.push(entry.gold);
    }
    spearman(&pred, &gold)
}

/// Read `probe_word<TAB>sentence` lines into contexts per probe word, in file order.
pub fn read_context_file<R: BufRead>(reader: R) -> Result<BTreeMap<String, Vec<Context>>> {
    let mut out: BTreeMap<String, Vec<Context>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (word, sentence) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected probe_word<TAB>sentence"))?;
        // the probe word itself carries no information about its meaning
        let tokens = sentence
            .split_whitespace()
            .filter(|t| *t != word)
            .map(str::to_string)
            .collect();
        out.entry(word.to_string()).or_default().push(Context::new(tokens));
    }
    Ok(out)
}

pub fn load_context_file(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<Context>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    read_context_file(BufReader::new(file))
}
