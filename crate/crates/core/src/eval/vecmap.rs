//! Bucketed cosine scores of aligned embeddings against gold embeddings,
//! and per-bucket sign tests between two models.

use std::fmt::Write as _;

use ndarray::ArrayView1;

use crate::corpus::{target_count, DownsamplePlan};
use crate::embedding::{cosine, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::eval::align::AlignmentMap;
use crate::eval::stats::sign_test;

#[derive(Clone, Debug, PartialEq)]
pub struct BucketScore {
    pub bucket: usize,
    pub occurrences: usize,
    pub mean_cosine: f64,
    pub count: usize,
    /// Plan words without an inferred embedding.
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentReport {
    pub buckets: Vec<BucketScore>,
}

impl AlignmentReport {
    pub fn bucket(&self, occurrences: usize) -> Option<&BucketScore> {
        self.buckets.iter().find(|b| b.occurrences == occurrences)
    }

    pub fn scores(&self) -> Vec<f64> {
        self.buckets.iter().map(|b| b.mean_cosine).collect()
    }
}

/// Cosine between the mapped inferred embedding and the gold embedding.
pub fn aligned_cosine(inferred: ArrayView1<'_, f64>, gold: ArrayView1<'_, f64>, map: &AlignmentMap) -> Result<f64> {
    cosine(map.apply(inferred).view(), gold)
}

fn gold_of<'g>(gold: &'g EmbeddingSpace, word: &str) -> Result<ArrayView1<'g, f64>> {
    gold.get(word)
        .ok_or_else(|| Error::MissingEmbedding(format!("gold embedding of `{word}`")))
}

/// Mean aligned cosine per plan bucket. Plan words missing from `inferred`
/// are skipped and listed; a bucket left empty is an error.
pub fn score_alignment(
    inferred: &EmbeddingSpace,
    gold: &EmbeddingSpace,
    map: &AlignmentMap,
    plan: &DownsamplePlan,
) -> Result<AlignmentReport> {
    let mut buckets = Vec::new();
    for bucket in 0..plan.num_buckets() {
        let mut sum = 0.0;
        let mut count = 0;
        let mut skipped = Vec::new();
        for word in plan.words_in_bucket(bucket) {
            let g = gold_of(gold, word)?;
            match inferred.get(word) {
                Some(v) => {
                    sum += aligned_cosine(v, g, map)?;
                    count += 1;
                }
                None => skipped.push(word.to_string()),
            }
        }
        if count == 0 {
            return Err(Error::Undefined(format!(
                "bucket {} has no scored words",
                target_count(bucket)
            )));
        }
        buckets.push(BucketScore {
            bucket,
            occurrences: target_count(bucket),
            mean_cosine: sum / count as f64,
            count,
            skipped,
        });
    }
    Ok(AlignmentReport { buckets })
}

/// Rows of `model  score  score ...` with scores ×100 to one decimal and one
/// column per bucket.
pub fn format_report_table(rows: &[(&str, &AlignmentReport)]) -> String {
    let buckets: Vec<usize> = rows
        .first()
        .map(|(_, r)| r.buckets.iter().map(|b| b.occurrences).collect())
        .unwrap_or_default();
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("model".len());
    let mut out = String::new();
    write!(out, "{:<width$}", "model").unwrap();
    for b in &buckets {
        write!(out, " {b:>6}").unwrap();
    }
    out.push('\n');
    for (name, report) in rows {
        write!(out, "{name:<width$}").unwrap();
        for b in &report.buckets {
            write!(out, " {:>6.1}", b.mean_cosine * 100.0).unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketComparison {
    pub bucket: usize,
    pub occurrences: usize,
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
    /// `None` when every comparison tied.
    pub p_value: Option<f64>,
}

/// Per bucket, count the words whose aligned embedding under model `a` is
/// closer to gold than under model `b`, and sign-test the counts.
pub fn compare_models(
    a: &EmbeddingSpace,
    b: &EmbeddingSpace,
    gold: &EmbeddingSpace,
    map: &AlignmentMap,
    plan: &DownsamplePlan,
) -> Result<Vec<BucketComparison>> {
    if plan.is_empty() {
        return Err(Error::Undefined("empty comparison set".into()));
    }
    let mut out = Vec::new();
    for bucket in 0..plan.num_buckets() {
        let (mut wins, mut losses, mut ties) = (0, 0, 0);
        for word in plan.words_in_bucket(bucket) {
            let g = gold_of(gold, word)?;
            let va = a.get(word).ok_or_else(|| Error::MissingEmbedding(word.to_string()))?;
            let vb = b.get(word).ok_or_else(|| Error::MissingEmbedding(word.to_string()))?;
            let (ca, cb) = (aligned_cosine(va, g, map)?, aligned_cosine(vb, g, map)?);
            if ca > cb {
                wins += 1;
            } else if ca < cb {
                losses += 1;
            } else {
                ties += 1;
            }
        }
        let p_value = if wins + losses > 0 {
            Some(sign_test(wins, losses)?)
        } else {
            None
        };
        out.push(BucketComparison {
            bucket,
            occurrences: target_count(bucket),
            wins,
            losses,
            ties,
            p_value,
        });
    }
    Ok(out)
}

/// `occurrences  wins  losses  ties  p` lines; all-tie buckets read "no evidence".
pub fn format_comparison_table(rows: &[BucketComparison]) -> String {
    let mut out = format!(
        "{:>11} {:>6} {:>6} {:>6}  {}\n",
        "occurrences", "wins", "losses", "ties", "p"
    );
    for r in rows {
        let p = match r.p_value {
            Some(p) => format!("{p:.3e}"),
            None => "no evidence".to_string(),
        };
        writeln!(
            out,
            "{:>11} {:>6} {:>6} {:>6}  {p}",
            r.occurrences, r.wins, r.losses, r.ties
        )
        .unwrap();
    }
    out
}
