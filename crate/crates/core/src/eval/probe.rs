//! One-vs-rest logistic regression probes over word embeddings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::model::sigmoid;
use crate::optim::{Adam, AdamConfig, Moments};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeRow {
    pub word: String,
    pub labels: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeDataset {
    pub rows: Vec<ProbeRow>,
}

impl ProbeDataset {
    /// Read `word<TAB>label[,label...]` lines.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (word, labels) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected word<TAB>labels"))?;
            let labels: BTreeSet<String> = labels
                .split(',')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect();
            if labels.is_empty() {
                return Err(Error::parse(i + 1, "row without labels"));
            }
            rows.push(ProbeRow {
                word: word.to_string(),
                labels,
            });
        }
        Ok(ProbeDataset { rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read_from(BufReader::new(file))
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.rows.iter().flat_map(|r| r.labels.iter().cloned()).collect()
    }

    pub fn is_multi_label(&self) -> bool {
        self.rows.iter().any(|r| r.labels.len() > 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            epochs: 5,
            batch_size: 64,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    labels: Vec<String>,
    weights: Array2<f64>,
    bias: Array1<f64>,
    multi_label: bool,
}

fn embedding<'s>(space: &'s EmbeddingSpace, word: &str) -> Result<ArrayView1<'s, f64>> {
    space.get(word).ok_or_else(|| Error::MissingEmbedding(word.to_string()))
}

/// Fit one logistic regression per label with Adam on the summed binary
/// cross-entropy, averaged over each batch.
pub fn train_probe(dataset: &ProbeDataset, space: &EmbeddingSpace, config: &ProbeConfig) -> Result<Probe> {
    let labels: Vec<String> = dataset.labels().into_iter().collect();
    if labels.len() < 2 {
        return Err(Error::Dataset(format!(
            "a probe needs at least two labels, found {}",
            labels.len()
        )));
    }
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let inputs: Vec<ArrayView1<'_, f64>> = dataset
        .rows
        .iter()
        .map(|r| embedding(space, &r.word))
        .collect::<Result<_>>()?;
    let targets: Vec<Array1<f64>> = dataset
        .rows
        .iter()
        .map(|r| {
            let mut t = Array1::zeros(labels.len());
            for l in &r.labels {
                t[index[l.as_str()]] = 1.0;
            }
            t
        })
        .collect();

    let (n_labels, dim) = (labels.len(), space.dim());
    let mut weights = Array2::<f64>::zeros((n_labels, dim));
    let mut bias = Array1::<f64>::zeros(n_labels);
    let mut adam = Adam::new(config.adam);
    let mut w_moments = Moments::zeros(weights.len());
    let mut b_moments = Moments::zeros(n_labels);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..inputs.len()).collect();

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size.max(1)) {
            let mut g_w = Array2::<f64>::zeros((n_labels, dim));
            let mut g_b = Array1::<f64>::zeros(n_labels);
            for &i in chunk {
                let x = inputs[i];
                let err = (weights.dot(&x) + &bias).mapv(sigmoid) - &targets[i];
                for (l, e) in err.iter().enumerate() {
                    g_w.row_mut(l).scaled_add(*e, &x);
                }
                g_b += &err;
            }
            let scale = 1.0 / chunk.len() as f64;
            g_w *= scale;
            g_b *= scale;
            adam.begin_step();
            adam.update(
                weights.as_slice_mut().expect("standard layout"),
                &mut w_moments,
                g_w.as_slice().expect("standard layout"),
            )?;
            adam.update(
                bias.as_slice_mut().expect("standard layout"),
                &mut b_moments,
                g_b.as_slice().expect("standard layout"),
            )?;
        }
    }
    Ok(Probe {
        labels,
        weights,
        bias,
        multi_label: dataset.is_multi_label(),
    })
}

impl Probe {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Per-label probabilities.
    pub fn scores(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        (self.weights.dot(&x) + &self.bias).mapv(sigmoid)
    }

    /// The most probable label for single-label probes; every label above
    /// 0.5 (at least the most probable one) for multi-label probes.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> BTreeSet<String> {
        let scores = self.scores(x);
        let best = scores
            .iter()
            .enumerate()
            .fold(0, |best, (i, s)| if *s > scores[best] { i } else { best });
        let mut out = BTreeSet::new();
        if self.multi_label {
            out.extend(
                scores
                    .iter()
                    .zip(&self.labels)
                    .filter(|(s, _)| **s > 0.5)
                    .map(|(_, l)| l.clone()),
            );
        }
        if out.is_empty() {
            out.insert(self.labels[best].clone());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub n: usize,
    /// Fraction of rows whose predicted label set equals the gold set.
    pub accuracy: f64,
    pub micro_f1: f64,
}

/// Exact-match accuracy and micro-averaged F1 over label sets.
pub fn metrics(gold: &[BTreeSet<String>], predicted: &[BTreeSet<String>]) -> Metrics {
    let (mut tp, mut fp, mut fneg, mut exact) = (0usize, 0usize, 0usize, 0usize);
    for (g, p) in gold.iter().zip(predicted) {
        let hit = g.intersection(p).count();
        tp += hit;
        fp += p.len() - hit;
        fneg += g.len() - hit;
        exact += (g == p) as usize;
    }
    let n = gold.len();
    let denom = 2 * tp + fp + fneg;
    Metrics {
        n,
        accuracy: if n == 0 { 0.0 } else { exact as f64 / n as f64 },
        micro_f1: if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        },
    }
}

/// Half-open frequency range `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FrequencyBin {
    pub lo: u64,
    pub hi: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub overall: Metrics,
    pub bins: BTreeMap<FrequencyBin, Metrics>,
}

/// Evaluate `probe` on `dataset`, overall and per frequency bin. Words
/// without a frequency count as 0.
pub fn eval_probe(
    probe: &Probe,
    dataset: &ProbeDataset,
    space: &EmbeddingSpace,
    frequencies: &HashMap<String, u64>,
    bins: &[FrequencyBin],
) -> Result<ProbeReport> {
    let known: BTreeSet<&str> = probe.labels.iter().map(String::as_str).collect();
    let mut gold = Vec::with_capacity(dataset.rows.len());
    let mut predicted = Vec::with_capacity(dataset.rows.len());
    for row in &dataset.rows {
        if let Some(l) = row.labels.iter().find(|l| !known.contains(l.as_str())) {
            return Err(Error::Dataset(format!("label `{l}` was not seen in training")));
        }
        predicted.push(probe.predict(embedding(space, &row.word)?));
        gold.push(row.labels.clone());
    }
    let overall = metrics(&gold, &predicted);
    let mut per_bin = BTreeMap::new();
    for &bin in bins {
        let (g, p): (Vec<_>, Vec<_>) = dataset
            .rows
            .iter()
            .zip(gold.iter().zip(&predicted))
            .filter(|(row, _)| {
                let f = frequencies.get(&row.word).copied().unwrap_or(0);
                bin.lo <= f && f < bin.hi
            })
            .map(|(_, (g, p))| (g.clone(), p.clone()))
            .unzip();
        per_bin.insert(bin, metrics(&g, &p));
    }
    Ok(ProbeReport { overall, bins: per_bin })
}
