//! A small skip-gram with negative sampling trainer, used to produce gold
//! and baseline spaces for end-to-end runs.

use std::collections::BTreeSet;

use mimic::{Corpus, EmbeddingSpace};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

#[derive(Clone, Debug)]
pub struct SkipgramConfig {
    pub dim: usize,
    pub window: usize,
    pub negative: usize,
    pub epochs: usize,
    pub lr: f32,
    pub min_count: u64,
    /// Frequent-word subsampling threshold.
    pub sample: f64,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 50,
            window: 5,
            negative: 5,
            epochs: 3,
            lr: 0.025,
            min_count: 5,
            sample: 1e-3,
            seed: 1,
        }
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// Train on `corpus`. Words below `min_count` are dropped unless listed in
/// `include`.
pub fn train_skipgram(corpus: &Corpus, config: &SkipgramConfig, include: &BTreeSet<String>) -> EmbeddingSpace {
    let d = config.dim;
    let mut rows: Vec<Option<usize>> = vec![None; corpus.vocab().len()];
    let mut words = Vec::new();
    let mut counts = Vec::new();
    for (id, w) in corpus.vocab().iter().enumerate() {
        let f = corpus.frequency(w);
        if f >= config.min_count || (f > 0 && include.contains(w)) {
            rows[id] = Some(words.len());
            words.push(w.clone());
            counts.push(f);
        }
    }
    let n = words.len();
    let total: u64 = counts.iter().sum();
    let keep: Vec<f64> = counts
        .iter()
        .map(|&f| {
            let t = config.sample * total as f64;
            ((f as f64 / t).sqrt() + 1.0) * t / f as f64
        })
        .collect();
    let noise = WeightedAliasIndex::new(counts.iter().map(|&f| (f as f64).powf(0.75)).collect()).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<f32> = (0..n * d).map(|_| (rng.random::<f32>() - 0.5) / d as f32).collect();
    let mut output = vec![0f32; n * d];
    let mut grad = vec![0f32; d];
    let planned = (config.epochs as u64 * total) as f32;
    let mut processed = 0u64;
    let mut sentence = Vec::new();

    for _ in 0..config.epochs {
        for line in corpus.lines() {
            processed += line.len() as u64;
            let lr = (config.lr * (1.0 - processed as f32 / (planned + 1.0))).max(config.lr * 1e-4);
            sentence.clear();
            sentence.extend(
                line.iter()
                    .filter_map(|&id| rows[id as usize])
                    .filter(|&r| keep[r] >= 1.0 || rng.random::<f64>() < keep[r]),
            );
            for (i, &center) in sentence.iter().enumerate() {
                let span = config.window - rng.random_range(0..config.window);
                let lo = i.saturating_sub(span);
                let hi = (i + span + 1).min(sentence.len());
                for (j, &ctx) in sentence.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let h = &input[center * d..(center + 1) * d];
                    for k in 0..=config.negative {
                        let (target, label) = if k == 0 {
                            (ctx, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == ctx {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = &mut output[target * d..(target + 1) * d];
                        let dot: f32 = h.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for x in 0..d {
                            grad[x] += g * out[x];
                            out[x] += g * h[x];
                        }
                    }
                    for (w, g) in input[center * d..(center + 1) * d].iter_mut().zip(&grad) {
                        *w += g;
                    }
                }
            }
        }
    }

    EmbeddingSpace::from_pairs(
        d,
        words.iter().enumerate().map(|(r, w)| {
            (
                w.as_str(),
                Array1::from_iter(input[r * d..(r + 1) * d].iter().map(|&x| x as f64)),
            )
        }),
    )
    .unwrap()
}
