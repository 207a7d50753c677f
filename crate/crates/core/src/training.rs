//! Mimicking trainer.
//!
//! Every epoch visits each training word `n(w) = min(floor(f(w) / min_frequency), cap)`
//! times in shuffled order. Each visit samples a context count uniformly
//! from `[context_min, context_max]`, draws that many contexts, and regresses
//! the model output onto the word's embedding in the input space. Batches
//! average per-instance gradients and take one Adam step.

use std::collections::{BTreeMap, BTreeSet};

use log::{info, warn};
use ndarray::ArrayView1;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checkpoint::Checkpoint;
use crate::corpus::{self, Corpus, DEFAULT_WINDOW};
use crate::embedding::{EmbeddingSpace, Vector};
use crate::error::{Error, Result};
use crate::model::{Gradients, Mode, Model};
use crate::ngram::{NgramConfig, NgramVocab};
use crate::optim::{Adam, AdamConfig, Moments};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub min_frequency: u64,
    pub per_epoch_cap: usize,
    pub context_min: usize,
    pub context_max: usize,
    pub epochs: usize,
    pub window: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            min_frequency: 100,
            per_epoch_cap: 5,
            context_min: 1,
            context_max: 64,
            epochs: 5,
            window: DEFAULT_WINDOW,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_frequency == 0 {
            return Err(Error::Invalid("min_frequency must be at least 1".into()));
        }
        if self.context_min == 0 || self.context_min > self.context_max {
            return Err(Error::Invalid(format!(
                "context range [{}, {}] is empty or starts at 0",
                self.context_min, self.context_max
            )));
        }
        if self.window == 0 {
            return Err(Error::Invalid("window must be at least 1".into()));
        }
        Ok(())
    }

    /// n(w)
    pub fn repetitions(&self, frequency: u64) -> usize {
        ((frequency / self.min_frequency) as usize).min(self.per_epoch_cap)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub sampler: SamplerConfig,
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub attention: bool,
    pub ngram: NgramConfig,
    /// Words never used as mimicking targets (e.g. the downsampled test words).
    pub exclude: BTreeSet<String>,
    /// Words added with `pairs_per_word` instances per epoch regardless of frequency.
    pub targets: BTreeSet<String>,
    pub pairs_per_word: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            sampler: SamplerConfig::default(),
            adam: AdamConfig::default(),
            batch_size: 64,
            attention: true,
            ngram: NgramConfig::default(),
            exclude: BTreeSet::new(),
            targets: BTreeSet::new(),
            pairs_per_word: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub word: String,
    pub repetitions: usize,
}

/// Words with `f(w) >= min_frequency` and an embedding in `space`, with their
/// per-epoch repetition counts, in lexicographic order.
pub fn epoch_schedule(
    corpus: &Corpus,
    space: &EmbeddingSpace,
    config: &SamplerConfig,
    exclude: &BTreeSet<String>,
) -> Result<Vec<ScheduleEntry>> {
    config.validate()?;
    let mut schedule: Vec<ScheduleEntry> = corpus
        .frequencies()
        .filter(|&(w, f)| f >= config.min_frequency && space.contains(w) && !exclude.contains(w))
        .map(|(w, f)| ScheduleEntry {
            word: w.to_string(),
            repetitions: config.repetitions(f),
        })
        .filter(|e| e.repetitions > 0)
        .collect();
    schedule.sort_by(|a, b| a.word.cmp(&b.word));
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    Ok(schedule)
}

/// Add `pairs_per_word` instances per epoch for every target word.
pub fn augment_with_targets<'a>(
    mut schedule: Vec<ScheduleEntry>,
    targets: impl IntoIterator<Item = &'a str>,
    pairs_per_word: usize,
    space: &EmbeddingSpace,
) -> Result<Vec<ScheduleEntry>> {
    let mut positions: BTreeMap<String, usize> =
        schedule.iter().enumerate().map(|(i, e)| (e.word.clone(), i)).collect();
    for word in targets {
        if !space.contains(word) {
            return Err(Error::MissingEmbedding(word.to_string()));
        }
        match positions.get(word) {
            Some(&i) => schedule[i].repetitions += pairs_per_word,
            None => {
                positions.insert(word.to_string(), schedule.len());
                schedule.push(ScheduleEntry {
                    word: word.to_string(),
                    repetitions: pairs_per_word,
                });
            }
        }
    }
    schedule.sort_by(|a, b| a.word.cmp(&b.word));
    Ok(schedule)
}

pub fn instances_per_epoch(schedule: &[ScheduleEntry]) -> usize {
    schedule.iter().map(|e| e.repetitions).sum()
}

/// Every scheduled word repeated `n(w)` times, shuffled.
pub fn expand_epoch<R: Rng>(schedule: &[ScheduleEntry], rng: &mut R) -> Vec<String> {
    let mut words: Vec<String> = schedule
        .iter()
        .flat_map(|e| std::iter::repeat_n(e.word.clone(), e.repetitions))
        .collect();
    words.shuffle(rng);
    words
}

/// A word, its resolved context vectors, and the embedding to mimic.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingInstance {
    pub word: String,
    pub context_vectors: Vec<Vector>,
    pub target: Vector,
}

/// Draws training instances from a corpus against a fixed embedding space.
pub struct InstanceSampler<'a> {
    corpus: &'a Corpus,
    space: &'a EmbeddingSpace,
    config: SamplerConfig,
    rows: Vec<Option<usize>>,
}

impl<'a> InstanceSampler<'a> {
    pub fn new(corpus: &'a Corpus, space: &'a EmbeddingSpace, config: SamplerConfig) -> Self {
        let rows = corpus.vocab().iter().map(|w| space.index_of(w)).collect();
        InstanceSampler {
            corpus,
            space,
            config,
            rows,
        }
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn draw_context_count<R: Rng>(&self, rng: &mut R) -> usize {
        rng.random_range(self.config.context_min..=self.config.context_max)
    }

    /// Sample a context count, then that many nonempty contexts (all of them
    /// if fewer exist). Contexts without any embedded word are dropped after
    /// sampling.
    pub fn make_instance<R: Rng>(&self, word: &str, rng: &mut R) -> Result<TrainingInstance> {
        let target = self
            .space
            .get(word)
            .ok_or_else(|| Error::MissingEmbedding(word.to_string()))?
            .to_owned();
        let window = self.config.window;
        let candidates: Vec<(u32, u32)> = self
            .corpus
            .occurrences(word)
            .iter()
            .copied()
            .filter(|&(line, _)| self.corpus.lines()[line as usize].len() > 1)
            .collect();
        let count = self.draw_context_count(rng);
        if candidates.is_empty() {
            return Err(Error::NoContexts(word.to_string()));
        }
        let picked = corpus::sample_indices(rng, candidates.len(), count, false);
        let context_vectors: Vec<Vector> = picked
            .into_iter()
            .filter_map(|i| {
                let (line, pos) = candidates[i];
                self.resolve(&self.corpus.window_ids(line, pos, window))
            })
            .collect();
        if context_vectors.is_empty() {
            return Err(Error::NoContexts(word.to_string()));
        }
        Ok(TrainingInstance {
            word: word.to_string(),
            context_vectors,
            target,
        })
    }

    fn resolve(&self, ids: &[u32]) -> Option<Vector> {
        let mut sum = Vector::zeros(self.space.dim());
        let mut n = 0usize;
        for &id in ids {
            if let Some(row) = self.rows[id as usize] {
                sum += &self.space.row(row);
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }
}

/// `||target - output||^2` for one instance.
pub fn loss(model: &Model, instance: &TrainingInstance) -> Result<f64> {
    let trace = model.forward(&instance.word, instance.context_vectors.clone(), Mode::Full)?;
    let diff = &trace.output - &instance.target;
    Ok(diff.dot(&diff))
}

/// Loss and exact gradients for one instance.
pub fn backward(model: &Model, instance: &TrainingInstance) -> Result<(f64, Gradients)> {
    let trace = model.forward(&instance.word, instance.context_vectors.clone(), Mode::Full)?;
    Ok(model.backward(&trace, instance.target.view()))
}

/// Adam moments for every parameter tensor of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelMoments {
    pub ngrams: Moments,
    pub a: Moments,
    pub u: Moments,
    pub b: Moments,
    pub m: Moments,
}

impl ModelMoments {
    pub fn for_model(model: &Model) -> Self {
        let p = model.params();
        ModelMoments {
            ngrams: Moments::zeros(p.ngrams.len()),
            a: Moments::zeros(p.a.len()),
            u: Moments::zeros(p.u.len()),
            b: Moments::zeros(1),
            m: Moments::zeros(p.m.len()),
        }
    }

    pub fn all_finite(&self) -> bool {
        [&self.ngrams, &self.a, &self.u, &self.b, &self.m]
            .iter()
            .all(|m| m.all_finite())
    }
}

/// One Adam step of every parameter tensor.
pub fn adam_step(model: &mut Model, grads: &Gradients, adam: &mut Adam, moments: &mut ModelMoments) -> Result<()> {
    if !grads.all_finite() {
        return Err(Error::NonFinite(format!("gradients at step {}", adam.step_count() + 1)));
    }
    adam.begin_step();
    let params = model.params_mut();
    let dim = params.dim();
    let ngrams = params.ngrams.as_slice_mut().expect("standard layout");
    adam.update_with(ngrams, &mut moments.ngrams, |i| {
        grads.ngram_rows.get(&(i / dim)).map_or(0.0, |row| row[i % dim])
    })?;
    adam.update(
        params.a.as_slice_mut().expect("standard layout"),
        &mut moments.a,
        grads.a.as_slice().expect("standard layout"),
    )?;
    adam.update(
        params.u.as_slice_mut().expect("standard layout"),
        &mut moments.u,
        grads.u.as_slice().expect("standard layout"),
    )?;
    adam.update(std::slice::from_mut(&mut params.b), &mut moments.b, &[grads.b])?;
    adam.update(
        params.m.as_slice_mut().expect("standard layout"),
        &mut moments.m,
        grads.m.as_slice().expect("standard layout"),
    )?;
    if !params.all_finite() || !moments.all_finite() {
        return Err(Error::NonFinite(format!("parameters after step {}", adam.step_count())));
    }
    Ok(())
}

/// Mean loss and mean gradient over a batch.
pub fn batch_gradients(model: &Model, batch: &[TrainingInstance]) -> Result<(f64, Gradients)> {
    let mut total = Gradients::zeros(model.dim());
    let mut loss_sum = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for instance in batch {
        let (loss, grads) = backward(model, instance)?;
        loss_sum += loss;
        total.accumulate(&grads, scale);
    }
    Ok((loss_sum * scale, total))
}

/// Build the schedule, n-gram vocabulary and model for a training run.
pub fn prepare(
    corpus: &Corpus,
    space: &EmbeddingSpace,
    config: &TrainConfig,
) -> Result<(Vec<ScheduleEntry>, NgramVocab)> {
    let mut exclude = config.exclude.clone();
    exclude.extend(config.targets.iter().cloned());
    let schedule = epoch_schedule(corpus, space, &config.sampler, &exclude)?;
    let schedule = augment_with_targets(
        schedule,
        config.targets.iter().map(String::as_str),
        config.pairs_per_word,
        space,
    )?;
    let vocab = NgramVocab::build(schedule.iter().map(|e| e.word.as_str()), config.ngram);
    Ok((schedule, vocab))
}

/// Train a model from scratch. Runs strictly sequentially, so equal inputs
/// and seeds give bit-identical checkpoints.
pub fn train(corpus: &Corpus, space: &EmbeddingSpace, config: &TrainConfig) -> Result<Checkpoint> {
    config.sampler.validate()?;
    if config.batch_size == 0 {
        return Err(Error::Invalid("batch size must be at least 1".into()));
    }
    let (schedule, vocab) = prepare(corpus, space, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.sampler.seed);
    let mut model = Model::new(vocab, space.dim(), config.attention, &mut rng);
    let mut adam = Adam::new(config.adam);
    let mut moments = ModelMoments::for_model(&model);
    let sampler = InstanceSampler::new(corpus, space, config.sampler.clone());
    info!(
        "training on {} words, {} instances per epoch, {} n-grams",
        schedule.len(),
        instances_per_epoch(&schedule),
        model.vocab().len()
    );

    let mut epoch_losses = Vec::with_capacity(config.sampler.epochs);
    for epoch in 0..config.sampler.epochs {
        let words = expand_epoch(&schedule, &mut rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for chunk in words.chunks(config.batch_size) {
            let mut batch = Vec::with_capacity(chunk.len());
            for word in chunk {
                match sampler.make_instance(word, &mut rng) {
                    Ok(instance) => batch.push(instance),
                    Err(Error::NoContexts(w)) => warn!("skipping `{w}`: no usable contexts"),
                    Err(e) => return Err(e),
                }
            }
            if batch.is_empty() {
                continue;
            }
            let (batch_loss, grads) = batch_gradients(&model, &batch)?;
            loss_sum += batch_loss * batch.len() as f64;
            seen += batch.len();
            adam_step(&mut model, &grads, &mut adam, &mut moments)?;
        }
        let mean = if seen > 0 { loss_sum / seen as f64 } else { f64::NAN };
        info!("epoch {}\tmean loss {mean:.6}", epoch + 1);
        epoch_losses.push(mean);
    }

    Ok(Checkpoint {
        model,
        sampler: config.sampler.clone(),
        epochs_completed: config.sampler.epochs as u64,
        epoch_losses,
    })
}

/// Training log lines: `epoch<TAB>mean_loss`.
pub fn format_log(epoch_losses: &[f64]) -> String {
    epoch_losses
        .iter()
        .enumerate()
        .map(|(i, l)| format!("{}\t{}\n", i + 1, crate::embedding::format_component(*l)))
        .collect()
}

/// Mean loss of `model` over fixed instances.
pub fn mean_loss(model: &Model, instances: &[TrainingInstance]) -> Result<f64> {
    let mut sum = 0.0;
    for instance in instances {
        sum += loss(model, instance)?;
    }
    Ok(sum / instances.len() as f64)
}

/// Squared distance between two vectors.
pub fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let d = &a - &b;
    d.dot(&d)
}
