mod support;

use std::collections::BTreeSet;

use mimic::model::Mode;
use mimic::ngram::NgramConfig;
use mimic::optim::{Adam, AdamConfig, Moments};
use mimic::training::{prepare, InstanceSampler};
use mimic::{train, ContextSet, Corpus, EmbeddingSpace, Error, Model, SamplerConfig, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adam written out for a scalar, straight from its definition.
struct ScalarAdam {
    m: f64,
    v: f64,
    t: i32,
}

impl ScalarAdam {
    fn step(&mut self, p: f64, g: f64) -> f64 {
        let (lr, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-8);
        self.t += 1;
        self.m = b1 * self.m + (1.0 - b1) * g;
        self.v = b2 * self.v + (1.0 - b2) * g * g;
        let m_hat = self.m / (1.0 - f64::powi(b1, self.t));
        let v_hat = self.v / (1.0 - f64::powi(b2, self.t));
        p - lr * m_hat / (v_hat.sqrt() + eps)
    }
}

#[test]
fn adam_matches_scalar_reference_for_100_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut adam = Adam::new(AdamConfig::default());
    let mut params = vec![0.5, -1.0, 2.0];
    let mut moments = Moments::zeros(3);
    let mut reference: Vec<(f64, ScalarAdam)> = params
        .iter()
        .map(|&p| (p, ScalarAdam { m: 0.0, v: 0.0, t: 0 }))
        .collect();
    for _ in 0..100 {
        // gradient of a quadratic plus noise
        let grad: Vec<f64> = params.iter().map(|p| 2.0 * p + rng.random_range(-0.1..0.1)).collect();
        adam.begin_step();
        adam.update(&mut params, &mut moments, &grad).unwrap();
        for ((p, r), g) in reference.iter_mut().zip(&grad) {
            *p = r.step(*p, *g);
        }
    }
    for (a, (b, _)) in params.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

/// Five target words with shared stems, plus filler context words.
fn fixture() -> (Corpus, EmbeddingSpace) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let targets = ["walking", "talking", "stalking", "walker", "talker"];
    let fillers: Vec<String> = (0..12).map(|i| format!("f{i}")).collect();
    let mut lines = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        for j in 0..6 + i {
            let a = &fillers[(i + j) % fillers.len()];
            let b = &fillers[(2 * i + 3 * j) % fillers.len()];
            lines.push(format!("{a} {t} {b}"));
        }
    }
    let space = EmbeddingSpace::from_pairs(
        4,
        targets
            .iter()
            .map(|s| s.to_string())
            .chain(fillers.iter().cloned())
            .map(|w| (w, support::normal_vec(&mut rng, 4, 0.5))),
    )
    .unwrap();
    (Corpus::from_lines(lines), space)
}

fn config(epochs: usize) -> TrainConfig {
    TrainConfig {
        sampler: SamplerConfig {
            min_frequency: 2,
            epochs,
            seed: 9,
            ..SamplerConfig::default()
        },
        ngram: NgramConfig {
            min_count: 2,
            ..NgramConfig::default()
        },
        batch_size: 4,
        exclude: (0..12).map(|i| format!("f{i}")).collect(),
        ..TrainConfig::default()
    }
}

fn bytes(c: &mimic::Checkpoint) -> Vec<u8> {
    let mut out = Vec::new();
    c.write_to(&mut out).unwrap();
    out
}

#[test]
fn training_is_deterministic_under_seed() {
    let (corpus, space) = fixture();
    let a = train(&corpus, &space, &config(4)).unwrap();
    let b = train(&corpus, &space, &config(4)).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    let mut other = config(4);
    other.sampler.seed = 10;
    assert_ne!(bytes(&train(&corpus, &space, &other).unwrap()), bytes(&a));
}

#[test]
fn zero_epochs_is_initialization() {
    let (corpus, space) = fixture();
    let cfg = config(0);
    let ckpt = train(&corpus, &space, &cfg).unwrap();
    let (_, vocab) = prepare(&corpus, &space, &cfg).unwrap();
    let fresh = Model::new(vocab, 4, true, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(ckpt.model, fresh);
    assert!(ckpt.epoch_losses.is_empty());
    assert_eq!(ckpt.epochs_completed, 0);
}

#[test]
fn loss_goes_down() {
    let (corpus, space) = fixture();
    let ckpt = train(&corpus, &space, &config(60)).unwrap();
    let first = ckpt.epoch_losses[0];
    let last = *ckpt.epoch_losses.last().unwrap();
    assert!(last < 0.5 * first, "{first} -> {last}");
}

#[test]
fn excluded_words_are_not_targets() {
    let (corpus, space) = fixture();
    let mut cfg = config(1);
    cfg.exclude.insert("walking".into());
    let (schedule, vocab) = prepare(&corpus, &space, &cfg).unwrap();
    assert!(schedule.iter().all(|e| e.word != "walking"));
    assert!(schedule.iter().all(|e| !e.word.starts_with('f')));
    assert!(!vocab.is_empty());
}

#[test]
fn targets_are_added_with_fixed_pairs() {
    let (corpus, space) = fixture();
    let mut cfg = config(1);
    cfg.targets = BTreeSet::from(["f3".to_string()]);
    cfg.pairs_per_word = 7;
    let (schedule, _) = prepare(&corpus, &space, &cfg).unwrap();
    let entry = schedule.iter().find(|e| e.word == "f3").unwrap();
    assert_eq!(entry.repetitions, 7);
    cfg.targets.insert("absent".into());
    assert!(matches!(
        prepare(&corpus, &space, &cfg),
        Err(Error::MissingEmbedding(_))
    ));
}

#[test]
fn sampled_instances_respect_context_bounds() {
    let (corpus, space) = fixture();
    let cfg = SamplerConfig {
        context_min: 2,
        context_max: 3,
        ..SamplerConfig::default()
    };
    let sampler = InstanceSampler::new(&corpus, &space, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let inst = sampler.make_instance("stalking", &mut rng).unwrap();
        assert!((2..=3).contains(&inst.context_vectors.len()));
        assert_eq!(inst.target, space.get("stalking").unwrap());
    }
}

#[test]
fn degradation_ladder() {
    let (corpus, space) = fixture();
    let model = train(&corpus, &space, &config(2)).unwrap().model;
    let contexts = ContextSet::new("walking", corpus.extract_contexts("walking", 25));
    let none = ContextSet::new("walking", []);
    assert_eq!(
        model.infer("walking", &contexts, &space, Mode::Full).unwrap().mode,
        Mode::Full
    );
    assert_eq!(
        model.infer("walking", &none, &space, Mode::Full).unwrap().mode,
        Mode::FormOnly
    );
    assert_eq!(
        model.infer("qqq", &contexts, &space, Mode::Full).unwrap().mode,
        Mode::ContextOnly
    );
    assert!(matches!(
        model.infer("qqq", &none, &space, Mode::Full),
        Err(Error::Degenerate(_))
    ));
    assert!(matches!(
        model.infer("walking", &none, &space, Mode::ContextOnly),
        Err(Error::NoContexts(_))
    ));
    // context-only output does not depend on the spelling
    let a = model
        .infer("walking", &contexts, &space, Mode::ContextOnly)
        .unwrap()
        .output;
    let b = model.infer("x!?", &contexts, &space, Mode::ContextOnly).unwrap().output;
    assert_eq!(a, b);
}

#[test]
fn unknown_context_words_are_skipped() {
    let (corpus, space) = fixture();
    let model = train(&corpus, &space, &config(1)).unwrap().model;
    let known = ContextSet::new("walker", [mimic::Context::from_text("f1 f2")]);
    let padded = ContextSet::new(
        "walker",
        [
            mimic::Context::from_text("zzz f1 yyy f2"),
            mimic::Context::from_text("zzz"),
        ],
    );
    let a = model.infer("walker", &known, &space, Mode::Full).unwrap();
    let b = model.infer("walker", &padded, &space, Mode::Full).unwrap();
    assert_eq!(a.output, b.output);
    assert_eq!(b.context_vectors.len(), 1);
}
