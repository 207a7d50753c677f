//! Desk-scale rare-word benchmark: downsample a synthetic corpus, retrain
//! skip-gram on it, train attentive and uniform mimicking models, and score
//! all three against gold embeddings from the full corpus.

use std::collections::BTreeSet;
use std::time::Instant;

use mimic::corpus::DEFAULT_WINDOW;
use mimic::eval::vecmap::{compare_models, score_alignment, AlignmentReport, BucketComparison};
use mimic::eval::{fit_alignment, shared_dictionary};
use mimic::model::Mode;
use mimic::{train, ContextSet, Corpus, DownsampleConfig, DownsamplePlan, EmbeddingSpace, Model, TrainConfig};

use super::skipgram::{train_skipgram, SkipgramConfig};
use super::synth::{generate, SynthConfig};

#[derive(Clone, Debug)]
pub struct DeskConfig {
    pub synth: SynthConfig,
    pub skipgram: SkipgramConfig,
    pub downsample: DownsampleConfig,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for DeskConfig {
    fn default() -> Self {
        DeskConfig {
            synth: SynthConfig::default(),
            skipgram: SkipgramConfig::default(),
            downsample: DownsampleConfig {
                words_per_bucket: 25,
                ..DownsampleConfig::default()
            },
            train: TrainConfig::default(),
            seed: 11,
        }
    }
}

pub struct DeskReport {
    pub tokens: u64,
    pub skipgram: AlignmentReport,
    pub fcm: AlignmentReport,
    pub am: AlignmentReport,
    /// AM against FCM.
    pub comparison: Vec<BucketComparison>,
    pub log: Vec<String>,
}

fn infer_all(model: &Model, corpus: &Corpus, space: &EmbeddingSpace, plan: &DownsamplePlan) -> EmbeddingSpace {
    let pairs = plan.words().filter_map(|w| {
        let contexts = ContextSet::new(w, corpus.extract_contexts(w, DEFAULT_WINDOW));
        model
            .infer(w, &contexts, space, Mode::Full)
            .ok()
            .map(|t| (w.to_string(), t.output))
    });
    EmbeddingSpace::from_pairs(space.dim(), pairs).unwrap()
}

pub fn run(config: &DeskConfig) -> DeskReport {
    let mut log = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |what: &str, log: &mut Vec<String>| {
        log.push(format!("{what}: {:.1}s", clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let full = Corpus::from_lines(generate(&config.synth).lines);
    lap(&format!("corpus ({} tokens)", full.token_count()), &mut log);
    let gold = train_skipgram(&full, &config.skipgram, &BTreeSet::new());
    lap("gold skip-gram", &mut log);

    let plan = DownsamplePlan::build(&full, &config.downsample, config.seed).unwrap();
    let reduced = full.downsampled(&plan).unwrap();
    let plan_words: BTreeSet<String> = plan.words().map(str::to_string).collect();
    let retrained = train_skipgram(&reduced, &config.skipgram, &plan_words);
    lap("retrained skip-gram", &mut log);

    let mut train_config = config.train.clone();
    train_config.exclude = plan_words.clone();
    train_config.sampler.seed = config.seed;
    train_config.attention = true;
    let am = train(&reduced, &retrained, &train_config).unwrap().model;
    lap("attentive mimicking", &mut log);
    train_config.attention = false;
    let fcm = train(&reduced, &retrained, &train_config).unwrap().model;
    lap("form-context model", &mut log);

    let am_space = infer_all(&am, &reduced, &retrained, &plan);
    let fcm_space = infer_all(&fcm, &reduced, &retrained, &plan);
    let dictionary = shared_dictionary(&retrained, &gold, plan.words());
    let map = fit_alignment(&retrained, &gold, &dictionary).unwrap();
    let report = DeskReport {
        tokens: full.token_count(),
        skipgram: score_alignment(&retrained, &gold, &map, &plan).unwrap(),
        fcm: score_alignment(&fcm_space, &gold, &map, &plan).unwrap(),
        am: score_alignment(&am_space, &gold, &map, &plan).unwrap(),
        comparison: compare_models(&am_space, &fcm_space, &gold, &map, &plan).unwrap(),
        log: Vec::new(),
    };
    lap("evaluation", &mut log);
    DeskReport { log, ..report }
}
