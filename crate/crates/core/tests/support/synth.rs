//! Topic-structured synthetic corpus.
//!
//! Every line is about one subtopic of one topic. Content words belong to
//! exactly one subtopic and most of them share a topic-specific suffix, so
//! both contexts and surface forms carry the meaning of a word. Each word
//! also has a private collocate, a detail only many occurrences reveal. A
//! fraction of lines are noise whose content words come from random topics,
//! which makes some contexts of a word uninformative.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub tokens: usize,
    pub topics: usize,
    pub words_per_topic: usize,
    pub subtopics: usize,
    /// Chance a content word comes from the line's subtopic rather than its topic at large.
    pub subtopic_prob: f64,
    /// Chance a content word is followed by one of its collocates.
    pub collocate_prob: f64,
    /// Size of each word's private collocate set, drawn from all topics.
    pub collocates: usize,
    pub function_words: usize,
    pub zipf: f64,
    pub line_len: (usize, usize),
    pub function_prob: f64,
    /// Per-token chance of a content word from another topic.
    pub stray_prob: f64,
    /// Chance of a line whose content words all come from random topics.
    pub noise_line_prob: f64,
    /// Chance that a content word carries its topic suffix.
    pub marked_prob: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            tokens: 10_000_000,
            topics: 40,
            words_per_topic: 150,
            subtopics: 5,
            subtopic_prob: 0.6,
            collocate_prob: 0.5,
            collocates: 20,
            function_words: 60,
            zipf: 0.9,
            line_len: (10, 30),
            function_prob: 0.35,
            stray_prob: 0.2,
            noise_line_prob: 0.1,
            marked_prob: 0.7,
            seed: 7,
        }
    }
}

pub struct SynthCorpus {
    pub lines: Vec<String>,
    pub topic_of: HashMap<String, usize>,
}

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr",
];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

fn syllable<R: Rng>(rng: &mut R) -> String {
    format!(
        "{}{}",
        ONSETS[rng.random_range(0..ONSETS.len())],
        VOWELS[rng.random_range(0..VOWELS.len())]
    )
}

fn fresh<R: Rng>(rng: &mut R, used: &mut HashSet<String>, make: impl Fn(&mut R) -> String) -> String {
    for _ in 0..10_000 {
        let w = make(rng);
        if used.insert(w.clone()) {
            return w;
        }
    }
    panic!("word space exhausted; used {} words", used.len())
}

fn zipf_table(n: usize, s: f64) -> WeightedAliasIndex<f64> {
    WeightedAliasIndex::new((1..=n).map(|r| (r as f64).powf(-s)).collect()).unwrap()
}

pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut used = HashSet::new();
    let suffixes: Vec<String> = (0..config.topics)
        .map(|_| fresh(&mut rng, &mut used, |r| format!("{}{}n", syllable(r), syllable(r))))
        .collect();
    let function: Vec<String> = (0..config.function_words)
        .map(|_| {
            fresh(&mut rng, &mut used, |r| {
                if r.random_bool(0.5) {
                    syllable(r)
                } else {
                    syllable(r) + &syllable(r)
                }
            })
        })
        .collect();
    let mut topic_of = HashMap::new();
    let topics: Vec<Vec<String>> = suffixes
        .iter()
        .enumerate()
        .map(|(t, suffix)| {
            let words: Vec<String> = (0..config.words_per_topic)
                .map(|_| {
                    let marked = rng.random_bool(config.marked_prob);
                    fresh(&mut rng, &mut used, |r| {
                        if marked {
                            syllable(r) + &syllable(r) + suffix
                        } else {
                            syllable(r) + &syllable(r) + &syllable(r)
                        }
                    })
                })
                .collect();
            for w in &words {
                topic_of.insert(w.clone(), t);
            }
            words
        })
        .collect();

    // word i of a topic belongs to subtopic i % subtopics
    let per_sub = config.words_per_topic / config.subtopics;
    let collocate: Vec<Vec<Vec<(usize, usize)>>> = (0..config.topics)
        .map(|_| {
            (0..config.words_per_topic)
                .map(|_| {
                    (0..config.collocates)
                        .map(|_| {
                            (
                                rng.random_range(0..config.topics),
                                rng.random_range(0..config.words_per_topic),
                            )
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let content = zipf_table(config.words_per_topic, config.zipf);
    let sub_content = zipf_table(per_sub, config.zipf);
    let function_dist = zipf_table(config.function_words, 1.0);
    let mut lines = Vec::new();
    let mut emitted = 0;
    let mut tokens = Vec::new();
    while emitted < config.tokens {
        let len = rng.random_range(config.line_len.0..=config.line_len.1);
        let topic = rng.random_range(0..config.topics);
        let subtopic = rng.random_range(0..config.subtopics);
        let noise = rng.random_bool(config.noise_line_prob);
        tokens.clear();
        while tokens.len() < len {
            let u: f64 = rng.random();
            if u < config.function_prob {
                tokens.push(function[function_dist.sample(&mut rng)].as_str());
                continue;
            }
            let (t, i) = if noise || u < config.function_prob + config.stray_prob {
                (rng.random_range(0..config.topics), content.sample(&mut rng))
            } else if rng.random_bool(config.subtopic_prob) {
                (topic, sub_content.sample(&mut rng) * config.subtopics + subtopic)
            } else {
                (topic, content.sample(&mut rng))
            };
            tokens.push(topics[t][i].as_str());
            if !noise && rng.random_bool(config.collocate_prob) {
                let (ct, ci) = collocate[t][i][rng.random_range(0..config.collocates)];
                tokens.push(topics[ct][ci].as_str());
            }
        }
        let len = tokens.len();
        emitted += len;
        lines.push(tokens.join(" "));
    }
    lines.shuffle(&mut rng);
    SynthCorpus { lines, topic_of }
}
