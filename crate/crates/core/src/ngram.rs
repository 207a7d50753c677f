//! Character n-gram features for the surface-form embedding.

use std::collections::{BTreeMap, HashMap, HashSet};

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::embedding::Vector;

const BOW: char = '<';
const EOW: char = '>';

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NgramConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Minimum number of distinct training words an n-gram must occur in.
    pub min_count: usize,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            n_min: 3,
            n_max: 5,
            min_count: 3,
        }
    }
}

/// All character n-grams of `<word>`, shortest first, left to right,
/// duplicates kept.
pub fn extract_ngrams(word: &str, config: &NgramConfig) -> Vec<String> {
    let chars: Vec<char> = std::iter::once(BOW)
        .chain(word.chars())
        .chain(std::iter::once(EOW))
        .collect();
    let mut out = Vec::new();
    for n in config.n_min..=config.n_max {
        if n == 0 || n > chars.len() {
            continue;
        }
        out.extend(chars.windows(n).map(|w| w.iter().collect::<String>()));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NgramVocab {
    config: NgramConfig,
    ngrams: Vec<String>,
    index: HashMap<String, usize>,
}

impl NgramVocab {
    /// Index every n-gram that occurs in at least `min_count` distinct
    /// words. Ids follow lexicographic order of the n-grams.
    pub fn build<I, S>(words: I, config: NgramConfig) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut distinct: HashSet<String> = HashSet::new();
        let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
        for word in words {
            let word = word.as_ref();
            if !distinct.insert(word.to_string()) {
                continue;
            }
            let unique: HashSet<String> = extract_ngrams(word, &config).into_iter().collect();
            for g in unique {
                *doc_freq.entry(g).or_default() += 1;
            }
        }
        let ngrams = doc_freq
            .into_iter()
            .filter(|&(_, c)| c >= config.min_count)
            .map(|(g, _)| g)
            .collect();
        Self::from_ngrams(config, ngrams)
    }

    /// Rebuild a vocabulary whose ids are the positions in `ngrams`.
    pub fn from_ngrams(config: NgramConfig, ngrams: Vec<String>) -> Self {
        let index = ngrams.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        NgramVocab { config, ngrams, index }
    }

    pub fn config(&self) -> &NgramConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.ngrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }

    pub fn ngrams(&self) -> &[String] {
        &self.ngrams
    }

    pub fn id(&self, ngram: &str) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    /// Ids of the word's in-vocabulary n-grams, with multiplicity.
    pub fn ids_for_word(&self, word: &str) -> Vec<usize> {
        extract_ngrams(word, &self.config)
            .iter()
            .filter_map(|g| self.id(g))
            .collect()
    }
}

/// Rows drawn i.i.d. from N(0, std²).
pub fn init_table<R: Rng>(rows: usize, dim: usize, std: f64, rng: &mut R) -> Array2<f64> {
    let normal = Normal::new(0.0, std).expect("valid standard deviation");
    Array2::from_shape_simple_fn((rows, dim), || normal.sample(rng))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormEmbedding {
    pub vector: Vector,
    /// Contributing table rows, with multiplicity.
    pub ids: Vec<usize>,
}

impl FormEmbedding {
    /// No n-gram of the word is known.
    pub fn is_formless(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Mean of the table rows of the word's known n-grams; the zero vector with
/// no contributing ids when none is known.
pub fn form_embedding(word: &str, vocab: &NgramVocab, table: ArrayView2<'_, f64>) -> FormEmbedding {
    let ids = vocab.ids_for_word(word);
    let mut vector = Vector::zeros(table.ncols());
    for &id in &ids {
        vector += &table.row(id);
    }
    if !ids.is_empty() {
        vector /= ids.len() as f64;
    }
    FormEmbedding { vector, ids }
}
