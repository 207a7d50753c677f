//! Tokenized corpora, context windows and frequency downsampling.
//!
//! The corpus format is one pre-tokenized, lowercased sentence per line with
//! tokens separated by spaces. Context windows never cross line boundaries.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 25;

/// An in-memory corpus with interned tokens and an occurrence index.
#[derive(Clone, Debug)]
pub struct Corpus {
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    counts: Vec<u64>,
    lines: Vec<Vec<u32>>,
    token_count: u64,
    // per word: (line, position) of every occurrence, in corpus order
    occurrences: Vec<Vec<(u32, u32)>>,
}

impl Corpus {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        Self::from_reader(BufReader::new(file))
    }

    /// Read a corpus; invalid UTF-8 is reported with its 1-based line number.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut builder = CorpusBuilder::default();
        for (i, line) in reader.split(b'\n').enumerate() {
            let line = line?;
            let line = std::str::from_utf8(&line).map_err(|_| Error::Utf8 { line: i + 1 })?;
            builder.push_line(line);
        }
        Ok(builder.finish())
    }

    pub fn from_lines<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut builder = CorpusBuilder::default();
        for line in lines {
            builder.push_line(line.as_ref());
        }
        builder.finish()
    }

    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    /// f(w); zero for unknown words.
    pub fn frequency(&self, word: &str) -> u64 {
        self.word_id(word).map_or(0, |id| self.counts[id as usize])
    }

    /// All `(word, count)` pairs in first-occurrence order.
    pub fn frequencies(&self) -> impl Iterator<Item = (&str, u64)> {
        self.vocab.iter().zip(&self.counts).map(|(w, &c)| (w.as_str(), c))
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn word_id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.vocab[id as usize]
    }

    pub fn lines(&self) -> &[Vec<u32>] {
        &self.lines
    }

    pub fn line_text(&self, line: usize) -> String {
        self.lines[line]
            .iter()
            .map(|&id| self.word(id))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `(line, position)` of every occurrence of `word`, in corpus order.
    pub fn occurrences(&self, word: &str) -> &[(u32, u32)] {
        self.word_id(word).map_or(&[][..], |id| &self.occurrences[id as usize])
    }

    /// Token ids of the window around one occurrence, the occurrence itself removed.
    pub fn window_ids(&self, line: u32, position: u32, window: usize) -> Vec<u32> {
        let tokens = &self.lines[line as usize];
        let pos = position as usize;
        let start = pos.saturating_sub(window);
        let end = (pos + 1 + window).min(tokens.len());
        let mut out = Vec::with_capacity(end - start - 1);
        out.extend_from_slice(&tokens[start..pos]);
        out.extend_from_slice(&tokens[pos + 1..end]);
        out
    }

    /// One context per occurrence of `word`, in corpus order. Unknown words
    /// yield no contexts; contexts may be empty when the word stands alone.
    pub fn extract_contexts(&self, word: &str, window: usize) -> Vec<Context> {
        self.occurrences(word)
            .iter()
            .map(|&(line, pos)| self.context_from_ids(&self.window_ids(line, pos, window)))
            .collect()
    }

    pub fn context_from_ids(&self, ids: &[u32]) -> Context {
        Context::new(ids.iter().map(|&id| self.word(id).to_string()).collect())
    }

    /// Sample up to `count` nonempty contexts of `word` without replacement.
    ///
    /// When fewer contexts exist, all of them are returned, unless `pad` is
    /// set, in which case the remainder is drawn with replacement.
    pub fn sample_context_set(
        &self,
        word: &str,
        count: usize,
        window: usize,
        seed: u64,
        pad: bool,
    ) -> Result<ContextSet> {
        if count == 0 {
            return Err(Error::Invalid("context count must be at least 1".into()));
        }
        let available: Vec<Context> = self
            .extract_contexts(word, window)
            .into_iter()
            .filter(|c| !c.is_empty())
            .collect();
        if available.is_empty() {
            return Err(Error::NoContexts(word.to_string()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = sample_indices(&mut rng, available.len(), count, pad);
        Ok(ContextSet {
            word: word.to_string(),
            contexts: picked.into_iter().map(|i| available[i].clone()).collect(),
        })
    }

    /// Build the reduced corpus described by `plan` without going through a file.
    pub fn downsampled(&self, plan: &DownsamplePlan) -> Result<Corpus> {
        let mut state = Downsampler::new(plan);
        let mut builder = CorpusBuilder::default();
        for tokens in &self.lines {
            let kept: Vec<&str> = state.filter_line(tokens.iter().map(|&id| self.word(id)));
            builder.push_tokens(kept);
        }
        state.finish()?;
        Ok(builder.finish())
    }
}

/// Draw `count` indices from `0..available`; see [`Corpus::sample_context_set`].
pub(crate) fn sample_indices<R: Rng>(rng: &mut R, available: usize, count: usize, pad: bool) -> Vec<usize> {
    if count <= available {
        let mut picked = index::sample(rng, available, count).into_vec();
        picked.sort_unstable();
        picked
    } else {
        let mut picked: Vec<usize> = (0..available).collect();
        if pad {
            picked.extend((available..count).map(|_| rng.random_range(0..available)));
        }
        picked
    }
}

#[derive(Default)]
struct CorpusBuilder {
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    counts: Vec<u64>,
    lines: Vec<Vec<u32>>,
    occurrences: Vec<Vec<(u32, u32)>>,
    token_count: u64,
}

impl CorpusBuilder {
    fn push_line(&mut self, line: &str) {
        let line = line.strip_suffix('\r').unwrap_or(line);
        self.push_tokens(line.split_whitespace());
    }

    fn push_tokens<'a>(&mut self, tokens: impl IntoIterator<Item = &'a str>) {
        let line_no = self.lines.len() as u32;
        let mut ids = Vec::new();
        for token in tokens {
            let id = match self.index.get(token) {
                Some(&id) => id,
                None => {
                    let id = self.vocab.len() as u32;
                    self.vocab.push(token.to_string());
                    self.index.insert(token.to_string(), id);
                    self.counts.push(0);
                    self.occurrences.push(Vec::new());
                    id
                }
            };
            self.counts[id as usize] += 1;
            self.occurrences[id as usize].push((line_no, ids.len() as u32));
            ids.push(id);
        }
        self.token_count += ids.len() as u64;
        self.lines.push(ids);
    }

    fn finish(self) -> Corpus {
        Corpus {
            vocab: self.vocab,
            index: self.index,
            counts: self.counts,
            lines: self.lines,
            token_count: self.token_count,
            occurrences: self.occurrences,
        }
    }
}

/// The words around one occurrence of a target, the target token removed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Context {
    tokens: Vec<String>,
}

impl Context {
    pub fn new(tokens: Vec<String>) -> Self {
        Context { tokens }
    }

    /// Split a whitespace-separated sentence into a context.
    pub fn from_text(text: &str) -> Self {
        Context::new(text.split_whitespace().map(str::to_string).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextSet {
    pub word: String,
    pub contexts: Vec<Context>,
}

impl ContextSet {
    /// Empty contexts are dropped.
    pub fn new(word: impl Into<String>, contexts: impl IntoIterator<Item = Context>) -> Self {
        ContextSet {
            word: word.into(),
            contexts: contexts.into_iter().filter(|c| !c.is_empty()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DownsampleConfig {
    pub buckets: usize,
    pub words_per_bucket: usize,
    pub min_occurrences: u64,
    pub min_length: usize,
}

impl Default for DownsampleConfig {
    fn default() -> Self {
        DownsampleConfig {
            buckets: 8,
            words_per_bucket: 125,
            min_occurrences: 1000,
            min_length: 2,
        }
    }
}

impl DownsampleConfig {
    pub fn total_words(&self) -> usize {
        self.buckets * self.words_per_bucket
    }

    /// Whether `word` may be chosen for downsampling, frequency aside.
    pub fn is_eligible_form(&self, word: &str) -> bool {
        word.chars().count() >= self.min_length && word.chars().all(char::is_alphabetic)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanEntry {
    pub word: String,
    pub bucket: usize,
    /// Sorted indices (into the word's occurrences in corpus order) that survive.
    pub kept: Vec<usize>,
    /// Frequency in the source corpus; unknown for plans read from disk.
    pub source_frequency: Option<u64>,
}

/// Which words are reduced to how many occurrences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DownsamplePlan {
    entries: Vec<PlanEntry>,
}

pub fn target_count(bucket: usize) -> usize {
    1 << bucket
}

impl DownsamplePlan {
    /// Pick words, spread them evenly over buckets, and choose `2^i`
    /// surviving occurrences for every word in bucket `i`.
    pub fn build(corpus: &Corpus, config: &DownsampleConfig, seed: u64) -> Result<Self> {
        if config.buckets == 0 || config.words_per_bucket == 0 {
            return Err(Error::Invalid("plan needs at least one bucket and word".into()));
        }
        let largest = target_count(config.buckets - 1) as u64;
        if config.min_occurrences < largest {
            return Err(Error::Invalid(format!(
                "min_occurrences {} is below the largest bucket size {largest}",
                config.min_occurrences
            )));
        }
        let mut eligible: Vec<(&str, u64)> = corpus
            .frequencies()
            .filter(|&(w, f)| f >= config.min_occurrences && config.is_eligible_form(w))
            .collect();
        let needed = config.total_words();
        if eligible.len() < needed {
            return Err(Error::NotEnoughWords {
                needed,
                found: eligible.len(),
            });
        }
        eligible.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        eligible.shuffle(&mut rng);
        eligible.truncate(needed);

        let mut entries = Vec::with_capacity(needed);
        for (bucket, chunk) in eligible.chunks(config.words_per_bucket).enumerate() {
            for &(word, freq) in chunk {
                let mut kept = index::sample(&mut rng, freq as usize, target_count(bucket)).into_vec();
                kept.sort_unstable();
                entries.push(PlanEntry {
                    word: word.to_string(),
                    bucket,
                    kept,
                    source_frequency: Some(freq),
                });
            }
        }
        Ok(Self::from_entries(entries))
    }

    pub fn from_entries(mut entries: Vec<PlanEntry>) -> Self {
        entries.sort_by(|a, b| (a.bucket, &a.word).cmp(&(b.bucket, &b.word)));
        DownsamplePlan { entries }
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_buckets(&self) -> usize {
        self.entries.iter().map(|e| e.bucket + 1).max().unwrap_or(0)
    }

    pub fn bucket_of(&self, word: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.word == word).map(|e| e.bucket)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.word.as_str())
    }

    pub fn words_in_bucket(&self, bucket: usize) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(move |e| e.bucket == bucket)
            .map(|e| e.word.as_str())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(lineno, "expected word<TAB>bucket<TAB>indices"));
            }
            let bucket: usize = fields[1]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad bucket `{}`", fields[1])))?;
            let kept = fields[2]
                .split(',')
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::parse(lineno, "bad occurrence index"))?;
            if kept.len() != target_count(bucket) || kept.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::parse(
                    lineno,
                    format!("bucket {bucket} needs {} increasing indices", target_count(bucket)),
                ));
            }
            entries.push(PlanEntry {
                word: fields[0].to_string(),
                bucket,
                kept,
                source_frequency: None,
            });
        }
        Ok(Self::from_entries(entries))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read_from(BufReader::new(file))
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for e in &self.entries {
            let kept: Vec<String> = e.kept.iter().map(usize::to_string).collect();
            writeln!(writer, "{}\t{}\t{}", e.word, e.bucket, kept.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::file(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write_to(&mut writer)?;
        writer.flush().map_err(|e| Error::file(path, e))
    }
}

/// What [`apply_downsample`] did.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DownsampleSummary {
    pub lines: usize,
    pub tokens_in: u64,
    pub tokens_removed: u64,
    pub bucket_sizes: Vec<usize>,
}

impl fmt::Display for DownsampleSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lines\t{}", self.lines)?;
        writeln!(f, "tokens_in\t{}", self.tokens_in)?;
        writeln!(f, "tokens_removed\t{}", self.tokens_removed)?;
        writeln!(f, "tokens_out\t{}", self.tokens_in - self.tokens_removed)?;
        for (bucket, size) in self.bucket_sizes.iter().enumerate() {
            writeln!(f, "bucket_{}\t{}\t{}", bucket, target_count(bucket), size)?;
        }
        Ok(())
    }
}

/// Stream `reader` to `writer`, deleting every occurrence of a plan word
/// that is not in its retained set. Other tokens and line structure are kept.
pub fn apply_downsample<R: BufRead, W: Write>(
    reader: R,
    plan: &DownsamplePlan,
    mut writer: W,
) -> Result<DownsampleSummary> {
    let mut state = Downsampler::new(plan);
    let mut lines = 0;
    for (i, line) in reader.split(b'\n').enumerate() {
        let line = line?;
        let line = std::str::from_utf8(&line).map_err(|_| Error::Utf8 { line: i + 1 })?;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let kept = state.filter_line(line.split_whitespace());
        writeln!(writer, "{}", kept.join(" "))?;
        lines += 1;
    }
    let mut summary = state.finish()?;
    summary.lines = lines;
    Ok(summary)
}

pub fn apply_downsample_file(
    corpus_path: impl AsRef<Path>,
    plan: &DownsamplePlan,
    out_path: impl AsRef<Path>,
) -> Result<DownsampleSummary> {
    let (inp, out) = (corpus_path.as_ref(), out_path.as_ref());
    let reader = BufReader::new(File::open(inp).map_err(|e| Error::file(inp, e))?);
    let mut writer = BufWriter::new(File::create(out).map_err(|e| Error::file(out, e))?);
    let summary = apply_downsample(reader, plan, &mut writer)?;
    writer.flush().map_err(|e| Error::file(out, e))?;
    Ok(summary)
}

struct Downsampler<'a> {
    plan: &'a DownsamplePlan,
    slots: HashMap<&'a str, usize>,
    seen: Vec<usize>,
    cursor: Vec<usize>,
    tokens_in: u64,
    tokens_removed: u64,
}

impl<'a> Downsampler<'a> {
    fn new(plan: &'a DownsamplePlan) -> Self {
        let slots = plan
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.word.as_str(), i))
            .collect();
        Downsampler {
            plan,
            slots,
            seen: vec![0; plan.len()],
            cursor: vec![0; plan.len()],
            tokens_in: 0,
            tokens_removed: 0,
        }
    }

    fn filter_line<'t>(&mut self, tokens: impl IntoIterator<Item = &'t str>) -> Vec<&'t str> {
        let mut out = Vec::new();
        for token in tokens {
            self.tokens_in += 1;
            if let Some(&slot) = self.slots.get(token) {
                let occurrence = self.seen[slot];
                self.seen[slot] += 1;
                let kept = &self.plan.entries[slot].kept;
                if kept.get(self.cursor[slot]) == Some(&occurrence) {
                    self.cursor[slot] += 1;
                } else {
                    self.tokens_removed += 1;
                    continue;
                }
            }
            out.push(token);
        }
        out
    }

    fn finish(self) -> Result<DownsampleSummary> {
        for (slot, entry) in self.plan.entries.iter().enumerate() {
            let seen = self.seen[slot] as u64;
            if let Some(expected) = entry.source_frequency {
                if seen != expected {
                    return Err(Error::PlanMismatch(format!(
                        "`{}` occurs {seen} times, plan was built for {expected}",
                        entry.word
                    )));
                }
            }
            if self.cursor[slot] != entry.kept.len() {
                return Err(Error::PlanMismatch(format!(
                    "`{}` occurs {seen} times, plan retains occurrence {}",
                    entry.word,
                    entry.kept.last().copied().unwrap_or(0)
                )));
            }
        }
        let mut bucket_sizes = vec![0; self.plan.num_buckets()];
        for e in &self.plan.entries {
            bucket_sizes[e.bucket] += 1;
        }
        Ok(DownsampleSummary {
            lines: 0,
            tokens_in: self.tokens_in,
            tokens_removed: self.tokens_removed,
            bucket_sizes,
        })
    }
}
