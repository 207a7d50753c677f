use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context as _, Result};
use clap::{Args, ValueEnum};
use mimic::corpus::{apply_downsample_file, DownsampleConfig, DownsamplePlan, DEFAULT_WINDOW};
use mimic::embedding::write_vector_line;
use mimic::eval::align::{fit_alignment, load_dictionary, shared_dictionary, AlignmentMap};
use mimic::eval::probe::{eval_probe, train_probe, FrequencyBin, ProbeConfig, ProbeDataset};
use mimic::eval::similarity::{eval_similarity, load_context_file, SimilarityBenchmark};
use mimic::eval::vecmap::{compare_models, format_comparison_table, format_report_table, score_alignment};
use mimic::model::{combine_with_original, Mode};
use mimic::ngram::NgramConfig;
use mimic::optim::AdamConfig;
use mimic::training::format_log;
use mimic::{train, Checkpoint, Context, ContextSet, Corpus, EmbeddingSpace, SamplerConfig, TrainConfig};

use crate::manifest::{beside, Manifest};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Full,
    ContextOnly,
    FormOnly,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::ContextOnly => Mode::ContextOnly,
            ModeArg::FormOnly => Mode::FormOnly,
        }
    }
}

fn require_file(path: &Path) -> Result<()> {
    ensure!(path.is_file(), "input file not found: {}", path.display());
    Ok(())
}

fn require_files<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
    paths.into_iter().try_for_each(require_file)
}

fn prepare_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
        }
        _ => Ok(()),
    }
}

fn load_space(path: &Path) -> Result<EmbeddingSpace> {
    Ok(EmbeddingSpace::load_text(path)?.with_source(path.display().to_string()))
}

/// Print `text` and, with `--out`, also write it plus a manifest.
fn emit(text: &str, out: Option<&Path>, manifest: &mut Manifest) -> Result<()> {
    print!("{text}");
    if let Some(out) = out {
        prepare_output(out)?;
        fs::write(out, text).with_context(|| format!("cannot write {}", out.display()))?;
        manifest.output("report", out);
        manifest.save(&beside(out))?;
    }
    Ok(())
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct CountArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Leave out words seen fewer times than this.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `word<TAB>count`, most frequent first, ties by word.
pub fn count(args: &CountArgs) -> Result<()> {
    require_file(&args.corpus)?;
    let corpus = Corpus::from_path(&args.corpus)?;
    let mut rows: Vec<(&str, u64)> = corpus.frequencies().filter(|&(_, c)| c >= args.min_count).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let mut text = format!("#tokens\t{}\n", corpus.token_count());
    for (w, c) in rows {
        writeln!(text, "{w}\t{c}").unwrap();
    }
    let mut manifest = Manifest::new("count");
    manifest
        .setting("min_count", args.min_count)
        .input("corpus", &args.corpus);
    emit(&text, args.out.as_deref(), &mut manifest)
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct DownsampleArgs {
    /// Corpus to reduce, one sentence per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Receives plan.tsv, corpus.txt, summary.txt and manifest.txt.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub buckets: usize,
    #[arg(long, default_value_t = 125)]
    pub words_per_bucket: usize,
    #[arg(long, default_value_t = 1000)]
    pub min_occurrences: u64,
    #[arg(long, default_value_t = 2)]
    pub min_length: usize,
    /// Apply an existing plan instead of drawing a new one.
    #[arg(long)]
    pub plan: Option<PathBuf>,
}

pub fn downsample(args: &DownsampleArgs) -> Result<()> {
    require_files([args.corpus.as_path()].into_iter().chain(args.plan.as_deref()))?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let mut manifest = Manifest::new("downsample");
    manifest.setting("seed", args.seed).input("corpus", &args.corpus);

    let plan = match &args.plan {
        Some(path) => {
            manifest.input("plan", path);
            DownsamplePlan::load(path)?
        }
        None => {
            let config = DownsampleConfig {
                buckets: args.buckets,
                words_per_bucket: args.words_per_bucket,
                min_occurrences: args.min_occurrences,
                min_length: args.min_length,
            };
            manifest
                .setting("buckets", args.buckets)
                .setting("words_per_bucket", args.words_per_bucket)
                .setting("min_occurrences", args.min_occurrences)
                .setting("min_length", args.min_length);
            DownsamplePlan::build(&Corpus::from_path(&args.corpus)?, &config, args.seed)?
        }
    };
    let plan_path = args.out_dir.join("plan.tsv");
    let corpus_path = args.out_dir.join("corpus.txt");
    let summary_path = args.out_dir.join("summary.txt");
    plan.save(&plan_path)?;
    let summary = apply_downsample_file(&args.corpus, &plan, &corpus_path)?;
    fs::write(&summary_path, summary.to_string())
        .with_context(|| format!("cannot write {}", summary_path.display()))?;
    print!("{summary}");
    manifest
        .output("plan", &plan_path)
        .output("corpus", &corpus_path)
        .output("summary", &summary_path)
        .save(&args.out_dir.join("manifest.txt"))
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct TrainArgs {
    /// Corpus that contexts are drawn from.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Embeddings to mimic; also embeds context words.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub contexts_min: usize,
    #[arg(long, default_value_t = 64)]
    pub contexts_max: usize,
    #[arg(long, default_value_t = 100)]
    pub min_frequency: u64,
    #[arg(long, default_value_t = 5)]
    pub per_epoch_cap: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    /// Minimum number of distinct training words an n-gram must occur in.
    #[arg(long, default_value_t = 3)]
    pub ngram_min_count: usize,
    /// Average contexts uniformly (form-context model).
    #[arg(long)]
    pub no_attention: bool,
    /// Downsampling plan; its words are never used as targets.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Use the plan words as targets instead of excluding them.
    #[arg(long, requires = "plan")]
    pub include_targets: bool,
    /// Instances per epoch for each plan word with --include-targets.
    #[arg(long, default_value_t = 5)]
    pub pairs_per_word: usize,
    /// Write `epoch<TAB>mean loss` lines here.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

pub fn train_cmd(args: &TrainArgs) -> Result<()> {
    require_files(
        [args.corpus.as_path(), args.embeddings.as_path()]
            .into_iter()
            .chain(args.plan.as_deref()),
    )?;
    prepare_output(&args.out)?;
    let plan_words: BTreeSet<String> = match &args.plan {
        Some(p) => DownsamplePlan::load(p)?.words().map(str::to_string).collect(),
        None => BTreeSet::new(),
    };
    let (exclude, targets) = if args.include_targets {
        (BTreeSet::new(), plan_words)
    } else {
        (plan_words, BTreeSet::new())
    };
    let config = TrainConfig {
        sampler: SamplerConfig {
            min_frequency: args.min_frequency,
            per_epoch_cap: args.per_epoch_cap,
            context_min: args.contexts_min,
            context_max: args.contexts_max,
            epochs: args.epochs,
            window: args.window,
            seed: args.seed,
        },
        adam: AdamConfig {
            lr: args.lr,
            ..AdamConfig::default()
        },
        batch_size: args.batch_size,
        attention: !args.no_attention,
        ngram: NgramConfig {
            min_count: args.ngram_min_count,
            ..NgramConfig::default()
        },
        exclude,
        targets,
        pairs_per_word: args.pairs_per_word,
    };
    let corpus = Corpus::from_path(&args.corpus)?;
    let space = load_space(&args.embeddings)?;
    let checkpoint = train(&corpus, &space, &config)?;
    checkpoint.save(&args.out)?;

    let mut manifest = Manifest::new("train");
    manifest
        .setting("seed", args.seed)
        .setting("epochs", args.epochs)
        .setting("contexts_min", args.contexts_min)
        .setting("contexts_max", args.contexts_max)
        .setting("min_frequency", args.min_frequency)
        .setting("per_epoch_cap", args.per_epoch_cap)
        .setting("window", args.window)
        .setting("batch_size", args.batch_size)
        .setting("lr", args.lr)
        .setting("ngram_min_count", args.ngram_min_count)
        .setting("attention", !args.no_attention)
        .setting("include_targets", args.include_targets)
        .input("corpus", &args.corpus)
        .input("embeddings", &args.embeddings);
    if let Some(plan) = &args.plan {
        manifest.input("plan", plan);
    }
    manifest.output("checkpoint", &args.out);
    if let Some(log) = &args.log {
        prepare_output(log)?;
        fs::write(log, format_log(&checkpoint.epoch_losses))
            .with_context(|| format!("cannot write {}", log.display()))?;
        manifest.output("log", log);
    }
    manifest.save(&beside(&args.out))?;
    if let Some(last) = checkpoint.epoch_losses.last() {
        println!("epochs\t{}\nfinal_loss\t{last}", checkpoint.epochs_completed);
    } else {
        println!("epochs\t0");
    }
    Ok(())
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct InferArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Embeddings of context words (the space the model was trained on).
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Infer a single word; --contexts then holds one sentence per line.
    #[arg(long)]
    pub word: Option<String>,
    /// Sentences. Without --word, lines are `word<TAB>sentence`.
    #[arg(long)]
    pub contexts: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    pub mode: ModeArg,
    /// Write attention weights (`index<TAB>weight`) here; single word only.
    #[arg(long, requires = "word")]
    pub trace: Option<PathBuf>,
    /// Blend with the original embedding below this frequency (requires --corpus).
    #[arg(long, requires = "corpus")]
    pub f_cap: Option<f64>,
    /// Corpus giving word frequencies for --f-cap.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Write embeddings here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_sentences(path: &Path, word: &str) -> Result<Vec<Context>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.with_context(|| format!("cannot read {}", path.display()))?;
        let tokens: Vec<String> = line
            .split_whitespace()
            .filter(|t| *t != word)
            .map(str::to_string)
            .collect();
        if !tokens.is_empty() {
            out.push(Context::new(tokens));
        }
    }
    Ok(out)
}

pub fn infer(args: &InferArgs) -> Result<()> {
    require_files(
        [args.checkpoint.as_path(), args.embeddings.as_path()]
            .into_iter()
            .chain(args.contexts.as_deref())
            .chain(args.corpus.as_deref()),
    )?;
    if args.word.is_none() && args.contexts.is_none() {
        bail!("give --word, --contexts, or both");
    }
    if let Some(out) = &args.out {
        prepare_output(out)?;
    }
    let model = Checkpoint::load(&args.checkpoint)?.model;
    let space = load_space(&args.embeddings)?;
    let mode = Mode::from(args.mode);

    let requests: BTreeMap<String, Vec<Context>> = match (&args.word, &args.contexts) {
        (Some(word), Some(path)) => BTreeMap::from([(word.clone(), read_sentences(path, word)?)]),
        (Some(word), None) => BTreeMap::from([(word.clone(), Vec::new())]),
        (None, Some(path)) => load_context_file(path)?,
        (None, None) => unreachable!(),
    };
    let frequencies: Option<HashMap<String, u64>> = match &args.corpus {
        Some(path) => Some(
            Corpus::from_path(path)?
                .frequencies()
                .map(|(w, f)| (w.to_string(), f))
                .collect(),
        ),
        None => None,
    };

    let mut results = Vec::with_capacity(requests.len());
    for (word, contexts) in requests {
        let trace = model
            .infer(&word, &ContextSet::new(word.as_str(), contexts), &space, mode)
            .with_context(|| format!("cannot infer `{word}`"))?;
        if let Some(path) = &args.trace {
            prepare_output(path)?;
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            trace.write_weights(&mut w)?;
            w.flush()?;
        }
        let vector = match (args.f_cap, &frequencies) {
            (Some(cap), Some(freqs)) => {
                let f = freqs.get(&word).copied().unwrap_or(0) as f64;
                combine_with_original(trace.output.view(), space.get(&word), f, cap)
                    .with_context(|| format!("cannot blend `{word}`"))?
            }
            _ => trace.output,
        };
        results.push((word, vector));
    }

    let mut text = Vec::new();
    if args.word.is_some() {
        let (word, vector) = &results[0];
        write_vector_line(&mut text, word, vector.view())?;
    } else {
        EmbeddingSpace::from_pairs(model.dim(), results)?.write_text(&mut text)?;
    }
    match &args.out {
        Some(out) => {
            fs::write(out, &text).with_context(|| format!("cannot write {}", out.display()))?;
            let mut manifest = Manifest::new("infer");
            manifest.setting("mode", mode);
            if let Some(cap) = args.f_cap {
                manifest.setting("f_cap", cap);
            }
            manifest
                .input("checkpoint", &args.checkpoint)
                .input("embeddings", &args.embeddings);
            for (role, path) in [("contexts", &args.contexts), ("corpus", &args.corpus)] {
                if let Some(p) = path {
                    manifest.input(role, p);
                }
            }
            manifest.output("embeddings", out);
            if let Some(trace) = &args.trace {
                manifest.output("trace", trace);
            }
            manifest.save(&beside(out))?;
        }
        None => io::stdout().write_all(&text)?,
    }
    Ok(())
}

/// `name=path` pairs naming embedding files.
fn named(arg: &str) -> Result<(String, PathBuf)> {
    let (name, path) = arg
        .split_once('=')
        .with_context(|| format!("expected NAME=FILE, got `{arg}`"))?;
    ensure!(!name.is_empty(), "empty model name in `{arg}`");
    Ok((name.to_string(), PathBuf::from(path)))
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct AlignArgs {
    /// Embeddings trained on the full corpus.
    #[arg(long)]
    pub gold: PathBuf,
    /// Downsampling plan listing the evaluated words and their buckets.
    #[arg(long)]
    pub plan: PathBuf,
    /// Space the evaluated embeddings live in; its shared non-plan words form
    /// the alignment dictionary. Defaults to the first model.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Explicit `word<TAB>word` alignment dictionary.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Also write the report here, with a manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Aligned {
    gold: EmbeddingSpace,
    plan: DownsamplePlan,
    map: AlignmentMap,
}

fn align(args: &AlignArgs, first_model: &Path, manifest: &mut Manifest) -> Result<Aligned> {
    let reference_path = args.reference.as_deref().unwrap_or(first_model);
    let gold = load_space(&args.gold)?;
    let plan = DownsamplePlan::load(&args.plan)?;
    let reference = load_space(reference_path)?;
    let dictionary = match &args.dictionary {
        Some(path) => {
            manifest.input("dictionary", path);
            load_dictionary(path)?
        }
        None => shared_dictionary(&reference, &gold, plan.words()),
    };
    ensure!(!dictionary.is_empty(), "alignment dictionary is empty");
    let map = fit_alignment(&reference, &gold, &dictionary)?;
    manifest
        .input("gold", &args.gold)
        .input("plan", &args.plan)
        .input("reference", reference_path)
        .setting("dictionary_pairs", dictionary.len());
    Ok(Aligned { gold, plan, map })
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct EvalVecmapArgs {
    /// Embeddings to score, as NAME=FILE; repeat for several models.
    #[arg(long = "model", value_name = "NAME=FILE", required = true)]
    pub models: Vec<String>,
    #[command(flatten)]
    pub align: AlignArgs,
}

pub fn eval_vecmap(args: &EvalVecmapArgs) -> Result<()> {
    let models: Vec<(String, PathBuf)> = args.models.iter().map(|m| named(m)).collect::<Result<_>>()?;
    require_files(
        [args.align.gold.as_path(), args.align.plan.as_path()]
            .into_iter()
            .chain(args.align.reference.as_deref())
            .chain(args.align.dictionary.as_deref())
            .chain(models.iter().map(|(_, p)| p.as_path())),
    )?;
    let mut manifest = Manifest::new("eval-vecmap");
    let aligned = align(&args.align, &models[0].1, &mut manifest)?;
    let mut reports = Vec::with_capacity(models.len());
    for (name, path) in &models {
        let space = load_space(path)?;
        let report = score_alignment(&space, &aligned.gold, &aligned.map, &aligned.plan)
            .with_context(|| format!("scoring `{name}`"))?;
        for bucket in &report.buckets {
            if !bucket.skipped.is_empty() {
                log::warn!(
                    "{name}: {} words of bucket {} have no embedding",
                    bucket.skipped.len(),
                    bucket.occurrences
                );
            }
        }
        manifest.input(&format!("model.{name}"), path);
        reports.push((name.as_str(), report));
    }
    let rows: Vec<(&str, &_)> = reports.iter().map(|(n, r)| (*n, r)).collect();
    emit(&format_report_table(&rows), args.align.out.as_deref(), &mut manifest)
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct CompareArgs {
    /// First model, NAME=FILE; wins count for this one.
    #[arg(long, value_name = "NAME=FILE")]
    pub a: String,
    /// Second model, NAME=FILE.
    #[arg(long, value_name = "NAME=FILE")]
    pub b: String,
    #[command(flatten)]
    pub align: AlignArgs,
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let (a_name, a_path) = named(&args.a)?;
    let (b_name, b_path) = named(&args.b)?;
    require_files(
        [args.align.gold.as_path(), args.align.plan.as_path(), &a_path, &b_path]
            .into_iter()
            .chain(args.align.reference.as_deref())
            .chain(args.align.dictionary.as_deref()),
    )?;
    let mut manifest = Manifest::new("compare");
    let aligned = align(&args.align, &a_path, &mut manifest)?;
    let (a, b) = (load_space(&a_path)?, load_space(&b_path)?);
    let rows = compare_models(&a, &b, &aligned.gold, &aligned.map, &aligned.plan)?;
    manifest
        .input(&format!("model.{a_name}"), &a_path)
        .input(&format!("model.{b_name}"), &b_path);
    let text = format!("{a_name} vs {b_name}\n{}", format_comparison_table(&rows));
    emit(&text, args.align.out.as_deref(), &mut manifest)
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct EvalSimArgs {
    /// `word<TAB>word<TAB>score` lines.
    #[arg(long)]
    pub benchmark: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Infer embeddings for words listed in --contexts with this model.
    #[arg(long, requires = "contexts")]
    pub checkpoint: Option<PathBuf>,
    /// `word<TAB>sentence` lines for the words to infer.
    #[arg(long, requires = "checkpoint")]
    pub contexts: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn eval_sim(args: &EvalSimArgs) -> Result<()> {
    require_files(
        [args.benchmark.as_path(), args.embeddings.as_path()]
            .into_iter()
            .chain(args.checkpoint.as_deref())
            .chain(args.contexts.as_deref()),
    )?;
    let bench = SimilarityBenchmark::load(&args.benchmark)?;
    let space = load_space(&args.embeddings)?;
    let mut manifest = Manifest::new("eval-sim");
    manifest
        .input("benchmark", &args.benchmark)
        .input("embeddings", &args.embeddings);
    let model = match &args.checkpoint {
        Some(path) => {
            manifest.input("checkpoint", path);
            Some(Checkpoint::load(path)?.model)
        }
        None => None,
    };
    let contexts = match &args.contexts {
        Some(path) => {
            manifest.input("contexts", path).setting("mode", Mode::from(args.mode));
            load_context_file(path)?
        }
        None => BTreeMap::new(),
    };
    let mode = Mode::from(args.mode);
    let rho = eval_similarity(&bench, &space, |word| match (&model, contexts.get(word)) {
        (Some(model), Some(ctx)) => {
            let set = ContextSet::new(word, ctx.iter().cloned());
            Ok(Some(model.infer(word, &set, &space, mode)?.output))
        }
        _ => Ok(None),
    })?;
    emit(
        &format!("spearman\t{rho:.6}\npairs\t{}\n", bench.entries().len()),
        args.out.as_deref(),
        &mut manifest,
    )
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct ProbeArgs {
    /// `word<TAB>label[,label...]` training rows.
    #[arg(long)]
    pub train: PathBuf,
    /// Rows to evaluate on.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    /// Corpus giving word frequencies for --bins.
    #[arg(long, requires = "bins")]
    pub corpus: Option<PathBuf>,
    /// Ascending frequency bin edges, e.g. `0,10,100`; the last bin is open.
    #[arg(long, value_delimiter = ',', requires = "corpus")]
    pub bins: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn probe(args: &ProbeArgs) -> Result<()> {
    require_files(
        [args.train.as_path(), args.test.as_path(), args.embeddings.as_path()]
            .into_iter()
            .chain(args.corpus.as_deref()),
    )?;
    ensure!(
        args.bins.windows(2).all(|w| w[0] < w[1]),
        "--bins must be strictly ascending"
    );
    let space = load_space(&args.embeddings)?;
    let (train_set, test_set) = (ProbeDataset::load(&args.train)?, ProbeDataset::load(&args.test)?);
    let config = ProbeConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        adam: AdamConfig {
            lr: args.lr,
            ..AdamConfig::default()
        },
        seed: args.seed,
    };
    let probe = train_probe(&train_set, &space, &config)?;
    let frequencies: HashMap<String, u64> = match &args.corpus {
        Some(path) => Corpus::from_path(path)?
            .frequencies()
            .map(|(w, f)| (w.to_string(), f))
            .collect(),
        None => HashMap::new(),
    };
    let bins: Vec<FrequencyBin> = args
        .bins
        .iter()
        .enumerate()
        .map(|(i, &lo)| FrequencyBin {
            lo,
            hi: args.bins.get(i + 1).copied().unwrap_or(u64::MAX),
        })
        .collect();
    let report = eval_probe(&probe, &test_set, &space, &frequencies, &bins)?;

    let mut text = String::from("subset\tn\taccuracy\tmicro_f1\n");
    let mut row = |name: String, m: &mimic::eval::Metrics| {
        writeln!(text, "{name}\t{}\t{:.4}\t{:.4}", m.n, m.accuracy, m.micro_f1).unwrap();
    };
    row("all".into(), &report.overall);
    for (bin, m) in &report.bins {
        let hi = if bin.hi == u64::MAX {
            "inf".to_string()
        } else {
            bin.hi.to_string()
        };
        row(format!("[{},{hi})", bin.lo), m);
    }
    let mut manifest = Manifest::new("probe");
    manifest
        .setting("seed", args.seed)
        .setting("epochs", args.epochs)
        .input("train", &args.train)
        .input("test", &args.test)
        .input("embeddings", &args.embeddings);
    if let Some(c) = &args.corpus {
        manifest.input("corpus", c);
    }
    emit(&text, args.out.as_deref(), &mut manifest)
}
