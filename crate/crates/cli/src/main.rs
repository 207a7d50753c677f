//! `mimic`: downsample corpora, train and apply mimicking models, and run
//! every evaluation from the command line.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

use commands::{CompareArgs, CountArgs, DownsampleArgs, EvalSimArgs, EvalVecmapArgs, InferArgs, ProbeArgs, TrainArgs};

#[derive(Parser, Debug)]
#[command(
    name = "mimic",
    version,
    about = "Embeddings for rare words by mimicking a pre-trained space"
)]
struct Cli {
    /// Flat `key = value` file of flag defaults; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Word frequencies of a corpus.
    Count(CountArgs),
    /// Reduce chosen words to 1, 2, 4, ... occurrences.
    Downsample(DownsampleArgs),
    /// Train a mimicking model and write a checkpoint.
    Train(TrainArgs),
    /// Infer embeddings from contexts and surface form.
    Infer(InferArgs),
    /// Mean aligned cosine to gold embeddings per occurrence bucket.
    EvalVecmap(EvalVecmapArgs),
    /// Spearman correlation on a word-pair similarity benchmark.
    EvalSim(EvalSimArgs),
    /// Train and score a linear probe on embeddings.
    Probe(ProbeArgs),
    /// Per-bucket sign test between two models.
    Compare(CompareArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Count(a) => commands::count(a),
        Command::Downsample(a) => commands::downsample(a),
        Command::Train(a) => commands::train_cmd(a),
        Command::Infer(a) => commands::infer(a),
        Command::EvalVecmap(a) => commands::eval_vecmap(a),
        Command::EvalSim(a) => commands::eval_sim(a),
        Command::Probe(a) => commands::probe(a),
        Command::Compare(a) => commands::compare(a),
    }
}

/// One line on stderr: `error: <cause>: <cause>...`.
fn fail(prefix: &str, message: &str) -> ExitCode {
    let line = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error: {prefix}{line}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let raw: Vec<String> = std::env::args_os().map(|a| a.to_string_lossy().into_owned()).collect();
    let args = match config::expand_args(raw, &Cli::command()) {
        Ok(args) => args,
        Err(e) => return fail("config: ", &format!("{e:#}")),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let message: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .collect();
            return fail("usage: ", message.join(" ").trim_start_matches("error: "));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail("", &format!("{e:#}")),
    }
}
