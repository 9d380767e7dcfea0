//! Batch frontend: every subcommand reads files (or stdin), writes files
//! (or stdout), and logs its resolved settings to stderr so runs can be
//! reproduced from their logs alone.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or
//! format error, 3 numeric failure.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::Settings;
use seqtag_core::{Error, Result};

#[derive(Parser)]
#[command(name = "seqtag", version, about = "Bidirectional-LSTM sequence labeling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count words in a corpus and write a vocabulary file
    BuildVocab(BuildVocabArgs),
    /// Learn word embeddings from unlabeled text via the corruption task
    Pretrain(PretrainArgs),
    /// Train a tagger on a token<TAB>tag corpus
    Train(TrainArgs),
    /// Tag plain text with a trained model
    Tag(TagArgs),
    /// Score a trained model on a tagged corpus
    Eval(EvalArgs),
    /// Train one model per hidden size and emit a CSV comparison
    Sweep(SweepArgs),
    /// Compare baseline, pretrained-embedding, and suffix variants
    Ablate(AblateArgs),
    /// Dump a model's embedding table in the text interchange format
    ExportEmb(ExportEmbArgs),
    /// Verify analytic gradients against finite differences
    Gradcheck(GradcheckArgs),
}

/// Hyperparameter flags shared by the training-flavored subcommands.
/// Precedence: defaults, then `--config` file entries, then these flags.
#[derive(Args)]
struct HyperArgs {
    /// Config file of `key = value` lines (# comments allowed)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for initialization and shuffling
    #[arg(long)]
    seed: Option<u64>,
    /// Learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Hidden units per direction
    #[arg(long)]
    hidden: Option<usize>,
    /// Word embedding dimension
    #[arg(long = "embed-dim")]
    embed_dim: Option<usize>,
    /// Maximum number of epochs
    #[arg(long)]
    epochs: Option<usize>,
    /// Early-stop patience in epochs (0 disables early stopping)
    #[arg(long)]
    patience: Option<usize>,
    /// Enable the suffix-bigram feature (use `--suffix2 false` to disable)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    suffix2: Option<bool>,
    /// Embedding file initializing the word lookup table
    #[arg(long = "emb-init", value_name = "PATH")]
    emb_init: Option<PathBuf>,
    /// Corruption replacement probability for pretraining
    #[arg(long = "replace-rate")]
    replace_rate: Option<f64>,
}

impl HyperArgs {
    fn resolve(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.load_file(path)?;
        }
        if let Some(v) = self.seed {
            s.train.seed = v;
        }
        if let Some(v) = self.lr {
            s.train.learning_rate = v;
        }
        if let Some(v) = self.hidden {
            s.train.hidden = v;
        }
        if let Some(v) = self.embed_dim {
            s.train.embed_dim = v;
        }
        if let Some(v) = self.epochs {
            s.train.max_epochs = v;
        }
        if let Some(v) = self.patience {
            s.train.patience = Some(v);
        }
        if let Some(v) = self.suffix2 {
            s.train.use_suffix2 = v;
        }
        if let Some(v) = &self.emb_init {
            s.train.emb_init = Some(v.clone());
        }
        if let Some(v) = self.replace_rate {
            s.corruption.replace_rate = v;
        }
        Ok(s)
    }
}

#[derive(Args)]
struct BuildVocabArgs {
    /// Corpus to count words from (token<TAB>tag blocks by default)
    input: PathBuf,
    /// Vocabulary file to write
    #[arg(long)]
    out: PathBuf,
    /// Treat the input as whitespace-tokenized plain text
    #[arg(long)]
    plain: bool,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct PretrainArgs {
    /// Unlabeled plain-text corpus
    input: PathBuf,
    /// Vocabulary file (see build-vocab)
    #[arg(long)]
    vocab: PathBuf,
    /// Embedding file to write
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct TrainArgs {
    /// Tagged training corpus
    train: PathBuf,
    /// Model file to write
    #[arg(long)]
    out: PathBuf,
    /// Tagged dev corpus for model selection and early stopping
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Use this vocabulary instead of building one from the training set
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Write the per-epoch training log as CSV
    #[arg(long)]
    history: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct TagArgs {
    /// Trained model file
    model: PathBuf,
    /// Plain-text input; `-` or absent reads stdin
    input: Option<PathBuf>,
    /// Output file; absent writes stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Trained model file
    model: PathBuf,
    /// Tagged corpus to score
    corpus: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Tagged training corpus
    train: PathBuf,
    /// Tagged dev corpus
    #[arg(long)]
    dev: PathBuf,
    /// Hidden sizes to compare, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// CSV file to write
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct AblateArgs {
    /// Tagged training corpus
    train: PathBuf,
    /// Tagged dev corpus
    #[arg(long)]
    dev: PathBuf,
    /// Tagged test corpus
    #[arg(long)]
    test: PathBuf,
    /// CSV file to write
    #[arg(long)]
    out: PathBuf,
    /// Variants to run, comma-separated; default all
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<String>>,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct ExportEmbArgs {
    /// Trained model file
    model: PathBuf,
    /// Embedding file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Seed of the checked model
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::GradientBlowup(_) => 3,
        Error::InvalidConfig(_) | Error::InvalidRange { .. } => 1,
        _ => 2,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("seqtag: error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}
