//! One function per subcommand. Each returns the process exit code on
//! the success path; errors bubble to `main` for classification.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use seqtag_core::model::{load_model, save_model, NetConfig, NllObjective};
use seqtag_core::nn::grad_check;
use seqtag_core::pretrain::{export_embeddings, pretrain, PretrainConfig};
use seqtag_core::synth::gradcheck_fixture;
use seqtag_core::text::{
    self, normalize_surface, read_plain, read_plain_corpus, read_tagged_corpus, write_tagged,
    TaggedSentence, Vocabulary,
};
use seqtag_core::train::{
    ablation_run, hidden_size_sweep, token_accuracy, train_tagger, write_ablation_csv,
    write_history_csv, write_sweep_csv, AblationVariant,
};
use seqtag_core::{Error, Result};

use crate::{
    AblateArgs, BuildVocabArgs, Command, EvalArgs, ExportEmbArgs, GradcheckArgs, PretrainArgs,
    SweepArgs, TagArgs, TrainArgs,
};

/// Threshold separating a passing gradient check from a numeric failure.
const GRADCHECK_LIMIT: f64 = 1e-4;

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::BuildVocab(args) => run_build_vocab(&args),
        Command::Pretrain(args) => run_pretrain(&args),
        Command::Train(args) => run_train(&args),
        Command::Tag(args) => run_tag(&args),
        Command::Eval(args) => run_eval(&args),
        Command::Sweep(args) => run_sweep(&args),
        Command::Ablate(args) => run_ablate(&args),
        Command::ExportEmb(args) => run_export_emb(&args),
        Command::Gradcheck(args) => run_gradcheck(&args),
    }
}

fn log(msg: &str) {
    eprintln!("[seqtag] {msg}");
}

fn run_build_vocab(args: &BuildVocabArgs) -> Result<i32> {
    let settings = args.hyper.resolve()?;
    log(&format!(
        "cmd=build-vocab input={} out={} plain={} {}",
        args.input.display(),
        args.out.display(),
        args.plain,
        settings.log_line()
    ));
    let normalized: Vec<String> = if args.plain {
        read_plain_corpus(&args.input)?
            .iter()
            .flatten()
            .map(|t| normalize_surface(t.as_str()))
            .collect()
    } else {
        read_tagged_corpus(&args.input)?
            .iter()
            .flat_map(|s| s.tokens())
            .map(|t| normalize_surface(t.as_str()))
            .collect()
    };
    let vocab = text::build_vocab(normalized, settings.max_common, &BTreeSet::new())?;
    vocab.save(&args.out)?;
    log(&format!("wrote {} words to {}", vocab.size(), args.out.display()));
    Ok(0)
}

fn run_pretrain(args: &PretrainArgs) -> Result<i32> {
    let settings = args.hyper.resolve()?;
    log(&format!(
        "cmd=pretrain input={} vocab={} out={} {}",
        args.input.display(),
        args.vocab.display(),
        args.out.display(),
        settings.log_line()
    ));
    let vocab = Vocabulary::load(&args.vocab)?;
    let corpus = read_plain_corpus(&args.input)?;
    let cfg = PretrainConfig {
        net: NetConfig {
            hidden: settings.train.hidden,
            embed_dim: settings.train.embed_dim,
            peepholes: settings.train.peepholes,
        },
        corruption: settings.corruption.clone(),
        learning_rate: settings.train.learning_rate,
        epochs: settings.train.max_epochs,
        seed: settings.train.seed,
        shuffle: settings.train.shuffle,
        grad_clip: settings.train.grad_clip,
    };
    let outcome = pretrain(&corpus, &vocab, &cfg)?;
    for (i, nll) in outcome.epoch_nll.iter().enumerate() {
        log(&format!("epoch={} corruption_nll_per_token={:.6}", i + 1, nll));
    }
    export_embeddings(outcome.embeddings(), &vocab, &args.out)?;
    log(&format!(
        "wrote {} x {} embeddings to {}",
        vocab.size(),
        settings.train.embed_dim,
        args.out.display()
    ));
    Ok(0)
}

fn run_train(args: &TrainArgs) -> Result<i32> {
    let settings = args.hyper.resolve()?;
    log(&format!(
        "cmd=train train={} dev={} vocab={} out={} {}",
        args.train.display(),
        args.dev.as_ref().map_or("none".into(), |p| p.display().to_string()),
        args.vocab.as_ref().map_or("auto".into(), |p| p.display().to_string()),
        args.out.display(),
        settings.log_line()
    ));
    let train_set = read_tagged_corpus(&args.train)?;
    let dev = match &args.dev {
        Some(path) => read_tagged_corpus(path)?,
        None => Vec::new(),
    };
    let vocab = match &args.vocab {
        Some(path) => Some(Vocabulary::load(path)?),
        None => None,
    };
    let outcome = train_tagger(&train_set, &dev, &settings.train, vocab)?;
    if let Some(rate) = outcome.oov_rate {
        log(&format!("embedding_oov_rate={rate:.6}"));
    }
    for r in &outcome.history {
        match r.dev_accuracy {
            Some(acc) => log(&format!(
                "epoch={} train_nll={:.6} dev_accuracy={:.6}",
                r.epoch, r.train_nll, acc
            )),
            None => log(&format!("epoch={} train_nll={:.6}", r.epoch, r.train_nll)),
        }
    }
    if let Some(path) = &args.history {
        write_history_csv(BufWriter::new(File::create(path)?), &outcome.history)?;
    }
    save_model(&outcome.model, &args.out)?;
    log(&format!("wrote model to {}", args.out.display()));
    Ok(0)
}

fn run_tag(args: &TagArgs) -> Result<i32> {
    log(&format!(
        "cmd=tag model={} input={} out={}",
        args.model.display(),
        args.input.as_ref().map_or("stdin".into(), |p| p.display().to_string()),
        args.out.as_ref().map_or("stdout".into(), |p| p.display().to_string()),
    ));
    let model = load_model(&args.model)?;
    let sentences = match &args.input {
        Some(path) if path != Path::new("-") => read_plain_corpus(path)?,
        _ => read_plain(std::io::stdin().lock(), "stdin")?,
    };
    let mut tagged = Vec::with_capacity(sentences.len());
    for tokens in sentences {
        let tags = model.tag_tokens(&tokens)?;
        tagged.push(TaggedSentence::new(tokens, tags)?);
    }
    match &args.out {
        Some(path) => write_tagged(BufWriter::new(File::create(path)?), &tagged)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_tagged(&mut lock, &tagged)?;
            lock.flush()?;
        }
    }
    Ok(0)
}

fn run_eval(args: &EvalArgs) -> Result<i32> {
    log(&format!(
        "cmd=eval model={} corpus={}",
        args.model.display(),
        args.corpus.display()
    ));
    let model = load_model(&args.model)?;
    let corpus = read_tagged_corpus(&args.corpus)?;
    let eval = token_accuracy(&model, &corpus)?;
    println!(
        "token_accuracy={:.6} token_count={}",
        eval.token_accuracy, eval.token_count
    );
    Ok(0)
}

fn run_sweep(args: &SweepArgs) -> Result<i32> {
    let settings = args.hyper.resolve()?;
    log(&format!(
        "cmd=sweep train={} dev={} sizes={:?} out={} {}",
        args.train.display(),
        args.dev.display(),
        args.sizes,
        args.out.display(),
        settings.log_line()
    ));
    let train_set = read_tagged_corpus(&args.train)?;
    let dev = read_tagged_corpus(&args.dev)?;
    let records = hidden_size_sweep(&args.sizes, &settings.train, &train_set, &dev)?;
    for r in &records {
        log(&format!(
            "hidden={} dev_accuracy={:.6} train_seconds={:.3}",
            r.hidden, r.dev_accuracy, r.train_seconds
        ));
    }
    write_sweep_csv(BufWriter::new(File::create(&args.out)?), &records)?;
    Ok(0)
}

fn parse_variants(names: &[String]) -> Result<Vec<AblationVariant>> {
    names
        .iter()
        .map(|name| {
            AblationVariant::all()
                .into_iter()
                .find(|v| v.name() == name)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown variant {name:?}")))
        })
        .collect()
}

fn run_ablate(args: &AblateArgs) -> Result<i32> {
    let settings = args.hyper.resolve()?;
    log(&format!(
        "cmd=ablate train={} dev={} test={} out={} {}",
        args.train.display(),
        args.dev.display(),
        args.test.display(),
        args.out.display(),
        settings.log_line()
    ));
    let variants = match &args.variants {
        Some(names) => parse_variants(names)?,
        None => AblationVariant::all().to_vec(),
    };
    let train_set = read_tagged_corpus(&args.train)?;
    let dev = read_tagged_corpus(&args.dev)?;
    let test = read_tagged_corpus(&args.test)?;
    let records = ablation_run(
        &variants,
        &settings.train,
        &train_set,
        &dev,
        &test,
        settings.train.emb_init.as_deref(),
    )?;
    for r in &records {
        log(&format!(
            "variant={} dev_accuracy={:.6} test_accuracy={:.6}",
            r.variant, r.dev_accuracy, r.test_accuracy
        ));
    }
    write_ablation_csv(BufWriter::new(File::create(&args.out)?), &records)?;
    Ok(0)
}

fn run_export_emb(args: &ExportEmbArgs) -> Result<i32> {
    log(&format!(
        "cmd=export-emb model={} out={}",
        args.model.display(),
        args.out.display()
    ));
    let model = load_model(&args.model)?;
    export_embeddings(&model.embedding.w1.value, model.vocab(), &args.out)?;
    log(&format!(
        "wrote {} x {} embeddings to {}",
        model.vocab().size(),
        model.embedding.w1.value.ncols(),
        args.out.display()
    ));
    Ok(0)
}

fn run_gradcheck(args: &GradcheckArgs) -> Result<i32> {
    log(&format!("cmd=gradcheck seed={} eps=1e-5 limit={GRADCHECK_LIMIT:e}", args.seed));
    let (mut model, encoded, tag_ids) = gradcheck_fixture(args.seed);
    let mut obj = NllObjective::new(&mut model, encoded, tag_ids)?;
    let report = grad_check(&mut obj, 1e-5);
    println!("{report}");
    Ok(if report.max_rel_err < GRADCHECK_LIMIT { 0 } else { 3 })
}
