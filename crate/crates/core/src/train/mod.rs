//! Supervised training with per-sentence SGD, dev-accuracy model
//! selection, and token-level evaluation.

mod sweep;

pub use sweep::{
    ablation_run, hidden_size_sweep, write_ablation_csv, write_history_csv, write_sweep_csv,
    AblationRecord, AblationVariant, SweepRecord,
};

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::{NetConfig, TaggerModel};
use crate::nn::RngState;
use crate::pretrain::{import_embeddings, init_tagger_embeddings};
use crate::text::{
    build_vocab, encode_tagged, normalize_surface, suffix2, EncodedSentence, ExtraFeatureSpec,
    TagSet, TaggedSentence, Vocabulary,
};

/// Hyperparameters for one supervised training run.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub hidden: usize,
    pub embed_dim: usize,
    pub seed: u64,
    /// Stop after this many epochs without a dev-accuracy improvement.
    /// `None` or `Some(0)` disables early stopping.
    pub patience: Option<usize>,
    pub shuffle: bool,
    pub use_case: bool,
    pub use_suffix2: bool,
    /// Embedding file used to initialize the word lookup table.
    pub emb_init: Option<PathBuf>,
    pub grad_clip: Option<f64>,
    pub peepholes: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            max_epochs: 10,
            hidden: 100,
            embed_dim: 100,
            seed: 0,
            patience: Some(5),
            shuffle: true,
            use_case: true,
            use_suffix2: false,
            emb_init: None,
            grad_clip: None,
            peepholes: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.hidden == 0 || self.embed_dim == 0 {
            return Err(Error::InvalidConfig(
                "hidden size and embedding dimension must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean training NLL per token over the epoch's updates.
    pub train_nll: f64,
    /// Token accuracy on the dev set; absent when no dev data was given.
    pub dev_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// The best-dev snapshot, or the final model when no dev set exists.
    pub model: TaggerModel,
    pub history: Vec<EpochRecord>,
    /// Fraction of vocabulary rows not covered by the external embedding
    /// file, when one was used.
    pub oov_rate: Option<f64>,
}

/// Token-level evaluation summary.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub token_accuracy: f64,
    /// Counts indexed `[gold, predicted]`; sums to `token_count`.
    pub confusion: ndarray::Array2<u64>,
    pub token_count: usize,
}

/// Train a tagger by per-sentence SGD. The tag set always comes from the
/// training corpus; the vocabulary does too unless one is supplied (a
/// pretraining flow wants the tagger to share the pretrained vocabulary).
///
/// After each epoch the dev set is scored and the best-scoring snapshot
/// kept; training stops early once `patience` epochs pass without
/// improvement. Dev tags unseen in training are an error.
pub fn train_tagger(
    train: &[TaggedSentence],
    dev: &[TaggedSentence],
    cfg: &TrainConfig,
    vocab: Option<Vocabulary>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyInput);
    }
    let tags = TagSet::from_corpus(train)?;
    let vocab = match vocab {
        Some(v) => v,
        None => build_vocab(
            train
                .iter()
                .flat_map(|s| s.tokens())
                .map(|t| normalize_surface(t.as_str())),
            usize::MAX,
            &BTreeSet::new(),
        )?,
    };
    let suffixes: Vec<String> = if cfg.use_suffix2 {
        train
            .iter()
            .flat_map(|s| s.tokens())
            .map(|t| suffix2(&normalize_surface(t.as_str())))
            .collect::<BTreeSet<String>>()
            .into_iter()
            .collect()
    } else {
        Vec::new()
    };
    let spec = ExtraFeatureSpec::new(cfg.use_case, suffixes)?;
    let net = NetConfig {
        hidden: cfg.hidden,
        embed_dim: cfg.embed_dim,
        peepholes: cfg.peepholes,
    };

    let mut rng = RngState::new(cfg.seed);
    let mut model = TaggerModel::new(vocab, tags, spec, net, &mut rng)?;
    let mut oov_rate = None;
    if let Some(path) = &cfg.emb_init {
        let map = import_embeddings(path)?;
        let (table, rate) = init_tagger_embeddings(model.vocab(), Some(&map), cfg.embed_dim, &mut rng)?;
        model.embedding = table;
        oov_rate = Some(rate);
    }

    let mut train_enc = Vec::with_capacity(train.len());
    for s in train {
        train_enc.push(encode_tagged(s, model.vocab(), model.feature_spec(), model.tag_set())?);
    }
    let mut dev_enc = Vec::with_capacity(dev.len());
    for s in dev {
        dev_enc.push(encode_tagged(s, model.vocab(), model.feature_spec(), model.tag_set())?);
    }

    let patience = cfg.patience.filter(|&p| p > 0);
    let mut history = Vec::new();
    let mut best: Option<(f64, TaggerModel)> = None;
    let mut since_improve = 0usize;
    let mut order: Vec<usize> = (0..train_enc.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        if cfg.shuffle {
            rng.shuffle(&mut order);
        }
        let mut nll_sum = 0.0;
        let mut tokens = 0usize;
        for &idx in &order {
            let (enc, tag_ids) = &train_enc[idx];
            let (nll, trace) = model.sentence_nll(enc, tag_ids)?;
            model.backward(enc, &trace, tag_ids)?;
            if let Some(cap) = cfg.grad_clip {
                let norm = model.grad_norm();
                if norm > cap {
                    model.scale_grads(cap / norm);
                }
            }
            model.sgd_step(cfg.learning_rate)?;
            nll_sum += nll;
            tokens += enc.len();
        }
        let dev_accuracy = if dev_enc.is_empty() {
            None
        } else {
            Some(eval_encoded(&model, &dev_enc)?.token_accuracy)
        };
        history.push(EpochRecord {
            epoch,
            train_nll: nll_sum / tokens as f64,
            dev_accuracy,
        });
        if let Some(acc) = dev_accuracy {
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                best = Some((acc, model.clone()));
                since_improve = 0;
            } else {
                since_improve += 1;
                if patience.is_some_and(|p| since_improve >= p) {
                    break;
                }
            }
        }
    }

    let model = match best {
        Some((_, snapshot)) => snapshot,
        None => model,
    };
    Ok(TrainOutcome { model, history, oov_rate })
}

/// Score a frozen model: fraction of positions tagged correctly, plus a
/// gold-by-predicted confusion matrix.
pub fn token_accuracy(model: &TaggerModel, corpus: &[TaggedSentence]) -> Result<EvalResult> {
    let mut encoded = Vec::with_capacity(corpus.len());
    for s in corpus {
        encoded.push(encode_tagged(s, model.vocab(), model.feature_spec(), model.tag_set())?);
    }
    eval_encoded(model, &encoded)
}

fn eval_encoded(
    model: &TaggerModel,
    corpus: &[(EncodedSentence, Vec<usize>)],
) -> Result<EvalResult> {
    let m = model.tag_set().size();
    let mut confusion = ndarray::Array2::<u64>::zeros((m, m));
    let mut correct = 0usize;
    let mut total = 0usize;
    for (enc, gold) in corpus {
        let pred = model.predict(enc)?;
        for (&g, &p) in gold.iter().zip(&pred) {
            confusion[[g, p]] += 1;
            if g == p {
                correct += 1;
            }
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::NoTokens);
    }
    Ok(EvalResult {
        token_accuracy: correct as f64 / total as f64,
        confusion,
        token_count: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::to_bytes;
    use crate::text::Token;

    fn sent(pairs: &[(&str, &str)]) -> TaggedSentence {
        TaggedSentence::new(
            pairs.iter().map(|(w, _)| Token::new(*w).unwrap()).collect(),
            pairs.iter().map(|(_, t)| t.to_string()).collect(),
        )
        .unwrap()
    }

    fn tiny_corpus() -> Vec<TaggedSentence> {
        vec![
            sent(&[("the", "D"), ("cat", "N"), ("sleeps", "V")]),
            sent(&[("the", "D"), ("dog", "N"), ("runs", "V")]),
            sent(&[("a", "D"), ("cat", "N"), ("runs", "V")]),
            sent(&[("a", "D"), ("dog", "N"), ("sleeps", "V")]),
        ]
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            learning_rate: 0.1,
            max_epochs: 60,
            hidden: 8,
            embed_dim: 6,
            seed: 11,
            patience: None,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn overfits_a_tiny_corpus() {
        let corpus = tiny_corpus();
        let out = train_tagger(&corpus, &[], &small_cfg(), None).unwrap();
        let eval = token_accuracy(&out.model, &corpus).unwrap();
        assert!(eval.token_accuracy >= 0.99, "accuracy {}", eval.token_accuracy);
        assert_eq!(eval.token_count, 12);
    }

    #[test]
    fn zero_epochs_returns_initialized_model() {
        let corpus = tiny_corpus();
        let cfg = TrainConfig { max_epochs: 0, ..small_cfg() };
        let out = train_tagger(&corpus, &corpus, &cfg, None).unwrap();
        assert!(out.history.is_empty());
        // still a usable model
        let eval = token_accuracy(&out.model, &corpus).unwrap();
        assert_eq!(eval.token_count, 12);
    }

    #[test]
    fn identical_config_gives_bitwise_identical_models() {
        let corpus = tiny_corpus();
        let cfg = TrainConfig { max_epochs: 3, ..small_cfg() };
        let a = train_tagger(&corpus, &corpus, &cfg, None).unwrap();
        let b = train_tagger(&corpus, &corpus, &cfg, None).unwrap();
        assert_eq!(to_bytes(&a.model), to_bytes(&b.model));
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn dev_tag_unseen_in_training_is_an_error() {
        let corpus = tiny_corpus();
        let dev = vec![sent(&[("the", "XX")])];
        let err = train_tagger(&corpus, &dev, &small_cfg(), None).unwrap_err();
        assert!(matches!(err, Error::UnknownTag(t) if t == "XX"));
    }

    #[test]
    fn empty_training_set_rejected() {
        assert!(matches!(
            train_tagger(&[], &[], &small_cfg(), None),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn early_stopping_cuts_the_run_short() {
        let corpus = tiny_corpus();
        // Single-token dev set: accuracy is 0 or 1, so strict improvement
        // can happen at most twice and patience must trigger well before
        // max_epochs.
        let dev = vec![sent(&[("the", "D")])];
        let cfg = TrainConfig {
            max_epochs: 80,
            patience: Some(2),
            ..small_cfg()
        };
        let out = train_tagger(&corpus, &dev, &cfg, None).unwrap();
        assert!(out.history.len() < 80, "ran {} epochs", out.history.len());
    }

    #[test]
    fn best_snapshot_matches_history_maximum() {
        let corpus = tiny_corpus();
        let cfg = TrainConfig { max_epochs: 12, ..small_cfg() };
        let out = train_tagger(&corpus, &corpus, &cfg, None).unwrap();
        let best_in_history = out
            .history
            .iter()
            .filter_map(|r| r.dev_accuracy)
            .fold(f64::NEG_INFINITY, f64::max);
        let returned = token_accuracy(&out.model, &corpus).unwrap().token_accuracy;
        assert_eq!(returned, best_in_history);
    }

    #[test]
    fn no_dev_set_leaves_accuracy_absent_and_runs_all_epochs() {
        let corpus = tiny_corpus();
        let cfg = TrainConfig { max_epochs: 5, patience: Some(1), ..small_cfg() };
        let out = train_tagger(&corpus, &[], &cfg, None).unwrap();
        assert_eq!(out.history.len(), 5);
        assert!(out.history.iter().all(|r| r.dev_accuracy.is_none()));
    }

    #[test]
    fn evaluation_is_pure() {
        let corpus = tiny_corpus();
        let cfg = TrainConfig { max_epochs: 2, ..small_cfg() };
        let out = train_tagger(&corpus, &[], &cfg, None).unwrap();
        let a = token_accuracy(&out.model, &corpus).unwrap();
        let b = token_accuracy(&out.model, &corpus).unwrap();
        assert_eq!(a.token_accuracy, b.token_accuracy);
        assert_eq!(a.confusion, b.confusion);
    }

    #[test]
    fn confusion_counts_partition_the_tokens() {
        let corpus = tiny_corpus();
        let cfg = TrainConfig { max_epochs: 2, ..small_cfg() };
        let out = train_tagger(&corpus, &[], &cfg, None).unwrap();
        let eval = token_accuracy(&out.model, &corpus).unwrap();
        assert_eq!(eval.confusion.sum() as usize, eval.token_count);
        let diag: u64 = (0..eval.confusion.nrows()).map(|i| eval.confusion[[i, i]]).sum();
        assert_eq!(diag as f64 / eval.token_count as f64, eval.token_accuracy);
    }

    #[test]
    fn constant_tag_model_scores_the_tag_frequency() {
        let corpus = tiny_corpus();
        let cfg = TrainConfig { max_epochs: 0, ..small_cfg() };
        let mut out = train_tagger(&corpus, &[], &cfg, None).unwrap();
        let forced = out.model.tag_set().id("N").unwrap();
        out.model.output.b_out.value[[forced, 0]] = 1000.0;
        let eval = token_accuracy(&out.model, &corpus).unwrap();
        // every sentence is D N V, so N is a third of all tokens
        assert!((eval.token_accuracy - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_eval_corpus_reports_no_tokens() {
        let corpus = tiny_corpus();
        let cfg = TrainConfig { max_epochs: 0, ..small_cfg() };
        let out = train_tagger(&corpus, &[], &cfg, None).unwrap();
        assert!(matches!(token_accuracy(&out.model, &[]), Err(Error::NoTokens)));
    }

    #[test]
    fn supplied_vocabulary_is_used_verbatim() {
        let corpus = tiny_corpus();
        let vocab = build_vocab(
            ["the", "cat", "extra"],
            usize::MAX,
            &std::collections::BTreeSet::new(),
        )
        .unwrap();
        let cfg = TrainConfig { max_epochs: 1, ..small_cfg() };
        let out = train_tagger(&corpus, &[], &cfg, Some(vocab.clone())).unwrap();
        assert_eq!(out.model.vocab().words(), vocab.words());
    }

    #[test]
    fn invalid_configs_rejected() {
        let corpus = tiny_corpus();
        for bad in [
            TrainConfig { learning_rate: 0.0, ..small_cfg() },
            TrainConfig { learning_rate: f64::NAN, ..small_cfg() },
            TrainConfig { hidden: 0, ..small_cfg() },
            TrainConfig { embed_dim: 0, ..small_cfg() },
        ] {
            assert!(matches!(
                train_tagger(&corpus, &[], &bad, None),
                Err(Error::InvalidConfig(_))
            ));
        }
    }
}
