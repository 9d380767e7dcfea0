//! Embedding pretraining on unlabeled text: corrupt a fraction of each
//! sentence's words, train the usual bidirectional tagger to label every
//! position as kept or replaced, and harvest the embedding table it
//! learned along the way.

mod emb_io;

pub use emb_io::{export_embeddings, import_embeddings, init_tagger_embeddings, EmbeddingMap};

use crate::error::{Error, Result};
use crate::model::{NetConfig, TaggerModel};
use crate::nn::RngState;
use crate::text::{encode_tokens, normalize_surface, ExtraFeatureSpec, TagSet, Token, Vocabulary};

/// Tag ids of the pretraining tag set, in fixed order.
pub const TAG_INCORRECT: usize = 0;
pub const TAG_CORRECT: usize = 1;

/// Binary tag set for the corruption discriminator. The order is fixed
/// (not sorted) so the label constants above stay valid.
pub fn corruption_tag_set() -> TagSet {
    TagSet::new(vec!["incorrect".into(), "correct".into()]).expect("fixed tag set")
}

#[derive(Debug, Clone)]
pub struct CorruptionConfig {
    /// Per-position replacement probability.
    pub replace_rate: f64,
    /// Seed of the corruption stream (independent of the model seed so
    /// the same corruptions can be replayed under different models).
    pub seed: u64,
    /// Keep the UNK sentinel out of the replacement pool.
    pub exclude_unk_replacement: bool,
    /// Draw replacements proportionally to corpus frequency instead of
    /// uniformly. Requires a vocabulary that still carries counts.
    pub frequency_weighted: bool,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            replace_rate: 0.2,
            seed: 0,
            exclude_unk_replacement: true,
            frequency_weighted: false,
        }
    }
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.replace_rate) {
            return Err(Error::InvalidConfig(format!(
                "replace_rate {} outside [0, 1]",
                self.replace_rate
            )));
        }
        Ok(())
    }
}

/// A sentence after corruption: label 0 marks a replaced position,
/// label 1 an untouched one. Labels double as tag ids of
/// [`corruption_tag_set`].
#[derive(Debug, Clone)]
pub struct CorruptedSentence {
    pub tokens: Vec<Token>,
    pub labels: Vec<usize>,
}

// Resampling retries before giving up; only reachable with degenerate
// frequency weights, since a uniform pool of two always terminates fast.
const MAX_REDRAWS: usize = 10_000;

/// Independently replace each position with probability `replace_rate`
/// by a different vocabulary word. Kept positions keep their original
/// surface form.
pub fn corrupt(
    tokens: &[Token],
    vocab: &Vocabulary,
    cfg: &CorruptionConfig,
    rng: &mut RngState,
) -> Result<CorruptedSentence> {
    cfg.validate()?;
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pool_start = if cfg.exclude_unk_replacement { 1 } else { 0 };
    let pool_len = vocab.size() - pool_start;
    if cfg.replace_rate > 0.0 && pool_len < 2 {
        return Err(Error::CannotCorrupt);
    }
    let weights: Option<Vec<u64>> = if cfg.frequency_weighted {
        let counts = vocab.counts().ok_or_else(|| {
            Error::InvalidConfig("frequency-weighted corruption needs a vocabulary with counts".into())
        })?;
        let mut acc = 0u64;
        let cumulative = counts[pool_start..]
            .iter()
            .map(|&c| {
                acc += c;
                acc
            })
            .collect::<Vec<u64>>();
        if acc == 0 {
            return Err(Error::CannotCorrupt);
        }
        Some(cumulative)
    } else {
        None
    };

    let mut out_tokens = Vec::with_capacity(tokens.len());
    let mut labels = Vec::with_capacity(tokens.len());
    for token in tokens {
        if cfg.replace_rate > 0.0 && rng.chance(cfg.replace_rate) {
            let original = normalize_surface(token.as_str());
            let replacement = draw_replacement(vocab, pool_start, pool_len, weights.as_deref(), &original, rng)?;
            out_tokens.push(Token::new(replacement)?);
            labels.push(TAG_INCORRECT);
        } else {
            out_tokens.push(token.clone());
            labels.push(TAG_CORRECT);
        }
    }
    Ok(CorruptedSentence { tokens: out_tokens, labels })
}

fn draw_replacement(
    vocab: &Vocabulary,
    pool_start: usize,
    pool_len: usize,
    cumulative: Option<&[u64]>,
    original: &str,
    rng: &mut RngState,
) -> Result<String> {
    for _ in 0..MAX_REDRAWS {
        let id = match cumulative {
            None => pool_start + rng.index(pool_len),
            Some(cum) => {
                let total = *cum.last().expect("nonempty pool");
                let target = rng.next_u64() % total;
                pool_start + cum.partition_point(|&c| c <= target)
            }
        };
        let word = vocab.word(id)?;
        if word != original {
            return Ok(word.to_string());
        }
    }
    Err(Error::CannotCorrupt)
}

#[derive(Debug, Clone)]
pub struct PretrainConfig {
    pub net: NetConfig,
    pub corruption: CorruptionConfig,
    pub learning_rate: f64,
    /// Pass count over the unlabeled corpus. No principled default
    /// exists; 1 keeps the no-tuning path cheap.
    pub epochs: usize,
    /// Seeds model initialization and epoch shuffling.
    pub seed: u64,
    pub shuffle: bool,
    /// Scale gradients down to this global norm when exceeded.
    pub grad_clip: Option<f64>,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            net: NetConfig::default(),
            corruption: CorruptionConfig::default(),
            learning_rate: 0.01,
            epochs: 1,
            seed: 0,
            shuffle: true,
            grad_clip: None,
        }
    }
}

/// The trained discriminator plus its per-epoch mean NLL per token. The
/// embedding table of interest is `model.embedding`.
#[derive(Debug)]
pub struct PretrainOutcome {
    pub model: TaggerModel,
    pub epoch_nll: Vec<f64>,
}

impl PretrainOutcome {
    /// The learned embedding matrix, one row per vocabulary word.
    pub fn embeddings(&self) -> &crate::nn::Matrix {
        &self.model.embedding.w1.value
    }
}

/// Train the corruption discriminator over `epochs` passes, re-corrupting
/// the corpus each pass, and return the model holding the embeddings.
pub fn pretrain(corpus: &[Vec<Token>], vocab: &Vocabulary, cfg: &PretrainConfig) -> Result<PretrainOutcome> {
    cfg.corruption.validate()?;
    if corpus.is_empty() || corpus.iter().all(Vec::is_empty) {
        return Err(Error::EmptyInput);
    }
    if cfg.learning_rate <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "learning rate {} must be positive",
            cfg.learning_rate
        )));
    }
    let spec = ExtraFeatureSpec::case_only();
    let mut loop_rng = RngState::new(cfg.seed);
    let mut model = TaggerModel::new(
        vocab.clone(),
        corruption_tag_set(),
        spec,
        cfg.net,
        &mut loop_rng,
    )?;
    let mut corruption_rng = RngState::new(cfg.corruption.seed);

    let sentences: Vec<&Vec<Token>> = corpus.iter().filter(|s| !s.is_empty()).collect();
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut epoch_nll = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        if cfg.shuffle {
            loop_rng.shuffle(&mut order);
        }
        let mut nll_sum = 0.0;
        let mut tokens_seen = 0usize;
        for &idx in &order {
            let corrupted = corrupt(sentences[idx], model.vocab(), &cfg.corruption, &mut corruption_rng)?;
            let encoded = encode_tokens(&corrupted.tokens, model.vocab(), model.feature_spec());
            let (loss, trace) = model.sentence_nll(&encoded, &corrupted.labels)?;
            model.backward(&encoded, &trace, &corrupted.labels)?;
            if let Some(max_norm) = cfg.grad_clip {
                let norm = model.grad_norm();
                if norm > max_norm {
                    model.scale_grads(max_norm / norm);
                }
            }
            model.sgd_step(cfg.learning_rate)?;
            nll_sum += loss;
            tokens_seen += corrupted.tokens.len();
        }
        epoch_nll.push(nll_sum / tokens_seen as f64);
    }
    Ok(PretrainOutcome { model, epoch_nll })
}
