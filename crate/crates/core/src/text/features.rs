//! Sparse extra-feature vectors: case class and bigram suffix.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::text::{case_feature, normalize_surface, suffix2, TaggedSentence, TagSet, Token, Vocabulary};

/// Layout of the sparse extra-feature vector attached to each token:
/// three case bits first (when enabled), then one slot per alphabet
/// suffix plus a trailing unknown-suffix slot (when the alphabet is
/// nonempty).
#[derive(Debug, Clone)]
pub struct ExtraFeatureSpec {
    use_case_feature: bool,
    suffix_alphabet: Vec<String>,
    suffix_index: HashMap<String, usize>,
}

impl ExtraFeatureSpec {
    /// Freeze a layout. The alphabet must be sorted and duplicate-free.
    pub fn new(use_case_feature: bool, suffix_alphabet: Vec<String>) -> Result<Self> {
        for pair in suffix_alphabet.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidConfig(format!(
                    "suffix alphabet not sorted/distinct at {:?} vs {:?}",
                    pair[0], pair[1]
                )));
            }
        }
        let suffix_index = suffix_alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(ExtraFeatureSpec { use_case_feature, suffix_alphabet, suffix_index })
    }

    /// Case bits only, no suffixes: the base configuration.
    pub fn case_only() -> Self {
        ExtraFeatureSpec::new(true, Vec::new()).unwrap()
    }

    /// Zero-dimensional spec (no extra features at all).
    pub fn none() -> Self {
        ExtraFeatureSpec::new(false, Vec::new()).unwrap()
    }

    pub fn use_case_feature(&self) -> bool {
        self.use_case_feature
    }

    pub fn suffix_alphabet(&self) -> &[String] {
        &self.suffix_alphabet
    }

    pub fn has_suffixes(&self) -> bool {
        !self.suffix_alphabet.is_empty()
    }

    fn case_dims(&self) -> usize {
        if self.use_case_feature {
            3
        } else {
            0
        }
    }

    /// Total vector length: 3 case bits plus alphabet size plus the
    /// unknown-suffix slot.
    pub fn dimension(&self) -> usize {
        let suffix_dims = if self.has_suffixes() {
            self.suffix_alphabet.len() + 1
        } else {
            0
        };
        self.case_dims() + suffix_dims
    }

    /// Active indices for one surface token, in increasing order.
    pub fn activate(&self, surface: &str) -> SparseFeatures {
        let mut active = Vec::with_capacity(2);
        if self.use_case_feature {
            let bits = case_feature(surface);
            if let Some(i) = bits.iter().position(|&b| b) {
                active.push(i);
            }
        }
        if self.has_suffixes() {
            let sfx = suffix2(&normalize_surface(surface));
            let slot = self
                .suffix_index
                .get(&sfx)
                .copied()
                .unwrap_or(self.suffix_alphabet.len());
            active.push(self.case_dims() + slot);
        }
        SparseFeatures { dim: self.dimension(), active }
    }
}

/// A binary feature vector stored as its active indices (at most one case
/// bit and one suffix bit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseFeatures {
    dim: usize,
    active: Vec<usize>,
}

impl SparseFeatures {
    /// Build a vector directly from active indices, which must be
    /// strictly increasing, in range, and at most two.
    pub fn new(dim: usize, active: Vec<usize>) -> Result<Self> {
        if active.len() > 2 {
            return Err(Error::InvalidConfig(format!(
                "{} active bits, at most 2 allowed",
                active.len()
            )));
        }
        for pair in active.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidConfig("active indices must be strictly increasing".into()));
            }
        }
        if let Some(&last) = active.last() {
            if last >= dim {
                return Err(Error::InvalidConfig(format!("active index {last} out of dim {dim}")));
            }
        }
        Ok(SparseFeatures { dim, active })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &i in &self.active {
            v[i] = 1.0;
        }
        v
    }
}

/// Word ids and extra features for one sentence; both sequences share the
/// sentence's length.
#[derive(Debug, Clone)]
pub struct EncodedSentence {
    pub word_ids: Vec<usize>,
    pub extra: Vec<SparseFeatures>,
}

impl EncodedSentence {
    pub fn len(&self) -> usize {
        self.word_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_ids.is_empty()
    }
}

/// Collect every distinct bigram suffix of an already-normalized token
/// stream into a sorted alphabet, paired with the case feature.
pub fn build_suffix_alphabet<I>(tokens: I) -> ExtraFeatureSpec
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let distinct: BTreeSet<String> = tokens
        .into_iter()
        .map(|t| suffix2(t.as_ref()))
        .collect();
    ExtraFeatureSpec::new(true, distinct.into_iter().collect()).unwrap()
}

/// Encode a token sequence: vocabulary id of the normalized form (UNK
/// fallback) plus the sparse extra features of the raw surface form.
pub fn encode_tokens(tokens: &[Token], vocab: &Vocabulary, spec: &ExtraFeatureSpec) -> EncodedSentence {
    let mut word_ids = Vec::with_capacity(tokens.len());
    let mut extra = Vec::with_capacity(tokens.len());
    for tok in tokens {
        word_ids.push(vocab.id(&normalize_surface(tok.as_str())));
        extra.push(spec.activate(tok.as_str()));
    }
    EncodedSentence { word_ids, extra }
}

/// Encode a tagged sentence, additionally resolving each gold tag to its
/// id. Unknown tags are an error (the tag set is frozen before encoding).
pub fn encode_tagged(
    sentence: &TaggedSentence,
    vocab: &Vocabulary,
    spec: &ExtraFeatureSpec,
    tags: &TagSet,
) -> Result<(EncodedSentence, Vec<usize>)> {
    let encoded = encode_tokens(sentence.tokens(), vocab, spec);
    let tag_ids = sentence
        .tags()
        .iter()
        .map(|t| tags.id(t))
        .collect::<Result<Vec<usize>>>()?;
    Ok((encoded, tag_ids))
}
