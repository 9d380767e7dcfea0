//! Deterministic synthetic corpora for tests, benchmarks, and the
//! experiment subcommands. All generators are pure functions of their
//! seed, and every surface form is lowercase-letters-only so it survives
//! normalization unchanged.

use std::collections::BTreeSet;

use crate::model::{NetConfig, TaggerModel};
use crate::nn::RngState;
use crate::text::{
    build_vocab, encode_tokens, EncodedSentence, ExtraFeatureSpec, TagSet, TaggedSentence, Token,
};

const OVERFIT_WORDS: usize = 20;
const OVERFIT_TAGS: [&str; 5] = ["T0", "T1", "T2", "T3", "T4"];

fn overfit_word(i: usize) -> String {
    let c = (b'a' + i as u8) as char;
    format!("{c}{c}")
}

/// The tag deterministically attached to an overfit-corpus word, or None
/// for words outside that vocabulary.
pub fn overfit_tag(word: &str) -> Option<&'static str> {
    let bytes = word.as_bytes();
    if bytes.len() != 2 || bytes[0] != bytes[1] {
        return None;
    }
    let i = bytes[0].checked_sub(b'a')? as usize;
    if i >= OVERFIT_WORDS {
        return None;
    }
    Some(OVERFIT_TAGS[i % 5])
}

/// Memorization workload: 20 words, 5 tags, and a fixed word-to-tag
/// mapping, so a large enough model can reach perfect train accuracy.
/// Sentence lengths are 3 to 8.
pub fn overfit_corpus(sentences: usize, seed: u64) -> Vec<TaggedSentence> {
    let mut rng = RngState::new(seed);
    (0..sentences)
        .map(|_| {
            let len = 3 + rng.index(6);
            let mut tokens = Vec::with_capacity(len);
            let mut tags = Vec::with_capacity(len);
            for _ in 0..len {
                let i = rng.index(OVERFIT_WORDS);
                tokens.push(Token::new(overfit_word(i)).unwrap());
                tags.push(OVERFIT_TAGS[i % 5].to_string());
            }
            TaggedSentence::new(tokens, tags).unwrap()
        })
        .collect()
}

/// The word whose tag is decided by its right neighbor.
pub const AMBIGUOUS_WORD: &str = "amb";
/// Right neighbors triggering the two readings of [`AMBIGUOUS_WORD`].
pub const RIGHT_A: &str = "ra";
pub const RIGHT_B: &str = "rb";
/// Tags of the two readings.
pub const TAG_A: &str = "TA";
pub const TAG_B: &str = "TB";

const FILLERS: [&str; 3] = ["fa", "fb", "fc"];

/// Disambiguation workload: every sentence contains `amb` exactly once,
/// immediately followed by `ra` or `rb` (an even coin), and `amb` is
/// tagged `TA` or `TB` accordingly. A tagger that cannot see rightward
/// context can do no better than chance on the `amb` positions; filler
/// words around the pair are deterministic noise.
pub fn ambiguity_corpus(sentences: usize, seed: u64) -> Vec<TaggedSentence> {
    let mut rng = RngState::new(seed);
    (0..sentences)
        .map(|_| {
            let mut tokens = Vec::new();
            let mut tags = Vec::new();
            let filler = |rng: &mut RngState, tokens: &mut Vec<Token>, tags: &mut Vec<String>| {
                let f = FILLERS[rng.index(FILLERS.len())];
                tokens.push(Token::new(f).unwrap());
                tags.push("FILL".to_string());
            };
            let lead = rng.index(3);
            let trail = rng.index(3);
            for _ in 0..lead {
                filler(&mut rng, &mut tokens, &mut tags);
            }
            let reading_a = rng.chance(0.5);
            tokens.push(Token::new(AMBIGUOUS_WORD).unwrap());
            tags.push(if reading_a { TAG_A } else { TAG_B }.to_string());
            tokens.push(Token::new(if reading_a { RIGHT_A } else { RIGHT_B }).unwrap());
            tags.push(if reading_a { "RA" } else { "RB" }.to_string());
            for _ in 0..trail {
                filler(&mut rng, &mut tokens, &mut tags);
            }
            TaggedSentence::new(tokens, tags).unwrap()
        })
        .collect()
}

/// A small, fully-featured gradient-check scene: 20-row vocabulary,
/// 8-dim embeddings, hidden size 6 per direction, 4 tags, and a 5-token
/// sentence exercising the UNK row, every case bit, and the
/// unknown-suffix slot. Weights are scaled 3x off the usual init: at
/// +-0.1 the recurrent gradients sit near 1e-8, where central
/// differences drown in rounding cancellation.
pub fn gradcheck_fixture(seed: u64) -> (TaggerModel, EncodedSentence, Vec<usize>) {
    let words: Vec<String> = (0..19)
        .map(|i| {
            let c = (b'a' + i as u8) as char;
            format!("{c}{c}")
        })
        .collect();
    let vocab = build_vocab(words.iter(), usize::MAX, &BTreeSet::new()).unwrap();
    let tags = TagSet::new(vec!["A".into(), "B".into(), "C".into(), "D".into()]).unwrap();
    let spec = ExtraFeatureSpec::new(
        true,
        vec!["aa".to_string(), "bb".to_string(), "cc".to_string()],
    )
    .unwrap();
    let net = NetConfig { hidden: 6, embed_dim: 8, peepholes: true };
    let mut rng = RngState::new(seed);
    let mut model = TaggerModel::new(vocab, tags, spec, net, &mut rng).unwrap();
    for p in model.params_mut() {
        p.value.mapv_inplace(|v| v * 3.0);
    }
    let tokens: Vec<Token> = ["aa", "Bb", "zzz", "CC", "Tel192"]
        .iter()
        .map(|w| Token::new(*w).unwrap())
        .collect();
    let encoded = encode_tokens(&tokens, model.vocab(), model.feature_spec());
    (model, encoded, vec![0, 1, 2, 3, 1])
}

pub const NOUN_TAG: &str = "NN";
pub const VERB_TAG: &str = "VB";

/// Two-class noun/verb language backing the pretraining workloads.
///
/// Plain text for corruption pretraining comes from
/// [`block_sentences`](Self::block_sentences): runs of same-class words
/// in strict run-level alternation, so a random replacement usually
/// breaks the local class homogeneity and is detectable from adjacent
/// words alone. Word choice inside a run is frequency-skewed (min of
/// two uniform draws), which hands the uniform replacement process a
/// lexical tell — rare surface forms are disproportionately
/// replacements — and that foothold lets the corruption discriminator
/// escape its initial predict-the-prior plateau before the contextual
/// signal takes over.
///
/// Labeled corpora come from [`tagged`](Self::tagged): the class of
/// each position is an independent coin, the word is uniform within the
/// class's first `limit` words, and the tag names the class. Context is
/// uninformative by construction, so tagging words absent from the
/// labeled data takes lexical knowledge — exactly what pretrained
/// embeddings carry for the words the labeled data never shows.
#[derive(Debug, Clone)]
pub struct ClassLanguage {
    nouns: Vec<String>,
    verbs: Vec<String>,
}

impl ClassLanguage {
    /// `words_per_class` in 1..=26.
    pub fn new(words_per_class: usize) -> Self {
        assert!(
            (1..=26).contains(&words_per_class),
            "words_per_class must be in 1..=26"
        );
        let letter = |i: usize| (b'a' + i as u8) as char;
        ClassLanguage {
            nouns: (0..words_per_class).map(|i| format!("n{}", letter(i))).collect(),
            verbs: (0..words_per_class).map(|i| format!("v{}", letter(i))).collect(),
        }
    }

    pub fn nouns(&self) -> &[String] {
        &self.nouns
    }

    pub fn verbs(&self) -> &[String] {
        &self.verbs
    }

    /// 0 for a noun-class word, 1 for verb-class, None otherwise.
    pub fn class_of(&self, word: &str) -> Option<usize> {
        if self.nouns.iter().any(|w| w == word) {
            Some(0)
        } else if self.verbs.iter().any(|w| w == word) {
            Some(1)
        } else {
            None
        }
    }

    fn sentence(&self, limit: usize, rng: &mut RngState) -> (Vec<Token>, Vec<String>) {
        let len = 4 + rng.index(5);
        let mut tokens = Vec::with_capacity(len);
        let mut tags = Vec::with_capacity(len);
        for _ in 0..len {
            let verb = rng.chance(0.5);
            let pool = if verb { &self.verbs } else { &self.nouns };
            tokens.push(Token::new(pool[rng.index(limit)].clone()).unwrap());
            tags.push(if verb { VERB_TAG } else { NOUN_TAG }.to_string());
        }
        (tokens, tags)
    }

    /// Tagged sentences of 4 to 8 words drawing only from the first
    /// `limit` words of each class; each position's class is an
    /// independent even coin and its tag names the class. Equal
    /// arguments produce the same token stream as
    /// [`untagged`](Self::untagged).
    pub fn tagged(&self, sentences: usize, limit: usize, seed: u64) -> Vec<TaggedSentence> {
        assert!(limit >= 1 && limit <= self.nouns.len(), "limit out of range");
        let mut rng = RngState::new(seed);
        (0..sentences)
            .map(|_| {
                let (tokens, tags) = self.sentence(limit, &mut rng);
                TaggedSentence::new(tokens, tags).unwrap()
            })
            .collect()
    }

    /// Token sequences only: the same stream as [`tagged`](Self::tagged)
    /// with the tags dropped.
    pub fn untagged(&self, sentences: usize, limit: usize, seed: u64) -> Vec<Vec<Token>> {
        assert!(limit >= 1 && limit <= self.nouns.len(), "limit out of range");
        let mut rng = RngState::new(seed);
        (0..sentences).map(|_| self.sentence(limit, &mut rng).0).collect()
    }

    /// Plain sentences made of runs of same-class words: 2 to 4 runs, 2
    /// to 4 words each, the first run's class an even coin and classes
    /// alternating run to run. Words come from the class's first `limit`
    /// words under a frequency skew (min of two uniform draws). This is
    /// the unlabeled text distribution for corruption pretraining.
    pub fn block_sentences(&self, sentences: usize, limit: usize, seed: u64) -> Vec<Vec<Token>> {
        assert!(limit >= 1 && limit <= self.nouns.len(), "limit out of range");
        let mut rng = RngState::new(seed);
        (0..sentences)
            .map(|_| {
                let runs = 2 + rng.index(3);
                let mut verb_run = rng.chance(0.5);
                let mut tokens = Vec::new();
                for _ in 0..runs {
                    let run_len = 2 + rng.index(3);
                    let pool = if verb_run { &self.verbs } else { &self.nouns };
                    for _ in 0..run_len {
                        let k = rng.index(limit).min(rng.index(limit));
                        tokens.push(Token::new(pool[k].clone()).unwrap());
                    }
                    verb_run = !verb_run;
                }
                tokens
            })
            .collect()
    }
}
