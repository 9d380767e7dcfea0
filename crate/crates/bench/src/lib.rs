//! Shared setup for the benchmark targets: a deterministic demo model
//! and sentence so every bench measures the same workload.

use std::collections::BTreeSet;

use seqtag_core::model::{NetConfig, TaggerModel};
use seqtag_core::nn::RngState;
use seqtag_core::text::{
    build_vocab, encode_tokens, EncodedSentence, ExtraFeatureSpec, TagSet, Token, Vocabulary,
};

pub const DEMO_SEED: u64 = 40;
pub const SENTENCE_LEN: usize = 20;

/// Twenty distinct lowercase pseudo-words, enough for one demo sentence
/// without repeats.
pub fn demo_words() -> Vec<String> {
    (0..SENTENCE_LEN)
        .map(|i| {
            let a = (b'a' + (i % 26) as u8) as char;
            let b = (b'a' + (i / 26 + i % 5) as u8) as char;
            format!("{a}{b}x")
        })
        .collect()
}

pub fn demo_vocab() -> Vocabulary {
    build_vocab(demo_words(), usize::MAX, &BTreeSet::new()).expect("demo vocabulary")
}

/// Model over the demo vocabulary with four tags, case features on, and
/// the given layer sizes.
pub fn demo_model(hidden: usize, embed_dim: usize) -> TaggerModel {
    let vocab = demo_vocab();
    let tags = TagSet::new(vec!["T0".into(), "T1".into(), "T2".into(), "T3".into()])
        .expect("demo tags");
    let spec = ExtraFeatureSpec::new(true, Vec::new()).expect("demo feature spec");
    let cfg = NetConfig {
        hidden,
        embed_dim,
        peepholes: true,
    };
    let mut rng = RngState::new(DEMO_SEED);
    TaggerModel::new(vocab, tags, spec, cfg, &mut rng).expect("demo model")
}

pub fn demo_tokens() -> Vec<Token> {
    demo_words()
        .into_iter()
        .map(|w| Token::new(w).expect("demo token"))
        .collect()
}

pub fn demo_sentence(model: &TaggerModel) -> EncodedSentence {
    encode_tokens(&demo_tokens(), model.vocab(), model.feature_spec())
}

/// Cyclic tag assignment for the demo sentence.
pub fn demo_tag_ids() -> Vec<usize> {
    (0..SENTENCE_LEN).map(|i| i % 4).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_setup_is_consistent() {
        let model = demo_model(16, 12);
        let encoded = demo_sentence(&model);
        assert_eq!(encoded.len(), SENTENCE_LEN);
        let (nll, _) = model
            .sentence_nll(&encoded, &demo_tag_ids())
            .expect("demo forward");
        assert!(nll.is_finite() && nll > 0.0);
    }

    #[test]
    fn demo_words_are_distinct() {
        let words = demo_words();
        let unique: BTreeSet<&String> = words.iter().collect();
        assert_eq!(unique.len(), words.len());
    }
}
