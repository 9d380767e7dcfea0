//! Randomized invariant checks over the text pipeline, serialization,
//! and corruption sampling.

use std::collections::BTreeSet;

use proptest::prelude::*;
use seqtag_core::model::{from_bytes, to_bytes, NetConfig, TaggerModel};
use seqtag_core::nn::{uniform_init, RngState};
use seqtag_core::pretrain::{
    corrupt, export_embeddings, import_embeddings, CorruptionConfig,
};
use seqtag_core::text::{
    build_vocab, case_feature, encode_tokens, normalize_digits, normalize_surface, suffix2,
    ExtraFeatureSpec, TagSet, Token, Vocabulary,
};

fn vocab_from(words: &BTreeSet<String>) -> Vocabulary {
    build_vocab(words.iter(), usize::MAX, &BTreeSet::new()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn digit_normalization_is_idempotent_and_digit_free(s in "[^\\s]{1,12}") {
        let token = Token::new(s).unwrap();
        let once = normalize_digits(&token);
        prop_assert!(!once.as_str().bytes().any(|b| b.is_ascii_digit()));
        let twice = normalize_digits(&once);
        prop_assert_eq!(twice.as_str(), once.as_str());
    }

    #[test]
    fn surface_normalization_is_idempotent_and_canonical(s in any::<String>()) {
        let once = normalize_surface(&s);
        prop_assert!(!once.bytes().any(|b| b.is_ascii_digit() || b.is_ascii_uppercase()));
        prop_assert_eq!(normalize_surface(&once), once.clone());
    }

    #[test]
    fn suffix_is_at_most_two_chars_of_the_tail(s in "[a-z#]{1,12}") {
        let suf = suffix2(&s);
        prop_assert!(suf.chars().count() <= 2);
        prop_assert!(s.ends_with(&suf));
        prop_assert!(!suf.is_empty());
    }

    #[test]
    fn case_bits_are_one_hot_or_absent(s in any::<String>()) {
        let bits = case_feature(&s);
        let set = bits.iter().filter(|b| **b).count();
        prop_assert!(set <= 1);
    }

    #[test]
    fn canonical_case_shapes_get_their_bit(
        lower in "[a-z]{1,10}",
        upper in "[A-Z]{1,10}",
        cap in "[A-Z][a-z]{1,9}",
    ) {
        prop_assert_eq!(case_feature(&lower), [true, false, false]);
        prop_assert_eq!(case_feature(&upper), [false, true, false]);
        prop_assert_eq!(case_feature(&cap), [false, false, true]);
    }

    #[test]
    fn vocabulary_ignores_arrival_order(mut words in prop::collection::vec("[a-z]{1,6}", 1..30)) {
        let forward = build_vocab(words.iter(), usize::MAX, &BTreeSet::new()).unwrap();
        words.reverse();
        let backward = build_vocab(words.iter(), usize::MAX, &BTreeSet::new()).unwrap();
        prop_assert_eq!(forward.words(), backward.words());
    }

    #[test]
    fn vocabulary_ids_invert_words(words in prop::collection::btree_set("[a-z]{1,6}", 1..20)) {
        let vocab = vocab_from(&words);
        for id in 0..vocab.size() {
            prop_assert_eq!(vocab.id(vocab.word(id).unwrap()), id);
        }
    }

    #[test]
    fn encoding_preserves_lengths_and_bounds(
        words in prop::collection::btree_set("[a-z]{1,6}", 2..12),
        surfaces in prop::collection::vec("[a-zA-Z0-9]{1,8}", 1..12),
    ) {
        let vocab = vocab_from(&words);
        let spec = ExtraFeatureSpec::new(true, vec!["aa".to_string(), "zz".to_string()]).unwrap();
        let tokens: Vec<Token> = surfaces.iter().map(|s| Token::new(s.clone()).unwrap()).collect();
        let encoded = encode_tokens(&tokens, &vocab, &spec);
        prop_assert_eq!(encoded.word_ids.len(), tokens.len());
        prop_assert_eq!(encoded.extra.len(), tokens.len());
        for &id in &encoded.word_ids {
            prop_assert!(id < vocab.size());
        }
        for f in &encoded.extra {
            prop_assert_eq!(f.dim(), spec.dimension());
            for &slot in f.active() {
                prop_assert!(slot < f.dim());
            }
        }
    }

    #[test]
    fn corruption_rate_zero_is_identity(
        words in prop::collection::btree_set("[a-z]{1,5}", 3..10),
        picks in prop::collection::vec(0usize..100, 1..15),
        seed in any::<u64>(),
    ) {
        let vocab = vocab_from(&words);
        let list: Vec<&String> = words.iter().collect();
        let tokens: Vec<Token> = picks
            .iter()
            .map(|p| Token::new(list[p % list.len()].clone()).unwrap())
            .collect();
        let cfg = CorruptionConfig { replace_rate: 0.0, ..CorruptionConfig::default() };
        let mut rng = RngState::new(seed);
        let out = corrupt(&tokens, &vocab, &cfg, &mut rng).unwrap();
        prop_assert_eq!(out.tokens, tokens);
        prop_assert!(out.labels.iter().all(|&l| l == 1));
    }

    #[test]
    fn full_corruption_changes_every_normalized_form(
        words in prop::collection::btree_set("[a-z]{1,5}", 3..10),
        picks in prop::collection::vec(0usize..100, 1..15),
        seed in any::<u64>(),
    ) {
        let vocab = vocab_from(&words);
        let list: Vec<&String> = words.iter().collect();
        let tokens: Vec<Token> = picks
            .iter()
            .map(|p| Token::new(list[p % list.len()].clone()).unwrap())
            .collect();
        let cfg = CorruptionConfig { replace_rate: 1.0, ..CorruptionConfig::default() };
        let mut rng = RngState::new(seed);
        let out = corrupt(&tokens, &vocab, &cfg, &mut rng).unwrap();
        for (orig, new) in tokens.iter().zip(&out.tokens) {
            prop_assert_ne!(
                normalize_surface(orig.as_str()),
                normalize_surface(new.as_str())
            );
        }
        prop_assert!(out.labels.iter().all(|&l| l == 0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn model_serialization_round_trips_bitwise(
        words in prop::collection::btree_set("[a-z]{1,5}", 1..6),
        hidden in 1usize..4,
        embed in 1usize..4,
        peepholes in any::<bool>(),
        use_case in any::<bool>(),
        with_suffixes in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let vocab = vocab_from(&words);
        let tags = TagSet::new(vec!["X".into(), "Y".into()]).unwrap();
        let alphabet = if with_suffixes {
            vec!["ab".to_string(), "cd".to_string()]
        } else {
            Vec::new()
        };
        let spec = ExtraFeatureSpec::new(use_case, alphabet).unwrap();
        let cfg = NetConfig { hidden, embed_dim: embed, peepholes };
        let mut rng = RngState::new(seed);
        let model = TaggerModel::new(vocab, tags, spec, cfg, &mut rng).unwrap();
        let bytes = to_bytes(&model);
        let reloaded = from_bytes(&bytes).unwrap();
        prop_assert_eq!(to_bytes(&reloaded), bytes);
    }

    #[test]
    fn embedding_files_round_trip_exactly(
        words in prop::collection::btree_set("[a-z]{1,5}", 1..8),
        dim in 1usize..6,
        seed in any::<u64>(),
    ) {
        let vocab = vocab_from(&words);
        let mut rng = RngState::new(seed);
        let table = uniform_init(vocab.size(), dim, -1.0, 1.0, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        export_embeddings(&table, &vocab, &path).unwrap();
        let map = import_embeddings(&path).unwrap();
        prop_assert_eq!(map.dim(), dim);
        for (id, word) in vocab.words().iter().enumerate() {
            let row = map.get(word).unwrap();
            for (a, b) in row.iter().zip(table.row(id)) {
                prop_assert_eq!(a, b);
            }
        }
    }
}
