//! Deterministic corpus reading, token normalization, feature extraction,
//! and vocabulary / tag-set construction.

mod corpus;
mod features;
mod vocab;

pub use corpus::{read_plain, read_plain_corpus, read_tagged, read_tagged_corpus, write_tagged};
pub use features::{build_suffix_alphabet, encode_tagged, encode_tokens, EncodedSentence, ExtraFeatureSpec, SparseFeatures};
pub use vocab::{build_vocab, TagSet, Vocabulary, UNK_TOKEN};

use crate::error::{Error, Result};

/// A single surface token: non-empty, no internal whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(Error::InvalidConfig("empty token".into()));
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(Error::InvalidConfig(format!(
                "token {surface:?} contains whitespace"
            )));
        }
        Ok(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sentence paired with its gold tags; both sequences have equal,
/// nonzero length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    tokens: Vec<Token>,
    tags: Vec<String>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<Token>, tags: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyInput);
        }
        if tokens.len() != tags.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} tokens vs {} tags",
                tokens.len(),
                tags.len()
            )));
        }
        Ok(TaggedSentence { tokens, tags })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty sentences
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }
}

/// Replace every maximal run of consecutive decimal digits with a single
/// `#`; all other characters are preserved in order. ASCII `0-9` only.
pub fn normalize_digits(token: &Token) -> Token {
    Token(normalize_digits_str(token.as_str()))
}

pub(crate) fn normalize_digits_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_run = false;
    for c in s.chars() {
        if c.is_ascii_digit() {
            if !in_run {
                out.push('#');
                in_run = true;
            }
        } else {
            out.push(c);
            in_run = false;
        }
    }
    out
}

/// Lowercase a surface form and collapse digit runs: the canonical form used
/// for vocabulary lookup.
pub fn normalize_surface(surface: &str) -> String {
    normalize_digits_str(&surface.to_lowercase())
}

/// Three-way case indicator of the original surface form:
/// `(full_lowercase, full_uppercase, leading_capital)`.
///
/// Computed on the raw token, before lowercasing. At most one bit is set:
/// full-upper is checked before leading-capital (so a single capital letter
/// counts as full-upper), and mixed-case or non-alphabetic tokens get the
/// all-zero vector.
pub fn case_feature(surface: &str) -> [bool; 3] {
    let alphabetic: Vec<char> = surface.chars().filter(|c| c.is_alphabetic()).collect();
    if alphabetic.is_empty() {
        return [false, false, false];
    }
    if alphabetic.iter().all(|c| c.is_lowercase()) {
        return [true, false, false];
    }
    if alphabetic.iter().all(|c| c.is_uppercase()) {
        return [false, true, false];
    }
    let first_is_cap = surface.chars().next().is_some_and(|c| c.is_uppercase());
    let rest_lower = surface
        .chars()
        .skip(1)
        .filter(|c| c.is_alphabetic())
        .all(|c| c.is_lowercase());
    if first_is_cap && rest_lower {
        return [false, false, true];
    }
    [false, false, false]
}

/// Last two characters of an already-normalized, lowercased token; a
/// single-character token is its own suffix.
pub fn suffix2(normalized: &str) -> String {
    let chars: Vec<char> = normalized.chars().collect();
    let start = chars.len().saturating_sub(2);
    chars[start..].iter().collect()
}
