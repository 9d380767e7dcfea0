//! Vocabulary and tag-set construction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::normalize_surface;

/// Sentinel word for out-of-vocabulary lookups; always id 0.
pub const UNK_TOKEN: &str = "<UNK>";

/// A frozen word list with id lookup. Id 0 is always the UNK sentinel;
/// the remaining words are ordered by descending corpus count with
/// lexicographic tie-breaks, so identical inputs always produce the
/// identical vocabulary.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    // Corpus counts parallel to `words` (UNK and must-include strangers get
    // 0). Present only on freshly built vocabularies; not serialized.
    counts: Option<Vec<u64>>,
}

impl Vocabulary {
    fn assemble(words: Vec<String>, counts: Option<Vec<u64>>) -> Result<Self> {
        if words.first().map(String::as_str) != Some(UNK_TOKEN) {
            return Err(Error::Corrupt(format!(
                "vocabulary must start with the {UNK_TOKEN} sentinel"
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (id, word) in words.iter().enumerate() {
            if id > 0 && *word != normalize_surface(word) {
                return Err(Error::Corrupt(format!(
                    "vocabulary word {word:?} is not digit-normalized lowercase"
                )));
            }
            if index.insert(word.clone(), id).is_some() {
                return Err(Error::Corrupt(format!("duplicate vocabulary word {word:?}")));
            }
        }
        if let Some(c) = &counts {
            debug_assert_eq!(c.len(), words.len());
        }
        Ok(Vocabulary { words, index, counts })
    }

    /// Rebuild from a word list that already starts with the UNK
    /// sentinel (deserialization path); no counts attached.
    pub(crate) fn from_words(words: Vec<String>) -> Result<Self> {
        Vocabulary::assemble(words, None)
    }

    /// Number of entries including UNK.
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn unk_id(&self) -> usize {
        0
    }

    /// Id of a normalized word, falling back to the UNK id.
    pub fn id(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(0)
    }

    /// Exact lookup with no UNK fallback.
    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> Result<&str> {
        self.words
            .get(id)
            .map(String::as_str)
            .ok_or(Error::WordIdOutOfRange { id, size: self.words.len() })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Corpus counts parallel to the word list, when this vocabulary was
    /// built from a stream rather than loaded from disk.
    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    /// Write one word per line in id order.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        for word in &self.words {
            writeln!(file, "{word}")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path.display().to_string();
        let fail = |line: usize, msg: String| Error::Parse {
            source_name: name.clone(),
            line,
            msg,
        };
        let file = std::fs::File::open(path)?;
        let mut words = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let word = line.trim_end_matches('\r');
            if word.is_empty() {
                return Err(fail(i + 1, "empty vocabulary line".into()));
            }
            if words.is_empty() && word != UNK_TOKEN {
                return Err(fail(1, format!("first line must be the {UNK_TOKEN} sentinel")));
            }
            if !words.is_empty() && word != normalize_surface(word) {
                return Err(fail(
                    i + 1,
                    format!("word {word:?} is not digit-normalized lowercase"),
                ));
            }
            words.push(word.to_string());
        }
        if words.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Vocabulary::assemble(words, None).map_err(|e| match e {
            Error::Corrupt(msg) => fail(0, msg),
            other => other,
        })
    }
}

/// Build a vocabulary from a stream of already-normalized tokens: the UNK
/// sentinel, then the union of `must_include` and the `max_common` most
/// frequent stream words, ordered by descending count with lexicographic
/// tie-breaks. Multiple corpora should be chained into one stream.
pub fn build_vocab<I>(tokens: I, max_common: usize, must_include: &BTreeSet<String>) -> Result<Vocabulary>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    for tok in tokens {
        *freq.entry(tok.as_ref().to_string()).or_insert(0) += 1;
    }

    let mut ranked: Vec<(&String, u64)> = freq.iter().map(|(w, &c)| (w, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut chosen: BTreeSet<&str> = ranked
        .iter()
        .take(max_common)
        .map(|(w, _)| w.as_str())
        .collect();
    chosen.extend(must_include.iter().map(String::as_str));

    if chosen.is_empty() {
        return Err(Error::EmptyVocabulary);
    }

    let mut entries: Vec<(&str, u64)> = chosen
        .into_iter()
        .map(|w| (w, freq.get(w).copied().unwrap_or(0)))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut words = Vec::with_capacity(entries.len() + 1);
    let mut counts = Vec::with_capacity(entries.len() + 1);
    words.push(UNK_TOKEN.to_string());
    counts.push(0);
    for (w, c) in entries {
        words.push(w.to_string());
        counts.push(c);
    }
    Vocabulary::assemble(words, Some(counts))
}

/// A frozen, bijective tag list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    tags: Vec<String>,
    index: HashMap<String, usize>,
}

impl TagSet {
    /// Freeze an explicit ordering. Tags must be distinct and non-empty.
    pub fn new(tags: Vec<String>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut index = HashMap::with_capacity(tags.len());
        for (id, tag) in tags.iter().enumerate() {
            if tag.is_empty() {
                return Err(Error::InvalidConfig("empty tag string".into()));
            }
            if index.insert(tag.clone(), id).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate tag {tag:?}")));
            }
        }
        Ok(TagSet { tags, index })
    }

    /// Collect the distinct tags of a corpus in sorted order.
    pub fn from_corpus(sentences: &[super::TaggedSentence]) -> Result<Self> {
        let distinct: BTreeSet<&str> = sentences
            .iter()
            .flat_map(|s| s.tags().iter().map(String::as_str))
            .collect();
        TagSet::new(distinct.into_iter().map(String::from).collect())
    }

    pub fn size(&self) -> usize {
        self.tags.len()
    }

    pub fn id(&self, tag: &str) -> Result<usize> {
        self.index
            .get(tag)
            .copied()
            .ok_or_else(|| Error::UnknownTag(tag.to_string()))
    }

    pub fn get(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn tag(&self, id: usize) -> Result<&str> {
        self.tags
            .get(id)
            .map(String::as_str)
            .ok_or(Error::TagIdOutOfRange { id, size: self.tags.len() })
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{TaggedSentence, Token};

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn stream(spec: &[(&str, usize)]) -> Vec<String> {
        let mut out = Vec::new();
        for &(w, n) in spec {
            out.extend(std::iter::repeat_n(w.to_string(), n));
        }
        out
    }

    #[test]
    fn top_k_by_count() {
        let v = build_vocab(stream(&[("a", 5), ("b", 3), ("c", 1)]), 2, &set(&[])).unwrap();
        assert_eq!(v.words(), &["<UNK>", "a", "b"]);
        assert_eq!(v.unk_id(), 0);
        assert_eq!(v.id("c"), v.unk_id());
    }

    #[test]
    fn must_include_union() {
        let v = build_vocab(stream(&[("a", 5), ("b", 3), ("c", 1)]), 2, &set(&["c"])).unwrap();
        assert_eq!(v.words(), &["<UNK>", "a", "b", "c"]);
    }

    #[test]
    fn count_ties_break_lexicographically() {
        // Same counts presented in both arrival orders select the same word.
        let forward = build_vocab(stream(&[("x", 2), ("y", 2)]), 1, &set(&[])).unwrap();
        let backward = build_vocab(stream(&[("y", 2), ("x", 2)]), 1, &set(&[])).unwrap();
        assert_eq!(forward.words(), &["<UNK>", "x"]);
        assert_eq!(forward.words(), backward.words());
    }

    #[test]
    fn empty_inputs_rejected() {
        let err = build_vocab(Vec::<String>::new(), 10, &set(&[])).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary));
        // A nonempty stream with nothing selected is just as empty.
        let err = build_vocab(stream(&[("a", 1)]), 0, &set(&[])).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary));
    }

    #[test]
    fn counts_follow_word_order() {
        let v = build_vocab(stream(&[("a", 5), ("b", 3)]), 2, &set(&["zz"])).unwrap();
        assert_eq!(v.words(), &["<UNK>", "a", "b", "zz"]);
        assert_eq!(v.counts().unwrap(), &[0, 5, 3, 0]);
    }

    #[test]
    fn index_inverts_word_list() {
        let v = build_vocab(stream(&[("a", 2), ("b", 1)]), 5, &set(&[])).unwrap();
        for id in 0..v.size() {
            assert_eq!(v.id(v.word(id).unwrap()), id);
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        let v = build_vocab(stream(&[("tel#", 4), ("usa", 2)]), 5, &set(&[])).unwrap();
        v.save(&path).unwrap();
        let loaded = Vocabulary::load(&path).unwrap();
        assert_eq!(loaded.words(), v.words());
        assert!(loaded.counts().is_none());
    }

    #[test]
    fn load_rejects_missing_sentinel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        std::fs::write(&path, "alpha\nbeta\n").unwrap();
        assert!(Vocabulary::load(&path).is_err());
    }

    #[test]
    fn load_rejects_unnormalized_words() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        std::fs::write(&path, "<UNK>\nGood\n").unwrap();
        assert!(Vocabulary::load(&path).is_err());
    }

    #[test]
    fn tag_set_is_bijective() {
        let t = TagSet::new(vec!["NN".into(), "VB".into()]).unwrap();
        assert_eq!(t.size(), 2);
        assert_eq!(t.id("NN").unwrap(), 0);
        assert_eq!(t.tag(1).unwrap(), "VB");
        assert!(matches!(t.id("JJ"), Err(Error::UnknownTag(_))));
        assert!(TagSet::new(vec!["NN".into(), "NN".into()]).is_err());
    }

    #[test]
    fn tag_set_from_corpus_sorted() {
        let s = TaggedSentence::new(
            vec![Token::new("b").unwrap(), Token::new("a").unwrap()],
            vec!["VB".into(), "DT".into()],
        )
        .unwrap();
        let t = TagSet::from_corpus(&[s]).unwrap();
        assert_eq!(t.tags(), &["DT", "VB"]);
    }
}
