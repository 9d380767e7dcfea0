//! Text interchange format for embeddings: a `<count> <dim>` header line
//! (optional on import), then `word v1 ... vd` per line, space-separated.
//! Values are printed with enough digits to round-trip exactly.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::EmbeddingTable;
use crate::nn::{uniform_init, Matrix, Parameter, RngState};
use crate::text::Vocabulary;

/// Imported word vectors, all of one dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }
}

/// Write one row per vocabulary word, in id order, with a count/dim
/// header.
pub fn export_embeddings(table: &Matrix, vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    if table.nrows() != vocab.size() {
        return Err(Error::ShapeMismatch(format!(
            "{} embedding rows for a vocabulary of {}",
            table.nrows(),
            vocab.size()
        )));
    }
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{} {}", table.nrows(), table.ncols())?;
    for (id, word) in vocab.words().iter().enumerate() {
        write!(out, "{word}")?;
        for v in table.row(id) {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn import_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMap> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_embeddings(BufReader::new(file), &path.display().to_string())
}

/// Parse the embedding format from any reader; the header line is
/// recognized by being exactly two non-negative integers.
pub fn read_embeddings<R: BufRead>(reader: R, source_name: &str) -> Result<EmbeddingMap> {
    let fail = |line: usize, msg: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg,
    };
    let mut declared: Option<(usize, usize)> = None;
    let mut dim: Option<usize> = None;
    let mut vectors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut first_content_line = true;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if first_content_line {
            first_content_line = false;
            if fields.len() == 2 {
                if let (Ok(count), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    declared = Some((count, d));
                    dim = Some(d);
                    continue;
                }
            }
        }
        let word = fields[0].to_string();
        let values = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| fail(i + 1, format!("bad number {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(fail(i + 1, format!("no values for word {word:?}")));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(fail(
                    i + 1,
                    format!("{} values for word {word:?}, expected {d}", values.len()),
                ));
            }
            _ => {}
        }
        if vectors.insert(word.clone(), values).is_some() {
            return Err(fail(i + 1, format!("duplicate word {word:?}")));
        }
    }
    if vectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((count, _)) = declared {
        if count != vectors.len() {
            return Err(fail(
                1,
                format!("header declares {count} words, file contains {}", vectors.len()),
            ));
        }
    }
    Ok(EmbeddingMap { dim: dim.unwrap(), vectors })
}

/// Build an embedding table for `vocab`: covered words get their external
/// vector, everything else (UNK included) is drawn from U[-0.1, 0.1).
/// Returns the table and the fraction of vocabulary rows left uncovered.
pub fn init_tagger_embeddings(
    vocab: &Vocabulary,
    external: Option<&EmbeddingMap>,
    embed_dim: usize,
    rng: &mut RngState,
) -> Result<(EmbeddingTable, f64)> {
    if embed_dim == 0 {
        return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
    }
    if let Some(map) = external {
        if map.dim() != embed_dim {
            return Err(Error::ShapeMismatch(format!(
                "external embeddings have dim {}, expected {embed_dim}",
                map.dim()
            )));
        }
    }
    let mut table = Matrix::zeros((vocab.size(), embed_dim));
    let mut uncovered = 0usize;
    for (id, word) in vocab.words().iter().enumerate() {
        match external.and_then(|m| m.get(word)) {
            Some(vec) => {
                for (slot, &v) in table.row_mut(id).iter_mut().zip(vec) {
                    *slot = v;
                }
            }
            None => {
                uncovered += 1;
                let row = uniform_init(1, embed_dim, -0.1, 0.1, rng)?;
                table.row_mut(id).assign(&row.row(0));
            }
        }
    }
    let oov_rate = uncovered as f64 / vocab.size() as f64;
    Ok((EmbeddingTable { w1: Parameter::new("w1", table) }, oov_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::build_vocab;
    use std::collections::BTreeSet;
    use std::io::Cursor;

    fn vocab_of(words: &[&str]) -> Vocabulary {
        let must: BTreeSet<String> = words.iter().map(|w| w.to_string()).collect();
        build_vocab(Vec::<String>::new(), 0, &must).unwrap()
    }

    #[test]
    fn export_import_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        let vocab = vocab_of(&["cat", "dog", "eel"]);
        let mut rng = RngState::new(13);
        let table = uniform_init(vocab.size(), 6, -0.1, 0.1, &mut rng).unwrap();
        export_embeddings(&table, &vocab, &path).unwrap();
        let map = import_embeddings(&path).unwrap();
        assert_eq!(map.dim(), 6);
        assert_eq!(map.len(), vocab.size());
        for (id, word) in vocab.words().iter().enumerate() {
            let got = map.get(word).unwrap();
            for (a, b) in got.iter().zip(table.row(id)) {
                assert_eq!(a, b, "word {word}");
            }
        }
    }

    #[test]
    fn headerless_files_infer_dimension() {
        let text = "alpha 1.0 2.0 3.0\nbeta -0.5 0.25 0\n";
        let map = read_embeddings(Cursor::new(text), "test").unwrap();
        assert_eq!(map.dim(), 3);
        assert_eq!(map.len(), 2);
        assert_eq!(map.get("beta").unwrap(), &[-0.5, 0.25, 0.0]);
    }

    #[test]
    fn ragged_rows_error_with_line_number() {
        let text = "2 3\na 1 2 3\nb 1 2\n";
        let err = read_embeddings(Cursor::new(text), "test").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_words_error_with_line_number() {
        let text = "a 1 2\nb 3 4\na 5 6\n";
        let err = read_embeddings(Cursor::new(text), "test").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_word_count_is_checked() {
        let text = "3 2\na 1 2\nb 3 4\n";
        assert!(read_embeddings(Cursor::new(text), "test").is_err());
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(
            read_embeddings(Cursor::new(""), "test"),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn init_with_no_external_map_is_fully_random() {
        let vocab = vocab_of(&["a", "b", "c"]);
        let mut rng = RngState::new(2);
        let (table, oov) = init_tagger_embeddings(&vocab, None, 5, &mut rng).unwrap();
        assert_eq!(oov, 1.0);
        assert_eq!(table.w1.value.dim(), (4, 5));
        assert!(table.w1.value.iter().all(|&v| (-0.1..0.1).contains(&v)));
    }

    #[test]
    fn init_with_partial_coverage_counts_oov() {
        let vocab = vocab_of(&["a", "b", "c"]); // plus UNK: 4 rows
        let text = "a 1 2 3\nb 4 5 6\n";
        let map = read_embeddings(Cursor::new(text), "test").unwrap();
        let mut rng = RngState::new(2);
        let (table, oov) = init_tagger_embeddings(&vocab, Some(&map), 3, &mut rng).unwrap();
        assert_eq!(oov, 0.5);
        assert_eq!(table.w1.value.row(vocab.id("a")).to_vec(), vec![1.0, 2.0, 3.0]);
        assert_eq!(table.w1.value.row(vocab.id("b")).to_vec(), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn init_with_full_coverage_copies_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        let vocab = vocab_of(&["x", "y"]);
        let mut rng = RngState::new(4);
        let source = uniform_init(vocab.size(), 2, -0.1, 0.1, &mut rng).unwrap();
        export_embeddings(&source, &vocab, &path).unwrap();
        let map = import_embeddings(&path).unwrap();
        let (table, oov) = init_tagger_embeddings(&vocab, Some(&map), 2, &mut rng).unwrap();
        assert_eq!(oov, 0.0);
        assert_eq!(table.w1.value, source);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let vocab = vocab_of(&["x"]);
        let map = read_embeddings(Cursor::new("x 1 2 3\n"), "test").unwrap();
        let mut rng = RngState::new(4);
        assert!(matches!(
            init_tagger_embeddings(&vocab, Some(&map), 5, &mut rng),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
