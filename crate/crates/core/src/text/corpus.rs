//! Corpus file readers and writer.
//!
//! Tagged corpus: one `token<TAB>tag` per line, blank line ends a
//! sentence, `#` lines before the first token of a block are comments.
//! Plain corpus: one sentence per line, tokens whitespace-separated.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{TaggedSentence, Token};

pub fn read_tagged_corpus(path: impl AsRef<Path>) -> Result<Vec<TaggedSentence>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_tagged(BufReader::new(file), &path.display().to_string())
}

/// Parse a tagged corpus from any reader; `source_name` labels errors.
pub fn read_tagged<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<TaggedSentence>> {
    let fail = |line: usize, msg: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg,
    };
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut tags: Vec<String> = Vec::new();
    let mut flush = |tokens: &mut Vec<Token>, tags: &mut Vec<String>| -> Result<()> {
        if !tokens.is_empty() {
            sentences.push(TaggedSentence::new(std::mem::take(tokens), std::mem::take(tags))?);
        }
        Ok(())
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut tokens, &mut tags)?;
            continue;
        }
        if tokens.is_empty() && line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(fail(
                i + 1,
                format!("expected `token<TAB>tag`, found {} field(s)", fields.len()),
            ));
        }
        let token = Token::new(fields[0])
            .map_err(|e| fail(i + 1, format!("bad token: {e}")))?;
        let tag = fields[1];
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(fail(i + 1, format!("bad tag {tag:?}")));
        }
        tokens.push(token);
        tags.push(tag.to_string());
    }
    flush(&mut tokens, &mut tags)?;
    Ok(sentences)
}

pub fn read_plain_corpus(path: impl AsRef<Path>) -> Result<Vec<Vec<Token>>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_plain(BufReader::new(file), &path.display().to_string())
}

/// Parse a plain corpus: one whitespace-split sentence per line; blank
/// lines are skipped.
pub fn read_plain<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<Vec<Token>>> {
    let mut sentences = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tokens = line
            .split_whitespace()
            .map(Token::new)
            .collect::<Result<Vec<Token>>>()
            .map_err(|e| Error::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        sentences.push(tokens);
    }
    Ok(sentences)
}

/// Write sentences in the tagged-corpus format (trailing blank line after
/// each sentence).
pub fn write_tagged<W: Write>(mut writer: W, sentences: &[TaggedSentence]) -> Result<()> {
    for sentence in sentences {
        for (token, tag) in sentence.tokens().iter().zip(sentence.tags()) {
            writeln!(writer, "{token}\t{tag}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
