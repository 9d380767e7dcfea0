//! Binary model container.
//!
//! Layout, all integers little-endian:
//! ```text
//! magic        6 bytes  "SEQTAG"
//! version      u32      currently 1
//! flags        u8       bit0 peepholes, bit1 case feature, bit2 suffixes
//! hidden       u64      LSTM units per direction
//! embed_dim    u64
//! vocab        u64 count, then count strings (u64 byte length + UTF-8)
//! tags         u64 count + strings
//! suffixes     u64 count + strings (count 0 when bit2 is clear)
//! matrices     34 of: u64 rows, u64 cols, rows*cols f64 (row-major)
//! ```
//! Matrix order: W1, W2, forward cell (15 in gate order i, f, o, g),
//! backward cell (15), W_out, b_out. Loading a container reproduces every
//! parameter bit-exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::lstm::LstmCell;
use crate::model::tagger::{BlstmLayer, EmbeddingTable, FeatureProjection, NetConfig, SoftmaxOutput, TaggerModel};
use crate::nn::{Matrix, Parameter};
use crate::text::{ExtraFeatureSpec, TagSet, Vocabulary};

const MAGIC: &[u8; 6] = b"SEQTAG";
const VERSION: u32 = 1;

const FLAG_PEEPHOLES: u8 = 1 << 0;
const FLAG_CASE: u8 = 1 << 1;
const FLAG_SUFFIXES: u8 = 1 << 2;
const FLAG_KNOWN: u8 = FLAG_PEEPHOLES | FLAG_CASE | FLAG_SUFFIXES;

pub fn save_model(model: &TaggerModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TaggerModel> {
    from_bytes(&std::fs::read(path)?)
}

pub fn to_bytes(model: &TaggerModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let spec = model.feature_spec();
    let mut flags = 0u8;
    if model.config().peepholes {
        flags |= FLAG_PEEPHOLES;
    }
    if spec.use_case_feature() {
        flags |= FLAG_CASE;
    }
    if spec.has_suffixes() {
        flags |= FLAG_SUFFIXES;
    }
    out.push(flags);
    push_u64(&mut out, model.config().hidden as u64);
    push_u64(&mut out, model.config().embed_dim as u64);
    push_strings(&mut out, model.vocab().words());
    push_strings(&mut out, model.tag_set().tags());
    push_strings(&mut out, spec.suffix_alphabet());
    for p in model.params() {
        push_matrix(&mut out, &p.value);
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<TaggerModel> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut cur = Cursor { bytes, pos: MAGIC.len() };
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let flags = cur.u8()?;
    if flags & !FLAG_KNOWN != 0 {
        return Err(Error::Corrupt(format!("unknown flag bits {flags:#04x}")));
    }
    let hidden = cur.len_field()?;
    let embed_dim = cur.len_field()?;
    let config = NetConfig { hidden, embed_dim, peepholes: flags & FLAG_PEEPHOLES != 0 };

    let vocab = Vocabulary::from_words(cur.strings()?)?;
    let tags = TagSet::new(cur.strings()?).map_err(|e| Error::Corrupt(e.to_string()))?;
    let suffixes = cur.strings()?;
    if suffixes.is_empty() == (flags & FLAG_SUFFIXES != 0) {
        return Err(Error::Corrupt("suffix flag disagrees with suffix alphabet".into()));
    }
    let spec = ExtraFeatureSpec::new(flags & FLAG_CASE != 0, suffixes)
        .map_err(|e| Error::Corrupt(e.to_string()))?;

    let w1 = Parameter::new("w1", cur.matrix()?);
    let w2 = Parameter::new("w2", cur.matrix()?);
    let fwd = read_cell(&mut cur, "fwd", config.peepholes)?;
    let bwd = read_cell(&mut cur, "bwd", config.peepholes)?;
    let w_out = Parameter::new("w_out", cur.matrix()?);
    let b_out = Parameter::new("b_out", cur.matrix()?);
    if cur.pos != bytes.len() {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes after model data",
            bytes.len() - cur.pos
        )));
    }

    TaggerModel::from_parts(
        vocab,
        tags,
        spec,
        config,
        EmbeddingTable { w1 },
        FeatureProjection { w2 },
        BlstmLayer { fwd, bwd },
        SoftmaxOutput { w_out, b_out },
    )
}

fn read_cell(cur: &mut Cursor<'_>, prefix: &str, peepholes: bool) -> Result<LstmCell> {
    let mut mats = Vec::with_capacity(15);
    for _ in 0..15 {
        mats.push(cur.matrix()?);
    }
    LstmCell::from_matrices(prefix, peepholes, mats)
}

fn push_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn push_strings(out: &mut Vec<u8>, strings: &[String]) {
    push_u64(out, strings.len() as u64);
    for s in strings {
        push_u64(out, s.len() as u64);
        out.extend_from_slice(s.as_bytes());
    }
}

fn push_matrix(out: &mut Vec<u8>, m: &Matrix) {
    push_u64(out, m.nrows() as u64);
    push_u64(out, m.ncols() as u64);
    for &v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Truncated)?;
        let slice = self.bytes.get(self.pos..end).ok_or(Error::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A u64 that must fit a usize (counts, dimensions).
    fn len_field(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Corrupt("length field overflows usize".into()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.len_field()?;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Corrupt("invalid UTF-8 string".into()))
    }

    fn strings(&mut self) -> Result<Vec<String>> {
        let count = self.len_field()?;
        // Each string needs at least its 8-byte length header; this bounds
        // the allocation before trusting the count.
        if count > self.bytes.len().saturating_sub(self.pos) / 8 {
            return Err(Error::Truncated);
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(self.string()?);
        }
        Ok(out)
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let rows = self.len_field()?;
        let cols = self.len_field()?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Corrupt("matrix size overflow".into()))?;
        let byte_len = n.checked_mul(8).ok_or_else(|| Error::Corrupt("matrix size overflow".into()))?;
        let raw = self.take(byte_len)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Matrix::from_shape_vec((rows, cols), data).map_err(|e| Error::Corrupt(e.to_string()))
    }
}
