//! Model files.
//!
//! Layout: the magic bytes, a little-endian `u32` format version, a
//! `key=value` manifest, the vocabularies (length-prefixed UTF-8 strings),
//! the parameter tensors (name, shape, row-major little-endian `f32`), and a
//! trailing CRC-32 of everything before it.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::model::{Dims, Model, ParserSpec};
use super::tensor::{Scalar, Tensor};
use super::vocab::{TagType, Vocab, Vocabularies};
use crate::transition::{Action, LabelInventory};

pub const MAGIC: &[u8; 8] = b"DSCPARSE";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model file")]
    BadMagic,
    #[error("model format version {0}, expected {FORMAT_VERSION}")]
    Version(u32),
    #[error("model file checksum mismatch (truncated or corrupted)")]
    Checksum,
    #[error("model file is malformed: {0}")]
    Format(String),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, x: usize) {
        self.0.extend_from_slice(&(x as u32).to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }

    fn strs<S: AsRef<str>>(&mut self, xs: impl ExactSizeIterator<Item = S>) {
        self.u32(xs.len());
        for s in xs {
            self.str(s.as_ref());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| ModelError::Format("unexpected end of data".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<usize, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn str(&mut self) -> Result<String, ModelError> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| ModelError::Format(e.to_string()))
    }

    fn strs(&mut self) -> Result<Vec<String>, ModelError> {
        let n = self.u32()?;
        (0..n).map(|_| self.str()).collect()
    }
}

fn manifest<T: Scalar>(m: &Model<T>) -> String {
    let d = &m.dims;
    let s = &m.spec;
    format!(
        "word={}\nchar={}\nchar_hidden={}\nhidden={}\nlayers={}\nmlp={}\nsystem={}\noracle={}\ntemplates={}\npermissive_labels={}\n",
        d.word, d.char, d.char_hidden, d.hidden, d.layers, d.mlp, s.system, s.oracle, s.templates, s.labels.permissive
    )
}

/// Serializes `model` (parameters rounded to `f32`).
pub fn to_bytes<T: Scalar>(model: &Model<T>) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION as usize);
    w.str(&manifest(model));
    let v = &model.vocab;
    w.strs(v.words.items().iter());
    for c in &v.word_counts {
        w.0.extend_from_slice(&c.to_le_bytes());
    }
    w.strs(v.chars.items().iter());
    w.u32(v.tags.len());
    for t in &v.tags {
        w.str(&t.name);
        w.strs(t.labels.items().iter());
    }
    w.strs(v.actions.iter().map(Action::to_string));
    w.strs(model.spec.labels.root.iter());
    w.strs(model.spec.labels.inner.iter());
    w.u32(model.params.len());
    for t in &model.params {
        w.str(&t.name);
        w.u32(t.rows);
        w.u32(t.cols);
        for x in &t.data {
            w.0.extend_from_slice(&(x.as_f64() as f32).to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&w.0);
    w.0.extend_from_slice(&crc.to_le_bytes());
    w.0
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model<f32>, ModelError> {
    if bytes.len() < MAGIC.len() + 8 {
        return Err(ModelError::Checksum);
    }
    let (body, crc) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(crc.try_into().expect("4 bytes")) {
        return Err(if body.starts_with(MAGIC) {
            ModelError::Checksum
        } else {
            ModelError::BadMagic
        });
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(ModelError::BadMagic);
    }
    let version = r.u32()? as u32;
    if version != FORMAT_VERSION {
        return Err(ModelError::Version(version));
    }
    let manifest = r.str()?;
    let get = |key: &str| -> Result<&str, ModelError> {
        manifest
            .lines()
            .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
            .ok_or_else(|| ModelError::Format(format!("manifest lacks {}", key)))
    };
    let num = |key: &str| -> Result<usize, ModelError> {
        get(key)?.parse().map_err(|_| ModelError::Format(format!("bad {}", key)))
    };
    let fmt = |e: &dyn std::fmt::Display| ModelError::Format(e.to_string());
    let dims = Dims {
        word: num("word")?,
        char: num("char")?,
        char_hidden: num("char_hidden")?,
        hidden: num("hidden")?,
        layers: num("layers")?,
        mlp: num("mlp")?,
    };
    let words = Vocab::new(r.strs()?);
    let word_counts = (0..words.len()).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
    let chars = Vocab::new(r.strs()?);
    let n_tags = r.u32()?;
    let mut tags = Vec::with_capacity(n_tags);
    for _ in 0..n_tags {
        let name = r.str()?;
        tags.push(TagType {
            name,
            labels: Vocab::new(r.strs()?),
        });
    }
    let actions = r
        .strs()?
        .iter()
        .map(|s| s.parse::<Action>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fmt(&e))?;
    let mut labels = LabelInventory::new(r.strs()?, r.strs()?);
    labels.permissive = get("permissive_labels")? == "true";
    let spec = ParserSpec {
        system: get("system")?.parse().map_err(|e| fmt(&e))?,
        oracle: get("oracle")?.parse().map_err(|e| fmt(&e))?,
        templates: get("templates")?.parse().map_err(|e| fmt(&e))?,
        labels,
    };
    let vocab = Vocabularies::new(words, word_counts, chars, tags, actions);
    let expected = Model::<f32>::empty_layout(&dims, &vocab, spec.templates);
    if r.u32()? != expected.len() {
        return Err(ModelError::Format("wrong number of tensors".into()));
    }
    let mut params = Vec::with_capacity(expected.len());
    for (name, rows, cols) in expected {
        let (n, rr, cc) = (r.str()?, r.u32()?, r.u32()?);
        if n != name || rr != rows || cc != cols {
            return Err(ModelError::Format(format!(
                "tensor {} {}x{} where {} {}x{} was expected",
                n, rr, cc, name, rows, cols
            )));
        }
        let raw = r.take(rows * cols * 4)?;
        let data = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        params.push(Tensor { name, rows, cols, data });
    }
    if r.pos != body.len() {
        return Err(ModelError::Format("trailing data".into()));
    }
    Ok(Model::from_parts(dims, spec, vocab, params))
}

pub fn save_model<T: Scalar>(model: &Model<T>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model<f32>, ModelError> {
    from_bytes(&fs::read(path)?)
}
