//! Pretrained word-embedding tables in word2vec text and binary formats.
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::TokenSeq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingFormat {
    Word2vecText,
    Word2vecBinary,
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "word2vec_text" | "txt" => Ok(EmbeddingFormat::Word2vecText),
            "binary" | "word2vec_binary" | "bin" => Ok(EmbeddingFormat::Word2vecBinary),
            other => Err(Error::InvalidArgument(format!(
                "unknown embedding format {other:?}"
            ))),
        }
    }
}

impl EmbeddingFormat {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingFormat::Word2vecText => "text",
            EmbeddingFormat::Word2vecBinary => "binary",
        }
    }
}

/// Immutable token → vector table; all rows have length `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

/// Mean of in-vocabulary token vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledVector {
    pub vector: Vec<f32>,
    /// No token was found in the table.
    pub all_oov: bool,
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Embedding(format!("header {line:?} lacks a valid {what}")))
    };
    let words = next("vocabulary size")?;
    let dim = next("dimension")?;
    if dim == 0 {
        return Err(Error::Embedding("dimension must be positive".into()));
    }
    Ok((words, dim))
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` rows, checking dimensions.
    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = (String, Vec<f32>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Embedding("dimension must be positive".into()));
        }
        let mut table = EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        };
        for (word, vec) in rows {
            table.push(word, &vec)?;
        }
        Ok(table)
    }

    fn push(&mut self, word: String, vec: &[f32]) -> Result<()> {
        if vec.len() != self.dim {
            return Err(Error::Embedding(format!(
                "row {word:?} has {} values, expected {}",
                vec.len(),
                self.dim
            )));
        }
        if vec.iter().any(|v| !v.is_finite()) {
            return Err(Error::Embedding(format!("row {word:?} has a non-finite value")));
        }
        if self.index.contains_key(&word) {
            return Err(Error::Embedding(format!("duplicate token {word:?}")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vec);
        Ok(())
    }

    pub fn load(path: &Path, format: EmbeddingFormat) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        match format {
            EmbeddingFormat::Word2vecText => Self::read_text(reader),
            EmbeddingFormat::Word2vecBinary => Self::read_binary(reader),
        }
        .map_err(|e| match e {
            Error::Embedding(msg) => Error::Embedding(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn read_text(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::Embedding(e.to_string()))?,
            None => return Err(Error::Embedding("empty file".into())),
        };
        let (declared, dim) = parse_header(&header)?;
        let mut table = EmbeddingTable::from_rows(dim, [])?;
        let mut vec = Vec::with_capacity(dim);
        for line in lines {
            let line = line.map_err(|e| Error::Embedding(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default().to_string();
            vec.clear();
            for v in parts {
                vec.push(
                    v.parse::<f32>()
                        .map_err(|_| Error::Embedding(format!("row {word:?}: bad value {v:?}")))?,
                );
            }
            table.push(word, &vec)?;
        }
        if table.len() != declared {
            return Err(Error::Embedding(format!(
                "header declares {declared} words, file has {}",
                table.len()
            )));
        }
        Ok(table)
    }

    pub fn read_binary(mut reader: impl BufRead) -> Result<Self> {
        let mut header = String::new();
        reader
            .read_line(&mut header)
            .map_err(|e| Error::Embedding(e.to_string()))?;
        if header.is_empty() {
            return Err(Error::Embedding("empty file".into()));
        }
        let (declared, dim) = parse_header(&header)?;
        let mut table = EmbeddingTable::from_rows(dim, [])?;
        let mut raw = vec![0u8; 4 * dim];
        let mut vec = vec![0f32; dim];
        for i in 0..declared {
            let mut word = Vec::new();
            // skip the newline some writers put between entries
            loop {
                let mut byte = [0u8; 1];
                match reader.read(&mut byte) {
                    Ok(0) => {
                        return Err(Error::Embedding(format!(
                            "truncated: header declares {declared} words, file ends after {i}"
                        )))
                    }
                    Ok(_) => {}
                    Err(e) => return Err(Error::Embedding(e.to_string())),
                }
                match byte[0] {
                    b' ' => break,
                    b'\n' if word.is_empty() => {}
                    b => word.push(b),
                }
            }
            let word = String::from_utf8(word)
                .map_err(|_| Error::Embedding(format!("entry {i}: token is not UTF-8")))?;
            reader
                .read_exact(&mut raw)
                .map_err(|_| Error::Embedding(format!("truncated vector for {word:?}")))?;
            for (v, chunk) in vec.iter_mut().zip(raw.chunks_exact(4)) {
                *v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            }
            table.push(word, &vec)?;
        }
        let mut rest = Vec::new();
        reader
            .read_to_end(&mut rest)
            .map_err(|e| Error::Embedding(e.to_string()))?;
        if rest.iter().any(|b| !b.is_ascii_whitespace()) {
            return Err(Error::Embedding(format!(
                "header declares {declared} words but more data follows"
            )));
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path, format: EmbeddingFormat) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        match format {
            EmbeddingFormat::Word2vecText => self.write_text(&mut out),
            EmbeddingFormat::Word2vecBinary => self.write_binary(&mut out),
        }
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
    }

    pub fn write_text(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            write!(out, "{word}")?;
            for v in self.row(i) {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_binary(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            out.write_all(word.as_bytes())?;
            out.write_all(b" ")?;
            for v in self.row(i) {
                out.write_all(&v.to_le_bytes())?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Vector at a row index from [`EmbeddingTable::index_of`].
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Case-sensitive lookup.
    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Mean of the vectors of in-vocabulary tokens; OOV tokens are skipped.
    pub fn avg_vector(&self, tokens: &TokenSeq) -> PooledVector {
        self.avg_of(tokens.tokens().iter().map(String::as_str))
    }

    pub fn avg_of<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> PooledVector {
        let mut sum = vec![0f64; self.dim];
        let mut n = 0usize;
        for t in tokens {
            if let Some(v) = self.get(t) {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += x as f64;
                }
                n += 1;
            }
        }
        if n == 0 {
            return PooledVector {
                vector: vec![0.0; self.dim],
                all_oov: true,
            };
        }
        PooledVector {
            vector: sum.into_iter().map(|s| (s / n as f64) as f32).collect(),
            all_oov: false,
        }
    }
}

/// `u·v / (‖u‖‖v‖)`, or 0 when either norm is zero.
pub fn cosine<T: Float>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in u.iter().zip(v) {
        dot = dot + a * b;
        nu = nu + a * a;
        nv = nv + b * b;
    }
    if nu == T::zero() || nv == T::zero() {
        return Ok(T::zero());
    }
    let c = dot / (nu.sqrt() * nv.sqrt());
    Ok(c.max(-T::one()).min(T::one()))
}
