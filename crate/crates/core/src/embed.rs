//! Word vectors in fastText text format and average-embedding cosine
//! similarity.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::text::Token;

const NORM_EPS: f64 = 1e-12;

/// Token vectors keyed by lowercased token. Out-of-vocabulary tokens are
/// skipped when averaging.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be at least 1".into()));
        }
        Ok(EmbeddingTable {
            dim,
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    /// Builds a table from `(token, vector)` pairs; the first occurrence of a
    /// lowercased token wins.
    pub fn from_pairs<I, S>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut table = EmbeddingTable::new(dim)?;
        for (token, vector) in pairs {
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: vector.len(),
                });
            }
            table.insert(token.as_ref(), vector.iter().map(|&v| v as f32));
        }
        Ok(table)
    }

    fn insert(&mut self, token: &str, values: impl Iterator<Item = f32>) -> bool {
        let key = token.to_lowercase();
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.index.len());
        self.data.extend(values);
        true
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, norm: &str) -> Option<&[f32]> {
        self.index
            .get(norm)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, norm: &str) -> bool {
        self.index.contains_key(norm)
    }
}

/// Reads the text `.vec` format: a `<count> <dim>` header, then one
/// `<token> <v1> ... <vdim>` row per line.
pub fn read_vec(r: impl Read, origin: &str, vocab_filter: Option<&HashSet<String>>) -> Result<EmbeddingTable> {
    let mut lines = BufReader::new(r).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(origin, e))?,
        None => return Err(Error::parse(origin, 1, "missing `<count> <dim>` header")),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [count, dim] => match (count.parse::<usize>(), dim.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(Error::parse(origin, 1, format!("bad header `{header}`"))),
        },
        _ => return Err(Error::parse(origin, 1, format!("bad header `{header}`"))),
    };

    let mut table = EmbeddingTable::new(dim)?;
    table
        .data
        .reserve(vocab_filter.map_or(count, HashSet::len).min(4_000_000) * dim);
    let mut values: Vec<f32> = Vec::with_capacity(dim);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        if let Some(filter) = vocab_filter {
            if !filter.contains(&token.to_lowercase()) {
                continue;
            }
        }
        values.clear();
        for part in parts {
            let v: f32 = part
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("bad vector component `{part}`")))?;
            values.push(v);
        }
        if values.len() != dim {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        table.insert(token, values.iter().copied());
    }
    Ok(table)
}

/// Loads a `.vec` file; a `.gz` extension is decompressed on the fly.
pub fn load_vec(path: &Path, vocab_filter: Option<&HashSet<String>>) -> Result<EmbeddingTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    if path.extension().is_some_and(|e| e == "gz") {
        read_vec(GzDecoder::new(file), &origin, vocab_filter)
    } else {
        read_vec(file, &origin, vocab_filter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub values: Vec<f64>,
    /// Number of in-vocabulary tokens averaged.
    pub support: usize,
}

/// Mean of the in-vocabulary token vectors.
///
/// The mean is accumulated per distinct token as `(count / support) * v`,
/// in first-appearance order, so a sequence and the same sequence repeated
/// produce bit-identical vectors.
pub fn average_embedding(tokens: &[Token], table: &EmbeddingTable) -> SentenceVector {
    let mut order: Vec<&str> = Vec::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut support = 0;
    for t in tokens {
        if table.contains(t.norm()) {
            support += 1;
            let c = counts.entry(t.norm()).or_insert(0);
            if *c == 0 {
                order.push(t.norm());
            }
            *c += 1;
        }
    }
    let mut values = vec![0.0; table.dim()];
    for norm in order {
        let share = counts[norm] as f64 / support as f64;
        let v = table.get(norm).expect("counted tokens are in vocabulary");
        for (acc, x) in values.iter_mut().zip(v) {
            *acc += share * f64::from(*x);
        }
    }
    SentenceVector { values, support }
}

/// Cosine similarity, defined as 0 when either side has no support or a
/// near-zero norm.
pub fn cosine(u: &SentenceVector, v: &SentenceVector) -> Result<f64> {
    if u.values.len() != v.values.len() {
        return Err(Error::DimensionMismatch {
            expected: u.values.len(),
            got: v.values.len(),
        });
    }
    if u.support == 0 || v.support == 0 {
        return Ok(0.0);
    }
    let dot: f64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum();
    let nu = u.values.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.values.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu < NORM_EPS || nv < NORM_EPS {
        return Ok(0.0);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// `cosine(avg(x), avg(y))` over one table; dimensions always agree.
pub fn similarity(x: &[Token], y: &[Token], table: &EmbeddingTable) -> f64 {
    cosine(&average_embedding(x, table), &average_embedding(y, table))
        .expect("vectors from one table share a dimension")
}
