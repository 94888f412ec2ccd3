//! Word embeddings: vocabulary handling, vector storage and I/O, cosine
//! similarity, nearest neighbours, and a skip-gram negative-sampling
//! trainer (see [`sgns`]).
//!
//! Vectors are `f64` end to end. Cosine similarities are then stable under
//! uniform rescaling of the vectors to well below 1e-9, which downstream
//! association statistics rely on; the text format rounds to nine
//! significant digits, chosen so that save→load→save is byte-identical.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{atomic_write, fmt_g9};
use crate::tokenize::TokenStream;

pub mod sgns;
pub use sgns::{train_sgns, train_sgns_with_stats, TrainStats};

/// Hyperparameters for skip-gram negative-sampling training. All fields
/// have defaults, so a config file may specify only what it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Embedding dimensionality.
    pub dim: usize,
    /// Maximum context window; the effective window per position is drawn
    /// uniformly from `1..=window`.
    pub window: usize,
    /// Tokens occurring fewer times than this are dropped from the vocabulary.
    pub min_count: u64,
    /// Negative samples per positive pair.
    pub negatives: usize,
    /// Passes over the corpus.
    pub epochs: usize,
    /// Starting learning rate; decays linearly to 1e-4 of itself.
    pub initial_lr: f64,
    /// Frequent-word subsampling threshold (0 disables).
    pub subsample: f64,
    /// Seed for initialisation and all sampling.
    pub seed: u64,
    /// Worker count. Training is bit-reproducible at `threads = 1`; with
    /// more workers, lock-free concurrent updates make results depend on
    /// interleaving.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 5,
            min_count: 20,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            subsample: 1e-3,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        if self.window == 0 {
            return bad("window must be at least 1".into());
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        if !(self.initial_lr.is_finite() && self.initial_lr > 0.0) {
            return bad(format!("initial_lr must be positive, got {}", self.initial_lr));
        }
        if !(self.subsample.is_finite() && self.subsample >= 0.0) {
            return bad(format!("subsample must be non-negative, got {}", self.subsample));
        }
        Ok(())
    }
}

/// Training vocabulary: tokens meeting the frequency floor, ordered by
/// descending count with lexicographic tie-break, so token ids are a pure
/// function of the corpus.
#[derive(Debug, Clone)]
pub struct Vocab {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total: u64,
}

impl Vocab {
    pub fn build(streams: &[TokenStream], min_count: u64) -> Result<Self> {
        let mut freqs: HashMap<&str, u64> = HashMap::new();
        for s in streams {
            for t in &s.tokens {
                *freqs.entry(t).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> =
            freqs.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocab { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let tokens: Vec<String> = kept.iter().map(|(t, _)| t.to_string()).collect();
        let counts: Vec<u64> = kept.iter().map(|&(_, c)| c).collect();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let total = counts.iter().sum();
        Ok(Vocab { tokens, counts, index, total })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Total in-vocabulary token occurrences in the training corpus.
    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// A trained (or loaded) embedding: one `dim`-length vector per token,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f64>,
}

impl EmbeddingModel {
    pub fn new(tokens: Vec<String>, dim: usize, vectors: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dim must be at least 1".into()));
        }
        if vectors.len() != tokens.len() * dim {
            return Err(Error::InvalidConfig(format!(
                "{} tokens × dim {} needs {} values, got {}",
                tokens.len(),
                dim,
                tokens.len() * dim,
                vectors.len()
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::InvalidConfig(format!(
                    "token {t:?} is empty or contains whitespace"
                )));
            }
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate token {t:?}")));
            }
        }
        if let Some(v) = vectors.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite vector component {v}")));
        }
        Ok(EmbeddingModel { tokens, index, dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.vector_at(i))
    }

    pub fn vector_at(&self, id: usize) -> &[f64] {
        &self.vectors[id * self.dim..(id + 1) * self.dim]
    }

    /// The `k` most cosine-similar tokens to `token`, best first. Ties break
    /// lexicographically so rankings are deterministic. Tokens whose vector
    /// has zero norm cannot be ranked and are skipped.
    pub fn top_k_neighbors(
        &self,
        token: &str,
        k: usize,
        exclude_self: bool,
    ) -> Result<Vec<(String, f64)>> {
        let &id = self
            .index
            .get(token)
            .ok_or_else(|| Error::TokenNotFound { token: token.to_string() })?;
        let query = self.vector_at(id);
        let mut scored: Vec<(String, f64)> = Vec::with_capacity(self.len());
        for (i, t) in self.tokens.iter().enumerate() {
            if exclude_self && i == id {
                continue;
            }
            match cosine(query, self.vector_at(i)) {
                Ok(c) => scored.push((t.clone(), c)),
                Err(Error::ZeroVector) => continue,
                Err(e) => return Err(e),
            }
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored)
    }

    /// Write as text: a `<count> <dim>` header line, then one
    /// space-separated row per token with values at nine significant
    /// digits. Re-saving a loaded model reproduces the bytes exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(t);
            for v in self.vector_at(i) {
                out.push(' ');
                out.push_str(&fmt_g9(*v));
            }
            out.push('\n');
        }
        atomic_write(path, out.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&raw, &path.display().to_string())
    }

    pub fn parse(raw: &str, origin: &str) -> Result<Self> {
        let mut lines = raw.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "empty vector file"))?;
        let (n, dim) = match header.split_whitespace().collect::<Vec<_>>()[..] {
            [n, d] => (
                n.parse::<usize>()
                    .map_err(|_| Error::parse(origin, 1, format!("bad token count {n:?}")))?,
                d.parse::<usize>()
                    .map_err(|_| Error::parse(origin, 1, format!("bad dimension {d:?}")))?,
            ),
            _ => {
                return Err(Error::parse(
                    origin,
                    1,
                    format!("expected `<count> <dim>` header, got {header:?}"),
                ))
            }
        };
        let mut tokens = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * dim);
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().expect("non-empty line has a field");
            let mut row = Vec::with_capacity(dim);
            for f in fields {
                let v: f64 = f.parse().map_err(|_| {
                    Error::parse(origin, idx + 1, format!("bad vector value {f:?}"))
                })?;
                if !v.is_finite() {
                    return Err(Error::parse(origin, idx + 1, format!("non-finite value {f}")));
                }
                row.push(v);
            }
            if row.len() != dim {
                return Err(Error::parse(
                    origin,
                    idx + 1,
                    format!("expected {dim} values, got {}", row.len()),
                ));
            }
            tokens.push(token.to_string());
            vectors.push(row);
        }
        if tokens.len() != n {
            return Err(Error::parse(
                origin,
                1,
                format!("header promises {n} rows, file has {}", tokens.len()),
            ));
        }
        let flat: Vec<f64> = vectors.into_iter().flatten().collect();
        let mut seen = HashMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if let Some(first) = seen.insert(t.clone(), i) {
                return Err(Error::parse(
                    origin,
                    i + 2,
                    format!("duplicate token {t:?} (first at line {})", first + 2),
                ));
            }
        }
        EmbeddingModel::new(tokens, dim, flat)
    }
}

/// Cosine similarity between two vectors of equal dimension. Zero-norm
/// input is an error rather than a silent 0: a zero vector carries no
/// direction, and association statistics must not average it in.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch { left: a.len(), right: b.len() });
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}
