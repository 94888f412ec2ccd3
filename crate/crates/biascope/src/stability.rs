//! Embedding stability diagnostics for small corpora: how much do nearest
//! neighbourhoods move when only the random seed changes, and how well does
//! a setting cope with period spelling noise?
//!
//! Both diagnostics run over a grid of tokenizer/dimension/frequency-floor
//! settings with several reseeded trainings per setting, which is the
//! procedure for choosing hyperparameters when the corpus is far too small
//! for the usual defaults to be trusted.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::embed::{train_sgns, EmbeddingModel, TrainConfig};
use crate::error::{Error, Result};
use crate::tokenize::TokenStream;

/// Neighbourhood size used by the seed-stability diagnostic.
pub const K_JACCARD: usize = 20;
/// Neighbourhood size used by the misspelling diagnostic.
pub const K_MISSPELL: usize = 5;

/// |A ∩ B| / |A ∪ B|, with two empty sets counting as identical.
pub fn jaccard<T: std::hash::Hash + Eq>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.iter().filter(|x| b.contains(*x)).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Per-token unit vectors, with zero-norm rows marked unrankable.
struct UnitRows(Vec<Option<Vec<f64>>>);

impl UnitRows {
    fn build(model: &EmbeddingModel) -> Self {
        UnitRows(
            (0..model.len())
                .map(|i| {
                    let row = model.vector_at(i);
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    (norm > 0.0).then(|| row.iter().map(|v| v / norm).collect())
                })
                .collect(),
        )
    }
}

/// Top-k neighbour tokens of `query_id`, self excluded, ranked by cosine
/// with lexicographic tie-break — the same ordering as
/// [`EmbeddingModel::top_k_neighbors`], just computed against pre-normalised
/// rows so whole-vocabulary scans stay cheap.
fn top_k_set<'m>(
    model: &'m EmbeddingModel,
    units: &UnitRows,
    query_id: usize,
    k: usize,
) -> HashSet<&'m str> {
    let Some(query) = units.0[query_id].as_deref() else {
        return HashSet::new();
    };
    let mut scored: Vec<(f64, &str)> = Vec::with_capacity(model.len());
    for (i, unit) in units.0.iter().enumerate() {
        if i == query_id {
            continue;
        }
        let Some(u) = unit.as_deref() else { continue };
        let dot: f64 = query.iter().zip(u).map(|(a, b)| a * b).sum();
        scored.push((dot, model.tokens()[i].as_str()));
    }
    let desc = |a: &(f64, &str), b: &(f64, &str)| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1));
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, desc);
        scored.truncate(k);
    }
    scored.into_iter().map(|(_, t)| t).collect()
}

/// Mean neighbourhood overlap across reseeded trainings of one setting.
///
/// For every token in the vocabulary intersection of all models, the top-`k`
/// neighbour sets are compared between every pair of models with the Jaccard
/// index; per-token pair means are then averaged over tokens.
pub fn stability_jaccard(models: &[EmbeddingModel], k: usize) -> Result<f64> {
    if models.len() < 2 {
        return Err(Error::TooFewModels(models.len()));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("neighbourhood size k must be at least 1".into()));
    }
    let mut shared: Vec<&str> = models[0]
        .tokens()
        .iter()
        .map(String::as_str)
        .filter(|t| models[1..].iter().all(|m| m.contains(t)))
        .collect();
    shared.sort_unstable();
    if shared.is_empty() {
        return Err(Error::NoSharedVocab);
    }

    let units: Vec<UnitRows> = models.iter().map(UnitRows::build).collect();

    let per_token = |token: &&str| -> f64 {
        let sets: Vec<HashSet<&str>> = models
            .iter()
            .zip(&units)
            .map(|(m, u)| {
                let id = m
                    .tokens()
                    .iter()
                    .position(|t| t == *token)
                    .expect("token is in every model");
                top_k_set(m, u, id, k)
            })
            .collect();
        let mut sum = 0.0;
        let mut n = 0u32;
        for i in 0..sets.len() {
            for j in (i + 1)..sets.len() {
                sum += jaccard(&sets[i], &sets[j]);
                n += 1;
            }
        }
        sum / n as f64
    };

    #[cfg(feature = "parallel")]
    let token_means: Vec<f64> = shared.par_iter().map(per_token).collect();
    #[cfg(not(feature = "parallel"))]
    let token_means: Vec<f64> = shared.iter().map(per_token).collect();

    Ok(token_means.iter().sum::<f64>() / token_means.len() as f64)
}

/// A known OCR/period misspelling and its modern form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisspellPair {
    pub wrong: String,
    pub right: String,
}

/// Parse a misspelling list: tab-separated `wrong<TAB>right` lines,
/// `#` comments and blank lines ignored, lowercased.
pub fn parse_misspellings(raw: &str, origin: &str) -> Result<Vec<MisspellPair>> {
    let mut pairs = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((wrong, right)) = line.split_once('\t') else {
            return Err(Error::parse(origin, idx + 1, "expected `wrong<TAB>right`"));
        };
        let (wrong, right) = (wrong.trim().to_lowercase(), right.trim().to_lowercase());
        if wrong.is_empty() || right.is_empty() {
            return Err(Error::parse(origin, idx + 1, "empty field"));
        }
        pairs.push(MisspellPair { wrong, right });
    }
    if pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    Ok(pairs)
}

pub fn load_misspellings(path: impl AsRef<Path>) -> Result<Vec<MisspellPair>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_misspellings(&raw, &path.display().to_string())
}

/// How one model handles known misspellings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MisspellingScore {
    /// Fraction of pairs with both forms in the vocabulary.
    pub coverage: f64,
    /// Fraction of pairs where the correction ranks in the misspelling's
    /// top-k neighbours. Pairs not covered by the vocabulary count as
    /// misses, so this is bounded above by `coverage`.
    pub in_top_k: f64,
}

pub fn misspelling_compat(
    model: &EmbeddingModel,
    pairs: &[MisspellPair],
    k: usize,
) -> Result<MisspellingScore> {
    if pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let mut covered = 0usize;
    let mut hits = 0usize;
    for p in pairs {
        if !(model.contains(&p.wrong) && model.contains(&p.right)) {
            continue;
        }
        covered += 1;
        let top = model.top_k_neighbors(&p.wrong, k, true)?;
        if top.iter().any(|(t, _)| *t == p.right) {
            hits += 1;
        }
    }
    Ok(MisspellingScore {
        coverage: covered as f64 / pairs.len() as f64,
        in_top_k: hits as f64 / pairs.len() as f64,
    })
}

/// One setting in the hyperparameter sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    /// Which tokenisation of the corpus to train on (e.g. "word", "bpe").
    pub tokenizer: String,
    pub dim: usize,
    pub min_count: u64,
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<Vec<GridPoint>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_grid(&raw, &path.display().to_string())
}

pub fn parse_grid(raw: &str, origin: &str) -> Result<Vec<GridPoint>> {
    let grid: Vec<GridPoint> =
        serde_json::from_str(raw).map_err(|e| Error::parse(origin, 1, e.to_string()))?;
    if grid.is_empty() {
        return Err(Error::InvalidConfig("stability grid is empty".into()));
    }
    Ok(grid)
}

/// Stability results for one grid setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub tokenizer: String,
    pub dim: usize,
    pub min_count: u64,
    pub n_runs: usize,
    pub k_neighbors: usize,
    /// Seed-stability: mean top-k Jaccard across run pairs (see
    /// [`stability_jaccard`]).
    pub mean_jaccard_top_k: f64,
    pub misspelling_k: usize,
    /// Mean [`MisspellingScore::in_top_k`] across runs.
    pub misspelling_top_k_rate: f64,
    /// Mean [`MisspellingScore::coverage`] across runs.
    pub misspelling_coverage: f64,
}

/// Run the full sweep: for each grid setting, train `n_runs` models that
/// differ only in seed (`base.seed + run`), then score seed stability and
/// misspelling handling.
///
/// `streams_by_tokenizer` supplies the pre-tokenised corpus for every
/// tokenizer name the grid mentions. Runs are independent and are trained
/// in parallel when the `parallel` feature is on; per-run seeds make the
/// result identical either way.
pub fn run_stability_suite(
    streams_by_tokenizer: &BTreeMap<String, Vec<TokenStream>>,
    base: &TrainConfig,
    grid: &[GridPoint],
    n_runs: usize,
    pairs: &[MisspellPair],
) -> Result<Vec<StabilityReport>> {
    if n_runs < 2 {
        return Err(Error::InvalidConfig(format!(
            "stability needs at least 2 runs per setting, got {n_runs}"
        )));
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig("stability grid is empty".into()));
    }
    let mut reports = Vec::with_capacity(grid.len());
    for point in grid {
        let streams = streams_by_tokenizer.get(&point.tokenizer).ok_or_else(|| {
            Error::InvalidConfig(format!("no token streams for tokenizer {:?}", point.tokenizer))
        })?;
        let configs: Vec<TrainConfig> = (0..n_runs)
            .map(|run| TrainConfig {
                dim: point.dim,
                min_count: point.min_count,
                seed: base.seed + run as u64,
                ..base.clone()
            })
            .collect();

        let train_one = |c: &TrainConfig| train_sgns(streams, c);
        #[cfg(feature = "parallel")]
        let models: Result<Vec<EmbeddingModel>> = configs.par_iter().map(train_one).collect();
        #[cfg(not(feature = "parallel"))]
        let models: Result<Vec<EmbeddingModel>> = configs.iter().map(train_one).collect();
        let models = models?;

        let mean_jaccard = stability_jaccard(&models, K_JACCARD)?;
        let mut top_rate = 0.0;
        let mut coverage = 0.0;
        for m in &models {
            let score = misspelling_compat(m, pairs, K_MISSPELL)?;
            top_rate += score.in_top_k;
            coverage += score.coverage;
        }
        reports.push(StabilityReport {
            tokenizer: point.tokenizer.clone(),
            dim: point.dim,
            min_count: point.min_count,
            n_runs,
            k_neighbors: K_JACCARD,
            mean_jaccard_top_k: mean_jaccard,
            misspelling_k: K_MISSPELL,
            misspelling_top_k_rate: top_rate / n_runs as f64,
            misspelling_coverage: coverage / n_runs as f64,
        });
    }
    Ok(reports)
}
