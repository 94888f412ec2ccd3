//! Word-embedding association test: does target set X sit closer to
//! attribute set A than target set Y does, relative to attribute set B?
//!
//! For a word w, `s(w) = mean_a cos(w, a) − mean_b cos(w, b)`. The test
//! statistic is `Σ_{x∈X} s(x) − Σ_{y∈Y} s(y)`; the effect size is Cohen's-d
//! style, `(mean_X s − mean_Y s) / pop-std of s over X ∪ Y`; significance
//! comes from a sampled permutation test over re-partitions of X ∪ Y into
//! the original set sizes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use super::{get_set, WordSets};
use crate::embed::{cosine, EmbeddingModel};
use crate::error::{Error, Result};

/// Fewest permutations accepted for a p-value.
pub const MIN_PERMUTATIONS: usize = 100;

/// One association test: target set names `x`/`y`, attribute set names
/// `a`/`b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatSpec {
    pub name: String,
    pub x: String,
    pub y: String,
    pub a: String,
    pub b: String,
}

pub fn load_specs(path: impl AsRef<std::path::Path>) -> Result<Vec<WeatSpec>> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_specs(&raw, &path.display().to_string())
}

pub fn parse_specs(raw: &str, origin: &str) -> Result<Vec<WeatSpec>> {
    let specs: Vec<WeatSpec> =
        serde_json::from_str(raw).map_err(|e| Error::parse(origin, 1, e.to_string()))?;
    if specs.is_empty() {
        return Err(Error::parse(origin, 1, "no test definitions in file"));
    }
    Ok(specs)
}

/// Result of one association test against one embedding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeatResult {
    pub name: String,
    /// Σ_X s − Σ_Y s over the words actually present in the vocabulary.
    pub statistic: f64,
    /// Standardised separation of the two target sets; `None` when every
    /// target word has the same association value (zero spread).
    pub effect_size: Option<f64>,
    /// One-sided sampled permutation p-value, smoothed as
    /// `(1 + #{perm ≥ observed}) / (1 + n)`.
    pub p_value: f64,
    pub n_permutations: usize,
    /// Words used after vocabulary filtering: |X|, |Y|, |A|, |B|.
    pub n_x: usize,
    pub n_y: usize,
    pub n_a: usize,
    pub n_b: usize,
    /// Words from the four sets missing from the vocabulary.
    pub dropped: Vec<String>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Association values for the surviving words of all four sets, X block
/// first, plus the bookkeeping shared by every entry point: set sizes after
/// filtering and the words that were dropped.
struct Filtered {
    assoc: Vec<f64>,
    n_x: usize,
    n_y: usize,
    n_a: usize,
    n_b: usize,
    dropped: Vec<String>,
}

/// Drop out-of-vocabulary words from all four sets, failing if any set
/// empties, and compute `s(w)` for every surviving target word.
fn filter_and_assoc(
    model: &EmbeddingModel,
    x: (&str, &[String]),
    y: (&str, &[String]),
    a: (&str, &[String]),
    b: (&str, &[String]),
) -> Result<Filtered> {
    let mut dropped = Vec::new();
    let x_words = filter_present(model, x.1, &mut dropped);
    let y_words = filter_present(model, y.1, &mut dropped);
    let a_words = filter_present(model, a.1, &mut dropped);
    let b_words = filter_present(model, b.1, &mut dropped);
    for (name, words, role) in [
        (x.0, &x_words, " after vocabulary filtering (target)"),
        (y.0, &y_words, " after vocabulary filtering (target)"),
        (a.0, &a_words, " after vocabulary filtering (attribute)"),
        (b.0, &b_words, " after vocabulary filtering (attribute)"),
    ] {
        if words.is_empty() {
            return Err(Error::EmptyWordSet { name: name.to_string(), context: role.to_string() });
        }
    }

    let vecs = |words: &[&str]| -> Vec<&[f64]> {
        words.iter().map(|w| model.vector(w).expect("filtered to present")).collect()
    };
    let a_vecs = vecs(&a_words);
    let b_vecs = vecs(&b_words);
    let mut assoc = Vec::with_capacity(x_words.len() + y_words.len());
    for w in x_words.iter().chain(&y_words) {
        assoc.push(word_assoc(model.vector(w).expect("present"), &a_vecs, &b_vecs)?);
    }
    Ok(Filtered {
        assoc,
        n_x: x_words.len(),
        n_y: y_words.len(),
        n_a: a_words.len(),
        n_b: b_words.len(),
        dropped,
    })
}

/// `s(w, A, B)` for one word. The word itself must be in the vocabulary;
/// out-of-vocabulary attribute words are dropped, and a fully absent
/// attribute set is an error.
pub fn weat_word_assoc(
    model: &EmbeddingModel,
    word: &str,
    a: &[String],
    b: &[String],
) -> Result<f64> {
    let w = model
        .vector(word)
        .ok_or_else(|| Error::TokenNotFound { token: word.to_string() })?;
    let mut dropped = Vec::new();
    let a_words = filter_present(model, a, &mut dropped);
    let b_words = filter_present(model, b, &mut dropped);
    for (label, words) in [("a", &a_words), ("b", &b_words)] {
        if words.is_empty() {
            return Err(Error::EmptyWordSet {
                name: label.to_string(),
                context: " after vocabulary filtering (attribute)".to_string(),
            });
        }
    }
    let vecs = |words: &[&str]| -> Vec<&[f64]> {
        words.iter().map(|w| model.vector(w).expect("filtered to present")).collect()
    };
    word_assoc(w, &vecs(&a_words), &vecs(&b_words))
}

fn wrapper_filtered(
    model: &EmbeddingModel,
    x: &[String],
    y: &[String],
    a: &[String],
    b: &[String],
) -> Result<Filtered> {
    filter_and_assoc(model, ("x", x), ("y", y), ("a", a), ("b", b))
}

/// `Σ_X s − Σ_Y s` over the words present in the vocabulary. A set with no
/// surviving words is an error.
pub fn weat_statistic(
    model: &EmbeddingModel,
    x: &[String],
    y: &[String],
    a: &[String],
    b: &[String],
) -> Result<f64> {
    let f = wrapper_filtered(model, x, y, a, b)?;
    Ok(statistic_of(&f.assoc, f.n_x))
}

/// Standardised target separation; `None` when the association values have
/// zero spread.
pub fn weat_effect_size(
    model: &EmbeddingModel,
    x: &[String],
    y: &[String],
    a: &[String],
    b: &[String],
) -> Result<Option<f64>> {
    let f = wrapper_filtered(model, x, y, a, b)?;
    Ok(effect_from_assoc(&f.assoc, f.n_x))
}

/// One-sided sampled permutation p-value over re-partitions of X ∪ Y.
pub fn weat_p_value(
    model: &EmbeddingModel,
    x: &[String],
    y: &[String],
    a: &[String],
    b: &[String],
    n_permutations: usize,
    seed: u64,
) -> Result<f64> {
    if n_permutations < MIN_PERMUTATIONS {
        return Err(Error::TooFewPermutations { min: MIN_PERMUTATIONS, got: n_permutations });
    }
    let f = wrapper_filtered(model, x, y, a, b)?;
    Ok(p_value_from_assoc(&f.assoc, f.n_x, n_permutations, seed))
}

fn effect_from_assoc(assoc: &[f64], n_x: usize) -> Option<f64> {
    let (xs, ys) = assoc.split_at(n_x);
    let all_mean = mean(assoc);
    let var = assoc.iter().map(|s| (s - all_mean).powi(2)).sum::<f64>() / assoc.len() as f64;
    (var > 0.0).then(|| (mean(xs) - mean(ys)) / var.sqrt())
}

fn p_value_from_assoc(assoc: &[f64], n_x: usize, n_permutations: usize, seed: u64) -> f64 {
    let observed = statistic_of(assoc, n_x);
    let total: f64 = assoc.iter().sum();
    let count_one = |i: usize| -> u64 {
        let mut rng = perm_rng(seed, i as u64);
        let mut idx: Vec<usize> = (0..assoc.len()).collect();
        let (chosen, _) = idx.partial_shuffle(&mut rng, n_x);
        let x_sum: f64 = chosen.iter().map(|&j| assoc[j]).sum();
        // Σ_X' − Σ_Y' = 2·Σ_X' − Σ_all
        u64::from(2.0 * x_sum - total >= observed)
    };
    #[cfg(feature = "parallel")]
    let exceed: u64 = (0..n_permutations).into_par_iter().map(count_one).sum();
    #[cfg(not(feature = "parallel"))]
    let exceed: u64 = (0..n_permutations).map(count_one).sum();
    (1 + exceed) as f64 / (1 + n_permutations) as f64
}

/// `s(w)`: how much closer `w` sits to the A vectors than to the B vectors.
fn word_assoc(w: &[f64], a_vecs: &[&[f64]], b_vecs: &[&[f64]]) -> Result<f64> {
    let mut sa = 0.0;
    for a in a_vecs {
        sa += cosine(w, a)?;
    }
    let mut sb = 0.0;
    for b in b_vecs {
        sb += cosine(w, b)?;
    }
    Ok(sa / a_vecs.len() as f64 - sb / b_vecs.len() as f64)
}

fn statistic_of(assoc: &[f64], n_x: usize) -> f64 {
    let (x, y) = assoc.split_at(n_x);
    x.iter().sum::<f64>() - y.iter().sum::<f64>()
}

/// Keep the words that have vectors; push the rest onto `dropped`.
fn filter_present<'w>(
    model: &EmbeddingModel,
    words: &'w [String],
    dropped: &mut Vec<String>,
) -> Vec<&'w str> {
    let mut present = Vec::with_capacity(words.len());
    for w in words {
        if model.contains(w) {
            present.push(w.as_str());
        } else {
            dropped.push(w.clone());
        }
    }
    present
}

/// Run one association test. Words missing from the vocabulary are dropped
/// and reported; a target or attribute set with no surviving words is an
/// error. `n_permutations` must be at least [`MIN_PERMUTATIONS`]. Given the
/// same seed the p-value is reproducible regardless of thread count: each
/// permutation draws from its own index-derived RNG.
pub fn weat_test(
    model: &EmbeddingModel,
    sets: &WordSets,
    spec: &WeatSpec,
    n_permutations: usize,
    seed: u64,
) -> Result<WeatResult> {
    if n_permutations < MIN_PERMUTATIONS {
        return Err(Error::TooFewPermutations { min: MIN_PERMUTATIONS, got: n_permutations });
    }

    // Per-target association values; the statistic and every permutation
    // statistic are linear in these, so they are computed exactly once.
    let f = filter_and_assoc(
        model,
        (&spec.x, get_set(sets, &spec.x)?),
        (&spec.y, get_set(sets, &spec.y)?),
        (&spec.a, get_set(sets, &spec.a)?),
        (&spec.b, get_set(sets, &spec.b)?),
    )?;

    Ok(WeatResult {
        name: spec.name.clone(),
        statistic: statistic_of(&f.assoc, f.n_x),
        effect_size: effect_from_assoc(&f.assoc, f.n_x),
        p_value: p_value_from_assoc(&f.assoc, f.n_x, n_permutations, seed),
        n_permutations,
        n_x: f.n_x,
        n_y: f.n_y,
        n_a: f.n_a,
        n_b: f.n_b,
        dropped: f.dropped,
    })
}

fn perm_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&index.to_le_bytes());
    bytes[16..24].copy_from_slice(&u64::MAX.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// Run the same test against a sequence of period embeddings, yielding one
/// result per period in the given order.
pub fn temporal_weat(
    models: &[(String, EmbeddingModel)],
    sets: &WordSets,
    spec: &WeatSpec,
    n_permutations: usize,
    seed: u64,
) -> Result<Vec<(String, WeatResult)>> {
    models
        .iter()
        .map(|(period, model)| {
            Ok((period.clone(), weat_test(model, sets, spec, n_permutations, seed)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assoc::parse_word_sets;
    use approx::assert_relative_eq;

    fn hand_model() -> EmbeddingModel {
        EmbeddingModel::parse(
            include_str!("../../data/fixtures/hand_model.txt"),
            "fixture",
        )
        .unwrap()
    }

    fn hand_sets() -> WordSets {
        parse_word_sets(
            include_str!("../../data/fixtures/hand_sets.json"),
            "fixture",
        )
        .unwrap()
    }

    fn hand_spec() -> WeatSpec {
        let specs = parse_specs(
            include_str!("../../data/fixtures/hand_tests.json"),
            "fixture",
        )
        .unwrap();
        specs.into_iter().next().unwrap()
    }

    #[test]
    fn hand_worked_example() {
        // x=(1,0) aligns with a=(1,0); y=(0,1) aligns with b=(0,1).
        // s(x) = 1 − 0 = 1, s(y) = 0 − 1 = −1: statistic 2, effect size 2.
        let result = weat_test(&hand_model(), &hand_sets(), &hand_spec(), 200, 42).unwrap();
        assert_relative_eq!(result.statistic, 2.0, max_relative = 1e-12);
        assert_relative_eq!(result.effect_size.unwrap(), 2.0, max_relative = 1e-12);
        // Only two arrangements exist, observed and its mirror, so the
        // smoothed one-sided p sits near 1/2.
        assert!((0.3..=0.7).contains(&result.p_value), "p = {}", result.p_value);
        assert_eq!((result.n_x, result.n_y, result.n_a, result.n_b), (1, 1, 1, 1));
        assert!(result.dropped.is_empty());
    }

    #[test]
    fn standalone_pieces_agree_with_the_bundled_test() {
        let (m, s, t) = (hand_model(), hand_sets(), hand_spec());
        let full = weat_test(&m, &s, &t, 200, 42).unwrap();
        let words = |n: &str| s.get(n).unwrap().clone();
        let (x, y, a, b) = (words("xs"), words("ys"), words("as"), words("bs"));
        assert_eq!(weat_statistic(&m, &x, &y, &a, &b).unwrap(), full.statistic);
        assert_eq!(weat_effect_size(&m, &x, &y, &a, &b).unwrap(), full.effect_size);
        assert_eq!(weat_p_value(&m, &x, &y, &a, &b, 200, 42).unwrap(), full.p_value);
        assert_relative_eq!(
            weat_word_assoc(&m, "x", &a, &b).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        // Identical attribute sets cancel exactly.
        assert_eq!(weat_word_assoc(&m, "x", &a, &a).unwrap(), 0.0);
        // The probed word must exist; attribute words are merely filtered.
        let missing = weat_word_assoc(&m, "ghost", &a, &b);
        assert!(matches!(missing, Err(Error::TokenNotFound { .. })));
        let mut padded = a.clone();
        padded.push("ghost".to_string());
        assert_eq!(
            weat_word_assoc(&m, "x", &padded, &b).unwrap(),
            weat_word_assoc(&m, "x", &a, &b).unwrap()
        );
        let all_ghosts = vec!["ghost".to_string()];
        assert!(matches!(
            weat_word_assoc(&m, "x", &all_ghosts, &b),
            Err(Error::EmptyWordSet { .. })
        ));
        assert!(matches!(
            weat_statistic(&m, &all_ghosts, &y, &a, &b),
            Err(Error::EmptyWordSet { .. })
        ));
        assert!(matches!(
            weat_p_value(&m, &x, &y, &a, &b, 3, 1),
            Err(Error::TooFewPermutations { .. })
        ));
    }

    #[test]
    fn permutation_p_value_is_thread_count_invariant_and_seeded() {
        let (m, s, t) = (hand_model(), hand_sets(), hand_spec());
        let r1 = weat_test(&m, &s, &t, 500, 7).unwrap();
        let r2 = weat_test(&m, &s, &t, 500, 7).unwrap();
        assert_eq!(r1.p_value, r2.p_value);
        let r3 = weat_test(&m, &s, &t, 500, 8).unwrap();
        // different seed may move p slightly but never the statistic
        assert_eq!(r1.statistic, r3.statistic);
    }

    #[test]
    fn dropped_words_are_reported_and_empty_sets_fail() {
        let model = hand_model();
        let sets = parse_word_sets(
            "[\
             {\"name\": \"xs\", \"words\": [\"x\", \"ghost\"]},\
             {\"name\": \"ys\", \"words\": [\"y\"]},\
             {\"name\": \"as\", \"words\": [\"a\"]},\
             {\"name\": \"bs\", \"words\": [\"b\"]}\
             ]",
            "t",
        )
        .unwrap();
        let spec = hand_spec();
        let r = weat_test(&model, &sets, &spec, 100, 1).unwrap();
        assert_eq!(r.dropped, vec!["ghost".to_string()]);
        assert_eq!(r.n_x, 1);

        let all_missing = parse_word_sets(
            "[\
             {\"name\": \"xs\", \"words\": [\"ghost\"]},\
             {\"name\": \"ys\", \"words\": [\"y\"]},\
             {\"name\": \"as\", \"words\": [\"a\"]},\
             {\"name\": \"bs\", \"words\": [\"b\"]}\
             ]",
            "t",
        )
        .unwrap();
        assert!(matches!(
            weat_test(&model, &all_missing, &spec, 100, 1),
            Err(Error::EmptyWordSet { .. })
        ));
    }

    #[test]
    fn permutation_count_floor_is_enforced() {
        assert!(matches!(
            weat_test(&hand_model(), &hand_sets(), &hand_spec(), 99, 1),
            Err(Error::TooFewPermutations { min: 100, got: 99 })
        ));
    }

    #[test]
    fn zero_spread_targets_have_no_effect_size() {
        // Both targets identical: s(x) == s(y), so the spread is zero.
        let model = EmbeddingModel::new(
            vec!["x".into(), "y".into(), "a".into(), "b".into()],
            2,
            vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let r = weat_test(&model, &hand_sets(), &hand_spec(), 100, 1).unwrap();
        assert_eq!(r.effect_size, None);
        assert_relative_eq!(r.statistic, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn statistic_is_invariant_to_uniform_vector_scaling() {
        let model = hand_model();
        let scaled = EmbeddingModel::new(
            model.tokens().to_vec(),
            model.dim(),
            (0..model.len())
                .flat_map(|i| model.vector_at(i).iter().map(|v| v * 3.7).collect::<Vec<_>>())
                .collect(),
        )
        .unwrap();
        let (sets, spec) = (hand_sets(), hand_spec());
        let r1 = weat_test(&model, &sets, &spec, 100, 3).unwrap();
        let r2 = weat_test(&scaled, &sets, &spec, 100, 3).unwrap();
        assert!((r1.statistic - r2.statistic).abs() < 1e-9);
        assert!((r1.effect_size.unwrap() - r2.effect_size.unwrap()).abs() < 1e-9);
        assert_eq!(r1.p_value, r2.p_value);
    }

    #[test]
    fn temporal_runs_in_period_order() {
        let m = hand_model();
        let periods = vec![("p1".to_string(), m.clone()), ("p2".to_string(), m)];
        let out = temporal_weat(&periods, &hand_sets(), &hand_spec(), 100, 1).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].0, "p1");
        assert_eq!(out[1].0, "p2");
        assert_eq!(out[0].1.statistic, out[1].1.statistic);
    }

    #[test]
    fn larger_gap_means_smaller_p() {
        // Three words per target set; X aligned with A, Y with B, plus an
        // ambiguous pair to give permutations something to vary.
        let tokens: Vec<String> = ["x1", "x2", "x3", "y1", "y2", "y3", "a", "b"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        #[rustfmt::skip]
        let strong = vec![
            1.0, 0.0,  1.0, 0.1,  0.9, 0.0, // x1..x3 hug a
            0.0, 1.0,  0.1, 1.0,  0.0, 0.9, // y1..y3 hug b
            1.0, 0.0,  0.0, 1.0,
        ];
        #[rustfmt::skip]
        let weak = vec![
            1.0, 0.8,  0.8, 1.0,  1.0, 0.9, // targets barely separated
            0.9, 1.0,  1.0, 0.95, 0.85, 1.0,
            1.0, 0.0,  0.0, 1.0,
        ];
        let sets = parse_word_sets(
            "[\
             {\"name\": \"xs\", \"words\": [\"x1\", \"x2\", \"x3\"]},\
             {\"name\": \"ys\", \"words\": [\"y1\", \"y2\", \"y3\"]},\
             {\"name\": \"as\", \"words\": [\"a\"]},\
             {\"name\": \"bs\", \"words\": [\"b\"]}\
             ]",
            "t",
        )
        .unwrap();
        let spec = hand_spec();
        let ms = EmbeddingModel::new(tokens.clone(), 2, strong).unwrap();
        let mw = EmbeddingModel::new(tokens, 2, weak).unwrap();
        let rs = weat_test(&ms, &sets, &spec, 2000, 5).unwrap();
        let rw = weat_test(&mw, &sets, &spec, 2000, 5).unwrap();
        assert!(
            rs.p_value < rw.p_value,
            "clear separation p={} should beat weak separation p={}",
            rs.p_value,
            rw.p_value
        );
        assert!(rs.p_value < 0.1, "20 partitions, observed is maximal: {}", rs.p_value);
    }
}
