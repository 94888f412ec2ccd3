//! Deterministic synthetic corpora and models for benchmarks and
//! end-to-end checks.
//!
//! Historical scan corpora are large, noisy, and usually encumbered, which
//! makes them poor test fixtures. The generators here build small corpora
//! whose structure is known *by construction* — a planted association
//! signal, a controlled rate of character-level misspellings, an isotropic
//! embedding cloud with no structure at all — so pipeline properties
//! (signal recovery, tokenizer trade-offs, permutation-test calibration)
//! can be exercised quickly and reproducibly. Every generator is a pure
//! function of its seed.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assoc::{WeatSpec, WordSets};
use crate::corpus::Document;
use crate::embed::EmbeddingModel;
use crate::stability::MisspellPair;

/// Letters used for generated word material. The misspelling benchmark
/// deliberately excludes `e i l s y` from words so those letters can mark
/// suffixes: a suffix boundary then never forms a frequent symbol pair, and
/// sub-word segmentation of a suffixed form always reproduces the stem's
/// own segmentation.
const STEM_CONSONANTS: &[u8] = b"bcdfgkmnpt";
const STEM_VOWELS: &[u8] = b"aou";

/// Wider alphabet for corpora that never attach suffixes.
const WIDE_CONSONANTS: &[u8] = b"bcdfghjklmnpqrstvwz";
const WIDE_VOWELS: &[u8] = b"aeiou";

fn seeded(seed: u64, domain: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&domain.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

fn pick(rng: &mut ChaCha8Rng, pool: &[u8]) -> char {
    pool[rng.random_range(0..pool.len())] as char
}

/// A pronounceable consonant–vowel word of `syllables` syllables.
fn make_word(rng: &mut ChaCha8Rng, consonants: &[u8], vowels: &[u8], syllables: usize) -> String {
    let mut w = String::with_capacity(2 * syllables);
    for _ in 0..syllables {
        w.push(pick(rng, consonants));
        w.push(pick(rng, vowels));
    }
    w
}

/// A word not seen before, registered in `used`.
fn fresh_word(
    rng: &mut ChaCha8Rng,
    used: &mut BTreeSet<String>,
    consonants: &[u8],
    vowels: &[u8],
    syllables: usize,
) -> String {
    loop {
        let w = make_word(rng, consonants, vowels, syllables);
        if used.insert(w.clone()) {
            return w;
        }
    }
}

fn fresh_words(
    rng: &mut ChaCha8Rng,
    used: &mut BTreeSet<String>,
    n: usize,
    consonants: &[u8],
    vowels: &[u8],
    syllables: usize,
) -> Vec<String> {
    (0..n).map(|_| fresh_word(rng, used, consonants, vowels, syllables)).collect()
}

/// A corpus with a planted association: two target topics whose words
/// co-occur exclusively with one of two attribute topics.
///
/// Each document talks about exactly one topic pair — either
/// (`planted_x`, `planted_a`) or (`planted_y`, `planted_b`) — against a
/// shared filler background, so embeddings trained on the corpus should
/// place X-words nearer A-words and Y-words nearer B-words. `sets` and
/// `spec` name the planted sets so the association test can be run
/// directly against a trained model.
pub struct PlantedCorpus {
    pub docs: Vec<Document>,
    pub sets: WordSets,
    pub spec: WeatSpec,
}

/// Words per planted set.
const PLANTED_SET_SIZE: usize = 8;
/// Size of the shared filler vocabulary.
const PLANTED_FILLER: usize = 60;
/// Probability that a sampled token is a target word (and likewise an
/// attribute word); the rest is filler.
const PLANTED_RATE: f64 = 0.15;

/// Generate `n_docs` documents of `doc_len` tokens each with a planted
/// X↔A / Y↔B association. Deterministic in `seed`.
pub fn planted_bias_corpus(n_docs: usize, doc_len: usize, seed: u64) -> PlantedCorpus {
    let mut rng = seeded(seed, 0xB1A5);
    let mut used = BTreeSet::new();
    let x = fresh_words(&mut rng, &mut used, PLANTED_SET_SIZE, WIDE_CONSONANTS, WIDE_VOWELS, 3);
    let y = fresh_words(&mut rng, &mut used, PLANTED_SET_SIZE, WIDE_CONSONANTS, WIDE_VOWELS, 3);
    let a = fresh_words(&mut rng, &mut used, PLANTED_SET_SIZE, WIDE_CONSONANTS, WIDE_VOWELS, 3);
    let b = fresh_words(&mut rng, &mut used, PLANTED_SET_SIZE, WIDE_CONSONANTS, WIDE_VOWELS, 3);
    let filler = fresh_words(&mut rng, &mut used, PLANTED_FILLER, WIDE_CONSONANTS, WIDE_VOWELS, 3);

    let any = |rng: &mut ChaCha8Rng, words: &[String]| -> String {
        words[rng.random_range(0..words.len())].clone()
    };

    let docs = (0..n_docs)
        .map(|i| {
            let (targets, attrs) = if i % 2 == 0 { (&x, &a) } else { (&y, &b) };
            let mut tokens = Vec::with_capacity(doc_len);
            for _ in 0..doc_len {
                let r: f64 = rng.random();
                let token = if r < PLANTED_RATE {
                    any(&mut rng, targets)
                } else if r < 2.0 * PLANTED_RATE {
                    any(&mut rng, attrs)
                } else {
                    any(&mut rng, &filler)
                };
                tokens.push(token);
            }
            Document {
                id: format!("planted-{i:05}"),
                text: tokens.join(" "),
                date: None,
                source: None,
            }
        })
        .collect();

    let mut sets = WordSets::new();
    sets.insert("planted_x".to_string(), x);
    sets.insert("planted_y".to_string(), y);
    sets.insert("planted_a".to_string(), a);
    sets.insert("planted_b".to_string(), b);
    let spec = WeatSpec {
        name: "planted".to_string(),
        x: "planted_x".to_string(),
        y: "planted_y".to_string(),
        a: "planted_a".to_string(),
        b: "planted_b".to_string(),
    };
    PlantedCorpus { docs, sets, spec }
}

/// A corpus salted with character-level misspellings at a known rate,
/// plus the (wrong, right) pairs that were injected.
///
/// Two regimes of damaged word are planted, mirroring what scanned print
/// actually produces:
///
/// * **frequent wrongs** — the damaged form itself recurs often enough to
///   earn its own vocabulary slot in a word-level model;
/// * **rare wrongs** — each individual damaged form is too rare for a
///   word-level vocabulary, but the same damaged stem also appears inside
///   suffixed variants (`-s`, `-ed`, `-ing`, …), so a sub-word model can
///   pool those occurrences into one stem piece.
///
/// Suffixed variants appear in *different* sentence contexts than the
/// stems, so the pooling that buys a sub-word model its extra coverage
/// also blurs the pooled vector. Coverage and neighbor quality therefore
/// pull in opposite directions by construction.
pub struct NoisyCorpus {
    pub docs: Vec<Document>,
    /// One (wrong, right) pair per planted stem, frequent and rare alike.
    pub pairs: Vec<MisspellPair>,
    /// Total corpus size in tokens.
    pub n_tokens: usize,
    /// Tokens that are a damaged form (stem or suffixed variant).
    pub n_misspelt: usize,
}

impl NoisyCorpus {
    /// Fraction of tokens carrying injected damage.
    pub fn misspelt_fraction(&self) -> f64 {
        self.n_misspelt as f64 / self.n_tokens as f64
    }
}

/// Families per regime.
const NOISY_FAMILIES: usize = 20;
/// Sentences with the correct stem: (frequent regime, rare regime).
const RIGHT_REPS: (usize, usize) = (36, 30);
/// Sentences with the damaged stem standing alone.
const WRONG_REPS: (usize, usize) = (24, 10);
/// Suffixes attached to the damaged stem, and sentences per suffixed form.
const SUFFIXES_F: &[&str] = &["s", "ed", "ing", "ly", "y"];
const SUFFIXES_R: &[&str] = &["s", "ed", "ing"];
const SUFFIX_REPS: (usize, usize) = (19, 16);
/// Distractor-pool size per regime, chosen so every pool member clears the
/// default vocabulary floor while crowding a five-wide neighborhood.
const DISTRACTORS: (usize, usize) = (5, 3);
/// Size of the shared filler vocabulary.
const NOISY_FILLER: usize = 30;

/// Damage a word with one random character-level operation (adjacent swap,
/// substitution, deletion, doubling), retrying until the result is a new
/// word of at least four letters.
fn misspell(rng: &mut ChaCha8Rng, right: &str, used: &mut BTreeSet<String>) -> String {
    let chars: Vec<char> = right.chars().collect();
    loop {
        let mut c = chars.clone();
        match rng.random_range(0..4) {
            0 => {
                let i = rng.random_range(0..c.len() - 1);
                c.swap(i, i + 1);
            }
            1 => {
                let i = rng.random_range(0..c.len());
                let pool =
                    if STEM_VOWELS.contains(&(c[i] as u8)) { STEM_VOWELS } else { STEM_CONSONANTS };
                c[i] = pick(rng, pool);
            }
            2 => {
                c.remove(rng.random_range(0..c.len()));
            }
            _ => {
                let i = rng.random_range(0..c.len());
                c.insert(i, c[i]);
            }
        }
        let w: String = c.iter().collect();
        if w.len() >= 4 && w != right && used.insert(w.clone()) {
            return w;
        }
    }
}

struct Family {
    right: String,
    wrong: String,
    /// Words that flank the stem in its own sentences.
    collocates: (String, String),
    /// Pool of words that flank the suffixed variants instead; rotated
    /// pairwise so each suffixed sentence carries two of them. A pool
    /// (rather than a fixed pair) keeps the stem piece's neighborhood
    /// crowded with suffix-context words in sub-word models.
    distractors: Vec<String>,
    frequent: bool,
}

/// `[filler, center, flank.0, filler, flank.1, filler, filler]` — seven
/// tokens, flanks inside any training window of the center.
fn flanked_sentence(
    rng: &mut ChaCha8Rng,
    center: &str,
    flanks: &(String, String),
    filler: &[String],
) -> String {
    let mut f = || filler[rng.random_range(0..filler.len())].clone();
    [f(), center.to_string(), flanks.0.clone(), f(), flanks.1.clone(), f(), f()].join(" ")
}

/// Tokens per sentence produced by [`flanked_sentence`].
const SENTENCE_LEN: usize = 7;

/// Generate the misspelling benchmark corpus. Deterministic in `seed`.
pub fn noisy_benchmark(seed: u64) -> NoisyCorpus {
    let mut rng = seeded(seed, 0x0C12);
    let mut used = BTreeSet::new();
    let filler =
        fresh_words(&mut rng, &mut used, NOISY_FILLER, STEM_CONSONANTS, STEM_VOWELS, 3);

    let mut families = Vec::with_capacity(2 * NOISY_FAMILIES);
    for frequent in [true, false] {
        for _ in 0..NOISY_FAMILIES {
            let right = fresh_word(&mut rng, &mut used, STEM_CONSONANTS, STEM_VOWELS, 3);
            let wrong = misspell(&mut rng, &right, &mut used);
            let collocates = (
                fresh_word(&mut rng, &mut used, STEM_CONSONANTS, STEM_VOWELS, 3),
                fresh_word(&mut rng, &mut used, STEM_CONSONANTS, STEM_VOWELS, 3),
            );
            let pool = if frequent { DISTRACTORS.0 } else { DISTRACTORS.1 };
            let distractors =
                fresh_words(&mut rng, &mut used, pool, STEM_CONSONANTS, STEM_VOWELS, 3);
            families.push(Family { right, wrong, collocates, distractors, frequent });
        }
    }

    let mut sentences = Vec::new();
    let mut n_misspelt = 0usize;
    for fam in &families {
        let (right_reps, wrong_reps, suffixes, suffix_reps) = if fam.frequent {
            (RIGHT_REPS.0, WRONG_REPS.0, SUFFIXES_F, SUFFIX_REPS.0)
        } else {
            (RIGHT_REPS.1, WRONG_REPS.1, SUFFIXES_R, SUFFIX_REPS.1)
        };
        for _ in 0..right_reps {
            sentences.push(flanked_sentence(&mut rng, &fam.right, &fam.collocates, &filler));
        }
        for _ in 0..wrong_reps {
            sentences.push(flanked_sentence(&mut rng, &fam.wrong, &fam.collocates, &filler));
            n_misspelt += 1;
        }
        let mut turn = 0usize;
        for suffix in suffixes {
            let form = format!("{}{}", fam.wrong, suffix);
            for _ in 0..suffix_reps {
                // Rotate through the pool so every distractor appears
                // equally often (exactly balanced when pool size divides
                // twice the sentence count).
                let pair = (
                    fam.distractors[turn % fam.distractors.len()].clone(),
                    fam.distractors[(turn + 1) % fam.distractors.len()].clone(),
                );
                turn += 1;
                sentences.push(flanked_sentence(&mut rng, &form, &pair, &filler));
                n_misspelt += 1;
            }
        }
    }
    sentences.shuffle(&mut rng);

    let docs: Vec<Document> = sentences
        .into_iter()
        .enumerate()
        .map(|(i, text)| Document {
            id: format!("noisy-{i:05}"),
            text,
            date: None,
            source: None,
        })
        .collect();
    let n_tokens = docs.len() * SENTENCE_LEN;

    let pairs = families
        .iter()
        .map(|f| MisspellPair { wrong: f.wrong.clone(), right: f.right.clone() })
        .collect();

    NoisyCorpus { docs, pairs, n_tokens, n_misspelt }
}

/// One draw from a standard normal, by Box–Muller.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// An embedding whose vectors are iid standard-normal draws: one isotropic
/// cloud with no structure whatsoever. Tokens are named `w0..w{n-1}`.
/// Statistics computed on such a model should look exactly like noise,
/// which makes it the right null fixture for calibration checks.
pub fn gaussian_cloud_model(n_words: usize, dim: usize, seed: u64) -> EmbeddingModel {
    let mut rng = seeded(seed, 0xC10D);
    let tokens: Vec<String> = (0..n_words).map(|i| format!("w{i}")).collect();
    let mut vectors = vec![0.0; n_words * dim];
    loop {
        for v in vectors.iter_mut() {
            *v = standard_normal(&mut rng);
        }
        // A zero row is measure-zero but would be rejected downstream.
        if vectors.chunks(dim).all(|row| row.iter().any(|x| x.abs() > 1e-12)) {
            break;
        }
    }
    EmbeddingModel::new(tokens, dim, vectors).expect("generated model is well-formed")
}

/// A random association-test instance: a Gaussian cloud model plus four
/// disjoint word sets drawn from its vocabulary, with set sizes between 2
/// and 6 and dimension between 2 and 8. Useful for property checks that
/// must hold on *any* instance.
pub fn random_weat_instance(seed: u64) -> (EmbeddingModel, WordSets, WeatSpec) {
    let mut rng = seeded(seed, 0x3EA7);
    let dim = rng.random_range(2..=8);
    let sizes: Vec<usize> = (0..4).map(|_| rng.random_range(2..=6)).collect();
    let total: usize = sizes.iter().sum();
    let model = gaussian_cloud_model(total, dim, rng.random());

    let mut names: Vec<String> = model.tokens().to_vec();
    names.shuffle(&mut rng);
    let mut sets = WordSets::new();
    let mut start = 0;
    for (label, size) in ["xs", "ys", "as", "bs"].iter().zip(&sizes) {
        sets.insert(label.to_string(), names[start..start + size].to_vec());
        start += size;
    }
    let spec = WeatSpec {
        name: "random".to_string(),
        x: "xs".to_string(),
        y: "ys".to_string(),
        a: "as".to_string(),
        b: "bs".to_string(),
    };
    (model, sets, spec)
}
