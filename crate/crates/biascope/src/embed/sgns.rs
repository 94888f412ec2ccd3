//! Skip-gram negative-sampling trainer.
//!
//! The classic recipe: per-position context windows of random width,
//! frequent-word subsampling, negatives drawn from the unigram distribution
//! raised to 3/4, and a learning rate that decays linearly with progress.
//! The centre word's vector is the input; the observed context word and the
//! sampled negatives are scored against the output matrix.
//!
//! Concurrency follows the lock-free shared-weights approach: worker chunks
//! update the same matrices without synchronisation. With one worker the
//! run is bit-reproducible for a given seed; with more, results vary with
//! interleaving (each worker's RNG stream is still fixed, so the variation
//! comes only from update races).

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering::Relaxed};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::embed::{EmbeddingModel, TrainConfig, Vocab};
use crate::error::{Error, Result};
use crate::tokenize::TokenStream;

/// Per-epoch diagnostics from training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    /// Mean negative-sampling loss per scored pair, one entry per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Train embeddings on tokenised documents. Convenience wrapper around
/// [`train_sgns_with_stats`] for callers that don't need loss curves.
pub fn train_sgns(streams: &[TokenStream], config: &TrainConfig) -> Result<EmbeddingModel> {
    Ok(train_impl(streams, config, false)?.0)
}

/// Train embeddings and report the per-epoch loss curve.
pub fn train_sgns_with_stats(
    streams: &[TokenStream],
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainStats)> {
    train_impl(streams, config, true)
}

// Domain tags keep the initialisation stream disjoint from every per-chunk
// training stream even when seeds collide numerically.
const DOMAIN_INIT: u64 = 0;
const DOMAIN_TRAIN: u64 = 1;

fn rng_for(seed: u64, domain: u64, epoch: u64, chunk: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[0..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&domain.to_le_bytes());
    bytes[16..24].copy_from_slice(&epoch.to_le_bytes());
    bytes[24..32].copy_from_slice(&chunk.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

#[inline]
fn get(slot: &AtomicU64) -> f64 {
    f64::from_bits(slot.load(Relaxed))
}

#[inline]
fn put(slot: &AtomicU64, v: f64) {
    slot.store(v.to_bits(), Relaxed)
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// ln(1 + e^x) without overflow for large |x|.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Split `0..n` into `parts` contiguous ranges whose lengths differ by at
/// most one. May yield fewer (never empty) ranges when `parts > n`.
fn chunk_ranges(n: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.max(1);
    let base = n / parts;
    let extra = n % parts;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        if len == 0 {
            continue;
        }
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Cumulative unigram^(3/4) mass for negative sampling by binary search.
struct NegativeTable {
    cumulative: Vec<f64>,
    total: f64,
}

impl NegativeTable {
    fn build(counts: &[u64]) -> Self {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut acc = 0.0;
        for &c in counts {
            acc += (c as f64).powf(0.75);
            cumulative.push(acc);
        }
        NegativeTable { cumulative, total: acc }
    }

    #[inline]
    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let x = rng.random::<f64>() * self.total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

struct Shared<'a> {
    sentences: &'a [Vec<u32>],
    syn0: &'a [AtomicU64],
    syn1: &'a [AtomicU64],
    keep_prob: &'a [f64],
    negatives: &'a NegativeTable,
    config: &'a TrainConfig,
    words_done: &'a AtomicU64,
    progress_denom: f64,
    min_alpha: f64,
    track_loss: bool,
}

fn train_impl(
    streams: &[TokenStream],
    config: &TrainConfig,
    track_loss: bool,
) -> Result<(EmbeddingModel, TrainStats)> {
    config.validate()?;
    if streams.is_empty() || streams.iter().all(|s| s.tokens.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let vocab = Vocab::build(streams, config.min_count)?;
    let dim = config.dim;

    let sentences: Vec<Vec<u32>> = streams
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .filter_map(|t| vocab.id(t))
                .map(|i| i as u32)
                .collect::<Vec<u32>>()
        })
        .filter(|s| !s.is_empty())
        .collect();
    let train_words = vocab.total_count();

    // Input vectors start as small uniform noise, output vectors at zero —
    // first updates are then driven purely by the data.
    let mut init_rng = rng_for(config.seed, DOMAIN_INIT, 0, 0);
    let syn0: Vec<AtomicU64> = (0..vocab.len() * dim)
        .map(|_| {
            let v = (init_rng.random::<f64>() - 0.5) / dim as f64;
            AtomicU64::new(v.to_bits())
        })
        .collect();
    let syn1: Vec<AtomicU64> = (0..vocab.len() * dim)
        .map(|_| AtomicU64::new(0.0f64.to_bits()))
        .collect();

    let negatives = NegativeTable::build(vocab.counts());

    // Pre-compute each token's subsampling keep-probability.
    let keep_prob: Vec<f64> = if config.subsample > 0.0 {
        let k = config.subsample * train_words as f64;
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let f = c as f64;
                ((f / k).sqrt() + 1.0) * k / f
            })
            .collect()
    } else {
        vec![1.0; vocab.len()]
    };

    let words_done = AtomicU64::new(0);
    let shared = Shared {
        sentences: &sentences,
        syn0: &syn0,
        syn1: &syn1,
        keep_prob: &keep_prob,
        negatives: &negatives,
        config,
        words_done: &words_done,
        progress_denom: (config.epochs as u64 * train_words + 1) as f64,
        min_alpha: config.initial_lr * 1e-4,
        track_loss,
    };

    let mut epoch_loss = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let work: Vec<(Range<usize>, ChaCha8Rng)> = chunk_ranges(sentences.len(), config.threads)
            .into_iter()
            .enumerate()
            .map(|(i, r)| (r, rng_for(config.seed, DOMAIN_TRAIN, epoch as u64, i as u64)))
            .collect();

        let run = |(range, mut rng): (Range<usize>, ChaCha8Rng)| run_chunk(&shared, range, &mut rng);
        #[cfg(feature = "parallel")]
        let partials: Vec<(f64, u64)> = if config.threads > 1 {
            work.into_par_iter().map(run).collect()
        } else {
            work.into_iter().map(run).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let partials: Vec<(f64, u64)> = work.into_iter().map(run).collect();

        if track_loss {
            let (sum, terms) = partials
                .iter()
                .fold((0.0, 0u64), |(s, n), &(ps, pn)| (s + ps, n + pn));
            epoch_loss.push(if terms == 0 { 0.0 } else { sum / terms as f64 });
        }
    }

    let vectors: Vec<f64> = syn0.iter().map(get).collect();
    let model = EmbeddingModel::new(vocab.tokens().to_vec(), dim, vectors)?;
    Ok((model, TrainStats { epoch_loss }))
}

fn run_chunk(shared: &Shared<'_>, range: Range<usize>, rng: &mut ChaCha8Rng) -> (f64, u64) {
    let config = shared.config;
    let dim = config.dim;
    let mut center_buf = vec![0.0f64; dim];
    let mut neu1e = vec![0.0f64; dim];
    let mut loss_sum = 0.0;
    let mut loss_terms = 0u64;

    for sentence in &shared.sentences[range] {
        let done = shared.words_done.load(Relaxed) as f64;
        let alpha =
            (config.initial_lr * (1.0 - done / shared.progress_denom)).max(shared.min_alpha);

        let kept: Vec<u32> = sentence
            .iter()
            .copied()
            .filter(|&id| {
                let p = shared.keep_prob[id as usize];
                p >= 1.0 || rng.random::<f64>() < p
            })
            .collect();

        for (i, &center) in kept.iter().enumerate() {
            let reduced = rng.random_range(1..=config.window);
            let lo = i.saturating_sub(reduced);
            let hi = (i + reduced).min(kept.len() - 1);
            for j in lo..=hi {
                if j == i {
                    continue;
                }
                let context = kept[j] as usize;
                let center = center as usize;

                let c0 = center * dim;
                for (d, slot) in center_buf.iter_mut().zip(&shared.syn0[c0..c0 + dim]) {
                    *d = get(slot);
                }
                neu1e.fill(0.0);

                for d in 0..=config.negatives {
                    let (target, label) = if d == 0 {
                        (context, 1.0)
                    } else {
                        let t = shared.negatives.sample(rng);
                        if t == context {
                            continue;
                        }
                        (t, 0.0)
                    };
                    let t0 = target * dim;
                    let out_row = &shared.syn1[t0..t0 + dim];
                    let mut f = 0.0;
                    for (x, slot) in center_buf.iter().zip(out_row) {
                        f += x * get(slot);
                    }
                    if shared.track_loss {
                        loss_sum += softplus(if label > 0.5 { -f } else { f });
                        loss_terms += 1;
                    }
                    let g = (label - sigmoid(f)) * alpha;
                    for ((e, x), slot) in neu1e.iter_mut().zip(&center_buf).zip(out_row) {
                        let o = get(slot);
                        *e += g * o;
                        put(slot, o + g * x);
                    }
                }

                for (e, slot) in neu1e.iter().zip(&shared.syn0[c0..c0 + dim]) {
                    put(slot, get(slot) + e);
                }
            }
        }
        shared.words_done.fetch_add(sentence.len() as u64, Relaxed);
    }
    (loss_sum, loss_terms)
}
