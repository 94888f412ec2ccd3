//! Tokenization: whitespace/punctuation word splitting and a word-internal
//! byte-pair-encoding subword model.
//!
//! The BPE here deliberately emits plain pieces with no continuation
//! markers, so a string that occurs both as a standalone word and as a piece
//! of longer words accumulates one combined count. On very small corpora
//! that pooling is what lets rare spelling variants clear a frequency
//! threshold they would miss under whole-word tokenization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::report::atomic_write;

/// A punctuation character for splitting purposes: anything that is neither
/// alphanumeric nor whitespace.
fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Split text into word tokens: chunks are separated by Unicode whitespace,
/// then punctuation is detached from each chunk's edges one character per
/// token. Interior punctuation (apostrophes, hyphens) stays inside the word.
///
/// `"A negro woman, named Louisa."` becomes
/// `["a", "negro", "woman", ",", "named", "louisa", "."]` with lowercasing.
pub fn tokenize_words(text: &str, lowercase: bool) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let mut rest = chunk;
        let mut trailing: Vec<&str> = Vec::new();
        while let Some(c) = rest.chars().next().filter(|&c| is_punct(c)) {
            let (head, tail) = rest.split_at(c.len_utf8());
            tokens.push(head.to_string());
            rest = tail;
        }
        while let Some(c) = rest.chars().next_back().filter(|&c| is_punct(c)) {
            let split = rest.len() - c.len_utf8();
            let (head, tail) = rest.split_at(split);
            trailing.push(tail);
            rest = head;
        }
        if !rest.is_empty() {
            tokens.push(rest.to_string());
        }
        tokens.extend(trailing.into_iter().rev().map(str::to_string));
    }
    if lowercase {
        for t in &mut tokens {
            if t.chars().any(char::is_uppercase) {
                *t = t.to_lowercase();
            }
        }
    }
    tokens
}

/// One document's tokens, kept per-document so sentence/document boundaries
/// survive into embedding training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

/// Word-tokenize a corpus, one stream per document.
pub fn streams_from_docs(docs: &[Document], lowercase: bool) -> Vec<TokenStream> {
    docs.iter()
        .map(|d| TokenStream {
            doc_id: d.id.clone(),
            tokens: tokenize_words(&d.text, lowercase),
        })
        .collect()
}

/// Count word-token frequencies across documents (lowercased).
pub fn word_frequencies(docs: &[Document]) -> BTreeMap<String, u64> {
    let mut freqs = BTreeMap::new();
    for d in docs {
        for t in tokenize_words(&d.text, true) {
            *freqs.entry(t).or_insert(0) += 1;
        }
    }
    freqs
}

/// A trained byte-pair-encoding model: an ordered list of merges. Earlier
/// merges have lower rank and win during segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
}

impl BpeModel {
    pub fn from_merges(merges: Vec<(String, String)>) -> Self {
        let ranks = merges
            .iter()
            .enumerate()
            .map(|(i, pair)| (pair.clone(), i))
            .collect();
        BpeModel { merges, ranks }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    /// Every piece the merge list can produce or consume (merge outputs plus
    /// the single characters appearing in merge parts). Characters that were
    /// never merged with anything are not recorded in the model, so this is
    /// a lower bound on the alphabet seen at training time.
    pub fn pieces(&self) -> BTreeSet<String> {
        let mut pieces = BTreeSet::new();
        for (l, r) in &self.merges {
            pieces.extend(l.chars().map(String::from));
            pieces.extend(r.chars().map(String::from));
            pieces.insert(format!("{l}{r}"));
        }
        pieces
    }

    /// Segment one word into pieces by repeatedly merging the
    /// earliest-learned pair present, greedily left to right. Concatenating
    /// the pieces always reproduces the word exactly.
    pub fn segment(&self, word: &str) -> Vec<String> {
        let mut symbols: Vec<String> = word.chars().map(String::from).collect();
        while symbols.len() > 1 {
            let mut best: Option<(usize, &(String, String))> = None;
            for pair in symbols.windows(2) {
                let key = (pair[0].clone(), pair[1].clone());
                if let Some((pair_ref, &rank)) = self.ranks.get_key_value(&key) {
                    if best.is_none_or(|(r, _)| rank < r) {
                        best = Some((rank, pair_ref));
                    }
                }
            }
            let Some((_, (l, r))) = best else { break };
            symbols = apply_merge(&symbols, l, r);
        }
        symbols
    }

    /// Serialize as a small text file: a `bpe v1 <n>` header followed by one
    /// tab-separated merge per line, in rank order.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = format!("bpe v1 {}\n", self.merges.len());
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push('\t');
            out.push_str(r);
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
            .ok_or_else(|| Error::parse(origin, 1, "empty model file"))?;
        let n: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["bpe", "v1", n] => n
                .parse()
                .map_err(|_| Error::parse(origin, 1, format!("bad merge count {n:?}")))?,
            _ => {
                return Err(Error::parse(
                    origin,
                    1,
                    format!("expected `bpe v1 <n>` header, got {header:?}"),
                ))
            }
        };
        let mut merges = Vec::with_capacity(n);
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let Some((l, r)) = line.split_once('\t') else {
                return Err(Error::parse(origin, idx + 1, "merge line is not `left<TAB>right`"));
            };
            if l.is_empty() || r.is_empty() {
                return Err(Error::parse(origin, idx + 1, "empty merge side"));
            }
            merges.push((l.to_string(), r.to_string()));
        }
        if merges.len() != n {
            return Err(Error::parse(
                origin,
                1,
                format!("header promises {n} merges, file has {}", merges.len()),
            ));
        }
        Ok(Self::from_merges(merges))
    }
}

/// Replace every adjacent `(l, r)` occurrence with the concatenation,
/// scanning left to right (after a merge the scan resumes past it).
fn apply_merge(symbols: &[String], l: &str, r: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == l && symbols[i + 1] == r {
            out.push(format!("{l}{r}"));
            i += 2;
        } else {
            out.push(symbols[i].clone());
            i += 1;
        }
    }
    out
}

fn adjacent_pairs(symbols: &[String]) -> impl Iterator<Item = (String, String)> + '_ {
    symbols.windows(2).map(|w| (w[0].clone(), w[1].clone()))
}

/// Learn a BPE merge list from word frequencies.
///
/// Every adjacent symbol pair is counted once per occurrence, weighted by
/// word frequency (so `aaa` contributes two counts of `(a, a)`). Each round
/// merges the most frequent pair, breaking ties toward the lexicographically
/// smallest `(left, right)`. Training stops when the piece inventory
/// (alphabet plus merges) reaches `target_vocab_size` or no pair occurs at
/// least twice.
pub fn train_bpe(word_freqs: &BTreeMap<String, u64>, target_vocab_size: usize) -> BpeModel {
    train_bpe_until(word_freqs, target_vocab_size, 2)
}

/// [`train_bpe`] with an explicit frequency floor: stop merging once the
/// best remaining pair occurs fewer than `min_pair_count` times. Setting the
/// floor to the embedding vocabulary's own minimum count keeps rare words
/// segmented into shared sub-word pieces instead of assembling them into
/// whole-word tokens that would fall under that count anyway.
pub fn train_bpe_until(
    word_freqs: &BTreeMap<String, u64>,
    target_vocab_size: usize,
    min_pair_count: u64,
) -> BpeModel {
    let min_pair_count = min_pair_count.max(2);
    let mut words: Vec<(Vec<String>, u64)> = word_freqs
        .iter()
        .filter(|(w, _)| !w.is_empty())
        .map(|(w, &f)| (w.chars().map(String::from).collect(), f))
        .collect();

    let alphabet: BTreeSet<String> = words
        .iter()
        .flat_map(|(syms, _)| syms.iter().cloned())
        .collect();

    let mut pair_counts: HashMap<(String, String), u64> = HashMap::new();
    let mut pair_words: HashMap<(String, String), BTreeSet<usize>> = HashMap::new();
    for (idx, (syms, freq)) in words.iter().enumerate() {
        for pair in adjacent_pairs(syms) {
            *pair_counts.entry(pair.clone()).or_insert(0) += freq;
            pair_words.entry(pair).or_default().insert(idx);
        }
    }

    let mut merges = Vec::new();
    let mut vocab_size = alphabet.len();

    while vocab_size < target_vocab_size {
        // Highest count wins; ties go to the lexicographically smallest pair
        // so training is independent of map iteration order.
        let best = pair_counts
            .iter()
            .filter(|(_, &c)| c >= min_pair_count)
            .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then_with(|| pb.cmp(pa)))
            .map(|(p, _)| p.clone());
        let Some((l, r)) = best else { break };

        let affected = pair_words
            .get(&(l.clone(), r.clone()))
            .cloned()
            .unwrap_or_default();
        for idx in affected {
            let (syms, freq) = &words[idx];
            let freq = *freq;
            let new_syms = apply_merge(syms, &l, &r);
            let mut delta: HashMap<(String, String), i64> = HashMap::new();
            for pair in adjacent_pairs(syms) {
                *delta.entry(pair).or_insert(0) -= freq as i64;
            }
            for pair in adjacent_pairs(&new_syms) {
                *delta.entry(pair).or_insert(0) += freq as i64;
            }
            for (pair, d) in delta {
                match d.cmp(&0) {
                    std::cmp::Ordering::Greater => {
                        *pair_counts.entry(pair.clone()).or_insert(0) += d as u64;
                        pair_words.entry(pair).or_default().insert(idx);
                    }
                    std::cmp::Ordering::Less => {
                        let slot = pair_counts
                            .get_mut(&pair)
                            .expect("decrement of counted pair");
                        *slot -= (-d) as u64;
                        if *slot == 0 {
                            pair_counts.remove(&pair);
                        }
                    }
                    std::cmp::Ordering::Equal => {}
                }
            }
            // The merged word may keep other instances of pairs it lost here,
            // so membership is rechecked rather than blindly removed.
            let still: BTreeSet<(String, String)> = adjacent_pairs(&new_syms).collect();
            let gone: Vec<(String, String)> = adjacent_pairs(syms)
                .filter(|p| !still.contains(p))
                .collect();
            for pair in gone {
                if let Some(set) = pair_words.get_mut(&pair) {
                    set.remove(&idx);
                    if set.is_empty() {
                        pair_words.remove(&pair);
                    }
                }
            }
            words[idx].0 = new_syms;
        }

        merges.push((l, r));
        vocab_size += 1;
    }

    BpeModel::from_merges(merges)
}

/// Train a BPE model straight from documents (lowercased word tokens).
pub fn train_bpe_from_docs(docs: &[Document], target_vocab_size: usize) -> BpeModel {
    train_bpe(&word_frequencies(docs), target_vocab_size)
}

/// Tokenize text into BPE pieces: word tokenization (lowercased) followed by
/// per-word segmentation.
pub fn tokenize_bpe(text: &str, model: &BpeModel) -> Vec<String> {
    tokenize_words(text, true)
        .iter()
        .flat_map(|w| model.segment(w))
        .collect()
}

/// BPE-tokenize a corpus, one stream per document.
pub fn bpe_streams_from_docs(docs: &[Document], model: &BpeModel) -> Vec<TokenStream> {
    docs.iter()
        .map(|d| TokenStream {
            doc_id: d.id.clone(),
            tokens: tokenize_bpe(&d.text, model),
        })
        .collect()
}
