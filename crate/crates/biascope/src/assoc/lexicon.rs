//! Weighted-lexicon scoring: the count-weighted mean of lexicon values over
//! the descriptor occurrences a group attracts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A scored word list (e.g. valence or dominance norms).
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub name: String,
    weights: BTreeMap<String, f64>,
}

impl Lexicon {
    pub fn weight(&self, word: &str) -> Option<f64> {
        self.weights.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Parse a lexicon: `word<TAB>value` lines, `#` comments and blank lines
/// ignored, words lowercased. Duplicate words and non-finite values are
/// errors.
pub fn parse_lexicon(raw: &str, origin: &str, name: &str) -> Result<Lexicon> {
    let mut weights = BTreeMap::new();
    for (idx, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((word, value)) = line.split_once('\t') else {
            return Err(Error::parse(origin, idx + 1, "expected `word<TAB>value`"));
        };
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Err(Error::parse(origin, idx + 1, "empty word"));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(origin, idx + 1, format!("bad value {value:?}")))?;
        if !value.is_finite() {
            return Err(Error::parse(origin, idx + 1, format!("non-finite value {value}")));
        }
        if weights.insert(word.clone(), value).is_some() {
            return Err(Error::parse(origin, idx + 1, format!("duplicate word {word:?}")));
        }
    }
    if weights.is_empty() {
        return Err(Error::parse(origin, 1, "lexicon has no entries"));
    }
    Ok(Lexicon { name: name.to_string(), weights })
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_lexicon(&raw, &path.display().to_string(), &name)
}

/// Count-weighted mean lexicon value over covered occurrences:
/// `Σ weight(w)·count(w) / Σ count(w)`, summed over the words the lexicon
/// knows. Occurrences of unknown words carry no signal and are excluded
/// from both sums; if nothing is covered the mean is undefined and that is
/// an error rather than a silent zero.
pub fn lexicon_assoc(lexicon: &Lexicon, word_counts: &BTreeMap<String, u64>) -> Result<f64> {
    let mut weighted = 0.0;
    let mut covered = 0u64;
    for (word, &count) in word_counts {
        if count == 0 {
            continue;
        }
        if let Some(w) = lexicon.weight(word) {
            weighted += w * count as f64;
            covered += count;
        }
    }
    if covered == 0 {
        return Err(Error::ZeroCoverage { lexicon: lexicon.name.clone() });
    }
    Ok(weighted / covered as f64)
}
