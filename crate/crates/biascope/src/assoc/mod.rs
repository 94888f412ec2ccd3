//! Association measures between demographic groups and vocabulary: embedding
//! association tests ([`weat`]), PMI co-occurrence planes ([`pmi`]), and
//! weighted-lexicon scores ([`lexicon`]).

pub mod lexicon;
pub mod pmi;
pub mod weat;

pub use lexicon::{lexicon_assoc, load_lexicon, parse_lexicon, Lexicon};
pub use pmi::{pmi, pmi_plane, CoocTable, PmiPoint, SkippedWord};
pub use weat::{
    load_specs, parse_specs, temporal_weat, weat_effect_size, weat_p_value, weat_statistic,
    weat_test, weat_word_assoc, WeatResult, WeatSpec, MIN_PERMUTATIONS,
};

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named list of words used as an association-test target or attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordSet {
    pub name: String,
    pub words: Vec<String>,
}

/// Named word sets in file order. Lookups are by name.
pub type WordSets = IndexMap<String, Vec<String>>;

/// Parse a word-set file (a JSON list of `{name, words}` objects). Words are
/// lowercased; a word listed twice within one set, an empty set, or a
/// duplicated set name is an error.
pub fn parse_word_sets(raw: &str, origin: &str) -> Result<WordSets> {
    let sets: Vec<WordSet> =
        serde_json::from_str(raw).map_err(|e| Error::parse(origin, 1, e.to_string()))?;
    let mut out = WordSets::new();
    for set in sets {
        if set.words.is_empty() {
            return Err(Error::EmptyWordSet { name: set.name, context: String::new() });
        }
        let mut words = Vec::with_capacity(set.words.len());
        for w in &set.words {
            let w = w.trim().to_lowercase();
            if w.is_empty() {
                return Err(Error::parse(origin, 1, format!("empty word in set {:?}", set.name)));
            }
            if words.contains(&w) {
                return Err(Error::DuplicateWord { set: set.name, word: w });
            }
            words.push(w);
        }
        if out.insert(set.name.clone(), words).is_some() {
            return Err(Error::parse(origin, 1, format!("duplicate set name {:?}", set.name)));
        }
    }
    if out.is_empty() {
        return Err(Error::parse(origin, 1, "no word sets in file"));
    }
    Ok(out)
}

pub fn load_word_sets(path: impl AsRef<Path>) -> Result<WordSets> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_word_sets(&raw, &path.display().to_string())
}

/// Fetch a set by name or fail with the name in the error.
pub fn get_set<'s>(sets: &'s WordSets, name: &str) -> Result<&'s [String]> {
    sets.get(name)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::WordSetNotFound { name: name.to_string() })
}
