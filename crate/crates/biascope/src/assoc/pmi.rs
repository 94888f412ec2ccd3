//! Pointwise mutual information between demographic groups and descriptor
//! words, and the two-axis PMI plane (gender axis × race axis) built from
//! group differences.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::atomic_write;

/// Group name constants for the four-way demographic table.
pub const GROUP_FEMALE: &str = "female";
pub const GROUP_MALE: &str = "male";
pub const GROUP_NON_WHITE: &str = "non_white";
pub const GROUP_WHITE: &str = "white";

/// Group-by-word co-occurrence counts. Ordered maps keep every listing and
/// serialisation deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoocTable {
    counts: BTreeMap<String, BTreeMap<String, u64>>,
}

impl CoocTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, group: &str, word: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self
            .counts
            .entry(group.to_string())
            .or_default()
            .entry(word.to_string())
            .or_insert(0) += n;
    }

    pub fn count(&self, group: &str, word: &str) -> u64 {
        self.counts
            .get(group)
            .and_then(|words| words.get(word))
            .copied()
            .unwrap_or(0)
    }

    pub fn has_group(&self, group: &str) -> bool {
        self.counts.contains_key(group)
    }

    pub fn groups(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn group_counts(&self, group: &str) -> Option<&BTreeMap<String, u64>> {
        self.counts.get(group)
    }

    /// Marginal count of a group (sum over its words).
    pub fn group_total(&self, group: &str) -> u64 {
        self.counts
            .get(group)
            .map(|words| words.values().sum())
            .unwrap_or(0)
    }

    /// Marginal count of a word (sum over all groups).
    pub fn word_total(&self, word: &str) -> u64 {
        self.counts
            .values()
            .filter_map(|words| words.get(word))
            .sum()
    }

    /// Grand total of all counts.
    pub fn total(&self) -> u64 {
        self.counts.values().flat_map(|words| words.values()).sum()
    }

    /// Every word appearing under any group, sorted.
    pub fn words(&self) -> BTreeSet<&str> {
        self.counts
            .values()
            .flat_map(|words| words.keys().map(String::as_str))
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("table serializes");
        json.push('\n');
        atomic_write(path, json.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&raw).map_err(|e| Error::parse(path, 1, e.to_string()))
    }
}

/// `ln( c(g,w) · N / (c(g) · c(w)) )`: positive when the word co-occurs with
/// the group more often than independence predicts. Zero joint count is an
/// error (the value would be −∞), as are unknown groups and words.
pub fn pmi(table: &CoocTable, group: &str, word: &str) -> Result<f64> {
    if !table.has_group(group) {
        return Err(Error::GroupNotFound(group.to_string()));
    }
    let word_marginal = table.word_total(word);
    if word_marginal == 0 {
        return Err(Error::WordNotFound(word.to_string()));
    }
    let joint = table.count(group, word);
    if joint == 0 {
        return Err(Error::ZeroJointCount { group: group.to_string(), word: word.to_string() });
    }
    let n = table.total() as f64;
    let group_marginal = table.group_total(group) as f64;
    Ok((joint as f64 * n / (group_marginal * word_marginal as f64)).ln())
}

/// One descriptor word placed on the gender × race PMI plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmiPoint {
    pub word: String,
    /// `pmi(female, w) − pmi(male, w)`: positive leans female.
    pub gender_axis: f64,
    /// `pmi(non_white, w) − pmi(white, w)`: positive leans non-white.
    pub race_axis: f64,
    pub count_female: u64,
    pub count_male: u64,
    pub count_non_white: u64,
    pub count_white: u64,
}

/// A word excluded from the plane, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedWord {
    pub word: String,
    pub total: u64,
    pub reason: String,
}

/// Place every eligible descriptor on the gender × race plane.
///
/// A word qualifies when its total count across the four groups reaches
/// `min_count` and every one of the four joint counts is positive (PMI
/// differences need all four defined). The table must contain all four
/// groups. Points come back sorted by word; skipped words are reported with
/// reasons rather than silently vanishing.
pub fn pmi_plane(table: &CoocTable, min_count: u64) -> Result<(Vec<PmiPoint>, Vec<SkippedWord>)> {
    for g in [GROUP_FEMALE, GROUP_MALE, GROUP_NON_WHITE, GROUP_WHITE] {
        if !table.has_group(g) {
            return Err(Error::GroupNotFound(g.to_string()));
        }
    }
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for word in table.words() {
        let cf = table.count(GROUP_FEMALE, word);
        let cm = table.count(GROUP_MALE, word);
        let cn = table.count(GROUP_NON_WHITE, word);
        let cw = table.count(GROUP_WHITE, word);
        let total = cf + cm + cn + cw;
        if total < min_count {
            skipped.push(SkippedWord {
                word: word.to_string(),
                total,
                reason: format!("total {total} below minimum {min_count}"),
            });
            continue;
        }
        if cf == 0 || cm == 0 || cn == 0 || cw == 0 {
            skipped.push(SkippedWord {
                word: word.to_string(),
                total,
                reason: "zero count in at least one group".to_string(),
            });
            continue;
        }
        points.push(PmiPoint {
            word: word.to_string(),
            gender_axis: pmi(table, GROUP_FEMALE, word)? - pmi(table, GROUP_MALE, word)?,
            race_axis: pmi(table, GROUP_NON_WHITE, word)? - pmi(table, GROUP_WHITE, word)?,
            count_female: cf,
            count_male: cm,
            count_non_white: cn,
            count_white: cw,
        });
    }
    Ok((points, skipped))
}
