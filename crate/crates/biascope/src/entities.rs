//! Person records extracted from the corpus: keyword-based gender and race
//! classification of their referring phrases, group tallies, and the
//! descriptor co-occurrence table that feeds the PMI and lexicon analyses.
//!
//! Classification is deliberately conservative and transparent: a whole
//! token from a referring phrase must match a keyword list. Conflicting
//! gender evidence (phrases like "his wife" carry both) leaves the entity
//! unclassified rather than guessing. Race in this corpus is overwhelmingly
//! marked only for non-white people — an unmarked entity defaults to white,
//! which is itself a documented property of the source material.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assoc::pmi::{CoocTable, GROUP_FEMALE, GROUP_MALE, GROUP_NON_WHITE, GROUP_WHITE};
use crate::error::{Error, Result};
use crate::tokenize::tokenize_words;

/// Gender-group label for entities with conflicting or absent evidence.
pub const UNCLASSIFIED: &str = "unclassified";

/// One person mentioned in the corpus: the phrases that refer to them and
/// the descriptor words applied to them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: String,
    /// Referring phrases ("a negro woman", "Louisa", "she").
    pub references: Vec<String>,
    /// Words describing the entity, in occurrence order.
    #[serde(default)]
    pub descriptors: Vec<String>,
}

/// Parse entity JSONL: one record per line, blank lines ignored. Duplicate
/// ids, empty ids, and reference-less records are rejected.
pub fn parse_entities(raw: &str, origin: &str) -> Result<Vec<EntityRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: EntityRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(origin, idx + 1, e.to_string()))?;
        if record.id.trim().is_empty() {
            return Err(Error::parse(origin, idx + 1, "entity id is empty"));
        }
        if record.references.iter().all(|r| r.trim().is_empty()) {
            return Err(Error::NoReferences { id: record.id });
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::parse(origin, idx + 1, format!("duplicate entity id {:?}", record.id)));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn load_entities(path: impl AsRef<Path>) -> Result<Vec<EntityRecord>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_entities(&raw, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Race {
    White,
    NonWhite,
}

/// Demographic reading of one entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// `None` when the references carry no gender keyword or carry both.
    pub gender: Option<Gender>,
    /// White unless a non-white marker appears: the newspapers mark
    /// non-white status explicitly and leave whiteness implicit.
    pub race: Race,
}

impl Classification {
    /// Group labels this entity contributes to: always a race group, plus a
    /// gender group and the intersection when gender is classified.
    pub fn groups(&self) -> Vec<&'static str> {
        let race = match self.race {
            Race::White => GROUP_WHITE,
            Race::NonWhite => GROUP_NON_WHITE,
        };
        match (self.gender, self.race) {
            (None, _) => vec![race],
            (Some(Gender::Female), Race::White) => vec![race, GROUP_FEMALE, "white_female"],
            (Some(Gender::Male), Race::White) => vec![race, GROUP_MALE, "white_male"],
            (Some(Gender::Female), Race::NonWhite) => vec![race, GROUP_FEMALE, "non_white_female"],
            (Some(Gender::Male), Race::NonWhite) => vec![race, GROUP_MALE, "non_white_male"],
        }
    }
}

/// The keyword lists classification matches against.
#[derive(Debug, Clone)]
pub struct KeywordSets {
    female: HashSet<String>,
    male: HashSet<String>,
    non_white: HashSet<String>,
}

impl KeywordSets {
    /// Build from named word sets; requires "female", "male", and
    /// "non_white" (extra sets are ignored). Words are already lowercased
    /// by the word-set parser.
    pub fn from_word_sets(sets: &crate::assoc::WordSets) -> Result<Self> {
        let take = |name: &str| -> Result<HashSet<String>> {
            sets.get(name)
                .map(|ws| ws.iter().cloned().collect())
                .ok_or_else(|| Error::MissingKeywordSet(name.to_string()))
        };
        Ok(KeywordSets {
            female: take("female")?,
            male: take("male")?,
            non_white: take("non_white")?,
        })
    }
}

/// Classify one entity from its referring phrases. Matching is
/// whole-token and case-insensitive: each reference is word-tokenized and
/// every token is looked up in the keyword lists, so "negro" inside
/// "a negro woman" matches but "negros" inside "negroses" would not.
pub fn classify_entity(record: &EntityRecord, keywords: &KeywordSets) -> Classification {
    let mut female = false;
    let mut male = false;
    let mut non_white = false;
    for reference in &record.references {
        for token in tokenize_words(reference, true) {
            female |= keywords.female.contains(&token);
            male |= keywords.male.contains(&token);
            non_white |= keywords.non_white.contains(&token);
        }
    }
    Classification {
        gender: match (female, male) {
            (true, false) => Some(Gender::Female),
            (false, true) => Some(Gender::Male),
            _ => None,
        },
        race: if non_white { Race::NonWhite } else { Race::White },
    }
}

/// Entity counts per group label. Every entity lands in exactly one race
/// group and exactly one of {female, male, unclassified}; intersection
/// groups count the gender-classified entities again by race.
pub fn group_sizes(
    entities: &[EntityRecord],
    keywords: &KeywordSets,
) -> BTreeMap<String, usize> {
    let mut sizes = BTreeMap::new();
    for label in [
        GROUP_FEMALE,
        GROUP_MALE,
        UNCLASSIFIED,
        GROUP_WHITE,
        GROUP_NON_WHITE,
        "white_female",
        "white_male",
        "non_white_female",
        "non_white_male",
    ] {
        sizes.insert(label.to_string(), 0);
    }
    for record in entities {
        let classification = classify_entity(record, keywords);
        for group in classification.groups() {
            *sizes.get_mut(group).expect("pre-seeded") += 1;
        }
        if classification.gender.is_none() {
            *sizes.get_mut(UNCLASSIFIED).expect("pre-seeded") += 1;
        }
    }
    sizes
}

/// Tally descriptor occurrences per group: each descriptor word of an
/// entity (lowercased) counts once toward every group the entity belongs
/// to. This is the co-occurrence table behind the PMI plane and lexicon
/// scores.
pub fn descriptor_counts(entities: &[EntityRecord], keywords: &KeywordSets) -> CoocTable {
    let mut table = CoocTable::new();
    for record in entities {
        let groups = classify_entity(record, keywords).groups();
        for descriptor in &record.descriptors {
            let word = descriptor.trim().to_lowercase();
            if word.is_empty() {
                continue;
            }
            for group in &groups {
                table.add(group, &word, 1);
            }
        }
    }
    table
}
