//! Corpus ingestion and repair: JSONL documents, rule-based OCR cleanup, and
//! splitting a collection into historical periods by publication year.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::atomic_write;

/// Bucket name for documents without a usable date.
pub const UNDATED: &str = "undated";

/// A calendar date, ISO-8601 `YYYY-MM-DD`. Only the year drives period
/// splitting, but the full date is validated on load so bad scans surface
/// early instead of silently landing in the wrong bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Date {
    year: i32,
    month: u8,
    day: u8,
}

impl Date {
    pub fn new(year: i32, month: u8, day: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidConfig(format!("month {month} out of range")));
        }
        let leap = year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
        let days_in_month = match month {
            1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
            4 | 6 | 9 | 11 => 30,
            2 if leap => 29,
            _ => 28,
        };
        if day < 1 || day > days_in_month {
            return Err(Error::InvalidConfig(format!("day {day} out of range for month {month}")));
        }
        Ok(Date { year, month, day })
    }

    pub fn year(&self) -> i32 {
        self.year
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for Date {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("date {s:?} is not YYYY-MM-DD"));
        let mut parts = s.splitn(3, '-');
        let (y, m, d) = match (parts.next(), parts.next(), parts.next()) {
            (Some(y), Some(m), Some(d)) if y.len() == 4 && m.len() == 2 && d.len() == 2 => {
                (y, m, d)
            }
            _ => return Err(bad()),
        };
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u8 = m.parse().map_err(|_| bad())?;
        let day: u8 = d.parse().map_err(|_| bad())?;
        Date::new(year, month, day)
    }
}

impl Serialize for Date {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|e: Error| serde::de::Error::custom(e.to_string()))
    }
}

/// One newspaper page/article as stored in corpus JSONL: a unique id, the
/// raw text, and optionally the publication date and source collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<Date>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// Parse corpus JSONL: one document per line, blank lines ignored. Errors
/// name the offending line; duplicate ids and empty id/text are rejected.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&raw, &path.display().to_string())
}

pub fn parse_corpus(raw: &str, origin: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line)
            .map_err(|e| Error::parse(origin, idx + 1, e.to_string()))?;
        if doc.id.trim().is_empty() {
            return Err(Error::parse(origin, idx + 1, "document id is empty"));
        }
        if doc.text.trim().is_empty() {
            return Err(Error::parse(origin, idx + 1, "document text is empty"));
        }
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateDocId { id: doc.id });
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn corpus_to_jsonl(docs: &[Document]) -> String {
    let mut out = String::new();
    for doc in docs {
        out.push_str(&serde_json::to_string(doc).expect("document serializes"));
        out.push('\n');
    }
    out
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    atomic_write(path, corpus_to_jsonl(docs).as_bytes())
}

/// Where a cleanup rule's pattern may match: inside a single
/// whitespace-delimited token only, or anywhere in the text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleScope {
    WordInternal,
    Anywhere,
}

/// One OCR repair rule. `pattern` is a regular expression; `replacement` may
/// use `${n}` capture references. With `word-internal` scope the pattern is
/// applied to each whitespace-delimited token separately (so `^`/`$` anchor
/// to token edges and matches never span whitespace).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanupRule {
    pub pattern: String,
    pub replacement: String,
    pub scope: RuleScope,
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<Vec<CleanupRule>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rules(&raw, &path.display().to_string())
}

pub fn parse_rules(raw: &str, origin: &str) -> Result<Vec<CleanupRule>> {
    let mut rules = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rule: CleanupRule = serde_json::from_str(line)
            .map_err(|e| Error::parse(origin, idx + 1, e.to_string()))?;
        rules.push(rule);
    }
    Ok(rules)
}

/// Rules with their regexes compiled once. Order is preserved: cleanup
/// applies rule 1 to a fixpoint, then rule 2, and so on.
#[derive(Debug)]
pub struct CompiledRules {
    rules: Vec<(Regex, String, RuleScope)>,
}

impl CompiledRules {
    pub fn compile(rules: &[CleanupRule]) -> Result<Self> {
        let mut compiled = Vec::with_capacity(rules.len());
        for rule in rules {
            let re = Regex::new(&rule.pattern).map_err(|e| Error::InvalidRule {
                pattern: rule.pattern.clone(),
                msg: e.to_string(),
            })?;
            compiled.push((re, rule.replacement.clone(), rule.scope));
        }
        Ok(CompiledRules { rules: compiled })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

// A rule that keeps rewriting its own output (e.g. `a` -> `aa`) would loop
// forever under exhaustive application; give up after this many passes.
const MAX_RULE_PASSES: usize = 64;

fn apply_to_fixpoint(re: &Regex, replacement: &str, text: &str) -> String {
    let mut current = text.to_string();
    for _ in 0..MAX_RULE_PASSES {
        let next = re.replace_all(&current, replacement);
        if next == current {
            break;
        }
        current = next.into_owned();
    }
    current
}

/// Apply the rule list to `text`: rules run in order, each exhaustively
/// (until its output stops changing) before the next. Word-internal rules
/// see each whitespace-delimited token in isolation; whitespace itself is
/// never altered.
pub fn clean_ocr(text: &str, rules: &CompiledRules) -> String {
    let mut current = text.to_string();
    for (re, replacement, scope) in &rules.rules {
        current = match scope {
            RuleScope::Anywhere => apply_to_fixpoint(re, replacement, &current),
            RuleScope::WordInternal => {
                let mut out = String::with_capacity(current.len());
                let mut rest = current.as_str();
                while !rest.is_empty() {
                    let word_end =
                        rest.find(char::is_whitespace).unwrap_or(rest.len());
                    if word_end > 0 {
                        out.push_str(&apply_to_fixpoint(re, replacement, &rest[..word_end]));
                        rest = &rest[word_end..];
                    }
                    let ws_end = rest
                        .find(|c: char| !c.is_whitespace())
                        .unwrap_or(rest.len());
                    out.push_str(&rest[..ws_end]);
                    rest = &rest[ws_end..];
                }
                out
            }
        };
    }
    current
}

/// A named year range, inclusive on both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSpec {
    pub name: String,
    pub start_year: i32,
    pub end_year: i32,
}

pub fn load_periods(path: impl AsRef<Path>) -> Result<Vec<PeriodSpec>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_periods(&raw, &path.display().to_string())
}

pub fn parse_periods(raw: &str, origin: &str) -> Result<Vec<PeriodSpec>> {
    let periods: Vec<PeriodSpec> =
        serde_json::from_str(raw).map_err(|e| Error::parse(origin, 1, e.to_string()))?;
    validate_periods(&periods)?;
    Ok(periods)
}

/// Periods must be named (anything but the reserved "undated"), well-formed,
/// ascending, and non-overlapping.
pub fn validate_periods(periods: &[PeriodSpec]) -> Result<()> {
    if periods.is_empty() {
        return Err(Error::InvalidPeriods("no periods given".into()));
    }
    let mut names = std::collections::HashSet::new();
    for p in periods {
        if p.name.trim().is_empty() {
            return Err(Error::InvalidPeriods("period with empty name".into()));
        }
        if p.name == UNDATED {
            return Err(Error::InvalidPeriods(format!("period name {UNDATED:?} is reserved")));
        }
        if p.start_year > p.end_year {
            return Err(Error::InvalidPeriods(format!(
                "period {:?} starts {} after it ends {}",
                p.name, p.start_year, p.end_year
            )));
        }
        if !names.insert(p.name.as_str()) {
            return Err(Error::InvalidPeriods(format!("duplicate period name {:?}", p.name)));
        }
    }
    for pair in periods.windows(2) {
        if pair[1].start_year <= pair[0].end_year {
            return Err(Error::InvalidPeriods(format!(
                "periods {:?} and {:?} overlap or are out of order",
                pair[0].name, pair[1].name
            )));
        }
    }
    Ok(())
}

/// Partition documents into period buckets by publication year. Every
/// document lands in exactly one bucket; documents with no date or a year
/// outside all ranges go to the reserved "undated" bucket (always present,
/// always last).
pub fn split_periods(
    docs: Vec<Document>,
    periods: &[PeriodSpec],
) -> Result<IndexMap<String, Vec<Document>>> {
    validate_periods(periods)?;
    let mut buckets: IndexMap<String, Vec<Document>> = IndexMap::new();
    for p in periods {
        buckets.insert(p.name.clone(), Vec::new());
    }
    buckets.insert(UNDATED.to_string(), Vec::new());
    for doc in docs {
        let bucket = doc
            .date
            .map(|d| d.year())
            .and_then(|y| periods.iter().find(|p| p.start_year <= y && y <= p.end_year))
            .map(|p| p.name.clone())
            .unwrap_or_else(|| UNDATED.to_string());
        buckets.get_mut(&bucket).expect("bucket pre-inserted").push(doc);
    }
    Ok(buckets)
}
