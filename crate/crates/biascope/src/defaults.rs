//! Built-in data shipped inside the binary: OCR repair rules, period
//! definitions, word sets and test definitions for association tests,
//! demographic classification keywords, and the misspelling probe list.
//!
//! Every accessor parses its embedded source once (lazily) and panics on
//! malformed data — these files are compiled in, so a parse failure is a
//! build defect, not a runtime condition.

use std::sync::LazyLock;

use crate::corpus::{CompiledRules, PeriodSpec};

pub const OCR_RULES_JSONL: &str = include_str!("../data/ocr_rules.jsonl");
pub const PERIODS_JSON: &str = include_str!("../data/periods.json");
pub const WEAT_SETS_JSON: &str = include_str!("../data/weat_sets.json");
pub const WEAT_TESTS_JSON: &str = include_str!("../data/weat_tests.json");
pub const CLASSIFY_KEYWORDS_JSON: &str = include_str!("../data/classify_keywords.json");
pub const MISSPELLINGS_TSV: &str = include_str!("../data/misspellings.tsv");
pub const STABILITY_GRID_JSON: &str = include_str!("../data/stability_grid.json");

/// Compiled built-in OCR cleanup rules: a list of word-level fixes for
/// damage observed in 18th/19th-century newspaper scans, followed by one
/// mop-up rule for the long-s ligature (intervocalic `f` -> `s`).
pub fn ocr_rules() -> &'static CompiledRules {
    static RULES: LazyLock<CompiledRules> = LazyLock::new(|| {
        let rules = crate::corpus::parse_rules(OCR_RULES_JSONL, "builtin:ocr_rules")
            .expect("embedded rules parse");
        CompiledRules::compile(&rules).expect("embedded rules compile")
    });
    &RULES
}

/// The raw (uncompiled) built-in rule list, for display and manifests.
pub fn ocr_rule_list() -> Vec<crate::corpus::CleanupRule> {
    crate::corpus::parse_rules(OCR_RULES_JSONL, "builtin:ocr_rules").expect("embedded rules parse")
}

/// Curated word sets for the embedding association tests: gender terms,
/// country groups, and the stereotype dimensions under study.
pub fn weat_sets() -> &'static crate::assoc::WordSets {
    static SETS: LazyLock<crate::assoc::WordSets> = LazyLock::new(|| {
        crate::assoc::parse_word_sets(WEAT_SETS_JSON, "builtin:weat_sets")
            .expect("embedded word sets parse")
    });
    &SETS
}

/// The full battery of association tests: each stereotype target pair
/// crossed with each attribute pair.
pub fn weat_tests() -> &'static [crate::assoc::WeatSpec] {
    static TESTS: LazyLock<Vec<crate::assoc::WeatSpec>> = LazyLock::new(|| {
        crate::assoc::weat::parse_specs(WEAT_TESTS_JSON, "builtin:weat_tests")
            .expect("embedded test specs parse")
    });
    &TESTS
}

/// Keyword lists for entity classification: female, male, and non-white
/// markers as they appear in the newspapers.
pub fn classify_keywords() -> &'static crate::assoc::WordSets {
    static SETS: LazyLock<crate::assoc::WordSets> = LazyLock::new(|| {
        crate::assoc::parse_word_sets(CLASSIFY_KEYWORDS_JSON, "builtin:classify_keywords")
            .expect("embedded keyword sets parse")
    });
    &SETS
}

/// Curated misspelling/correction pairs observed in the scanned newspapers.
pub fn misspellings() -> &'static [crate::stability::MisspellPair] {
    static PAIRS: LazyLock<Vec<crate::stability::MisspellPair>> = LazyLock::new(|| {
        crate::stability::parse_misspellings(MISSPELLINGS_TSV, "builtin:misspellings")
            .expect("embedded misspellings parse")
    });
    &PAIRS
}

/// Built-in hyperparameter sweep grid for the stability suite.
pub fn stability_grid() -> &'static [crate::stability::GridPoint] {
    static GRID: LazyLock<Vec<crate::stability::GridPoint>> = LazyLock::new(|| {
        serde_json::from_str(STABILITY_GRID_JSON).expect("embedded grid parses")
    });
    &GRID
}

/// Built-in period boundaries for the Caribbean newspaper collection.
pub fn periods() -> &'static [PeriodSpec] {
    static PERIODS: LazyLock<Vec<PeriodSpec>> = LazyLock::new(|| {
        let periods: Vec<PeriodSpec> =
            serde_json::from_str(PERIODS_JSON).expect("embedded periods parse");
        crate::corpus::validate_periods(&periods).expect("embedded periods valid");
        periods
    });
    &PERIODS
}
