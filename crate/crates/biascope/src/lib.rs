//! biascope: measure social bias in noisy historical text corpora.
//!
//! The library covers the full pipeline used to study demographic bias in
//! digitised newspaper archives:
//!
//! * [`corpus`] — JSONL ingestion, rule-based OCR cleanup, period splitting
//! * [`tokenize`] — word tokenization and byte-pair-encoding subwords
//! * [`embed`] — skip-gram negative-sampling word embeddings
//! * [`stability`] — neighbourhood-overlap and misspelling diagnostics for
//!   choosing embedding hyperparameters on small corpora
//! * [`assoc`] — word-embedding association tests, PMI co-occurrence planes,
//!   and lexicon scoring
//! * [`entities`] — keyword-based gender/race classification of person
//!   records and descriptor counting
//!
//! All randomised procedures take explicit seeds and are reproducible;
//! anything parallel (feature `parallel`, on by default) returns the same
//! results regardless of thread count unless documented otherwise.

pub mod assoc;
pub mod corpus;
pub mod defaults;
pub mod embed;
pub mod entities;
pub mod error;
pub mod report;
pub mod stability;
pub mod synth;
pub mod tokenize;

pub use error::{Error, Result};
