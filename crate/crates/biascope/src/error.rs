use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the toolkit. Variants carry enough
/// context (paths, line numbers, offending tokens) that the CLI can print a
/// single self-explanatory line and exit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Line-oriented input files (JSONL, TSV, vector/model files) report the
    /// 1-based line where parsing failed.
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("duplicate document id {id:?}")]
    DuplicateDocId { id: String },

    #[error("invalid period list: {0}")]
    InvalidPeriods(String),

    #[error("invalid cleanup rule {pattern:?}: {msg}")]
    InvalidRule { pattern: String, msg: String },

    #[error("corpus contains no tokens")]
    EmptyCorpus,

    #[error("no token occurs at least {min_count} times")]
    EmptyVocab { min_count: u64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("token {token:?} not in vocabulary")]
    TokenNotFound { token: String },

    #[error("cosine similarity undefined for a zero vector")]
    ZeroVector,

    #[error("vector length mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("jaccard similarity undefined: both sets empty")]
    BothSetsEmpty,

    #[error("stability comparison needs at least two models, got {0}")]
    TooFewModels(usize),

    #[error("models share no vocabulary")]
    NoSharedVocab,

    #[error("no misspelling pairs given")]
    NoPairs,

    #[error("word set {name:?} is empty{context}")]
    EmptyWordSet { name: String, context: String },

    #[error("no word set named {name:?}")]
    WordSetNotFound { name: String },

    #[error("word set {set:?} lists {word:?} twice")]
    DuplicateWord { set: String, word: String },

    #[error("need at least {min} permutations, got {got}")]
    TooFewPermutations { min: usize, got: usize },

    #[error("group {0:?} not in co-occurrence table")]
    GroupNotFound(String),

    #[error("word {0:?} not in co-occurrence table")]
    WordNotFound(String),

    #[error("pmi undefined: count({group:?}, {word:?}) is zero")]
    ZeroJointCount { group: String, word: String },

    #[error("lexicon {lexicon:?} covers none of the descriptor occurrences")]
    ZeroCoverage { lexicon: String },

    #[error("keyword set {0:?} missing (need female, male, non_white)")]
    MissingKeywordSet(String),

    #[error("entity {id:?} has no references")]
    NoReferences { id: String },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn parse(path: impl AsRef<std::path::Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.as_ref().display().to_string(), line, msg: msg.into() }
    }
}
