use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid pattern: {0}")]
    Pattern(#[from] PatternError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("duplicate {what} for query {query_id:?}: {detail}")]
    Duplicate {
        what: &'static str,
        query_id: String,
        detail: String,
    },

    #[error("invalid ranks for query {query_id:?}: {detail}")]
    RankGap { query_id: String, detail: String },

    #[error("runs and qrels disagree: {0}")]
    Reconciliation(Reconciliation),

    #[error("unknown measure {0:?}")]
    UnknownMeasure(String),

    #[error("unknown format {0:?}")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("empty pattern")]
    Empty,
    #[error("unexpected character {found:?} at position {position} (expected 'c' or 'w')")]
    BadCharacter { position: usize, found: char },
    #[error("multiple correct responses (second 'c' at position {position})")]
    MultipleCorrect { position: usize },
}

/// Query ids that appear on only one side of a runs/qrels pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Reconciliation {
    pub missing_qrels: Vec<String>,
    pub missing_runs: Vec<String>,
}

impl fmt::Display for Reconciliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.missing_qrels.is_empty() {
            parts.push(format!("no qrel for [{}]", self.missing_qrels.join(", ")));
        }
        if !self.missing_runs.is_empty() {
            parts.push(format!("no run for [{}]", self.missing_runs.join(", ")));
        }
        f.write_str(&parts.join("; "))
    }
}
