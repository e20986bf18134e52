//! Scoring and axiomatic analysis of variable-length response lists.
//!
//! A response list is abstracted to a [`ResponsePattern`]: a non-empty
//! sequence of correct (`c`) and wrong (`w`) outcomes holding at most one
//! correct item. The crate provides
//!
//! - classic IR measures (F1, AP, RR, nDCG, RBP) plus their smoothed and
//!   terminal-response variants, and the length-aware measures LAR and OLAR
//!   ([`measures`]);
//! - the Correctness / Confidence / Priority preference properties, the gold
//!   ranking they induce, and compliance checking with counterexamples
//!   ([`axioms`]);
//! - tie-aware rank correlation ([`stats`]);
//! - the full comparison table and its renderers ([`report`]);
//! - run/qrels ingestion with macro-averaged scoring ([`ingest`]).

pub mod axioms;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod measures;
pub mod pattern;
pub mod report;
pub mod stats;

pub use axioms::{GoldMode, GoldRanking, Preference, PropertyId};
pub use error::{Error, Result};
pub use measures::{MeasureConfig, MeasureId};
pub use pattern::{Outcome, ResponsePattern};

/// Tolerance used whenever two measure scores are compared for order or
/// equality. Scores that agree to this many digits are treated as ties.
pub const SCORE_EPSILON: f64 = 1e-9;
