//! Response patterns and the helper functions shared by every measure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, PatternError, Result};

/// Outcome of a single response slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Correct,
    Wrong,
}

impl Outcome {
    pub fn symbol(self) -> char {
        match self {
            Outcome::Correct => 'c',
            Outcome::Wrong => 'w',
        }
    }
}

/// A non-empty response list with at most one correct item.
///
/// Ranks are 1-based: `items()[0]` is the response at rank 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponsePattern {
    items: Vec<Outcome>,
}

impl ResponsePattern {
    /// Builds a pattern, enforcing non-emptiness and the single-correct rule.
    pub fn new(items: Vec<Outcome>) -> Result<Self, PatternError> {
        if items.is_empty() {
            return Err(PatternError::Empty);
        }
        let mut seen_correct = false;
        for (idx, item) in items.iter().enumerate() {
            if *item == Outcome::Correct {
                if seen_correct {
                    return Err(PatternError::MultipleCorrect { position: idx + 1 });
                }
                seen_correct = true;
            }
        }
        Ok(Self { items })
    }

    /// All-wrong pattern of the given length.
    pub fn all_wrong(len: usize) -> Result<Self, PatternError> {
        Self::new(vec![Outcome::Wrong; len])
    }

    /// Pattern of length `len` whose only correct item sits at `rank` (1-based).
    /// Returns `None` unless `1 <= rank <= len`.
    pub fn correct_at(len: usize, rank: usize) -> Option<Self> {
        if rank == 0 || rank > len {
            return None;
        }
        let mut items = vec![Outcome::Wrong; len];
        items[rank - 1] = Outcome::Correct;
        Some(Self { items })
    }

    pub fn items(&self) -> &[Outcome] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    /// Always false; patterns are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// 1-based rank of the correct item, if any.
    pub fn correct_rank(&self) -> Option<usize> {
        self.items
            .iter()
            .position(|o| *o == Outcome::Correct)
            .map(|i| i + 1)
    }

    pub fn has_correct(&self) -> bool {
        self.correct_rank().is_some()
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.items.iter().filter(|o| **o == outcome).count()
    }
}

impl fmt::Display for ResponsePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            write!(f, "{}", item.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for ResponsePattern {
    type Err = PatternError;

    fn from_str(text: &str) -> Result<Self, PatternError> {
        if text.is_empty() {
            return Err(PatternError::Empty);
        }
        let mut items = Vec::with_capacity(text.len());
        for (idx, ch) in text.chars().enumerate() {
            let outcome = match ch {
                'c' => Outcome::Correct,
                'w' => Outcome::Wrong,
                other => {
                    return Err(PatternError::BadCharacter {
                        position: idx + 1,
                        found: other,
                    })
                }
            };
            items.push(outcome);
        }
        Self::new(items)
    }
}

impl Serialize for ResponsePattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ResponsePattern {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses the `c`/`w` text form of a pattern.
pub fn parse_pattern(text: &str) -> Result<ResponsePattern> {
    Ok(text.parse()?)
}

/// Number of items with the given outcome.
pub fn count_outcomes(pattern: &ResponsePattern, outcome: Outcome) -> usize {
    pattern.count(outcome)
}

/// Reciprocal rank of the correct item, 0 when there is none.
pub fn reciprocal_rank_term(pattern: &ResponsePattern) -> f64 {
    pattern.correct_rank().map_or(0.0, |rank| 1.0 / rank as f64)
}

/// Linearly maps `x` from `[0, 1]` onto `[0, new_max]`.
pub fn rescale(x: f64, new_max: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "rescale input {x} is outside [0, 1]"
        )));
    }
    if new_max.is_nan() || new_max < 0.0 {
        return Err(Error::Domain(format!(
            "rescale target {new_max} is negative"
        )));
    }
    Ok(x * new_max)
}

/// Recall against the single gold item: 1 if the pattern contains it.
pub fn recall(pattern: &ResponsePattern) -> f64 {
    if pattern.has_correct() {
        1.0
    } else {
        0.0
    }
}

/// Smallest gap between the length terms `1/n` of two lists no longer than
/// `max_len`, i.e. `1/(max_len-1) - 1/max_len`.
pub fn confidence_gap(max_len: usize) -> Result<f64> {
    if max_len < 2 {
        return Err(Error::Config(format!(
            "max_len must be at least 2 to derive mu (got {max_len})"
        )));
    }
    let n = max_len as f64;
    Ok(1.0 / (n - 1.0) - 1.0 / n)
}

/// Cap on OLAR's priority term: the smallest confidence gap minus `lambda`.
pub fn derive_mu(max_len: usize, lambda: f64) -> Result<f64> {
    let gap = confidence_gap(max_len)?;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::Config(format!(
            "lambda must be positive (got {lambda})"
        )));
    }
    if lambda >= gap {
        return Err(Error::Config(format!(
            "lambda {lambda} must be below the confidence gap {gap} for max_len {max_len}"
        )));
    }
    Ok(gap - lambda)
}

/// Every pattern of length `1..=max_len` in canonical order.
///
/// Patterns containing the correct item come first, ordered by length and
/// then by the rank of the correct item; all-wrong patterns follow, ordered
/// by length.
pub fn enumerate_patterns(max_len: usize) -> Vec<ResponsePattern> {
    let mut out = Vec::with_capacity(max_len * (max_len + 3) / 2);
    for len in 1..=max_len {
        for rank in 1..=len {
            out.push(ResponsePattern::correct_at(len, rank).expect("rank within length"));
        }
    }
    for len in 1..=max_len {
        out.push(ResponsePattern::all_wrong(len).expect("non-empty"));
    }
    out
}
