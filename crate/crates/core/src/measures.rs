//! Scoring functions for single response lists.
//!
//! Classic measures operate on an [`AugmentedList`]: binary relevance per
//! retrieved slot plus the size of the gold set. A bare pattern maps to an
//! augmented list with one gold item. Two transforms extend a pattern before
//! scoring:
//!
//! - [`smooth`] appends one extra relevant slot and fixes the gold set at two
//!   items (the original answer and the appended one);
//! - [`terminalize`] appends a terminal slot that is relevant only when the
//!   list already holds the correct answer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{self, Outcome, ResponsePattern};

/// Identifier of a scoring function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureId {
    Precision,
    Recall,
    F1,
    F1Smoothed,
    Lar,
    Ap,
    ApTerminal,
    ApSmoothed,
    Rr,
    Ndcg,
    NdcgTerminal,
    Rbp,
    RbpTerminal,
    Olar,
}

impl MeasureId {
    /// The measure columns of the comparison table, in display order.
    pub const TABLE_COLUMNS: [MeasureId; 12] = [
        MeasureId::F1,
        MeasureId::F1Smoothed,
        MeasureId::Lar,
        MeasureId::Ap,
        MeasureId::ApTerminal,
        MeasureId::ApSmoothed,
        MeasureId::Rr,
        MeasureId::Ndcg,
        MeasureId::NdcgTerminal,
        MeasureId::Rbp,
        MeasureId::RbpTerminal,
        MeasureId::Olar,
    ];

    pub const ALL: [MeasureId; 14] = [
        MeasureId::Precision,
        MeasureId::Recall,
        MeasureId::F1,
        MeasureId::F1Smoothed,
        MeasureId::Lar,
        MeasureId::Ap,
        MeasureId::ApTerminal,
        MeasureId::ApSmoothed,
        MeasureId::Rr,
        MeasureId::Ndcg,
        MeasureId::NdcgTerminal,
        MeasureId::Rbp,
        MeasureId::RbpTerminal,
        MeasureId::Olar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::Precision => "Precision",
            MeasureId::Recall => "Recall",
            MeasureId::F1 => "F1",
            MeasureId::F1Smoothed => "F1s",
            MeasureId::Lar => "LAR",
            MeasureId::Ap => "AP",
            MeasureId::ApTerminal => "APL",
            MeasureId::ApSmoothed => "APs",
            MeasureId::Rr => "RR",
            MeasureId::Ndcg => "nDCG",
            MeasureId::NdcgTerminal => "nDCGL",
            MeasureId::Rbp => "RBP",
            MeasureId::RbpTerminal => "RBPL",
            MeasureId::Olar => "OLAR",
        }
    }

    /// Whether the measure is sensitive to the order of the list.
    pub fn is_ranked(self) -> bool {
        !matches!(
            self,
            MeasureId::Precision
                | MeasureId::Recall
                | MeasureId::F1
                | MeasureId::F1Smoothed
                | MeasureId::Lar
        )
    }

    /// Decimal places used when the score is displayed.
    pub fn display_decimals(self) -> usize {
        match self {
            MeasureId::Olar => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMeasure(s.to_string()))
    }
}

/// Parameters left open by the measures and the compliance checker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    /// RBP persistence.
    pub rbp_p: f64,
    /// Safety margin subtracted from the confidence gap when deriving mu.
    pub lambda: f64,
    /// Longest list considered; bounds OLAR's mu and the enumerated universe.
    pub max_len: usize,
    /// Check Priority as `p(r1) > p(r2) => M(r1) > M(r2)` instead of the
    /// non-strict `>=` form.
    pub priority_strict: bool,
    /// Use this mu for OLAR instead of deriving it from `max_len` and `lambda`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_override: Option<f64>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            rbp_p: 0.5,
            lambda: 0.001,
            max_len: 5,
            priority_strict: true,
            mu_override: None,
        }
    }
}

impl MeasureConfig {
    pub fn with_max_len(self, max_len: usize) -> Self {
        Self { max_len, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.rbp_p)?;
        if self.max_len < 1 {
            return Err(Error::Config("max_len must be at least 1".into()));
        }
        self.mu().map(|_| ())
    }

    /// OLAR's priority-term cap.
    ///
    /// A universe of single-item lists has no confidence gap to protect, so
    /// `max_len == 1` shares the bound derived for length 2.
    pub fn mu(&self) -> Result<f64> {
        match self.mu_override {
            Some(mu) if mu > 0.0 && mu.is_finite() => Ok(mu),
            Some(mu) => Err(Error::Config(format!("mu must be positive (got {mu})"))),
            None => pattern::derive_mu(self.max_len.max(2), self.lambda),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "RBP persistence must lie in (0, 1), got {p}"
        )))
    }
}

/// Binary-relevance list with the size of its gold set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedList {
    pub relevant: Vec<bool>,
    pub total_relevant: usize,
}

impl AugmentedList {
    pub fn retrieved_relevant(&self) -> usize {
        self.relevant.iter().filter(|r| **r).count()
    }
}

impl From<&ResponsePattern> for AugmentedList {
    fn from(r: &ResponsePattern) -> Self {
        Self {
            relevant: slots(r),
            total_relevant: 1,
        }
    }
}

fn slots(r: &ResponsePattern) -> Vec<bool> {
    r.items().iter().map(|o| *o == Outcome::Correct).collect()
}

/// Appends one correct response; the gold set then holds two items.
pub fn smooth(r: &ResponsePattern) -> AugmentedList {
    let mut relevant = slots(r);
    relevant.push(true);
    AugmentedList {
        relevant,
        total_relevant: 2,
    }
}

/// Appends a terminal response, relevant iff `r` holds the correct answer.
pub fn terminalize(r: &ResponsePattern) -> AugmentedList {
    let mut relevant = slots(r);
    let met = r.has_correct();
    relevant.push(met);
    AugmentedList {
        relevant,
        total_relevant: if met { 2 } else { 1 },
    }
}

pub fn precision(r: &ResponsePattern) -> f64 {
    list_precision(&r.into())
}

pub fn recall(r: &ResponsePattern) -> f64 {
    list_recall(&r.into())
}

fn list_precision(a: &AugmentedList) -> f64 {
    a.retrieved_relevant() as f64 / a.relevant.len() as f64
}

fn list_recall(a: &AugmentedList) -> f64 {
    a.retrieved_relevant() as f64 / a.total_relevant as f64
}

/// Harmonic mean of precision and recall over an augmented list; 0 when both are 0.
pub fn list_f1(a: &AugmentedList) -> f64 {
    let p = list_precision(a);
    let r = list_recall(a);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn f1(r: &ResponsePattern) -> f64 {
    list_f1(&r.into())
}

pub fn f1_smoothed(r: &ResponsePattern) -> f64 {
    list_f1(&smooth(r))
}

/// Mean of the precision values at each retrieved relevant slot, divided by
/// the gold-set size.
pub fn average_precision(a: &AugmentedList) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (idx, rel) in a.relevant.iter().enumerate() {
        if *rel {
            hits += 1;
            sum += hits as f64 / (idx + 1) as f64;
        }
    }
    sum / a.total_relevant as f64
}

pub fn ap(r: &ResponsePattern) -> f64 {
    average_precision(&r.into())
}

pub fn ap_terminal(r: &ResponsePattern) -> f64 {
    average_precision(&terminalize(r))
}

pub fn ap_smoothed(r: &ResponsePattern) -> f64 {
    average_precision(&smooth(r))
}

pub fn reciprocal_rank(r: &ResponsePattern) -> f64 {
    pattern::reciprocal_rank_term(r)
}

fn discount(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).log2()
}

/// Binary-gain nDCG with the `1/log2(rank + 1)` discount; the ideal list packs
/// all gold items at the top.
pub fn ndcg(a: &AugmentedList) -> f64 {
    let dcg: f64 = a
        .relevant
        .iter()
        .enumerate()
        .filter(|(_, rel)| **rel)
        .map(|(idx, _)| discount(idx + 1))
        .sum();
    let ideal: f64 = (1..=a.total_relevant).map(discount).sum();
    dcg / ideal
}

pub fn ndcg_pattern(r: &ResponsePattern) -> f64 {
    ndcg(&r.into())
}

pub fn ndcg_terminal(r: &ResponsePattern) -> f64 {
    ndcg(&terminalize(r))
}

pub fn rbp(r: &ResponsePattern, p: f64) -> Result<f64> {
    check_probability(p)?;
    let sum: f64 = r
        .items()
        .iter()
        .enumerate()
        .filter(|(_, o)| **o == Outcome::Correct)
        .map(|(idx, _)| p.powi(idx as i32))
        .sum();
    Ok((1.0 - p) * sum)
}

/// RBP with a terminal slot that collects the residual weight `p^|r|` when
/// the list holds the correct answer.
pub fn rbp_terminal(r: &ResponsePattern, p: f64) -> Result<f64> {
    let base = rbp(r, p)?;
    if r.has_correct() {
        Ok(base + p.powi(r.len() as i32))
    } else {
        Ok(base)
    }
}

/// Length-aware recall: mean of recall and the inverse list length.
pub fn lar(r: &ResponsePattern) -> f64 {
    (pattern::recall(r) + 1.0 / r.len() as f64) / 2.0
}

/// Ordered length-aware recall.
///
/// Adds the reciprocal rank of the correct item rescaled into `[0, mu]`, so
/// that the priority term can never outweigh a change in the length term for
/// lists up to `cfg.max_len`.
pub fn olar(r: &ResponsePattern, cfg: &MeasureConfig) -> Result<f64> {
    if r.len() > cfg.max_len {
        return Err(Error::Config(format!(
            "pattern {r} has length {} but max_len is {}; raise max_len to score it with OLAR",
            r.len(),
            cfg.max_len
        )));
    }
    let mu = cfg.mu()?;
    let priority = pattern::rescale(pattern::reciprocal_rank_term(r), mu)?;
    Ok((pattern::recall(r) + 1.0 / r.len() as f64 + priority) / (2.0 + mu))
}

/// Scores `r` with the given measure.
pub fn score(id: MeasureId, r: &ResponsePattern, cfg: &MeasureConfig) -> Result<f64> {
    Ok(match id {
        MeasureId::Precision => precision(r),
        MeasureId::Recall => recall(r),
        MeasureId::F1 => f1(r),
        MeasureId::F1Smoothed => f1_smoothed(r),
        MeasureId::Lar => lar(r),
        MeasureId::Ap => ap(r),
        MeasureId::ApTerminal => ap_terminal(r),
        MeasureId::ApSmoothed => ap_smoothed(r),
        MeasureId::Rr => reciprocal_rank(r),
        MeasureId::Ndcg => ndcg_pattern(r),
        MeasureId::NdcgTerminal => ndcg_terminal(r),
        MeasureId::Rbp => rbp(r, cfg.rbp_p)?,
        MeasureId::RbpTerminal => rbp_terminal(r, cfg.rbp_p)?,
        MeasureId::Olar => olar(r, cfg)?,
    })
}

/// Scores every pattern with one measure.
pub fn score_all(
    id: MeasureId,
    patterns: &[ResponsePattern],
    cfg: &MeasureConfig,
) -> Result<Vec<f64>> {
    patterns.iter().map(|r| score(id, r, cfg)).collect()
}
