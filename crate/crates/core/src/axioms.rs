//! Preference properties over response lists, the gold ranking they induce,
//! and compliance checking of measures against them.
//!
//! Properties are applied in a fixed priority order: Correctness, then
//! Confidence, then (for ranked output only) Priority. The first property
//! that expresses a preference decides a pair.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{self, MeasureConfig, MeasureId};
use crate::pattern::{enumerate_patterns, reciprocal_rank_term, Outcome, ResponsePattern};
use crate::SCORE_EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PropertyId {
    Correctness,
    Confidence,
    /// `strict` selects `p(r1) > p(r2) => M(r1) > M(r2)`; otherwise the
    /// non-strict `>=` form is checked.
    Priority {
        strict: bool,
    },
}

impl PropertyId {
    pub fn all(priority_strict: bool) -> [PropertyId; 3] {
        [
            PropertyId::Correctness,
            PropertyId::Confidence,
            PropertyId::Priority {
                strict: priority_strict,
            },
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            PropertyId::Correctness => "Correctness",
            PropertyId::Confidence => "Confidence",
            PropertyId::Priority { .. } => "Priority",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preference {
    FirstBetter,
    SecondBetter,
    Undecided,
}

impl Preference {
    fn from_ordering(ord: Ordering) -> Self {
        match ord {
            Ordering::Greater => Preference::FirstBetter,
            Ordering::Less => Preference::SecondBetter,
            Ordering::Equal => Preference::Undecided,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Preference::FirstBetter => Preference::SecondBetter,
            Preference::SecondBetter => Preference::FirstBetter,
            Preference::Undecided => Preference::Undecided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldMode {
    Unranked,
    Ranked,
}

impl GoldMode {
    pub fn for_measure(id: MeasureId) -> Self {
        if id.is_ranked() {
            GoldMode::Ranked
        } else {
            GoldMode::Unranked
        }
    }
}

impl fmt::Display for GoldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GoldMode::Unranked => "unranked",
            GoldMode::Ranked => "ranked",
        })
    }
}

impl std::str::FromStr for GoldMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unranked" => Ok(GoldMode::Unranked),
            "ranked" => Ok(GoldMode::Ranked),
            other => Err(format!(
                "unknown gold mode {other:?} (expected ranked or unranked)"
            )),
        }
    }
}

/// A list holding the correct answer beats one that does not.
pub fn prefer_correctness(r1: &ResponsePattern, r2: &ResponsePattern) -> Preference {
    Preference::from_ordering(r1.count(Outcome::Correct).cmp(&r2.count(Outcome::Correct)))
}

/// With equal correct counts, fewer wrong responses wins.
pub fn prefer_confidence(r1: &ResponsePattern, r2: &ResponsePattern) -> Preference {
    if r1.count(Outcome::Correct) != r2.count(Outcome::Correct) {
        return Preference::Undecided;
    }
    Preference::from_ordering(r2.count(Outcome::Wrong).cmp(&r1.count(Outcome::Wrong)))
}

/// With equal correct and wrong counts, the higher-ranked correct answer wins.
pub fn prefer_priority(r1: &ResponsePattern, r2: &ResponsePattern) -> Preference {
    if r1.count(Outcome::Correct) != r2.count(Outcome::Correct)
        || r1.count(Outcome::Wrong) != r2.count(Outcome::Wrong)
    {
        return Preference::Undecided;
    }
    let (p1, p2) = (reciprocal_rank_term(r1), reciprocal_rank_term(r2));
    Preference::from_ordering(p1.partial_cmp(&p2).unwrap_or(Ordering::Equal))
}

pub fn prefer(property: PropertyId, r1: &ResponsePattern, r2: &ResponsePattern) -> Preference {
    match property {
        PropertyId::Correctness => prefer_correctness(r1, r2),
        PropertyId::Confidence => prefer_confidence(r1, r2),
        PropertyId::Priority { .. } => prefer_priority(r1, r2),
    }
}

/// The gold verdict for a pair together with the property that decided it.
pub fn gold_decision(
    r1: &ResponsePattern,
    r2: &ResponsePattern,
    mode: GoldMode,
) -> Option<(Preference, PropertyId)> {
    let chain: &[PropertyId] = match mode {
        GoldMode::Unranked => &[PropertyId::Correctness, PropertyId::Confidence],
        GoldMode::Ranked => &[
            PropertyId::Correctness,
            PropertyId::Confidence,
            PropertyId::Priority { strict: true },
        ],
    };
    chain
        .iter()
        .find_map(|&property| match prefer(property, r1, r2) {
            Preference::Undecided => None,
            pref => Some((pref, property)),
        })
}

pub fn gold_compare(r1: &ResponsePattern, r2: &ResponsePattern, mode: GoldMode) -> Preference {
    gold_decision(r1, r2, mode).map_or(Preference::Undecided, |(pref, _)| pref)
}

/// Ideal ordering of the enumerated universe with ties grouped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldRanking {
    pub mode: GoldMode,
    /// Universe in canonical enumeration order; rank vectors align with it.
    pub patterns: Vec<ResponsePattern>,
    /// Tie groups, best first.
    pub groups: Vec<Vec<ResponsePattern>>,
    pub competition_rank: Vec<usize>,
    pub fractional_rank: Vec<f64>,
}

impl GoldRanking {
    pub fn position(&self, r: &ResponsePattern) -> Option<usize> {
        self.patterns.iter().position(|p| p == r)
    }
}

pub fn build_gold_ranking(max_len: usize, mode: GoldMode) -> GoldRanking {
    gold_ranking_of(enumerate_patterns(max_len), mode)
}

/// Gold ranking over an arbitrary universe of distinct patterns.
pub fn gold_ranking_of(patterns: Vec<ResponsePattern>, mode: GoldMode) -> GoldRanking {
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    order.sort_by(
        |&a, &b| match gold_compare(&patterns[a], &patterns[b], mode) {
            Preference::FirstBetter => Ordering::Less,
            Preference::SecondBetter => Ordering::Greater,
            Preference::Undecided => Ordering::Equal,
        },
    );

    let mut group_members: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match group_members.last_mut() {
            Some(group)
                if gold_compare(&patterns[group[0]], &patterns[idx], mode)
                    == Preference::Undecided =>
            {
                group.push(idx)
            }
            _ => group_members.push(vec![idx]),
        }
    }

    let mut competition_rank = vec![0; patterns.len()];
    let mut fractional_rank = vec![0.0; patterns.len()];
    let mut placed = 0usize;
    for group in &group_members {
        let first = placed + 1;
        let last = placed + group.len();
        let mean = (first + last) as f64 / 2.0;
        for &idx in group {
            competition_rank[idx] = first;
            fractional_rank[idx] = mean;
        }
        placed = last;
    }

    let groups = group_members
        .iter()
        .map(|g| g.iter().map(|&i| patterns[i].clone()).collect())
        .collect();

    GoldRanking {
        mode,
        patterns,
        groups,
        competition_rank,
        fractional_rank,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    No,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "Yes",
            Verdict::No => "No",
        })
    }
}

/// A pair the property prefers one way but the measure does not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub preferred: ResponsePattern,
    pub other: ResponsePattern,
    pub preferred_score: f64,
    pub other_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub property: PropertyId,
    pub verdict: Verdict,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceReport {
    pub measure: MeasureId,
    pub checks: Vec<PropertyCheck>,
}

impl ComplianceReport {
    pub fn verdict(&self, property: PropertyId) -> Option<Verdict> {
        self.checks
            .iter()
            .find(|c| c.property.name() == property.name())
            .map(|c| c.verdict)
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.checks.iter().map(|c| c.verdict).collect()
    }
}

fn satisfied(property: PropertyId, preferred: f64, other: f64) -> bool {
    match property {
        PropertyId::Priority { strict: false } => preferred >= other - SCORE_EPSILON,
        _ => preferred > other + SCORE_EPSILON,
    }
}

/// Checks a property against precomputed scores aligned with `patterns`.
///
/// Every ordered pair the property prefers is tested; counterexamples come
/// out in canonical order of (preferred, other).
pub fn check_scores(
    property: PropertyId,
    patterns: &[ResponsePattern],
    scores: &[f64],
) -> PropertyCheck {
    assert_eq!(
        patterns.len(),
        scores.len(),
        "scores must align with patterns"
    );
    let mut counterexamples = Vec::new();
    for (i, r1) in patterns.iter().enumerate() {
        for (j, r2) in patterns.iter().enumerate() {
            if i == j || prefer(property, r1, r2) != Preference::FirstBetter {
                continue;
            }
            if !satisfied(property, scores[i], scores[j]) {
                counterexamples.push(Counterexample {
                    preferred: r1.clone(),
                    other: r2.clone(),
                    preferred_score: scores[i],
                    other_score: scores[j],
                });
            }
        }
    }
    PropertyCheck {
        property,
        verdict: if counterexamples.is_empty() {
            Verdict::Yes
        } else {
            Verdict::No
        },
        counterexamples,
    }
}

pub fn check_property(
    measure: MeasureId,
    property: PropertyId,
    max_len: usize,
    cfg: &MeasureConfig,
) -> Result<PropertyCheck> {
    let patterns = enumerate_patterns(max_len);
    let scores = measures::score_all(measure, &patterns, cfg)?;
    Ok(check_scores(property, &patterns, &scores))
}

/// All three property checks for each measure. Priority strictness follows
/// `cfg.priority_strict`.
pub fn compliance_matrix(
    measure_ids: &[MeasureId],
    max_len: usize,
    cfg: &MeasureConfig,
) -> Result<Vec<ComplianceReport>> {
    let patterns = enumerate_patterns(max_len);
    measure_ids
        .iter()
        .map(|&measure| {
            let scores = measures::score_all(measure, &patterns, cfg)?;
            let checks = PropertyId::all(cfg.priority_strict)
                .into_iter()
                .map(|property| check_scores(property, &patterns, &scores))
                .collect();
            Ok(ComplianceReport { measure, checks })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Preference::*;

    fn p(s: &str) -> ResponsePattern {
        s.parse().unwrap()
    }

    #[test]
    fn correctness_examples() {
        assert_eq!(prefer_correctness(&p("cwwww"), &p("w")), FirstBetter);
        assert_eq!(prefer_correctness(&p("c"), &p("cw")), Undecided);
        assert_eq!(prefer_correctness(&p("w"), &p("c")), SecondBetter);
    }

    #[test]
    fn confidence_examples() {
        assert_eq!(prefer_confidence(&p("c"), &p("cw")), FirstBetter);
        assert_eq!(prefer_confidence(&p("cw"), &p("wc")), Undecided);
        assert_eq!(prefer_confidence(&p("ww"), &p("w")), SecondBetter);
        assert_eq!(prefer_confidence(&p("c"), &p("ww")), Undecided);
    }

    #[test]
    fn priority_examples() {
        assert_eq!(prefer_priority(&p("cw"), &p("wc")), FirstBetter);
        assert_eq!(prefer_priority(&p("cw"), &p("cw")), Undecided);
        assert_eq!(prefer_priority(&p("wcw"), &p("wwc")), FirstBetter);
        assert_eq!(prefer_priority(&p("cw"), &p("wwc")), Undecided);
    }

    #[test]
    fn gold_compare_examples() {
        assert_eq!(
            gold_decision(&p("wc"), &p("cww"), GoldMode::Ranked),
            Some((FirstBetter, PropertyId::Confidence))
        );
        assert_eq!(
            gold_compare(&p("cw"), &p("wc"), GoldMode::Unranked),
            Undecided
        );
        assert_eq!(
            gold_decision(&p("cwww"), &p("wc"), GoldMode::Ranked),
            Some((SecondBetter, PropertyId::Confidence))
        );
    }

    #[test]
    fn gold_columns_at_five() {
        let unranked = build_gold_ranking(5, GoldMode::Unranked);
        assert_eq!(
            unranked.competition_rank,
            [1, 2, 2, 4, 4, 4, 7, 7, 7, 7, 11, 11, 11, 11, 11, 16, 17, 18, 19, 20]
        );
        let ranked = build_gold_ranking(5, GoldMode::Ranked);
        assert_eq!(ranked.competition_rank, (1..=20).collect::<Vec<_>>());
        assert_eq!(
            ranked.fractional_rank,
            (1..=20).map(|r| r as f64).collect::<Vec<_>>()
        );
        assert_eq!(unranked.fractional_rank[1], 2.5);
        assert_eq!(unranked.fractional_rank[10], 13.0);
        assert_eq!(unranked.groups.len(), 10);
    }

    #[test]
    fn gold_single_item() {
        let g = build_gold_ranking(1, GoldMode::Ranked);
        assert_eq!(g.patterns, [p("c"), p("w")]);
        assert_eq!(g.competition_rank, [1, 2]);
    }

    #[test]
    fn check_examples() {
        let cfg = MeasureConfig::default();
        let f1 = check_property(MeasureId::F1, PropertyId::Confidence, 5, &cfg).unwrap();
        assert_eq!(f1.verdict, Verdict::No);
        let first = &f1.counterexamples[0];
        assert_eq!(
            (first.preferred.to_string(), first.other.to_string()),
            ("w".into(), "ww".into())
        );
        assert_eq!((first.preferred_score, first.other_score), (0.0, 0.0));

        let lar = check_property(MeasureId::Lar, PropertyId::Confidence, 5, &cfg).unwrap();
        assert_eq!(lar.verdict, Verdict::Yes);
        assert!(lar.counterexamples.is_empty());
    }

    #[test]
    fn clamped_mu_breaks_confidence_at_six() {
        let cfg = MeasureConfig {
            mu_override: Some(0.049),
            ..MeasureConfig::default()
        }
        .with_max_len(6);
        let check = check_property(MeasureId::Olar, PropertyId::Confidence, 6, &cfg).unwrap();
        assert_eq!(check.verdict, Verdict::No);
        let hit = check
            .counterexamples
            .iter()
            .find(|c| c.preferred == p("wwwwc") && c.other == p("cwwwww"))
            .expect("expected counterexample");
        // (1 + 1/5 + 0.049/5) / 2.049 and (1 + 1/6 + 0.049) / 2.049
        assert!((hit.preferred_score - 1.2098 / 2.049).abs() < 1e-12);
        assert!((hit.other_score - (1.0 + 1.0 / 6.0 + 0.049) / 2.049).abs() < 1e-12);
    }

    #[test]
    fn matrix_rows() {
        let cfg = MeasureConfig::default();
        let rows = compliance_matrix(
            &[MeasureId::Ap, MeasureId::F1Smoothed, MeasureId::Olar],
            5,
            &cfg,
        )
        .unwrap();
        use Verdict::*;
        assert_eq!(rows[0].verdicts(), [Yes, No, Yes]);
        assert_eq!(rows[1].verdicts(), [No, Yes, No]);
        assert_eq!(rows[2].verdicts(), [Yes, Yes, Yes]);
    }

    #[test]
    fn weak_priority_accepts_order_blind_measures() {
        let cfg = MeasureConfig::default();
        let weak = PropertyId::Priority { strict: false };
        let strict = PropertyId::Priority { strict: true };
        for m in [MeasureId::F1, MeasureId::Lar] {
            assert_eq!(
                check_property(m, weak, 5, &cfg).unwrap().verdict,
                Verdict::Yes
            );
            assert_eq!(
                check_property(m, strict, 5, &cfg).unwrap().verdict,
                Verdict::No
            );
        }
    }

    #[test]
    fn counterexamples_reproduce() {
        let cfg = MeasureConfig::default();
        for report in compliance_matrix(&MeasureId::ALL, 5, &cfg).unwrap() {
            for check in &report.checks {
                assert_eq!(
                    check.verdict == Verdict::No,
                    !check.counterexamples.is_empty()
                );
                for c in &check.counterexamples {
                    let a = measures::score(report.measure, &c.preferred, &cfg).unwrap();
                    let b = measures::score(report.measure, &c.other, &cfg).unwrap();
                    assert_eq!(prefer(check.property, &c.preferred, &c.other), FirstBetter);
                    assert!(!satisfied(check.property, a, b));
                }
            }
        }
    }

    #[test]
    fn ranked_ties_only_for_identical() {
        let all = enumerate_patterns(6);
        for a in &all {
            for b in &all {
                let undecided = gold_compare(a, b, GoldMode::Ranked) == Undecided;
                assert_eq!(undecided, a == b, "{a} vs {b}");
                if gold_compare(a, b, GoldMode::Unranked) != Undecided {
                    let key =
                        |r: &ResponsePattern| (r.count(Outcome::Correct), r.count(Outcome::Wrong));
                    assert_ne!(key(a), key(b));
                }
            }
        }
    }
}
