//! The comparison table: per-pattern scores with inconsistency flags, both
//! gold columns, the compliance grid and the correlation rows.

use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;

use crate::axioms::{
    self, gold_decision, ComplianceReport, GoldMode, GoldRanking, Preference, PropertyId,
};
use crate::error::{Error, Result};
use crate::measures::{self, MeasureConfig, MeasureId};
use crate::pattern::{enumerate_patterns, ResponsePattern};
use crate::stats;
use crate::SCORE_EPSILON;

/// Marks a score that is out of line with the gold order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    None,
    /// A gold-better list separated by Confidence scores no higher.
    Star,
    /// A gold-better list separated by Correctness scores no higher.
    Triangle,
}

impl Flag {
    pub fn prefix(self) -> &'static str {
        match self {
            Flag::None => "",
            Flag::Star => "(*) ",
            Flag::Triangle => "(^) ",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Flag::None => "",
            Flag::Star => "star",
            Flag::Triangle => "triangle",
        }
    }
}

/// Flags every pattern that some gold-better pattern fails to outscore.
///
/// The symbol reflects the highest-priority property separating any such
/// witness pair. Witnesses separated only by Priority leave the cell
/// unflagged.
pub fn annotate_flags(scores: &[f64], gold: &GoldRanking) -> Vec<Flag> {
    assert_eq!(
        scores.len(),
        gold.patterns.len(),
        "scores must align with the gold universe"
    );
    gold.patterns
        .iter()
        .enumerate()
        .map(|(i, target)| {
            let mut flag = Flag::None;
            for (j, witness) in gold.patterns.iter().enumerate() {
                if scores[j] > scores[i] + SCORE_EPSILON {
                    continue;
                }
                match gold_decision(witness, target, gold.mode) {
                    Some((Preference::FirstBetter, PropertyId::Correctness)) => {
                        return Flag::Triangle;
                    }
                    Some((Preference::FirstBetter, PropertyId::Confidence)) => flag = Flag::Star,
                    _ => {}
                }
            }
            flag
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub measure: MeasureId,
    pub score: f64,
    pub flag: Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub pattern: ResponsePattern,
    pub gold_unranked: usize,
    pub gold_ranked: usize,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub measure: MeasureId,
    /// `None` when the statistic is undefined (a constant score vector).
    pub kendall: Option<f64>,
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationTable {
    pub config: MeasureConfig,
    pub mu: f64,
    pub measures: Vec<MeasureId>,
    pub rows: Vec<TableRow>,
    pub compliance: Vec<ComplianceReport>,
    pub correlations: Vec<Correlation>,
}

impl EvaluationTable {
    pub fn column(&self, measure: MeasureId) -> Option<Vec<&Cell>> {
        let idx = self.measures.iter().position(|m| *m == measure)?;
        Some(self.rows.iter().map(|r| &r.cells[idx]).collect())
    }

    pub fn correlation(&self, measure: MeasureId) -> Option<&Correlation> {
        self.correlations.iter().find(|c| c.measure == measure)
    }

    pub fn compliance_for(&self, measure: MeasureId) -> Option<&ComplianceReport> {
        self.compliance.iter().find(|c| c.measure == measure)
    }

    fn unranked_columns(&self) -> impl Iterator<Item = (usize, MeasureId)> + '_ {
        self.measures
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, m)| !m.is_ranked())
    }

    fn ranked_columns(&self) -> impl Iterator<Item = (usize, MeasureId)> + '_ {
        self.measures
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, m)| m.is_ranked())
    }
}

/// Collapses floating-point noise so that scores equal up to
/// [`SCORE_EPSILON`] rank as ties.
fn snap(score: f64) -> f64 {
    (score / SCORE_EPSILON).round() * SCORE_EPSILON
}

/// Correlation of a measure's displayed scores with the gold order.
///
/// Scores are rounded to the measure's display precision first, so lists
/// that print identically count as ties.
pub fn correlate_displayed(
    measure: MeasureId,
    scores: &[f64],
    gold: &GoldRanking,
) -> Result<(f64, f64)> {
    let decimals = measure.display_decimals();
    let shown: Vec<f64> = scores
        .iter()
        .map(|s| round_half_away(*s, decimals))
        .collect();
    correlate(&shown, gold)
}

/// Tau-b and Spearman's rho between the gold order and a measure's order.
pub fn correlate(scores: &[f64], gold: &GoldRanking) -> Result<(f64, f64)> {
    let snapped: Vec<f64> = scores.iter().copied().map(snap).collect();
    let measure_ranks = stats::fractional_ranks(&snapped, true)?;
    let tau = stats::kendall_tau_b(&gold.fractional_rank, &measure_ranks)?;
    let rho = stats::spearman_rho(&gold.fractional_rank, &measure_ranks)?;
    Ok((tau, rho))
}

/// Builds the comparison table over every pattern up to `cfg.max_len`.
pub fn build_table(cfg: &MeasureConfig) -> Result<EvaluationTable> {
    build_table_for(cfg, &MeasureId::TABLE_COLUMNS)
}

pub fn build_table_for(cfg: &MeasureConfig, measure_ids: &[MeasureId]) -> Result<EvaluationTable> {
    cfg.validate()?;
    let patterns = enumerate_patterns(cfg.max_len);
    let unranked = axioms::gold_ranking_of(patterns.clone(), GoldMode::Unranked);
    let ranked = axioms::gold_ranking_of(patterns.clone(), GoldMode::Ranked);

    let mut columns = Vec::with_capacity(measure_ids.len());
    let mut correlations = Vec::with_capacity(measure_ids.len());
    for &measure in measure_ids {
        let scores = measures::score_all(measure, &patterns, cfg)?;
        let gold = match GoldMode::for_measure(measure) {
            GoldMode::Unranked => &unranked,
            GoldMode::Ranked => &ranked,
        };
        let flags = annotate_flags(&scores, gold);
        let (kendall, spearman) = match correlate_displayed(measure, &scores, gold) {
            Ok((t, s)) => (Some(t), Some(s)),
            Err(Error::Domain(_)) => (None, None),
            Err(e) => return Err(e),
        };
        correlations.push(Correlation {
            measure,
            kendall,
            spearman,
        });
        columns.push((scores, flags));
    }

    let rows = patterns
        .iter()
        .enumerate()
        .map(|(i, pattern)| TableRow {
            pattern: pattern.clone(),
            gold_unranked: unranked.competition_rank[i],
            gold_ranked: ranked.competition_rank[i],
            cells: measure_ids
                .iter()
                .zip(&columns)
                .map(|(&measure, (scores, flags))| Cell {
                    measure,
                    score: scores[i],
                    flag: flags[i],
                })
                .collect(),
        })
        .collect();

    Ok(EvaluationTable {
        config: *cfg,
        mu: cfg.mu()?,
        measures: measure_ids.to_vec(),
        rows,
        compliance: axioms::compliance_matrix(measure_ids, cfg.max_len, cfg)?,
        correlations,
    })
}

/// Rounds half away from zero to `decimals` places.
///
/// A relative nudge keeps values such as `0.145` (stored just below the
/// half) rounding the way their exact decimal would.
pub fn round_half_away(value: f64, decimals: usize) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = value * scale;
    let nudged = scaled + scaled.signum() * 1e-9 * scaled.abs().max(1.0);
    let rounded = nudged.round() / scale;
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

pub fn format_fixed(value: f64, decimals: usize) -> String {
    format!("{:.decimals$}", round_half_away(value, decimals))
}

pub fn format_score(measure: MeasureId, score: f64) -> String {
    format_fixed(score, measure.display_decimals())
}

/// Three decimals; a value that rounds to exactly +/-1 prints as `1` / `-1`.
pub fn format_correlation(value: Option<f64>) -> String {
    match value {
        None => "n/a".to_string(),
        Some(v) => {
            let s = format_fixed(v, 3);
            match s.as_str() {
                "1.000" => "1".into(),
                "-1.000" => "-1".into(),
                _ => s,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" | "markdown" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

pub fn render(table: &EvaluationTable, format: Format) -> String {
    match format {
        Format::Markdown => render_markdown(table),
        Format::Csv => render_csv(table),
        Format::Json => render_json(table),
    }
}

fn cell_text(cell: &Cell) -> String {
    format!(
        "{}{}",
        cell.flag.prefix(),
        format_score(cell.measure, cell.score)
    )
}

fn footer_rows(table: &EvaluationTable) -> Vec<(String, Vec<String>)> {
    let strict = table.config.priority_strict;
    let mut rows: Vec<(String, Vec<String>)> = PropertyId::all(strict)
        .into_iter()
        .map(|property| {
            let cells = table
                .measures
                .iter()
                .map(|&m| {
                    table
                        .compliance_for(m)
                        .and_then(|c| c.verdict(property))
                        .map(|v| v.to_string())
                        .unwrap_or_default()
                })
                .collect();
            (property.name().to_string(), cells)
        })
        .collect();
    rows.push((
        "Kendall's Tau".into(),
        table
            .correlations
            .iter()
            .map(|c| format_correlation(c.kendall))
            .collect(),
    ));
    rows.push((
        "Spearman correlation".into(),
        table
            .correlations
            .iter()
            .map(|c| format_correlation(c.spearman))
            .collect(),
    ));
    rows
}

fn render_markdown(table: &EvaluationTable) -> String {
    let unranked: Vec<_> = table.unranked_columns().collect();
    let ranked: Vec<_> = table.ranked_columns().collect();

    let mut header = vec!["Result list".to_string(), "Gold".to_string()];
    header.extend(unranked.iter().map(|(_, m)| m.to_string()));
    header.push("Gold".into());
    header.extend(ranked.iter().map(|(_, m)| m.to_string()));

    let mut lines = Vec::new();
    lines.push(markdown_line(&header));
    let mut align = vec![":---".to_string()];
    align.extend(std::iter::repeat_n("---:".to_string(), header.len() - 1));
    lines.push(markdown_line(&align));

    for row in &table.rows {
        let mut cells = vec![row.pattern.to_string(), row.gold_unranked.to_string()];
        cells.extend(unranked.iter().map(|(i, _)| cell_text(&row.cells[*i])));
        cells.push(row.gold_ranked.to_string());
        cells.extend(ranked.iter().map(|(i, _)| cell_text(&row.cells[*i])));
        lines.push(markdown_line(&cells));
    }

    for (label, values) in footer_rows(table) {
        let mut cells = vec![label, String::new()];
        cells.extend(unranked.iter().map(|(i, _)| values[*i].clone()));
        cells.push(String::new());
        cells.extend(ranked.iter().map(|(i, _)| values[*i].clone()));
        lines.push(markdown_line(&cells));
    }

    let cfg = &table.config;
    let mut out = lines.join("\n");
    let _ = write!(
        out,
        "\n\nmax_len = {}, rbp_p = {}, lambda = {}, mu = {}, priority = {}\n",
        cfg.max_len,
        cfg.rbp_p,
        cfg.lambda,
        format_fixed(table.mu, 6),
        if cfg.priority_strict {
            "strict"
        } else {
            "weak"
        }
    );
    out
}

fn markdown_line(cells: &[String]) -> String {
    let mut line = String::from("|");
    for cell in cells {
        line.push(' ');
        line.push_str(cell);
        line.push_str(" |");
    }
    line
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn render_csv(table: &EvaluationTable) -> String {
    let mut header = vec![
        "pattern".to_string(),
        "gold_unranked".into(),
        "gold_ranked".into(),
    ];
    header.extend(table.measures.iter().map(|m| m.to_string()));
    header.extend(table.measures.iter().map(|m| format!("{m}_flag")));

    let mut out = String::new();
    let mut push = |fields: Vec<String>| {
        let joined: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
        out.push_str(&joined.join(","));
        out.push('\n');
    };
    push(header);
    for row in &table.rows {
        let mut fields = vec![
            row.pattern.to_string(),
            row.gold_unranked.to_string(),
            row.gold_ranked.to_string(),
        ];
        fields.extend(row.cells.iter().map(cell_text));
        fields.extend(row.cells.iter().map(|c| c.flag.name().to_string()));
        push(fields);
    }
    for (label, values) in footer_rows(table) {
        let mut fields = vec![label, String::new(), String::new()];
        fields.extend(values);
        fields.extend(std::iter::repeat_n(String::new(), table.measures.len()));
        push(fields);
    }
    out
}

#[derive(Serialize)]
struct JsonConfig {
    rbp_p: f64,
    lambda: f64,
    max_len: usize,
    priority_strict: bool,
    mu: f64,
}

#[derive(Serialize)]
struct JsonCell {
    value: f64,
    display: String,
    flag: Flag,
}

#[derive(Serialize)]
struct JsonRow {
    pattern: String,
    gold_unranked: usize,
    gold_ranked: usize,
    scores: IndexMap<String, JsonCell>,
}

#[derive(Serialize)]
struct JsonCounterexample {
    preferred: String,
    other: String,
    preferred_score: f64,
    other_score: f64,
}

#[derive(Serialize)]
struct JsonCheck {
    verdict: String,
    counterexamples: Vec<JsonCounterexample>,
}

#[derive(Serialize)]
struct JsonCorrelations {
    kendall: IndexMap<String, Option<f64>>,
    spearman: IndexMap<String, Option<f64>>,
}

#[derive(Serialize)]
struct JsonReport {
    config: JsonConfig,
    rows: Vec<JsonRow>,
    compliance: IndexMap<String, IndexMap<String, JsonCheck>>,
    correlations: JsonCorrelations,
}

/// JSON form of a compliance report, keyed by property name.
pub fn compliance_json(report: &ComplianceReport) -> serde_json::Value {
    serde_json::to_value(compliance_entry(report)).expect("compliance serializes")
}

fn compliance_entry(report: &ComplianceReport) -> IndexMap<String, JsonCheck> {
    report
        .checks
        .iter()
        .map(|check| {
            let counterexamples = check
                .counterexamples
                .iter()
                .map(|c| JsonCounterexample {
                    preferred: c.preferred.to_string(),
                    other: c.other.to_string(),
                    preferred_score: c.preferred_score,
                    other_score: c.other_score,
                })
                .collect();
            (
                check.property.name().to_string(),
                JsonCheck {
                    verdict: check.verdict.to_string(),
                    counterexamples,
                },
            )
        })
        .collect()
}

fn render_json(table: &EvaluationTable) -> String {
    let report = JsonReport {
        config: JsonConfig {
            rbp_p: table.config.rbp_p,
            lambda: table.config.lambda,
            max_len: table.config.max_len,
            priority_strict: table.config.priority_strict,
            mu: table.mu,
        },
        rows: table
            .rows
            .iter()
            .map(|row| JsonRow {
                pattern: row.pattern.to_string(),
                gold_unranked: row.gold_unranked,
                gold_ranked: row.gold_ranked,
                scores: row
                    .cells
                    .iter()
                    .map(|c| {
                        (
                            c.measure.to_string(),
                            JsonCell {
                                value: c.score,
                                display: format_score(c.measure, c.score),
                                flag: c.flag,
                            },
                        )
                    })
                    .collect(),
            })
            .collect(),
        compliance: table
            .compliance
            .iter()
            .map(|r| (r.measure.to_string(), compliance_entry(r)))
            .collect(),
        correlations: JsonCorrelations {
            kendall: table
                .correlations
                .iter()
                .map(|c| (c.measure.to_string(), c.kendall))
                .collect(),
            spearman: table
                .correlations
                .iter()
                .map(|c| (c.measure.to_string(), c.spearman))
                .collect(),
        },
    };
    let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::build_gold_ranking;

    fn flags_for(measure: MeasureId) -> Vec<Flag> {
        let cfg = MeasureConfig::default();
        let patterns = enumerate_patterns(5);
        let scores = measures::score_all(measure, &patterns, &cfg).unwrap();
        annotate_flags(
            &scores,
            &build_gold_ranking(5, GoldMode::for_measure(measure)),
        )
    }

    #[test]
    fn flag_examples() {
        assert_eq!(flags_for(MeasureId::Ap)[1], Flag::Star);
        assert_eq!(flags_for(MeasureId::F1Smoothed)[15], Flag::Triangle);
        assert_eq!(flags_for(MeasureId::NdcgTerminal)[2], Flag::None);
        assert!(flags_for(MeasureId::Lar).iter().all(|f| *f == Flag::None));
        assert!(flags_for(MeasureId::Olar).iter().all(|f| *f == Flag::None));
    }

    #[test]
    fn flags_are_idempotent() {
        let gold = build_gold_ranking(5, GoldMode::Ranked);
        let scores =
            measures::score_all(MeasureId::Rbp, &gold.patterns, &MeasureConfig::default()).unwrap();
        assert_eq!(
            annotate_flags(&scores, &gold),
            annotate_flags(&scores, &gold)
        );
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_fixed(1.549 / 2.049, 3), "0.756");
        assert_eq!(format_fixed(7.0 / 12.0, 2), "0.58");
        assert_eq!(format_fixed(0.125, 2), "0.13");
        assert_eq!(format_fixed(0.375, 2), "0.38");
        assert_eq!(format_fixed(0.625, 2), "0.63");
        assert_eq!(format_fixed(0.145, 2), "0.15");
        assert_eq!(format_fixed(-0.125, 2), "-0.13");
        assert_eq!(format_fixed(0.0, 2), "0.00");
        assert_eq!(format_correlation(Some(1.0)), "1");
        assert_eq!(format_correlation(Some(0.99999999)), "1");
        assert_eq!(format_correlation(Some(0.9701425)), "0.970");
        assert_eq!(format_correlation(None), "n/a");
    }

    #[test]
    fn format_names() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!(matches!(
            "xml".parse::<Format>(),
            Err(Error::UnknownFormat(_))
        ));
    }

    #[test]
    fn default_table_shape() {
        let table = build_table(&MeasureConfig::default()).unwrap();
        assert_eq!(table.rows.len(), 20);
        let olar: Vec<String> = table
            .column(MeasureId::Olar)
            .unwrap()
            .iter()
            .map(|c| format_score(c.measure, c.score))
            .collect();
        assert_eq!(&olar[16..], ["0.244", "0.163", "0.122", "0.098"]);
        let lar = table.correlation(MeasureId::Lar).unwrap();
        assert_eq!(format_correlation(lar.kendall), "1");
        assert_eq!(format_correlation(lar.spearman), "1");
    }

    #[test]
    fn single_item_table() {
        let table = build_table(&MeasureConfig::default().with_max_len(1)).unwrap();
        assert_eq!(table.rows.len(), 2);
        let ranks: Vec<_> = table
            .rows
            .iter()
            .map(|r| (r.gold_unranked, r.gold_ranked))
            .collect();
        assert_eq!(ranks, [(1, 1), (2, 2)]);
    }

    #[test]
    fn renders_are_stable() {
        let table = build_table(&MeasureConfig::default()).unwrap();
        for format in [Format::Markdown, Format::Csv, Format::Json] {
            assert_eq!(render(&table, format), render(&table, format));
        }
        let csv = render(&table, Format::Csv);
        let header = csv.lines().next().unwrap();
        assert!(header.starts_with("pattern,gold_unranked,gold_ranked,F1,F1s,LAR,AP,"));
        assert!(header.ends_with(",RBPL_flag,OLAR_flag"));
        let json: serde_json::Value = serde_json::from_str(&render(&table, Format::Json)).unwrap();
        assert_eq!(json["rows"][1]["scores"]["AP"]["flag"], "star");
        assert_eq!(json["rows"][15]["scores"]["F1s"]["flag"], "triangle");
        assert_eq!(json["rows"][1]["scores"]["OLAR"]["display"], "0.756");
        assert_eq!(json["compliance"]["OLAR"]["Priority"]["verdict"], "Yes");
        assert!(json["correlations"]["kendall"]["LAR"].as_f64().is_some());
        assert_eq!(json["config"]["max_len"], 5);
    }

    #[test]
    fn clean_columns_have_no_flags() {
        use crate::axioms::Verdict;
        let table = build_table(&MeasureConfig::default().with_max_len(6)).unwrap();
        for report in &table.compliance {
            let clean = report.verdict(PropertyId::Correctness) == Some(Verdict::Yes)
                && report.verdict(PropertyId::Confidence) == Some(Verdict::Yes);
            if clean {
                let col = table.column(report.measure).unwrap();
                assert!(
                    col.iter().all(|c| c.flag == Flag::None),
                    "{}",
                    report.measure
                );
            }
        }
    }
}
