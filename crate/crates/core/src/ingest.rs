//! Run and qrels ingestion.
//!
//! Runs file: `query_id <TAB> rank <TAB> item_id`. Qrels file:
//! `query_id <TAB> correct_item_id`. Blank lines and lines starting with `#`
//! are skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Reconciliation, Result};
use crate::measures::{self, MeasureConfig, MeasureId};
use crate::pattern::{Outcome, ResponsePattern};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub query_id: String,
    pub rank: usize,
    pub item_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QrelRecord {
    pub query_id: String,
    pub correct_item_id: String,
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(idx, line)| {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            None
        } else {
            Some((idx + 1, line.split('\t').collect()))
        }
    })
}

fn parse_error(source_name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn field<'a>(source_name: &str, line: usize, value: &'a str, what: &str) -> Result<&'a str> {
    let value = value.trim();
    if value.is_empty() {
        Err(parse_error(source_name, line, format!("empty {what}")))
    } else {
        Ok(value)
    }
}

/// Parses and validates a runs file.
///
/// Within each query ranks must be exactly `1..=k` and item ids unique.
pub fn parse_runs(text: &str) -> Result<Vec<RunRecord>> {
    const SRC: &str = "runs";
    let mut out = Vec::new();
    let mut seen_ranks: HashMap<String, HashSet<usize>> = HashMap::new();
    let mut seen_items: HashMap<String, HashSet<String>> = HashMap::new();

    for (line, fields) in records(text) {
        if fields.len() != 3 {
            return Err(parse_error(
                SRC,
                line,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let query_id = field(SRC, line, fields[0], "query id")?.to_string();
        let rank_text = field(SRC, line, fields[1], "rank")?;
        let rank: usize = rank_text.parse().ok().filter(|r| *r >= 1).ok_or_else(|| {
            parse_error(
                SRC,
                line,
                format!("rank {rank_text:?} is not a positive integer"),
            )
        })?;
        let item_id = field(SRC, line, fields[2], "item id")?.to_string();

        if !seen_ranks.entry(query_id.clone()).or_default().insert(rank) {
            return Err(Error::Duplicate {
                what: "rank",
                query_id,
                detail: format!("rank {rank} repeated on line {line}"),
            });
        }
        if !seen_items
            .entry(query_id.clone())
            .or_default()
            .insert(item_id.clone())
        {
            return Err(Error::Duplicate {
                what: "item",
                query_id,
                detail: format!("item {item_id:?} repeated on line {line}"),
            });
        }
        out.push(RunRecord {
            query_id,
            rank,
            item_id,
        });
    }

    let mut gaps: Vec<_> = seen_ranks
        .iter()
        .filter_map(|(q, ranks)| {
            let k = ranks.len();
            let missing = (1..=k).find(|r| !ranks.contains(r))?;
            Some((q.clone(), missing))
        })
        .collect();
    gaps.sort();
    if let Some((query_id, missing)) = gaps.into_iter().next() {
        return Err(Error::RankGap {
            query_id,
            detail: format!("rank {missing} is missing"),
        });
    }
    Ok(out)
}

/// Parses a qrels file holding exactly one correct item per query.
pub fn parse_qrels(text: &str) -> Result<Vec<QrelRecord>> {
    const SRC: &str = "qrels";
    let mut out = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (line, fields) in records(text) {
        if fields.len() != 2 {
            return Err(parse_error(
                SRC,
                line,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        }
        let query_id = field(SRC, line, fields[0], "query id")?.to_string();
        let correct_item_id = field(SRC, line, fields[1], "item id")?.to_string();
        if let Some(first) = seen.insert(query_id.clone(), line) {
            return Err(Error::Duplicate {
                what: "qrel",
                query_id,
                detail: format!("lines {first} and {line}"),
            });
        }
        out.push(QrelRecord {
            query_id,
            correct_item_id,
        });
    }
    Ok(out)
}

/// Maps each query's run to a pattern: the slot holding the query's correct
/// item becomes `c`, every other slot `w`.
pub fn patterns_from_runs(
    runs: &[RunRecord],
    qrels: &[QrelRecord],
) -> Result<BTreeMap<String, ResponsePattern>> {
    let gold: BTreeMap<&str, &str> = qrels
        .iter()
        .map(|q| (q.query_id.as_str(), q.correct_item_id.as_str()))
        .collect();
    let mut by_query: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for record in runs {
        by_query
            .entry(record.query_id.as_str())
            .or_default()
            .push(record);
    }

    let run_ids: BTreeSet<&str> = by_query.keys().copied().collect();
    let qrel_ids: BTreeSet<&str> = gold.keys().copied().collect();
    if run_ids != qrel_ids {
        return Err(Error::Reconciliation(Reconciliation {
            missing_qrels: run_ids
                .difference(&qrel_ids)
                .map(|s| s.to_string())
                .collect(),
            missing_runs: qrel_ids
                .difference(&run_ids)
                .map(|s| s.to_string())
                .collect(),
        }));
    }

    by_query
        .into_iter()
        .map(|(query_id, mut records)| {
            records.sort_by_key(|r| r.rank);
            let correct = gold[query_id];
            let items = records
                .iter()
                .map(|r| {
                    if r.item_id == correct {
                        Outcome::Correct
                    } else {
                        Outcome::Wrong
                    }
                })
                .collect();
            Ok((query_id.to_string(), ResponsePattern::new(items)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryScores {
    pub query_id: String,
    pub pattern: ResponsePattern,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEvaluation {
    pub measures: Vec<MeasureId>,
    pub per_query: Vec<QueryScores>,
    /// Arithmetic mean over queries, aligned with `measures`.
    pub macro_average: Vec<f64>,
}

/// Scores every query with every measure and macro-averages per measure.
pub fn evaluate_runs(
    patterns: &BTreeMap<String, ResponsePattern>,
    measure_ids: &[MeasureId],
    cfg: &MeasureConfig,
) -> Result<RunEvaluation> {
    if patterns.is_empty() {
        return Err(Error::Domain("no queries to evaluate".into()));
    }
    let per_query = patterns
        .iter()
        .map(|(query_id, pattern)| {
            let scores = measure_ids
                .iter()
                .map(|&m| measures::score(m, pattern, cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(QueryScores {
                query_id: query_id.clone(),
                pattern: pattern.clone(),
                scores,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_query.len() as f64;
    let macro_average = (0..measure_ids.len())
        .map(|k| per_query.iter().map(|q| q.scores[k]).sum::<f64>() / n)
        .collect();
    Ok(RunEvaluation {
        measures: measure_ids.to_vec(),
        per_query,
        macro_average,
    })
}
