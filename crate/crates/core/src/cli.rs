//! Command-line driver. `main.rs` only forwards `std::env::args` here so the
//! whole surface can be exercised in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::axioms::{self, GoldMode, PropertyId, Verdict};
use crate::error::{Error, Result};
use crate::ingest;
use crate::measures::{self, MeasureConfig, MeasureId};
use crate::pattern::enumerate_patterns;
use crate::report::{self, format_correlation, format_fixed, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "listeval",
    version,
    about = "Score variable-length response lists and check measures against preference properties"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Longest list in the enumerated universe; also bounds OLAR's mu.
    #[arg(long, global = true, default_value_t = 5)]
    pub max_len: usize,

    /// RBP persistence probability.
    #[arg(long = "rbp-p", global = true, default_value_t = 0.5)]
    pub rbp_p: f64,

    /// Margin subtracted from the smallest confidence gap to obtain mu.
    #[arg(long, global = true, default_value_t = 0.001)]
    pub lambda: f64,

    /// Check Priority in its non-strict (>=) form.
    #[arg(long, global = true)]
    pub weak_priority: bool,
}

impl GlobalOpts {
    fn config(&self) -> MeasureConfig {
        MeasureConfig {
            rbp_p: self.rbp_p,
            lambda: self.lambda,
            max_len: self.max_len,
            priority_strict: !self.weak_priority,
            mu_override: None,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full comparison table over every list up to --max-len.
    Table {
        /// md, csv or json.
        #[arg(long, default_value = "md")]
        format: String,
    },
    /// Gold ranking of every list up to --max-len.
    Gold {
        #[arg(long)]
        mode: GoldMode,
    },
    /// Compliance of one measure with the three properties.
    Check {
        #[arg(long)]
        measure: MeasureId,
    },
    /// Score a runs file against qrels.
    Eval {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        /// Comma-separated measure names, e.g. LAR,OLAR,AP.
        #[arg(long, value_delimiter = ',', required = true)]
        measures: Vec<MeasureId>,
    },
    /// Kendall's tau-b and Spearman's rho of one measure against gold.
    Correlate {
        #[arg(long)]
        measure: MeasureId,
        /// Defaults to ranked for order-sensitive measures, unranked otherwise.
        #[arg(long)]
        mode: Option<GoldMode>,
    },
}

/// Runs the CLI, writing results to `out` and diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_VALIDATION
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn execute(cli: &Cli) -> Result<String> {
    let cfg = cli.global.config();
    cfg.validate()?;
    match &cli.command {
        Command::Table { format } => {
            let format: Format = format.parse()?;
            let table = report::build_table(&cfg)?;
            Ok(report::render(&table, format))
        }
        Command::Gold { mode } => Ok(gold_listing(cfg.max_len, *mode)),
        Command::Check { measure } => check(*measure, &cfg),
        Command::Eval {
            runs,
            qrels,
            measures,
        } => eval(runs, qrels, measures, &cfg),
        Command::Correlate { measure, mode } => correlate(
            *measure,
            mode.unwrap_or(GoldMode::for_measure(*measure)),
            &cfg,
        ),
    }
}

fn gold_listing(max_len: usize, mode: GoldMode) -> String {
    let gold = axioms::build_gold_ranking(max_len, mode);
    let mut out =
        format!("# gold ranking ({mode}, max_len {max_len})\nrank\tfractional\tpattern\n");
    for (i, pattern) in gold.patterns.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            gold.competition_rank[i], gold.fractional_rank[i], pattern
        ));
    }
    out
}

fn check(measure: MeasureId, cfg: &MeasureConfig) -> Result<String> {
    let report = axioms::compliance_matrix(&[measure], cfg.max_len, cfg)?
        .pop()
        .expect("one report per measure");
    let mut out = format!(
        "# {measure} (max_len {}, priority {})\n",
        cfg.max_len,
        if cfg.priority_strict {
            "strict"
        } else {
            "weak"
        }
    );
    for check in &report.checks {
        out.push_str(&format!("{}: {}\n", check.property, check.verdict));
        if check.verdict == Verdict::No {
            let relation = match check.property {
                PropertyId::Priority { strict: false } => "<",
                _ => "<=",
            };
            for c in &check.counterexamples {
                out.push_str(&format!(
                    "  {} over {}: {:.6} {relation} {:.6}\n",
                    c.preferred, c.other, c.preferred_score, c.other_score
                ));
            }
        }
    }
    Ok(out)
}

fn eval(
    runs: &PathBuf,
    qrels: &PathBuf,
    measure_ids: &[MeasureId],
    cfg: &MeasureConfig,
) -> Result<String> {
    let read = |path: &PathBuf| {
        std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
    };
    let runs = ingest::parse_runs(&read(runs)?)?;
    let qrels = ingest::parse_qrels(&read(qrels)?)?;
    let patterns = ingest::patterns_from_runs(&runs, &qrels)?;
    let eval = ingest::evaluate_runs(&patterns, measure_ids, cfg)?;

    let names: Vec<String> = measure_ids.iter().map(|m| m.to_string()).collect();
    let mut out = format!("query\tpattern\t{}\n", names.join("\t"));
    for q in &eval.per_query {
        let scores: Vec<String> = q.scores.iter().map(|s| format_fixed(*s, 4)).collect();
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            q.query_id,
            q.pattern,
            scores.join("\t")
        ));
    }
    let means: Vec<String> = eval
        .macro_average
        .iter()
        .map(|s| format_fixed(*s, 4))
        .collect();
    out.push_str(&format!("macro\t\t{}\n", means.join("\t")));
    Ok(out)
}

fn correlate(measure: MeasureId, mode: GoldMode, cfg: &MeasureConfig) -> Result<String> {
    let patterns = enumerate_patterns(cfg.max_len);
    let scores = measures::score_all(measure, &patterns, cfg)?;
    let gold = axioms::gold_ranking_of(patterns, mode);
    let (tau, rho) = report::correlate_displayed(measure, &scores, &gold)?;
    Ok(format!(
        "measure\t{measure}\nmode\t{mode}\nkendall_tau_b\t{}\nspearman_rho\t{}\n",
        format_correlation(Some(tau)),
        format_correlation(Some(rho))
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("listeval").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, out, err) = run_str(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("Usage"));
        let (code, _, _) = run_str(&["table", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_str(&["check", "--measure", "MAP"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn validation_errors_exit_one() {
        let (code, out, err) = run_str(&["table", "--format", "xml"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(out.is_empty());
        assert!(err.contains("unknown format"));
        let (code, _, err) = run_str(&["table", "--lambda", "0.2"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.contains("lambda"));
    }

    #[test]
    fn gold_lists_ranks() {
        let (code, out, _) = run_str(&["gold", "--mode", "unranked", "--max-len", "2"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("2\t2.5\tcw\n2\t2.5\twc\n"), "{out}");
    }

    #[test]
    fn check_lists_counterexamples() {
        let (code, out, _) = run_str(&["check", "--measure", "F1"]);
        assert_eq!(code, EXIT_OK);
        assert!(
            out.contains("Confidence: No\n  w over ww: 0.000000 <= 0.000000\n"),
            "{out}"
        );
        let (_, weak, _) = run_str(&["check", "--measure", "LAR", "--weak-priority"]);
        assert!(weak.contains("Priority: Yes"));
    }
}
