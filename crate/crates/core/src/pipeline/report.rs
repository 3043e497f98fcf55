//! One plain-text table of every headline number for a single `n`.

use std::fmt::Write as _;

use crate::bloading::{b_star, b_star_scan, count_below, BStar, ScanOutcome};
use crate::classify::{
    bayes_upper_bound, best_threshold, cross_validate, evaluate, fit_logistic,
    gamma_moments_weighted, ClassifierReport, DecisionRule, LabeledDataset,
};
use crate::error::{Error, Result};
use crate::kronecker::MAX_TENSOR_N;
use crate::partitions::PartitionSet;

use super::cache::{self, Cache};

pub const REPORT_MIN_N: usize = 3;
/// Above the tensor limit the report falls back to the budgeted scan.
pub const REPORT_MAX_N: usize = 20;
pub const DEFAULT_SCAN_BUDGET: u64 = 10_000_000;
pub const LOGISTIC_TRAIN_FRACTION: f64 = 0.66;
pub const CV_FOLDS: usize = 10;

pub struct ReportOptions {
    pub seed: u64,
    pub scan_budget: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { seed: crate::classify::DEFAULT_SEED, scan_budget: DEFAULT_SCAN_BUDGET }
    }
}

struct Table {
    out: String,
}

impl Table {
    fn row(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.out, "{key:<34}{value}").expect("write to string");
    }

    fn rule(&mut self, name: &str, r: &ClassifierReport) {
        let boundary = r.boundary.map_or_else(|| "-".to_string(), |b| format!("{b:.4}"));
        let [[tn, fp], [fn_, tp]] = r.confusion;
        writeln!(
            self.out,
            "{name:<18}{:>10.4}{boundary:>12}{tn:>14}{fp:>14}{fn_:>14}{tp:>14}",
            r.accuracy
        )
        .expect("write to string");
    }
}

fn triple_text(set: &PartitionSet, (i, j, k): (usize, usize, usize)) -> String {
    format!("({}) | ({}) | ({})", set[i], set[j], set[k])
}

pub fn build_report(n: usize, cache: Option<&Cache>, opts: &ReportOptions) -> Result<String> {
    if !(REPORT_MIN_N..=REPORT_MAX_N).contains(&n) {
        return Err(Error::UnsupportedSize { what: "report", n, min: REPORT_MIN_N, max: REPORT_MAX_N });
    }
    let set = PartitionSet::new(n)?;
    let table = cache::bloadings(n, cache)?;
    let mut t = Table { out: String::new() };
    let p = set.len() as u64;
    t.row("n", n);
    t.row("partitions p(n)", p);
    t.row("ordered triples", p * p * p);
    t.row("perron eigenvalue", format!("{:.6}", table.eigenvalue));
    t.row("mean b(t)", format!("{:.4}", table.mean_b3));
    t.row("std b(t)", format!("{:.4}", table.std_b3));

    if n > MAX_TENSOR_N {
        let chars = cache::char_table(n, cache, true)?;
        let scan = b_star_scan(n, &table, &chars, opts.scan_budget)?;
        t.row("scan evaluations", scan.evaluations);
        match scan.outcome {
            ScanOutcome::Exact(BStar { value, triple }) => {
                t.row("b_star (scan)", format!("{value:.4}"));
                t.row("b_star triple", triple_text(&set, triple));
                below(&mut t, &table, value);
            }
            ScanOutcome::LowerBound { value } => {
                t.row("b_star lower bound", format!("{value:.4}"));
            }
        }
        return Ok(t.out);
    }

    let chars = cache::char_table(n, cache, true)?;
    let tensor = cache::tensor(n, cache, &chars)?;
    let data = LabeledDataset::from_tensor(&tensor, &table)?;
    t.row("canonical triples", tensor.canonical_len());
    t.row("nonzero ordered triples", tensor.nonzero_ordered());
    t.row("nonzero ratio", format!("{:.4}", tensor.nonzero_ratio()));
    let values: Vec<f64> = data.rows.iter().map(|r| r.b).collect();
    let weights: Vec<u64> = data.rows.iter().map(|r| r.weight).collect();
    match gamma_moments_weighted(&values, &weights) {
        Ok(g) => t.row("gamma fit shape / scale", format!("{:.4} / {:.4}", g.shape, g.scale)),
        Err(e) => t.row("gamma fit", format!("unavailable: {e}")),
    }
    match b_star(&tensor, &table) {
        Ok(bs) => {
            t.row("b_star", format!("{:.4}", bs.value));
            t.row("b_star triple", triple_text(&set, bs.triple));
            below(&mut t, &table, bs.value);
        }
        Err(Error::NoZeroCoefficient(_)) => t.row("b_star", "none (no vanishing coefficient)"),
        Err(e) => return Err(e),
    }
    t.out.push('\n');

    writeln!(
        t.out,
        "{:<18}{:>10}{:>12}{:>14}{:>14}{:>14}{:>14}",
        "rule", "accuracy", "boundary", "zero->zero", "zero->nonzero", "nonzero->zero", "nonzero->nz"
    )
    .expect("write to string");
    t.rule("f1_kan", &evaluate(&DecisionRule::Kan { mean: table.mean_b3 }, &data));
    t.rule("f2_logistic", &evaluate(&DecisionRule::Logistic, &data));
    t.rule("f3_symbolic", &evaluate(&DecisionRule::Symbolic, &data));
    t.rule("fixed_snn", &evaluate(&DecisionRule::SmallNetwork, &data));
    let (threshold, _) = best_threshold(&data)?;
    t.rule("best_threshold", &evaluate(&DecisionRule::Threshold(threshold), &data));
    t.out.push('\n');

    match fit_logistic(&data, LOGISTIC_TRAIN_FRACTION, opts.seed) {
        Ok(fit) => {
            t.row(
                "logistic fit slope / intercept",
                format!("{:.8} / {:.8}", fit.slope, fit.intercept),
            );
            t.row("logistic fit boundary", format!("{:.4}", fit.boundary()));
            t.row("logistic fit test accuracy", format!("{:.4}", fit.report.accuracy));
        }
        Err(e) => t.row("logistic fit", format!("unavailable: {e}")),
    }
    match cross_validate(&data, CV_FOLDS, opts.seed) {
        Ok((mean, std)) => t.row("stump cv10 mean / std", format!("{mean:.4} / {std:.4}")),
        Err(e) => t.row("stump cv10", format!("unavailable: {e}")),
    }
    t.row("bayes upper bound", format!("{:.4}", bayes_upper_bound(&data)));
    t.row("seed", opts.seed);
    Ok(t.out)
}

fn below(t: &mut Table, table: &crate::bloading::BLoadingTable, value: f64) {
    let (count, total) = count_below(table, value);
    t.row(
        "ordered triples below b_star",
        format!("{count} / {total} ({:.4})", count as f64 / total as f64),
    );
}
