use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bloading::{b_star, b_star_scan, count_below, ScanOutcome};
use crate::classify::{
    bayes_upper_bound, best_threshold, cross_validate, evaluate, fit_logistic, ClassifierReport,
    DecisionRule, LabeledDataset, MajorityByValue, DEFAULT_SEED,
};
use crate::error::{Error, Result};
use crate::partitions::PartitionSet;

use super::cache::{self, Cache};
use super::export::{export_dataset, read_csv, read_jsonl, verify_rows, FeatureMode, Format};
use super::histogram::histogram;
use super::report::{build_report, ReportOptions, DEFAULT_SCAN_BUDGET, LOGISTIC_TRAIN_FRACTION};

#[derive(Parser, Debug)]
#[command(name = "kroncoef", version, about = "Exact Kronecker coefficients of S_n and b-loading classifiers")]
struct Cli {
    /// Seed for every random split and sample.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Cache directory; falls back to $KRONCOEF_CACHE, otherwise no caching.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SizeArg {
    #[arg(short = 'n', long = "n")]
    n: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PredictorArg {
    F1,
    F2,
    F3,
    Snn,
    Threshold,
    Logistic,
    Bayes,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Full3n,
    Ends18,
    Bsum1,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the partitions of n in descending lexicographic order.
    Partitions(SizeArg),
    /// Print the character table of S_n.
    Chartable {
        #[command(flatten)]
        size: SizeArg,
        /// Skip the orthogonality check.
        #[arg(long)]
        no_verify: bool,
    },
    /// Compute the Kronecker tensor and summarise it.
    Tensor {
        #[command(flatten)]
        size: SizeArg,
        /// Also print every canonical triple with its coefficient.
        #[arg(long)]
        list: bool,
    },
    /// Print w and b for every partition.
    Bload(SizeArg),
    /// Smallest b(t) over vanishing coefficients, from the full tensor.
    Bstar(SizeArg),
    /// Smallest b(t) over vanishing coefficients by ascending scan.
    BstarScan {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, default_value_t = DEFAULT_SCAN_BUDGET)]
        budget: u64,
    },
    /// Count ordered triples with b(t) below a threshold.
    CountBelow {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, allow_negative_numbers = true)]
        threshold: f64,
    },
    /// Write the labeled dataset.
    Export {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, value_enum, default_value = "bsum1")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
        /// Re-read the file and recompute a 1% sample of rows.
        #[arg(long)]
        verify: bool,
    },
    /// Histogram of b(t) over ordered triples, split by class.
    Hist {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a decision rule against the exact labels.
    Eval {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, value_enum)]
        predictor: PredictorArg,
        /// Fixed threshold for `--predictor threshold`; the best one if omitted.
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<f64>,
        /// Training share for `--predictor logistic`.
        #[arg(long, default_value_t = LOGISTIC_TRAIN_FRACTION)]
        train_fraction: f64,
    },
    /// k-fold cross-validation of the threshold stump.
    Cv {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, default_value_t = 10)]
        folds: usize,
    },
    /// Every headline number for one n.
    Report {
        #[command(flatten)]
        size: SizeArg,
        #[arg(long, default_value_t = DEFAULT_SCAN_BUDGET)]
        budget: u64,
    },
}

/// Runs the command line against stdout and stderr; returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Exit codes: 0 success, 1 user error, 2 internal inconsistency.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))
        .map(|pool| {
            pool.install(|| {
                let mut buf = Vec::new();
                let r = execute(&cli, &mut buf);
                (buf, r)
            })
        });
    // Output produced before a failure is still shown.
    let result = result.and_then(|(buf, r)| {
        out.write_all(&buf)?;
        out.flush()?;
        r
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_user_error() {
                1
            } else {
                2
            }
        }
    }
}

fn print_rule(out: &mut dyn Write, name: &str, r: &ClassifierReport) -> Result<()> {
    writeln!(out, "predictor\t{name}")?;
    writeln!(out, "accuracy\t{:.6}", r.accuracy)?;
    match r.boundary {
        Some(b) => writeln!(out, "boundary\t{b:.6}")?,
        None => writeln!(out, "boundary\t-")?,
    }
    let [[tn, fp], [fn_, tp]] = r.confusion;
    writeln!(out, "confusion\tzero->zero {tn}\tzero->nonzero {fp}\tnonzero->zero {fn_}\tnonzero->nonzero {tp}")?;
    if let Some(seed) = r.split_seed {
        writeln!(out, "seed\t{seed}")?;
    }
    Ok(())
}

fn labeled(n: usize, cache: Option<&Cache>) -> Result<LabeledDataset> {
    let chars = cache::char_table(n, cache, true)?;
    let tensor = cache::tensor(n, cache, &chars)?;
    let table = cache::bloadings(n, cache)?;
    LabeledDataset::from_tensor(&tensor, &table)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cache = Cache::resolve(cli.cache_dir.as_deref())?;
    let cache = cache.as_ref();
    match &cli.command {
        Command::Partitions(SizeArg { n }) => {
            for (i, p) in PartitionSet::new(*n)?.iter().enumerate() {
                writeln!(out, "{i}\t{p}")?;
            }
        }
        Command::Chartable { size, no_verify } => {
            let t = cache::char_table(size.n, cache, !no_verify)?;
            writeln!(out, "# character table of S_{}, p = {}", t.n(), t.size())?;
            let classes: Vec<String> = t.classes().iter().map(|c| c.rho.to_string()).collect();
            writeln!(out, "classes\t{}", classes.join("\t"))?;
            writeln!(
                out,
                "centralizers\t{}",
                t.classes().iter().map(|c| c.centralizer_order.to_string()).collect::<Vec<_>>().join("\t")
            )?;
            for (l, lambda) in t.partitions().iter().enumerate() {
                let row: Vec<String> = t.row(l).iter().map(i64::to_string).collect();
                writeln!(out, "{lambda}\t{}", row.join("\t"))?;
            }
        }
        Command::Tensor { size, list } => {
            let chars = cache::char_table(size.n, cache, true)?;
            let t = cache::tensor(size.n, cache, &chars)?;
            writeln!(out, "n\t{}", t.n())?;
            writeln!(out, "partitions\t{}", t.size())?;
            writeln!(out, "canonical triples\t{}", t.canonical_len())?;
            writeln!(out, "ordered triples\t{}", t.total_triples())?;
            writeln!(out, "nonzero ordered\t{}", t.nonzero_ordered())?;
            writeln!(out, "nonzero ratio\t{:.6}", t.nonzero_ratio())?;
            if *list {
                for ((i, j, k), g) in t.iter() {
                    writeln!(out, "{i}\t{j}\t{k}\t{g}")?;
                }
            }
        }
        Command::Bload(SizeArg { n }) => {
            let t = cache::bloadings(*n, cache)?;
            for (i, p) in t.partitions.iter().enumerate() {
                writeln!(out, "{i}\t({p})\t{:.4}\t{:.2}", t.w[i], t.b[i])?;
            }
            writeln!(out, "eigenvalue\t{:.6}", t.eigenvalue)?;
            writeln!(out, "mean b(t)\t{:.4}", t.mean_b3)?;
            writeln!(out, "std b(t)\t{:.4}", t.std_b3)?;
        }
        Command::Bstar(SizeArg { n }) => {
            let chars = cache::char_table(*n, cache, true)?;
            let tensor = cache::tensor(*n, cache, &chars)?;
            let table = cache::bloadings(*n, cache)?;
            let bs = b_star(&tensor, &table)?;
            let (i, j, k) = bs.triple;
            let set = &table.partitions;
            writeln!(out, "b_star\t{:.6}", bs.value)?;
            writeln!(out, "triple\t({})\t({})\t({})", set[i], set[j], set[k])?;
        }
        Command::BstarScan { size, budget } => {
            let table = cache::bloadings(size.n, cache)?;
            let chars = cache::char_table(size.n, cache, true)?;
            let scan = b_star_scan(size.n, &table, &chars, *budget)?;
            let set = &table.partitions;
            match scan.outcome {
                ScanOutcome::Exact(bs) => {
                    let (i, j, k) = bs.triple;
                    writeln!(out, "b_star\t{:.6}", bs.value)?;
                    writeln!(out, "triple\t({})\t({})\t({})", set[i], set[j], set[k])?;
                }
                ScanOutcome::LowerBound { value } => {
                    writeln!(out, "budget exhausted")?;
                    writeln!(out, "b_star lower bound\t{value:.6}")?;
                }
            }
            writeln!(out, "evaluations\t{}", scan.evaluations)?;
        }
        Command::CountBelow { size, threshold } => {
            let table = cache::bloadings(size.n, cache)?;
            let (count, total) = count_below(&table, *threshold);
            writeln!(out, "count\t{count}")?;
            writeln!(out, "total\t{total}")?;
            writeln!(out, "ratio\t{:.4}%", 100.0 * count as f64 / total as f64)?;
        }
        Command::Export { size, mode, format, out: path, verify } => {
            let mode = match mode {
                ModeArg::Full3n => FeatureMode::Full3n,
                ModeArg::Ends18 => FeatureMode::Ends18,
                ModeArg::Bsum1 => FeatureMode::Bsum1,
            };
            let format = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Jsonl => Format::Jsonl,
            };
            let chars = cache::char_table(size.n, cache, true)?;
            let tensor = cache::tensor(size.n, cache, &chars)?;
            let table = cache::bloadings(size.n, cache)?;
            let file = File::create(path)?;
            let rows = export_dataset(&tensor, &table, mode, format, BufWriter::new(file))?;
            writeln!(out, "rows\t{rows}")?;
            if *verify {
                let reader = BufReader::new(File::open(path)?);
                let back = match format {
                    Format::Csv => read_csv(reader)?,
                    Format::Jsonl => read_jsonl(reader)?,
                };
                if back.len() as u64 != rows {
                    return Err(Error::Inconsistent(format!(
                        "wrote {rows} rows, read back {}",
                        back.len()
                    )));
                }
                let checked = verify_rows(&back, &chars, &table, 0.01, cli.seed)?;
                writeln!(out, "verified\t{checked}")?;
            }
        }
        Command::Hist { size, bins, out: path } => {
            let data = labeled(size.n, cache)?;
            let values: Vec<f64> = data.rows.iter().map(|r| r.b).collect();
            let weights: Vec<u64> = data.rows.iter().map(|r| r.weight).collect();
            let labels: Vec<bool> = data.rows.iter().map(|r| r.nonzero).collect();
            let h = histogram(&values, &weights, Some(&labels), *bins)?;
            match path {
                Some(p) => {
                    let mut w = BufWriter::new(File::create(p)?);
                    h.write_csv(&mut w)?;
                    w.flush()?;
                    writeln!(out, "bins\t{}", h.bins.len())?;
                }
                None => h.write_csv(&mut *out)?,
            }
        }
        Command::Eval { size, predictor, threshold, train_fraction } => {
            let data = labeled(size.n, cache)?;
            match predictor {
                PredictorArg::F1 => {
                    let mean = cache::bloadings(size.n, cache)?.mean_b3;
                    print_rule(out, "f1", &evaluate(&DecisionRule::Kan { mean }, &data))?
                }
                PredictorArg::F2 => print_rule(out, "f2", &evaluate(&DecisionRule::Logistic, &data))?,
                PredictorArg::F3 => print_rule(out, "f3", &evaluate(&DecisionRule::Symbolic, &data))?,
                PredictorArg::Snn => {
                    print_rule(out, "snn", &evaluate(&DecisionRule::SmallNetwork, &data))?
                }
                PredictorArg::Threshold => {
                    let t = match threshold {
                        Some(t) => *t,
                        None => best_threshold(&data)?.0,
                    };
                    print_rule(out, "threshold", &evaluate(&DecisionRule::Threshold(t), &data))?
                }
                PredictorArg::Logistic => {
                    let fit = fit_logistic(&data, *train_fraction, cli.seed)?;
                    writeln!(out, "slope\t{:.8}", fit.slope)?;
                    writeln!(out, "intercept\t{:.8}", fit.intercept)?;
                    writeln!(out, "iterations\t{}", fit.iterations)?;
                    print_rule(out, "logistic", &fit.report)?
                }
                PredictorArg::Bayes => {
                    let r = evaluate(&MajorityByValue::fit(&data), &data);
                    debug_assert_eq!(r.accuracy, bayes_upper_bound(&data));
                    print_rule(out, "bayes", &r)?
                }
            }
        }
        Command::Cv { size, folds } => {
            let data = labeled(size.n, cache)?;
            let (mean, std) = cross_validate(&data, *folds, cli.seed)?;
            writeln!(out, "folds\t{folds}")?;
            writeln!(out, "mean accuracy\t{mean:.6}")?;
            writeln!(out, "std accuracy\t{std:.6}")?;
            writeln!(out, "seed\t{}", cli.seed)?;
        }
        Command::Report { size, budget } => {
            let opts = ReportOptions { seed: cli.seed, scan_budget: *budget };
            out.write_all(build_report(size.n, cache, &opts)?.as_bytes())?;
        }
    }
    Ok(())
}
