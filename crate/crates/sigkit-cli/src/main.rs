//! `sigkit` — significativity indices for agreement values.
//!
//! Subcommands: `exact` (exhaustive enumeration), `mc` (Monte Carlo over
//! confusion or probability matrices), `curve` (threshold sweeps), and
//! `convergence` (exact-vs-simplex diagnostics). Output is plain CSV with a
//! header row; every seeded run is bit-reproducible.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sigkit::{
    composition_count, default_sample_count, exact_varrho_multi, lookup_measure, mc_rho_multi,
    mc_varrho_multi, BigCount, ExactError, ExactOptions, Measure, DEFAULT_BUDGET,
};

const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_IO: u8 = 4;

/// Environment variable overriding the enumeration budget.
const BUDGET_ENV: &str = "SIGKIT_BUDGET";

#[derive(Parser)]
#[command(
    name = "sigkit",
    version,
    about = "Significativity indices for agreement values between two classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact significativity over confusion matrices with m tests.
    Exact(ExactArgs),
    /// Monte Carlo significativity; with --m over confusion matrices,
    /// without --m over probability matrices.
    Mc(McArgs),
    /// Sweep a threshold range and write one CSV row per grid point.
    Curve(CurveArgs),
    /// Compare the confusion-matrix index against the probability-matrix
    /// index across a list of test counts.
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Agreement measure: kappa or ia.
    #[arg(long)]
    measure: String,
    /// Class count.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    /// RNG seed for the Monte Carlo paths.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker substreams; each owns an independent RNG stream.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    workers: u32,
    /// Output path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of tests per confusion matrix.
    #[arg(long)]
    m: u64,
    /// Agreement threshold; matrices scoring strictly below it are counted.
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of tests; omit to sample probability matrices instead.
    #[arg(long)]
    m: Option<u64>,
    /// Agreement threshold.
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
    /// Sample count (default: ceil(sqrt(space size)) capped at 1e6 with --m,
    /// 1e6 without).
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveMethod {
    Exact,
    Mc,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of tests; required for --method exact, omit for a
    /// probability-matrix curve.
    #[arg(long)]
    m: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    c_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    c_max: f64,
    /// Grid points, evenly spaced over [c_min, c_max], both ends included.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    points: u64,
    #[arg(long, value_enum)]
    method: CurveMethod,
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    c_grid: Vec<f64>,
    /// Comma-separated test counts; each is computed exactly when it fits
    /// the budget and by Monte Carlo otherwise.
    #[arg(long, value_delimiter = ',', required = true)]
    m_list: Vec<u64>,
    /// Sample count for the Monte Carlo parts (default: 1e5).
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
}

enum CliError {
    Usage(String),
    Budget(ExactError),
    Io(io::Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Exact(args) => cmd_exact(args),
        Command::Mc(args) => cmd_mc(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Convergence(args) => cmd_convergence(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Budget(e)) => {
            eprintln!("error: {e}");
            eprintln!("hint: use the Monte Carlo path (`sigkit mc`) or raise {BUDGET_ENV}");
            ExitCode::from(EXIT_BUDGET)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn parse_measure(name: &str) -> Result<Measure, CliError> {
    lookup_measure(name).map_err(|e| CliError::Usage(e.to_string()))
}

fn budget_from_env() -> Result<u64, CliError> {
    match std::env::var(BUDGET_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_BUDGET),
        Err(e) => Err(CliError::Usage(format!("{BUDGET_ENV}: {e}"))),
        Ok(raw) => match raw.trim().parse::<u64>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(CliError::Usage(format!(
                "{BUDGET_ENV} must be a positive integer, got {raw:?}"
            ))),
        },
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Six significant decimal digits, plain notation.
fn fmt_value(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn grid(c_min: f64, c_max: f64, points: u64) -> Vec<f64> {
    let span = c_max - c_min;
    (0..points)
        .map(|i| {
            if i == points - 1 {
                c_max
            } else {
                c_min + span * i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn cmd_exact(args: ExactArgs) -> Result<(), CliError> {
    let measure = parse_measure(&args.common.measure)?;
    if args.m == 0 {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    let options = ExactOptions {
        budget: budget_from_env()?,
        workers: args.common.workers,
    };
    let result = exact_varrho_multi(&measure, args.common.n, args.m, &[args.c], &options)
        .map_err(map_exact_error)?
        .pop()
        .expect("one threshold in, one result out");
    let mut out = open_output(args.common.out.as_ref())?;
    writeln!(out, "measure,n,m,c,value,numerator,denominator")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        args.common.measure,
        args.common.n,
        args.m,
        fmt_value(args.c),
        fmt_value(result.value()),
        result.numerator,
        result.denominator
    )?;
    out.flush()?;
    Ok(())
}

fn map_exact_error(e: ExactError) -> CliError {
    match e {
        ExactError::BudgetExceeded { .. } => CliError::Budget(e),
        ExactError::ZeroTests => CliError::Usage(e.to_string()),
    }
}

fn cmd_mc(args: McArgs) -> Result<(), CliError> {
    let measure = parse_measure(&args.common.measure)?;
    let n = args.common.n;
    let k = u64::from(n) * u64::from(n);
    let (estimate, m_field) = match args.m {
        Some(0) => return Err(CliError::Usage("--m must be at least 1".into())),
        Some(m) => {
            let samples = args.samples.unwrap_or_else(|| default_sample_count(m, k));
            let est = mc_varrho_multi(
                &measure,
                n,
                m,
                &[args.c],
                samples,
                args.common.seed,
                args.common.workers,
            )
            .map_err(|e| CliError::Usage(e.to_string()))?
            .pop()
            .expect("one threshold in, one estimate out");
            (est, m.to_string())
        }
        None => {
            let samples = args.samples.unwrap_or(1_000_000);
            let est = mc_rho_multi(
                &measure,
                n,
                &[args.c],
                samples,
                args.common.seed,
                args.common.workers,
            )
            .map_err(|e| CliError::Usage(e.to_string()))?
            .pop()
            .expect("one threshold in, one estimate out");
            (est, "-".to_string())
        }
    };
    let mut out = open_output(args.common.out.as_ref())?;
    writeln!(out, "measure,n,m,c,value,std_error,N,seed")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        args.common.measure,
        n,
        m_field,
        fmt_value(args.c),
        fmt_value(estimate.value),
        fmt_value(estimate.std_error),
        estimate.n_samples,
        estimate.seed
    )?;
    out.flush()?;
    Ok(())
}

fn cmd_curve(args: CurveArgs) -> Result<(), CliError> {
    let measure = parse_measure(&args.common.measure)?;
    if args.c_min >= args.c_max {
        return Err(CliError::Usage(format!(
            "--c-min ({}) must be below --c-max ({})",
            args.c_min, args.c_max
        )));
    }
    if args.method == CurveMethod::Exact && args.m.is_none() {
        return Err(CliError::Usage(
            "--method exact needs --m; the probability-matrix curve is Monte Carlo only".into(),
        ));
    }
    if args.m == Some(0) {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    let n = args.common.n;
    let k = u64::from(n) * u64::from(n);
    let thresholds = grid(args.c_min, args.c_max, args.points);

    let mut body = String::new();
    let header: &str;
    match (args.method, args.m) {
        (CurveMethod::Exact, Some(m)) => {
            header = "c,value";
            let options = ExactOptions {
                budget: budget_from_env()?,
                workers: args.common.workers,
            };
            let results = exact_varrho_multi(&measure, n, m, &thresholds, &options)
                .map_err(map_exact_error)?;
            for (c, r) in thresholds.iter().zip(results) {
                let _ = writeln!(body, "{},{}", fmt_value(*c), fmt_value(r.value()));
            }
        }
        (CurveMethod::Mc, Some(m)) => {
            header = "c,value,std_error";
            let samples = args.samples.unwrap_or_else(|| default_sample_count(m, k));
            let estimates = mc_varrho_multi(
                &measure,
                n,
                m,
                &thresholds,
                samples,
                args.common.seed,
                args.common.workers,
            )
            .map_err(|e| CliError::Usage(e.to_string()))?;
            for (c, e) in thresholds.iter().zip(estimates) {
                let _ = writeln!(
                    body,
                    "{},{},{}",
                    fmt_value(*c),
                    fmt_value(e.value),
                    fmt_value(e.std_error)
                );
            }
        }
        (CurveMethod::Mc, None) => {
            header = "c,value,std_error";
            let samples = args.samples.unwrap_or(1_000_000);
            let estimates = mc_rho_multi(
                &measure,
                n,
                &thresholds,
                samples,
                args.common.seed,
                args.common.workers,
            )
            .map_err(|e| CliError::Usage(e.to_string()))?;
            for (c, e) in thresholds.iter().zip(estimates) {
                let _ = writeln!(
                    body,
                    "{},{},{}",
                    fmt_value(*c),
                    fmt_value(e.value),
                    fmt_value(e.std_error)
                );
            }
        }
        (CurveMethod::Exact, None) => unreachable!("rejected above"),
    }

    let mut out = open_output(args.common.out.as_ref())?;
    writeln!(out, "{header}")?;
    out.write_all(body.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<(), CliError> {
    let measure = parse_measure(&args.common.measure)?;
    if args.m_list.contains(&0) {
        return Err(CliError::Usage("--m-list entries must be at least 1".into()));
    }
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let n = args.common.n;
    let k = u64::from(n) * u64::from(n);
    let budget = budget_from_env()?;

    let rho = mc_rho_multi(
        &measure,
        n,
        &args.c_grid,
        args.samples,
        args.common.seed,
        args.common.workers,
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut rows = String::new();
    for (index, &m) in args.m_list.iter().enumerate() {
        let feasible = composition_count(m, k) <= BigCount::from(budget);
        let varrho: Vec<f64> = if feasible {
            let options = ExactOptions {
                budget,
                workers: args.common.workers,
            };
            exact_varrho_multi(&measure, n, m, &args.c_grid, &options)
                .map_err(map_exact_error)?
                .into_iter()
                .map(|r| r.value())
                .collect()
        } else {
            // A sub-seed per m keeps these draws independent of the simplex
            // stream above while staying reproducible.
            let sub_seed = args.common.seed.wrapping_add(1 + index as u64);
            mc_varrho_multi(
                &measure,
                n,
                m,
                &args.c_grid,
                args.samples,
                sub_seed,
                args.common.workers,
            )
            .map_err(|e| CliError::Usage(e.to_string()))?
            .into_iter()
            .map(|e| e.value)
            .collect()
        };
        for ((c, v), r) in args.c_grid.iter().zip(varrho).zip(&rho) {
            let _ = writeln!(
                rows,
                "{},{},{},{},{}",
                fmt_value(*c),
                m,
                fmt_value(v),
                fmt_value(r.value),
                fmt_value(r.value - v)
            );
        }
    }

    let mut out = open_output(args.common.out.as_ref())?;
    writeln!(out, "c,m,varrho,rho,delta")?;
    out.write_all(rows.as_bytes())?;
    out.flush()?;
    Ok(())
}
