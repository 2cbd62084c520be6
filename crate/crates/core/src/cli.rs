//! Command-line front end.
//!
//! Subcommands and their table schemas:
//!
//! | subcommand   | CSV header                                 |
//! |--------------|--------------------------------------------|
//! | `levels`     | `j_1,...,j_d,reduced_order`                |
//! | `analyze`    | series text format (see [`crate::faber::io`]) |
//! | `recover`    | `n,m,error,error_estimate,reference`       |
//! | `rates`      | `n,m,error,error_estimate,reference`       |
//! | `widths`     | `m,error,upper_ref,lower_ref`              |
//! | `cubature`   | `n,m,abs_error,reference`                  |
//! | `noncompact` | `j,l,witness,distance`                     |
//! | `comb`       | `n,ratio_tail,ratio_bulk`                  |
//!
//! JSON output mirrors the CSV field names as an array of objects; `analyze`
//! and `noncompact` emit a single document. Exit codes: 0 success, 1
//! computation error, 2 usage error. `FABER_THREADS` caps the worker count
//! (0 or unset means one per core).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dyadic::levels_up_to;
use crate::error::{FaberError, Result};
use crate::experiments::{
    comb_check, convergence_study, cubature_study, fit_rate, noncompact_demo, sampling_width_table,
    theoretical_log_exponent, RateRecord,
};
use crate::faber::{analyze_with_cache, io, SampleCache};
use crate::measure::{
    lq_error, MeasureSpec, Method, DEFAULT_GAUSS_ORDER, DEFAULT_MC_SAMPLES, DEFAULT_SEED,
};
use crate::seqnorm::Exponent;
use crate::testbed::{TestFunction, TestFunctionSpec};

/// An inclusive budget range `a..b`, or a single budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BudgetRange {
    pub start: u32,
    pub end: u32,
}

impl BudgetRange {
    pub fn values(&self) -> Vec<u32> {
        (self.start..=self.end).collect()
    }
}

impl FromStr for BudgetRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| format!("`{v}` is not a non-negative integer"))
        };
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start > end {
            return Err(format!("range `{s}` is empty"));
        }
        Ok(Self { start, end })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Gauss,
    Mc,
    Sup,
}

#[derive(Parser, Debug)]
#[command(name = "faber", about = "Sparse-grid Faber-Schauder sampling recovery")]
struct Cli {
    /// Print the resolved configuration (including defaults) and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FunctionArgs {
    /// Catalog id: extremal, spike, kink, hat, const, multilinear, x2, exp, poly-mix.
    #[arg(long, default_value = "extremal")]
    func: String,
    /// Depth J of extremal/spike functions.
    #[arg(long, default_value_t = 14)]
    depth: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Level j of the hat function.
    #[arg(long, default_value_t = 0)]
    level: u32,
    /// Kink anchor, comma separated.
    #[arg(long, value_delimiter = ',')]
    center: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct MeasureArgs {
    /// Error measure; defaults to gauss for d = 1 and mc otherwise.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, default_value_t = DEFAULT_GAUSS_ORDER)]
    order: usize,
    /// Mesh level for gauss/sup; gauss defaults to n + 2 (finer if f has kinks).
    #[arg(long)]
    mesh_level: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    samples: usize,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// List the levels with |j|_1 <= n.
    Levels {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compute and serialize the truncated series I_n f.
    Analyze {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Measure the recovery error of I_n f for one budget.
    Recover {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence study with a fitted rate.
    Rates {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: BudgetRange,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sampling-width table indexed by node count.
    Widths {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: BudgetRange,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cubature error of the integrated interpolant.
    Cubature {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: BudgetRange,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hat-family separation versus bounded coefficient norms.
    Noncompact {
        #[arg(long, default_value_t = 8)]
        max_level: u32,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Normalised tail and bulk level sums.
    Comb {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: BudgetRange,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Everything a run needs, resolved and validated before any computation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    subcommand: String,
    dim: Option<usize>,
    n_range: Option<BudgetRange>,
    p: Option<f64>,
    q: Option<f64>,
    function: Option<FunctionArgs>,
    measure: Option<MeasureSpec>,
    alpha: Option<f64>,
    max_level: Option<u32>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Format,
    threads: usize,
}

enum Failure {
    Usage(String),
    Compute(FaberError),
}

impl From<FaberError> for Failure {
    fn from(e: FaberError) -> Self {
        Failure::Compute(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(flag: &str, message: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("invalid value for {flag}: {message}"))
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = configure_threads();
    match execute(cli, threads) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn configure_threads() -> usize {
    let requested = std::env::var("FABER_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if requested > 0 {
        // the global pool can only be built once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(requested)
            .build_global();
    }
    requested
}

fn check_dim(dim: usize) -> CliResult<()> {
    if dim == 0 {
        return Err(usage("--dim", "must be at least 1"));
    }
    Ok(())
}

fn check_budget(flag: &str, n: u32) -> CliResult<()> {
    if n > 62 {
        return Err(usage(flag, format!("{n} exceeds the maximum budget 62")));
    }
    Ok(())
}

fn check_p(p: f64) -> CliResult<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(usage("--p", format!("{p} must lie in [1, inf)")));
    }
    Ok(())
}

fn resolve_q(p: f64, q: Option<f64>) -> CliResult<f64> {
    let q = q.unwrap_or(p);
    if !(q >= p && q.is_finite()) {
        return Err(usage("--q", format!("{q} must satisfy p <= q < inf")));
    }
    Ok(q)
}

fn resolve_function(args: &FunctionArgs, p: f64, dim: usize) -> CliResult<TestFunction> {
    let spec = TestFunctionSpec::from_id(
        &args.func,
        p,
        args.depth,
        args.seed,
        args.level,
        args.center.clone(),
    )
    .map_err(|e| usage("--func", e))?;
    if let Some(c) = &args.center {
        if c.len() != dim {
            return Err(usage("--center", format!("needs {dim} coordinates")));
        }
    }
    spec.build(dim).map_err(|e| usage("--func", e))
}

fn resolve_measure(args: &MeasureArgs, q: f64, dim: usize, seed: u64) -> CliResult<MeasureSpec> {
    let method = args.method.unwrap_or(if dim == 1 {
        MethodArg::Gauss
    } else {
        MethodArg::Mc
    });
    let spec = match method {
        MethodArg::Gauss => MeasureSpec {
            q: Exponent::Finite(q),
            method: Method::CompositeGauss {
                order: args.order,
                mesh_level: args.mesh_level,
            },
        },
        MethodArg::Mc => MeasureSpec {
            q: Exponent::Finite(q),
            method: Method::StratifiedMc {
                samples: args.samples,
                seed,
            },
        },
        MethodArg::Sup => {
            return Err(usage(
                "--method",
                "sup measures q = inf only; not a recovery error",
            ))
        }
    };
    if method == MethodArg::Gauss && dim > 3 {
        return Err(usage("--method", "gauss supports d <= 3"));
    }
    spec.validate().map_err(|e| usage("--method", e))?;
    Ok(spec)
}

fn execute(cli: Cli, threads: usize) -> CliResult<()> {
    let mut config = RunConfig {
        subcommand: String::new(),
        dim: None,
        n_range: None,
        p: None,
        q: None,
        function: None,
        measure: None,
        alpha: None,
        max_level: None,
        seed: None,
        out: None,
        format: Format::Csv,
        threads,
    };
    let output = match &cli.command {
        Command::Levels { output, .. }
        | Command::Analyze { output, .. }
        | Command::Recover { output, .. }
        | Command::Rates { output, .. }
        | Command::Widths { output, .. }
        | Command::Cubature { output, .. }
        | Command::Noncompact { output, .. }
        | Command::Comb { output, .. } => output.clone(),
    };
    config.out = output.out.clone();
    config.format = output.format;

    match cli.command {
        Command::Levels { dim, n, .. } => {
            check_dim(dim)?;
            check_budget("--n", n)?;
            config.subcommand = "levels".into();
            config.dim = Some(dim);
            config.n_range = Some(BudgetRange { start: n, end: n });
            if cli.print_config {
                return print_config(&config);
            }
            let levels = levels_up_to(n, dim)?;
            let body = match output.format {
                Format::Csv => {
                    let mut s = (1..=dim)
                        .map(|i| format!("j_{i}"))
                        .collect::<Vec<_>>()
                        .join(",");
                    s.push_str(",reduced_order\n");
                    for j in &levels {
                        let entries: Vec<String> =
                            j.entries().iter().map(|e| e.to_string()).collect();
                        let _ = writeln!(s, "{},{}", entries.join(","), j.reduced_order());
                    }
                    s
                }
                Format::Json => {
                    let rows: Vec<_> = levels
                        .iter()
                        .map(|j| serde_json::json!({ "j": j.entries(), "reduced_order": j.reduced_order() }))
                        .collect();
                    to_json(&rows)?
                }
            };
            emit(&output, &body)?;
            println!(
                "levels: {} level vectors with |j|_1 <= {n} in d = {dim}",
                levels.len()
            );
        }
        Command::Analyze {
            dim,
            n,
            p,
            function,
            ..
        } => {
            check_dim(dim)?;
            check_budget("--n", n)?;
            check_p(p)?;
            let f = resolve_function(&function, p, dim)?;
            config.subcommand = "analyze".into();
            config.dim = Some(dim);
            config.n_range = Some(BudgetRange { start: n, end: n });
            config.p = Some(p);
            config.seed = Some(function.seed);
            config.function = Some(function);
            if cli.print_config {
                return print_config(&config);
            }
            let cache = SampleCache::new();
            let series = analyze_with_cache(&f.handle, n, &cache)?;
            let body = match output.format {
                Format::Csv => io::to_text(&series),
                Format::Json => io::to_json(&series)?,
            };
            emit(&output, &body)?;
            println!(
                "analyze: {} coefficients on {} levels, integral {:?}, m = {} nodes",
                series.coefficient_count(),
                series.levels().len(),
                series.integrate(),
                cache.len()
            );
        }
        Command::Recover {
            dim,
            n,
            p,
            q,
            function,
            measure,
            ..
        } => {
            check_dim(dim)?;
            check_budget("--n", n)?;
            check_p(p)?;
            let q = resolve_q(p, q)?;
            let f = resolve_function(&function, p, dim)?;
            let spec = resolve_measure(&measure, q, dim, function.seed)?;
            config.subcommand = "recover".into();
            fill_study(
                &mut config,
                dim,
                BudgetRange { start: n, end: n },
                p,
                q,
                function,
                spec,
            );
            if cli.print_config {
                return print_config(&config);
            }
            let cache = SampleCache::new();
            let series = analyze_with_cache(&f.handle, n, &cache)?;
            let estimate = lq_error(&f.handle, &series, &spec)?;
            let record = RateRecord {
                n,
                m: cache.len() as u64,
                error: estimate.value,
                error_estimate: estimate.error_estimate,
                reference: crate::experiments::reference_envelope(n, p, q, dim),
                p,
                q,
                d: dim,
            };
            emit(
                &output,
                &table(std::slice::from_ref(&record), output.format)?,
            )?;
            println!(
                "recover: L_{q} error {:.6e} (+/- {:.1e}) with m = {} nodes",
                record.error, record.error_estimate, record.m
            );
        }
        Command::Rates {
            dim,
            n,
            p,
            q,
            function,
            measure,
            ..
        } => {
            check_dim(dim)?;
            check_budget("--n", n.end)?;
            check_p(p)?;
            let q = resolve_q(p, q)?;
            let f = resolve_function(&function, p, dim)?;
            let spec = resolve_measure(&measure, q, dim, function.seed)?;
            config.subcommand = "rates".into();
            fill_study(&mut config, dim, n, p, q, function, spec);
            if cli.print_config {
                return print_config(&config);
            }
            let records = convergence_study(&f.handle, p, q, &n.values(), &spec)?;
            emit(&output, &table(&records, output.format)?)?;
            let last = records.last().expect("non-empty range");
            let log_exp = theoretical_log_exponent(p, q, dim);
            match fit_rate(&records, log_exp) {
                Ok(fit) => println!(
                    "rates: fitted slope {:.4} (log exponent {log_exp}), final error {:.4e} at n = {} with m = {} nodes",
                    fit.slope, last.error, last.n, last.m
                ),
                Err(e) => println!(
                    "rates: no slope ({e}), final error {:.4e} at n = {} with m = {} nodes",
                    last.error, last.n, last.m
                ),
            }
        }
        Command::Widths {
            dim,
            n,
            p,
            q,
            function,
            measure,
            ..
        } => {
            check_dim(dim)?;
            check_budget("--n", n.end)?;
            check_p(p)?;
            let q = resolve_q(p, q)?;
            let f = resolve_function(&function, p, dim)?;
            let spec = resolve_measure(&measure, q, dim, function.seed)?;
            config.subcommand = "widths".into();
            fill_study(&mut config, dim, n, p, q, function, spec);
            if cli.print_config {
                return print_config(&config);
            }
            let rows = sampling_width_table(&f.handle, p, q, &n.values(), &spec)?;
            emit(&output, &table(&rows, output.format)?)?;
            let last = rows.last().expect("non-empty range");
            println!(
                "widths: {} rows, final error {:.4e} with m = {} nodes",
                rows.len(),
                last.error,
                last.m
            );
        }
        Command::Cubature {
            dim,
            n,
            p,
            function,
            ..
        } => {
            check_dim(dim)?;
            check_budget("--n", n.end)?;
            check_p(p)?;
            let f = resolve_function(&function, p, dim)?;
            if f.handle.exact_integral().is_none() {
                return Err(usage(
                    "--func",
                    format!("`{}` has no exact integral", function.func),
                ));
            }
            config.subcommand = "cubature".into();
            config.dim = Some(dim);
            config.n_range = Some(n);
            config.seed = Some(function.seed);
            config.function = Some(function);
            if cli.print_config {
                return print_config(&config);
            }
            let rows = cubature_study(&f.handle, &n.values())?;
            emit(&output, &table(&rows, output.format)?)?;
            let last = rows.last().expect("non-empty range");
            println!(
                "cubature: final error {:.4e} at n = {} with m = {} nodes",
                last.abs_error, last.n, last.m
            );
        }
        Command::Noncompact { max_level, p, .. } => {
            if max_level < 2 {
                return Err(usage("--max-level", "must be at least 2"));
            }
            if max_level > 60 {
                return Err(usage("--max-level", "must be at most 60"));
            }
            check_p(p)?;
            config.subcommand = "noncompact".into();
            config.max_level = Some(max_level);
            config.p = Some(p);
            if cli.print_config {
                return print_config(&config);
            }
            let report = noncompact_demo(max_level, p)?;
            let body = match output.format {
                Format::Csv => table(&report.distances, Format::Csv)?,
                Format::Json => to_json(&report)?,
            };
            emit(&output, &body)?;
            println!("noncompact: {}", report.conclusion);
        }
        Command::Comb { alpha, dim, n, .. } => {
            check_dim(dim)?;
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(usage("--alpha", format!("{alpha} must be positive")));
            }
            config.subcommand = "comb".into();
            config.dim = Some(dim);
            config.n_range = Some(n);
            config.alpha = Some(alpha);
            if cli.print_config {
                return print_config(&config);
            }
            let rows = comb_check(alpha, dim, &n.values())?;
            emit(&output, &table(&rows, output.format)?)?;
            let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
                (lo.min(r.ratio_tail), hi.max(r.ratio_tail))
            });
            println!(
                "comb: {} rows, ratio_tail in [{lo:.4}, {hi:.4}]",
                rows.len()
            );
        }
    }
    Ok(())
}

fn fill_study(
    config: &mut RunConfig,
    dim: usize,
    n: BudgetRange,
    p: f64,
    q: f64,
    function: FunctionArgs,
    spec: MeasureSpec,
) {
    config.dim = Some(dim);
    config.n_range = Some(n);
    config.p = Some(p);
    config.q = Some(q);
    config.seed = Some(function.seed);
    config.function = Some(function);
    config.measure = Some(spec);
}

fn print_config(config: &RunConfig) -> CliResult<()> {
    println!("{}", to_json(config)?);
    Ok(())
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn table<T: Serialize>(rows: &[T], format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(rows),
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in rows {
                writer.serialize(row)?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| FaberError::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

fn emit(output: &OutputArgs, body: &str) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, body)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}
