//! Command-line front end.
//!
//! `corr` evaluates a correlation function on a grid and writes a CSV or JSON
//! table; `verify` runs the verification suites and writes a JSON report.
//! Exit status is 0 on success, 1 on numerical failure or a failed
//! criterion, 2 on a configuration error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::correlation::{evaluate, CorrelationRequest, CorrelationResult, EngineOptions, Method, Variant};
use crate::ensembles::EnsembleSpec;
use crate::mc::Threads;
use crate::verify::{Outcome, Suite, Verifier, VerifyConfig};
use crate::{Error, MetricSignature, Result, Side, CONVENTION};

/// Relative `--output` paths resolve against this directory when it is set.
pub const OUTPUT_DIR_ENV: &str = "RMTCORR_OUTPUT_DIR";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "rmtcorr", version, about = "Finite-N spectral correlation functions of unitary-invariant random matrix ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a k-point correlation function on a grid.
    Corr(CorrArgs),
    /// Run verification suites and report pass/fail per criterion.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct CorrArgs {
    /// Ensemble description (JSON).
    #[arg(long)]
    ensemble: PathBuf,
    /// Number of points.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// `lo:hi:count`; for k > 1 the table covers the k-fold product grid.
    #[arg(long, allow_hyphen_values = true)]
    grid: Grid,
    #[arg(long, default_value = "convolution")]
    method: String,
    /// `R` (imaginary part) or `Rhat` (full resolvent).
    #[arg(long, default_value = "R")]
    variant: String,
    /// Increment sides for `Rhat`, one `+`/`-` per point; defaults to all `+`.
    #[arg(long, allow_hyphen_values = true)]
    metric: Option<String>,
    /// Worker threads; 0 evaluates serially.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Recorded in the output header; evaluation is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Successive-order agreement tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Base Gauss–Hermite order of the convolution.
    #[arg(long)]
    hermite_nodes: Option<usize>,
    /// Panels of the half-line Fourier rule.
    #[arg(long)]
    panels: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    /// Restrict criteria that scan several matrix sizes to this one.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Restrict criteria that scan several point counts to this one.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = VerifyConfig::default().seed)]
    seed: u64,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = VerifyConfig::default().samples)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Uniform grid `lo:hi:count`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.lo + step * i as f64).collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid '{s}' is not lo:hi:count"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite()) || count == 0 || (count > 1 && hi <= lo) {
            return Err(Error::Config(format!("grid '{s}' needs finite lo < hi and count ≥ 1")));
        }
        Ok(Self { lo, hi, count })
    }
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Corr(args) => cmd_corr(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rmtcorr: {e}");
            if is_config_error(&e) {
                eprintln!("\nUsage: rmtcorr <corr|verify> [OPTIONS]; see rmtcorr --help");
                2
            } else {
                1
            }
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::Csv(_))
}

fn output_path(requested: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if requested.is_relative() => Path::new(&dir).join(requested),
        _ => requested.to_path_buf(),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => {
            let path = output_path(p);
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Lossless decimal form.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Everything that determines a `corr` table; hashed into its header.
#[derive(Serialize)]
struct CorrRecord<'a> {
    ensemble: serde_json::Value,
    k: usize,
    grid: Grid,
    method: Method,
    variant: Variant,
    metric: String,
    seed: u64,
    options: EngineOptions,
    format: Format,
    convention: &'a str,
}

#[derive(Serialize)]
struct Row {
    x: Vec<f64>,
    value_re: f64,
    value_im: f64,
    error: f64,
}

#[derive(Serialize)]
struct CorrTable<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: String,
    seed: u64,
    convention: &'static str,
    config: &'a CorrRecord<'a>,
    rows: Vec<Row>,
    /// Trapezoid integral of `R₁` over the grid, for one-point `R` tables.
    integral_r1: Option<f64>,
}

fn cmd_corr(args: &CorrArgs) -> Result<i32> {
    let method: Method = args.method.parse()?;
    let variant: Variant = args.variant.parse()?;
    if args.k == 0 {
        return Err(Error::Config("--k must be at least 1".into()));
    }
    let metric = match &args.metric {
        Some(m) => MetricSignature::parse(m)?,
        None => MetricSignature::uniform(args.k, Side::Plus),
    };
    if metric.len() != args.k {
        return Err(Error::Config(format!("--metric has {} signs for k={}", metric.len(), args.k)));
    }
    let text = std::fs::read_to_string(&args.ensemble)?;
    let spec = EnsembleSpec::from_json(&text, args.ensemble.parent())?;
    let mut options = EngineOptions::default();
    if let Some(t) = args.tolerance {
        if !(t > 0.0) {
            return Err(Error::Config("--tolerance must be positive".into()));
        }
        options.tolerance = t;
    }
    if let Some(n) = args.hermite_nodes {
        if n == 0 {
            return Err(Error::Config("--hermite-nodes must be positive".into()));
        }
        options.hermite_nodes = n;
    }
    if let Some(p) = args.panels {
        if p == 0 {
            return Err(Error::Config("--panels must be positive".into()));
        }
        options.panels = p;
    }
    let record = CorrRecord {
        ensemble: serde_json::from_str(&text)?,
        k: args.k,
        grid: args.grid,
        method,
        variant,
        metric: metric.to_string(),
        seed: args.seed,
        options,
        format: args.format,
        convention: CONVENTION,
    };
    let hash = sha256_hex(&serde_json::to_string(&record)?);

    let axis = args.grid.points();
    let points: Vec<Vec<f64>> = (0..axis.len().pow(args.k as u32))
        .map(|mut i| {
            let mut x = vec![0.0; args.k];
            for slot in x.iter_mut().rev() {
                *slot = axis[i % axis.len()];
                i /= axis.len();
            }
            x
        })
        .collect();
    let request = |x: &Vec<f64>| {
        let mut req = CorrelationRequest::new(spec.clone(), x.clone(), variant, method).with_metric(metric.clone());
        req.options = options;
        evaluate(&req)
    };
    let results: Vec<Result<CorrelationResult>> = if args.threads == 0 {
        points.iter().map(request).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| points.par_iter().map(request).collect())
    };
    let mut rows = Vec::with_capacity(points.len());
    for (x, r) in points.into_iter().zip(results) {
        let r = r?;
        rows.push(Row {
            x,
            value_re: r.value.re,
            value_im: r.value.im,
            error: r.error,
        });
    }
    let integral_r1 = (args.k == 1 && variant == Variant::R && rows.len() > 1).then(|| {
        rows.windows(2)
            .map(|w| 0.5 * (w[1].x[0] - w[0].x[0]) * (w[0].value_re + w[1].value_re))
            .sum()
    });

    let body = match args.format {
        Format::Csv => corr_csv(&record, &hash, &rows, integral_r1)?,
        Format::Json => {
            let table = CorrTable {
                tool: "rmtcorr",
                version: VERSION,
                config_hash: hash,
                seed: args.seed,
                convention: CONVENTION,
                config: &record,
                rows,
                integral_r1,
            };
            serde_json::to_string_pretty(&table)? + "\n"
        }
    };
    emit(args.output.as_deref(), &body)?;
    Ok(0)
}

fn corr_csv(record: &CorrRecord, hash: &str, rows: &[Row], integral_r1: Option<f64>) -> Result<String> {
    let mut out = format!(
        "# tool=rmtcorr version={VERSION}\n# config_hash={hash}\n# seed={}\n# convention={CONVENTION}\n",
        record.seed
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string(), "variant".to_string(), "k".to_string()];
    header.extend((1..=record.k).map(|p| format!("x{p}")));
    header.extend(["value_re", "value_im", "error"].map(String::from));
    w.write_record(&header)?;
    for row in rows {
        let mut fields = vec![record.method.to_string(), record.variant.to_string(), record.k.to_string()];
        fields.extend(row.x.iter().copied().map(float));
        fields.extend([row.value_re, row.value_im, row.error].map(float));
        w.write_record(&fields)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    if let Some(total) = integral_r1 {
        let _ = writeln!(out, "# integral_R1_trapezoid={}", float(total));
    }
    Ok(out)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: String,
    seed: u64,
    convention: &'static str,
    suite: &'a str,
    config: VerifyConfig,
    passed: bool,
    outcomes: Vec<Outcome>,
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let suite: Suite = args.suite.parse()?;
    if args.samples < 2 {
        return Err(Error::Config("--samples must be at least 2".into()));
    }
    let config = VerifyConfig {
        seed: args.seed,
        threads: Threads(args.threads),
        n: args.n,
        k: args.k,
        samples: args.samples,
    };
    let outcomes = Verifier::new(config).run_suite(suite)?;
    let passed = outcomes.iter().all(|o| o.passed);
    let hash = sha256_hex(&serde_json::to_string(&(suite.name(), &config, CONVENTION))?);
    let body = match args.format {
        ReportFormat::Json => {
            let report = VerifyReport {
                tool: "rmtcorr",
                version: VERSION,
                config_hash: hash,
                seed: args.seed,
                convention: CONVENTION,
                suite: suite.name(),
                config,
                passed,
                outcomes,
            };
            serde_json::to_string_pretty(&report)? + "\n"
        }
        ReportFormat::Text => {
            let mut s = format!("# rmtcorr {VERSION} config_hash={hash} seed={} convention={CONVENTION}\n", args.seed);
            for o in &outcomes {
                let _ = writeln!(
                    s,
                    "{} {} measured={:.6e} threshold={:.1e} {}: {}",
                    o.criterion,
                    if o.passed { "PASS" } else { "FAIL" },
                    o.measured,
                    o.threshold,
                    o.title,
                    o.detail
                );
            }
            s
        }
    };
    emit(args.output.as_deref(), &body)?;
    Ok(if passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses_and_includes_endpoints() {
        let g: Grid = "-4:4:401".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 401);
        assert_eq!(p[0], -4.0);
        assert!((p[400] - 4.0).abs() < 1e-15);
        assert_eq!("0.5:1:1".parse::<Grid>().unwrap().points(), vec![0.5]);
        for bad in ["1:2", "2:1:5", "a:1:3", "0:1:0", "0:1:3:4"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn output_dir_applies_to_relative_paths_only() {
        // the variable is read at call time; absolute paths never move
        assert_eq!(output_path(Path::new("/tmp/a.csv")), PathBuf::from("/tmp/a.csv"));
    }

    #[test]
    fn parse_failures_exit_with_usage_code() {
        assert_eq!(run(["rmtcorr", "corr"]), 2);
        assert_eq!(run(["rmtcorr", "frobnicate"]), 2);
        assert_eq!(run(["rmtcorr", "--help"]), 0);
    }
}
