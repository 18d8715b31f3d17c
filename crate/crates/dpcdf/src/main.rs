use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpcdf::config::{ExperimentConfig, FitMetric, MechanismKind};
use dpcdf::error::{HarnessError, Result};
use dpcdf::experiment::run_experiment;
use dpcdf::figure1::{default_grid, figure1};
use dpcdf::ingest::{ingest_dataset, read_vector, Boundary};
use dpcdf::optimize_cmd::{optimize_cmd, Strategy};
use dpcdf::report::{write_curve_csv, write_json, CurvePoint};
use dpcdf_core::consistency::consistent_fit;
use dpcdf_core::mechanisms::{mech_histogram, mech_range_query, mech_tree, RngSeed};
use dpcdf_core::refinement::{refine_bottom_up, refined_cdf};
use dpcdf_core::tree::DomainInterval;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "dpcdf", version, about = "Differentially private CDF release with tree mechanisms")]
struct Cli {
    /// Seed for noise and synthetic data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials (benchmark: default 100; figure1: enables empirical columns).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output file; defaults to stdout, or to a file in DPCDF_OUT_DIR when set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Default output directory.
    #[arg(long, global = true, env = "DPCDF_OUT_DIR", hide_env_values = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Release a private CDF of a sample file.
    Mechanize(MechanizeArgs),
    /// Choose branching factors and budgets for a bin count.
    Optimize(OptimizeArgs),
    /// Project noisy cumulative values onto a consistent CDF.
    Consist(ConsistArgs),
    /// Run a Monte Carlo experiment (defaults to the 997-bin consistency study).
    Benchmark(BenchmarkArgs),
    /// Error curves at 256 bins over a budget grid.
    Figure1(Figure1Args),
}

#[derive(Args)]
struct MechanizeArgs {
    /// One sample per line, or a single-column CSV.
    #[arg(long)]
    input: PathBuf,
    /// Lower domain bound a (inclusive).
    #[arg(long)]
    lo: f64,
    /// Upper domain bound b (exclusive).
    #[arg(long)]
    hi: f64,
    #[arg(long, value_enum, default_value = "tree")]
    mechanism: MechanismArg,
    #[arg(long)]
    bins: Option<usize>,
    /// Tree branching factors, comma separated; flat tree over --bins otherwise.
    #[arg(long, value_delimiter = ',')]
    branching: Option<Vec<usize>>,
    #[arg(long)]
    epsilon: f64,
    /// Bottom-up refinement with left/right averaging (equal trees).
    #[arg(long)]
    refine: bool,
    /// Consistency post-processing metric.
    #[arg(long, value_enum)]
    consist: Option<MetricArg>,
    /// Map values outside [lo, hi) to the nearest value inside instead of failing.
    #[arg(long)]
    clamp: bool,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    bins: u64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Sample count used for the predicted error.
    #[arg(long, default_value_t = 1)]
    samples: u64,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: Strategy,
    /// Re-optimize budgets for the chosen branching (exhaustive strategy).
    #[arg(long)]
    refine_budgets: bool,
}

#[derive(Args)]
struct ConsistArgs {
    /// Noisy CDF values (or cumulative counts with --counts), one per line.
    #[arg(long)]
    input: PathBuf,
    /// Sample count N.
    #[arg(long)]
    total: u64,
    #[arg(long, value_enum, default_value = "l1")]
    metric: MetricArg,
    /// Input holds cumulative counts ending at N rather than CDF values ending at 1.
    #[arg(long)]
    counts: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// JSON experiment configuration; the flags below are ignored when set.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tree")]
    mechanism: MechanismArg,
    #[arg(long, default_value_t = 997)]
    bins: usize,
    #[arg(long, value_delimiter = ',')]
    branching: Option<Vec<usize>>,
    #[arg(long, default_value_t = 900)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    epsilon: Vec<f64>,
    #[arg(long)]
    refine: bool,
    /// Consistency metrics to report.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "l1,l2")]
    consist: Vec<MetricArg>,
    /// Report the raw estimate only.
    #[arg(long, conflicts_with = "consist")]
    no_consist: bool,
}

#[derive(Args)]
struct Figure1Args {
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    /// Samples per trial for the empirical columns.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismArg {
    Ind,
    Hist,
    Tree,
}

impl From<MechanismArg> for MechanismKind {
    fn from(m: MechanismArg) -> Self {
        match m {
            MechanismArg::Ind => MechanismKind::Ind,
            MechanismArg::Hist => MechanismKind::Hist,
            MechanismArg::Tree => MechanismKind::Tree,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    L1,
    L2,
    Hamming,
}

impl From<MetricArg> for FitMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::L1 => FitMetric::L1,
            MetricArg::L2 => FitMetric::L2,
            MetricArg::Hamming => FitMetric::Hamming,
        }
    }
}

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn new(cli: &Cli, name: &str, format: Format) -> Self {
        let path = cli
            .out
            .clone()
            .or_else(|| cli.out_dir.as_ref().map(|d| d.join(format!("{name}.{}", format.ext()))));
        Self { path }
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
                        path: dir.to_path_buf(),
                        source,
                    })?;
                }
                let f = File::create(p).map_err(|source| HarnessError::Io { path: p.clone(), source })?;
                Box::new(BufWriter::new(f))
            }
            None => Box::new(io::stdout().lock()),
        })
    }
}

#[derive(Serialize)]
struct CdfRelease {
    mechanism: String,
    epsilon: f64,
    bins: usize,
    total: u64,
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct ConsistOutput {
    metric: &'static str,
    total: u64,
    cost: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct IndexedValue {
    index: usize,
    upper_edge: Option<f64>,
    value: f64,
}

fn write_values(out: &Output, format: Format, values: &[f64], edges: Option<(f64, f64)>, json: &impl Serialize) -> Result<()> {
    let w = out.writer()?;
    match format {
        Format::Json => write_json(json, w),
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            let k = values.len() as f64;
            for (i, &value) in values.iter().enumerate() {
                let upper_edge = edges.map(|(a, b)| a + (b - a) * (i + 1) as f64 / k);
                csv.serialize(IndexedValue {
                    index: i + 1,
                    upper_edge,
                    value,
                })?;
            }
            csv.flush().map_err(csv::Error::from)?;
            Ok(())
        }
    }
}

fn mechanize(cli: &Cli, a: &MechanizeArgs) -> Result<()> {
    let domain = DomainInterval::new(a.lo, a.hi)?;
    let boundary = if a.clamp { Boundary::Clamp } else { Boundary::Reject };
    let data = ingest_dataset(&a.input, domain, boundary)?;
    let mut cfg = ExperimentConfig::new(a.mechanism.into(), 0, vec![a.epsilon]);
    cfg.bins = a.bins;
    cfg.branching = a.branching.clone();
    cfg.refine = a.refine;
    cfg.domain = Some((a.lo, a.hi));
    cfg.data = Some(a.input.clone());
    cfg.validate()?;
    let bins = cfg.bins()?;

    let mut noise = RngSeed::new(cli.seed, 0).laplace();
    let (mut label, mut cdf) = match cfg.mechanism {
        MechanismKind::Ind => ("ind".to_string(), mech_range_query(&data, bins, a.epsilon, &mut noise)?),
        MechanismKind::Hist => ("hist".to_string(), mech_histogram(&data, bins, a.epsilon, &mut noise)?),
        MechanismKind::Tree => {
            let spec = cfg.tree_spec(a.epsilon)?;
            let (tree, cdf) = mech_tree(&data, &spec, &mut noise)?;
            if a.refine {
                ("tree+refined".to_string(), refined_cdf(&refine_bottom_up(&tree, &spec)?).to_cdf())
            } else {
                ("tree".to_string(), cdf)
            }
        }
    };
    if let Some(m) = a.consist {
        let m = FitMetric::from(m);
        cdf = dpcdf_core::consistency::consistent_cdf(&cdf, m.additive())?;
        label = format!("{label}+consistent-{}", m.label());
    }
    let format = cli.format.unwrap_or(Format::Json);
    let out = Output::new(cli, "mechanize", format);
    let release = CdfRelease {
        mechanism: label,
        epsilon: a.epsilon,
        bins,
        total: cdf.total(),
        lo: a.lo,
        hi: a.hi,
        values: cdf.values().to_vec(),
    };
    write_values(&out, format, cdf.values(), Some((a.lo, a.hi)), &release)
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Result<()> {
    let r = optimize_cmd(a.bins, a.epsilon, a.samples, a.strategy, a.refine_budgets)?;
    let format = cli.format.unwrap_or(Format::Json);
    let out = Output::new(cli, "optimize", format);
    let mut w = out.writer()?;
    match format {
        Format::Json => write_json(&r, w),
        Format::Csv => {
            let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(["requested_bins", "bins", "rounded", "height", "branching", "budgets", "predicted_e2"])?;
            csv.write_record([
                r.requested_bins.to_string(),
                r.bins.to_string(),
                r.rounded.to_string(),
                r.height.to_string(),
                join(&r.branching),
                join(&r.budgets),
                r.predicted_e2.to_string(),
            ])?;
            csv.flush().map_err(csv::Error::from)?;
            Ok(())
        }
    }
}

fn consist(cli: &Cli, a: &ConsistArgs) -> Result<()> {
    let raw = read_vector(&a.input)?;
    let n = a.total as f64;
    let metric = FitMetric::from(a.metric);
    let counts: Vec<f64> = if a.counts {
        raw
    } else {
        let last = *raw.last().expect("non-empty");
        if last != 1.0 {
            return Err(dpcdf_core::Error::UnpinnedTotal { last, expected: 1.0 }.into());
        }
        let mut c: Vec<f64> = raw.iter().map(|x| x * n).collect();
        *c.last_mut().expect("non-empty") = n;
        c
    };
    let sol = consistent_fit(&counts, a.total, metric.additive())?;
    let values: Vec<f64> = if a.counts {
        sol.values.iter().map(|&h| h as f64).collect()
    } else {
        sol.values.iter().map(|&h| h as f64 / n).collect()
    };
    let format = cli.format.unwrap_or(Format::Json);
    let out = Output::new(cli, "consist", format);
    let body = ConsistOutput {
        metric: metric.label(),
        total: a.total,
        cost: sol.cost,
        values: values.clone(),
    };
    write_values(&out, format, &values, None, &body)
}

fn benchmark(cli: &Cli, a: &BenchmarkArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => {
            let mut c = ExperimentConfig::new(a.mechanism.into(), a.bins, a.epsilon.clone());
            c.branching = a.branching.clone();
            c.samples = a.samples;
            c.refine = a.refine;
            if !a.no_consist {
                c.consist = a.consist.iter().map(|&m| m.into()).collect();
            }
            c.seed = cli.seed;
            c
        }
    };
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    let report = run_experiment(&cfg)?;
    let format = cli.format.unwrap_or(Format::Json);
    let out = match (&cli.out, &cfg.output) {
        (None, Some(p)) => Output { path: Some(p.clone()) },
        _ => Output::new(cli, "benchmark", format),
    };
    let w = out.writer()?;
    match format {
        Format::Json => write_json(&report, w),
        Format::Csv => write_curve_csv(&Vec::<CurvePoint>::from(&report), w),
    }
}

fn figure(cli: &Cli, a: &Figure1Args) -> Result<()> {
    let grid = a.epsilon.clone().unwrap_or_else(default_grid);
    if grid.is_empty() || grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(HarnessError::Config("epsilon grid must be strictly positive".into()));
    }
    let points = figure1(&grid, cli.trials, a.samples, cli.seed)?;
    let format = cli.format.unwrap_or(Format::Csv);
    let out = Output::new(cli, "figure1", format);
    let w = out.writer()?;
    match format {
        Format::Csv => write_curve_csv(&points, w),
        Format::Json => write_json(&points, w),
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Mechanize(a) => mechanize(cli, a),
        Command::Optimize(a) => optimize(cli, a),
        Command::Consist(a) => consist(cli, a),
        Command::Benchmark(a) => benchmark(cli, a),
        Command::Figure1(a) => figure(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = serde_json::json!({ "error": { "kind": "usage", "message": e.to_string().trim_end() } });
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
