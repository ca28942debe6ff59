//! `pbayes`: interval estimation for hierarchical models with partially
//! specified priors, plus the coverage simulation harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pbayes_cli::io::{load_normal_csv, load_poisson_csv, load_shots_csv, IntervalJson};
use pbayes_cli::shotrates::{results_csv, shotrates_pipeline, PbControls, ShotMethod};
use pbayes_cli::sim::{fig1_csv, fig1_curves, run_simulation, SimulationConfig};
use pbayes_core::binom::{
    map_point_estimate, pb_interval_binom, pl_curve_binom, BinomConfig, BinomData, DeltaPrior,
};
use pbayes_core::normal::{
    eb_interval_known_tau, pb_cpl_known_tau, pb_interval_known_tau, KnownTauConfig, NormalData,
    UnknownTauConfig, UnknownTauInference,
};
use pbayes_core::poisson::{
    mle_lambda1, pb_interval_poisson, pl_curve_poisson, PoissonData, PoissonPriorConfig,
};
use pbayes_core::{im::PlausibilityCurve, Error as CoreError, RandomStream};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser)]
#[command(name = "pbayes", version, about = "Exact interval estimators for partial-prior hierarchical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interval for the first group mean, prior scale known
    NormalKnown(NormalKnownArgs),
    /// Interval for the first group mean, prior scale unknown
    NormalUnknown(NormalUnknownArgs),
    /// Interval for the first Poisson rate under a Gamma partial prior
    Poisson(PoissonArgs),
    /// Interval for the two-sample binomial rate difference
    BinomDiff(BinomArgs),
    /// Coverage/width simulation study from a TOML config
    Simulate(SimulateArgs),
    /// Per-player shot-rate intervals (classical, eb or pb)
    Shotrates(ShotArgs),
    /// Analytic coverage table of the known-scale estimators
    Fig1(Fig1Args),
}

#[derive(Args)]
struct NormalKnownArgs {
    /// One-column CSV with header `x`
    #[arg(long)]
    data: PathBuf,
    /// Known prior standard deviation
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// pb (partial Bayes) or eb (empirical Bayes)
    #[arg(long, default_value = "pb")]
    method: String,
    /// Write the plausibility curve to this CSV file
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct NormalUnknownArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Tempering exponent in (0, 1/2)
    #[arg(long, default_value_t = 1.0 / 3.0)]
    tempering_gamma: f64,
    #[arg(long, default_value_t = 101)]
    omega_grid: usize,
    #[arg(long, default_value_t = 64)]
    quad_nodes: usize,
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct PoissonArgs {
    /// Two-column CSV with header `x,t`; the first row is the target rate
    #[arg(long)]
    data: PathBuf,
    /// Known prior shape
    #[arg(long)]
    shape_s: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Base seed for the Monte-Carlo null distributions
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    mc: usize,
    #[arg(long, default_value_t = 201)]
    grid: usize,
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct BinomArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    y: u64,
    #[arg(long)]
    n: u64,
    /// Beta prior parameters of (delta+1)/2
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    mc: usize,
    #[arg(long, default_value_t = 401)]
    delta_grid: usize,
    #[arg(long, default_value_t = 41)]
    omega_grid: usize,
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,
    /// Report CSV destination (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary destination
    #[arg(long)]
    json: Option<PathBuf>,
    /// Worker threads (overrides config and PBAYES_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ShotArgs {
    /// CSV with header `player,made,attempts`
    #[arg(long)]
    data: PathBuf,
    /// classical, eb or pb
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 0.10)]
    alpha: f64,
    /// Required for the randomized pb method
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 2.0)]
    shape_s: f64,
    #[arg(long, default_value_t = 2000)]
    mc: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Fig1Args {
    /// Range `lo:hi` or comma-separated list of n values
    #[arg(long)]
    n: String,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: msg.into() }
    }
    fn data(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_DATA, message: msg.into() }
    }
    fn numeric(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_NUMERIC, message: msg.into() }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(_) | CoreError::Config(_) => Failure::usage(e.to_string()),
            CoreError::DegenerateData(_) => Failure::data(e.to_string()),
            CoreError::NoInterval(_) | CoreError::Divergence(_) | CoreError::Numeric(_) => {
                Failure::numeric(e.to_string())
            }
        }
    }
}

fn data_err(e: anyhow::Error) -> Failure {
    Failure::data(format!("{e:#}"))
}

fn write_text(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::data(format!("writing {}: {e}", path.display())))
}

fn write_curve(path: &Option<PathBuf>, curve: &PlausibilityCurve) -> Result<(), Failure> {
    if let Some(p) = path {
        write_text(p, &curve.to_csv_string())?;
    }
    Ok(())
}

fn env_threads() -> Option<usize> {
    std::env::var("PBAYES_THREADS").ok().and_then(|v| v.parse().ok())
}

fn main() -> ExitCode {
    if let Some(k) = env_threads() {
        // global pool used by the shot-rate pipeline
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::NormalKnown(a) => normal_known(a),
        Command::NormalUnknown(a) => normal_unknown(a),
        Command::Poisson(a) => poisson(a),
        Command::BinomDiff(a) => binom_diff(a),
        Command::Simulate(a) => simulate(a),
        Command::Shotrates(a) => shotrates(a),
        Command::Fig1(a) => fig1(a),
    }
}

fn normal_known(a: NormalKnownArgs) -> Result<(), Failure> {
    let xs = load_normal_csv(&a.data).map_err(data_err)?;
    let data = NormalData::new(xs, a.sigma)?;
    let cfg = KnownTauConfig::new(a.tau, a.alpha)?;
    let est = match a.method.as_str() {
        "pb" => pb_interval_known_tau(&data, &cfg)?,
        "eb" => eb_interval_known_tau(&data, &cfg)?,
        other => return Err(Failure::usage(format!("unknown method `{other}`"))),
    };
    let point = 0.5 * (est.lower + est.upper);
    if a.curve.is_some() {
        let half = 2.5 * est.width();
        let grid: Vec<f64> = (0..401).map(|i| point - half + 2.0 * half * i as f64 / 400.0).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&mu| pb_cpl_known_tau(&data, &cfg, mu))
            .collect::<Result<_, _>>()?;
        write_curve(&a.curve, &PlausibilityCurve::new(grid, values)?)?;
    }
    println!("{}", IntervalJson::new(&est, "mu1", point, None).to_string_pretty());
    Ok(())
}

fn normal_unknown(a: NormalUnknownArgs) -> Result<(), Failure> {
    let xs = load_normal_csv(&a.data).map_err(data_err)?;
    let data = NormalData::unit_sigma(xs)?;
    let mut cfg = UnknownTauConfig::new(a.alpha)?.with_tempering_gamma(a.tempering_gamma)?;
    cfg.omega_grid_size = a.omega_grid;
    cfg.quadrature_nodes = a.quad_nodes;
    let inf = UnknownTauInference::new(&data, &cfg)?;
    let est = inf.interval()?;
    let point = inf.point_estimate()?;
    if a.curve.is_some() {
        let half = 1.5 * est.width();
        let curve = inf.curve(point - half, point + half, 401)?;
        write_curve(&a.curve, &curve)?;
    }
    println!("{}", IntervalJson::new(&est, "mu1", point, None).to_string_pretty());
    Ok(())
}

fn poisson(a: PoissonArgs) -> Result<(), Failure> {
    let (counts, exposures) = load_poisson_csv(&a.data).map_err(data_err)?;
    let data = PoissonData::new(counts, exposures)?;
    let mut cfg = PoissonPriorConfig::new(a.shape_s, a.alpha)?;
    cfg.mc_count = a.mc;
    cfg.lambda_grid_size = a.grid;
    let stream = RandomStream::new(a.seed);
    let est = pb_interval_poisson(&data, &cfg, &stream)?;
    let point = mle_lambda1(&data, &cfg)?;
    if a.curve.is_some() {
        let lo = (est.lower * 0.5).max(1e-8);
        let hi = est.upper * 2.0;
        let curve = pl_curve_poisson(&data, &cfg, &stream, lo, hi, 201)?;
        write_curve(&a.curve, &curve)?;
    }
    println!("{}", IntervalJson::new(&est, "lambda1", point, Some(a.seed)).to_string_pretty());
    Ok(())
}

fn binom_diff(a: BinomArgs) -> Result<(), Failure> {
    let data = BinomData::new(a.x, a.m, a.y, a.n)?;
    let prior = DeltaPrior::new(a.a, a.b)?;
    let mut cfg = BinomConfig::new(a.alpha)?;
    cfg.mc_count = a.mc;
    cfg.delta_grid_size = a.delta_grid;
    cfg.omega_grid_size = a.omega_grid;
    let stream = RandomStream::new(a.seed);
    let est = pb_interval_binom(&data, &prior, &cfg, &stream)?;
    let point = map_point_estimate(&data, &prior, &cfg)?;
    if a.curve.is_some() {
        let curve = pl_curve_binom(&data, &prior, &cfg, &stream)?;
        write_curve(&a.curve, &curve)?;
    }
    println!("{}", IntervalJson::new(&est, "delta", point, Some(a.seed)).to_string_pretty());
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Failure::data(format!("reading {}: {e}", a.config.display())))?;
    let mut cfg = SimulationConfig::from_toml(&text).map_err(|e| Failure::usage(format!("{e:#}")))?;
    if let Some(t) = a.threads.or_else(env_threads) {
        cfg.threads = Some(t);
    }
    let report = run_simulation(&cfg).map_err(|e| Failure::numeric(format!("{e:#}")))?;
    for flag in &report.flags {
        eprintln!("warning: {flag}");
    }
    let csv = report.to_csv();
    match &a.out {
        Some(p) => write_text(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = &a.json {
        write_text(p, &report.to_json_summary())?;
    }
    Ok(())
}

fn shotrates(a: ShotArgs) -> Result<(), Failure> {
    let records = load_shots_csv(&a.data).map_err(data_err)?;
    let method = ShotMethod::parse(&a.method).map_err(|e| Failure::usage(e.to_string()))?;
    if method.needs_seed() && a.seed.is_none() {
        return Err(Failure::usage("--seed is required for the randomized pb method"));
    }
    if records.len() < 2 && !matches!(method, ShotMethod::Classical) {
        return Err(Failure::data("pooled methods need at least two records".to_string()));
    }
    let controls = PbControls { shape_s: a.shape_s, mc_count: a.mc, ..Default::default() };
    let results = shotrates_pipeline(&records, method, a.alpha, a.seed, controls)
        .map_err(|e| Failure::numeric(format!("{e:#}")))?;
    let csv = results_csv(&results);
    match &a.out {
        Some(p) => write_text(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn parse_n_spec(spec: &str) -> Result<Vec<u64>, Failure> {
    if let Some((lo, hi)) = spec.split_once(':') {
        let lo: u64 = lo.trim().parse().map_err(|_| Failure::usage("bad n range"))?;
        let hi: u64 = hi.trim().parse().map_err(|_| Failure::usage("bad n range"))?;
        if lo < 1 || hi < lo {
            return Err(Failure::usage("n range must satisfy 1 <= lo <= hi"));
        }
        Ok((lo..=hi).collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| Failure::usage("bad n list")))
            .collect()
    }
}

fn fig1(a: Fig1Args) -> Result<(), Failure> {
    let ns = parse_n_spec(&a.n)?;
    let rows = fig1_curves(&ns, a.tau, a.sigma, a.alpha)
        .map_err(|e| Failure::usage(format!("{e:#}")))?;
    print!("{}", fig1_csv(&rows));
    Ok(())
}
