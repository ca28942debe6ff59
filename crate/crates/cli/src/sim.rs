//! Joint-distribution coverage/width simulation runner.
//!
//! Each replication draws the parameters from the partial-prior truth, draws
//! data, runs every requested estimator, and records whether the target
//! parameter was covered together with the interval width. Replication `r`
//! always uses substream `r` of the base seed, and aggregation walks the
//! collected per-replication results in index order with compensated sums,
//! so reports are bit-identical for any thread count.

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Deserialize;

use pbayes_core::binom::{pb_interval_binom_cached, BinomConfig, BinomData, DeltaPrior, MapCache};
use pbayes_core::dist::{discrete_quantile, DiscreteKind};
use pbayes_core::normal::{
    eb_coverage_analytic, eb_interval_known_tau, naive_eb_interval_unknown_tau,
    optimal_interval_conjugate, pb_interval_known_tau, pb_interval_unknown_tau,
    KnownTauConfig, NormalData, UnknownTauConfig,
};
use pbayes_core::poisson::{
    eb_gamma_prior_interval, pb_interval_poisson_cached, MleCache, PoissonData,
    PoissonPriorConfig,
};
use pbayes_core::{IntervalEstimate, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NormalKnownTau,
    NormalUnknownTau,
    Poisson,
    BinomDiff,
}

impl ModelKind {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "normal-known-tau" => ModelKind::NormalKnownTau,
            "normal-unknown-tau" => ModelKind::NormalUnknownTau,
            "poisson" => ModelKind::Poisson,
            "binom-diff" => ModelKind::BinomDiff,
            other => bail!("unknown model: {other}"),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::NormalKnownTau => "normal-known-tau",
            ModelKind::NormalUnknownTau => "normal-unknown-tau",
            ModelKind::Poisson => "poisson",
            ModelKind::BinomDiff => "binom-diff",
        }
    }

    fn methods(&self) -> &'static [&'static str] {
        match self {
            ModelKind::NormalKnownTau => &["pb", "eb", "oracle"],
            ModelKind::NormalUnknownTau => &["pb", "naive-eb"],
            ModelKind::Poisson => &["pb", "eb"],
            ModelKind::BinomDiff => &["pb"],
        }
    }
}

/// Truth (data-generating) parameters; which fields matter depends on the
/// model.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthParams {
    pub mu: f64,
    pub tau: f64,
    pub sigma: f64,
    /// Stress mode: redraw mu ~ Unif(-5, 5) each replication instead of
    /// holding it fixed (validity is claimed for every hyper-prior).
    pub randomize_mu: bool,
    pub shape_s: f64,
    pub scale_gamma: f64,
    pub prior_a: f64,
    pub prior_b: f64,
}

impl Default for TruthParams {
    fn default() -> Self {
        TruthParams {
            mu: 0.0,
            tau: 1.0,
            sigma: 1.0,
            randomize_mu: false,
            shape_s: 2.0,
            scale_gamma: 1.0,
            prior_a: 2.0,
            prior_b: 2.0,
        }
    }
}

/// Estimator engine knobs.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineParams {
    pub mc_count: usize,
    pub lambda_grid: usize,
    pub quadrature_nodes: usize,
    pub tempering_gamma: f64,
    pub omega_grid: usize,
    pub delta_grid: usize,
    pub binom_omega_grid: usize,
    pub binom_mc_count: usize,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            mc_count: 2000,
            lambda_grid: 101,
            quadrature_nodes: 64,
            tempering_gamma: 1.0 / 3.0,
            omega_grid: 101,
            delta_grid: 401,
            binom_omega_grid: 41,
            binom_mc_count: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub model: ModelKind,
    pub methods: Vec<String>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub alpha: f64,
    pub base_seed: u64,
    pub threads: Option<usize>,
    pub truth: TruthParams,
    pub engine: EngineParams,
}

/// TOML shape of a simulation config file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: String,
    methods: Vec<String>,
    sample_sizes: Vec<usize>,
    replications: usize,
    alpha: f64,
    seed: u64,
    threads: Option<usize>,
    #[serde(default)]
    truth: TruthParams,
    #[serde(default)]
    engine: EngineParams,
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let raw: RawConfig = toml::from_str(text).context("parsing simulation config")?;
        let cfg = SimulationConfig {
            model: ModelKind::parse(&raw.model)?,
            methods: raw.methods,
            sample_sizes: raw.sample_sizes,
            replications: raw.replications,
            alpha: raw.alpha,
            base_seed: raw.seed,
            threads: raw.threads,
            truth: raw.truth,
            engine: raw.engine,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.replications < 100 {
            bail!("replications must be at least 100");
        }
        if self.sample_sizes.is_empty() {
            bail!("sample_sizes must be nonempty");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must be in (0,1)");
        }
        if self.methods.is_empty() {
            bail!("methods must be nonempty");
        }
        for m in &self.methods {
            if !self.model.methods().contains(&m.as_str()) {
                bail!(
                    "method `{m}` not available for model `{}` (available: {:?})",
                    self.model.name(),
                    self.model.methods()
                );
            }
        }
        Ok(())
    }
}

/// One aggregated report row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub n: usize,
    pub method: String,
    pub coverage: f64,
    pub mean_width: f64,
    pub mc_se: f64,
    pub reps: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationReport {
    pub rows: Vec<ReportRow>,
    /// Raised when a (n, method) cell had more than 1% failed replications.
    pub flags: Vec<String>,
}

impl SimulationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,n,method,coverage,mean_width,mc_se,reps,failures\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.model, r.n, r.method, r.coverage, r.mean_width, r.mc_se, r.reps, r.failures
            ));
        }
        out
    }

    pub fn to_json_summary(&self) -> String {
        #[derive(serde::Serialize)]
        struct Row<'a> {
            model: &'a str,
            n: usize,
            method: &'a str,
            coverage: f64,
            mean_width: f64,
            mc_se: f64,
            reps: usize,
            failures: usize,
        }
        #[derive(serde::Serialize)]
        struct Summary<'a> {
            rows: Vec<Row<'a>>,
            flags: &'a [String],
        }
        let rows = self
            .rows
            .iter()
            .map(|r| Row {
                model: &r.model,
                n: r.n,
                method: &r.method,
                coverage: r.coverage,
                mean_width: r.mean_width,
                mc_se: r.mc_se,
                reps: r.reps,
                failures: r.failures,
            })
            .collect();
        serde_json::to_string_pretty(&Summary { rows, flags: &self.flags })
            .expect("report serialization")
    }

    pub fn row(&self, n: usize, method: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.n == n && r.method == method)
    }
}

/// Per-replication, per-method outcome.
type Outcome = Result<(bool, f64), String>;

fn outcome(target: f64, est: Result<IntervalEstimate, pbayes_core::Error>) -> Outcome {
    match est {
        Ok(e) => Ok((e.contains(target), e.width())),
        Err(err) => Err(err.to_string()),
    }
}

/// Shared per-(model, n) solver caches.
enum Caches {
    None,
    Poisson(MleCache),
    Binom(MapCache),
}

fn run_replication(
    cfg: &SimulationConfig,
    n: usize,
    rep_stream: &RandomStream,
    caches: &Caches,
) -> Vec<Outcome> {
    let t = &cfg.truth;
    let alpha = cfg.alpha;
    match cfg.model {
        ModelKind::NormalKnownTau | ModelKind::NormalUnknownTau => {
            let mut d = rep_stream.substream(0).draws();
            let mu = if t.randomize_mu { -5.0 + 10.0 * d.uniform() } else { t.mu };
            let mut mu1 = 0.0;
            let xs: Vec<f64> = (0..n)
                .map(|i| {
                    let mi = mu + t.tau * d.standard_normal();
                    if i == 0 {
                        mu1 = mi;
                    }
                    mi + t.sigma * d.standard_normal()
                })
                .collect();
            let data = match NormalData::new(xs, t.sigma) {
                Ok(d) => d,
                Err(e) => return vec![Err(e.to_string()); cfg.methods.len()],
            };
            cfg.methods
                .iter()
                .map(|m| match (cfg.model, m.as_str()) {
                    (ModelKind::NormalKnownTau, "pb") => {
                        let kcfg = KnownTauConfig::new(t.tau, alpha).unwrap();
                        outcome(mu1, pb_interval_known_tau(&data, &kcfg))
                    }
                    (ModelKind::NormalKnownTau, "eb") => {
                        let kcfg = KnownTauConfig::new(t.tau, alpha).unwrap();
                        outcome(mu1, eb_interval_known_tau(&data, &kcfg))
                    }
                    (ModelKind::NormalKnownTau, "oracle") => {
                        let kcfg = KnownTauConfig::new(t.tau, alpha).unwrap();
                        outcome(mu1, optimal_interval_conjugate(&data, &kcfg, (mu, 0.0)))
                    }
                    (ModelKind::NormalUnknownTau, "pb") => {
                        let ucfg = unknown_tau_config(cfg);
                        outcome(mu1, pb_interval_unknown_tau(&data, &ucfg))
                    }
                    (ModelKind::NormalUnknownTau, "naive-eb") => {
                        outcome(mu1, naive_eb_interval_unknown_tau(&data, alpha))
                    }
                    _ => Err(format!("method {m} unavailable")),
                })
                .collect()
        }
        ModelKind::Poisson => {
            let mut d = rep_stream.substream(0).draws();
            let lambdas: Vec<f64> =
                (0..n).map(|_| t.scale_gamma * d.gamma(t.shape_s)).collect();
            let lambda1 = lambdas[0];
            let counts: Result<Vec<u64>, _> = lambdas
                .iter()
                .map(|&l| {
                    let u = d.uniform();
                    discrete_quantile(DiscreteKind::Poisson { mean: l }, u)
                })
                .collect();
            let counts = match counts {
                Ok(c) => c,
                Err(e) => return vec![Err(e.to_string()); cfg.methods.len()],
            };
            let data = PoissonData::with_unit_exposures(counts).unwrap();
            let mut pcfg = PoissonPriorConfig::new(t.shape_s, alpha).unwrap();
            pcfg.mc_count = cfg.engine.mc_count;
            pcfg.lambda_grid_size = cfg.engine.lambda_grid;
            pcfg.quadrature_nodes = cfg.engine.quadrature_nodes;
            cfg.methods
                .iter()
                .map(|m| match m.as_str() {
                    "pb" => {
                        let mc_stream = rep_stream.substream(1);
                        let cache = match caches {
                            Caches::Poisson(c) => c,
                            _ => unreachable!("poisson cache"),
                        };
                        outcome(
                            lambda1,
                            pb_interval_poisson_cached(&data, &pcfg, &mc_stream, cache),
                        )
                    }
                    "eb" => outcome(lambda1, eb_gamma_prior_interval(&data, &pcfg, alpha)),
                    _ => Err(format!("method {m} unavailable")),
                })
                .collect()
        }
        ModelKind::BinomDiff => {
            let mut d = rep_stream.substream(0).draws();
            let prior = DeltaPrior::new(t.prior_a, t.prior_b).unwrap();
            let delta = 2.0 * d.beta(t.prior_a, t.prior_b) - 1.0;
            let omega = -1.0 + 2.0 * d.uniform();
            let spread = (1.0 - delta.abs()) * omega;
            let p1 = 0.5 * (1.0 + delta + spread);
            let p2 = 0.5 * (1.0 - delta + spread);
            let m = n as u64;
            let draw_count = |size: u64, p: f64, u: f64| {
                discrete_quantile(
                    DiscreteKind::Binomial { size: size as u32, prob: p.clamp(0.0, 1.0) },
                    u,
                )
            };
            let u1 = d.uniform();
            let u2 = d.uniform();
            let (x, y) = match (draw_count(m, p1, u1), draw_count(m, p2, u2)) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => {
                    return vec![Err(e.to_string()); cfg.methods.len()]
                }
            };
            let data = BinomData::new(x, m, y, m).unwrap();
            let mut bcfg = BinomConfig::new(alpha).unwrap();
            bcfg.delta_grid_size = cfg.engine.delta_grid;
            bcfg.omega_grid_size = cfg.engine.binom_omega_grid;
            bcfg.mc_count = cfg.engine.binom_mc_count;
            cfg.methods
                .iter()
                .map(|mth| match mth.as_str() {
                    "pb" => {
                        let mc_stream = rep_stream.substream(1);
                        let cache = match caches {
                            Caches::Binom(c) => c,
                            _ => unreachable!("binom cache"),
                        };
                        outcome(
                            delta,
                            pb_interval_binom_cached(&data, &prior, &bcfg, &mc_stream, cache),
                        )
                    }
                    _ => Err(format!("method {mth} unavailable")),
                })
                .collect()
        }
    }
}

fn unknown_tau_config(cfg: &SimulationConfig) -> UnknownTauConfig {
    let mut u = UnknownTauConfig::new(cfg.alpha).unwrap();
    u = u.with_tempering_gamma(cfg.engine.tempering_gamma).unwrap();
    u.omega_grid_size = cfg.engine.omega_grid;
    u.quadrature_nodes = cfg.engine.quadrature_nodes;
    u
}

/// Run the configured study. Deterministic for a fixed `base_seed`
/// regardless of thread count.
pub fn run_simulation(cfg: &SimulationConfig) -> anyhow::Result<SimulationReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .context("building thread pool")?;
    let root = RandomStream::new(cfg.base_seed);
    let mut report = SimulationReport::default();
    for &n in &cfg.sample_sizes {
        let caches = match cfg.model {
            ModelKind::Poisson => Caches::Poisson(MleCache::new()),
            ModelKind::BinomDiff => Caches::Binom(MapCache::new()),
            _ => Caches::None,
        };
        let n_stream = root.substream(n as u64);
        let outcomes: Vec<Vec<Outcome>> = pool.install(|| {
            (0..cfg.replications)
                .into_par_iter()
                .map(|r| run_replication(cfg, n, &n_stream.substream(r as u64), &caches))
                .collect()
        });
        for (mi, method) in cfg.methods.iter().enumerate() {
            let mut hits = 0usize;
            let mut ok = 0usize;
            let mut failures = 0usize;
            // Neumaier compensated sum of widths in replication order
            let mut width_sum = 0.0f64;
            let mut width_c = 0.0f64;
            for rep in &outcomes {
                match &rep[mi] {
                    Ok((covered, width)) => {
                        ok += 1;
                        if *covered {
                            hits += 1;
                        }
                        let t = width_sum + width;
                        width_c += if width_sum.abs() >= width.abs() {
                            (width_sum - t) + width
                        } else {
                            (width - t) + width_sum
                        };
                        width_sum = t;
                    }
                    Err(_) => failures += 1,
                }
            }
            let coverage = if ok > 0 { hits as f64 / ok as f64 } else { f64::NAN };
            let mean_width = if ok > 0 { (width_sum + width_c) / ok as f64 } else { f64::NAN };
            let mc_se = if ok > 0 {
                (coverage * (1.0 - coverage) / ok as f64).sqrt().max(f64::MIN_POSITIVE)
            } else {
                f64::NAN
            };
            if failures * 100 > cfg.replications {
                report.flags.push(format!(
                    "{} n={} method={}: {} of {} replications failed",
                    cfg.model.name(),
                    n,
                    method,
                    failures,
                    cfg.replications
                ));
            }
            report.rows.push(ReportRow {
                model: cfg.model.name().to_string(),
                n,
                method: method.clone(),
                coverage,
                mean_width,
                mc_se,
                reps: ok,
                failures,
            });
        }
    }
    Ok(report)
}

/// One row of the analytic coverage table: empirical-Bayes coverage from the
/// exact Gaussian formula, partial-Bayes coverage identically `1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1Row {
    pub n: u64,
    pub eb_coverage: f64,
    pub pb_coverage: f64,
}

/// Analytic coverage curves of the known-tau estimators as a function of n.
pub fn fig1_curves(n_values: &[u64], tau: f64, sigma: f64, alpha: f64) -> anyhow::Result<Vec<Fig1Row>> {
    if n_values.is_empty() {
        bail!("n range must be nonempty");
    }
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let eb = eb_coverage_analytic(n, tau, sigma, alpha)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        rows.push(Fig1Row { n, eb_coverage: eb, pb_coverage: 1.0 - alpha });
    }
    Ok(rows)
}

pub fn fig1_csv(rows: &[Fig1Row]) -> String {
    let mut out = String::from("n,eb_coverage,pb_coverage\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.n, r.eb_coverage, r.pb_coverage));
    }
    out
}
