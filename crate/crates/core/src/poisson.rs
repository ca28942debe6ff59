//! Partial Bayes inference for the first rate in the Poisson hierarchical
//! model `X_i | lambda_i ~ Pois(lambda_i t_i)`, `lambda_i ~ gamma * Gamma(s)`
//! with known shape `s` and unknown scale, plus the classical and
//! empirical-Bayes rate intervals.
//!
//! The association statistic is the likelihood-ratio value
//! `b(x, lambda_1) = ell(hat lambda_1; x) - ell(lambda_1; x)`, where `ell`
//! is the marginal log likelihood after integrating the scale's auxiliary
//! variable out. Its null distribution `G_lambda` has no closed form and is
//! realized by Monte Carlo with common random numbers across the lambda grid.
//!
//! For equal exposures the log likelihood depends on the counts only through
//! `(x_1, sum of the rest)`, so Monte-Carlo replicates collapse onto a small
//! set of sufficient-statistic keys whose inner MLE solves are memoized.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::im::{ecdf_build, EmpiricalCdf, IntervalEstimate};
use crate::math;
use crate::special::{gamma_quantile, gauss_legendre, ln_gamma};
use crate::stream::RandomStream;
use crate::{dist, Error, Result};

/// Floor used for boundary maximum-likelihood estimates at zero counts.
pub const LAMBDA_FLOOR: f64 = 1e-8;

/// Counts and exposures.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonData {
    counts: Vec<u64>,
    exposures: Vec<f64>,
}

impl PoissonData {
    pub fn new(counts: Vec<u64>, exposures: Vec<f64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::DegenerateData("need at least one count".to_string()));
        }
        if counts.len() != exposures.len() {
            return Err(Error::DegenerateData(
                "counts and exposures must have equal length".to_string(),
            ));
        }
        if exposures.iter().any(|t| !(t > &0.0) || !t.is_finite()) {
            return Err(Error::Domain("exposures must be positive reals"));
        }
        Ok(PoissonData { counts, exposures })
    }

    /// Unit exposures.
    pub fn with_unit_exposures(counts: Vec<u64>) -> Result<Self> {
        let n = counts.len();
        PoissonData::new(counts, alloc::vec![1.0; n])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn exposures(&self) -> &[f64] {
        &self.exposures
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Known prior shape plus Monte-Carlo controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonPriorConfig {
    pub shape_s: f64,
    pub alpha: f64,
    /// Monte-Carlo replicates behind each empirical null CDF.
    pub mc_count: usize,
    /// Points of the (log-spaced) lambda grid used for inversion.
    pub lambda_grid_size: usize,
    pub quadrature_nodes: usize,
}

impl PoissonPriorConfig {
    pub fn new(shape_s: f64, alpha: f64) -> Result<Self> {
        if !(shape_s > 0.0) || !shape_s.is_finite() {
            return Err(Error::Domain("prior shape must be a positive real"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain("alpha must be in (0,1)"));
        }
        Ok(PoissonPriorConfig {
            shape_s,
            alpha,
            mc_count: 5000,
            lambda_grid_size: 201,
            quadrature_nodes: 64,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape_s > 0.0) || !self.shape_s.is_finite() {
            return Err(Error::Domain("prior shape must be a positive real"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain("alpha must be in (0,1)"));
        }
        if self.mc_count < 10 {
            return Err(Error::Config("mc_count must be at least 10"));
        }
        if self.lambda_grid_size < 11 {
            return Err(Error::Config("lambda grid needs at least 11 points"));
        }
        if self.quadrature_nodes < 8 {
            return Err(Error::Config("quadrature needs at least 8 nodes"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Marginal log likelihood.
// ---------------------------------------------------------------------------

/// Exposure group: observations 2..n sharing the same `t`.
#[derive(Debug, Clone)]
struct Group {
    t: f64,
    size: f64,
}

/// Sufficient statistics of a dataset for the lambda-dependent part of the
/// log likelihood: `x_1` plus the per-exposure-group count sums.
type Key = (u64, Vec<u64>);

/// Memo of `(lambda_hat, core at lambda_hat)` per key.
pub trait MleMemo {
    fn get(&self, key: &Key) -> Option<(f64, f64)>;
    fn put(&self, key: Key, val: (f64, f64));
}

/// Single-threaded memo used by the standalone operations.
struct LocalMemo(RefCell<alloc::collections::BTreeMap<Key, (f64, f64)>>);

impl MleMemo for LocalMemo {
    fn get(&self, key: &Key) -> Option<(f64, f64)> {
        self.0.borrow().get(key).copied()
    }
    fn put(&self, key: Key, val: (f64, f64)) {
        self.0.borrow_mut().insert(key, val);
    }
}

/// Thread-shareable memo for simulation studies. Values are deterministic
/// functions of the key, so concurrent duplicate inserts are harmless.
#[cfg(feature = "std")]
pub struct MleCache(std::sync::RwLock<alloc::collections::BTreeMap<Key, (f64, f64)>>);

#[cfg(feature = "std")]
impl MleCache {
    pub fn new() -> Self {
        MleCache(std::sync::RwLock::new(alloc::collections::BTreeMap::new()))
    }
}

#[cfg(feature = "std")]
impl Default for MleCache {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(feature = "std")]
impl MleMemo for MleCache {
    fn get(&self, key: &Key) -> Option<(f64, f64)> {
        self.0.read().unwrap().get(key).copied()
    }
    fn put(&self, key: Key, val: (f64, f64)) {
        self.0.write().unwrap().insert(key, val);
    }
}

/// Evaluator of the marginal log likelihood for a fixed exposure template.
struct MarginalSolver {
    s: f64,
    t1: f64,
    groups: Vec<Group>,
    /// v-exponent of the mixing integral: n s - 1.
    c_pow: f64,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

impl MarginalSolver {
    fn new(template: &PoissonData, cfg: &PoissonPriorConfig) -> Self {
        // Group the exposures of observations 2..n by exact value; group
        // order is canonical (sorted by bit pattern) so keys are stable.
        let mut ts: Vec<f64> = template.exposures[1..].to_vec();
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup();
        let groups = ts
            .iter()
            .map(|&t| Group {
                t,
                size: template.exposures[1..].iter().filter(|&&u| u == t).count() as f64,
            })
            .collect::<Vec<_>>();
        let n = template.len() as f64;
        let (gl_nodes, gl_weights) = gauss_legendre(cfg.quadrature_nodes);
        MarginalSolver {
            s: cfg.shape_s,
            t1: template.exposures[0],
            groups,
            c_pow: n * cfg.shape_s - 1.0,
            gl_nodes,
            gl_weights,
        }
    }

    fn group_index(&self, t: f64) -> usize {
        self.groups.iter().position(|g| g.t == t).expect("exposure from template")
    }

    /// Key of a dataset laid out like the template.
    fn key(&self, counts: &[u64], exposures: &[f64]) -> Key {
        let mut sums = alloc::vec![0u64; self.groups.len()];
        for (x, t) in counts[1..].iter().zip(&exposures[1..]) {
            sums[self.group_index(*t)] += x;
        }
        (counts[0], sums)
    }

    /// Log of the mixing integral
    /// `int_0^inf v^{ns-1} e^{-v} prod_g (v + lambda t_g)^{-A_g} dv`
    /// plus, when requested, the derivative of that log with respect to
    /// lambda. Computed by Gauss–Legendre in w = ln v on a window around the
    /// (unique) mode of the strictly concave exponent.
    fn log_integral(&self, sums: &[u64], lam: f64, with_grad: bool) -> (f64, f64) {
        if self.groups.is_empty() {
            return (ln_gamma(self.s), 0.0);
        }
        let coef: Vec<(f64, f64)> = self
            .groups
            .iter()
            .zip(sums)
            .map(|(g, &sg)| (g.t * lam, self.s * g.size + sg as f64))
            .collect();
        let cp1 = self.c_pow + 1.0; // = n s > 0
        let g1 = |w: f64| -> f64 {
            let v = math::exp(w);
            let mut acc = cp1 - v;
            for &(lt, a) in &coef {
                acc -= a * v / (v + lt);
            }
            acc
        };
        // The exponent G(w) = cp1 w - e^w - sum_g A_g ln(e^w + lam t_g) is
        // strictly concave; bracket the root of G' and bisect + polish.
        let mut w_lo = math::ln(cp1) - 1.0;
        let mut w_hi = w_lo + 2.0;
        while g1(w_lo) <= 0.0 {
            w_lo -= 2.0;
        }
        while g1(w_hi) >= 0.0 {
            w_hi += 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (w_lo + w_hi);
            if g1(mid) > 0.0 {
                w_lo = mid;
            } else {
                w_hi = mid;
            }
        }
        let w_star = 0.5 * (w_lo + w_hi);
        let g_at = |w: f64| -> f64 {
            let v = math::exp(w);
            let mut acc = cp1 * w - v;
            for &(lt, a) in &coef {
                acc -= a * math::ln(v + lt);
            }
            acc
        };
        let g_star = g_at(w_star);
        // curvature at the mode -> initial half-width, then expand until the
        // exponent has dropped by 45 on each side.
        let v_star = math::exp(w_star);
        let mut curv = v_star;
        for &(lt, a) in &coef {
            curv += a * v_star * lt / ((v_star + lt) * (v_star + lt));
        }
        let sigma_w = 1.0 / math::sqrt(curv.max(1e-300));
        const DROP: f64 = 45.0;
        let mut lo = w_star - sigma_w * math::sqrt(2.0 * DROP);
        let mut hi = w_star + sigma_w * math::sqrt(2.0 * DROP);
        while g_at(lo) > g_star - DROP {
            lo = w_star - (w_star - lo) * 1.5;
        }
        while g_at(hi) > g_star - DROP {
            hi = w_star + (hi - w_star) * 1.5;
        }
        let hw = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut den = 0.0;
        let mut num = 0.0;
        for (xk, wk) in self.gl_nodes.iter().zip(&self.gl_weights) {
            let w = mid + hw * xk;
            let e = math::exp(g_at(w) - g_star);
            den += wk * e;
            if with_grad {
                let v = math::exp(w);
                let mut d = 0.0;
                for &(lt, a) in &coef {
                    // d/dlam [-A ln(v + lam t)] = -A t / (v + lam t)
                    d -= a * (lt / lam) / (v + lt);
                }
                num += wk * e * d;
            }
        }
        let log_int = g_star + math::ln(den * hw);
        let grad = if with_grad { num / den } else { 0.0 };
        (log_int, grad)
    }

    /// Lambda-dependent part of the log likelihood (constants dropped).
    fn core(&self, key: &Key, lam: f64) -> f64 {
        let (x1, sums) = key;
        let sum_rest: u64 = sums.iter().sum();
        let (log_int, _) = self.log_integral(sums, lam, false);
        let mut acc = *x1 as f64 * math::ln(lam) - lam * self.t1 + sum_rest as f64 * math::ln(lam);
        for (g, &sg) in self.groups.iter().zip(sums) {
            acc += sg as f64 * math::ln(g.t);
        }
        acc + log_int
    }

    /// d core / d lambda.
    fn core_grad(&self, key: &Key, lam: f64) -> f64 {
        let (x1, sums) = key;
        let sum_rest: u64 = sums.iter().sum();
        let (_, grad) = self.log_integral(sums, lam, true);
        (*x1 as f64 + sum_rest as f64) / lam - self.t1 + grad
    }

    /// Maximizer of `core` over lambda > 0 (floored at [`LAMBDA_FLOOR`]),
    /// with the core value at the maximizer.
    fn mle(&self, key: &Key) -> Result<(f64, f64)> {
        let f = |c: f64| self.core(key, math::exp(c));
        // Probe a log-spaced range around the crude rate estimate.
        let crude = ((key.0 as f64).max(0.25) / self.t1).max(LAMBDA_FLOOR * 2.0);
        let mut lo_c = math::ln(crude) - 7.0;
        let mut hi_c = math::ln(crude) + 4.0;
        lo_c = lo_c.max(math::ln(LAMBDA_FLOOR));
        const PROBES: usize = 28;
        let mut best;
        let mut best_i = 0;
        let probe_at = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * i as f64 / (PROBES - 1) as f64;
        let mut iter_guard = 0;
        loop {
            best = (f64::NEG_INFINITY, 0.0);
            for i in 0..PROBES {
                let c = probe_at(i, lo_c, hi_c);
                let v = f(c);
                if v > best.0 {
                    best = (v, c);
                    best_i = i;
                }
            }
            if best_i == PROBES - 1 {
                hi_c += 4.0;
            } else if best_i == 0 && lo_c > math::ln(LAMBDA_FLOOR) + 1e-9 {
                lo_c = (lo_c - 5.0).max(math::ln(LAMBDA_FLOOR));
            } else {
                break;
            }
            iter_guard += 1;
            if iter_guard > 200 {
                return Err(Error::Numeric("rate MLE bracketing failed".to_string()));
            }
        }
        if best_i == 0 {
            // monotone decreasing from the floor: boundary estimate
            let lam = LAMBDA_FLOOR;
            return Ok((lam, self.core(key, lam)));
        }
        let a = probe_at(best_i - 1, lo_c, hi_c);
        let b = best.1;
        let c = probe_at(best_i + 1, lo_c, hi_c);
        let (mut c_hat, _) = brent_max(&f, a, b, c, 1e-11);
        // Polish on the analytic gradient: bisect d core/d lambda over a
        // bracket around the Brent answer when it changes sign there.
        let mut lam_lo = math::exp(c_hat) / 1.5;
        let mut lam_hi = math::exp(c_hat) * 1.5;
        let g_lo = self.core_grad(key, lam_lo);
        let g_hi = self.core_grad(key, lam_hi);
        if g_lo > 0.0 && g_hi < 0.0 {
            for _ in 0..80 {
                let mid = 0.5 * (lam_lo + lam_hi);
                if self.core_grad(key, mid) > 0.0 {
                    lam_lo = mid;
                } else {
                    lam_hi = mid;
                }
            }
            c_hat = math::ln(0.5 * (lam_lo + lam_hi));
        }
        let lam = math::exp(c_hat).max(LAMBDA_FLOOR);
        Ok((lam, self.core(key, lam)))
    }

    fn mle_cached(&self, key: Key, memo: &dyn MleMemo) -> Result<(f64, f64)> {
        if let Some(hit) = memo.get(&key) {
            return Ok(hit);
        }
        let val = self.mle(&key)?;
        memo.put(key, val);
        Ok(val)
    }

    /// Count-independent constants: `sum lnGamma(x_i + s) - n lnGamma(s)`.
    fn constants(&self, counts: &[u64]) -> f64 {
        let mut acc = -(counts.len() as f64) * ln_gamma(self.s);
        for &x in &counts[1..] {
            acc += ln_gamma(x as f64 + self.s);
        }
        acc
    }
}

/// Brent maximization of `f` given a bracketing triple `a < b < c` with
/// `f(b) >= f(a), f(c)`.
fn brent_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, c: f64, tol: f64) -> (f64, f64) {
    const GOLD: f64 = 0.3819660112501051;
    let (mut lo, mut hi) = (a.min(c), a.max(c));
    let mut x = b;
    let mut w = b;
    let mut v = b;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        let tol1 = tol * math::abs(x) + 1e-300;
        let tol2 = 2.0 * tol1;
        if math::abs(x - mid) <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut use_golden = true;
        if math::abs(e) > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = math::abs(q);
            let e_old = e;
            e = d;
            if math::abs(p) < math::abs(0.5 * q * e_old) && p > q * (lo - x) && p < q * (hi - x) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = math::copysign(tol1, mid - x);
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x >= mid { lo - x } else { hi - x };
            d = GOLD * e;
        }
        let u = if math::abs(d) >= tol1 { x + d } else { x + math::copysign(tol1, d) };
        let fu = f(u);
        if fu >= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu >= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu >= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

// ---------------------------------------------------------------------------
// Public operations.
// ---------------------------------------------------------------------------

/// Marginal log likelihood of `lambda_1` given the data, up to an additive
/// constant free of `lambda_1`.
pub fn marginal_loglik_lambda1(
    data: &PoissonData,
    cfg: &PoissonPriorConfig,
    lambda1: f64,
) -> Result<f64> {
    cfg.validate()?;
    if !(lambda1 > 0.0) || !lambda1.is_finite() {
        return Err(Error::Domain("lambda1 must be a positive real"));
    }
    let solver = MarginalSolver::new(data, cfg);
    let key = solver.key(&data.counts, &data.exposures);
    Ok(solver.core(&key, lambda1) + solver.constants(&data.counts))
}

/// Maximizer of the marginal log likelihood over `lambda_1 > 0`; zero-count
/// boundary cases return [`LAMBDA_FLOOR`].
pub fn mle_lambda1(data: &PoissonData, cfg: &PoissonPriorConfig) -> Result<f64> {
    cfg.validate()?;
    let solver = MarginalSolver::new(data, cfg);
    let key = solver.key(&data.counts, &data.exposures);
    Ok(solver.mle(&key)?.0)
}

/// Likelihood-ratio association `ell(hat lambda; x) - ell(lambda_1; x) >= 0`.
pub fn b_statistic_poisson(
    data: &PoissonData,
    cfg: &PoissonPriorConfig,
    lambda1: f64,
) -> Result<f64> {
    cfg.validate()?;
    if !(lambda1 > 0.0) || !lambda1.is_finite() {
        return Err(Error::Domain("lambda1 must be a positive real"));
    }
    let solver = MarginalSolver::new(data, cfg);
    let key = solver.key(&data.counts, &data.exposures);
    let (_, core_hat) = solver.mle(&key)?;
    Ok((core_hat - solver.core(&key, lambda1)).max(0.0))
}

/// One common-random-numbers block: the auxiliary uniforms and gamma draws
/// of a single Monte-Carlo replicate, reused at every lambda grid point.
struct AuxBlock {
    uniforms: Vec<f64>,
    gammas: Vec<f64>,
}

fn draw_blocks(n: usize, s: f64, count: usize, stream: &RandomStream) -> Vec<AuxBlock> {
    (0..count)
        .map(|j| {
            let mut d = stream.substream(j as u64).draws();
            let uniforms: Vec<f64> = (0..n).map(|_| d.uniform()).collect();
            let gammas: Vec<f64> = (0..n).map(|_| d.gamma(s)).collect();
            AuxBlock { uniforms, gammas }
        })
        .collect()
}

/// Simulate the counts of one replicate at rate `lambda`.
fn simulate_counts(block: &AuxBlock, lambda: f64, exposures: &[f64]) -> Result<Vec<u64>> {
    let v1 = block.gammas[0];
    let mut counts = Vec::with_capacity(exposures.len());
    for (i, &t) in exposures.iter().enumerate() {
        let mean = lambda * t * block.gammas[i] / v1;
        let x = dist::discrete_quantile(dist::DiscreteKind::Poisson { mean }, block.uniforms[i])?;
        counts.push(x);
    }
    Ok(counts)
}

/// Monte-Carlo sample of the auxiliary statistic `W_b(lambda_1)` as an
/// empirical CDF: `mc_count` replicates of (simulate counts at `lambda_1`,
/// refit, evaluate the likelihood ratio at `lambda_1`).
pub fn wb_sample_poisson(
    lambda1: f64,
    template: &PoissonData,
    cfg: &PoissonPriorConfig,
    stream: &RandomStream,
) -> Result<EmpiricalCdf> {
    cfg.validate()?;
    if !(lambda1 > 0.0) || !lambda1.is_finite() {
        return Err(Error::Domain("lambda1 must be a positive real"));
    }
    let solver = MarginalSolver::new(template, cfg);
    let memo = LocalMemo(RefCell::new(alloc::collections::BTreeMap::new()));
    let blocks = draw_blocks(template.len(), cfg.shape_s, cfg.mc_count, stream);
    let draws = wb_draws(&solver, &blocks, lambda1, template.exposures(), &memo)?;
    ecdf_build(draws)
}

fn wb_draws(
    solver: &MarginalSolver,
    blocks: &[AuxBlock],
    lambda: f64,
    exposures: &[f64],
    memo: &dyn MleMemo,
) -> Result<Vec<f64>> {
    let mut per_key: alloc::collections::BTreeMap<Key, u32> = alloc::collections::BTreeMap::new();
    for block in blocks {
        let counts = simulate_counts(block, lambda, exposures)?;
        *per_key.entry(solver.key(&counts, exposures)).or_insert(0) += 1;
    }
    let mut draws = Vec::with_capacity(blocks.len());
    for (key, mult) in per_key {
        let (_, core_hat) = solver.mle_cached(key.clone(), memo)?;
        let b = (core_hat - solver.core(&key, lambda)).max(0.0);
        for _ in 0..mult {
            draws.push(b);
        }
    }
    Ok(draws)
}

/// Plausibility of `lambda_1`: `1 - G_hat(b(x, lambda_1))`.
pub fn pl_poisson(
    data: &PoissonData,
    cfg: &PoissonPriorConfig,
    lambda1: f64,
    stream: &RandomStream,
) -> Result<f64> {
    let b = b_statistic_poisson(data, cfg, lambda1)?;
    let ecdf = wb_sample_poisson(lambda1, data, cfg, stream)?;
    Ok(1.0 - ecdf.eval(b))
}

/// Partial Bayes interval for `lambda_1` by grid search on the plausibility,
/// with common random numbers across the grid. See
/// [`pb_interval_poisson_cached`] for simulation studies that share the
/// inner MLE memo across replications.
pub fn pb_interval_poisson(
    data: &PoissonData,
    cfg: &PoissonPriorConfig,
    stream: &RandomStream,
) -> Result<IntervalEstimate> {
    let memo = LocalMemo(RefCell::new(alloc::collections::BTreeMap::new()));
    pb_interval_poisson_impl(data, cfg, stream, &memo)
}

/// As [`pb_interval_poisson`], with a caller-owned memo for the inner MLE
/// solves (keyed by sufficient statistics, so safe to share across
/// replications with the same exposures, shape and node count).
#[cfg(feature = "std")]
pub fn pb_interval_poisson_cached(
    data: &PoissonData,
    cfg: &PoissonPriorConfig,
    stream: &RandomStream,
    cache: &MleCache,
) -> Result<IntervalEstimate> {
    pb_interval_poisson_impl(data, cfg, stream, cache)
}

fn pb_interval_poisson_impl(
    data: &PoissonData,
    cfg: &PoissonPriorConfig,
    stream: &RandomStream,
    memo: &dyn MleMemo,
) -> Result<IntervalEstimate> {
    cfg.validate()?;
    let solver = MarginalSolver::new(data, cfg);
    let obs_key = solver.key(&data.counts, &data.exposures);
    let (lam_hat, core_hat) = solver.mle_cached(obs_key.clone(), memo)?;
    let blocks = draw_blocks(data.len(), cfg.shape_s, cfg.mc_count, stream);

    let threshold = math::floor((1.0 - cfg.alpha) * cfg.mc_count as f64) as usize;
    // pl(lam) >= alpha  <=>  #(W_b <= b_obs) <= threshold
    let accepts = |lam: f64| -> Result<bool> {
        let b_obs = (core_hat - solver.core(&obs_key, lam)).max(0.0);
        let draws = wb_draws(&solver, &blocks, lam, data.exposures(), memo)?;
        let count = draws.iter().filter(|&&w| w <= b_obs).count();
        Ok(count <= threshold)
    };

    // Log-spaced grid centered at the MLE, extended outward on demand.
    let center = lam_hat.max(LAMBDA_FLOOR * 2.0);
    let g = cfg.lambda_grid_size;
    let span = math::ln(8.0); // initial grid covers lam_hat * [1/8, 8]
    let step = 2.0 * span / (g - 1) as f64;
    let lam_at = |i: i64| -> f64 { math::exp(math::ln(center) + step * i as f64).max(LAMBDA_FLOOR) };

    if !accepts(center)? {
        return Err(Error::NoInterval("plausibility at the rate MLE is below alpha"));
    }
    const MAX_STEPS: i64 = 4000;
    let scan = |dir: i64| -> Result<(i64, bool)> {
        let mut last_in: i64 = 0;
        let mut below_run = 0;
        let mut multimodal = false;
        let mut i = dir;
        loop {
            let lam = lam_at(i);
            if accepts(lam)? {
                if below_run > 0 {
                    multimodal = true;
                }
                below_run = 0;
                last_in = i;
            } else {
                below_run += 1;
                if below_run >= 3 {
                    break;
                }
            }
            if lam <= LAMBDA_FLOOR && dir < 0 {
                // hit the floor while still inside the region
                if below_run == 0 {
                    last_in = i;
                }
                break;
            }
            i += dir;
            if i.abs() > MAX_STEPS {
                return Err(Error::Divergence(
                    "plausibility never fell below alpha during grid expansion",
                ));
            }
        }
        Ok((last_in, multimodal))
    };
    let (right, mm_right) = scan(1)?;
    let (left, mm_left) = scan(-1)?;
    let mut est = IntervalEstimate::new(
        lam_at(left),
        lam_at(right),
        1.0 - cfg.alpha,
        "pb-poisson",
    )?;
    if mm_left || mm_right {
        est.diagnostics
            .push("plausibility mass beyond the reported component".to_string());
    }
    Ok(est)
}

/// Plausibility sampled over a log-spaced lambda grid with one shared
/// common-random-numbers block, so the curve varies smoothly in lambda.
pub fn pl_curve_poisson(
    data: &PoissonData,
    cfg: &PoissonPriorConfig,
    stream: &RandomStream,
    lambda_lo: f64,
    lambda_hi: f64,
    points: usize,
) -> Result<crate::im::PlausibilityCurve> {
    cfg.validate()?;
    if !(lambda_lo > 0.0 && lambda_hi > lambda_lo) || points < 3 {
        return Err(Error::Config("curve grid must be increasing, positive, >= 3 points"));
    }
    let solver = MarginalSolver::new(data, cfg);
    let obs_key = solver.key(&data.counts, &data.exposures);
    let memo = LocalMemo(RefCell::new(alloc::collections::BTreeMap::new()));
    let (_, core_hat) = solver.mle_cached(obs_key.clone(), &memo)?;
    let blocks = draw_blocks(data.len(), cfg.shape_s, cfg.mc_count, stream);
    let log_lo = math::ln(lambda_lo);
    let step = (math::ln(lambda_hi) - log_lo) / (points - 1) as f64;
    let mut grid = Vec::with_capacity(points);
    let mut values = Vec::with_capacity(points);
    for i in 0..points {
        let lam = math::exp(log_lo + step * i as f64);
        let b_obs = (core_hat - solver.core(&obs_key, lam)).max(0.0);
        let draws = wb_draws(&solver, &blocks, lam, data.exposures(), &memo)?;
        let below = draws.iter().filter(|&&w| w <= b_obs).count();
        grid.push(lam);
        values.push(1.0 - below as f64 / draws.len() as f64);
    }
    crate::im::PlausibilityCurve::new(grid, values)
}

/// Exact (Garwood-style) confidence interval for a single Poisson rate:
/// gamma quantiles at x and x+1 scaled by the exposure; the lower endpoint
/// is 0 when x = 0.
pub fn classical_interval_poisson(x: u64, exposure: f64, alpha: f64) -> Result<IntervalEstimate> {
    if !(exposure > 0.0) || !exposure.is_finite() {
        return Err(Error::Domain("exposure must be a positive real"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must be in (0,1)"));
    }
    let lower = if x == 0 { 0.0 } else { gamma_quantile(x as f64, alpha / 2.0)? / exposure };
    let upper = gamma_quantile(x as f64 + 1.0, 1.0 - alpha / 2.0)? / exposure;
    IntervalEstimate::new(lower, upper, 1.0 - alpha, "classical-poisson")
}

/// Result of fitting the exponential-prior mean by marginal maximum
/// likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPriorFit {
    pub theta_hat: f64,
    /// All-zero counts push the optimum to the boundary; the estimate is
    /// floored and flagged.
    pub at_boundary: bool,
}

const THETA_FLOOR: f64 = 1e-8;

/// Fit the mean of an exponential prior on per-unit rates from `(count,
/// exposure)` records by maximizing the marginal likelihood
/// `prod_i theta^{-1} n_i^{x_i} / (n_i + theta^{-1})^{x_i + 1}`.
pub fn eb_exp_prior_fit(records: &[(u64, f64)]) -> Result<ExpPriorFit> {
    if records.is_empty() {
        return Err(Error::DegenerateData("need at least one record".to_string()));
    }
    if records.iter().any(|&(_, n)| !(n > 0.0) || !n.is_finite()) {
        return Err(Error::Domain("exposures must be positive reals"));
    }
    let total: u64 = records.iter().map(|&(x, _)| x).sum();
    if total == 0 {
        return Ok(ExpPriorFit { theta_hat: THETA_FLOOR, at_boundary: true });
    }
    let n = records.len() as f64;
    // In c = ln(beta) with beta = 1/theta the log marginal is strictly
    // concave: L(c) = n c - sum (x_i + 1) ln(n_i + e^c).
    let grad = |c: f64| -> f64 {
        let beta = math::exp(c);
        let mut acc = n;
        for &(x, ni) in records {
            acc -= (x as f64 + 1.0) * beta / (ni + beta);
        }
        acc
    };
    let mut lo = -40.0;
    let mut hi = 40.0;
    while grad(lo) <= 0.0 {
        lo -= 10.0;
    }
    while grad(hi) >= 0.0 {
        hi += 10.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if grad(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = math::exp(0.5 * (lo + hi));
    Ok(ExpPriorFit { theta_hat: 1.0 / beta, at_boundary: false })
}

/// Posterior mean point estimate under the fitted exponential prior.
pub fn eb_exp_posterior_mean(x: u64, exposure: f64, theta_hat: f64) -> f64 {
    (x as f64 + 1.0) / (1.0 / theta_hat + exposure)
}

/// Equal-tailed credible interval under the fitted exponential prior:
/// gamma(x+1) quantiles scaled by `1/theta_hat + exposure`.
pub fn eb_exp_interval(
    x: u64,
    exposure: f64,
    theta_hat: f64,
    alpha: f64,
) -> Result<IntervalEstimate> {
    if !(theta_hat > 0.0) || !theta_hat.is_finite() {
        return Err(Error::Domain("theta_hat must be a positive real"));
    }
    if !(exposure > 0.0) || !exposure.is_finite() {
        return Err(Error::Domain("exposure must be a positive real"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must be in (0,1)"));
    }
    let rate = 1.0 / theta_hat + exposure;
    let lower = gamma_quantile(x as f64 + 1.0, alpha / 2.0)? / rate;
    let upper = gamma_quantile(x as f64 + 1.0, 1.0 - alpha / 2.0)? / rate;
    IntervalEstimate::new(lower, upper, 1.0 - alpha, "eb-exp")
}

/// Result of fitting the Gamma-prior scale by marginal maximum likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaScaleFit {
    pub gamma_hat: f64,
    pub at_boundary: bool,
}

const GAMMA_SCALE_FLOOR: f64 = 1e-8;

/// Fit the unknown Gamma-prior scale: each count is marginally negative
/// binomial with `p_i = 1/(1 + gamma t_i)`.
pub fn eb_gamma_prior_fit(data: &PoissonData, cfg: &PoissonPriorConfig) -> Result<GammaScaleFit> {
    cfg.validate()?;
    let total: u64 = data.counts.iter().sum();
    if total == 0 {
        return Ok(GammaScaleFit { gamma_hat: GAMMA_SCALE_FLOOR, at_boundary: true });
    }
    let s = cfg.shape_s;
    // strictly decreasing in c = ln(gamma)
    let grad = |c: f64| -> f64 {
        let g = math::exp(c);
        let mut acc = 0.0;
        for (&x, &t) in data.counts.iter().zip(&data.exposures) {
            let r = g * t / (1.0 + g * t);
            acc += x as f64 - (s + x as f64) * r;
        }
        acc
    };
    let mut lo = -40.0;
    let mut hi = 40.0;
    while grad(lo) <= 0.0 {
        lo -= 10.0;
    }
    while grad(hi) >= 0.0 {
        hi += 10.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if grad(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(GammaScaleFit { gamma_hat: math::exp(0.5 * (lo + hi)), at_boundary: false })
}

/// Naive empirical-Bayes interval for `lambda_1`: plug the fitted scale into
/// the conjugate posterior `Gamma(x_1 + s, rate t_1 + 1/gamma_hat)` and take
/// the equal-tailed credible interval.
pub fn eb_gamma_prior_interval(
    data: &PoissonData,
    cfg: &PoissonPriorConfig,
    alpha: f64,
) -> Result<IntervalEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must be in (0,1)"));
    }
    let fit = eb_gamma_prior_fit(data, cfg)?;
    let rate = data.exposures[0] + 1.0 / fit.gamma_hat;
    let shape = data.counts[0] as f64 + cfg.shape_s;
    let lower = gamma_quantile(shape, alpha / 2.0)? / rate;
    let upper = gamma_quantile(shape, 1.0 - alpha / 2.0)? / rate;
    IntervalEstimate::new(lower, upper, 1.0 - alpha, "eb-gamma")
}

/// Posterior mean point estimate under the fitted Gamma prior.
pub fn eb_gamma_posterior_mean(data: &PoissonData, cfg: &PoissonPriorConfig) -> Result<f64> {
    let fit = eb_gamma_prior_fit(data, cfg)?;
    Ok((data.counts[0] as f64 + cfg.shape_s) / (data.exposures[0] + 1.0 / fit.gamma_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg(s: f64) -> PoissonPriorConfig {
        PoissonPriorConfig::new(s, 0.05).unwrap()
    }

    #[test]
    fn loglik_n1_reduces_to_poisson() {
        // n = 1: ell = x1 ln(lam) - lam t1 exactly
        let d = PoissonData::new(vec![3], vec![1.0]).unwrap();
        for &lam in &[0.4, 1.0, 3.0, 9.0] {
            let got = marginal_loglik_lambda1(&d, &cfg(2.0), lam).unwrap();
            let want = 3.0 * lam.ln() - lam;
            assert!((got - want).abs() < 1e-10, "lam={lam}: {got} vs {want}");
        }
        // maximized at x1/t1
        let mle = mle_lambda1(&d, &cfg(2.0)).unwrap();
        assert!((mle - 3.0).abs() < 1e-6);
        let d = PoissonData::new(vec![3], vec![2.0]).unwrap();
        let mle = mle_lambda1(&d, &cfg(2.0)).unwrap();
        assert!((mle - 1.5).abs() < 1e-6);
    }

    #[test]
    fn loglik_reference_value() {
        // mpmath quadrature at 30 digits for n=2, s=2, t=(1,1), x=(1,1):
        // ell(1) = -2.3964081745497597
        let d = PoissonData::new(vec![1, 1], vec![1.0, 1.0]).unwrap();
        let got = marginal_loglik_lambda1(&d, &cfg(2.0), 1.0).unwrap();
        assert!((got - (-2.3964081745497597)).abs() < 1e-8, "{got}");
    }

    #[test]
    fn mle_matches_reference() {
        // mpmath stationary point for n=5, x=(3,2,4,1,2), t=1, s=2
        let d = PoissonData::with_unit_exposures(vec![3, 2, 4, 1, 2]).unwrap();
        let mle = mle_lambda1(&d, &cfg(2.0)).unwrap();
        assert!((mle - 2.6608326763947455).abs() < 1e-4, "{mle}");
        // analytic gradient vanishes there
        let solver = MarginalSolver::new(&d, &cfg(2.0));
        let key = solver.key(d.counts(), d.exposures());
        assert!(solver.core_grad(&key, mle).abs() < 1e-6);
    }

    #[test]
    fn mle_zero_count_boundary() {
        let d = PoissonData::new(vec![0], vec![1.0]).unwrap();
        assert_eq!(mle_lambda1(&d, &cfg(2.0)).unwrap(), LAMBDA_FLOOR);
        let d = PoissonData::with_unit_exposures(vec![0, 0, 0]).unwrap();
        assert_eq!(mle_lambda1(&d, &cfg(2.0)).unwrap(), LAMBDA_FLOOR);
    }

    #[test]
    fn b_statistic_properties() {
        let d = PoissonData::with_unit_exposures(vec![3, 2, 4, 1, 2]).unwrap();
        let c = cfg(2.0);
        let mle = mle_lambda1(&d, &c).unwrap();
        assert!(b_statistic_poisson(&d, &c, mle).unwrap() < 1e-8);
        for &lam in &[0.5, 1.5, 4.0, 8.0] {
            if (lam - mle).abs() > 0.3 {
                assert!(b_statistic_poisson(&d, &c, lam).unwrap() > 1e-4);
            }
        }
        // n=1 closed form: 3 ln 3 - 2
        let d = PoissonData::new(vec![3], vec![1.0]).unwrap();
        let b = b_statistic_poisson(&d, &c, 1.0).unwrap();
        assert!((b - (3.0 * 3.0f64.ln() - 2.0)).abs() < 1e-8);
    }

    #[test]
    fn wb_draws_deterministic_and_nonnegative() {
        let d = PoissonData::with_unit_exposures(vec![2, 1, 3]).unwrap();
        let mut c = cfg(2.0);
        c.mc_count = 200;
        let s = RandomStream::new(5).substream(1);
        let e1 = wb_sample_poisson(2.0, &d, &c, &s).unwrap();
        let e2 = wb_sample_poisson(2.0, &d, &c, &s).unwrap();
        assert_eq!(e1.sorted_samples(), e2.sorted_samples());
        assert!(e1.sorted_samples().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn pl_maximal_at_mle_and_decays() {
        let d = PoissonData::with_unit_exposures(vec![4, 2, 3, 5]).unwrap();
        let mut c = cfg(2.0);
        c.mc_count = 400;
        let s = RandomStream::new(17);
        let mle = mle_lambda1(&d, &c).unwrap();
        let at_mle = pl_poisson(&d, &c, mle, &s).unwrap();
        assert!(at_mle > 0.9, "pl at MLE: {at_mle}");
        let far = pl_poisson(&d, &c, mle * 20.0, &s).unwrap();
        assert!(far < 0.05, "pl far out: {far}");
    }

    #[test]
    fn pb_interval_contains_mle() {
        let d = PoissonData::with_unit_exposures(vec![4, 2, 3, 5]).unwrap();
        let mut c = cfg(2.0);
        c.mc_count = 300;
        c.lambda_grid_size = 61;
        let s = RandomStream::new(23);
        let est = pb_interval_poisson(&d, &c, &s).unwrap();
        let mle = mle_lambda1(&d, &c).unwrap();
        assert!(est.contains(mle));
        assert!(est.lower > 0.0 && est.upper < 50.0);
    }

    #[test]
    fn classical_interval_examples() {
        let est = classical_interval_poisson(0, 3.0, 0.10).unwrap();
        assert_eq!(est.lower, 0.0);
        let est = classical_interval_poisson(3, 10.0, 0.10).unwrap();
        assert!((est.lower - 0.08176914471639533).abs() < 1e-8);
        assert!((est.upper - 0.7753656527932727).abs() < 1e-8);
        // point estimate inside
        for x in 1..=100u64 {
            let est = classical_interval_poisson(x, 7.0, 0.05).unwrap();
            assert!(est.contains(x as f64 / 7.0), "x={x}");
        }
    }

    #[test]
    fn exp_prior_fit_examples() {
        // single record (x=1, n=1): marginal prop to theta/(1+theta)^2, max at 1
        let fit = eb_exp_prior_fit(&[(1, 1.0)]).unwrap();
        assert!((fit.theta_hat - 1.0).abs() < 1e-8);
        assert!(!fit.at_boundary);
        // exposure scaling: theta_hat scales by 1/c
        let recs: Vec<(u64, f64)> = vec![(3, 10.0), (1, 8.0), (5, 12.0), (0, 6.0)];
        let scaled: Vec<(u64, f64)> = recs.iter().map(|&(x, n)| (x, 3.0 * n)).collect();
        let f1 = eb_exp_prior_fit(&recs).unwrap().theta_hat;
        let f2 = eb_exp_prior_fit(&scaled).unwrap().theta_hat;
        assert!((f2 - f1 / 3.0).abs() < 1e-8 * f1);
        // all-zero boundary
        let fit = eb_exp_prior_fit(&[(0, 5.0), (0, 2.0)]).unwrap();
        assert!(fit.at_boundary);
        assert_eq!(fit.theta_hat, THETA_FLOOR);
    }

    #[test]
    fn eb_exp_interval_examples() {
        let est = eb_exp_interval(3, 10.0, 0.5, 0.10).unwrap();
        assert!((est.lower - 0.11385986639581924).abs() < 1e-8, "{}", est.lower);
        assert!((est.upper - 0.6461380439943939).abs() < 1e-8, "{}", est.upper);
        // posterior mean inside; narrower than classical for finite theta
        for x in 0..=50u64 {
            let eb = eb_exp_interval(x, 9.0, 0.5, 0.10).unwrap();
            assert!(eb.contains(eb_exp_posterior_mean(x, 9.0, 0.5)));
            let cl = classical_interval_poisson(x, 9.0, 0.10).unwrap();
            assert!(eb.width() < cl.width(), "x={x}");
        }
        // theta -> infinity: Gamma(x+1) over exposure alone
        let est = eb_exp_interval(3, 10.0, 1e12, 0.10).unwrap();
        let want_up = gamma_quantile(4.0, 0.95).unwrap() / 10.0;
        assert!((est.upper - want_up).abs() < 1e-6);
    }

    #[test]
    fn gamma_prior_fit_closed_form_at_unit_exposures() {
        // equal t=1: gamma_hat = xbar / s
        let d = PoissonData::with_unit_exposures(vec![3, 1, 2, 4, 0]).unwrap();
        let fit = eb_gamma_prior_fit(&d, &cfg(2.0)).unwrap();
        assert!((fit.gamma_hat - 2.0 / 2.0).abs() < 1e-8, "{}", fit.gamma_hat);
        let d = PoissonData::with_unit_exposures(vec![0, 0]).unwrap();
        assert!(eb_gamma_prior_fit(&d, &cfg(2.0)).unwrap().at_boundary);
    }

    #[test]
    fn gamma_prior_interval_conjugacy() {
        let d = PoissonData::with_unit_exposures(vec![0, 2, 1, 3]).unwrap();
        let c = cfg(2.0);
        let est = eb_gamma_prior_interval(&d, &c, 0.05).unwrap();
        let fit = eb_gamma_prior_fit(&d, &c).unwrap();
        let rate = 1.0 + 1.0 / fit.gamma_hat;
        let want_lo = gamma_quantile(2.0, 0.025).unwrap() / rate;
        assert!((est.lower - want_lo).abs() < 1e-10);
        // posterior mean inside
        let pm = eb_gamma_posterior_mean(&d, &c).unwrap();
        assert!(est.contains(pm));
    }

    #[test]
    fn validation_errors() {
        assert!(PoissonData::new(vec![], vec![]).is_err());
        assert!(PoissonData::new(vec![1], vec![0.0]).is_err());
        assert!(PoissonData::new(vec![1, 2], vec![1.0]).is_err());
        assert!(PoissonPriorConfig::new(0.0, 0.05).is_err());
        assert!(PoissonPriorConfig::new(2.0, 1.0).is_err());
        let d = PoissonData::new(vec![1], vec![1.0]).unwrap();
        assert!(marginal_loglik_lambda1(&d, &cfg(2.0), 0.0).is_err());
        assert!(marginal_loglik_lambda1(&d, &cfg(2.0), -1.0).is_err());
    }
}
