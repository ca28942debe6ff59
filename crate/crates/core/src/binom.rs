//! Partial Bayes inference for the success-rate difference
//! `delta = p1 - p2` from two independent binomial samples, with a known
//! prior on `delta` (the distribution of `2 Beta(a,b) - 1`).
//!
//! The rates are reparameterized through `tau = p1 + p2 = 1 + (1-|delta|) w`
//! with `w in (-1,1)`; profiling the joint log density over `w` at fixed
//! `delta` reduces to a cubic equation in `p2`, and the association statistic
//! is the profile likelihood-ratio value of Eq-style form
//! `b = l(map) - l(delta, what_delta)`. The null CDF family `G_w` is realized
//! by Monte Carlo with one shared draw block across the `w` grid, and the
//! plausibility uses the pointwise infimum over the family.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::im::{ecdf_build, EmpiricalCdf, IntervalEstimate};
use crate::math;
use crate::special::ln_gamma;
use crate::stream::RandomStream;
use crate::{dist, Error, Result};

/// Two independent binomial observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomData {
    pub x: u64,
    pub m: u64,
    pub y: u64,
    pub n: u64,
}

impl BinomData {
    pub fn new(x: u64, m: u64, y: u64, n: u64) -> Result<Self> {
        if m < 1 || n < 1 {
            return Err(Error::DegenerateData("sample sizes must be >= 1".to_string()));
        }
        if x > m || y > n {
            return Err(Error::DegenerateData("successes cannot exceed sample size".to_string()));
        }
        Ok(BinomData { x, m, y, n })
    }
}

/// Prior on the rate difference: `delta ~ 2 Beta(a,b) - 1` on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPrior {
    pub a: f64,
    pub b: f64,
}

impl DeltaPrior {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain("beta prior parameters must be positive"));
        }
        Ok(DeltaPrior { a, b })
    }

    fn ln_density(&self, delta: f64) -> f64 {
        let u = 0.5 * (delta + 1.0);
        // exponent-aware edge handling so the a = 1 / b = 1 limits stay finite
        let term = |e: f64, v: f64| if e == 0.0 { 0.0 } else { e * math::ln(v) };
        let ln_beta = ln_gamma(self.a) + ln_gamma(self.b) - ln_gamma(self.a + self.b);
        term(self.a - 1.0, u) + term(self.b - 1.0, 1.0 - u) - ln_beta - core::f64::consts::LN_2
    }
}

/// Grid and Monte-Carlo controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomConfig {
    pub alpha: f64,
    /// Points of the delta profile/search grid on (-0.999, 0.999).
    pub delta_grid_size: usize,
    /// Points of the omega grid on (-0.975, 0.975).
    pub omega_grid_size: usize,
    pub mc_count: usize,
}

impl BinomConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain("alpha must be in (0,1)"));
        }
        Ok(BinomConfig { alpha, delta_grid_size: 401, omega_grid_size: 41, mc_count: 2000 })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain("alpha must be in (0,1)"));
        }
        if self.delta_grid_size < 11 || self.omega_grid_size < 11 {
            return Err(Error::Config("delta/omega grids need at least 11 points"));
        }
        if self.mc_count < 10 {
            return Err(Error::Config("mc_count must be at least 10"));
        }
        Ok(())
    }

    fn delta_grid(&self) -> Vec<f64> {
        linspace(-DELTA_EDGE, DELTA_EDGE, self.delta_grid_size)
    }

    fn omega_grid(&self) -> Vec<f64> {
        linspace(-OMEGA_EDGE, OMEGA_EDGE, self.omega_grid_size)
    }
}

const DELTA_EDGE: f64 = 0.999;
const OMEGA_EDGE: f64 = 0.975;

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

/// Density of the `2 Beta(a,b) - 1` prior at `delta`.
pub fn prior_density_delta(prior: &DeltaPrior, delta: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&delta) {
        return Err(Error::Domain("delta must lie in [-1,1]"));
    }
    Ok(math::exp(prior.ln_density(delta)))
}

fn p1_p2(delta: f64, omega: f64) -> (f64, f64) {
    let spread = (1.0 - math::abs(delta)) * omega;
    (0.5 * (1.0 + delta + spread), 0.5 * (1.0 - delta + spread))
}

/// Joint log density of `(x, y, delta)` at the reparameterized point, with
/// the 0 * log 0 = 0 convention for saturated counts.
pub fn loglik_delta_omega(
    data: &BinomData,
    prior: &DeltaPrior,
    delta: f64,
    omega: f64,
) -> Result<f64> {
    if !(math::abs(delta) < 1.0) {
        return Err(Error::Domain("delta must lie in (-1,1)"));
    }
    if !(math::abs(omega) < 1.0) {
        return Err(Error::Domain("omega must lie in (-1,1)"));
    }
    let (p1, p2) = p1_p2(delta, omega);
    Ok(binom_terms(data, p1, p2) + prior.ln_density(delta))
}

fn binom_terms(data: &BinomData, p1: f64, p2: f64) -> f64 {
    let term = |count: u64, p: f64| -> f64 {
        if count == 0 {
            0.0
        } else if p <= 0.0 {
            f64::NEG_INFINITY
        } else {
            count as f64 * math::ln(p)
        }
    };
    term(data.x, p1)
        + term(data.m - data.x, 1.0 - p1)
        + term(data.y, p2)
        + term(data.n - data.y, 1.0 - p2)
}

/// Result of profiling the log density over omega at fixed delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaHat {
    pub omega: f64,
    pub p2: f64,
    /// The stationary point fell outside the admissible range, so the
    /// optimum sits at an omega boundary and the values are clamped.
    pub at_boundary: bool,
}

/// d l / d p2 along p1 = p2 + delta (the omega derivative up to the positive
/// factor (1-|delta|)/2); strictly decreasing in p2.
fn score_p2(data: &BinomData, delta: f64, p2: f64) -> f64 {
    let p1 = p2 + delta;
    let mut acc = 0.0;
    if data.x > 0 {
        acc += data.x as f64 / p1;
    }
    if data.m - data.x > 0 {
        acc -= (data.m - data.x) as f64 / (1.0 - p1);
    }
    if data.y > 0 {
        acc += data.y as f64 / p2;
    }
    if data.n - data.y > 0 {
        acc -= (data.n - data.y) as f64 / (1.0 - p2);
    }
    acc
}

/// Real roots of a x^3 + b x^2 + c x + d (a != 0), by the trigonometric /
/// Cardano closed form.
fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> ([f64; 3], usize) {
    let bn = b / a;
    let cn = c / a;
    let dn = d / a;
    // depressed: t^3 + p t + q, x = t - bn/3
    let shift = bn / 3.0;
    let p = cn - bn * bn / 3.0;
    let q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;
    let disc = 0.25 * q * q + p * p * p / 27.0;
    let mut roots = [0.0f64; 3];
    let count;
    if disc > 0.0 {
        let sq = math::sqrt(disc);
        let u = math::cbrt(-0.5 * q + sq);
        let v = math::cbrt(-0.5 * q - sq);
        roots[0] = u + v - shift;
        count = 1;
    } else {
        // three real roots
        let r = math::sqrt(-p * p * p / 27.0).max(1e-300);
        let phi = math::acos((-0.5 * q / r).clamp(-1.0, 1.0));
        let t = 2.0 * math::sqrt(-p / 3.0);
        for (k, root) in roots.iter_mut().enumerate() {
            *root = t * math::cos((phi + 2.0 * core::f64::consts::PI * k as f64) / 3.0) - shift;
        }
        count = 3;
    }
    (roots, count)
}

/// Profile maximizer of the log density over omega at fixed delta, through
/// the cubic in `p2` with the root sought inside
/// `(max(0,-delta), min(1,1-delta))`; falls back to bisection on the score
/// when the closed form is ill-conditioned.
pub fn omega_hat_delta(data: &BinomData, prior: &DeltaPrior, delta: f64) -> Result<OmegaHat> {
    let _ = prior; // the prior term is free of omega
    if !(math::abs(delta) < 1.0) {
        return Err(Error::Domain("delta must lie in (-1,1)"));
    }
    let lo = (-delta).max(0.0);
    let hi = (1.0 - delta).min(1.0);
    let width = hi - lo;
    let inset = width * 1e-9;
    let (s_lo, s_hi) = (score_p2(data, delta, lo + inset), score_p2(data, delta, hi - inset));
    if s_lo <= 0.0 {
        // decreasing from the left edge: optimum at omega -> -1
        return Ok(OmegaHat { omega: -1.0, p2: lo + inset, at_boundary: true });
    }
    if s_hi >= 0.0 {
        return Ok(OmegaHat { omega: 1.0, p2: hi - inset, at_boundary: true });
    }
    // closed-form cubic
    let (xf, mf, yf, nf) =
        (data.x as f64, data.m as f64, data.y as f64, data.n as f64);
    let ca = mf + nf;
    let cb = -(xf + yf) - mf * (1.0 - delta) - nf * (1.0 - 2.0 * delta);
    let cc = xf - mf * delta + yf * (1.0 - 2.0 * delta) - nf * (delta - delta * delta);
    let cd = yf * (delta - delta * delta);
    let (roots, count) = cubic_roots(ca, cb, cc, cd);
    let mut candidate: Option<f64> = None;
    for &r in roots.iter().take(count) {
        if r > lo + inset && r < hi - inset {
            candidate = match candidate {
                // multiple in-range roots: conditioning is suspect
                Some(_) => None,
                None => Some(r),
            };
            if candidate.is_none() {
                break;
            }
        }
    }
    let mut p2 = match candidate {
        Some(r) => r,
        None => {
            // bisection on the strictly decreasing score
            let (mut a, mut b) = (lo + inset, hi - inset);
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if score_p2(data, delta, mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        }
    };
    // Newton polish on the score itself drives the stationarity residual to
    // machine level.
    for _ in 0..8 {
        let s = score_p2(data, delta, p2);
        if s.abs() * 0.5 * (1.0 - math::abs(delta)) <= 1e-10 {
            break;
        }
        let h = (p2 * 1e-7).abs().max(1e-12);
        let ds = (score_p2(data, delta, p2 + h) - score_p2(data, delta, p2 - h)) / (2.0 * h);
        if !ds.is_finite() || ds == 0.0 {
            break;
        }
        let next = p2 - s / ds;
        if next > lo && next < hi {
            p2 = next;
        } else {
            break;
        }
    }
    let omega = (2.0 * p2 + delta - 1.0) / (1.0 - math::abs(delta));
    Ok(OmegaHat { omega, p2, at_boundary: false })
}

/// Log density at the omega profile for fixed delta.
fn profile_loglik(data: &BinomData, prior: &DeltaPrior, delta: f64) -> Result<f64> {
    let oh = omega_hat_delta(data, prior, delta)?;
    let p2 = oh.p2;
    let p1 = p2 + delta;
    Ok(binom_terms(data, p1, p2) + prior.ln_density(delta))
}

/// Joint maximum a posteriori of `(delta, omega)`: a delta grid scan of the
/// omega profile with one golden-section refinement around the best point.
pub fn map_delta_omega(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    let (lhat, delta_hat) = map_value(data, prior, cfg)?;
    let _ = lhat;
    let oh = omega_hat_delta(data, prior, delta_hat)?;
    Ok((delta_hat, oh.omega))
}

/// (profile value at the MAP, MAP delta).
fn map_value(data: &BinomData, prior: &DeltaPrior, cfg: &BinomConfig) -> Result<(f64, f64)> {
    let grid = cfg.delta_grid();
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    for (i, &d) in grid.iter().enumerate() {
        let v = profile_loglik(data, prior, d)?;
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // golden refinement between the neighbours
    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(grid.len() - 1)];
    const G: f64 = 0.6180339887498949;
    let mut x1 = b - G * (b - a);
    let mut x2 = a + G * (b - a);
    let mut f1 = profile_loglik(data, prior, x1)?;
    let mut f2 = profile_loglik(data, prior, x2)?;
    for _ in 0..32 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - G * (b - a);
            f1 = profile_loglik(data, prior, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + G * (b - a);
            f2 = profile_loglik(data, prior, x2)?;
        }
    }
    let (v, d) = if f1 > f2 { (f1, x1) } else { (f2, x2) };
    if v >= best {
        Ok((v, d))
    } else {
        Ok((best, grid[best_i]))
    }
}

/// Memo of `(map value, map delta)` per `(x, y)` outcome.
pub trait MapMemo {
    fn get(&self, key: (u64, u64)) -> Option<(f64, f64)>;
    fn put(&self, key: (u64, u64), val: (f64, f64));
}

struct LocalMapMemo(RefCell<alloc::collections::BTreeMap<(u64, u64), (f64, f64)>>);

impl MapMemo for LocalMapMemo {
    fn get(&self, key: (u64, u64)) -> Option<(f64, f64)> {
        self.0.borrow().get(&key).copied()
    }
    fn put(&self, key: (u64, u64), val: (f64, f64)) {
        self.0.borrow_mut().insert(key, val);
    }
}

/// Thread-shareable MAP memo for simulation studies (values are
/// deterministic functions of the key).
#[cfg(feature = "std")]
pub struct MapCache(std::sync::RwLock<alloc::collections::BTreeMap<(u64, u64), (f64, f64)>>);

#[cfg(feature = "std")]
impl MapCache {
    pub fn new() -> Self {
        MapCache(std::sync::RwLock::new(alloc::collections::BTreeMap::new()))
    }
}

#[cfg(feature = "std")]
impl Default for MapCache {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(feature = "std")]
impl MapMemo for MapCache {
    fn get(&self, key: (u64, u64)) -> Option<(f64, f64)> {
        self.0.read().unwrap().get(&key).copied()
    }
    fn put(&self, key: (u64, u64), val: (f64, f64)) {
        self.0.write().unwrap().insert(key, val);
    }
}

fn map_value_cached(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    memo: &dyn MapMemo,
) -> Result<(f64, f64)> {
    if let Some(hit) = memo.get((data.x, data.y)) {
        return Ok(hit);
    }
    let val = map_value(data, prior, cfg)?;
    memo.put((data.x, data.y), val);
    Ok(val)
}

/// Profile likelihood-ratio association
/// `b(x, y, delta) = l(map) - l(delta, what_delta) >= 0`.
pub fn b_statistic_binom(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    delta: f64,
) -> Result<f64> {
    let memo = LocalMapMemo(RefCell::new(alloc::collections::BTreeMap::new()));
    b_statistic_cached(data, prior, cfg, delta, &memo)
}

fn b_statistic_cached(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    delta: f64,
    memo: &dyn MapMemo,
) -> Result<f64> {
    if !(math::abs(delta) < 1.0) {
        return Err(Error::Domain("delta must lie in (-1,1)"));
    }
    let (lhat, _) = map_value_cached(data, prior, cfg, memo)?;
    Ok((lhat - profile_loglik(data, prior, delta)?).max(0.0))
}

/// One shared draw block: the prior draw and the two count uniforms.
struct DrawBlock {
    delta: f64,
    u1: f64,
    u2: f64,
}

fn draw_blocks(prior: &DeltaPrior, count: usize, stream: &RandomStream) -> Vec<DrawBlock> {
    (0..count)
        .map(|j| {
            let mut d = stream.substream(j as u64).draws();
            let beta = d.beta(prior.a, prior.b);
            let delta = 2.0 * beta - 1.0;
            let u1 = d.uniform();
            let u2 = d.uniform();
            DrawBlock { delta, u1, u2 }
        })
        .collect()
}

fn wb_draws(
    omega: f64,
    m: u64,
    n: u64,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    blocks: &[DrawBlock],
    memo: &dyn MapMemo,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(blocks.len());
    for blk in blocks {
        let (p1, p2) = p1_p2(blk.delta, omega);
        let x = dist::discrete_quantile(
            dist::DiscreteKind::Binomial { size: m as u32, prob: p1 },
            blk.u1,
        )?;
        let y = dist::discrete_quantile(
            dist::DiscreteKind::Binomial { size: n as u32, prob: p2 },
            blk.u2,
        )?;
        let sim = BinomData { x, m, y, n };
        out.push(b_statistic_cached(&sim, prior, cfg, blk.delta, memo)?);
    }
    Ok(out)
}

/// Monte-Carlo sample of the auxiliary statistic `W_b(omega)` as an
/// empirical CDF: draw `delta` from the prior and the counts at
/// `(p1(delta, omega), p2(delta, omega))`, then evaluate the association at
/// the drawn `delta`.
pub fn wb_sample_binom(
    omega: f64,
    data_shape: (u64, u64),
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    stream: &RandomStream,
) -> Result<EmpiricalCdf> {
    cfg.validate()?;
    if !(math::abs(omega) < 1.0) {
        return Err(Error::Domain("omega must lie in (-1,1)"));
    }
    let (m, n) = data_shape;
    if m < 1 || n < 1 {
        return Err(Error::DegenerateData("sample sizes must be >= 1".to_string()));
    }
    let memo = LocalMapMemo(RefCell::new(alloc::collections::BTreeMap::new()));
    let blocks = draw_blocks(prior, cfg.mc_count, stream);
    ecdf_build(wb_draws(omega, m, n, prior, cfg, &blocks, &memo)?)
}

/// The `G_omega` family over the omega grid, built once from one shared
/// draw block.
struct WbFamily {
    cdfs: Vec<EmpiricalCdf>,
}

impl WbFamily {
    fn build(
        m: u64,
        n: u64,
        prior: &DeltaPrior,
        cfg: &BinomConfig,
        stream: &RandomStream,
        memo: &dyn MapMemo,
    ) -> Result<Self> {
        let blocks = draw_blocks(prior, cfg.mc_count, stream);
        let mut cdfs = Vec::with_capacity(cfg.omega_grid_size);
        for omega in cfg.omega_grid() {
            cdfs.push(ecdf_build(wb_draws(omega, m, n, prior, cfg, &blocks, memo)?)?);
        }
        Ok(WbFamily { cdfs })
    }

    /// `1 - inf_omega G_omega(b)`.
    fn pl(&self, b: f64) -> f64 {
        let inf = self
            .cdfs
            .iter()
            .map(|e| e.eval(b))
            .fold(f64::INFINITY, f64::min);
        1.0 - inf
    }
}

/// Plausibility of `delta`: `1 - inf_omega G_omega(b(x, y, delta))`.
pub fn pl_binom(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    delta: f64,
    stream: &RandomStream,
) -> Result<f64> {
    cfg.validate()?;
    if !(math::abs(delta) < 1.0) {
        return Err(Error::Domain("delta must lie in (-1,1)"));
    }
    let memo = LocalMapMemo(RefCell::new(alloc::collections::BTreeMap::new()));
    let family = WbFamily::build(data.m, data.n, prior, cfg, stream, &memo)?;
    let b = b_statistic_cached(data, prior, cfg, delta, &memo)?;
    Ok(family.pl(b))
}

/// Partial Bayes interval for `delta` by grid search, as the connected
/// component of `{delta : pl >= alpha}` around the MAP estimate.
pub fn pb_interval_binom(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    stream: &RandomStream,
) -> Result<IntervalEstimate> {
    let memo = LocalMapMemo(RefCell::new(alloc::collections::BTreeMap::new()));
    pb_interval_binom_impl(data, prior, cfg, stream, &memo)
}

/// As [`pb_interval_binom`] with a shared MAP memo (keyed only by the
/// outcome counts, so reusable across replications with the same
/// `(m, n, prior, cfg)`).
#[cfg(feature = "std")]
pub fn pb_interval_binom_cached(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    stream: &RandomStream,
    cache: &MapCache,
) -> Result<IntervalEstimate> {
    pb_interval_binom_impl(data, prior, cfg, stream, cache)
}

fn pb_interval_binom_impl(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    stream: &RandomStream,
    memo: &dyn MapMemo,
) -> Result<IntervalEstimate> {
    cfg.validate()?;
    let family = WbFamily::build(data.m, data.n, prior, cfg, stream, memo)?;
    let (_, delta_hat) = map_value_cached(data, prior, cfg, memo)?;
    let grid = cfg.delta_grid();
    let accepted: Vec<bool> = {
        let mut v = Vec::with_capacity(grid.len());
        for &d in &grid {
            let b = b_statistic_cached(data, prior, cfg, d, memo)?;
            v.push(family.pl(b) >= cfg.alpha);
        }
        v
    };
    let center = grid
        .iter()
        .position(|&d| d >= delta_hat)
        .unwrap_or(grid.len() - 1)
        .min(grid.len() - 1);
    let center = if accepted[center] {
        center
    } else if center > 0 && accepted[center - 1] {
        center - 1
    } else {
        return Err(Error::NoInterval("plausibility at the MAP estimate is below alpha"));
    };
    let mut lo = center;
    let mut hi = center;
    while lo > 0 && accepted[lo - 1] {
        lo -= 1;
    }
    while hi + 1 < grid.len() && accepted[hi + 1] {
        hi += 1;
    }
    let multimodal =
        accepted[..lo].iter().any(|&a| a) || accepted[hi + 1..].iter().any(|&a| a);
    let mut est = IntervalEstimate::new(
        grid[lo].max(-1.0),
        grid[hi].min(1.0),
        1.0 - cfg.alpha,
        "pb-binom",
    )?;
    if multimodal {
        est.diagnostics
            .push("plausibility mass beyond the reported component".to_string());
    }
    Ok(est)
}

/// MAP point estimate of `delta` (exposed for reporting).
pub fn map_point_estimate(data: &BinomData, prior: &DeltaPrior, cfg: &BinomConfig) -> Result<f64> {
    Ok(map_value(data, prior, cfg)?.1)
}

/// Plausibility sampled over the delta grid, with the `G_omega` family built
/// once from a shared draw block.
pub fn pl_curve_binom(
    data: &BinomData,
    prior: &DeltaPrior,
    cfg: &BinomConfig,
    stream: &RandomStream,
) -> Result<crate::im::PlausibilityCurve> {
    cfg.validate()?;
    let memo = LocalMapMemo(RefCell::new(alloc::collections::BTreeMap::new()));
    let family = WbFamily::build(data.m, data.n, prior, cfg, stream, &memo)?;
    let grid = cfg.delta_grid();
    let mut values = Vec::with_capacity(grid.len());
    for &d in &grid {
        let b = b_statistic_cached(data, prior, cfg, d, &memo)?;
        values.push(family.pl(b).clamp(0.0, 1.0));
    }
    crate::im::PlausibilityCurve::new(grid, values)
}
