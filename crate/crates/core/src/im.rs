//! Model-agnostic inferential machinery: plausibility from a CDF (or a CDF
//! envelope over a nuisance family) evaluated at an association value, and
//! inversion of plausibility functions into interval estimates.
//!
//! The two-sided predictive random set is never materialized; everything any
//! caller needs is its non-coverage probability `Q(w) = |1 - 2 F(w)|`, so a
//! plausibility is just `1 - Q(w)` and an envelope plausibility is
//! `min{1, 2 [1 - underF(w)], 2 overF(w)}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Sampled plausibility function over a parameter grid; the invertible object
/// behind every interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PlausibilityCurve {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl PlausibilityCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::Config("plausibility curve needs at least 3 grid points"));
        }
        if grid.len() != values.len() {
            return Err(Error::Config("plausibility grid/value length mismatch"));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("plausibility grid must be strictly increasing"));
        }
        if !values.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(Error::Config("plausibility values must lie in [0,1]"));
        }
        Ok(PlausibilityCurve { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Two-column CSV rendering (`parameter,plausibility`).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("parameter,plausibility\n");
        for (g, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{g},{v}\n"));
        }
        out
    }
}

/// An interval estimate with its confidence level and producing method.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalEstimate {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: String,
    /// Non-fatal observations made during construction (e.g. plausibility
    /// mass beyond the reported connected component).
    pub diagnostics: Vec<String>,
}

impl IntervalEstimate {
    pub fn new(lower: f64, upper: f64, level: f64, method: impl Into<String>) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::Numeric(format!("interval endpoints out of order: {lower} > {upper}")));
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Domain("confidence level must be in (0,1)"));
        }
        Ok(IntervalEstimate { lower, upper, level, method: method.into(), diagnostics: Vec::new() })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Plausibility of the association value `w` under the exact CDF `F`:
/// `1 - |1 - 2 F(w)|`, which is 1 iff `F(w) = 1/2`.
pub fn cpl_from_cdf<F: Fn(f64) -> f64>(cdf: F, w: f64) -> f64 {
    let u = cdf(w);
    (1.0 - math::abs(1.0 - 2.0 * u)).clamp(0.0, 1.0)
}

/// Pointwise lower/upper CDF bounds over a nuisance-indexed family.
///
/// `family(theta, s)` evaluates the member CDF at `s`; the inf/sup are taken
/// over `grid` with one golden-section refinement pass around the argmin /
/// argmax, which is enough for families varying smoothly in the nuisance.
pub struct CdfEnvelope<F> {
    family: F,
    grid: Vec<f64>,
}

const GOLDEN: f64 = 0.6180339887498949;

impl<F: Fn(f64, f64) -> f64> CdfEnvelope<F> {
    pub fn new(family: F, nuisance_grid: &[f64]) -> Result<Self> {
        if nuisance_grid.is_empty() {
            return Err(Error::Config("envelope nuisance grid must be nonempty"));
        }
        Ok(CdfEnvelope { family, grid: nuisance_grid.to_vec() })
    }

    pub fn nuisance_grid(&self) -> &[f64] {
        &self.grid
    }

    fn extremum(&self, s: f64, minimize: bool) -> f64 {
        let sign = if minimize { 1.0 } else { -1.0 };
        let eval = |theta: f64| sign * (self.family)(theta, s);
        let mut best = eval(self.grid[0]);
        let mut best_i = 0;
        for (i, &theta) in self.grid.iter().enumerate().skip(1) {
            let v = eval(theta);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        if self.grid.len() > 1 {
            // One golden-section pass between the neighbours of the best
            // grid point.
            let lo = self.grid[best_i.saturating_sub(1)];
            let hi = self.grid[(best_i + 1).min(self.grid.len() - 1)];
            if hi > lo {
                let mut a = lo;
                let mut b = hi;
                let mut x1 = b - GOLDEN * (b - a);
                let mut x2 = a + GOLDEN * (b - a);
                let mut f1 = eval(x1);
                let mut f2 = eval(x2);
                for _ in 0..24 {
                    if f1 < f2 {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - GOLDEN * (b - a);
                        f1 = eval(x1);
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + GOLDEN * (b - a);
                        f2 = eval(x2);
                    }
                }
                best = best.min(f1).min(f2);
            }
        }
        sign * best
    }

    /// inf over the nuisance family of F_theta(s).
    pub fn lower(&self, s: f64) -> f64 {
        self.extremum(s, true)
    }

    /// sup over the nuisance family of F_theta(s).
    pub fn upper(&self, s: f64) -> f64 {
        self.extremum(s, false)
    }

    /// Generalized inverse of the lower envelope: smallest s with
    /// `lower(s) >= p`, located by bracket expansion and bisection to
    /// `tol` in the s variable.
    pub fn lower_inv(&self, p: f64, hint: f64, tol: f64) -> Result<f64> {
        invert_nondecreasing(|s| self.lower(s), p, hint, tol)
    }

    /// Generalized inverse of the upper envelope.
    pub fn upper_inv(&self, p: f64, hint: f64, tol: f64) -> Result<f64> {
        invert_nondecreasing(|s| self.upper(s), p, hint, tol)
    }
}

/// Solve f(s) = p for a nondecreasing f with limits 0 and 1.
pub(crate) fn invert_nondecreasing<F: Fn(f64) -> f64>(
    f: F,
    p: f64,
    hint: f64,
    tol: f64,
) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("inverse CDF target must be in (0,1)"));
    }
    let mut radius = 1.0;
    let mut lo = hint - radius;
    let mut hi = hint + radius;
    let mut guard = 0;
    while f(lo) > p {
        radius *= 2.0;
        lo = hint - radius;
        guard += 1;
        if guard > 80 {
            return Err(Error::Numeric(format!("CDF inversion: no lower bracket for p={p}")));
        }
    }
    guard = 0;
    while f(hi) < p {
        radius *= 2.0;
        hi = hint + radius;
        guard += 1;
        if guard > 80 {
            return Err(Error::Numeric(format!("CDF inversion: no upper bracket for p={p}")));
        }
    }
    while hi - lo > tol * math::abs(hi).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Envelope plausibility `min{1, 2 [1 - underF(w)], 2 overF(w)}`; collapses
/// to [`cpl_from_cdf`] when the envelope is a single CDF.
pub fn cpl_from_envelope<F: Fn(f64, f64) -> f64>(env: &CdfEnvelope<F>, w: f64) -> f64 {
    cpl_from_bounds(env.lower(w), env.upper(w))
}

/// Same, from already-evaluated envelope values at the association point.
pub fn cpl_from_bounds(lower_cdf: f64, upper_cdf: f64) -> f64 {
    let a = 2.0 * (1.0 - lower_cdf);
    let b = 2.0 * upper_cdf;
    1.0f64.min(a).min(b).max(0.0)
}

/// Build an envelope over a finite nuisance grid.
pub fn envelope_from_family<F: Fn(f64, f64) -> f64>(
    family: F,
    nuisance_grid: &[f64],
) -> Result<CdfEnvelope<F>> {
    CdfEnvelope::new(family, nuisance_grid)
}

/// Search controls for [`invert_plausibility`].
#[derive(Debug, Clone, Copy)]
pub struct SearchSettings {
    /// A parameter value believed to lie inside the interval.
    pub center: f64,
    /// Initial bracket half-width.
    pub radius: f64,
    /// When set, the component is located on a grid of this many points and
    /// endpoints are reported at grid resolution (for step plausibilities).
    pub grid: Option<usize>,
}

impl SearchSettings {
    pub fn continuous(center: f64, radius: f64) -> Self {
        SearchSettings { center, radius, grid: None }
    }
}

const MAX_DOUBLINGS: usize = 60;

/// Invert a plausibility function: the connected component of
/// `{eta : pl(eta) >= alpha}` containing the search center.
///
/// The bracket radius doubles (up to 60 times) until `pl < alpha` on both
/// sides; endpoints are then located by bisection to relative tolerance 1e-6,
/// or at grid resolution when `search.grid` is set.
pub fn invert_plausibility<P: Fn(f64) -> f64>(
    pl: P,
    alpha: f64,
    search: SearchSettings,
) -> Result<IntervalEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must be in (0,1)"));
    }
    let center = search.center;
    if !(pl(center) >= alpha) {
        return Err(Error::NoInterval("plausibility at the search center is below alpha"));
    }
    let radius = if search.radius > 0.0 { search.radius } else { 1.0 };

    let expand = |dir: f64| -> Result<f64> {
        let mut r = radius;
        for _ in 0..MAX_DOUBLINGS {
            let probe = center + dir * r;
            if pl(probe) < alpha {
                return Ok(probe);
            }
            r *= 2.0;
        }
        Err(Error::Divergence("plausibility never fell below alpha during bracket expansion"))
    };
    let below_left = expand(-1.0)?;
    let below_right = expand(1.0)?;

    match search.grid {
        None => {
            // Continuous bisection on each side.
            let scale = math::abs(center).max(math::abs(below_left)).max(math::abs(below_right)).max(1.0);
            let tol = 1e-6 * scale;
            let mut lo = below_left;
            let mut hi = center;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if pl(mid) >= alpha {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let lower = 0.5 * (lo + hi);
            let mut lo = center;
            let mut hi = below_right;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if pl(mid) >= alpha {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let upper = 0.5 * (lo + hi);
            IntervalEstimate::new(lower, upper, 1.0 - alpha, "plausibility-inversion")
        }
        Some(grid_size) => {
            let g = grid_size.max(3);
            let step = (below_right - below_left) / (g - 1) as f64;
            let values: Vec<(f64, bool)> = (0..g)
                .map(|i| {
                    let x = below_left + step * i as f64;
                    (x, pl(x) >= alpha)
                })
                .collect();
            let center_idx =
                math::round((center - below_left) / step).clamp(0.0, (g - 1) as f64) as usize;
            let mut lo_idx = center_idx;
            let mut hi_idx = center_idx;
            while lo_idx > 0 && values[lo_idx - 1].1 {
                lo_idx -= 1;
            }
            while hi_idx + 1 < g && values[hi_idx + 1].1 {
                hi_idx += 1;
            }
            let multimodal = values[..lo_idx].iter().any(|v| v.1)
                || values[hi_idx + 1..].iter().any(|v| v.1);
            let mut est =
                IntervalEstimate::new(values[lo_idx].0, values[hi_idx].0, 1.0 - alpha, "plausibility-inversion")?;
            if multimodal {
                est.diagnostics.push(String::from("plausibility mass beyond the reported component"));
            }
            Ok(est)
        }
    }
}

/// Monte-Carlo sample realized as a step CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// Evaluate at `s`: (# samples <= s) / count.
    pub fn eval(&self, s: f64) -> f64 {
        let k = self.sorted.partition_point(|&x| x <= s);
        k as f64 / self.sorted.len() as f64
    }

    pub fn count(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }
}

/// Sort a Monte-Carlo sample into an [`EmpiricalCdf`].
pub fn ecdf_build(mut samples: Vec<f64>) -> Result<EmpiricalCdf> {
    if samples.is_empty() {
        return Err(Error::Config("empirical CDF requires a nonempty sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Numeric(alloc::string::String::from("empirical CDF sample contains NaN")));
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(EmpiricalCdf { sorted: samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{phi, std_normal_quantile};
    use alloc::vec;

    #[test]
    fn cpl_from_cdf_examples() {
        assert_eq!(cpl_from_cdf(|_| 0.5, 0.0), 1.0);
        assert!((cpl_from_cdf(|_| 0.975, 0.0) - 0.05).abs() < 1e-15);
        assert!((cpl_from_cdf(phi, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cpl_from_envelope_examples() {
        // collapse to the exact-CDF case
        let env = envelope_from_family(|_, s| phi(s), &[0.0]).unwrap();
        assert!((cpl_from_envelope(&env, 0.0) - 1.0).abs() < 1e-15);
        assert!((cpl_from_bounds(0.99, 0.995) - 0.02).abs() < 1e-12);
        // shift family {Phi(s - theta)}, theta in [-1, 1]: at w = 0 the
        // plausibility saturates at 1.
        let env = envelope_from_family(|theta, s| phi(s - theta), &[-1.0, 0.0, 1.0]).unwrap();
        assert!((cpl_from_envelope(&env, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_shift_family() {
        let grid = [-1.0, 0.0, 1.0];
        let env = envelope_from_family(|theta, s| phi(s - theta), &grid).unwrap();
        for &s in &[-2.0, -0.3, 0.0, 0.7, 2.5] {
            assert!((env.lower(s) - phi(s - 1.0)).abs() < 1e-12);
            assert!((env.upper(s) - phi(s + 1.0)).abs() < 1e-12);
        }
        // singleton family: lower == upper == member
        let env = envelope_from_family(|_, s| phi(s), &[0.3]).unwrap();
        assert!((env.lower(0.4) - env.upper(0.4)).abs() < 1e-15);
        assert!((env.lower(0.4) - phi(0.4)).abs() < 1e-15);
    }

    #[test]
    fn empty_nuisance_grid_is_config_error() {
        assert!(matches!(envelope_from_family(|_, s: f64| s, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn invert_gaussian_cpl() {
        // pl(eta) = 2 Phi(-|eta|), alpha = 0.05 -> (-1.959964, 1.959964)
        let pl = |eta: f64| 2.0 * phi(-math::abs(eta));
        let est = invert_plausibility(pl, 0.05, SearchSettings::continuous(0.0, 1.0)).unwrap();
        let z = std_normal_quantile(0.975).unwrap();
        assert!((est.lower + z).abs() < 1e-5);
        assert!((est.upper - z).abs() < 1e-5);

        // pl(eta) = 1 - |1 - 2 Phi(eta - 3)| at alpha = 0.5
        let pl = |eta: f64| 1.0 - math::abs(1.0 - 2.0 * phi(eta - 3.0));
        let est = invert_plausibility(pl, 0.5, SearchSettings::continuous(3.0, 0.5)).unwrap();
        let lo = 3.0 + std_normal_quantile(0.25).unwrap();
        let hi = 3.0 + std_normal_quantile(0.75).unwrap();
        assert!((est.lower - lo).abs() < 1e-5);
        assert!((est.upper - hi).abs() < 1e-5);
    }

    #[test]
    fn invert_flat_plausibility_diverges() {
        let est = invert_plausibility(|_| 1.0, 0.05, SearchSettings::continuous(0.0, 1.0));
        assert!(matches!(est, Err(Error::Divergence(_))));
    }

    #[test]
    fn invert_below_alpha_at_center() {
        let est = invert_plausibility(|_| 0.01, 0.05, SearchSettings::continuous(0.0, 1.0));
        assert!(matches!(est, Err(Error::NoInterval(_))));
    }

    #[test]
    fn ecdf_basics() {
        let e = ecdf_build(vec![3.0, 1.0, 2.0]).unwrap();
        assert!((e.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(3.0), 1.0);
        assert!(ecdf_build(vec![]).is_err());
    }

    #[test]
    fn curve_csv_round() {
        let c = PlausibilityCurve::new(vec![0.0, 1.0, 2.0], vec![0.1, 1.0, 0.3]).unwrap();
        let csv = c.to_csv_string();
        assert!(csv.starts_with("parameter,plausibility\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(PlausibilityCurve::new(vec![0.0, 0.0, 2.0], vec![0.1, 1.0, 0.3]).is_err());
        assert!(PlausibilityCurve::new(vec![0.0, 1.0, 2.0], vec![0.1, 1.5, 0.3]).is_err());
    }
}
