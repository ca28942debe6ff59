//! Interval estimators for the first group mean in the normal hierarchical
//! model `X_i | mu_i ~ N(mu_i, sigma^2)`, `mu_i ~ N(mu, tau^2)` with the
//! hyper-mean `mu` unknown.
//!
//! With `tau` known everything is closed-form: the partial-prior interval has
//! the same center as the empirical-Bayes one but half-width
//! `z * sigma * sqrt(1 - omega (n-1)/n)` instead of
//! `z * sigma * sqrt(1 - omega)`, where `omega = sigma^2/(tau^2 + sigma^2)`.
//! With `tau` unknown the auxiliary-variable CDF is a one-dimensional
//! integral indexed by `omega = (1 + tau^2)^{-1}`; its pointwise envelope
//! over `omega` yields a conservative plausibility and the interval comes
//! from inverting the envelope.
//!
//! The unknown-`tau` machinery assumes unit sampling variance; general
//! `sigma` is handled by rescaling the data on entry and the interval on
//! exit.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::im::{envelope_from_family, CdfEnvelope, IntervalEstimate, PlausibilityCurve};
use crate::math;
use crate::special::{gauss_legendre, ln_gamma, phi, std_normal_quantile};
use crate::stream::RandomStream;
use crate::{Error, Result};

/// Observations for the normal hierarchical model.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalData {
    observations: Vec<f64>,
    sigma: f64,
}

impl NormalData {
    pub fn new(observations: Vec<f64>, sigma: f64) -> Result<Self> {
        if observations.len() < 2 {
            return Err(Error::DegenerateData("need at least two observations".to_string()));
        }
        if observations.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateData("observations must be finite".to_string()));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain("sigma must be a positive real"));
        }
        Ok(NormalData { observations, sigma })
    }

    /// Unit sampling standard deviation.
    pub fn unit_sigma(observations: Vec<f64>) -> Result<Self> {
        NormalData::new(observations, 1.0)
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn mean(&self) -> f64 {
        self.observations.iter().sum::<f64>() / self.len() as f64
    }

    /// Mean and (n-2)-denominator standard deviation of x_2..x_n.
    fn rest_mean_sd(&self) -> Result<(f64, f64)> {
        let rest = &self.observations[1..];
        let m = rest.len();
        let mean = rest.iter().sum::<f64>() / m as f64;
        let ss: f64 = rest.iter().map(|x| (x - mean) * (x - mean)).sum();
        let sd = math::sqrt(ss / (m as f64 - 1.0));
        if !(sd > 0.0) {
            return Err(Error::DegenerateData(
                "x_2..x_n have zero sample variance".to_string(),
            ));
        }
        Ok((mean, sd))
    }
}

/// Known prior scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownTauConfig {
    pub tau: f64,
    pub alpha: f64,
}

impl KnownTauConfig {
    pub fn new(tau: f64, alpha: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain("tau must be a positive real"));
        }
        check_alpha(alpha)?;
        Ok(KnownTauConfig { tau, alpha })
    }
}

/// Unknown prior scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnknownTauConfig {
    /// Tempering exponent in the variance clamp, in (0, 1/2).
    pub tempering_gamma: f64,
    /// Number of grid points for the omega envelope.
    pub omega_grid_size: usize,
    /// Base node count of the Gauss rule behind the auxiliary CDF.
    pub quadrature_nodes: usize,
    /// Log-density drop from the weight mode at which the integration domain
    /// is truncated.
    pub quadrature_tail_drop: f64,
    pub alpha: f64,
}

impl UnknownTauConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(UnknownTauConfig {
            tempering_gamma: 1.0 / 3.0,
            omega_grid_size: 101,
            quadrature_nodes: 64,
            quadrature_tail_drop: 60.0,
            alpha,
        })
    }

    pub fn with_tempering_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::Domain("tempering exponent must lie in (0, 1/2)"));
        }
        self.tempering_gamma = gamma;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tempering_gamma > 0.0 && self.tempering_gamma < 0.5) {
            return Err(Error::Domain("tempering exponent must lie in (0, 1/2)"));
        }
        if self.omega_grid_size < 3 {
            return Err(Error::Config("omega grid needs at least 3 points"));
        }
        if self.quadrature_nodes < 8 {
            return Err(Error::Config("quadrature needs at least 8 nodes"));
        }
        if !(self.quadrature_tail_drop > 10.0) {
            return Err(Error::Config("quadrature tail drop must exceed 10"));
        }
        check_alpha(self.alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("alpha must be in (0,1)"))
    }
}

fn shrinkage_omega(sigma: f64, tau: f64) -> f64 {
    sigma * sigma / (tau * tau + sigma * sigma)
}

// ---------------------------------------------------------------------------
// Known tau: closed forms.
// ---------------------------------------------------------------------------

/// Empirical Bayes interval: center `(1-w) X_1 + w Xbar`, half-width
/// `z sigma sqrt(1-w)`.
pub fn eb_interval_known_tau(data: &NormalData, cfg: &KnownTauConfig) -> Result<IntervalEstimate> {
    let w = shrinkage_omega(data.sigma, cfg.tau);
    let center = (1.0 - w) * data.observations[0] + w * data.mean();
    let z = std_normal_quantile(1.0 - cfg.alpha / 2.0)?;
    let half = z * data.sigma * math::sqrt(1.0 - w);
    IntervalEstimate::new(center - half, center + half, 1.0 - cfg.alpha, "eb-known-tau")
}

/// Partial Bayes interval: same center, half-width
/// `z sigma sqrt(1 - w (n-1)/n)`.
pub fn pb_interval_known_tau(data: &NormalData, cfg: &KnownTauConfig) -> Result<IntervalEstimate> {
    let n = data.len() as f64;
    let w = shrinkage_omega(data.sigma, cfg.tau);
    let center = (1.0 - w) * data.observations[0] + w * data.mean();
    let z = std_normal_quantile(1.0 - cfg.alpha / 2.0)?;
    let half = z * data.sigma * math::sqrt(1.0 - w * (n - 1.0) / n);
    IntervalEstimate::new(center - half, center + half, 1.0 - cfg.alpha, "pb-known-tau")
}

/// Conditional plausibility of `mu1` in the known-tau model:
/// `2 Phi(-|center - mu1| / halfscale)`.
pub fn pb_cpl_known_tau(data: &NormalData, cfg: &KnownTauConfig, mu1: f64) -> Result<f64> {
    let n = data.len() as f64;
    let w = shrinkage_omega(data.sigma, cfg.tau);
    let center = (1.0 - w) * data.observations[0] + w * data.mean();
    let halfscale = data.sigma * math::sqrt(1.0 - w * (n - 1.0) / n);
    Ok(2.0 * phi(-math::abs(center - mu1) / halfscale))
}

/// Conditional law of the auxiliary variable given the ancillary residuals,
/// in sigma = 1 units (general sigma is handled by pre-scaling the data):
/// mean `tau^2 (1+tau^2)^{-1} (xbar - x_1)`, variance
/// `(n tau^2 + 1) / (n (tau^2 + 1))`.
pub fn wb_conditional_law_known_tau(
    data: &NormalData,
    cfg: &KnownTauConfig,
) -> Result<(f64, f64)> {
    let n = data.len() as f64;
    let scale = 1.0 / data.sigma;
    let tau = cfg.tau * scale;
    let x1 = data.observations[0] * scale;
    let xbar = data.mean() * scale;
    let t2 = tau * tau;
    let mean = t2 / (1.0 + t2) * (xbar - x1);
    let var = (n * t2 + 1.0) / (n * (t2 + 1.0));
    Ok((mean, var))
}

/// Exact coverage of the empirical-Bayes interval under the joint law of
/// `(X, mu_1)`: `2 Phi(z sigma sqrt(1-w) / sqrt(v)) - 1` with
/// `v = (1-w)^2 s^2 + w^2 (t^2 + (s^2-t^2)/n) + 2 w (1-w) s^2 / n`.
pub fn eb_coverage_analytic(n: u64, tau: f64, sigma: f64, alpha: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("eb_coverage_analytic requires n >= 1"));
    }
    if !(tau > 0.0) || !(sigma > 0.0) {
        return Err(Error::Domain("tau and sigma must be positive"));
    }
    check_alpha(alpha)?;
    let nf = n as f64;
    let w = shrinkage_omega(sigma, tau);
    let s2 = sigma * sigma;
    let t2 = tau * tau;
    let v = (1.0 - w) * (1.0 - w) * s2
        + w * w * (t2 + (s2 - t2) / nf)
        + 2.0 * w * (1.0 - w) * s2 / nf;
    let z = std_normal_quantile(1.0 - alpha / 2.0)?;
    Ok(2.0 * phi(z * sigma * math::sqrt(1.0 - w) / math::sqrt(v)) - 1.0)
}

/// Conjugate-posterior credible interval for `mu_1` when the hyper-prior
/// `mu ~ N(m0, s0^2)` is fully known (`s0 = 0` means `mu = m0`; `s0 = inf`
/// is the flat-prior limit). This is the optimality oracle the partial-Bayes
/// interval is compared against.
pub fn optimal_interval_conjugate(
    data: &NormalData,
    cfg: &KnownTauConfig,
    hyperprior: (f64, f64),
) -> Result<IntervalEstimate> {
    let (m0, s0) = hyperprior;
    if !(s0 >= 0.0) {
        return Err(Error::Domain("hyper-prior sd must be >= 0"));
    }
    let n = data.len() as f64;
    let s2 = data.sigma * data.sigma;
    let marg = cfg.tau * cfg.tau + s2;
    let (mu_post, var_post) = if s0 == 0.0 {
        (m0, 0.0)
    } else if s0.is_infinite() {
        (data.mean(), marg / n)
    } else {
        let prec = 1.0 / (s0 * s0) + n / marg;
        ((m0 / (s0 * s0) + n * data.mean() / marg) / prec, 1.0 / prec)
    };
    let w = shrinkage_omega(data.sigma, cfg.tau);
    let center = (1.0 - w) * data.observations[0] + w * mu_post;
    let var = s2 * (1.0 - w) + w * w * var_post;
    let z = std_normal_quantile(1.0 - cfg.alpha / 2.0)?;
    let half = z * math::sqrt(var);
    IntervalEstimate::new(center - half, center + half, 1.0 - cfg.alpha, "bayes-conjugate")
}

/// The naive empirical-Bayes baseline when `tau` is unknown: plug the moment
/// estimate `tauhat^2 = max(0, m2 - sigma^2)` (`m2` the 1/n-denominator
/// sample variance) into the known-tau formula.
pub fn naive_eb_interval_unknown_tau(data: &NormalData, alpha: f64) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let n = data.len() as f64;
    let mean = data.mean();
    let m2 = data.observations.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let s2 = data.sigma * data.sigma;
    let tau2 = (m2 - s2).max(0.0);
    let w = s2 / (tau2 + s2);
    let center = (1.0 - w) * data.observations[0] + w * mean;
    let z = std_normal_quantile(1.0 - alpha / 2.0)?;
    let half = z * data.sigma * math::sqrt(1.0 - w);
    IntervalEstimate::new(center - half, center + half, 1.0 - alpha, "naive-eb")
}

// ---------------------------------------------------------------------------
// Unknown tau.
// ---------------------------------------------------------------------------

/// The conditioning statistic `h = sqrt((n-1)/n) (x_1 - xbar_(-1)) / S_(-1)`,
/// which follows a Student t with n-2 degrees of freedom under the model.
pub fn h_statistic(data: &NormalData) -> Result<f64> {
    let n = data.len();
    if n < 4 {
        return Err(Error::DegenerateData(
            "unknown-tau inference needs at least 4 observations".to_string(),
        ));
    }
    let (rest_mean, rest_sd) = data.rest_mean_sd()?;
    let nf = n as f64;
    Ok(math::sqrt((nf - 1.0) / nf) * (data.observations[0] - rest_mean) / rest_sd)
}

/// Centering and scaling of the association, chosen so the auxiliary variable
/// has conditional mean zero and is asymptotically standard normal:
///
/// ```text
/// mu~     = sqrt((n-1)/n) h ((n-2)/(h^2+n-2) / S - S)
/// sigma~2 = max{ n^-gamma, 1 - (n-1)(n-2)(n-3-h^2) / (n (n-2+h^2)^2) / S^2 }
/// ```
///
/// computed on the data rescaled to unit sampling variance.
pub fn mu_sigma_tilde(data: &NormalData, cfg: &UnknownTauConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let scaled = scale_to_unit_sigma(data)?;
    mu_sigma_tilde_scaled(&scaled, cfg)
}

fn scale_to_unit_sigma(data: &NormalData) -> Result<NormalData> {
    if data.sigma == 1.0 {
        return Ok(data.clone());
    }
    let obs = data.observations.iter().map(|x| x / data.sigma).collect();
    NormalData::new(obs, 1.0)
}

fn mu_sigma_tilde_scaled(scaled: &NormalData, cfg: &UnknownTauConfig) -> Result<(f64, f64)> {
    let n = scaled.len() as f64;
    if scaled.len() < 4 {
        return Err(Error::DegenerateData(
            "unknown-tau inference needs at least 4 observations".to_string(),
        ));
    }
    let h = h_statistic(scaled)?;
    let (_, s) = scaled.rest_mean_sd()?;
    let h2 = h * h;
    let mu_tilde = math::sqrt((n - 1.0) / n) * h * ((n - 2.0) / (h2 + n - 2.0) / s - s);
    let correction = (n - 1.0) * (n - 2.0) * (n - 3.0 - h2)
        / (n * (n - 2.0 + h2) * (n - 2.0 + h2))
        / (s * s);
    let sigma2 = math::powf(n, -cfg.tempering_gamma).max(1.0 - correction);
    Ok((mu_tilde, math::sqrt(sigma2)))
}

/// Coefficients of the auxiliary CDF integrand for fixed `(h, n)`.
struct FwbFamily {
    n: f64,
    gamma: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    /// log of the chi-square weight prefactor after x = t^2
    ln_pref: f64,
    /// weight mode in t and the truncation point
    t_hi: f64,
    base_nodes: Vec<f64>,
    base_weights: Vec<f64>,
}

impl FwbFamily {
    fn new(h: f64, n: usize, cfg: &UnknownTauConfig, nodes: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Domain("auxiliary CDF requires n >= 4"));
        }
        cfg.validate()?;
        let nf = n as f64;
        let h2 = h * h;
        let k = nf - 1.0; // chi-square dof
        let c1 = (nf - 2.0) * (nf - 3.0 - h2) / (nf * (h2 + nf - 2.0));
        let c2 = (nf - 1.0) * h / math::sqrt(nf * (h2 + nf - 2.0));
        let c3 = (nf - 2.0) / (nf - 1.0);
        // weight after x = t^2: 2 k^{k/2} / (2^{k/2} Gamma(k/2)) * t^{k-1} e^{-k t^2 / 2}
        let ln_pref = core::f64::consts::LN_2 + 0.5 * k * math::ln(k)
            - 0.5 * k * core::f64::consts::LN_2
            - ln_gamma(0.5 * k);
        let t_star = math::sqrt((k - 1.0) / k);
        let ln_w = |t: f64| (k - 1.0) * math::ln(t) - 0.5 * k * t * t;
        let peak = ln_w(t_star);
        let mut t_hi = t_star + math::sqrt(2.0 * cfg.quadrature_tail_drop / k);
        while ln_w(t_hi) > peak - cfg.quadrature_tail_drop {
            t_hi *= 1.5;
        }
        let (base_nodes, base_weights) = gauss_legendre(nodes);
        Ok(FwbFamily {
            n: nf,
            gamma: cfg.tempering_gamma,
            c1,
            c2,
            c3,
            ln_pref,
            t_hi,
            base_nodes,
            base_weights,
        })
    }

    /// F_{W_b}(s) at nuisance value omega, integrating over the chi-square
    /// mixing variable. The variance clamp introduces a kink at
    /// `x = c1 w / (1 - n^-gamma)`; the domain is split there so each panel
    /// is smooth.
    fn cdf(&self, omega: f64, s: f64) -> f64 {
        let n = self.n;
        let k = n - 1.0;
        let floor = math::powf(n, -self.gamma);
        let den = math::sqrt(1.0 - omega * (n - 1.0) / n);
        let c2sw = self.c2 * math::sqrt(omega);
        let integrand = |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let x = t * t;
            let scale2 = floor.max(1.0 - self.c1 * omega / x);
            let num = s * math::sqrt(scale2) - c2sw * (t - self.c3 / t);
            let lnw = self.ln_pref + (k - 1.0) * math::ln(t) - 0.5 * k * x;
            phi(num / den) * math::exp(lnw)
        };
        let kink_x = self.c1 * omega / (1.0 - floor);
        let kink_t = if kink_x > 0.0 { math::sqrt(kink_x) } else { 0.0 };
        let mut acc = 0.0;
        if kink_t > 1e-12 && kink_t < self.t_hi {
            acc += self.panel(&integrand, 0.0, kink_t);
            acc += self.panel(&integrand, kink_t, self.t_hi);
        } else {
            acc += self.panel(&integrand, 0.0, self.t_hi);
        }
        acc.clamp(0.0, 1.0)
    }

    fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        crate::special::integrate_gl(f, a, b, &self.base_nodes, &self.base_weights)
    }
}

/// Evaluate the unknown-tau auxiliary CDF `F_{W_b}(s)` at nuisance value
/// `omega = (1 + tau^2)^{-1}`, conditional on the observed `h`.
///
/// The integral runs at the configured node count and is re-run at twice the
/// nodes; disagreement beyond 1e-7 after one more doubling is reported as a
/// numeric error.
pub fn fwb_cdf_unknown_tau(
    s: f64,
    omega: f64,
    h: f64,
    n: usize,
    cfg: &UnknownTauConfig,
) -> Result<f64> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::Domain("omega must lie in (0,1)"));
    }
    if s.is_nan() || h.is_nan() {
        return Err(Error::Domain("auxiliary CDF arguments must not be NaN"));
    }
    let lo = FwbFamily::new(h, n, cfg, cfg.quadrature_nodes)?;
    let hi = FwbFamily::new(h, n, cfg, cfg.quadrature_nodes * 2)?;
    let v1 = lo.cdf(omega, s);
    let v2 = hi.cdf(omega, s);
    if math::abs(v1 - v2) <= 1e-7 {
        return Ok(v2);
    }
    let hi2 = FwbFamily::new(h, n, cfg, cfg.quadrature_nodes * 4)?;
    let v3 = hi2.cdf(omega, s);
    if math::abs(v2 - v3) <= 1e-7 {
        Ok(v3)
    } else {
        Err(Error::Numeric(format!(
            "auxiliary CDF quadrature did not settle: {v1} -> {v2} -> {v3} \
             (s={s}, omega={omega}, h={h}, n={n})"
        )))
    }
}

/// Batched evaluation of the auxiliary CDF at many `s` values for one
/// `(omega, h, n)`: the quadrature rule is built once and the doubling check
/// runs on a probe subset instead of every point.
pub fn fwb_cdf_batch(
    s_values: &[f64],
    omega: f64,
    h: f64,
    n: usize,
    cfg: &UnknownTauConfig,
) -> Result<Vec<f64>> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::Domain("omega must lie in (0,1)"));
    }
    if s_values.is_empty() {
        return Ok(Vec::new());
    }
    let lo = FwbFamily::new(h, n, cfg, cfg.quadrature_nodes)?;
    let hi = FwbFamily::new(h, n, cfg, cfg.quadrature_nodes * 2)?;
    let probes = s_values.len().min(9);
    for i in 0..probes {
        let idx = if probes == 1 { 0 } else { i * (s_values.len() - 1) / (probes - 1) };
        let s = s_values[idx];
        let v1 = lo.cdf(omega, s);
        let v2 = hi.cdf(omega, s);
        if math::abs(v1 - v2) > 1e-7 {
            return Err(Error::Numeric(format!(
                "auxiliary CDF quadrature did not settle at probe s={s}: {v1} vs {v2}"
            )));
        }
    }
    Ok(s_values.iter().map(|&s| hi.cdf(omega, s)).collect())
}

/// Monte-Carlo draws of the unknown-tau auxiliary variable
/// `W_b(tau) | W_H = h` via its chi-square/normal representation; the
/// quadrature oracle for [`fwb_cdf_unknown_tau`].
pub fn wb_sample_unknown_tau(
    omega: f64,
    h: f64,
    n: usize,
    cfg: &UnknownTauConfig,
    count: usize,
    stream: &RandomStream,
) -> Result<Vec<f64>> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::Domain("omega must lie in (0,1)"));
    }
    if n < 4 {
        return Err(Error::Domain("auxiliary sampling requires n >= 4"));
    }
    cfg.validate()?;
    if count < 1 {
        return Err(Error::Config("sample count must be >= 1"));
    }
    let nf = n as f64;
    let h2 = h * h;
    let k = nf - 1.0;
    let c1 = (nf - 2.0) * (nf - 3.0 - h2) / (nf * (h2 + nf - 2.0));
    let c2 = (nf - 1.0) * h / math::sqrt(nf * (h2 + nf - 2.0));
    let c3 = (nf - 2.0) / (nf - 1.0);
    let floor = math::powf(nf, -cfg.tempering_gamma);
    let den = math::sqrt(1.0 - omega * (nf - 1.0) / nf);
    let c2sw = c2 * math::sqrt(omega);
    let mut d = stream.draws();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let m2 = d.gamma(0.5 * k) * 2.0 / k; // chi2_{n-1}/(n-1)
        let z = d.standard_normal();
        let m = math::sqrt(m2);
        let w = (c2sw * (m - c3 / m) + den * z) / math::sqrt(floor.max(1.0 - c1 * omega / m2));
        out.push(w);
    }
    Ok(out)
}

/// Everything the unknown-tau estimator needs, built once per dataset.
pub struct UnknownTauInference {
    cfg: UnknownTauConfig,
    sigma: f64,
    rest_mean_scaled: f64,
    h: f64,
    mu_tilde: f64,
    sigma_tilde: f64,
    family: FwbFamily,
    omega_grid: Vec<f64>,
}

impl UnknownTauInference {
    pub fn new(data: &NormalData, cfg: &UnknownTauConfig) -> Result<Self> {
        cfg.validate()?;
        let scaled = scale_to_unit_sigma(data)?;
        if scaled.len() < 4 {
            return Err(Error::DegenerateData(
                "unknown-tau inference needs at least 4 observations".to_string(),
            ));
        }
        let h = h_statistic(&scaled)?;
        let (mu_tilde, sigma_tilde) = mu_sigma_tilde_scaled(&scaled, cfg)?;
        let (rest_mean_scaled, _) = scaled.rest_mean_sd()?;
        // The envelope evaluates the family many times per inversion; run it
        // on the doubled rule once and for all (construction-time doubling
        // checks live in fwb_cdf_unknown_tau and the test suite).
        let family = FwbFamily::new(h, scaled.len(), cfg, cfg.quadrature_nodes * 2)?;
        let g = cfg.omega_grid_size;
        let (lo, hi) = (1e-4, 1.0 - 1e-4);
        let omega_grid: Vec<f64> =
            (0..g).map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64).collect();
        Ok(UnknownTauInference {
            cfg: *cfg,
            sigma: data.sigma(),
            rest_mean_scaled,
            h,
            mu_tilde,
            sigma_tilde,
            family,
            omega_grid,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn mu_sigma_tilde(&self) -> (f64, f64) {
        (self.mu_tilde, self.sigma_tilde)
    }

    fn envelope(&self) -> CdfEnvelope<impl Fn(f64, f64) -> f64 + '_> {
        envelope_from_family(|omega, s| self.family.cdf(omega, s), &self.omega_grid)
            .expect("omega grid is nonempty")
    }

    /// Association value for a candidate mu1 (original units).
    fn assoc(&self, mu1: f64) -> f64 {
        (self.rest_mean_scaled - mu1 / self.sigma - self.mu_tilde) / self.sigma_tilde
    }

    /// Envelope plausibility of mu1.
    pub fn cpl(&self, mu1: f64) -> f64 {
        let env = self.envelope();
        let t = self.assoc(mu1);
        crate::im::cpl_from_envelope(&env, t)
    }

    /// The interval: invert the lower envelope at 1 - alpha/2 and the upper
    /// envelope at alpha/2.
    pub fn interval(&self) -> Result<IntervalEstimate> {
        let env = self.envelope();
        let alpha = self.cfg.alpha;
        let s_hi = env.lower_inv(1.0 - alpha / 2.0, 0.0, 1e-6)?;
        let s_lo = env.upper_inv(alpha / 2.0, 0.0, 1e-6)?;
        let base = self.rest_mean_scaled - self.mu_tilde;
        let lower = (base - s_hi * self.sigma_tilde) * self.sigma;
        let upper = (base - s_lo * self.sigma_tilde) * self.sigma;
        IntervalEstimate::new(lower, upper, 1.0 - alpha, "pb-unknown-tau")
    }

    /// Midpoint of the plausibility-1 plateau: the association t maps the
    /// envelope's two median crossings back to the mu1 axis.
    pub fn point_estimate(&self) -> Result<f64> {
        let env = self.envelope();
        let t_hi = env.lower_inv(0.5, 0.0, 1e-6)?;
        let t_lo = env.upper_inv(0.5, 0.0, 1e-6)?;
        let t_mid = 0.5 * (t_lo + t_hi);
        Ok((self.rest_mean_scaled - self.mu_tilde - t_mid * self.sigma_tilde) * self.sigma)
    }

    /// Plausibility sampled over an equispaced mu1 grid.
    pub fn curve(&self, mu_lo: f64, mu_hi: f64, points: usize) -> Result<PlausibilityCurve> {
        if points < 3 || !(mu_hi > mu_lo) {
            return Err(Error::Config("curve grid must be increasing with >= 3 points"));
        }
        let env = self.envelope();
        let grid: Vec<f64> = (0..points)
            .map(|i| mu_lo + (mu_hi - mu_lo) * i as f64 / (points - 1) as f64)
            .collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&m| crate::im::cpl_from_envelope(&env, self.assoc(m)))
            .collect();
        PlausibilityCurve::new(grid, values)
    }
}

/// Partial Bayes interval for `mu_1` with unknown `tau`.
pub fn pb_interval_unknown_tau(data: &NormalData, cfg: &UnknownTauConfig) -> Result<IntervalEstimate> {
    UnknownTauInference::new(data, cfg)?.interval()
}

/// Envelope plausibility of `mu1` with unknown `tau`.
pub fn pb_cpl_unknown_tau(data: &NormalData, cfg: &UnknownTauConfig, mu1: f64) -> Result<f64> {
    Ok(UnknownTauInference::new(data, cfg)?.cpl(mu1))
}
