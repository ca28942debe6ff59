//! Distribution kernels: densities, CDFs, generalized-inverse quantiles for
//! the discrete families, and reproducible sampling from a [`RandomStream`].

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::math;
use crate::special::{ln_gamma, reg_gamma_upper, reg_inc_beta};
use crate::stream::RandomStream;
use crate::{Error, Result};

/// The distribution families the models need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    StandardNormal,
    /// Gamma(shape) with unit scale.
    Gamma { shape: f64 },
    /// chi-square with `dof` degrees of freedom, divided by `dof`.
    ScaledChiSquare { dof: u32 },
    Poisson { mean: f64 },
    Binomial { size: u32, prob: f64 },
    Uniform01,
    Beta { a: f64, b: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::StandardNormal | DistributionSpec::Uniform01 => Ok(()),
            DistributionSpec::Gamma { shape } => {
                if shape > 0.0 && shape.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain("gamma shape must be > 0"))
                }
            }
            DistributionSpec::ScaledChiSquare { dof } => {
                if dof >= 1 {
                    Ok(())
                } else {
                    Err(Error::Domain("scaled chi-square dof must be >= 1"))
                }
            }
            DistributionSpec::Poisson { mean } => {
                if mean >= 0.0 && mean.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain("poisson mean must be >= 0"))
                }
            }
            DistributionSpec::Binomial { size, prob } => {
                if size < 1 {
                    Err(Error::Domain("binomial size must be >= 1"))
                } else if (0.0..=1.0).contains(&prob) {
                    Ok(())
                } else {
                    Err(Error::Domain("binomial prob must be in [0,1]"))
                }
            }
            DistributionSpec::Beta { a, b } => {
                if a > 0.0 && b > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain("beta parameters must be > 0"))
                }
            }
        }
    }
}

/// Density at `x` of chi-square with `dof` degrees of freedom divided by
/// `dof`, i.e. Gamma(dof/2, scale 2/dof).
pub fn scaled_chi2_pdf(dof: u32, x: f64) -> Result<f64> {
    if dof < 1 {
        return Err(Error::Domain("scaled chi-square dof must be >= 1"));
    }
    if !(x > 0.0) {
        return Err(Error::Domain("scaled chi-square density requires x > 0"));
    }
    let k = dof as f64;
    // k * f_chi2(k*x): log form to stay stable for large dof.
    let y = k * x;
    let ln_pdf =
        math::ln(k) + (0.5 * k - 1.0) * math::ln(y) - 0.5 * y - 0.5 * k * core::f64::consts::LN_2
            - ln_gamma(0.5 * k);
    Ok(math::exp(ln_pdf))
}

/// Poisson CDF P(X <= k) for mean `m`, via the upper incomplete gamma.
pub fn poisson_cdf(k: i64, mean: f64) -> Result<f64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::Domain("poisson mean must be >= 0"));
    }
    if k < 0 {
        return Ok(0.0);
    }
    if mean == 0.0 {
        return Ok(1.0);
    }
    reg_gamma_upper(k as f64 + 1.0, mean)
}

/// Binomial CDF P(X <= k) for `size` trials with success probability `prob`.
pub fn binomial_cdf(k: i64, size: u32, prob: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::Domain("binomial prob must be in [0,1]"));
    }
    if k < 0 {
        return Ok(0.0);
    }
    let n = size as i64;
    if k >= n {
        return Ok(1.0);
    }
    if prob == 0.0 {
        return Ok(1.0);
    }
    if prob == 1.0 {
        return Ok(0.0); // k < n here
    }
    // P(X <= k) = I_{1-p}(n-k, k+1)
    reg_inc_beta((n - k) as f64, k as f64 + 1.0, 1.0 - prob)
}

/// Discrete distributions `discrete_quantile` understands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscreteKind {
    Poisson { mean: f64 },
    Binomial { size: u32, prob: f64 },
}

impl DiscreteKind {
    fn cdf(&self, k: i64) -> Result<f64> {
        match *self {
            DiscreteKind::Poisson { mean } => poisson_cdf(k, mean),
            DiscreteKind::Binomial { size, prob } => binomial_cdf(k, size, prob),
        }
    }

    fn mean(&self) -> f64 {
        match *self {
            DiscreteKind::Poisson { mean } => mean,
            DiscreteKind::Binomial { size, prob } => size as f64 * prob,
        }
    }

    fn upper_bound(&self) -> Option<i64> {
        match *self {
            DiscreteKind::Poisson { .. } => None,
            DiscreteKind::Binomial { size, .. } => Some(size as i64),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DiscreteKind::Poisson { mean } => DistributionSpec::Poisson { mean }.validate(),
            DiscreteKind::Binomial { size, prob } => {
                DistributionSpec::Binomial { size, prob }.validate()
            }
        }
    }
}

/// Generalized inverse CDF: the smallest integer k with CDF(k) >= u.
///
/// Scans from a mean-centered start with exponential bracketing, then binary
/// searches the bracket; each CDF evaluation is a single incomplete
/// gamma/beta call, so the expected work is O(1) for moderate means.
pub fn discrete_quantile(kind: DiscreteKind, u: f64) -> Result<u64> {
    kind.validate()?;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain("discrete_quantile requires u in (0,1)"));
    }
    let hard_hi = kind.upper_bound();
    if kind.mean() == 0.0 {
        return Ok(0);
    }
    let start = math::floor(kind.mean()) as i64;
    let (mut lo, mut hi);
    if kind.cdf(start)? >= u {
        // Walk down: find lo with CDF(lo - 1) < u (or lo == 0).
        hi = start;
        lo = start;
        let mut step = 1i64;
        loop {
            if lo == 0 {
                break;
            }
            let probe = (lo - step).max(0);
            if kind.cdf(probe - 1)? < u {
                lo = probe;
                break;
            }
            hi = probe;
            lo = probe;
            step *= 2;
        }
    } else {
        // Walk up: find hi with CDF(hi) >= u.
        lo = start + 1;
        hi = start;
        let mut step = 1i64;
        let mut guard = 0;
        loop {
            let mut probe = hi + step;
            if let Some(b) = hard_hi {
                probe = probe.min(b);
            }
            if kind.cdf(probe)? >= u {
                hi = probe;
                break;
            }
            if Some(probe) == hard_hi {
                // Numerically CDF(size) may sit just below u; saturate.
                return Ok(probe as u64);
            }
            lo = probe + 1;
            hi = probe;
            step *= 2;
            guard += 1;
            if guard > 200 {
                return Err(Error::Numeric(
                    "discrete_quantile bracket expansion failed".to_string(),
                ));
            }
        }
    }
    // Binary search smallest k in [lo, hi] with CDF(k) >= u.
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if kind.cdf(mid)? >= u {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo as u64)
}

/// A sampled value: all families draw reals; the discrete families return
/// integers embedded in f64 (exact below 2^53).
pub fn sample(spec: DistributionSpec, count: usize, stream: &RandomStream) -> Result<Vec<f64>> {
    spec.validate()?;
    if count < 1 {
        return Err(Error::Config("sample count must be >= 1"));
    }
    let mut d = stream.draws();
    let mut out = Vec::with_capacity(count);
    match spec {
        DistributionSpec::StandardNormal => {
            for _ in 0..count {
                out.push(d.standard_normal());
            }
        }
        DistributionSpec::Uniform01 => {
            for _ in 0..count {
                out.push(d.uniform());
            }
        }
        DistributionSpec::Gamma { shape } => {
            for _ in 0..count {
                out.push(d.gamma(shape));
            }
        }
        DistributionSpec::ScaledChiSquare { dof } => {
            let k = dof as f64;
            for _ in 0..count {
                out.push(d.gamma(0.5 * k) * 2.0 / k);
            }
        }
        DistributionSpec::Beta { a, b } => {
            for _ in 0..count {
                out.push(d.beta(a, b));
            }
        }
        DistributionSpec::Poisson { mean } => {
            for _ in 0..count {
                let u = d.uniform();
                out.push(discrete_quantile(DiscreteKind::Poisson { mean }, u)? as f64);
            }
        }
        DistributionSpec::Binomial { size, prob } => {
            for _ in 0..count {
                let u = d.uniform();
                out.push(discrete_quantile(DiscreteKind::Binomial { size, prob }, u)? as f64);
            }
        }
    }
    Ok(out)
}
