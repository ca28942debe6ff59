//! Brute-force oracles for the Poisson hierarchical model: trapezoid
//! quadrature of the marginal likelihood, grid-search MLE, exact enumeration
//! of the n = 1 auxiliary distribution, and plausibility-shape checks.

use pbayes_core::poisson::{
    b_statistic_poisson, eb_exp_prior_fit, marginal_loglik_lambda1, mle_lambda1, pl_poisson,
    wb_sample_poisson, PoissonData, PoissonPriorConfig, LAMBDA_FLOOR,
};
use pbayes_core::special::ln_gamma;
use pbayes_core::RandomStream;

fn cfg(s: f64) -> PoissonPriorConfig {
    PoissonPriorConfig::new(s, 0.05).unwrap()
}

#[test]
fn marginal_loglik_matches_trapezoid_oracle() {
    // n=2, s=2, t=(1,1), x=(1,1), lambda=1: brute-force trapezoid on
    // v in (0, 50] with 1e5 points.
    let s = 2.0;
    let (x2, t2, lam) = (1u64, 1.0, 1.0);
    let k = 100_000;
    let h = 50.0 / k as f64;
    let mut acc = 0.0;
    for i in 1..=k {
        let v = h * i as f64;
        let p = 1.0 / (1.0 + lam * t2 / v);
        let integrand = (ln_gamma(x2 as f64 + s) - ln_gamma(s)).exp()
            * p.powf(s)
            * (1.0 - p).powi(x2 as i32)
            * v.powf(s - 1.0)
            * (-v).exp()
            / ln_gamma(s).exp();
        let w = if i == k { 0.5 } else { 1.0 };
        acc += w * integrand;
    }
    let want = 1.0 * lam.ln() - lam * 1.0 + (acc * h).ln();
    let d = PoissonData::new(vec![1, 1], vec![1.0, 1.0]).unwrap();
    let got = marginal_loglik_lambda1(&d, &cfg(s), lam).unwrap();
    assert!((got - want).abs() < 1e-6, "{got} vs oracle {want}");
}

#[test]
fn mle_matches_grid_search_oracle() {
    // n=5, x=(3,2,4,1,2), t=1, s=2: 1e4-point grid on (0, 20]
    let d = PoissonData::with_unit_exposures(vec![3, 2, 4, 1, 2]).unwrap();
    let c = cfg(2.0);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 1..=10_000 {
        let lam = 20.0 * i as f64 / 10_000.0;
        let v = marginal_loglik_lambda1(&d, &c, lam).unwrap();
        if v > best.0 {
            best = (v, lam);
        }
    }
    let got = mle_lambda1(&d, &c).unwrap();
    assert!((got - best.1).abs() < 2e-3, "mle {got} vs grid argmax {}", best.1);
    // and the solver's value is at least the grid's best
    assert!(marginal_loglik_lambda1(&d, &c, got).unwrap() >= best.0 - 1e-9);
}

#[test]
fn wb_n1_matches_exact_enumeration() {
    // n = 1: the auxiliary statistic reduces to
    // x log(x / lambda) - x + lambda with x ~ Pois(lambda); enumerate x.
    let lam = 3.0;
    let template = PoissonData::new(vec![2], vec![1.0]).unwrap();
    let mut c = cfg(2.0);
    c.mc_count = 10_000;
    let ecdf = wb_sample_poisson(lam, &template, &c, &RandomStream::new(42)).unwrap();

    // exact weighted atoms over x in 0..=50
    let b_of = |x: u64| -> f64 {
        if x == 0 {
            // boundary MLE at the floor
            -LAMBDA_FLOOR + lam
        } else {
            let xf = x as f64;
            xf * (xf / lam).ln() - xf + lam
        }
    };
    let mut atoms: Vec<(f64, f64)> = (0..=50u64)
        .map(|x| {
            let ln_pmf = x as f64 * lam.ln() - lam - ln_gamma(x as f64 + 1.0);
            (b_of(x), ln_pmf.exp())
        })
        .collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let exact_cdf = |s: f64| -> f64 {
        atoms.iter().filter(|(b, _)| *b <= s).map(|(_, w)| w).sum()
    };
    // sup distance probed just past each atom (the Monte-Carlo b values
    // carry ~1e-12 optimizer jitter around the exact atom positions)
    let mut sup: f64 = 0.0;
    for &(b, _) in &atoms {
        let s = b + 1e-6;
        sup = sup.max((ecdf.eval(s) - exact_cdf(s)).abs());
        let s = b - 1e-6;
        sup = sup.max((ecdf.eval(s) - exact_cdf(s)).abs());
    }
    assert!(sup <= 0.01, "sup distance {sup}");
}

#[test]
fn plausibility_region_is_an_interval() {
    // with common random numbers the accept set on the grid is contiguous
    let d = PoissonData::with_unit_exposures(vec![4, 2, 3, 5, 1, 2]).unwrap();
    let mut c = cfg(2.0);
    c.mc_count = 500;
    let stream = RandomStream::new(8);
    let mle = mle_lambda1(&d, &c).unwrap();
    let accept: Vec<bool> = (0..60)
        .map(|i| {
            let lam = mle * (0.15f64.ln() + (20.0f64 / 0.15).ln() * i as f64 / 59.0).exp();
            pl_poisson(&d, &c, lam, &stream).unwrap() >= c.alpha
        })
        .collect();
    let first = accept.iter().position(|&a| a).unwrap();
    let last = accept.iter().rposition(|&a| a).unwrap();
    assert!(
        accept[first..=last].iter().all(|&a| a),
        "accept set has gaps: {accept:?}"
    );
}

#[test]
fn b_statistic_positive_away_from_mle() {
    let d = PoissonData::with_unit_exposures(vec![6, 3, 2]).unwrap();
    let c = cfg(2.0);
    let mle = mle_lambda1(&d, &c).unwrap();
    for k in 1..=8 {
        let off = 0.4 * k as f64;
        assert!(b_statistic_poisson(&d, &c, mle + off).unwrap() > 0.0);
        if mle - off > 0.0 {
            assert!(b_statistic_poisson(&d, &c, mle - off).unwrap() > 0.0);
        }
    }
}

#[test]
fn exp_prior_fit_recovers_truth_on_synthetic_league() {
    // 90 records with per-unit rates p ~ Exp(mean 0.4), exposures 20..40,
    // counts Pois(n p); the fitted mean lands near the truth.
    let mut d = RandomStream::new(314).draws();
    let mut records = Vec::new();
    for i in 0..90 {
        let p = -0.4 * d.uniform().ln();
        let n = 20.0 + (i % 21) as f64;
        let mean = n * p;
        let u = d.uniform();
        let x = pbayes_core::dist::discrete_quantile(
            pbayes_core::dist::DiscreteKind::Poisson { mean },
            u,
        )
        .unwrap();
        records.push((x, n));
    }
    let fit = eb_exp_prior_fit(&records).unwrap();
    assert!(
        fit.theta_hat > 0.3 && fit.theta_hat < 0.5,
        "theta_hat {}",
        fit.theta_hat
    );
    assert!(!fit.at_boundary);
}

#[test]
fn mixed_exposures_group_correctly() {
    // unequal exposures exercise the grouped likelihood path
    let d = PoissonData::new(vec![3, 2, 4, 1], vec![2.0, 1.0, 1.0, 3.0]).unwrap();
    let c = cfg(2.0);
    let mle = mle_lambda1(&d, &c).unwrap();
    assert!(mle > 0.0 && mle.is_finite());
    // maximality against a local grid
    let at = marginal_loglik_lambda1(&d, &c, mle).unwrap();
    for &f in &[0.8, 0.9, 1.1, 1.25] {
        assert!(marginal_loglik_lambda1(&d, &c, mle * f).unwrap() <= at + 1e-9);
    }
}
