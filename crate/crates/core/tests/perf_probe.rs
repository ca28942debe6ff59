//! Manual timing probes (run with `cargo test --test perf_probe -- --ignored --nocapture`).

use pbayes_core::binom::{pb_interval_binom, BinomConfig, BinomData, DeltaPrior};
use pbayes_core::normal::{pb_interval_unknown_tau, NormalData, UnknownTauConfig};
use pbayes_core::poisson::{pb_interval_poisson, PoissonData, PoissonPriorConfig};
use pbayes_core::RandomStream;
use std::time::Instant;

#[test]
#[ignore]
fn probe_unknown_tau() {
    let cfg = UnknownTauConfig::new(0.05).unwrap();
    let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin() * 1.3).collect();
    let d = NormalData::unit_sigma(xs).unwrap();
    let t0 = Instant::now();
    let reps = 20;
    for _ in 0..reps {
        let est = pb_interval_unknown_tau(&d, &cfg).unwrap();
        assert!(est.width() > 0.0);
    }
    println!("pb_interval_unknown_tau (n=30): {:?} per call", t0.elapsed() / reps);
}

#[test]
#[ignore]
fn probe_poisson() {
    for (s, n) in [(2.0, 10usize), (2.0, 30), (10.0, 10), (10.0, 30)] {
        let mut cfg = PoissonPriorConfig::new(s, 0.05).unwrap();
        cfg.mc_count = 2000;
        cfg.lambda_grid_size = 101;
        let counts: Vec<u64> = (0..n).map(|i| ((i * 7) % 5 + 1) as u64 * s as u64).collect();
        let d = PoissonData::with_unit_exposures(counts).unwrap();
        let t0 = Instant::now();
        let est = pb_interval_poisson(&d, &cfg, &RandomStream::new(1)).unwrap();
        println!("pb_interval_poisson (s={s}, n={n}): {:?}, width {:.3}", t0.elapsed(), est.width());
    }
}

#[test]
#[ignore]
fn probe_binom() {
    for mn in [20u64, 50] {
        let cfg = BinomConfig::new(0.05).unwrap();
        let prior = DeltaPrior::new(2.0, 2.0).unwrap();
        let d = BinomData::new(mn / 3, mn, mn / 2, mn).unwrap();
        let t0 = Instant::now();
        let est = pb_interval_binom(&d, &prior, &cfg, &RandomStream::new(1)).unwrap();
        println!("pb_interval_binom (m=n={mn}): {:?}, width {:.3}", t0.elapsed(), est.width());
    }
}
