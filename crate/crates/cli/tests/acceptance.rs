//! Acceptance suite: one test per release criterion, each printing a
//! `[criterion N] PASS` line (visible with `--nocapture`) and enforcing the
//! stated tolerance. Replication counts follow the desk-scale protocol with
//! tolerances widened to three Monte-Carlo standard errors where noted.

use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;

use pbayes_cli::sim::{
    fig1_curves, run_simulation, EngineParams, ModelKind, SimulationConfig, SimulationReport,
    TruthParams,
};
use pbayes_core::binom::{omega_hat_delta, BinomData, DeltaPrior};
use pbayes_core::normal::{
    fwb_cdf_batch, optimal_interval_conjugate, wb_sample_unknown_tau, KnownTauConfig, NormalData,
    UnknownTauConfig,
};
use pbayes_core::RandomStream;

const Z975: f64 = 1.959963984540054;

fn base_config(model: ModelKind, methods: &[&str], sizes: &[usize], reps: usize, seed: u64) -> SimulationConfig {
    SimulationConfig {
        model,
        methods: methods.iter().map(|m| m.to_string()).collect(),
        sample_sizes: sizes.to_vec(),
        replications: reps,
        alpha: 0.05,
        base_seed: seed,
        threads: None,
        truth: TruthParams::default(),
        engine: EngineParams::default(),
    }
}

#[test]
fn criterion_01_fig1_analytic_reproduction() {
    let t0 = Instant::now();
    let ns: Vec<u64> = (1..=200).collect();
    let rows = fig1_curves(&ns, 1.0, 1.0, 0.05).unwrap();
    let analytic_elapsed = t0.elapsed();

    // EB coverage at n = 2 equals the exact Gaussian value (0.8905 at 4 dp)
    let eb2 = rows[1].eb_coverage;
    assert!((eb2 - 0.8904688161476248).abs() < 1e-12, "EB coverage at n=2: {eb2}");
    // rising monotonically toward the nominal level
    for w in rows.windows(2) {
        assert!(w[1].eb_coverage > w[0].eb_coverage, "EB curve not increasing at n={}", w[0].n);
        assert!(w[1].eb_coverage < 0.95);
    }
    let eb_tail = fig1_curves(&[100_000], 1.0, 1.0, 0.05).unwrap()[0].eb_coverage;
    assert!((eb_tail - 0.95).abs() < 1e-4, "EB asymptote: {eb_tail}");
    // PB coverage exactly the nominal level for every n
    assert!(rows.iter().all(|r| r.pb_coverage == 0.95));
    assert!(analytic_elapsed.as_secs_f64() < 1.0, "analytic table took {analytic_elapsed:?}");

    // Monte-Carlo verification of the analytic EB value at n = 2 (1e6 reps)
    let mut d = RandomStream::new(10_101).draws();
    let reps = 1_000_000;
    let half = Z975 * 0.5f64.sqrt();
    let mut hits = 0u64;
    for _ in 0..reps {
        let mu1 = d.standard_normal();
        let mu2 = d.standard_normal();
        let x1 = mu1 + d.standard_normal();
        let x2 = mu2 + d.standard_normal();
        let center = 0.5 * x1 + 0.5 * (x1 + x2) / 2.0;
        if (center - mu1).abs() <= half {
            hits += 1;
        }
    }
    let mc = hits as f64 / reps as f64;
    assert!((mc - eb2).abs() < 0.001, "MC {mc} vs analytic {eb2}");
    println!(
        "[criterion 1] PASS: EB(n=2) = {eb2:.6} (MC {mc:.6}), monotone to 0.95, PB = 0.95; \
         analytic table in {analytic_elapsed:?}"
    );
}

#[test]
fn criterion_02_normal_known_tau_validity() {
    let t0 = Instant::now();
    let cfg = base_config(ModelKind::NormalKnownTau, &["pb"], &[2, 5, 10, 50], 10_000, 1);
    let report = run_simulation(&cfg).unwrap();
    for &n in &[2usize, 5, 10, 50] {
        let row = report.row(n, "pb").unwrap();
        assert!(
            (row.coverage - 0.95).abs() <= 0.0065,
            "PB coverage at n={n}: {:.4}",
            row.coverage
        );
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    let covs: Vec<String> =
        report.rows.iter().map(|r| format!("n={}: {:.4}", r.n, r.coverage)).collect();
    println!("[criterion 2] PASS: PB coverage within 0.95±0.0065 ({}); {elapsed:?}", covs.join(", "));
}

/// Shared by criteria 3 and 8: the unknown-tau study at tau in {0.5, 1}.
fn unknown_tau_reports() -> &'static Vec<(f64, SimulationReport)> {
    static REPORTS: OnceLock<Vec<(f64, SimulationReport)>> = OnceLock::new();
    REPORTS.get_or_init(|| {
        [0.5f64, 1.0]
            .iter()
            .map(|&tau| {
                let mut cfg = base_config(
                    ModelKind::NormalUnknownTau,
                    &["pb", "naive-eb"],
                    &[10, 30, 50],
                    1000,
                    77_031_500 + (tau * 10.0) as u64,
                );
                cfg.truth.tau = tau;
                (tau, run_simulation(&cfg).unwrap())
            })
            .collect()
    })
}

#[test]
fn criterion_03_normal_unknown_tau_study() {
    let t0 = Instant::now();
    let reports = unknown_tau_reports();
    let mut notes = Vec::new();
    for (tau, report) in reports {
        for &n in &[10usize, 30, 50] {
            let pb = report.row(n, "pb").unwrap();
            assert!(pb.coverage >= 0.94, "tau={tau} n={n}: PB coverage {:.4}", pb.coverage);
        }
        let pb10 = report.row(10, "pb").unwrap();
        let eb10 = report.row(10, "naive-eb").unwrap();
        let se = (pb10.mc_se * pb10.mc_se + eb10.mc_se * eb10.mc_se).sqrt();
        assert!(
            eb10.coverage < pb10.coverage - 2.0 * se,
            "tau={tau}: naive EB {:.4} not below PB {:.4} - 2se",
            eb10.coverage,
            pb10.coverage
        );
        let w10 = report.row(10, "pb").unwrap().mean_width;
        let w30 = report.row(30, "pb").unwrap().mean_width;
        let w50 = report.row(50, "pb").unwrap().mean_width;
        assert!(w10 > w30 && w30 > w50, "tau={tau}: widths not decreasing: {w10} {w30} {w50}");
        notes.push(format!(
            "tau={tau}: PB {:.3}/{:.3}/{:.3}, naiveEB(10) {:.3}",
            report.row(10, "pb").unwrap().coverage,
            report.row(30, "pb").unwrap().coverage,
            report.row(50, "pb").unwrap().coverage,
            eb10.coverage
        ));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!("[criterion 3] PASS: {}; {elapsed:?}", notes.join("; "));
}

#[test]
fn criterion_04_quadrature_vs_monte_carlo_oracle() {
    let t0 = Instant::now();
    let cfg = UnknownTauConfig::new(0.05).unwrap();
    let mut combos = Vec::new();
    for &omega in &[0.1f64, 0.5, 0.9] {
        for &h in &[-2.0f64, 0.0, 2.0] {
            for &n in &[5usize, 10, 30] {
                combos.push((omega, h, n));
            }
        }
    }
    let sups: Vec<(f64, f64, usize, f64)> = combos
        .par_iter()
        .map(|&(omega, h, n)| {
            let seed = 400 + n as u64 + (omega * 10.0) as u64 * 100 + (h + 2.0) as u64 * 7;
            let mut draws =
                wb_sample_unknown_tau(omega, h, n, &cfg, 100_000, &RandomStream::new(seed))
                    .unwrap();
            draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let f = fwb_cdf_batch(&draws, omega, h, n, &cfg).unwrap();
            let m = draws.len() as f64;
            let mut sup: f64 = 0.0;
            for (i, fi) in f.iter().enumerate() {
                sup = sup.max((fi - i as f64 / m).abs()).max((fi - (i as f64 + 1.0) / m).abs());
            }
            (omega, h, n, sup)
        })
        .collect();
    let mut worst = (0.0, 0.0, 0usize, 0.0f64);
    for &(omega, h, n, sup) in &sups {
        assert!(sup <= 0.01, "sup {sup:.4} at omega={omega}, h={h}, n={n}");
        if sup > worst.3 {
            worst = (omega, h, n, sup);
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "[criterion 4] PASS: 27-point lattice, worst sup {:.4} at (omega={}, h={}, n={}); {elapsed:?}",
        worst.3, worst.0, worst.1, worst.2
    );
}

#[test]
fn criterion_05_poisson_study() {
    let t0 = Instant::now();
    let mut notes = Vec::new();
    for &s in &[2.0f64, 10.0] {
        let mut cfg = base_config(
            ModelKind::Poisson,
            &["pb", "eb"],
            &[10, 30],
            500,
            560_000 + s as u64,
        );
        cfg.truth.shape_s = s;
        cfg.truth.scale_gamma = 1.0;
        cfg.engine.mc_count = 2000;
        cfg.engine.lambda_grid = 101;
        let report = run_simulation(&cfg).unwrap();
        for &n in &[10usize, 30] {
            let pb = report.row(n, "pb").unwrap();
            assert_eq!(pb.failures, 0, "s={s} n={n}: {} PB failures", pb.failures);
            assert!(
                pb.coverage >= 0.94 - 3.0 * pb.mc_se,
                "s={s} n={n}: PB coverage {:.4} (se {:.4})",
                pb.coverage,
                pb.mc_se
            );
        }
        // the naive-EB baseline is closed-form, so its below-nominal
        // coverage is certified on a high-replication run where two
        // standard errors actually separate it from 0.95
        let mut eb_cfg = base_config(ModelKind::Poisson, &["eb"], &[10], 40_000, 565_656);
        eb_cfg.truth.shape_s = s;
        eb_cfg.truth.scale_gamma = 1.0;
        let eb_report = run_simulation(&eb_cfg).unwrap();
        let eb10 = eb_report.row(10, "eb").unwrap();
        assert!(
            eb10.coverage < 0.95 - 2.0 * eb10.mc_se,
            "s={s}: naive EB coverage {:.4} (se {:.4}) not below nominal",
            eb10.coverage,
            eb10.mc_se
        );
        let w10 = report.row(10, "pb").unwrap().mean_width;
        let w30 = report.row(30, "pb").unwrap().mean_width;
        assert!(w30 < w10, "s={s}: PB width not decreasing: {w10} -> {w30}");
        notes.push(format!(
            "s={s}: PB {:.3}/{:.3}, EB(10) {:.4} at 40k reps, width {:.2}->{:.2}",
            report.row(10, "pb").unwrap().coverage,
            report.row(30, "pb").unwrap().coverage,
            eb10.coverage,
            w10,
            w30
        ));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1800.0, "took {elapsed:?}");
    println!("[criterion 5] PASS: {}; {elapsed:?}", notes.join("; "));
}

#[test]
fn criterion_06_binomial_study() {
    let t0 = Instant::now();
    let mut notes = Vec::new();
    for &(a, b) in &[(2.0f64, 2.0f64), (2.0, 5.0)] {
        let mut cfg = base_config(
            ModelKind::BinomDiff,
            &["pb"],
            &[20, 50],
            500,
            660_000 + (b * 10.0) as u64,
        );
        cfg.truth.prior_a = a;
        cfg.truth.prior_b = b;
        cfg.engine.binom_mc_count = 2000;
        let report = run_simulation(&cfg).unwrap();
        for &n in &[20usize, 50] {
            let pb = report.row(n, "pb").unwrap();
            assert_eq!(pb.failures, 0, "(a,b)=({a},{b}) n={n}: {} failures", pb.failures);
            assert!(
                pb.coverage >= 0.93,
                "(a,b)=({a},{b}) m=n={n}: PB coverage {:.4}",
                pb.coverage
            );
        }
        let w20 = report.row(20, "pb").unwrap().mean_width;
        let w50 = report.row(50, "pb").unwrap().mean_width;
        assert!(w50 < w20, "(a,b)=({a},{b}): width not decreasing: {w20} -> {w50}");
        notes.push(format!(
            "(a,b)=({a},{b}): PB {:.3}/{:.3}, width {:.3}->{:.3}",
            report.row(20, "pb").unwrap().coverage,
            report.row(50, "pb").unwrap().coverage,
            w20,
            w50
        ));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1800.0, "took {elapsed:?}");
    println!("[criterion 6] PASS: {}; {elapsed:?}", notes.join("; "));
}

#[test]
fn criterion_07_theorem_2_conjugate_oracle() {
    // closed-form agreement at s0 = 0
    let root = RandomStream::new(700);
    for r in 0..50u64 {
        let mut d = root.substream(r).draws();
        let n = 2 + (r % 10) as usize;
        let tau = 0.3 + 2.0 * d.uniform();
        let mu = -1.0 + 2.0 * d.uniform();
        let xs: Vec<f64> = (0..n)
            .map(|_| mu + tau * d.standard_normal() + d.standard_normal())
            .collect();
        let data = NormalData::unit_sigma(xs).unwrap();
        let cfg = KnownTauConfig::new(tau, 0.05).unwrap();
        let est = optimal_interval_conjugate(&data, &cfg, (mu, 0.0)).unwrap();
        let w = 1.0 / (tau * tau + 1.0);
        let center = (1.0 - w) * data.observations()[0] + w * mu;
        let half = Z975 * (1.0 - w).sqrt();
        assert!((est.lower - (center - half)).abs() < 1e-6);
        assert!((est.upper - (center + half)).abs() < 1e-6);
    }
    // joint coverage of the oracle interval
    let cfg = base_config(ModelKind::NormalKnownTau, &["oracle"], &[5], 10_000, 701);
    let report = run_simulation(&cfg).unwrap();
    let row = report.row(5, "oracle").unwrap();
    assert!(
        (row.coverage - 0.95).abs() <= 0.0065,
        "oracle coverage {:.4}",
        row.coverage
    );
    println!(
        "[criterion 7] PASS: conjugate interval matches the closed form to 1e-6; joint coverage {:.4}",
        row.coverage
    );
}

#[test]
fn criterion_08_theorem_3_width_efficiency() {
    let reports = unknown_tau_reports();
    let report = &reports.iter().find(|(tau, _)| *tau == 1.0).unwrap().1;
    // oracle width: flat-prior-limit conjugate interval, deterministic
    let oracle_width = |n: f64| {
        let w = 0.5; // tau = sigma = 1
        2.0 * Z975 * (1.0 - w * (n - 1.0) / n).sqrt()
    };
    let ratio10 = report.row(10, "pb").unwrap().mean_width / oracle_width(10.0);
    let ratio50 = report.row(50, "pb").unwrap().mean_width / oracle_width(50.0);
    assert!(ratio50 < ratio10, "ratio not decreasing: {ratio10:.4} -> {ratio50:.4}");
    assert!(ratio50 <= 1.10, "ratio at n=50: {ratio50:.4}");
    println!("[criterion 8] PASS: PB/oracle width ratio {ratio10:.4} (n=10) -> {ratio50:.4} (n=50)");
}

#[test]
fn criterion_09_cubic_solver_correctness() {
    let root = RandomStream::new(900);
    let prior = DeltaPrior::new(2.0, 2.0).unwrap();
    let mut interior = 0;
    let mut boundary = 0;
    for r in 0..1000u64 {
        let mut d = root.substream(r).draws();
        let m = 1 + (d.uniform() * 150.0) as u64;
        let n = 1 + (d.uniform() * 150.0) as u64;
        let x = (d.uniform() * (m + 1) as f64) as u64;
        let y = (d.uniform() * (n + 1) as f64) as u64;
        let data = BinomData::new(x.min(m), m, y.min(n), n).unwrap();
        let delta = -0.99 + 1.98 * d.uniform();
        let oh = omega_hat_delta(&data, &prior, delta).unwrap();
        if oh.at_boundary {
            boundary += 1;
            continue;
        }
        interior += 1;
        let p2 = oh.p2;
        let lo = (-delta).max(0.0);
        let hi = (1.0 - delta).min(1.0);
        assert!(p2 > lo && p2 < hi, "rep {r}: root {p2} outside ({lo}, {hi})");
        // cubic residual scaled by m + n
        let (xf, mf, yf, nf) = (data.x as f64, data.m as f64, data.y as f64, data.n as f64);
        let ca = mf + nf;
        let cb = -(xf + yf) - mf * (1.0 - delta) - nf * (1.0 - 2.0 * delta);
        let cc = xf - mf * delta + yf * (1.0 - 2.0 * delta) - nf * (delta - delta * delta);
        let cd = yf * (delta - delta * delta);
        let resid = ((ca * p2 + cb) * p2 + cc) * p2 + cd;
        assert!(
            resid.abs() <= 1e-9 * (mf + nf),
            "rep {r}: cubic residual {resid:.3e} (m+n = {})",
            mf + nf
        );
        // stationarity of the omega derivative
        let p1 = p2 + delta;
        let mut score = 0.0;
        if data.x > 0 {
            score += xf / p1;
        }
        if data.m - data.x > 0 {
            score -= (mf - xf) / (1.0 - p1);
        }
        if data.y > 0 {
            score += yf / p2;
        }
        if data.n - data.y > 0 {
            score -= (nf - yf) / (1.0 - p2);
        }
        let dl_domega = score * 0.5 * (1.0 - delta.abs());
        assert!(
            dl_domega.abs() <= 1e-8,
            "rep {r}: |dl/domega| = {:.3e}",
            dl_domega.abs()
        );
    }
    // delta = 0: pooled-rate identity is exact
    for r in 0..100u64 {
        let mut d = root.substream(10_000 + r).draws();
        let m = 1 + (d.uniform() * 100.0) as u64;
        let n = 1 + (d.uniform() * 100.0) as u64;
        let x = (d.uniform() * (m + 1) as f64) as u64;
        let y = (d.uniform() * (n + 1) as f64) as u64;
        let data = BinomData::new(x.min(m), m, y.min(n), n).unwrap();
        let oh = omega_hat_delta(&data, &prior, 0.0).unwrap();
        if oh.at_boundary {
            continue;
        }
        let pooled = (data.x + data.y) as f64 / (m + n) as f64;
        assert!(
            (oh.p2 - pooled).abs() <= 1e-12,
            "rep {r}: pooled identity off by {:.3e}",
            (oh.p2 - pooled).abs()
        );
    }
    println!(
        "[criterion 9] PASS: 1000 instances ({interior} interior roots, {boundary} boundary flags), \
         residual <= 1e-9 (m+n), |dl/domega| <= 1e-8, pooled identity exact"
    );
}

#[test]
fn criterion_10_determinism_across_thread_counts() {
    let run_pair = |mut cfg: SimulationConfig| -> (String, String) {
        cfg.threads = Some(1);
        let one = run_simulation(&cfg).unwrap().to_csv();
        cfg.threads = Some(2);
        let two = run_simulation(&cfg).unwrap().to_csv();
        (one, two)
    };

    // full-scale rerun of the known-tau study
    let cfg = base_config(ModelKind::NormalKnownTau, &["pb", "eb", "oracle"], &[2, 5, 10, 50], 10_000, 1);
    let (one, two) = run_pair(cfg);
    assert_eq!(one, two, "known-tau report differs across thread counts");

    // desk-scale reruns of every randomized model path
    let mut cfg = base_config(ModelKind::NormalUnknownTau, &["pb", "naive-eb"], &[10], 100, 1001);
    cfg.truth.tau = 1.0;
    let (one, two) = run_pair(cfg);
    assert_eq!(one, two, "unknown-tau report differs across thread counts");

    let mut cfg = base_config(ModelKind::Poisson, &["pb", "eb"], &[10], 100, 1002);
    cfg.engine.mc_count = 500;
    cfg.engine.lambda_grid = 61;
    let (one, two) = run_pair(cfg);
    assert_eq!(one, two, "poisson report differs across thread counts");

    let mut cfg = base_config(ModelKind::BinomDiff, &["pb"], &[20], 100, 1003);
    cfg.engine.binom_mc_count = 500;
    let (one, two) = run_pair(cfg);
    assert_eq!(one, two, "binomial report differs across thread counts");

    println!(
        "[criterion 10] PASS: reports bit-identical for 1 vs 2 threads \
         (known-tau at full scale; unknown-tau, poisson, binomial at 100 reps)"
    );
}
