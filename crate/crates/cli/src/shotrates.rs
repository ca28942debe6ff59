//! The shot-rate application pipeline: per-player success-rate intervals by
//! the classical, empirical-Bayes and partial-Bayes methods, with league
//! pooling for the latter two.

use anyhow::bail;
use rayon::prelude::*;

use pbayes_core::poisson::{
    classical_interval_poisson, eb_exp_interval, eb_exp_posterior_mean, eb_exp_prior_fit,
    mle_lambda1, pb_interval_poisson, PoissonData, PoissonPriorConfig,
};
use pbayes_core::{IntervalEstimate, RandomStream};

/// One player's record: shots made in a number of attempts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub player: String,
    pub made: u64,
    pub attempts: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotMethod {
    Classical,
    Eb,
    Pb,
}

impl ShotMethod {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "classical" => ShotMethod::Classical,
            "eb" => ShotMethod::Eb,
            "pb" => ShotMethod::Pb,
            other => bail!("unknown method: {other} (expected classical, eb or pb)"),
        })
    }

    pub fn needs_seed(&self) -> bool {
        matches!(self, ShotMethod::Pb)
    }
}

#[derive(Debug, Clone)]
pub struct PlayerResult {
    pub player: String,
    pub made: u64,
    pub attempts: u64,
    pub point: f64,
    pub interval: IntervalEstimate,
}

/// Controls for the partial-Bayes branch.
#[derive(Debug, Clone, Copy)]
pub struct PbControls {
    pub shape_s: f64,
    pub mc_count: usize,
    pub lambda_grid: usize,
}

impl Default for PbControls {
    fn default() -> Self {
        PbControls { shape_s: 2.0, mc_count: 2000, lambda_grid: 101 }
    }
}

/// Run the pipeline for every player.
///
/// `classical` works per record; `eb` fits one exponential prior mean on the
/// whole league; `pb` treats the player of interest as the lead record with
/// the rest of the league as companions, and reports the
/// plausibility-maximizing rate as the point estimate.
pub fn shotrates_pipeline(
    records: &[ShotRecord],
    method: ShotMethod,
    alpha: f64,
    seed: Option<u64>,
    pb: PbControls,
) -> anyhow::Result<Vec<PlayerResult>> {
    if records.is_empty() {
        bail!("no player records");
    }
    if records.len() < 2 && !matches!(method, ShotMethod::Classical) {
        bail!("pooled methods need at least two records");
    }
    match method {
        ShotMethod::Classical => records
            .iter()
            .map(|r| {
                let interval = classical_interval_poisson(r.made, r.attempts as f64, alpha)
                    .map_err(|e| anyhow::anyhow!("{}: {e}", r.player))?;
                Ok(PlayerResult {
                    player: r.player.clone(),
                    made: r.made,
                    attempts: r.attempts,
                    point: r.made as f64 / r.attempts as f64,
                    interval,
                })
            })
            .collect(),
        ShotMethod::Eb => {
            let pairs: Vec<(u64, f64)> =
                records.iter().map(|r| (r.made, r.attempts as f64)).collect();
            let fit = eb_exp_prior_fit(&pairs).map_err(|e| anyhow::anyhow!("{e}"))?;
            if fit.at_boundary {
                eprintln!("warning: all-zero league; prior mean floored at {}", fit.theta_hat);
            }
            records
                .iter()
                .map(|r| {
                    let interval = eb_exp_interval(r.made, r.attempts as f64, fit.theta_hat, alpha)
                        .map_err(|e| anyhow::anyhow!("{}: {e}", r.player))?;
                    Ok(PlayerResult {
                        player: r.player.clone(),
                        made: r.made,
                        attempts: r.attempts,
                        point: eb_exp_posterior_mean(r.made, r.attempts as f64, fit.theta_hat),
                        interval,
                    })
                })
                .collect()
        }
        ShotMethod::Pb => {
            let seed = seed.ok_or_else(|| anyhow::anyhow!("pb requires a seed"))?;
            let root = RandomStream::new(seed);
            let mut cfg = PoissonPriorConfig::new(pb.shape_s, alpha)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            cfg.mc_count = pb.mc_count;
            cfg.lambda_grid_size = pb.lambda_grid;
            let results: Vec<anyhow::Result<PlayerResult>> = records
                .par_iter()
                .enumerate()
                .map(|(i, r)| {
                    // player of interest leads; companions follow in file order
                    let mut counts = vec![r.made];
                    let mut exposures = vec![r.attempts as f64];
                    for (j, other) in records.iter().enumerate() {
                        if j != i {
                            counts.push(other.made);
                            exposures.push(other.attempts as f64);
                        }
                    }
                    let data = PoissonData::new(counts, exposures)
                        .map_err(|e| anyhow::anyhow!("{}: {e}", r.player))?;
                    let stream = root.substream(i as u64);
                    // each player's exposure template differs, so the inner
                    // MLE memo cannot be shared across players
                    let interval = pb_interval_poisson(&data, &cfg, &stream)
                        .map_err(|e| anyhow::anyhow!("{}: {e}", r.player))?;
                    let point =
                        mle_lambda1(&data, &cfg).map_err(|e| anyhow::anyhow!("{}: {e}", r.player))?;
                    Ok(PlayerResult {
                        player: r.player.clone(),
                        made: r.made,
                        attempts: r.attempts,
                        point,
                        interval,
                    })
                })
                .collect();
            results.into_iter().collect()
        }
    }
}

/// Plot-ready CSV rendering.
pub fn results_csv(results: &[PlayerResult]) -> String {
    let mut out = String::from("player,made,attempts,method,point,lower,upper,level\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            csv_escape(&r.player),
            r.made,
            r.attempts,
            r.interval.method,
            r.point,
            r.interval.lower,
            r.interval.upper,
            r.interval.level
        ));
    }
    out
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
