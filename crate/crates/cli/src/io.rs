//! CSV ingestion and JSON emission.
//!
//! Input CSVs must carry headers; the delimiter is auto-detected between
//! comma and tab; malformed rows abort the load rather than being skipped.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;

use pbayes_core::IntervalEstimate;

use crate::shotrates::ShotRecord;

fn sniff_delimiter(text: &str) -> u8 {
    match text.lines().next() {
        Some(header) if header.contains('\t') => b'\t',
        _ => b',',
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(text))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

/// One-column observations file with header `x`.
pub fn load_normal_csv(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rdr = reader(&text);
    let headers = rdr.headers().context("reading CSV header")?.clone();
    if headers.len() != 1 || headers.get(0) != Some("x") {
        bail!("expected a single-column CSV with header `x`, got {headers:?}");
    }
    let mut xs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("row {}", i + 2))?;
        let field = rec.get(0).unwrap_or("");
        let v: f64 = field
            .parse()
            .with_context(|| format!("row {}: cannot parse `{field}` as a real", i + 2))?;
        xs.push(v);
    }
    if xs.is_empty() {
        bail!("no data rows in {}", path.display());
    }
    Ok(xs)
}

/// Two-column counts/exposures file with header `x,t`.
pub fn load_poisson_csv(path: &Path) -> anyhow::Result<(Vec<u64>, Vec<f64>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rdr = reader(&text);
    let headers = rdr.headers().context("reading CSV header")?.clone();
    if headers.len() != 2 || headers.get(0) != Some("x") || headers.get(1) != Some("t") {
        bail!("expected CSV with header `x,t`, got {headers:?}");
    }
    let mut counts = Vec::new();
    let mut exposures = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("row {}", i + 2))?;
        let x: u64 = rec
            .get(0)
            .unwrap_or("")
            .parse()
            .with_context(|| format!("row {}: bad count", i + 2))?;
        let t: f64 = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .with_context(|| format!("row {}: bad exposure", i + 2))?;
        counts.push(x);
        exposures.push(t);
    }
    if counts.is_empty() {
        bail!("no data rows in {}", path.display());
    }
    Ok((counts, exposures))
}

/// Shot-rate file with header `player,made,attempts`. Under the Poisson
/// reading `made` is unbounded; rows with made > attempts only raise a
/// warning on stderr.
pub fn load_shots_csv(path: &Path) -> anyhow::Result<Vec<ShotRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rdr = reader(&text);
    let headers = rdr.headers().context("reading CSV header")?.clone();
    let want = ["player", "made", "attempts"];
    if headers.len() != 3 || (0..3).any(|i| headers.get(i) != Some(want[i])) {
        bail!("expected CSV with header `player,made,attempts`, got {headers:?}");
    }
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("row {}", i + 2))?;
        let player = rec.get(0).unwrap_or("").to_string();
        if player.is_empty() {
            bail!("row {}: empty player name", i + 2);
        }
        let made: u64 = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .with_context(|| format!("row {}: bad `made`", i + 2))?;
        let attempts: u64 = rec
            .get(2)
            .unwrap_or("")
            .parse()
            .with_context(|| format!("row {}: bad `attempts`", i + 2))?;
        if attempts == 0 {
            bail!("row {}: attempts must be positive", i + 2);
        }
        if made > attempts {
            eprintln!(
                "warning: row {}: made ({made}) exceeds attempts ({attempts}); \
                 kept (rate model does not bound counts)",
                i + 2
            );
        }
        records.push(ShotRecord { player, made, attempts });
    }
    if records.is_empty() {
        bail!("no data rows in {}", path.display());
    }
    Ok(records)
}

/// The JSON shape of an interval result.
#[derive(Debug, Serialize)]
pub struct IntervalJson {
    pub method: String,
    pub parameter: String,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub seed: Option<u64>,
    pub diagnostics: Vec<String>,
}

impl IntervalJson {
    pub fn new(est: &IntervalEstimate, parameter: &str, point: f64, seed: Option<u64>) -> Self {
        IntervalJson {
            method: est.method.clone(),
            parameter: parameter.to_string(),
            point,
            lower: est.lower,
            upper: est.upper,
            level: est.level,
            seed,
            diagnostics: est.diagnostics.clone(),
        }
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("interval serialization")
    }
}
