use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, SCHEMA_VERSION};
use super::scenario::{run_prepared, setup, Method, ScenarioResult};
use crate::central::{central_optimal_assignment, MAX_EXHAUSTIVE_POSITIONS};
use crate::error::{Error, Result};

/// One CSV row: a position filled (or not) by one method in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub run: usize,
    pub seed: u64,
    pub method: Method,
    /// `coalition * S + sector`.
    pub position: usize,
    /// Member-to-anchor distance; `None` when the position stayed empty.
    pub distance_m: Option<f64>,
    /// Score of the coalition holding the position.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub distributed_value: f64,
    pub central_value: f64,
    /// Best achievable total score from exhaustive search, when the size
    /// allows it.
    pub oracle_value: Option<f64>,
    pub distributed_complete: bool,
    pub central_complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionStats {
    pub position: usize,
    pub coalition: usize,
    pub sector: usize,
    pub distributed_mean_m: Option<f64>,
    pub central_mean_m: Option<f64>,
    /// Runs in which the method filled the position.
    pub distributed_filled: usize,
    pub central_filled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub schema_version: u32,
    pub runs: usize,
    pub base_seed: u64,
    pub positions: Vec<PositionStats>,
    pub mean_distance_distributed_m: f64,
    pub mean_distance_central_m: f64,
    /// `(distributed - central) / central` on the mean distances.
    pub relative_gap: f64,
    pub mean_value_distributed: f64,
    pub mean_value_central: f64,
    /// Runs where the exhaustive optimum scored below the distributed total.
    pub dominance_violations: usize,
    pub summaries: Vec<RunSummary>,
}

impl BatchMetrics {
    pub fn central_never_worse(&self) -> bool {
        self.positions.iter().all(|p| match (p.central_mean_m, p.distributed_mean_m) {
            (Some(c), Some(d)) => c <= d,
            _ => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub metrics: BatchMetrics,
    pub rows: Vec<BatchRow>,
}

impl BatchResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run,seed,method,position,distance_m,value\n");
        for r in &self.rows {
            let d = r.distance_m.map(|d| format!("{d:.6}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{},{}", r.run, r.seed, r.method, r.position, d, r.value);
        }
        out
    }

    /// Two series keyed by sector position.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("position,coalition,sector,distributed_m,central_m\n");
        let fmt = |v: Option<f64>| v.map(|d| format!("{d:.6}")).unwrap_or_default();
        for p in &self.metrics.positions {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.position,
                p.coalition,
                p.sector,
                fmt(p.distributed_mean_m),
                fmt(p.central_mean_m)
            );
        }
        out
    }
}

struct RunOutput {
    rows: Vec<BatchRow>,
    summary: RunSummary,
}

fn one_run(cfg: &ScenarioConfig, run: usize) -> Result<RunOutput> {
    let seed = cfg.rng_seed.wrapping_add(run as u64);
    let cfg = ScenarioConfig { rng_seed: seed, ..cfg.clone() };
    let wrap = |e: Error| Error::RunFailed { seed, source: Box::new(e) };
    let s = setup(&cfg).map_err(wrap)?;
    let dist = run_prepared(&cfg, &s, Method::Distributed).map_err(wrap)?;
    let cent = run_prepared(&cfg, &s, Method::Central).map_err(wrap)?;
    let oracle_value = if cfg.positions() <= MAX_EXHAUSTIVE_POSITIONS {
        let o = central_optimal_assignment(&s.fleet.followers, &s.specs, &cfg.rules(), cfg.mission_time, cfg.value_params())
            .map_err(wrap)?;
        Some(o.total_score())
    } else {
        None
    };
    let mut rows = Vec::new();
    for (method, res) in [(Method::Distributed, &dist), (Method::Central, &cent)] {
        rows.extend(rows_for(run, seed, method, res, cfg.sectors));
    }
    Ok(RunOutput {
        rows,
        summary: RunSummary {
            run,
            seed,
            distributed_value: dist.total_value,
            central_value: cent.total_value,
            oracle_value,
            distributed_complete: dist.all_complete(),
            central_complete: cent.all_complete(),
        },
    })
}

fn rows_for(run: usize, seed: u64, method: Method, res: &ScenarioResult, sectors: usize) -> Vec<BatchRow> {
    res.positions
        .iter()
        .map(|p| BatchRow {
            run,
            seed,
            method,
            position: p.coalition * sectors + p.sector,
            distance_m: p.distance_m,
            value: res.values[p.coalition],
        })
        .collect()
}

/// Runs both methods on seeds `base, base + 1, ...` and aggregates. Up to
/// `parallel` runs execute at once; the output is in run order either way.
/// The first failing run, by index, aborts the batch.
pub fn run_batch(cfg: &ScenarioConfig, n_runs: usize, parallel: usize) -> Result<BatchResult> {
    if n_runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    cfg.validate()?;
    let outputs: Vec<Result<RunOutput>> = if parallel <= 1 {
        (0..n_runs).map(|r| one_run(cfg, r)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        pool.install(|| (0..n_runs).into_par_iter().map(|r| one_run(cfg, r)).collect())
    };
    let outputs: Vec<RunOutput> = outputs.into_iter().collect::<Result<_>>()?;

    let positions = cfg.positions();
    let mut sums = vec![[0.0f64; 2]; positions];
    let mut counts = vec![[0usize; 2]; positions];
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for out in outputs {
        for r in &out.rows {
            if let Some(d) = r.distance_m {
                let m = r.method as usize;
                sums[r.position][m] += d;
                counts[r.position][m] += 1;
            }
        }
        rows.extend(out.rows);
        summaries.push(out.summary);
    }

    let mean = |s: f64, n: usize| (n > 0).then(|| s / n as f64);
    let stats: Vec<PositionStats> = (0..positions)
        .map(|p| PositionStats {
            position: p,
            coalition: p / cfg.sectors,
            sector: p % cfg.sectors,
            distributed_mean_m: mean(sums[p][0], counts[p][0]),
            central_mean_m: mean(sums[p][1], counts[p][1]),
            distributed_filled: counts[p][0],
            central_filled: counts[p][1],
        })
        .collect();
    let overall = |m: usize| {
        let n: usize = counts.iter().map(|c| c[m]).sum();
        mean(sums.iter().map(|s| s[m]).sum(), n).unwrap_or(0.0)
    };
    let (dist_m, cent_m) = (overall(0), overall(1));
    let n = summaries.len() as f64;
    let metrics = BatchMetrics {
        schema_version: SCHEMA_VERSION,
        runs: n_runs,
        base_seed: cfg.rng_seed,
        positions: stats,
        mean_distance_distributed_m: dist_m,
        mean_distance_central_m: cent_m,
        relative_gap: if cent_m > 0.0 { (dist_m - cent_m) / cent_m } else { 0.0 },
        mean_value_distributed: summaries.iter().map(|s| s.distributed_value).sum::<f64>() / n,
        mean_value_central: summaries.iter().map(|s| s.central_value).sum::<f64>() / n,
        dominance_violations: summaries
            .iter()
            .filter(|s| s.oracle_value.is_some_and(|o| o < s.distributed_value))
            .count(),
        summaries,
    };
    Ok(BatchResult { metrics, rows })
}
