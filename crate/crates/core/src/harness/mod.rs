//! Monte Carlo driver: one trial runs the estimator and the genie-aided
//! baselines on the same channel realization; a sweep repeats trials over a
//! grid of SNRs and (optionally) RIS sizes or training lengths.

pub mod config;
pub mod emit;

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{dft_phase, generate_channels, generate_pilots, simulate_received, ChannelPair, NoiseSpec, SystemDims};
use crate::error::{Error, Result};
use crate::estimator::{als_estimate, check_feasibility, genie_ls_h1, genie_ls_h2, AlsConfig};
use crate::metrics::{aligned_nmse, to_db};
use crate::rng::{derive_seed, StreamTag};

pub use config::{OutputFormat, OutputSpec, SweepConfig, SweepVariable};
pub use emit::{emit_results, write_csv, write_json, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Als,
    GenieLsH1,
    GenieLsH2,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Als => "als",
            Method::GenieLsH1 => "genie_ls_h1",
            Method::GenieLsH2 => "genie_ls_h2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub channel: u64,
    pub noise: u64,
}

impl TrialSeeds {
    /// Seeds depend only on `(base, trial)`. Every point of a sweep reuses the
    /// same channel draws and the same unit-variance noise draws, scaled by
    /// the point's noise level, so differences between points are not masked
    /// by independent sampling noise. Adding points never changes a trial.
    pub fn derive(base: u64, trial: u64) -> Self {
        TrialSeeds {
            channel: derive_seed(base, &[trial], StreamTag::Channel),
            noise: derive_seed(base, &[trial], StreamTag::Noise),
        }
    }
}

/// One method's result on one trial. Genie baselines estimate a single
/// channel, so the other NMSE is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub method: Method,
    pub nmse_h1: Option<f64>,
    pub nmse_h2: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MethodOutcome {
    Estimated(MethodRecord),
    Discarded { method: Method, reason: String },
}

impl MethodOutcome {
    pub fn method(&self) -> Method {
        match self {
            MethodOutcome::Estimated(r) => r.method,
            MethodOutcome::Discarded { method, .. } => *method,
        }
    }

    fn discarded(method: Method, err: Error) -> Self {
        log::warn!("{method} trial discarded: {err}");
        MethodOutcome::Discarded {
            method,
            reason: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecords {
    pub dims: SystemDims,
    pub snr_db: f64,
    pub seeds: TrialSeeds,
    pub outcomes: Vec<MethodOutcome>,
}

impl TrialRecords {
    pub fn get(&self, method: Method) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.method() == method)
    }
}

/// Generate one realization and estimate it with every requested method.
///
/// Estimator failures become [`MethodOutcome::Discarded`]; only invalid or
/// infeasible dimensions are returned as errors.
pub fn run_trial(
    dims: &SystemDims,
    snr_db: f64,
    seeds: TrialSeeds,
    als_cfg: &AlsConfig,
    with_baselines: bool,
) -> Result<TrialRecords> {
    dims.validate()?;
    let report = check_feasibility(dims);
    if !report.is_feasible() {
        return Err(Error::Infeasible(report));
    }
    let truth = generate_channels(dims, seeds.channel)?;
    let phi = dft_phase(dims.p, dims.n)?;
    let pilots = generate_pilots(dims.m, dims.t)?;
    let noise = NoiseSpec::from_snr_db(snr_db)?;
    let z = simulate_received(dims, &truth, &phi, &pilots, &noise, seeds.noise)?;

    let mut outcomes = Vec::with_capacity(3);
    let als = als_estimate(&z, &phi, als_cfg).and_then(|est| {
        let rec = aligned_nmse(&truth, &est.channels())?;
        Ok(MethodRecord {
            method: Method::Als,
            nmse_h1: Some(rec.nmse_h1),
            nmse_h2: Some(rec.nmse_h2),
            iterations: Some(est.iterations),
            converged: Some(est.converged),
        })
    });
    outcomes.push(als.map_or_else(|e| MethodOutcome::discarded(Method::Als, e), MethodOutcome::Estimated));

    if with_baselines {
        let g1 = genie_ls_h1(&z, truth.h2.as_ref(), &phi).and_then(|h1| {
            let est = ChannelPair { h1, h2: truth.h2.clone() };
            let rec = aligned_nmse(&truth, &est)?;
            Ok(MethodRecord {
                method: Method::GenieLsH1,
                nmse_h1: Some(rec.nmse_h1),
                nmse_h2: None,
                iterations: None,
                converged: None,
            })
        });
        outcomes.push(g1.map_or_else(|e| MethodOutcome::discarded(Method::GenieLsH1, e), MethodOutcome::Estimated));

        let g2 = genie_ls_h2(&z, truth.h1.as_ref(), &phi).and_then(|h2| {
            let est = ChannelPair { h1: truth.h1.clone(), h2 };
            let rec = aligned_nmse(&truth, &est)?;
            Ok(MethodRecord {
                method: Method::GenieLsH2,
                nmse_h1: None,
                nmse_h2: Some(rec.nmse_h2),
                iterations: None,
                converged: None,
            })
        });
        outcomes.push(g2.map_or_else(|e| MethodOutcome::discarded(Method::GenieLsH2, e), MethodOutcome::Estimated));
    }

    Ok(TrialRecords {
        dims: *dims,
        snr_db,
        seeds,
        outcomes,
    })
}

/// One `(sweep value, SNR)` combination of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep_value: f64,
    pub snr_db: f64,
    pub dims: SystemDims,
}

/// Aggregate over the trials of one point for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub snr_db: f64,
    pub method: Method,
    pub nmse_h1: Option<f64>,
    pub nmse_h1_db: Option<f64>,
    pub nmse_h2: Option<f64>,
    pub nmse_h2_db: Option<f64>,
    /// Trials run, including discarded ones.
    pub trials: usize,
    pub discarded: usize,
    pub mean_iters: Option<f64>,
    pub max_iters: Option<usize>,
    pub converged_frac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub wall_time_s: f64,
}

impl SweepResult {
    pub fn row(&self, sweep_value: f64, snr_db: f64, method: Method) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.snr_db == snr_db && r.method == method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, Execution::Parallel)
}

pub fn run_sweep_with(cfg: &SweepConfig, execution: Execution) -> Result<SweepResult> {
    let start = Instant::now();
    let points = cfg.preflight()?;
    let items: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (0..cfg.trials as u64).map(move |t| (p, t)))
        .collect();
    let records = execute(cfg, &points, &items, execution)?;
    Ok(SweepResult {
        config: cfg.clone(),
        rows: aggregate(cfg, &points, records),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

type Keyed = ((usize, u64), TrialRecords);

fn execute(cfg: &SweepConfig, points: &[SweepPoint], items: &[(usize, u64)], execution: Execution) -> Result<Vec<Keyed>> {
    let run = |&(p, t): &(usize, u64)| -> Result<Keyed> {
        let point = &points[p];
        let seeds = TrialSeeds::derive(cfg.base_seed, t);
        let rec = run_trial(&point.dims, point.snr_db, seeds, &cfg.als, cfg.baselines)?;
        Ok(((p, t), rec))
    };
    let mut out: Vec<Keyed> = match execution {
        Execution::Sequential => items.iter().map(run).collect::<Result<_>>()?,
        Execution::Parallel => items.par_iter().map(run).collect::<Result<_>>()?,
    };
    // reduction order must not depend on execution order
    out.sort_by_key(|(key, _)| *key);
    Ok(out)
}

fn aggregate(cfg: &SweepConfig, points: &[SweepPoint], records: Vec<Keyed>) -> Vec<SweepRow> {
    let methods: &[Method] = if cfg.baselines {
        &[Method::Als, Method::GenieLsH1, Method::GenieLsH2]
    } else {
        &[Method::Als]
    };
    let mut rows = Vec::with_capacity(points.len() * methods.len());
    for (idx, point) in points.iter().enumerate() {
        let trials: Vec<&TrialRecords> = records
            .iter()
            .filter(|((p, _), _)| *p == idx)
            .map(|(_, r)| r)
            .collect();
        for &method in methods {
            rows.push(summarize(cfg.sweep.name(), point, method, &trials));
        }
    }
    rows
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn summarize(sweep_var: &str, point: &SweepPoint, method: Method, trials: &[&TrialRecords]) -> SweepRow {
    let mut h1 = Vec::new();
    let mut h2 = Vec::new();
    let mut iters = Vec::new();
    let mut converged = Vec::new();
    let mut discarded = 0;
    for rec in trials {
        match rec.get(method) {
            Some(MethodOutcome::Estimated(r)) => {
                h1.extend(r.nmse_h1);
                h2.extend(r.nmse_h2);
                iters.extend(r.iterations);
                converged.extend(r.converged);
            }
            Some(MethodOutcome::Discarded { .. }) | None => discarded += 1,
        }
    }
    let nmse_h1 = mean(&h1);
    let nmse_h2 = mean(&h2);
    SweepRow {
        sweep_var: sweep_var.to_string(),
        sweep_value: point.sweep_value,
        snr_db: point.snr_db,
        method,
        nmse_h1,
        nmse_h1_db: nmse_h1.map(to_db),
        nmse_h2,
        nmse_h2_db: nmse_h2.map(to_db),
        trials: trials.len(),
        discarded,
        mean_iters: mean(&iters.iter().map(|&i| i as f64).collect::<Vec<_>>()),
        max_iters: iters.iter().copied().max(),
        converged_frac: mean(&converged.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect::<Vec<_>>()),
    }
}
