//! Experiment execution and report emission.
//!
//! Trials run in parallel across a rayon pool but rows come back ordered
//! by trial id, and every per-trial random decision derives from
//! `seed ^ trial`, so reports are deterministic up to wall-clock columns.

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::instance::{build_instance, BuiltInstance};
use histotest_core::rng::RngStream;
use histotest_core::sampler::AliasSampler;
use histotest_core::select::{select_k, SelectConfig};
use histotest_core::tester::{test_histogram, TesterConfig, Verdict};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Schema version stamped into JSON reports.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str =
    "trial,seed,verdict,samples_divide,samples_sieve,samples_mass,samples_test,samples_total,wall_ms";

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub trial: u64,
    pub seed: u64,
    pub verdict: String,
    pub samples_divide: u64,
    pub samples_sieve: u64,
    pub samples_mass: u64,
    pub samples_test: u64,
    pub samples_total: u64,
    pub wall_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_distance: Option<f64>,
}

impl ReportRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.seed,
            self.verdict,
            self.samples_divide,
            self.samples_sieve,
            self.samples_mass,
            self.samples_test,
            self.samples_total,
            self.wall_ms
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub param: String,
    pub value: f64,
    pub trials: u64,
    pub accept_rate: f64,
    pub mean_samples_total: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub accept_rate: f64,
    pub mean_samples_total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepPoint>>,
}

fn tester_config(cfg: &ExperimentConfig) -> TesterConfig {
    TesterConfig {
        c_sieve: cfg.c_sieve,
        c_test: cfg.c_test,
        c_mass: cfg.c_mass,
    }
}

fn run_one(
    cfg: &ExperimentConfig,
    trial: u64,
    fixed: Option<&BuiltInstance>,
) -> CliResult<ReportRow> {
    let trial_seed = cfg.seed ^ trial;
    let start = Instant::now();
    let built;
    let inst = match fixed {
        Some(f) => f,
        None => {
            let mut irng = RngStream::new(trial_seed).substream(1);
            built = build_instance(cfg, &mut irng)?;
            &built
        }
    };
    let sampler = AliasSampler::from_weights(&inst.weights)?;
    let mut rng = RngStream::new(trial_seed).substream(2);

    let row = match cfg.mode.as_str() {
        "test" => {
            let report = test_histogram(&sampler, cfg.k, cfg.eps, &tester_config(cfg), &mut rng)?;
            let verdict = match report.verdict {
                Verdict::Accept => "accept",
                Verdict::Reject => "reject",
            };
            ReportRow {
                trial,
                seed: trial_seed,
                verdict: verdict.into(),
                samples_divide: report.phases.divide,
                samples_sieve: report.phases.sieve,
                samples_mass: report.phases.mass,
                samples_test: report.phases.test,
                samples_total: report.samples_total,
                wall_ms: start.elapsed().as_millis() as u64,
                true_k: inst.true_k,
                true_distance: inst.true_distance,
            }
        }
        "select-k" => {
            let scfg = SelectConfig {
                amp: cfg.amp,
                refine: cfg.refine,
                tester: tester_config(cfg),
            };
            let out = select_k(&sampler, cfg.eps, cfg.delta, &scfg, &mut rng)?;
            // Selection has no per-phase split; the total is the contract.
            ReportRow {
                trial,
                seed: trial_seed,
                verdict: format!("k={}", out.k_selected),
                samples_divide: 0,
                samples_sieve: 0,
                samples_mass: 0,
                samples_test: 0,
                samples_total: out.total_samples,
                wall_ms: start.elapsed().as_millis() as u64,
                true_k: inst.true_k,
                true_distance: inst.true_distance,
            }
        }
        other => {
            return Err(CliError::usage(format!("unknown mode '{}'", other)));
        }
    };
    Ok(row)
}

/// Runs `cfg.trials` independent trials, rows ordered by trial id.
pub fn run_trials(cfg: &ExperimentConfig) -> CliResult<Vec<ReportRow>> {
    let fixed = if cfg.instance.is_deterministic() {
        let mut rng = RngStream::new(cfg.seed).substream(1);
        Some(build_instance(cfg, &mut rng)?)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::runtime(format!("cannot build worker pool: {}", e)))?;
    pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_one(cfg, t, fixed.as_ref()))
            .collect()
    })
}

pub fn accept_rate(rows: &[ReportRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().filter(|r| r.verdict == "accept").count() as f64 / rows.len() as f64
}

pub fn mean_samples(rows: &[ReportRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().map(|r| r.samples_total as f64).sum::<f64>() / rows.len() as f64
}

pub fn write_csv(path: &Path, rows: &[ReportRow]) -> CliResult<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_json(path: &Path, report: &Report) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::runtime(format!("cannot serialize report: {}", e)))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs one experiment (test or select-k mode) and emits reports.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    csv: Option<&Path>,
    json: Option<&Path>,
) -> CliResult<Vec<ReportRow>> {
    let rows = run_trials(cfg)?;
    if let Some(path) = csv {
        write_csv(path, &rows)?;
    }
    if let Some(path) = json {
        let report = Report {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            accept_rate: accept_rate(&rows),
            mean_samples_total: mean_samples(&rows),
            rows,
            sweep: None,
        };
        write_json(path, &report)?;
        return Ok(report.rows);
    }
    Ok(rows)
}

/// Sweep declaration `param=v1,v2,...` over eps, n, or k.
pub fn parse_sweep(spec: &str) -> CliResult<(String, Vec<f64>)> {
    let Some((param, list)) = spec.split_once('=') else {
        return Err(CliError::usage(format!(
            "sweep spec '{}' must look like eps=0.4,0.3,0.2",
            spec
        )));
    };
    let param = param.trim();
    if !matches!(param, "eps" | "n" | "k") {
        return Err(CliError::usage(format!(
            "sweep parameter must be eps, n, or k, got '{}'",
            param
        )));
    }
    let values: Result<Vec<f64>, _> = list.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let values =
        values.map_err(|_| CliError::usage(format!("cannot parse sweep values '{}'", list)))?;
    if values.is_empty() {
        return Err(CliError::usage("sweep needs at least one value".into()));
    }
    for &v in &values {
        if !v.is_finite() || v <= 0.0 {
            return Err(CliError::usage(format!(
                "sweep values must be positive and finite, got {}",
                v
            )));
        }
    }
    Ok((param.to_string(), values))
}

/// Runs the sweep; every point reuses the base config with one field
/// replaced. Trial ids keep counting across points so seeds stay unique.
pub fn run_bench(
    cfg: &ExperimentConfig,
    param: &str,
    values: &[f64],
    csv: Option<&Path>,
    json: Option<&Path>,
) -> CliResult<(Vec<ReportRow>, Vec<SweepPoint>)> {
    let mut all_rows = Vec::new();
    let mut points = Vec::new();
    for (idx, &value) in values.iter().enumerate() {
        let mut point_cfg = cfg.clone();
        match param {
            "eps" => point_cfg.eps = value,
            "n" => point_cfg.n = value as usize,
            "k" => point_cfg.k = value as usize,
            _ => return Err(CliError::usage(format!("unknown sweep parameter '{}'", param))),
        }
        // Shift the seed so trial seeds never collide across points.
        point_cfg.seed = cfg.seed ^ ((idx as u64) << 32);
        let mut rows = run_trials(&point_cfg)?;
        for (t, row) in rows.iter_mut().enumerate() {
            row.trial = (idx * point_cfg.trials as usize + t) as u64;
        }
        points.push(SweepPoint {
            param: param.into(),
            value,
            trials: point_cfg.trials,
            accept_rate: accept_rate(&rows),
            mean_samples_total: mean_samples(&rows),
        });
        all_rows.extend(rows);
    }
    if let Some(path) = csv {
        write_csv(path, &all_rows)?;
    }
    if let Some(path) = json {
        let report = Report {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            accept_rate: accept_rate(&all_rows),
            mean_samples_total: mean_samples(&all_rows),
            rows: all_rows.clone(),
            sweep: Some(points.clone()),
        };
        write_json(path, &report)?;
    }
    Ok((all_rows, points))
}

/// Human-readable run summary on stdout.
pub fn print_summary(cfg: &ExperimentConfig, rows: &[ReportRow], out: &mut impl Write) {
    let _ = writeln!(
        out,
        "{}: n={} k={} eps={} trials={} instance={}",
        cfg.mode, cfg.n, cfg.k, cfg.eps, cfg.trials, cfg.instance
    );
    if cfg.mode == "test" {
        let _ = writeln!(
            out,
            "accept rate {:.3}, mean samples {:.0}",
            accept_rate(rows),
            mean_samples(rows)
        );
    } else {
        let _ = writeln!(out, "mean samples {:.0}", mean_samples(rows));
    }
}
