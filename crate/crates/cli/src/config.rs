//! Resolved experiment configuration: defaults, then config-file keys,
//! then command-line flags, with unknown keys rejected.

use crate::error::{CliError, CliResult};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Instance {
    Uniform,
    RandomKhist,
    Zigzag,
    HardYes,
    HardNo,
    File,
}

impl Instance {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "uniform" => Ok(Instance::Uniform),
            "random-khist" => Ok(Instance::RandomKhist),
            "zigzag" => Ok(Instance::Zigzag),
            "hard-yes" => Ok(Instance::HardYes),
            "hard-no" => Ok(Instance::HardNo),
            "file" => Ok(Instance::File),
            other => Err(CliError::usage(format!(
                "unknown instance '{}': expected uniform, random-khist, zigzag, hard-yes, hard-no, or file",
                other
            ))),
        }
    }

    /// Deterministic generators produce the same distribution in every
    /// trial, so the runner builds them once.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Instance::Uniform | Instance::Zigzag | Instance::File)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Instance::Uniform => "uniform",
            Instance::RandomKhist => "random-khist",
            Instance::Zigzag => "zigzag",
            Instance::HardYes => "hard-yes",
            Instance::HardNo => "hard-no",
            Instance::File => "file",
        };
        f.write_str(s)
    }
}

/// Fully resolved run parameters, serialized into every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub mode: String,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub instance: Instance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_file: Option<String>,
    pub jobs: usize,
    /// Block count for the zigzag generator (0 = auto: 4·k).
    pub blocks: usize,
    pub c_sieve: f64,
    pub c_test: f64,
    pub c_mass: f64,
    /// Hard-instance degree multiplier.
    pub little_c: f64,
    /// Hard-instance scale divisor.
    pub big_c: f64,
    /// Model-selection amplification multiplier.
    pub amp: f64,
    pub refine: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: "test".into(),
            n: 100,
            k: 1,
            eps: 0.25,
            delta: 0.1,
            trials: 10,
            seed: 1,
            instance: Instance::Uniform,
            instance_file: None,
            jobs: 1,
            blocks: 0,
            c_sieve: histotest_core::sieve::DEFAULT_C_SIEVE,
            c_test: 2000.0,
            c_mass: 100.0,
            little_c: histotest_core::hard::DEFAULT_LITTLE_C,
            big_c: histotest_core::hard::DEFAULT_BIG_C,
            amp: 9.0,
            refine: false,
        }
    }
}

/// Optional overrides collected from the flag layer; `None` keeps the
/// config-file (or default) value.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub instance: Option<String>,
    pub instance_file: Option<String>,
    pub jobs: Option<usize>,
    pub blocks: Option<usize>,
    pub c_sieve: Option<f64>,
    pub c_test: Option<f64>,
    pub c_mass: Option<f64>,
    pub little_c: Option<f64>,
    pub big_c: Option<f64>,
    pub amp: Option<f64>,
    pub refine: Option<bool>,
}

fn parse_key<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.trim().parse().map_err(|_| {
        CliError::usage(format!("config key '{}': cannot parse value '{}'", key, value))
    })
}

/// Reads a flat `key = value` file. Blank lines and `#` comments are
/// skipped; unknown keys are an error.
pub fn parse_config_file(path: &Path) -> CliResult<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::usage(format!("cannot read config file {}: {}", path.display(), e))
    })?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "config line {}: expected key=value, got '{}'",
                idx + 1,
                raw.trim()
            )));
        };
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::usage(format!(
                "config line {}: duplicate key '{}'",
                idx + 1,
                key
            )));
        }
    }

    let mut o = Overrides::default();
    for (key, value) in &map {
        match key.as_str() {
            "n" => o.n = Some(parse_key(key, value)?),
            "k" => o.k = Some(parse_key(key, value)?),
            "eps" => o.eps = Some(parse_key(key, value)?),
            "delta" => o.delta = Some(parse_key(key, value)?),
            "trials" => o.trials = Some(parse_key(key, value)?),
            "seed" => o.seed = Some(parse_key(key, value)?),
            "instance" => o.instance = Some(value.clone()),
            "instance_file" => o.instance_file = Some(value.clone()),
            "jobs" => o.jobs = Some(parse_key(key, value)?),
            "blocks" => o.blocks = Some(parse_key(key, value)?),
            "c_sieve" => o.c_sieve = Some(parse_key(key, value)?),
            "c_test" => o.c_test = Some(parse_key(key, value)?),
            "c_mass" => o.c_mass = Some(parse_key(key, value)?),
            "little_c" => o.little_c = Some(parse_key(key, value)?),
            "big_c" => o.big_c = Some(parse_key(key, value)?),
            "amp" => o.amp = Some(parse_key(key, value)?),
            "refine" => o.refine = Some(parse_key(key, value)?),
            "mode" => {
                return Err(CliError::usage(
                    "config key 'mode' is set by the subcommand, not the file".into(),
                ))
            }
            other => {
                return Err(CliError::usage(format!("unknown config key '{}'", other)));
            }
        }
    }
    Ok(o)
}

fn apply(cfg: &mut ExperimentConfig, o: &Overrides) -> CliResult<()> {
    if let Some(v) = o.n {
        cfg.n = v;
    }
    if let Some(v) = o.k {
        cfg.k = v;
    }
    if let Some(v) = o.eps {
        cfg.eps = v;
    }
    if let Some(v) = o.delta {
        cfg.delta = v;
    }
    if let Some(v) = o.trials {
        cfg.trials = v;
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = &o.instance {
        cfg.instance = Instance::parse(v)?;
    }
    if let Some(v) = &o.instance_file {
        cfg.instance_file = Some(v.clone());
    }
    if let Some(v) = o.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = o.blocks {
        cfg.blocks = v;
    }
    if let Some(v) = o.c_sieve {
        cfg.c_sieve = v;
    }
    if let Some(v) = o.c_test {
        cfg.c_test = v;
    }
    if let Some(v) = o.c_mass {
        cfg.c_mass = v;
    }
    if let Some(v) = o.little_c {
        cfg.little_c = v;
    }
    if let Some(v) = o.big_c {
        cfg.big_c = v;
    }
    if let Some(v) = o.amp {
        cfg.amp = v;
    }
    if let Some(v) = o.refine {
        cfg.refine = v;
    }
    Ok(())
}

/// Defaults, then the config file (if any), then flags.
pub fn resolve(
    mode: &str,
    file: Option<&Path>,
    flags: &Overrides,
) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        mode: mode.to_string(),
        ..ExperimentConfig::default()
    };
    if let Some(path) = file {
        let from_file = parse_config_file(path)?;
        apply(&mut cfg, &from_file)?;
    }
    apply(&mut cfg, flags)?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> CliResult<()> {
    if cfg.n == 0 {
        return Err(CliError::usage("n must be at least 1".into()));
    }
    if cfg.k == 0 || cfg.k > cfg.n {
        return Err(CliError::usage(format!(
            "k must satisfy 1 <= k <= n, got k={} n={}",
            cfg.k, cfg.n
        )));
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(CliError::usage(format!(
            "eps must lie in (0, 1), got {}",
            cfg.eps
        )));
    }
    if !(cfg.delta > 0.0 && cfg.delta <= 1.0) {
        return Err(CliError::usage(format!(
            "delta must lie in (0, 1], got {}",
            cfg.delta
        )));
    }
    if cfg.jobs == 0 {
        return Err(CliError::usage("jobs must be at least 1".into()));
    }
    for (name, v) in [
        ("c_sieve", cfg.c_sieve),
        ("c_test", cfg.c_test),
        ("c_mass", cfg.c_mass),
        ("little_c", cfg.little_c),
        ("big_c", cfg.big_c),
        ("amp", cfg.amp),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(CliError::usage(format!(
                "{} must be positive and finite, got {}",
                name, v
            )));
        }
    }
    if cfg.instance == Instance::File && cfg.instance_file.is_none() {
        return Err(CliError::usage(
            "instance=file requires --instance-file (or the instance_file config key)".into(),
        ));
    }
    Ok(())
}

/// Zigzag block count after the auto rule.
pub fn effective_blocks(cfg: &ExperimentConfig) -> usize {
    if cfg.blocks == 0 {
        4 * cfg.k.max(1)
    } else {
        cfg.blocks
    }
}
