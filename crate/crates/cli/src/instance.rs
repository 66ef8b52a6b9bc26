//! Instance construction for experiment trials.

use crate::config::{effective_blocks, ExperimentConfig, Instance};
use crate::error::{CliError, CliResult};
use histotest_core::dist::{random_khistogram, zigzag, Measure, Pmf};
use histotest_core::hard::generate_hard_pair_with;
use histotest_core::rng::RngStream;
use histotest_core::tester::dp_distance_to_khistogram;
use std::path::Path;

/// A distribution to draw trial samples from, with ground truth where
/// the generator knows it.
#[derive(Debug, Clone)]
pub struct BuiltInstance {
    pub weights: Vec<f64>,
    /// Piece count of the generated distribution, when known.
    pub true_k: Option<usize>,
    /// Certified TV distance to the nearest k-histogram, when computed.
    pub true_distance: Option<f64>,
}

/// Reads newline-separated non-negative decimals and normalizes them.
/// Returns the Pmf and the pre-normalization total.
pub fn load_pmf_file(path: &Path) -> CliResult<(Pmf, f64)> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::runtime(format!("cannot read instance file {}: {}", path.display(), e))
    })?;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::runtime(format!(
                "{}: line {}: not a number: '{}'",
                path.display(),
                idx + 1,
                line
            ))
        })?;
        if !v.is_finite() || v < 0.0 {
            return Err(CliError::runtime(format!(
                "{}: line {}: entries must be finite and non-negative, got {}",
                path.display(),
                idx + 1,
                v
            )));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::runtime(format!(
            "{}: no entries found",
            path.display()
        )));
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(CliError::runtime(format!(
            "{}: entries sum to zero; nothing to normalize",
            path.display()
        )));
    }
    for v in &mut values {
        *v /= total;
    }
    let pmf = Pmf::new(values).map_err(|e| CliError::runtime(e.to_string()))?;
    Ok((pmf, total))
}

/// Escalates the zigzag amplitude until the distance to the nearest
/// k-histogram is certified at or above eps.
pub fn far_zigzag(n: usize, k: usize, eps: f64, blocks: usize) -> CliResult<(Pmf, f64)> {
    for &a in &[0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99] {
        let z = zigzag(n, blocks, a)?;
        let tv = dp_distance_to_khistogram(&Measure::from(&z), k)? / 2.0;
        if tv >= eps {
            return Ok((z, tv));
        }
    }
    Err(CliError::runtime(format!(
        "no zigzag amplitude reaches TV distance {} from {}-histograms at {} blocks; raise blocks or lower eps",
        eps, k, blocks
    )))
}

/// The contamination weight handed to the hard-pair generator: capped at
/// its 1/10 validity limit, independent of the testing accuracy.
pub fn hard_contamination(eps: f64) -> f64 {
    eps.min(0.1)
}

/// Builds the trial distribution. `rng` feeds the randomized generators;
/// deterministic instances ignore it.
pub fn build_instance(cfg: &ExperimentConfig, rng: &mut RngStream) -> CliResult<BuiltInstance> {
    match cfg.instance {
        Instance::Uniform => Ok(BuiltInstance {
            weights: Pmf::uniform(cfg.n)?.as_slice().to_vec(),
            true_k: Some(1),
            true_distance: Some(0.0),
        }),
        Instance::RandomKhist => {
            let p = random_khistogram(cfg.n, cfg.k, rng)?;
            Ok(BuiltInstance {
                weights: p.as_slice().to_vec(),
                true_k: Some(cfg.k),
                true_distance: Some(0.0),
            })
        }
        Instance::Zigzag => {
            let blocks = effective_blocks(cfg);
            let (p, tv) = far_zigzag(cfg.n, cfg.k, cfg.eps, blocks)?;
            Ok(BuiltInstance {
                weights: p.as_slice().to_vec(),
                true_k: Some(blocks),
                true_distance: Some(tv),
            })
        }
        Instance::HardYes | Instance::HardNo => {
            let pair = generate_hard_pair_with(
                cfg.n,
                cfg.k,
                hard_contamination(cfg.eps),
                cfg.little_c,
                cfg.big_c,
                rng,
            )?;
            let (weights, true_k) = if cfg.instance == Instance::HardYes {
                let k = if pair.diagnostics.h_is_k_histogram {
                    Some(cfg.k)
                } else {
                    None
                };
                (pair.h.as_slice().to_vec(), k)
            } else {
                (pair.h_prime.as_slice().to_vec(), None)
            };
            Ok(BuiltInstance {
                weights,
                true_k,
                true_distance: None,
            })
        }
        Instance::File => {
            let path = cfg
                .instance_file
                .as_ref()
                .expect("validated: file instance carries a path");
            let (p, _total) = load_pmf_file(Path::new(path))?;
            if p.len() != cfg.n {
                return Err(CliError::runtime(format!(
                    "instance file has {} entries but n = {}",
                    p.len(),
                    cfg.n
                )));
            }
            Ok(BuiltInstance {
                weights: p.as_slice().to_vec(),
                true_k: None,
                true_distance: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn pmf_file_round_trips() {
        let f = write_temp("0.5\n0.5\n");
        let (p, total) = load_pmf_file(f.path()).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
        assert!((total - 1.0).abs() < 1e-12);

        let f = write_temp("1\n1\n1\n1\n");
        let (p, total) = load_pmf_file(f.path()).unwrap();
        assert_eq!(p.as_slice(), &[0.25; 4]);
        assert_eq!(total, 4.0);
    }

    #[test]
    fn pmf_file_errors_carry_line_numbers() {
        let f = write_temp("-1\n2\n");
        let err = load_pmf_file(f.path()).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{}", err);

        let f = write_temp("0.5\nbogus\n");
        let err = load_pmf_file(f.path()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{}", err);

        let f = write_temp("");
        assert!(load_pmf_file(f.path()).is_err());
        let f = write_temp("0\n0\n");
        assert!(load_pmf_file(f.path()).is_err());
    }

    #[test]
    fn zigzag_escalation_certifies_distance() {
        let (p, tv) = far_zigzag(96, 2, 0.2, 8).unwrap();
        assert_eq!(p.len(), 96);
        assert!(tv >= 0.2);
        // Unreachable target errors out instead of looping.
        assert!(far_zigzag(16, 8, 0.9, 16).is_err());
    }
}
