//! Piece-count selection by doubling search over the histogram tester.
//!
//! Probes k = 1, 2, 4, ... with majority-amplified tester calls until one
//! accepts; every distribution on [n] is an n-histogram, so the search is
//! guaranteed a stopping point unless the tester misbehaves. An optional
//! linear refinement narrows the factor-2 overshoot.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampler::Sampler;
use crate::tester::{test_histogram, TesterConfig, Verdict};
use serde::Serialize;

/// Knobs for the selection loop.
#[derive(Debug, Clone, Serialize)]
pub struct SelectConfig {
    /// Amplification multiplier: each probe takes a majority over
    /// `2·⌈amp·ln(1/δ_j)⌉ + 1` tester runs.
    pub amp: f64,
    /// After the doubling phase finds K, linearly scan K/2..K for the
    /// smallest accepting count. Doubles the cost for a factor-2 gain.
    pub refine: bool,
    pub tester: TesterConfig,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            amp: 9.0,
            refine: false,
            tester: TesterConfig::default(),
        }
    }
}

/// One amplified probe of the tester at a fixed piece count.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeRecord {
    pub k: usize,
    pub accepted: bool,
    /// Accept/reject split across the (early-stopped) repetitions.
    pub accepts: u32,
    pub rejects: u32,
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    /// Smallest probed piece count that accepted.
    pub k_selected: usize,
    /// Every probe made, in order.
    pub probes: Vec<ProbeRecord>,
    pub total_samples: u64,
}

fn amplified_probe(
    sampler: &dyn Sampler,
    k: usize,
    eps: f64,
    delta_j: f64,
    cfg: &SelectConfig,
    rng: &mut RngStream,
) -> Result<ProbeRecord> {
    let reps = 2 * (cfg.amp * (1.0 / delta_j).ln()).ceil() as u32 + 1;
    let need = reps / 2 + 1;
    let mut accepts = 0u32;
    let mut rejects = 0u32;
    let mut samples = 0u64;
    // Majority with early exit once one side is unreachable.
    for _ in 0..reps {
        let report = test_histogram(sampler, k, eps, &cfg.tester, rng)?;
        samples += report.samples_total;
        match report.verdict {
            Verdict::Accept => accepts += 1,
            Verdict::Reject => rejects += 1,
        }
        if accepts >= need || rejects >= need {
            break;
        }
    }
    Ok(ProbeRecord {
        k,
        accepted: accepts >= need,
        accepts,
        rejects,
        samples,
    })
}

/// Finds a piece count K such that the sampled distribution passes the
/// histogram test, probing powers of two and amplifying each probe to
/// failure probability `δ/(2(j+1)²)`. With `refine`, additionally scans
/// K/2..K at per-probe failure `δ/K` and keeps the smallest accepter.
pub fn select_k(
    sampler: &dyn Sampler,
    eps: f64,
    delta: f64,
    cfg: &SelectConfig,
    rng: &mut RngStream,
) -> Result<SelectionResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("accuracy must lie in (0, 1), got {}", eps),
        });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("failure probability must lie in (0, 1], got {}", delta),
        });
    }
    if !(cfg.amp > 0.0) {
        return Err(Error::InvalidParameter {
            name: "amp",
            reason: "amplification multiplier must be positive".into(),
        });
    }
    let n = sampler.domain_size();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }

    let j_max = n.next_power_of_two().trailing_zeros();
    let mut probes = Vec::new();
    let mut total_samples = 0u64;
    let mut selected = None;
    for j in 0..=j_max {
        let k = (1usize << j).min(n);
        let delta_j = delta / (2.0 * ((j + 1) * (j + 1)) as f64);
        let probe = amplified_probe(sampler, k, eps, delta_j, cfg, rng)?;
        total_samples += probe.samples;
        let accepted = probe.accepted;
        probes.push(probe);
        if accepted {
            selected = Some(k);
            break;
        }
    }
    let mut k_selected = selected.ok_or(Error::NoModelFound)?;

    if cfg.refine && k_selected > 1 {
        let delta_i = delta / k_selected as f64;
        for i in (k_selected / 2)..k_selected {
            let probe = amplified_probe(sampler, i, eps, delta_i, cfg, rng)?;
            total_samples += probe.samples;
            let accepted = probe.accepted;
            probes.push(probe);
            if accepted {
                k_selected = i;
                break;
            }
        }
    }

    Ok(SelectionResult {
        k_selected,
        probes,
        total_samples,
    })
}
