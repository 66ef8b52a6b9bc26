//! Learn-and-sieve: learn a flattened approximation on a partition, then
//! flag every cell containing a sub-interval on which the sample disagrees
//! with the flattening. Few flags means the unflagged region is learned to
//! small chi-square error; many flags is evidence against the target being
//! a k-histogram.

use crate::dist::Interval;
use crate::error::{Error, Result};
use crate::estimator::{batch_count, draw_interval_estimator, flatten_on, FlatMeasure};
use crate::partition::IntervalPartition;
use crate::rng::RngStream;
use crate::sampler::Sampler;

/// Default multiplier in the sieve sample-size formula.
pub const DEFAULT_C_SIEVE: f64 = 40.0;

/// Scan outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SieveVerdict {
    Ok,
    Reject,
}

/// Result of [`learn_and_sieve`].
#[derive(Debug, Clone)]
pub struct SieveOutcome {
    pub verdict: SieveVerdict,
    /// Indices of flagged cells in the input partition, ascending. On
    /// `Reject` this holds the first `k + 1` flagged cells.
    pub bad_cells: Vec<usize>,
    /// Flattened approximation learned from the first sample half.
    pub learned: FlatMeasure,
    /// Samples consumed: always `2m`.
    pub draws_used: u64,
}

impl SieveOutcome {
    pub fn is_ok(&self) -> bool {
        self.verdict == SieveVerdict::Ok
    }

    /// Flagged cells as intervals.
    pub fn bad_intervals(&self, partition: &IntervalPartition) -> Vec<Interval> {
        self.bad_cells
            .iter()
            .map(|&j| partition.intervals()[j])
            .collect()
    }
}

/// Per-half sample size: `⌈C·(K/ε² + √(K·n)/ε)·⌈ln(n/δ)⌉⌉`, raised so the
/// interval estimator gets at least one sample per batch.
pub fn sieve_sample_size(n: usize, k: usize, eps: f64, delta: f64, c: f64) -> u64 {
    let kk = k.max(1) as f64;
    let nf = n as f64;
    let log_factor = (nf / delta).ln().ceil();
    let base = c * (kk / (eps * eps) + (kk * nf).sqrt() / eps) * log_factor;
    (base.ceil() as u64).max(batch_count(n, delta / 4.0) as u64)
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("must lie in (0, 1), got {}", v),
        });
    }
    Ok(())
}

/// Learns a flattening of the target on `partition` from one sample half,
/// then scans every sub-interval `Q` of every cell against an independent
/// estimate from the other half. Cell `I` is flagged when some `Q ⊆ I` has
/// `φ̂(Q)/p̂(Q) > 6·max(1, ε√(n/K))` or
/// `|φ̂(Q) − p̂(Q)| > ½·√(p̂(Q)·ε²/K)`.
/// More than `k` flags is a `Reject`; the scan never crosses cell borders.
/// The partition may tile a sub-region of the domain, in which case only
/// that sub-region is scanned and learned.
pub fn learn_and_sieve(
    sampler: &dyn Sampler,
    partition: &IntervalPartition,
    k: usize,
    eps: f64,
    delta: f64,
    c: f64,
    rng: &mut RngStream,
) -> Result<SieveOutcome> {
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    if !(c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c_sieve",
            reason: format!("must be positive, got {}", c),
        });
    }
    let n = sampler.domain_size();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    if partition.intervals().last().is_some_and(|iv| !iv.fits(n)) {
        return Err(Error::IntervalOutOfBounds {
            lo: partition.intervals().last().unwrap().lo(),
            hi: partition.intervals().last().unwrap().hi(),
            n,
        });
    }

    let m = sieve_sample_size(n, k, eps, delta, c);
    let learn_half = draw_interval_estimator(sampler, m, delta / 4.0, rng)?;
    let probe_half = draw_interval_estimator(sampler, m, delta / 4.0, rng)?;
    let learned = flatten_on(&learn_half, partition)?;

    let kk = k.max(1) as f64;
    let ratio_cap = 6.0 * 1f64.max(eps * (n as f64 / kk).sqrt());
    let gap_scale = eps * eps / kk;

    let mut bad_cells = Vec::new();
    for (j, &cell) in partition.intervals().iter().enumerate() {
        let level = learned.level(j);
        let flagged = probe_half.scan_cell(cell, |q, phi| {
            let p_hat = level * q.len() as f64;
            phi / p_hat > ratio_cap || (phi - p_hat).abs() > 0.5 * (p_hat * gap_scale).sqrt()
        });
        if flagged {
            bad_cells.push(j);
            if bad_cells.len() > k {
                return Ok(SieveOutcome {
                    verdict: SieveVerdict::Reject,
                    bad_cells,
                    learned,
                    draws_used: 2 * m,
                });
            }
        }
    }
    Ok(SieveOutcome {
        verdict: SieveVerdict::Ok,
        bad_cells,
        learned,
        draws_used: 2 * m,
    })
}
