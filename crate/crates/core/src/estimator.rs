//! Simultaneous interval-mass estimation by the median trick, and the
//! flattening learner built on it.
//!
//! Samples are split into `T = ⌈6·ln(n/δ)⌉` equal batches of size `b`. The
//! estimate for an interval `I` is the per-batch count median divided by
//! `b`, floored at `|I|/(2n)`:
//! `φ̂(I) = max(median_t(count_t(I))/b, |I|/(2n))`.
//! With probability `1-δ` this is accurate for *every* interval at once
//! (`|φ̂(I) − p(I)| ≤ √(p(I)/b)` when the target has min entry `≥ 1/(2n)`).
//! Queries run in O(T) off per-batch prefix sums; nothing quadratic in `n`
//! is ever materialized.

use crate::dist::{Interval, Measure, SampleSet};
use crate::error::{Error, Result};
use crate::partition::IntervalPartition;
use crate::rng::RngStream;
use crate::sampler::Sampler;

/// Batches used at domain size `n` and failure budget `δ`: `⌈6·ln(n/δ)⌉`.
pub fn batch_count(n: usize, delta: f64) -> usize {
    (6.0 * (n as f64 / delta).ln()).ceil() as usize
}

/// Per-batch cumulative counts, the backing store of the estimator.
#[derive(Debug, Clone)]
pub struct BatchedCounts {
    t: usize,
    b: u64,
    n: usize,
    // Row-major, t rows of n+1 entries; row[i] counts draws below index i.
    prefix: Vec<u64>,
}

impl BatchedCounts {
    fn from_rows(n: usize, b: u64, rows: &[Vec<u64>]) -> Self {
        let t = rows.len();
        let mut prefix = Vec::with_capacity(t * (n + 1));
        for row in rows {
            debug_assert_eq!(row.len(), n);
            let mut acc = 0u64;
            prefix.push(0);
            for &c in row {
                acc += c;
                prefix.push(acc);
            }
            assert_eq!(acc, b, "batch total must equal the batch size");
        }
        Self { t, b, n, prefix }
    }

    fn count(&self, batch: usize, iv: Interval) -> u64 {
        let row = batch * (self.n + 1);
        self.prefix[row + iv.hi() + 1] - self.prefix[row + iv.lo()]
    }
}

/// Lower-middle order statistic; scratch is clobbered.
fn lower_median(scratch: &mut [u64]) -> u64 {
    let k = (scratch.len() - 1) / 2;
    *scratch.select_nth_unstable(k).1
}

/// The simultaneous interval-mass estimator.
#[derive(Debug, Clone)]
pub struct IntervalEstimator {
    counts: BatchedCounts,
}

fn check_batch_budget(total: u64, t: usize) -> Result<u64> {
    let b = total / t as u64;
    if b == 0 {
        return Err(Error::InsufficientSamples {
            needed: t as u64,
            got: total,
        });
    }
    Ok(b)
}

/// Builds the estimator from recorded draws: consecutive chunks of size
/// `b = ⌊|samples|/T⌋` become the batches, leftovers are ignored.
pub fn build_interval_estimator(
    samples: &SampleSet,
    n: usize,
    delta: f64,
) -> Result<IntervalEstimator> {
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let t = batch_count(n, delta);
    let b = check_batch_budget(samples.len() as u64, t)?;
    let mut rows = vec![vec![0u64; n]; t];
    for (i, &d) in samples.draws().iter().take(t * b as usize).enumerate() {
        if d >= n {
            return Err(Error::IndexOutOfRange { index: d, n });
        }
        rows[i / b as usize][d] += 1;
    }
    Ok(IntervalEstimator {
        counts: BatchedCounts::from_rows(n, b, &rows),
    })
}

/// Sampling form: draws `m` fresh samples in `T` batches. The `m mod T`
/// leftover draws are consumed (and tallied) but not used, keeping the
/// sample accounting equal to `m` exactly.
pub fn draw_interval_estimator(
    sampler: &dyn Sampler,
    m: u64,
    delta: f64,
    rng: &mut RngStream,
) -> Result<IntervalEstimator> {
    let n = sampler.domain_size();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let t = batch_count(n, delta);
    let b = check_batch_budget(m, t)?;
    let mut rows = vec![vec![0u64; n]; t];
    for row in &mut rows {
        sampler.draw_counts(b, rng, row);
    }
    let leftover = m - t as u64 * b;
    if leftover > 0 {
        let mut dustbin = vec![0u64; n];
        sampler.draw_counts(leftover, rng, &mut dustbin);
    }
    Ok(IntervalEstimator {
        counts: BatchedCounts::from_rows(n, b, &rows),
    })
}

impl IntervalEstimator {
    pub fn n(&self) -> usize {
        self.counts.n
    }

    pub fn batches(&self) -> usize {
        self.counts.t
    }

    pub fn batch_size(&self) -> u64 {
        self.counts.b
    }

    fn check(&self, iv: Interval) -> Result<()> {
        if !iv.fits(self.counts.n) {
            return Err(Error::IntervalOutOfBounds {
                lo: iv.lo(),
                hi: iv.hi(),
                n: self.counts.n,
            });
        }
        Ok(())
    }

    /// Count of batch `t` inside `iv`, O(1).
    pub fn batch_interval_count(&self, t: usize, iv: Interval) -> u64 {
        debug_assert!(t < self.counts.t && iv.fits(self.counts.n));
        self.counts.count(t, iv)
    }

    /// Median per-batch count of `iv`, before the floor.
    pub fn median_count(&self, iv: Interval) -> Result<u64> {
        self.check(iv)?;
        let mut scratch: Vec<u64> = (0..self.counts.t).map(|t| self.counts.count(t, iv)).collect();
        Ok(lower_median(&mut scratch))
    }

    /// `φ̂(I) = max(median/b, |I|/(2n))`.
    pub fn estimate(&self, iv: Interval) -> Result<f64> {
        let med = self.median_count(iv)?;
        let floor = iv.len() as f64 / (2.0 * self.counts.n as f64);
        Ok((med as f64 / self.counts.b as f64).max(floor))
    }

    /// Calls `stop` with every sub-interval `Q ⊆ cell` and its estimate, in
    /// (lo ascending, hi ascending) order. Batch counts grow incrementally,
    /// so each step costs O(T) instead of a fresh interval query. Returns
    /// true as soon as `stop` does; false after a full scan.
    pub fn scan_cell(&self, cell: Interval, mut stop: impl FnMut(Interval, f64) -> bool) -> bool {
        assert!(cell.fits(self.counts.n));
        let t = self.counts.t;
        let b = self.counts.b as f64;
        let half_n = 2.0 * self.counts.n as f64;
        let mut cnt = vec![0u64; t];
        let mut scratch = vec![0u64; t];
        for lo in cell.lo()..=cell.hi() {
            cnt.fill(0);
            for hi in lo..=cell.hi() {
                let point = Interval::new(hi, hi).expect("hi is a valid index");
                for (c, batch) in cnt.iter_mut().enumerate() {
                    *batch += self.counts.count(c, point);
                }
                scratch.copy_from_slice(&cnt);
                let med = lower_median(&mut scratch);
                let q = Interval::new(lo, hi).expect("lo <= hi inside the cell");
                let phi = (med as f64 / b).max(q.len() as f64 / half_n);
                if stop(q, phi) {
                    return true;
                }
            }
        }
        false
    }
}

/// Piecewise-constant measure: one level per partition cell. Produced by the
/// learner, so every level is at least `1/(2n)`. The cells may tile only
/// part of the domain; uncovered indices carry value zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatMeasure {
    partition: IntervalPartition,
    levels: Vec<f64>,
    n: usize,
}

impl FlatMeasure {
    fn new(partition: IntervalPartition, levels: Vec<f64>, n: usize) -> Self {
        debug_assert_eq!(partition.len(), levels.len());
        debug_assert!(partition
            .intervals()
            .last()
            .is_none_or(|iv| iv.fits(n)));
        Self {
            partition,
            levels,
            n,
        }
    }

    pub fn partition(&self) -> &IntervalPartition {
        &self.partition
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Level of cell `j`.
    pub fn level(&self, j: usize) -> f64 {
        self.levels[j]
    }

    /// Value at index `i`: the covering cell's level, zero off the cells.
    pub fn value_at(&self, i: usize) -> f64 {
        let cells = self.partition.intervals();
        let j = cells.partition_point(|iv| iv.hi() < i);
        if j < cells.len() && cells[j].contains(i) {
            self.levels[j]
        } else {
            0.0
        }
    }

    /// Mass assigned to cell `j`.
    pub fn cell_mass(&self, j: usize) -> f64 {
        self.levels[j] * self.partition.intervals()[j].len() as f64
    }

    /// Densely materialized form.
    pub fn to_measure(&self) -> Measure {
        let mut mass = vec![0.0; self.n];
        for (iv, &level) in self.partition.intervals().iter().zip(&self.levels) {
            for i in iv.indices() {
                mass[i] = level;
            }
        }
        Measure::new(mass).expect("levels are finite and non-negative")
    }
}

/// Flattens an estimator over any sub-region partition: cell `I_j` gets the
/// constant level `φ̂(I_j)/|I_j|`; indices off the cells get zero.
pub fn flatten_on(est: &IntervalEstimator, partition: &IntervalPartition) -> Result<FlatMeasure> {
    let levels = partition
        .intervals()
        .iter()
        .map(|&iv| est.estimate(iv).map(|e| e / iv.len() as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(FlatMeasure::new(partition.clone(), levels, est.n()))
}

/// Flattens an estimator over a partition of the whole domain.
pub fn learn_flat(est: &IntervalEstimator, partition: &IntervalPartition) -> Result<FlatMeasure> {
    let n = est.n();
    if !partition.covers_exactly(n) {
        return Err(Error::NotAPartition {
            reason: format!("partition must cover the domain of size {}", n),
        });
    }
    flatten_on(est, partition)
}

/// Learner entry point from recorded draws.
pub fn empirical_learning(
    samples: &SampleSet,
    partition: &IntervalPartition,
    delta: f64,
) -> Result<FlatMeasure> {
    let n = match partition.intervals().last() {
        Some(iv) => iv.hi() + 1,
        None => {
            return Err(Error::NotAPartition {
                reason: "empty partition".into(),
            })
        }
    };
    if !partition.covers_exactly(n) {
        return Err(Error::NotAPartition {
            reason: "partition must cover the domain with no gaps".into(),
        });
    }
    let est = build_interval_estimator(samples, n, delta)?;
    learn_flat(&est, partition)
}
