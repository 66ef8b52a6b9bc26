//! Sample-based partitioning of the domain into intervals of small mass.
//!
//! [`approx_divide`] splits `{0, …, n-1}` into at most `8B` intervals from
//! per-element sample counts: elements with empirical mass above `1/(2B)`
//! become singleton parts, everything else is grown greedily while the
//! running empirical mass stays below `3/(2B)`. All threshold comparisons
//! are integer-exact. With enough samples (`⌈18·B·ln(12B/δ)⌉`), every
//! non-singleton part has true mass at most `16/B` with probability `1-δ`.
//!
//! [`approx_sub_divide`] applies the same procedure to the conditional
//! distribution on a union of disjoint intervals, via rejection sampling:
//! raw draws outside the region are discarded but still counted against the
//! caller's budget. Accepted draws are re-indexed into the concatenated
//! region, partitioned there, and mapped back with one output partition per
//! input interval; parts never straddle input-interval boundaries.

use crate::dist::{Interval, SampleSet};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampler::{hypergeometric, Sampler};

/// Ordered list of disjoint intervals. Gaps are allowed; operations state
/// what the union covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalPartition {
    intervals: Vec<Interval>,
}

impl IntervalPartition {
    /// Validates left-to-right order and disjointness.
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        let mut prev_end: Option<usize> = None;
        for iv in &intervals {
            if let Some(end) = prev_end {
                if iv.lo() <= end {
                    return Err(Error::NotAPartition {
                        reason: format!("intervals overlap or are unsorted near {}", iv),
                    });
                }
            }
            prev_end = Some(iv.hi());
        }
        Ok(Self { intervals })
    }

    /// Single interval covering `{0, …, n-1}`.
    pub fn whole(n: usize) -> Result<Self> {
        Ok(Self {
            intervals: vec![Interval::whole(n)?],
        })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of covered indices.
    pub fn covered_len(&self) -> usize {
        self.intervals.iter().map(|iv| iv.len()).sum()
    }

    /// True when the intervals tile `{0, …, n-1}` with no gaps.
    pub fn covers_exactly(&self, n: usize) -> bool {
        let mut expect = 0;
        for iv in &self.intervals {
            if iv.lo() != expect {
                return false;
            }
            expect = iv.hi() + 1;
        }
        expect == n
    }
}

/// Samples required by the divide guarantee: `⌈18·B·ln(12B/δ)⌉`.
pub fn divide_sample_count(b: usize, delta: f64) -> u64 {
    let bf = b as f64;
    (18.0 * bf * (12.0 * bf / delta).ln()).ceil() as u64
}

fn check_b(b: usize) -> Result<()> {
    if b <= 1 {
        return Err(Error::InvalidParameter {
            name: "b",
            reason: format!("interval budget must be at least 2, got {}", b),
        });
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("failure probability must be in (0, 1), got {}", delta),
        });
    }
    Ok(())
}

/// Greedy scan over per-position counts. Returns half-open position ranges
/// with heavy flags. For any input: ranges tile `0..counts.len()`, heavy
/// ranges are singletons with `c·2B > m`, all other ranges have
/// `c(range)·2B < 3m`, and there are at most `8B` ranges when `Σc ≤ m`.
fn greedy_partition(counts: &[u64], m: u64, b: u64) -> (Vec<(usize, usize)>, Vec<bool>) {
    let mut ranges = Vec::new();
    let mut flags = Vec::new();
    let mut open: Option<(usize, u64)> = None; // (start, accumulated count)
    for (t, &c) in counts.iter().enumerate() {
        if c * 2 * b > m {
            if let Some((start, _)) = open.take() {
                ranges.push((start, t));
                flags.push(false);
            }
            ranges.push((t, t + 1));
            flags.push(true);
            continue;
        }
        match open {
            None => open = Some((t, c)),
            Some((start, acc)) => {
                if (acc + c) * 2 * b < 3 * m {
                    open = Some((start, acc + c));
                } else {
                    // Close the current range; t opens the next one so no
                    // position is ever dropped.
                    ranges.push((start, t));
                    flags.push(false);
                    open = Some((t, c));
                }
            }
        }
    }
    if let Some((start, _)) = open {
        ranges.push((start, counts.len()));
        flags.push(false);
    }
    (ranges, flags)
}

/// Result of a divide step.
#[derive(Debug, Clone)]
pub struct DivideOutcome {
    /// Partition tiling the whole domain.
    pub partition: IntervalPartition,
    /// Parallel to the partition: true for heavy singletons.
    pub heavy: Vec<bool>,
    /// Logical draws consumed (0 for the precomputed-sample form).
    pub draws_used: u64,
}

fn divide_from_counts(counts: &[u64], m: u64, b: usize, draws_used: u64) -> DivideOutcome {
    let (ranges, heavy) = greedy_partition(counts, m, b as u64);
    let intervals = ranges
        .iter()
        .map(|&(lo, hi)| Interval::new(lo, hi - 1).expect("greedy ranges are nonempty"))
        .collect::<Vec<_>>();
    debug_assert!(intervals.len() <= 8 * b);
    let partition = IntervalPartition::new(intervals).expect("greedy output is ordered");
    debug_assert!(partition.covers_exactly(counts.len()));
    DivideOutcome {
        partition,
        heavy,
        draws_used,
    }
}

/// Partitions the whole domain by the empirical mass of the given samples.
/// The guarantee assumes `⌈18·B·ln(12B/δ)⌉` i.i.d. draws; see
/// [`divide_sample_count`].
pub fn approx_divide(samples: &SampleSet, n: usize, b: usize) -> Result<DivideOutcome> {
    check_b(b)?;
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let counts = samples.counts(n)?;
    Ok(divide_from_counts(&counts, samples.len() as u64, b, 0))
}

/// Sampling form of [`approx_divide`]: draws the required samples itself.
pub fn approx_divide_sampled(
    sampler: &dyn Sampler,
    b: usize,
    delta: f64,
    rng: &mut RngStream,
) -> Result<DivideOutcome> {
    check_b(b)?;
    check_delta(delta)?;
    let n = sampler.domain_size();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let m = divide_sample_count(b, delta);
    let mut counts = vec![0u64; n];
    sampler.draw_counts(m, rng, &mut counts);
    Ok(divide_from_counts(&counts, m, b, m))
}

/// Keeps a uniformly random sub-multiset of `take` out of the `total`
/// recorded draws, in place. Chain rule over positions: each coordinate is
/// hypergeometric given the earlier ones.
fn subsample_counts(counts: &mut [u64], total: u64, take: u64, rng: &mut RngStream) {
    debug_assert!(take <= total);
    let mut remaining_total = total;
    let mut remaining_take = take;
    for c in counts.iter_mut() {
        if remaining_take == 0 {
            *c = 0;
            continue;
        }
        if remaining_take == remaining_total {
            // Keep everything that is left.
            remaining_total -= *c;
            remaining_take -= *c;
            continue;
        }
        let x = hypergeometric(remaining_total, *c, remaining_take, rng);
        remaining_total -= *c;
        remaining_take -= x;
        *c = x;
    }
    debug_assert_eq!(remaining_take, 0);
}

/// Result of a conditional divide step.
#[derive(Debug, Clone)]
pub struct SubDivideOutcome {
    /// One partition per input interval, in input order; partition `j`
    /// tiles input interval `j` exactly.
    pub partitions: Vec<IntervalPartition>,
    /// Parallel heavy-singleton flags.
    pub heavy: Vec<Vec<bool>>,
    /// Raw draws consumed, rejected ones included.
    pub draws_used: u64,
    /// Raw draws that landed in the region.
    pub accepted: u64,
}

impl SubDivideOutcome {
    /// All parts concatenated in domain order.
    pub fn flattened(&self) -> Vec<Interval> {
        self.partitions
            .iter()
            .flat_map(|p| p.intervals().iter().copied())
            .collect()
    }

    pub fn total_parts(&self) -> usize {
        self.partitions.iter().map(|p| p.len()).sum()
    }
}

fn check_region(region: &[Interval], n: usize) -> Result<()> {
    let mut prev_end: Option<usize> = None;
    for iv in region {
        if !iv.fits(n) {
            return Err(Error::IntervalOutOfBounds {
                lo: iv.lo(),
                hi: iv.hi(),
                n,
            });
        }
        if let Some(end) = prev_end {
            if iv.lo() <= end {
                return Err(Error::NotAPartition {
                    reason: format!("region intervals overlap or are unsorted near {}", iv),
                });
            }
        }
        prev_end = Some(iv.hi());
    }
    Ok(())
}

/// Partitions the conditional distribution on `region` by empirical mass.
///
/// Stops rejection sampling at `⌈18·B·ln(12B/δ)⌉` accepted draws. The raw
/// budget is 10x the draws expected when the sampled distribution puts mass
/// at least `|region|/(2n)` on the region (true for anything mixed evenly
/// with uniform); [`Error::MassTooSmall`] if the budget runs out first.
/// Total part count is at most `8B + |region|`.
pub fn approx_sub_divide(
    sampler: &dyn Sampler,
    region: &[Interval],
    b: usize,
    delta: f64,
    rng: &mut RngStream,
) -> Result<SubDivideOutcome> {
    check_b(b)?;
    check_delta(delta)?;
    let n = sampler.domain_size();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    check_region(region, n)?;
    let region_len: usize = region.iter().map(|iv| iv.len()).sum();
    if region_len == 0 {
        return Ok(SubDivideOutcome {
            partitions: Vec::new(),
            heavy: Vec::new(),
            draws_used: 0,
            accepted: 0,
        });
    }

    let needed = divide_sample_count(b, delta);
    let per_accept = (2 * n).div_ceil(region_len) as u64;
    let budget = 10 * needed * per_accept;

    // Adaptive chunks track the sequential stop-at-needed-acceptances
    // process without per-draw loops: the first chunk assumes full
    // acceptance, later chunks are sized from the observed rate with 20%
    // headroom.
    let mut counts = vec![0u64; n];
    let mut drawn: u64 = 0;
    let mut accepted: u64 = 0;
    let mut rounds = 0u32;
    while accepted < needed && drawn < budget {
        let remaining = (needed - accepted) as f64;
        let rate = if drawn == 0 {
            1.0
        } else {
            accepted.max(1) as f64 / drawn as f64
        };
        let mut chunk = ((1.2 * remaining / rate).ceil() as u64).max(needed / 4 + 1);
        rounds += 1;
        if rounds >= 16 {
            chunk = budget - drawn;
        }
        let chunk = chunk.min(budget - drawn);
        sampler.draw_counts(chunk, rng, &mut counts);
        drawn += chunk;
        accepted = region
            .iter()
            .flat_map(|iv| iv.indices())
            .map(|i| counts[i])
            .sum();
    }
    if accepted < needed {
        return Err(Error::MassTooSmall {
            draws: drawn,
            accepted,
            needed,
        });
    }

    // Re-index accepted draws into the concatenated region.
    let mut region_counts = Vec::with_capacity(region_len);
    let mut origin = Vec::with_capacity(region_len);
    let mut owner = Vec::with_capacity(region_len);
    for (j, iv) in region.iter().enumerate() {
        for i in iv.indices() {
            region_counts.push(counts[i]);
            origin.push(i);
            owner.push(j);
        }
    }
    // The sequential process keeps exactly the first `needed` acceptances;
    // a uniform subsample of that size is distributed identically.
    subsample_counts(&mut region_counts, accepted, needed, rng);

    let (ranges, flags) = greedy_partition(&region_counts, needed, b as u64);

    // Map position ranges back, cutting at input-interval boundaries.
    let mut per_input: Vec<Vec<Interval>> = vec![Vec::new(); region.len()];
    let mut per_input_heavy: Vec<Vec<bool>> = vec![Vec::new(); region.len()];
    for (&(lo, hi), &flag) in ranges.iter().zip(&flags) {
        let mut start = lo;
        for pos in lo + 1..hi {
            if owner[pos] != owner[pos - 1] {
                per_input[owner[start]]
                    .push(Interval::new(origin[start], origin[pos - 1]).expect("ordered"));
                per_input_heavy[owner[start]].push(flag);
                start = pos;
            }
        }
        per_input[owner[start]].push(Interval::new(origin[start], origin[hi - 1]).expect("ordered"));
        per_input_heavy[owner[start]].push(flag);
    }
    let partitions = per_input
        .into_iter()
        .map(|ivs| IntervalPartition::new(ivs).expect("mapped pieces stay ordered"))
        .collect::<Vec<_>>();
    for (p, iv) in partitions.iter().zip(region) {
        debug_assert_eq!(p.covered_len(), iv.len());
    }
    Ok(SubDivideOutcome {
        partitions,
        heavy: per_input_heavy,
        draws_used: drawn,
        accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{mix_with_uniform, random_khistogram, Pmf};
    use crate::sampler::AliasSampler;
    use proptest::prelude::*;

    fn assert_tiles(ranges: &[(usize, usize)], n: usize) {
        let mut expect = 0;
        for &(lo, hi) in ranges {
            assert_eq!(lo, expect);
            assert!(hi > lo);
            expect = hi;
        }
        assert_eq!(expect, n);
    }

    #[test]
    fn greedy_handles_all_zero_counts() {
        let counts = vec![0u64; 10];
        let (ranges, flags) = greedy_partition(&counts, 100, 4);
        assert_tiles(&ranges, 10);
        assert_eq!(ranges.len(), 1);
        assert!(!flags[0]);
    }

    #[test]
    fn greedy_never_drops_the_closing_element() {
        let counts = vec![40u64, 40, 40, 40, 40];
        let (ranges, _) = greedy_partition(&counts, 200, 2);
        assert_tiles(&ranges, 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn greedy_postconditions(
            counts in prop::collection::vec(0u64..500, 1..40),
            b in 2u64..10,
        ) {
            let m: u64 = counts.iter().sum::<u64>().max(1);
            let (ranges, flags) = greedy_partition(&counts, m, b);
            assert_tiles(&ranges, counts.len());
            prop_assert!(ranges.len() <= 8 * b as usize);
            for (&(lo, hi), &f) in ranges.iter().zip(&flags) {
                let c: u64 = counts[lo..hi].iter().sum();
                if f {
                    prop_assert_eq!(hi - lo, 1);
                    prop_assert!(c * 2 * b > m);
                } else {
                    prop_assert!(c * 2 * b < 3 * m, "range ({},{}) count {}", lo, hi, c);
                }
            }
        }
    }

    #[test]
    fn partition_type_validates_order() {
        let ok = IntervalPartition::new(vec![
            Interval::new(0, 3).unwrap(),
            Interval::new(7, 9).unwrap(),
        ])
        .unwrap();
        assert_eq!(ok.covered_len(), 7);
        assert!(!ok.covers_exactly(10));
        assert!(IntervalPartition::whole(10).unwrap().covers_exactly(10));
        let bad = IntervalPartition::new(vec![
            Interval::new(0, 4).unwrap(),
            Interval::new(4, 6).unwrap(),
        ]);
        assert!(matches!(bad, Err(Error::NotAPartition { .. })));
    }

    #[test]
    fn divide_constant_samples_isolate_a_singleton() {
        let samples = SampleSet::from_draws(vec![5; 100]);
        let out = approx_divide(&samples, 10, 4).unwrap();
        assert!(out.partition.covers_exactly(10));
        let hit = out
            .partition
            .intervals()
            .iter()
            .zip(&out.heavy)
            .any(|(iv, &h)| h && iv.lo() == 5 && iv.hi() == 5);
        assert!(hit, "all mass on one element must give a heavy singleton");
    }

    #[test]
    fn divide_single_element_domain() {
        let samples = SampleSet::from_draws(vec![0; 50]);
        let out = approx_divide(&samples, 1, 2).unwrap();
        assert_eq!(out.partition.len(), 1);
        assert!(out.partition.covers_exactly(1));
    }

    #[test]
    fn divide_rejects_small_b() {
        let samples = SampleSet::from_draws(vec![0, 1, 2]);
        assert!(matches!(
            approx_divide(&samples, 8, 1),
            Err(Error::InvalidParameter { name: "b", .. })
        ));
    }

    #[test]
    fn divide_uniform_sampled_is_balanced() {
        let p = Pmf::uniform(64).unwrap();
        let s = AliasSampler::from_pmf(&p);
        let out = approx_divide_sampled(&s, 8, 0.05, &mut RngStream::new(42)).unwrap();
        assert!(out.partition.covers_exactly(64));
        assert!(out.partition.len() <= 64);
        assert_eq!(out.draws_used, divide_sample_count(8, 0.05));
        for &h in &out.heavy {
            assert!(!h, "uniform has no heavy elements at this budget");
        }
    }

    #[test]
    fn divide_true_mass_bound_monte_carlo() {
        // Random 5-histograms on n=512, B=32: trials where some
        // non-singleton part has true mass > 16/B should be rare.
        let delta = 0.05;
        let b = 32usize;
        let mut gen_rng = RngStream::new(404);
        let mut bad_trials = 0;
        for seed in 0..200u64 {
            let p = random_khistogram(512, 5, &mut gen_rng).unwrap();
            let s = AliasSampler::from_pmf(&p);
            let out = approx_divide_sampled(&s, b, delta, &mut RngStream::new(seed)).unwrap();
            let violated = out
                .partition
                .intervals()
                .iter()
                .zip(&out.heavy)
                .any(|(iv, &h)| !h && p.interval_mass(*iv).unwrap() > 16.0 / b as f64);
            if violated {
                bad_trials += 1;
            }
        }
        assert!(
            (bad_trials as f64) / 200.0 <= delta + 0.05,
            "{} of 200 trials violated the mass bound",
            bad_trials
        );
    }

    #[test]
    fn subsample_preserves_total_and_bounds() {
        let mut rng = RngStream::new(17);
        for _ in 0..200 {
            let n = 1 + rng.index_below(12);
            let mut counts: Vec<u64> = (0..n).map(|_| rng.next_u64() % 50).collect();
            let total: u64 = counts.iter().sum();
            let take = rng.next_u64() % (total + 1);
            let orig = counts.clone();
            subsample_counts(&mut counts, total, take, &mut rng);
            assert_eq!(counts.iter().sum::<u64>(), take);
            for (a, b) in counts.iter().zip(&orig) {
                assert!(a <= b);
            }
        }
    }

    #[test]
    fn sub_divide_full_region_reduces_to_divide() {
        let p = Pmf::uniform(32).unwrap();
        let s = AliasSampler::from_pmf(&p);
        let region = [Interval::whole(32).unwrap()];
        let out = approx_sub_divide(&s, &region, 4, 0.05, &mut RngStream::new(5)).unwrap();
        assert_eq!(out.partitions.len(), 1);
        assert!(out.partitions[0].covers_exactly(32));
        assert!(out.total_parts() <= 8 * 4 + 1);
        // Full acceptance: one chunk with 20% headroom.
        let needed = divide_sample_count(4, 0.05);
        assert_eq!(out.accepted, out.draws_used);
        assert!(out.draws_used <= (1.2 * needed as f64).ceil() as u64 + 1);
    }

    #[test]
    fn sub_divide_respects_input_boundaries() {
        let p = Pmf::uniform(40).unwrap();
        let s = AliasSampler::from_pmf(&p);
        // Second and third inputs touch; parts must still not cross.
        let region = [
            Interval::new(0, 9).unwrap(),
            Interval::new(20, 24).unwrap(),
            Interval::new(25, 29).unwrap(),
        ];
        let out = approx_sub_divide(&s, &region, 2, 0.05, &mut RngStream::new(8)).unwrap();
        assert_eq!(out.partitions.len(), 3);
        for (part, input) in out.partitions.iter().zip(&region) {
            assert_eq!(part.covered_len(), input.len());
            for iv in part.intervals() {
                assert!(input.lo() <= iv.lo() && iv.hi() <= input.hi());
            }
        }
        assert!(out.total_parts() <= 8 * 2 + 3);
    }

    #[test]
    fn sub_divide_raw_draws_track_region_mass() {
        // Region holds exactly half the mass: raw draws should average
        // about twice the accepted-sample requirement.
        let p = Pmf::uniform(16).unwrap();
        let s = AliasSampler::from_pmf(&p);
        let region = [Interval::new(0, 7).unwrap()];
        let needed = divide_sample_count(4, 0.1) as f64;
        let mut total_drawn = 0u64;
        for seed in 0..100u64 {
            let out = approx_sub_divide(&s, &region, 4, 0.1, &mut RngStream::new(seed)).unwrap();
            total_drawn += out.draws_used;
        }
        let mean = total_drawn as f64 / 100.0;
        assert!(
            mean >= 1.6 * needed && mean <= 2.4 * needed,
            "mean raw draws {} outside 20% of {}",
            mean,
            2.0 * needed
        );
    }

    #[test]
    fn sub_divide_empty_region_is_empty() {
        let s = AliasSampler::from_weights(&[1.0, 1.0]).unwrap();
        let out = approx_sub_divide(&s, &[], 2, 0.1, &mut RngStream::new(0)).unwrap();
        assert!(out.partitions.is_empty());
        assert_eq!(out.draws_used, 0);
    }

    #[test]
    fn sub_divide_fails_on_negligible_region_mass() {
        // Unmixed distribution with essentially no mass on the region: the
        // raw-draw budget cannot collect enough accepted samples.
        let mut mass = vec![1e-12; 16];
        mass[0] = 1.0 - 15.0e-12;
        let p = Pmf::new(mass).unwrap();
        let s = AliasSampler::from_pmf(&p);
        let region = [Interval::new(8, 15).unwrap()];
        let err = approx_sub_divide(&s, &region, 2, 0.2, &mut RngStream::new(3)).unwrap_err();
        assert!(matches!(err, Error::MassTooSmall { .. }));
    }

    #[test]
    fn sub_divide_conditional_mass_bound_monte_carlo() {
        // Mixed random 5-histograms, half-domain region: non-singleton
        // parts should have true mass at most p(region)·16/B.
        let delta = 0.05;
        let b = 32usize;
        let mut gen_rng = RngStream::new(505);
        let mut bad_trials = 0;
        let region = [
            Interval::new(0, 127).unwrap(),
            Interval::new(256, 383).unwrap(),
        ];
        for seed in 0..100u64 {
            let p = mix_with_uniform(&random_khistogram(512, 5, &mut gen_rng).unwrap());
            let region_mass: f64 = region.iter().map(|iv| p.interval_mass(*iv).unwrap()).sum();
            let s = AliasSampler::from_pmf(&p);
            let out = approx_sub_divide(&s, &region, b, delta, &mut RngStream::new(seed)).unwrap();
            let mut violated = false;
            for (part, flags) in out.partitions.iter().zip(&out.heavy) {
                for (iv, &h) in part.intervals().iter().zip(flags) {
                    if !h && p.interval_mass(*iv).unwrap() > region_mass * 16.0 / b as f64 {
                        violated = true;
                    }
                }
            }
            if violated {
                bad_trials += 1;
            }
        }
        assert!(
            (bad_trials as f64) / 100.0 <= delta + 0.05,
            "{} of 100 trials violated the conditional mass bound",
            bad_trials
        );
    }

    #[test]
    fn sub_divide_validates_region() {
        let s = AliasSampler::from_weights(&[1.0; 8]).unwrap();
        let mut rng = RngStream::new(0);
        let overlapping = [Interval::new(0, 4).unwrap(), Interval::new(4, 7).unwrap()];
        assert!(matches!(
            approx_sub_divide(&s, &overlapping, 2, 0.1, &mut rng),
            Err(Error::NotAPartition { .. })
        ));
        let oob = [Interval::new(5, 9).unwrap()];
        assert!(matches!(
            approx_sub_divide(&s, &oob, 2, 0.1, &mut rng),
            Err(Error::IntervalOutOfBounds { .. })
        ));
    }

    #[test]
    fn divide_is_deterministic_per_seed() {
        let p = Pmf::uniform(24).unwrap();
        let s = AliasSampler::from_pmf(&p);
        let a = approx_divide_sampled(&s, 3, 0.1, &mut RngStream::new(77)).unwrap();
        let b = approx_divide_sampled(&s, 3, 0.1, &mut RngStream::new(77)).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.heavy, b.heavy);
    }
}
