//! Sample access to distributions.
//!
//! Everything downstream consumes *counts*, so the trait exposes a bulk
//! [`Sampler::draw_counts`] next to single draws. The discrete samplers
//! override it with a conditional-binomial multinomial draw: one pass over
//! the domain per call instead of one table lookup per sample, which is what
//! makes the large sample sizes of the sieve affordable. The bulk path is
//! exact in distribution, not an approximation.

use std::cell::Cell;

use rand_distr::{Binomial, Distribution};

use crate::dist::{Pmf, SampleSet};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::util::comp_sum;

/// Sample access to a fixed distribution on `{0, …, n-1}`.
pub trait Sampler {
    fn domain_size(&self) -> usize;

    /// One draw.
    fn draw(&self, rng: &mut RngStream) -> usize;

    /// Adds the counts of `m` fresh i.i.d. draws into `out`.
    ///
    /// `out.len()` must equal the domain size; entries accumulate.
    fn draw_counts(&self, m: u64, rng: &mut RngStream, out: &mut [u64]) {
        assert_eq!(out.len(), self.domain_size());
        for _ in 0..m {
            out[self.draw(rng)] += 1;
        }
    }

    /// `m` draws in order. Only sensible for small `m`; the pipeline itself
    /// never materializes individual draws.
    fn sample(&self, m: u64, rng: &mut RngStream) -> SampleSet {
        let draws = (0..m).map(|_| self.draw(rng)).collect();
        SampleSet::from_draws(draws)
    }
}

/// Multinomial counts via the chain rule: element `i` receives a
/// `Binomial(remaining, w_i / suffix_i)` count. `suffix` must hold suffix
/// sums of `weights`. Exact, one binomial per element.
fn multinomial_counts(
    weights: &[f64],
    suffix: &[f64],
    m: u64,
    rng: &mut RngStream,
    out: &mut [u64],
) {
    let mut remaining = m;
    for i in 0..weights.len() {
        if remaining == 0 {
            return;
        }
        if weights[i] <= 0.0 {
            continue;
        }
        if suffix[i] <= weights[i] {
            // Numerically the tail is exhausted: everything left lands here.
            out[i] += remaining;
            return;
        }
        let ratio = (weights[i] / suffix[i]).clamp(0.0, 1.0);
        let x = Binomial::new(remaining, ratio)
            .expect("ratio is clamped to [0, 1]")
            .sample(rng);
        out[i] += x;
        remaining -= x;
    }
    debug_assert_eq!(remaining, 0, "weights exhausted with draws left over");
}

/// Walker/Vose alias table over fixed non-negative weights.
#[derive(Debug, Clone)]
pub struct AliasSampler {
    weights: Vec<f64>,
    suffix: Vec<f64>,
    accept: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasSampler {
    /// Weights must be finite, non-negative, and not all zero. They are
    /// normalized internally.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyDomain);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFiniteEntry {
                    context: "sampler weight",
                    index: i,
                });
            }
            if w < 0.0 {
                return Err(Error::NegativeEntry {
                    context: "sampler weight",
                    index: i,
                    value: w,
                });
            }
        }
        let total = comp_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "total weight must be positive".into(),
            });
        }
        let n = weights.len();
        let norm: Vec<f64> = weights.iter().map(|&w| w / total).collect();

        let mut suffix = vec![0.0; n];
        let mut acc = 0.0;
        let mut comp = 0.0;
        for i in (0..n).rev() {
            // Neumaier accumulation keeps long suffix sums stable.
            let t = acc + norm[i];
            if acc.abs() >= norm[i].abs() {
                comp += (acc - t) + norm[i];
            } else {
                comp += (norm[i] - t) + acc;
            }
            acc = t;
            suffix[i] = acc + comp;
        }

        let mut accept = vec![0.0; n];
        let mut alias = vec![0usize; n];
        let scaled: Vec<f64> = norm.iter().map(|&p| p * n as f64).collect();
        let mut small: Vec<usize> = Vec::with_capacity(n);
        let mut large: Vec<usize> = Vec::with_capacity(n);
        let mut rem = scaled;
        for (i, &s) in rem.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            accept[s] = rem[s];
            alias[s] = l;
            rem[l] = (rem[l] + rem[s]) - 1.0;
            if rem[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers in either queue have weight 1 up to rounding.
        for &i in small.iter().chain(large.iter()) {
            accept[i] = 1.0;
            alias[i] = i;
        }

        Ok(Self {
            weights: norm,
            suffix,
            accept,
            alias,
        })
    }

    pub fn from_pmf(p: &Pmf) -> Self {
        Self::from_weights(p.as_slice()).expect("pmf entries are valid weights")
    }

    /// Normalized weight of element `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

impl Sampler for AliasSampler {
    fn domain_size(&self) -> usize {
        self.weights.len()
    }

    fn draw(&self, rng: &mut RngStream) -> usize {
        let i = rng.index_below(self.weights.len());
        if rng.next_f64() < self.accept[i] {
            i
        } else {
            self.alias[i]
        }
    }

    fn draw_counts(&self, m: u64, rng: &mut RngStream, out: &mut [u64]) {
        assert_eq!(out.len(), self.weights.len());
        multinomial_counts(&self.weights, &self.suffix, m, rng, out);
    }
}

/// Even mixture of a base sampler with the uniform distribution: each draw
/// flips a fair coin between the base distribution and a uniform element.
/// Sampling-level counterpart of [`crate::dist::mix_with_uniform`].
pub struct MixedSampler<'a> {
    base: &'a dyn Sampler,
}

impl<'a> MixedSampler<'a> {
    pub fn new(base: &'a dyn Sampler) -> Self {
        Self { base }
    }
}

impl Sampler for MixedSampler<'_> {
    fn domain_size(&self) -> usize {
        self.base.domain_size()
    }

    fn draw(&self, rng: &mut RngStream) -> usize {
        if rng.next_f64() < 0.5 {
            self.base.draw(rng)
        } else {
            rng.index_below(self.base.domain_size())
        }
    }

    fn draw_counts(&self, m: u64, rng: &mut RngStream, out: &mut [u64]) {
        let n = self.base.domain_size();
        assert_eq!(out.len(), n);
        let from_base = Binomial::new(m, 0.5)
            .expect("0.5 is a valid probability")
            .sample(rng);
        self.base.draw_counts(from_base, rng, out);
        // Uniform part: equal weights, chain-rule binomials.
        let mut remaining = m - from_base;
        for i in 0..n {
            if remaining == 0 {
                break;
            }
            let left = (n - i) as f64;
            if i + 1 == n {
                out[i] += remaining;
                remaining = 0;
            } else {
                let x = Binomial::new(remaining, 1.0 / left)
                    .expect("1/left is a valid probability")
                    .sample(rng);
                out[i] += x;
                remaining -= x;
            }
        }
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    crate::util::ln_factorial(n) - crate::util::ln_factorial(k) - crate::util::ln_factorial(n - k)
}

/// Draws the number of marked items in a uniform `take`-subset of a `total`
/// population with `feature` marked items. Mode-centered inverse transform:
/// the pmf at the mode comes from log-factorials, neighbors from exact
/// rational ratios, so no intermediate ever overflows or underflows.
pub(crate) fn hypergeometric(total: u64, feature: u64, take: u64, rng: &mut RngStream) -> u64 {
    debug_assert!(feature <= total && take <= total);
    let lo = take.saturating_sub(total - feature);
    let hi = feature.min(take);
    if lo == hi {
        return lo;
    }
    let n1 = feature as f64;
    let n2 = (total - feature) as f64;
    let k = take as f64;
    let mode = (((take + 1) as f64 * (feature + 1) as f64) / (total + 2) as f64) as u64;
    let mode = mode.clamp(lo, hi);
    let p_mode = (ln_choose(feature, mode) + ln_choose(total - feature, take - mode)
        - ln_choose(total, take))
    .exp();
    let u = rng.next_f64();
    let mut cum = p_mode;
    if u < cum {
        return mode;
    }
    let (mut x_up, mut p_up) = (mode, p_mode);
    let (mut x_dn, mut p_dn) = (mode, p_mode);
    loop {
        let mut advanced = false;
        if x_up < hi {
            let x = x_up as f64;
            p_up *= (n1 - x) * (k - x) / ((x + 1.0) * (n2 - k + x + 1.0));
            x_up += 1;
            cum += p_up;
            advanced = true;
            if u < cum {
                return x_up;
            }
        }
        if x_dn > lo {
            let x = x_dn as f64;
            p_dn *= x * (n2 - k + x) / ((n1 - x + 1.0) * (k - x + 1.0));
            x_dn -= 1;
            cum += p_dn;
            advanced = true;
            if u < cum {
                return x_dn;
            }
        }
        if !advanced {
            // Rounding left cum a hair under u with the support exhausted.
            return mode;
        }
    }
}

/// Pass-through sampler that counts how many draws flow through it.
/// Bulk draws count as their logical size.
pub struct TallySampler<'a> {
    base: &'a dyn Sampler,
    count: &'a Cell<u64>,
}

impl<'a> TallySampler<'a> {
    pub fn new(base: &'a dyn Sampler, count: &'a Cell<u64>) -> Self {
        Self { base, count }
    }
}

impl Sampler for TallySampler<'_> {
    fn domain_size(&self) -> usize {
        self.base.domain_size()
    }

    fn draw(&self, rng: &mut RngStream) -> usize {
        self.count.set(self.count.get() + 1);
        self.base.draw(rng)
    }

    fn draw_counts(&self, m: u64, rng: &mut RngStream, out: &mut [u64]) {
        self.count.set(self.count.get() + m);
        self.base.draw_counts(m, rng, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn freq(counts: &[u64], m: u64) -> Vec<f64> {
        counts.iter().map(|&c| c as f64 / m as f64).collect()
    }

    #[test]
    fn alias_rejects_bad_weights() {
        assert!(AliasSampler::from_weights(&[]).is_err());
        assert!(AliasSampler::from_weights(&[1.0, -0.1]).is_err());
        assert!(AliasSampler::from_weights(&[0.0, 0.0]).is_err());
        assert!(AliasSampler::from_weights(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn alias_single_draws_match_weights() {
        let s = AliasSampler::from_weights(&[1.0, 2.0, 3.0, 2.0]).unwrap();
        let mut rng = RngStream::new(11);
        let m = 400_000u64;
        let mut counts = vec![0u64; 4];
        for _ in 0..m {
            counts[s.draw(&mut rng)] += 1;
        }
        let f = freq(&counts, m);
        for (i, &expect) in [0.125, 0.25, 0.375, 0.25].iter().enumerate() {
            assert!((f[i] - expect).abs() < 0.005, "i={} f={}", i, f[i]);
        }
    }

    #[test]
    fn bulk_counts_match_weights() {
        let s = AliasSampler::from_weights(&[0.5, 0.0, 0.3, 0.2]).unwrap();
        let mut rng = RngStream::new(7);
        let m = 1_000_000u64;
        let mut counts = vec![0u64; 4];
        s.draw_counts(m, &mut rng, &mut counts);
        assert_eq!(counts.iter().sum::<u64>(), m);
        assert_eq!(counts[1], 0, "zero-weight element must never be drawn");
        let f = freq(&counts, m);
        for (i, &expect) in [0.5, 0.0, 0.3, 0.2].iter().enumerate() {
            assert!((f[i] - expect).abs() < 0.003, "i={} f={}", i, f[i]);
        }
    }

    #[test]
    fn bulk_counts_are_deterministic_per_seed() {
        let s = AliasSampler::from_weights(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut a = vec![0u64; 4];
        let mut b = vec![0u64; 4];
        s.draw_counts(10_000, &mut RngStream::new(3), &mut a);
        s.draw_counts(10_000, &mut RngStream::new(3), &mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn mixed_sampler_floors_zero_mass() {
        // Base puts nothing on element 0; the mixture must still hit it at
        // rate about 1/(2n).
        let base = AliasSampler::from_weights(&[0.0, 1.0, 1.0, 1.0]).unwrap();
        let mixed = MixedSampler::new(&base);
        let mut rng = RngStream::new(21);
        let m = 800_000u64;
        let mut counts = vec![0u64; 4];
        mixed.draw_counts(m, &mut rng, &mut counts);
        assert_eq!(counts.iter().sum::<u64>(), m);
        let f0 = counts[0] as f64 / m as f64;
        assert!((f0 - 0.125).abs() < 0.005, "f0={}", f0);
    }

    #[test]
    fn mixed_single_draws_agree_with_bulk_rates() {
        let base = AliasSampler::from_weights(&[1.0, 0.0]).unwrap();
        let mixed = MixedSampler::new(&base);
        let mut rng = RngStream::new(9);
        let m = 200_000u64;
        let mut counts = vec![0u64; 2];
        for _ in 0..m {
            counts[mixed.draw(&mut rng)] += 1;
        }
        let f = freq(&counts, m);
        assert!((f[0] - 0.75).abs() < 0.01);
        assert!((f[1] - 0.25).abs() < 0.01);
    }

    #[test]
    fn tally_counts_logical_draws() {
        let base = AliasSampler::from_weights(&[1.0, 1.0]).unwrap();
        let total = Cell::new(0u64);
        let tallied = TallySampler::new(&base, &total);
        let phase = Cell::new(0u64);
        let phased = TallySampler::new(&tallied, &phase);

        let mut rng = RngStream::new(1);
        let mut out = vec![0u64; 2];
        phased.draw_counts(1_000, &mut rng, &mut out);
        phased.draw(&mut rng);
        assert_eq!(phase.get(), 1_001);
        assert_eq!(total.get(), 1_001);
    }

    #[test]
    fn sample_returns_ordered_draws() {
        let s = AliasSampler::from_weights(&[1.0]).unwrap();
        let set = s.sample(5, &mut RngStream::new(0));
        assert_eq!(set.draws(), &[0, 0, 0, 0, 0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bulk_total_always_m(
            weights in prop::collection::vec(0.0f64..10.0, 1..20),
            m in 0u64..5_000,
            seed in any::<u64>(),
        ) {
            prop_assume!(weights.iter().sum::<f64>() > 1e-6);
            let s = AliasSampler::from_weights(&weights).unwrap();
            let mut counts = vec![0u64; weights.len()];
            s.draw_counts(m, &mut RngStream::new(seed), &mut counts);
            prop_assert_eq!(counts.iter().sum::<u64>(), m);
            for (i, &c) in counts.iter().enumerate() {
                if weights[i] == 0.0 {
                    prop_assert_eq!(c, 0);
                }
            }
        }

        #[test]
        fn mixed_bulk_total_always_m(
            weights in prop::collection::vec(0.0f64..10.0, 1..20),
            m in 0u64..5_000,
            seed in any::<u64>(),
        ) {
            prop_assume!(weights.iter().sum::<f64>() > 1e-6);
            let base = AliasSampler::from_weights(&weights).unwrap();
            let mixed = MixedSampler::new(&base);
            let mut counts = vec![0u64; weights.len()];
            mixed.draw_counts(m, &mut RngStream::new(seed), &mut counts);
            prop_assert_eq!(counts.iter().sum::<u64>(), m);
        }
    }

    #[test]
    fn hypergeometric_degenerate_cases() {
        let mut rng = RngStream::new(5);
        assert_eq!(hypergeometric(10, 0, 4, &mut rng), 0);
        assert_eq!(hypergeometric(10, 10, 4, &mut rng), 4);
        assert_eq!(hypergeometric(10, 3, 0, &mut rng), 0);
        assert_eq!(hypergeometric(10, 3, 10, &mut rng), 3);
    }

    #[test]
    fn hypergeometric_matches_exact_pmf_small() {
        // Exact pmf via integer binomial coefficients at N=20, K=7, m=9.
        fn choose(n: u64, k: u64) -> u128 {
            let mut r: u128 = 1;
            for i in 0..k {
                r = r * (n - i) as u128 / (i + 1) as u128;
            }
            r
        }
        let (n, kf, m) = (20u64, 7u64, 9u64);
        let denom = choose(n, m);
        let pmf: Vec<f64> = (0..=7u64)
            .map(|x| (choose(kf, x) * choose(n - kf, m - x)) as f64 / denom as f64)
            .collect();
        let trials = 40_000u64;
        let mut counts = vec![0u64; 8];
        let mut rng = RngStream::new(77);
        for _ in 0..trials {
            counts[hypergeometric(n, kf, m, &mut rng) as usize] += 1;
        }
        for (x, &p) in pmf.iter().enumerate() {
            let f = counts[x] as f64 / trials as f64;
            assert!(
                (f - p).abs() < 0.01,
                "value {}: freq {} vs pmf {}",
                x,
                f,
                p
            );
        }
    }

    #[test]
    fn hypergeometric_survives_large_skewed_parameters() {
        // Parameter region where naive factorial-ratio setups overflow.
        let (n, kf, m) = (4000u64, 86u64, 3600u64);
        let mean = kf as f64 * m as f64 / n as f64;
        let var = mean * (1.0 - m as f64 / n as f64) * (n - kf) as f64 / (n - 1) as f64;
        let trials = 10_000u64;
        let mut rng = RngStream::new(13);
        let mut sum = 0u64;
        for _ in 0..trials {
            let x = hypergeometric(n, kf, m, &mut rng);
            assert!(x <= kf);
            sum += x;
        }
        let observed = sum as f64 / trials as f64;
        let tol = 5.0 * (var / trials as f64).sqrt();
        assert!(
            (observed - mean).abs() < tol,
            "mean {} vs expected {} (tol {})",
            observed,
            mean,
            tol
        );
    }
}
