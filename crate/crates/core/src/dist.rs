//! Probability vectors, sub-probability measures, and the distances used by
//! the tester.
//!
//! Domains are `{0, …, n-1}`. A [`Pmf`] is validated to be non-negative and
//! to sum to one within [`NORMALIZATION_TOL`] (checked with compensated
//! summation, so the tolerance is meaningful even for large `n`). A
//! [`Measure`] drops the normalization requirement; learned approximations
//! and hard-instance constructions are measures, not distributions.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::util::{comp_sum, CompSum};

/// Absolute tolerance on `|sum - 1|` accepted by [`Pmf::new`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

fn check_entries(context: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyDomain);
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteEntry { context, index: i });
        }
        if v < 0.0 {
            return Err(Error::NegativeEntry {
                context,
                index: i,
                value: v,
            });
        }
    }
    Ok(())
}

/// Closed index interval `[lo, hi]`, 0-based, `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    lo: usize,
    hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvertedInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Entire domain `[0, n-1]`.
    pub fn whole(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDomain);
        }
        Self::new(0, n - 1)
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false // by construction lo <= hi
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn fits(&self, n: usize) -> bool {
        self.hi < n
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Probability mass function on `{0, …, n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    mass: Vec<f64>,
}

impl Pmf {
    /// Validates non-negativity and normalization.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_entries("pmf", &mass)?;
        let total = comp_sum(mass.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                total,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(Self { mass })
    }

    /// Uniform distribution on `n` points.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDomain);
        }
        Ok(Self {
            mass: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    /// Total mass on an interval, compensated.
    pub fn interval_mass(&self, iv: Interval) -> Result<f64> {
        if !iv.fits(self.len()) {
            return Err(Error::IntervalOutOfBounds {
                lo: iv.lo(),
                hi: iv.hi(),
                n: self.len(),
            });
        }
        Ok(comp_sum(self.mass[iv.lo()..=iv.hi()].iter().copied()))
    }
}

/// Non-negative measure on `{0, …, n-1}`; total mass is cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    mass: Vec<f64>,
    total: f64,
}

impl Measure {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_entries("measure", &mass)?;
        let total = comp_sum(mass.iter().copied());
        Ok(Self { mass, total })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

impl From<Pmf> for Measure {
    fn from(p: Pmf) -> Self {
        let total = comp_sum(p.mass.iter().copied());
        Self {
            mass: p.mass,
            total,
        }
    }
}

impl From<&Pmf> for Measure {
    fn from(p: &Pmf) -> Self {
        let total = comp_sum(p.mass.iter().copied());
        Self {
            mass: p.mass.clone(),
            total,
        }
    }
}

/// Ordered record of i.i.d. draws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    draws: Vec<usize>,
}

impl SampleSet {
    pub fn from_draws(draws: Vec<usize>) -> Self {
        Self { draws }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draws(&self) -> &[usize] {
        &self.draws
    }

    /// Per-element occurrence counts over a domain of size `n`.
    pub fn counts(&self, n: usize) -> Result<Vec<u64>> {
        let mut out = vec![0u64; n];
        for &d in &self.draws {
            if d >= n {
                return Err(Error::IndexOutOfRange { index: d, n });
            }
            out[d] += 1;
        }
        Ok(out)
    }
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}

fn check_subset(subset: &[usize], n: usize) -> Result<()> {
    for &i in subset {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    Ok(())
}

/// Total variation distance `max_A |p(A) - q(A)| = (1/2) Σ |p_i - q_i|`.
pub fn tv_distance(p: &Measure, q: &Measure) -> Result<f64> {
    check_pair(p.as_slice(), q.as_slice())?;
    let s = comp_sum(
        p.as_slice()
            .iter()
            .zip(q.as_slice())
            .map(|(&a, &b)| (a - b).abs()),
    );
    Ok(0.5 * s)
}

/// Total variation restricted to an index subset:
/// `(1/2) Σ_{i in S} |p_i - q_i|`. Duplicate indices count twice.
pub fn tv_distance_on(p: &Measure, q: &Measure, subset: &[usize]) -> Result<f64> {
    check_pair(p.as_slice(), q.as_slice())?;
    check_subset(subset, p.len())?;
    let s = comp_sum(subset.iter().map(|&i| (p.get(i) - q.get(i)).abs()));
    Ok(0.5 * s)
}

/// Chi-square divergence `Σ (p_i - q_i)^2 / q_i`. Requires `q_i > 0`
/// everywhere.
pub fn chi_square_div(p: &Measure, q: &Measure) -> Result<f64> {
    let all: Vec<usize> = (0..p.len()).collect();
    chi_square_div_on(p, q, &all)
}

/// Chi-square divergence restricted to a subset; requires `q_i > 0` on it.
pub fn chi_square_div_on(p: &Measure, q: &Measure, subset: &[usize]) -> Result<f64> {
    check_pair(p.as_slice(), q.as_slice())?;
    check_subset(subset, p.len())?;
    let mut acc = CompSum::new();
    for &i in subset {
        let qi = q.get(i);
        if qi <= 0.0 {
            return Err(Error::ZeroDenominator { index: i });
        }
        let d = p.get(i) - qi;
        acc.add(d * d / qi);
    }
    Ok(acc.value())
}

/// Even mixture with the uniform distribution:
/// `p'_i = p_i / 2 + 1 / (2n)`. Every entry of the result is at least
/// `1/(2n)`, and the map preserves piecewise-constant structure.
pub fn mix_with_uniform(p: &Pmf) -> Pmf {
    let n = p.len() as f64;
    let floor = 0.5 / n;
    let mass = p.as_slice().iter().map(|&v| 0.5 * v + floor).collect();
    // Mixing preserves normalization to within the original tolerance.
    Pmf { mass }
}

/// Builds a histogram distribution from `(interval, level)` pieces.
///
/// The intervals must partition `{0, …, n-1}` in left-to-right order, levels
/// must be non-negative, and the implied total mass must be 1 within
/// [`NORMALIZATION_TOL`].
pub fn make_khistogram(n: usize, pieces: &[(Interval, f64)]) -> Result<Pmf> {
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    if pieces.is_empty() {
        return Err(Error::NotAPartition {
            reason: "no pieces given".into(),
        });
    }
    let mut expected_lo = 0usize;
    for (iv, level) in pieces {
        if iv.lo() != expected_lo {
            return Err(Error::NotAPartition {
                reason: format!("piece {} does not start at {}", iv, expected_lo),
            });
        }
        if !iv.fits(n) {
            return Err(Error::IntervalOutOfBounds {
                lo: iv.lo(),
                hi: iv.hi(),
                n,
            });
        }
        if !level.is_finite() {
            return Err(Error::NonFiniteEntry {
                context: "histogram level",
                index: iv.lo(),
            });
        }
        if *level < 0.0 {
            return Err(Error::NegativeEntry {
                context: "histogram level",
                index: iv.lo(),
                value: *level,
            });
        }
        expected_lo = iv.hi() + 1;
    }
    if expected_lo != n {
        return Err(Error::NotAPartition {
            reason: format!("pieces end at {} instead of {}", expected_lo, n),
        });
    }
    let mut mass = vec![0.0; n];
    for (iv, level) in pieces {
        for i in iv.indices() {
            mass[i] = *level;
        }
    }
    Pmf::new(mass)
}

/// Number of adjacent pairs with differing values; a vector with `b`
/// breakpoints is a `(b+1)`-histogram.
pub fn breakpoint_count(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Random k-histogram: `k-1` distinct breakpoints drawn uniformly, piece
/// masses drawn from a symmetric Dirichlet (unit exponentials, normalized).
///
/// The result has at most `k` pieces; coincidental equal levels can make the
/// effective piece count smaller, which still lies in the class.
pub fn random_khistogram(n: usize, k: usize, rng: &mut RngStream) -> Result<Pmf> {
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("need 1 <= k <= n, got k={} n={}", k, n),
        });
    }
    // Distinct cut positions in 1..n.
    let mut cuts = Vec::with_capacity(k - 1);
    while cuts.len() < k - 1 {
        let c = 1 + rng.index_below(n - 1);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    cuts.push(n);

    let raw: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.next_f64()).ln())
        .collect();
    let total: f64 = comp_sum(raw.iter().copied());

    let mut mass = vec![0.0; n];
    let mut lo = 0usize;
    for (piece, &hi) in cuts.iter().enumerate() {
        let len = hi - lo;
        let level = raw[piece] / total / len as f64;
        for v in &mut mass[lo..hi] {
            *v = level;
        }
        lo = hi;
    }
    // Normalize away float drift before validation.
    let s = comp_sum(mass.iter().copied());
    for v in &mut mass {
        *v /= s;
    }
    Pmf::new(mass)
}

/// Alternating-block perturbation of the uniform distribution: `blocks`
/// nearly equal contiguous blocks whose levels alternate between
/// `(1+amplitude)/n` and `(1-amplitude)/n` (then normalized). With many
/// blocks this is far from every histogram with few pieces.
pub fn zigzag(n: usize, blocks: usize, amplitude: f64) -> Result<Pmf> {
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    if blocks == 0 || blocks > n {
        return Err(Error::InvalidParameter {
            name: "blocks",
            reason: format!("need 1 <= blocks <= n, got {}", blocks),
        });
    }
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            reason: format!("need 0 <= amplitude < 1, got {}", amplitude),
        });
    }
    let base = 1.0 / n as f64;
    let mut mass = vec![0.0; n];
    for b in 0..blocks {
        let lo = b * n / blocks;
        let hi = (b + 1) * n / blocks;
        let sign = if b % 2 == 0 { 1.0 } else { -1.0 };
        let level = base * (1.0 + sign * amplitude);
        for v in &mut mass[lo..hi] {
            *v = level;
        }
    }
    let s = comp_sum(mass.iter().copied());
    for v in &mut mass {
        *v /= s;
    }
    Pmf::new(mass)
}
