//! The k-histogram tester: iterative divide/sieve narrowing of the suspect
//! region, a stitched piecewise-constant approximation, an exact dynamic
//! program for ℓ₁ distance to k-piecewise-constant functions, and a
//! Poissonized chi-square tolerant identity test.

use std::cell::Cell;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::dist::{Interval, Measure};
use crate::error::{Error, Result};
use crate::partition::{approx_sub_divide, IntervalPartition};
use crate::rng::RngStream;
use crate::sampler::{MixedSampler, Sampler, TallySampler};
use crate::sieve::{learn_and_sieve, SieveVerdict, DEFAULT_C_SIEVE};
use crate::util::CompSum;

/// Tunable constants. The defaults are the calibrated values; the CLI lets
/// experiments override them.
#[derive(Debug, Clone, Serialize)]
pub struct TesterConfig {
    /// Sieve sample-size multiplier.
    pub c_sieve: f64,
    /// Identity-test sample-size multiplier.
    pub c_test: f64,
    /// Suspect-mass estimate multiplier.
    pub c_mass: f64,
}

impl Default for TesterConfig {
    fn default() -> Self {
        Self {
            c_sieve: DEFAULT_C_SIEVE,
            c_test: 2000.0,
            c_mass: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Accept,
    Reject,
}

/// Why a run rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    /// The sieve flagged more than `k` cells.
    SieveFlags,
    /// The suspect region kept mass above the exit threshold too long.
    NonConvergence,
    /// The stitched approximation is ℓ₁-far from every k-histogram.
    DpDistance,
    /// The identity test refuted the stitched approximation.
    IdentityTest,
}

/// Exact per-phase sample tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PhaseSamples {
    pub divide: u64,
    pub sieve: u64,
    pub mass: u64,
    pub test: u64,
}

impl PhaseSamples {
    pub fn total(&self) -> u64 {
        self.divide + self.sieve + self.mass + self.test
    }
}

/// Full record of one tester run.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub verdict: Verdict,
    pub reason: Option<RejectReason>,
    /// Divide/sieve rounds executed.
    pub iterations: u32,
    /// Suspect-mass estimate after each round.
    pub r_history: Vec<f64>,
    /// Suspect region after each round, as (lo, hi) pairs.
    pub bad_history: Vec<Vec<(usize, usize)>>,
    pub phases: PhaseSamples,
    /// Equals `phases.total()`; separately counted at the sampler.
    pub samples_total: u64,
    /// ℓ₁ distance of the stitched approximation to the best k-piecewise
    /// constant function, when the run got that far.
    pub dp_distance: Option<f64>,
    /// `|1 − ‖stitched‖₁|`, when the run got that far.
    pub norm_slack: Option<f64>,
    /// The stitched approximation itself; not serialized.
    #[serde(skip)]
    pub stitched: Option<Measure>,
}

#[derive(PartialEq, Clone, Copy)]
struct Tot(f64);

impl Eq for Tot {}

impl PartialOrd for Tot {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tot {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Streaming ℓ₁-to-best-constant cost. Two heaps around the running median;
/// pushing keeps `lower` at most one longer than `upper`.
struct MedianCost {
    lower: BinaryHeap<Tot>,
    upper: BinaryHeap<Reverse<Tot>>,
    sum_lower: f64,
    sum_upper: f64,
}

impl MedianCost {
    fn new() -> Self {
        Self {
            lower: BinaryHeap::new(),
            upper: BinaryHeap::new(),
            sum_lower: 0.0,
            sum_upper: 0.0,
        }
    }

    fn push(&mut self, v: f64) {
        if self.lower.peek().is_none_or(|&Tot(top)| v <= top) {
            self.lower.push(Tot(v));
            self.sum_lower += v;
        } else {
            self.upper.push(Reverse(Tot(v)));
            self.sum_upper += v;
        }
        if self.lower.len() > self.upper.len() + 1 {
            let Tot(top) = self.lower.pop().expect("nonempty");
            self.sum_lower -= top;
            self.upper.push(Reverse(Tot(top)));
            self.sum_upper += top;
        } else if self.upper.len() > self.lower.len() {
            let Reverse(Tot(top)) = self.upper.pop().expect("nonempty");
            self.sum_upper -= top;
            self.lower.push(Tot(top));
            self.sum_lower += top;
        }
    }

    fn cost(&self) -> f64 {
        let Tot(med) = *self.lower.peek().expect("cost of nonempty run");
        med * self.lower.len() as f64 - self.sum_lower + self.sum_upper
            - med * self.upper.len() as f64
    }
}

/// Minimum of `‖measure − g‖₁` over non-negative functions `g` constant on
/// at most `k` intervals. Exact: interval costs are median absolute
/// deviations, combined by dynamic programming over (prefix, piece count).
pub fn dp_distance_to_khistogram(measure: &Measure, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "need at least one piece".into(),
        });
    }
    let v = measure.as_slice();
    let n = v.len();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let k = k.min(n);
    // cost[i][j]: ℓ₁ cost of covering v[i..=j] with one constant piece.
    let mut cost = vec![0.0f64; n * n];
    for i in 0..n {
        let mut mc = MedianCost::new();
        for j in i..n {
            mc.push(v[j]);
            cost[i * n + j] = mc.cost();
        }
    }
    // best[p][i]: minimum cost of v[0..i] using exactly p pieces.
    let inf = f64::INFINITY;
    let mut prev = vec![inf; n + 1];
    prev[0] = 0.0;
    let mut answer = inf;
    for _p in 1..=k {
        let mut cur = vec![inf; n + 1];
        for i in 1..=n {
            let mut best = inf;
            for s in 0..i {
                if prev[s] < inf {
                    let c = prev[s] + cost[s * n + i - 1];
                    if c < best {
                        best = c;
                    }
                }
            }
            cur[i] = best;
        }
        if cur[n] < answer {
            answer = cur[n];
        }
        prev = cur;
    }
    Ok(answer)
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

/// One Poissonized chi-square round. Restricted to
/// `𝓐 = {i : p̂(i) ≥ ε/(50n)}`; the statistic
/// `Z = Σ_𝓐 ((N_i − m·p̂_i)² − N_i)/(m·p̂_i)` has mean `m·dχ²_𝓐(p‖p̂)`, so
/// the threshold `m·ε²/8` separates a small divergence from ℓ₁ farness.
fn identity_round(
    sampler: &dyn Sampler,
    p_hat: &Measure,
    eps: f64,
    c_test: f64,
    rng: &mut RngStream,
) -> Result<Verdict> {
    let n = sampler.domain_size();
    let m = (c_test * (n as f64).sqrt() / (eps * eps)).ceil();
    let draws = Poisson::new(m)
        .expect("positive rate")
        .sample(rng)
        .round() as u64;
    let mut counts = vec![0u64; n];
    sampler.draw_counts(draws, rng, &mut counts);
    let cutoff = eps / (50.0 * n as f64);
    let mut z = CompSum::new();
    for i in 0..n {
        let ph = p_hat.get(i);
        if ph < cutoff {
            continue;
        }
        let e = m * ph;
        let d = counts[i] as f64 - e;
        z.add((d * d - counts[i] as f64) / e);
    }
    let tau = m * eps * eps / 8.0;
    Ok(if z.value() <= tau {
        Verdict::Accept
    } else {
        Verdict::Reject
    })
}

/// Tolerant identity test against a fixed approximation: median of three
/// independent Poissonized chi-square rounds.
pub fn tolerant_identity_test(
    sampler: &dyn Sampler,
    p_hat: &Measure,
    eps: f64,
    c_test: f64,
    rng: &mut RngStream,
) -> Result<Verdict> {
    check_unit("eps", eps)?;
    if sampler.domain_size() != p_hat.len() {
        return Err(Error::DimensionMismatch {
            left: sampler.domain_size(),
            right: p_hat.len(),
        });
    }
    if !(c_test > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c_test",
            reason: format!("must be positive, got {}", c_test),
        });
    }
    let mut accepts = 0;
    for _ in 0..3 {
        if identity_round(sampler, p_hat, eps, c_test, rng)? == Verdict::Accept {
            accepts += 1;
        }
    }
    Ok(if accepts >= 2 {
        Verdict::Accept
    } else {
        Verdict::Reject
    })
}

fn region_pairs(region: &[Interval]) -> Vec<(usize, usize)> {
    region.iter().map(|iv| (iv.lo(), iv.hi())).collect()
}

/// Tests whether the sampled distribution is a k-histogram (Accept) or
/// ε-far in total variation from every k-histogram (Reject), with error
/// probability at most 1/3 either way.
///
/// The sampler is mixed half-and-half with uniform internally and the run
/// targets ε/2 on the mixed distribution. Rounds of divide + sieve shrink a
/// suspect region until its estimated mass falls under ε/16; the learned
/// levels stitched over the cleared region then face the dynamic-program
/// distance check and the tolerant identity test.
pub fn test_histogram(
    raw: &dyn Sampler,
    k: usize,
    eps: f64,
    cfg: &TesterConfig,
    rng: &mut RngStream,
) -> Result<TestReport> {
    check_unit("eps", eps)?;
    let n = raw.domain_size();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("need 1 <= k <= n = {}, got {}", n, k),
        });
    }

    let eps = eps / 2.0;
    let mixed = MixedSampler::new(raw);
    let total_count = Cell::new(0u64);
    let counted = TallySampler::new(&mixed, &total_count);
    let divide_count = Cell::new(0u64);
    let sieve_count = Cell::new(0u64);
    let mass_count = Cell::new(0u64);
    let test_count = Cell::new(0u64);
    let divide_sampler = TallySampler::new(&counted, &divide_count);
    let sieve_sampler = TallySampler::new(&counted, &sieve_count);
    let mass_sampler = TallySampler::new(&counted, &mass_count);
    let test_sampler = TallySampler::new(&counted, &test_count);

    let t_rounds = (((1.0 / eps).ln().ceil() as u32) * 3).max(1);
    let delta = 1.0 / (100.0 * t_rounds as f64);
    let eps_sieve = eps / (4.0 * (t_rounds as f64).sqrt());
    let ell = (cfg.c_mass * (1.0 / delta).ln() / eps).ceil() as u64;
    let b_divide = 32 * k;

    let phases = |d: &Cell<u64>, s: &Cell<u64>, ma: &Cell<u64>, te: &Cell<u64>| PhaseSamples {
        divide: d.get(),
        sieve: s.get(),
        mass: ma.get(),
        test: te.get(),
    };

    let mut suspects: Vec<Interval> = vec![Interval::whole(n)?];
    let mut layers: Vec<(Interval, f64)> = Vec::new();
    let mut r = 1.0f64;
    let mut r_history = Vec::new();
    let mut bad_history = Vec::new();
    let mut iterations = 0u32;
    let mut counts_buf = vec![0u64; n];

    let reject_reason;
    loop {
        if r <= eps / 8.0 {
            reject_reason = None;
            break;
        }
        if iterations >= 10 * t_rounds {
            reject_reason = Some(RejectReason::NonConvergence);
            break;
        }
        iterations += 1;

        let sub = approx_sub_divide(&divide_sampler, &suspects, b_divide, delta, rng)?;
        let partition = IntervalPartition::new(sub.flattened())?;
        let sieved = learn_and_sieve(
            &sieve_sampler,
            &partition,
            k,
            eps_sieve,
            delta,
            cfg.c_sieve,
            rng,
        )?;
        if sieved.verdict == SieveVerdict::Reject {
            reject_reason = Some(RejectReason::SieveFlags);
            break;
        }

        let mut next_suspects = Vec::new();
        for (j, &cell) in partition.intervals().iter().enumerate() {
            if sieved.bad_cells.binary_search(&j).is_ok() {
                next_suspects.push(cell);
            } else {
                layers.push((cell, sieved.learned.level(j)));
            }
        }
        suspects = next_suspects;

        counts_buf.fill(0);
        mass_sampler.draw_counts(ell, rng, &mut counts_buf);
        let hits: u64 = suspects
            .iter()
            .flat_map(|iv| iv.indices())
            .map(|i| counts_buf[i])
            .sum();
        r = hits as f64 / ell as f64;
        r_history.push(r);
        bad_history.push(region_pairs(&suspects));
    }

    if let Some(reason) = reject_reason {
        let ph = phases(&divide_count, &sieve_count, &mass_count, &test_count);
        assert_eq!(ph.total(), total_count.get(), "phase tallies must cover every draw");
        return Ok(TestReport {
            verdict: Verdict::Reject,
            reason: Some(reason),
            iterations,
            r_history,
            bad_history,
            phases: ph,
            samples_total: total_count.get(),
            dp_distance: None,
            norm_slack: None,
            stitched: None,
        });
    }

    // Stitch: per-round levels on cleared cells, zero on the residue.
    let mut stitched = vec![0.0f64; n];
    let mut covered = 0usize;
    for &(cell, level) in &layers {
        covered += cell.len();
        for i in cell.indices() {
            debug_assert_eq!(stitched[i], 0.0, "cleared cells never overlap");
            stitched[i] = level;
        }
    }
    let residue: usize = suspects.iter().map(|iv| iv.len()).sum();
    debug_assert_eq!(covered + residue, n, "cleared cells and residue tile the domain");
    let stitched = Measure::new(stitched)?;

    let dp = dp_distance_to_khistogram(&stitched, k)?;
    let slack = (1.0 - stitched.total()).abs();
    let dp_pass = dp + slack <= eps;
    let identity_pass = dp_pass
        && tolerant_identity_test(&test_sampler, &stitched, eps, cfg.c_test, rng)?
            == Verdict::Accept;

    let ph = phases(&divide_count, &sieve_count, &mass_count, &test_count);
    assert_eq!(ph.total(), total_count.get(), "phase tallies must cover every draw");
    let (verdict, reason) = if !dp_pass {
        (Verdict::Reject, Some(RejectReason::DpDistance))
    } else if !identity_pass {
        (Verdict::Reject, Some(RejectReason::IdentityTest))
    } else {
        (Verdict::Accept, None)
    };
    Ok(TestReport {
        verdict,
        reason,
        iterations,
        r_history,
        bad_history,
        phases: ph,
        samples_total: total_count.get(),
        dp_distance: Some(dp),
        norm_slack: Some(slack),
        stitched: Some(stitched),
    })
}
