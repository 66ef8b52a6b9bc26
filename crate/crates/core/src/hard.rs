//! Moment-matched hard-instance ensembles.
//!
//! Two discrete random variables `U` (supported near `1/n`) and `U'`
//! (missing `1/n` entirely) built from the sign pattern of a degree-`d+3`
//! polynomial with Chebyshev-root zeros, matching moments up to order `d`.
//! Coordinate-wise contamination of the uniform distribution with `U`
//! stays a k-histogram with high probability, while `U'` produces linearly
//! many "right border pairs", yet samples from the two are statistically
//! close until the sample size crosses the testing threshold.

use crate::dist::{breakpoint_count, Measure};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampler::{AliasSampler, Sampler};
use crate::util::{comp_sum, CompSum};
use rand_distr::{Distribution, Poisson};

/// Default degree multiplier (`d = ⌈c·ln n⌉`).
pub const DEFAULT_LITTLE_C: f64 = 2.0;
/// Default scale divisor (`Δ = √(kn)/(C·ln²n)`).
pub const DEFAULT_BIG_C: f64 = 40.0;

/// `T_d(x) = cos(d·arccos x)`, with `x` clamped into `[-1, 1]`.
pub fn chebyshev_eval(d: usize, x: f64) -> f64 {
    (d as f64 * x.clamp(-1.0, 1.0).acos()).cos()
}

/// The pair `(U, U')` with matched moments, plus the construction table.
#[derive(Debug, Clone)]
pub struct MomentMatchedPair {
    pub n: usize,
    pub k: usize,
    /// Chebyshev degree `d`.
    pub d: usize,
    /// The scale `Δ = √(kn)/(C·ln²n)`.
    pub scale: f64,
    /// Atoms of `U`, ascending; contains `1/n`.
    pub support_u: Vec<f64>,
    pub prob_u: Vec<f64>,
    /// Atoms of `U'`, ascending; contains `0` and `2/n`.
    pub support_u_prime: Vec<f64>,
    pub prob_u_prime: Vec<f64>,
    // Full root/derivative table backing the moment identity.
    roots: Vec<f64>,
    derivs: Vec<f64>,
}

/// Builds the pair at degree `d = ⌈c·ln n⌉` and scale `Δ = √(kn)/(C·ln²n)`.
///
/// Roots are `0, 1/n, 2/n` and the shifted Chebyshev points
/// `(1 − cos((2m−1)π/(2d)))/Δ`; the defining polynomial's derivative there
/// has closed form, and atoms get probability proportional to `1/|p'(r)|`
/// on the side given by the derivative's sign. Fails when the scale pushes
/// the polynomial's value at `1 − 2Δ/n` under `1/2`, which breaks the
/// intended sign pattern.
pub fn build_moment_matched_pair(
    n: usize,
    k: usize,
    c: f64,
    big_c: f64,
) -> Result<MomentMatchedPair> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::InvalidParameter {
            name: "n,k",
            reason: format!("need 1 <= k < n with n >= 2, got n={}, k={}", n, k),
        });
    }
    if !(c > 0.0) || !(big_c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c,C",
            reason: "degree and scale constants must be positive".into(),
        });
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let d = (c * ln_n).ceil() as usize;
    let scale = (k as f64 * nf).sqrt() / (big_c * ln_n * ln_n);

    let at_1n = 1.0 - scale / nf;
    let at_2n = 1.0 - 2.0 * scale / nf;
    let t_1n = chebyshev_eval(d, at_1n);
    let t_2n = chebyshev_eval(d, at_2n);
    if at_2n < -1.0 || t_1n < 0.5 || t_2n < 0.5 {
        return Err(Error::ScaleInvalid {
            value: t_1n.min(t_2n),
        });
    }

    let mut roots = vec![0.0, 1.0 / nf, 2.0 / nf];
    let mut derivs = vec![
        2.0 / (nf * nf),
        -t_1n / (nf * nf),
        2.0 * t_2n / (nf * nf),
    ];
    for m in 1..=d {
        let theta = (2 * m - 1) as f64 * std::f64::consts::PI / (2 * d) as f64;
        let r = (1.0 - theta.cos()) / scale;
        // T_d'(cos θ) = d·sin(dθ)/sin θ; at these θ, sin(dθ) = ±1.
        let td_prime = d as f64 * (d as f64 * theta).sin() / theta.sin();
        let dp = -scale * r * (r - 1.0 / nf) * (r - 2.0 / nf) * td_prime;
        roots.push(r);
        derivs.push(dp);
    }
    debug_assert!(roots.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(roots.iter().all(|&r| r <= 2.0 / scale));

    let mut support_u = Vec::new();
    let mut weight_u = Vec::new();
    let mut support_u_prime = Vec::new();
    let mut weight_u_prime = Vec::new();
    for (&r, &dp) in roots.iter().zip(&derivs) {
        assert!(dp != 0.0, "derivative vanished at a root");
        if dp < 0.0 {
            support_u.push(r);
            weight_u.push(1.0 / dp.abs());
        } else {
            support_u_prime.push(r);
            weight_u_prime.push(1.0 / dp);
        }
    }
    let norm_u = comp_sum(weight_u.iter().copied());
    let norm_u_prime = comp_sum(weight_u_prime.iter().copied());
    let prob_u: Vec<f64> = weight_u.iter().map(|w| w / norm_u).collect();
    let prob_u_prime: Vec<f64> = weight_u_prime.iter().map(|w| w / norm_u_prime).collect();

    Ok(MomentMatchedPair {
        n,
        k,
        d,
        scale,
        support_u,
        prob_u,
        support_u_prime,
        prob_u_prime,
        roots,
        derivs,
    })
}

impl MomentMatchedPair {
    /// `|Σ_j r_j^t / p'(r_j)|` relative to `Σ_j |r_j^t / p'(r_j)|`; the
    /// sum itself vanishes identically for `0 ≤ t ≤ d+1`.
    pub fn moment_identity_rel(&self, t: usize) -> f64 {
        let mut signed = CompSum::new();
        let mut absolute = CompSum::new();
        for (&r, &dp) in self.roots.iter().zip(&self.derivs) {
            let term = r.powi(t as i32) / dp;
            signed.add(term);
            absolute.add(term.abs());
        }
        signed.value().abs() / absolute.value()
    }

    /// `E[U^t]`.
    pub fn moment_u(&self, t: usize) -> f64 {
        comp_sum(
            self.support_u
                .iter()
                .zip(&self.prob_u)
                .map(|(&r, &p)| p * r.powi(t as i32)),
        )
    }

    /// `E[U'^t]`.
    pub fn moment_u_prime(&self, t: usize) -> f64 {
        comp_sum(
            self.support_u_prime
                .iter()
                .zip(&self.prob_u_prime)
                .map(|(&r, &p)| p * r.powi(t as i32)),
        )
    }

    pub fn max_support(&self) -> f64 {
        2.0 / self.scale
    }

    /// Measured constant in the support bound `max root = c'·ln²n/√(kn)`.
    pub fn support_constant(&self) -> f64 {
        let nf = self.n as f64;
        let top = self.roots.last().copied().unwrap_or(0.0);
        top * (self.k as f64 * nf).sqrt() / (nf.ln() * nf.ln())
    }

    /// Measured constant `A` in `E[U] = (1/n)(1 + A·√(k/n))`.
    pub fn mean_constant(&self) -> f64 {
        let nf = self.n as f64;
        (nf * self.moment_u(1) - 1.0) / (self.k as f64 / nf).sqrt()
    }
}

/// Per-draw bookkeeping of one contaminated ensemble pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HardDiagnostics {
    /// Coordinates of `H` whose contamination drew something other
    /// than `1/n`.
    pub non_uniform_h: usize,
    /// Whether `H`'s value sequence has at most `k` constant pieces.
    pub h_is_k_histogram: bool,
    /// Adjacent coordinate pairs of `H'` drawn as (`0`-atom, `2/n`-atom).
    pub right_border_pairs: usize,
    pub h_norm_slack: f64,
    pub h_prime_norm_slack: f64,
    pub mean_constant: f64,
    pub support_constant: f64,
}

/// One draw of the contaminated ensembles: `H_i = 1/n + ε·U_i` and
/// `H'_i = 1/n + ε·U'_i`, i.i.d. per coordinate. Both are measures with
/// total mass near (not exactly) one.
#[derive(Debug, Clone)]
pub struct HardPair {
    pub h: Measure,
    pub h_prime: Measure,
    pub eps: f64,
    pub pair: MomentMatchedPair,
    pub diagnostics: HardDiagnostics,
}

/// Draws a [`HardPair`] with the default construction constants.
pub fn generate_hard_pair(n: usize, k: usize, eps: f64, rng: &mut RngStream) -> Result<HardPair> {
    generate_hard_pair_with(n, k, eps, DEFAULT_LITTLE_C, DEFAULT_BIG_C, rng)
}

/// Draws a [`HardPair`] with explicit degree/scale constants.
pub fn generate_hard_pair_with(
    n: usize,
    k: usize,
    eps: f64,
    c: f64,
    big_c: f64,
    rng: &mut RngStream,
) -> Result<HardPair> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("contamination weight must lie in (0, 1/10], got {}", eps),
        });
    }
    let pair = build_moment_matched_pair(n, k, c, big_c)?;
    let nf = n as f64;

    let atoms_u = AliasSampler::from_weights(&pair.prob_u)?;
    let atoms_u_prime = AliasSampler::from_weights(&pair.prob_u_prime)?;
    let idx_zero = pair
        .support_u_prime
        .iter()
        .position(|&v| v == 0.0)
        .expect("0 always lands on the U' side");
    let idx_two = pair
        .support_u_prime
        .iter()
        .position(|&v| v == 2.0 / nf)
        .expect("2/n always lands on the U' side");
    let idx_uniform = pair
        .support_u
        .iter()
        .position(|&v| v == 1.0 / nf)
        .expect("1/n always lands on the U side");

    let mut h = Vec::with_capacity(n);
    let mut non_uniform_h = 0;
    for _ in 0..n {
        let a = atoms_u.draw(rng);
        if a != idx_uniform {
            non_uniform_h += 1;
        }
        h.push(1.0 / nf + eps * pair.support_u[a]);
    }
    let mut h_prime = Vec::with_capacity(n);
    let mut draws_u_prime = Vec::with_capacity(n);
    for _ in 0..n {
        let a = atoms_u_prime.draw(rng);
        draws_u_prime.push(a);
        h_prime.push(1.0 / nf + eps * pair.support_u_prime[a]);
    }
    let right_border_pairs = draws_u_prime
        .windows(2)
        .filter(|w| w[0] == idx_zero && w[1] == idx_two)
        .count();

    let h = Measure::new(h)?;
    let h_prime = Measure::new(h_prime)?;
    let diagnostics = HardDiagnostics {
        non_uniform_h,
        h_is_k_histogram: breakpoint_count(h.as_slice()) + 1 <= k,
        right_border_pairs,
        h_norm_slack: (h.total() - 1.0).abs(),
        h_prime_norm_slack: (h_prime.total() - 1.0).abs(),
        mean_constant: pair.mean_constant(),
        support_constant: pair.support_constant(),
    };
    Ok(HardPair {
        h,
        h_prime,
        eps,
        pair,
        diagnostics,
    })
}

/// Independent `Poi(m·P_i)` counts per coordinate.
pub fn poissonized_counts(measure: &Measure, m: f64, rng: &mut RngStream) -> Result<Vec<u64>> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("rate must be finite and non-negative, got {}", m),
        });
    }
    let mut counts = Vec::with_capacity(measure.len());
    for i in 0..measure.len() {
        let rate = m * measure.get(i);
        if rate <= 0.0 {
            counts.push(0);
        } else {
            counts.push(Poisson::new(rate).expect("positive rate").sample(rng) as u64);
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_endpoint_and_defining_identities() {
        for d in 0..=30 {
            assert_eq!(chebyshev_eval(d, 1.0), 1.0);
        }
        assert!((chebyshev_eval(2, 0.0) + 1.0).abs() < 1e-12);
        let x = (std::f64::consts::PI / 7.0).cos();
        let want = (5.0 * std::f64::consts::PI / 7.0).cos();
        assert!((chebyshev_eval(5, x) - want).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_matches_three_term_recurrence() {
        for d in 0..=30usize {
            let mut x = -1.0;
            while x <= 1.0 {
                let (mut a, mut b) = (1.0, x);
                let direct = match d {
                    0 => 1.0,
                    1 => x,
                    _ => {
                        for _ in 2..=d {
                            let c = 2.0 * x * b - a;
                            a = b;
                            b = c;
                        }
                        b
                    }
                };
                assert!(
                    (chebyshev_eval(d, x) - direct).abs() < 1e-9,
                    "d={}, x={}",
                    d,
                    x
                );
                x += 0.125;
            }
        }
    }

    #[test]
    fn pair_construction_table_shape() {
        let pair = build_moment_matched_pair(1024, 4, 2.0, 40.0).unwrap();
        let nf = 1024.0f64;
        // Derivative at the root 0 is exactly 2/n².
        assert_eq!(pair.derivs[0], 2.0 / (nf * nf));
        assert_eq!(pair.roots.len(), pair.d + 3);
        assert!(pair.roots.windows(2).all(|w| w[1] > w[0]));
        assert!(pair.roots.iter().all(|&r| r <= pair.max_support()));
        // Side membership: 0 and 2/n with U', 1/n with U.
        assert_eq!(pair.support_u_prime[0], 0.0);
        assert!(pair.support_u_prime.contains(&(2.0 / nf)));
        assert!(pair.support_u.contains(&(1.0 / nf)));
        assert!(!pair.support_u.iter().any(|v| pair.support_u_prime.contains(v)));
        // Probabilities positive, each side summing to one.
        assert!(pair.prob_u.iter().all(|&p| p > 0.0));
        assert!(pair.prob_u_prime.iter().all(|&p| p > 0.0));
        assert!((comp_sum(pair.prob_u.iter().copied()) - 1.0).abs() < 1e-12);
        assert!((comp_sum(pair.prob_u_prime.iter().copied()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_identity_and_matched_moments() {
        let pair = build_moment_matched_pair(1024, 4, 2.0, 40.0).unwrap();
        for t in 0..=pair.d + 1 {
            let rel = pair.moment_identity_rel(t);
            assert!(rel < 1e-6, "t={}: relative residual {}", t, rel);
        }
        for t in 1..=pair.d {
            let a = pair.moment_u(t);
            let b = pair.moment_u_prime(t);
            assert!(
                (a - b).abs() <= 1e-6 * a.abs().max(b.abs()),
                "t={}: {} vs {}",
                t,
                a,
                b
            );
        }
    }

    #[test]
    fn atom_probabilities_meet_operational_bounds() {
        let pair = build_moment_matched_pair(1024, 4, 2.0, 40.0).unwrap();
        let nf = 1024.0f64;
        let pr_zero = pair.prob_u_prime[0];
        let idx_two = pair
            .support_u_prime
            .iter()
            .position(|&v| v == 2.0 / nf)
            .unwrap();
        assert!(pr_zero > 1.0 / 3.0, "Pr[U'=0] = {}", pr_zero);
        assert!(
            pair.prob_u_prime[idx_two] > 1.0 / 3.0,
            "Pr[U'=2/n] = {}",
            pair.prob_u_prime[idx_two]
        );
        let idx_unif = pair.support_u.iter().position(|&v| v == 1.0 / nf).unwrap();
        let pr_other = 1.0 - pair.prob_u[idx_unif];
        assert!(
            pr_other <= 4.0 / (10.0 * nf),
            "Pr[U != 1/n] = {}",
            pr_other
        );
        // Means sit just above 1/n.
        assert!(pair.moment_u(1) >= 1.0 / nf);
        assert!(pair.moment_u_prime(1) >= 1.0 / nf);
        assert!(pair.mean_constant().is_finite());
    }

    #[test]
    fn out_of_range_scale_is_rejected() {
        // Scale tuned so d·arccos(1 − Δ/n) lands near π: the polynomial
        // dips to −1 at the probe point.
        let err = build_moment_matched_pair(256, 4, 2.0, 0.12).unwrap_err();
        assert!(matches!(err, Error::ScaleInvalid { .. }));
        assert!(build_moment_matched_pair(256, 300, 2.0, 40.0).is_err());
    }

    #[test]
    fn hard_pair_draws_and_diagnostics() {
        let n = 512;
        let mut rng = RngStream::new(60);
        assert!(generate_hard_pair(n, 8, 0.2, &mut rng).is_err());
        let mut khist = 0;
        let mut rich_pairs = 0;
        for _ in 0..20 {
            let hp = generate_hard_pair(n, 8, 0.1, &mut rng).unwrap();
            assert_eq!(hp.h.len(), n);
            assert_eq!(hp.h_prime.len(), n);
            // Contaminations keep every coordinate at or above 1/n.
            let floor = 1.0 / n as f64 - 1e-15;
            assert!(hp.h.as_slice().iter().all(|&v| v >= floor));
            assert!(hp.h_prime.as_slice().iter().all(|&v| v >= floor));
            assert!(hp.diagnostics.h_norm_slack < 1.0);
            if hp.diagnostics.h_is_k_histogram {
                khist += 1;
            }
            if hp.diagnostics.right_border_pairs >= n / 10 {
                rich_pairs += 1;
            }
        }
        assert!(khist >= 15, "k-histogram draws: {}/20", khist);
        assert!(rich_pairs >= 15, "right-border-rich draws: {}/20", rich_pairs);
    }

    #[test]
    fn hard_pair_is_reproducible() {
        let a = generate_hard_pair(256, 4, 0.05, &mut RngStream::new(3)).unwrap();
        let b = generate_hard_pair(256, 4, 0.05, &mut RngStream::new(3)).unwrap();
        assert_eq!(a.h.as_slice(), b.h.as_slice());
        assert_eq!(a.h_prime.as_slice(), b.h_prime.as_slice());
    }

    #[test]
    fn poissonized_counts_zero_rate() {
        let m = Measure::new(vec![0.25; 4]).unwrap();
        let counts = poissonized_counts(&m, 0.0, &mut RngStream::new(0)).unwrap();
        assert_eq!(counts, vec![0, 0, 0, 0]);
        assert!(poissonized_counts(&m, -1.0, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn poissonized_counts_moments() {
        let n = 16;
        let m = Measure::new(vec![1.0 / n as f64; n]).unwrap();
        let rate = 500.0;
        let reruns = 2000;
        let mut rng = RngStream::new(9);
        let mut per_coord_sum = vec![0u64; n];
        let mut totals = Vec::with_capacity(reruns);
        for _ in 0..reruns {
            let counts = poissonized_counts(&m, rate, &mut rng).unwrap();
            for (s, &c) in per_coord_sum.iter_mut().zip(&counts) {
                *s += c;
            }
            totals.push(counts.iter().sum::<u64>() as f64);
        }
        let want = rate / n as f64;
        let sigma = (want / reruns as f64).sqrt();
        for &s in &per_coord_sum {
            let mean = s as f64 / reruns as f64;
            assert!(
                (mean - want).abs() < 3.0 * sigma + 0.05,
                "coordinate mean {} vs {}",
                mean,
                want
            );
        }
        // Total is Poisson(rate): index of dispersion near 1.
        let mean = totals.iter().sum::<f64>() / reruns as f64;
        let var = totals.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / reruns as f64;
        let ratio = var / mean;
        assert!((0.9..1.1).contains(&ratio), "dispersion ratio {}", ratio);
    }
}
