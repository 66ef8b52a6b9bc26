//! Cross-module flows: generators into samplers into learners and the
//! tester, plus the sample-profile indistinguishability smoke check.

use histotest_core::dist::{mix_with_uniform, random_khistogram, tv_distance, Measure};
use histotest_core::estimator::empirical_learning;
use histotest_core::hard::{generate_hard_pair, poissonized_counts};
use histotest_core::partition::approx_divide;
use histotest_core::rng::RngStream;
use histotest_core::sampler::{AliasSampler, Sampler};
use histotest_core::tester::{dp_distance_to_khistogram, test_histogram, TesterConfig, Verdict};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

/// Multiplicity profile of a count vector: how many coordinates were
/// seen exactly j times, for j >= 1.
fn fingerprint(counts: &[u64]) -> BTreeMap<u64, u64> {
    let mut f = BTreeMap::new();
    for &c in counts {
        if c > 0 {
            *f.entry(c).or_insert(0u64) += 1;
        }
    }
    f
}

/// Two-sample chi-square homogeneity p-value over pooled multiplicity
/// bins; bins are merged upward until each holds at least 5 combined.
fn fingerprint_p_value(a: &BTreeMap<u64, u64>, b: &BTreeMap<u64, u64>) -> f64 {
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let keys: std::collections::BTreeSet<u64> =
        a.keys().chain(b.keys()).copied().collect();
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    for k in keys {
        acc_a += *a.get(&k).unwrap_or(&0) as f64;
        acc_b += *b.get(&k).unwrap_or(&0) as f64;
        if acc_a + acc_b >= 5.0 {
            bins.push((acc_a, acc_b));
            acc_a = 0.0;
            acc_b = 0.0;
        }
    }
    if acc_a + acc_b > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += acc_a;
            last.1 += acc_b;
        } else {
            bins.push((acc_a, acc_b));
        }
    }
    let na: f64 = bins.iter().map(|x| x.0).sum();
    let nb: f64 = bins.iter().map(|x| x.1).sum();
    if bins.len() < 2 || na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let mut stat = 0.0;
    for &(ca, cb) in &bins {
        let tot = ca + cb;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        stat += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
    }
    let df = (bins.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

#[test]
fn fingerprints_of_hard_pair_are_indistinguishable_below_threshold() {
    let (n, k, eps) = (2048usize, 8usize, 0.1);
    let m = (k as f64 * n as f64).sqrt() / (10.0 * eps * (n as f64).ln());
    let mut rng = RngStream::new(1234);
    let mut p_values = Vec::with_capacity(50);
    for _ in 0..50 {
        let hp = generate_hard_pair(n, k, eps, &mut rng).unwrap();
        let ca = poissonized_counts(&hp.h, m, &mut rng).unwrap();
        let cb = poissonized_counts(&hp.h_prime, m, &mut rng).unwrap();
        p_values.push(fingerprint_p_value(&fingerprint(&ca), &fingerprint(&cb)));
    }
    p_values.sort_by(f64::total_cmp);
    let median = p_values[p_values.len() / 2];
    assert!(
        median > 0.01,
        "profiles separated early: median p-value {}",
        median
    );
}

#[test]
fn divide_then_learn_recovers_the_source() {
    let n = 256;
    let mut rng = RngStream::new(21);
    let p = mix_with_uniform(&random_khistogram(n, 4, &mut rng).unwrap());
    let s = AliasSampler::from_pmf(&p);

    let divide_draws = s.sample(60_000, &mut rng);
    let out = approx_divide(&divide_draws, n, 128).unwrap();
    let learn_draws = s.sample(60_000, &mut rng);
    let learned = empirical_learning(&learn_draws, &out.partition, 0.05).unwrap();

    let dist = tv_distance(&learned.to_measure(), &Measure::from(&p)).unwrap();
    assert!(dist < 0.1, "learned distribution off by {}", dist);
}

#[test]
fn hard_yes_draws_agree_between_flag_and_dp() {
    let mut rng = RngStream::new(8);
    for _ in 0..10 {
        let hp = generate_hard_pair(512, 8, 0.1, &mut rng).unwrap();
        let dp = dp_distance_to_khistogram(&hp.h, 8).unwrap();
        if hp.diagnostics.h_is_k_histogram {
            assert!(dp <= 1e-12, "flagged k-histogram has dp distance {}", dp);
        } else {
            assert!(dp > 1e-12, "non-k-histogram draw scored zero distance");
        }
    }
}

#[test]
fn tester_accepts_structured_hard_yes_draws() {
    let (n, k) = (256usize, 4usize);
    let cfg = TesterConfig::default();
    let mut rng = RngStream::new(31);
    let mut accepts = 0;
    for _ in 0..10 {
        let hp = generate_hard_pair(n, k, 0.1, &mut rng).unwrap();
        if !hp.diagnostics.h_is_k_histogram {
            continue;
        }
        let s = AliasSampler::from_weights(hp.h.as_slice()).unwrap();
        let report = test_histogram(&s, k, 0.25, &cfg, &mut rng).unwrap();
        if report.verdict == Verdict::Accept {
            accepts += 1;
        }
    }
    assert!(accepts >= 7, "accepted {}/~10 structured draws", accepts);
}
