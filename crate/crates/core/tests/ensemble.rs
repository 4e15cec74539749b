use euclid_dyn::algorithm::decompose_u64;
use euclid_dyn::ensemble::{
    growth_regression, phi, psi, psi_poly, psi_poly_from_phi, smoothed, smoothed_measure, summarize,
    summarize_profile, total_variation, trans1_holds, uni_check, uniform_measure, CostProfile, InputSet,
    SummaryCache, SCHEMA_VERSION,
};
use euclid_dyn::{total_cost, Algorithm, DigitCost, Error};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn costs() -> Vec<DigitCost> {
    vec![DigitCost::unit(), DigitCost::binary_length(), DigitCost::indicator(1)]
}

#[test]
fn psi_identities_to_200() {
    for algo in Algorithm::ALL {
        for cost in costs() {
            let profile = CostProfile::build(algo, &cost, 200).unwrap();
            for reduced in [true, false] {
                let set = InputSet::new(algo, 200, reduced);
                let mut prev = psi_poly(&profile, &set, 1).unwrap();
                assert!(prev.is_empty());
                for t in 2..=200 {
                    let cur = psi_poly(&profile, &set, t).unwrap();
                    assert_eq!(cur, psi_poly_from_phi(&profile, &set, t).unwrap(), "{algo} T={t}");
                    // Ψ(T) − Ψ(T−1) = Φ(T−1)
                    let step = profile.histogram(&set.with_n(t - 1)).unwrap();
                    let len = cur.len().max(step.len());
                    for j in 0..len {
                        let d = cur.get(j).copied().unwrap_or(0) - prev.get(j).copied().unwrap_or(0);
                        assert_eq!(d, step.get(j).copied().unwrap_or(0) as u128, "{algo} T={t} j={j}");
                    }
                    prev = cur;
                }
            }
        }
    }
}

#[test]
fn phi_at_zero_counts_inputs() {
    for algo in Algorithm::ALL {
        let profile = CostProfile::build(algo, &DigitCost::unit(), 150).unwrap();
        for n in [1u64, 2, 17, 150] {
            let set = InputSet::reduced(algo, n);
            let count = set.iter().count() as f64;
            assert_eq!(phi(&profile, &set, Complex64::new(0.0, 0.0)).unwrap().re, count);
        }
    }
}

#[test]
fn smoothing_identity_at_complex_w() {
    let ws = [Complex64::new(0.1, 0.3), Complex64::new(-0.2, 1.0), Complex64::new(0.05, -2.5)];
    for algo in Algorithm::ALL {
        for cost in costs() {
            let profile = CostProfile::build(algo, &cost, 400).unwrap();
            for n in [16u64, 100, 399] {
                let set = InputSet::reduced(algo, n);
                let s = smoothed(&profile, &set, 0.5).unwrap();
                assert!(trans1_holds(&profile, &s).unwrap());
                for &w in &ws {
                    let lhs = s.barphi(w) * s.window as f64;
                    let rhs = psi(&profile, &set, n + 1, w).unwrap() - psi(&profile, &set, n - s.window, w).unwrap();
                    assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm(), "{algo} N={n} w={w}: {lhs} vs {rhs}");
                }
            }
        }
    }
}

#[test]
fn profile_matches_direct_enumeration() {
    for algo in Algorithm::ALL {
        for cost in costs() {
            let profile = CostProfile::build(algo, &cost, 120).unwrap();
            for reduced in [true, false] {
                let set = InputSet::new(algo, 120, reduced);
                let s = summarize_profile(&profile, &set, 3).unwrap();
                s.check_invariants().unwrap();
                assert_eq!(s, summarize(&set, &cost, 3).unwrap());

                let mut count = 0u64;
                let mut sum = BigRational::zero();
                let mut sum2 = BigRational::zero();
                for v in 1..=120u64 {
                    for u in 1..=v {
                        if !algo.accepts(&u, &v) || (reduced && u.gcd(&v) != 1) {
                            continue;
                        }
                        let c = total_cost(&cost, &decompose_u64(algo, u, v).unwrap()).unwrap();
                        count += 1;
                        sum2 += &c * &c;
                        sum += c;
                    }
                }
                let n = BigRational::from_integer(count.into());
                assert_eq!(s.count, count, "{algo} {cost:?}");
                assert_eq!(s.moments[0], &sum / &n);
                assert_eq!(s.moments[1], &sum2 / &n);
            }
        }
    }
}

#[test]
fn growth_regression_recovers_synthetic_slope() {
    let pts: Vec<(u64, f64)> = (6..=16).map(|k| 1u64 << k).map(|n| (n, 0.75 * (n as f64).ln() - 1.5)).collect();
    let fit = growth_regression(&pts).unwrap();
    assert!((fit.slope - 0.75).abs() < 1e-12);
    assert!((fit.intercept + 1.5).abs() < 1e-10);
    assert!(growth_regression(&pts[..1]).is_err());
}

#[test]
fn summary_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SummaryCache::new(dir.path()).unwrap();
    let set = InputSet::new(Algorithm::Odd, 80, false);
    let s = summarize(&set, &DigitCost::unit(), 4).unwrap();
    assert_eq!(cache.load(&set, &s.cost, 4).unwrap(), None);
    let path = cache.store(&s).unwrap();
    assert_eq!(cache.load(&set, &s.cost, 4).unwrap(), Some(s.clone()));

    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(cache.load(&set, &s.cost, 4), Err(Error::Cache(_))));

    let stale = text.replacen(
        &format!("\"schema_version\": {SCHEMA_VERSION}"),
        &format!("\"schema_version\": {}", SCHEMA_VERSION + 7),
        1,
    );
    assert_ne!(stale, text);
    std::fs::write(&path, stale).unwrap();
    assert_eq!(cache.load(&set, &s.cost, 4).unwrap(), None);
    assert_eq!(cache.get_or_insert_with(&set, &s.cost, 4, || Ok(s.clone())).unwrap(), s);
    assert_eq!(cache.load(&set, &s.cost, 4).unwrap(), Some(s));
}

#[test]
fn uni_ratio_is_finite_at_depth_one() {
    for algo in Algorithm::ALL {
        let r = uni_check(algo, 1, 0.5, 30).unwrap();
        assert!(r.worst_ratio.is_finite() && r.worst_ratio > 0.0, "{algo}: {r:?}");
        assert!(r.branches > 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn total_variation_lies_in_unit_interval(n in 4u64..600, gamma in 0.1f64..0.9, reduced in any::<bool>(), k in 0usize..3) {
        let algo = Algorithm::ALL[k];
        let profile = CostProfile::build(algo, &DigitCost::unit(), n).unwrap();
        let set = InputSet::new(algo, n, reduced);
        let u = uniform_measure(&profile, &set).unwrap();
        let s = smoothed_measure(&profile, &set, gamma).unwrap();
        prop_assert!((u.total() - 1.0).abs() < 1e-9);
        prop_assert!((s.total() - 1.0).abs() < 1e-9);
        let tv = total_variation(&u, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&tv), "tv = {}", tv);
    }
}
