use euclid_dyn::algorithm::decompose_u64;
use euclid_dyn::realdyn::{birkhoff_sum, mu_hat_closed_form, real_clt_check};
use euclid_dyn::{total_cost, Algorithm, DigitCost};
use num_integer::Integer;
use num_rational::BigRational;

#[test]
fn birkhoff_sums_agree_with_total_cost() {
    let costs = [DigitCost::unit(), DigitCost::binary_length(), DigitCost::indicator(2)];
    for algo in Algorithm::ALL {
        for v in 1..=300u64 {
            for u in 1..=v {
                if !algo.accepts(&u, &v) || u.gcd(&v) != 1 {
                    continue;
                }
                let t = decompose_u64(algo, u, v).unwrap();
                let x = BigRational::new(u.into(), v.into());
                for cost in &costs {
                    let (sum, steps) = birkhoff_sum(algo, cost, &x, t.depth() + 5).unwrap();
                    assert_eq!(steps, t.depth(), "{algo} {u}/{v}");
                    assert_eq!(sum, total_cost(cost, &t).unwrap(), "{algo} {u}/{v}");
                }
            }
        }
    }
}

#[test]
fn ergodic_averages_match_closed_forms() {
    let cfg_cap = 64;
    for algo in Algorithm::ALL {
        let mut costs = vec![DigitCost::binary_length()];
        costs.extend((1..=3).map(DigitCost::indicator));
        for cost in costs {
            let target = mu_hat_closed_form(algo, &cost, cfg_cap).unwrap();
            if target.value == 0.0 {
                continue;
            }
            let r = real_clt_check(algo, &cost, 200, 10_000, 7).unwrap();
            let z = (r.mean_rate - target.value) / r.mean_rate_se;
            assert!(z.abs() <= 3.0, "{algo} {}: {} vs {} (z = {z:.2})", r.cost, r.mean_rate, target.value);
        }
    }
}

#[test]
fn unit_cost_rate_is_one() {
    for algo in Algorithm::ALL {
        let r = real_clt_check(algo, &DigitCost::unit(), 100, 1_000, 3).unwrap();
        assert!((r.mean_rate - 1.0).abs() <= 0.02);
        assert!(r.ks.is_none());
    }
}

#[test]
fn binary_length_is_gaussian() {
    let r = real_clt_check(Algorithm::Standard, &DigitCost::binary_length(), 200, 10_000, 11).unwrap();
    let ks = r.ks.unwrap();
    assert!(ks <= 0.03, "ks = {ks}");
}
