use euclid_dyn::spectral::{constants, lambda_fn, pressure_derivatives, solve_sigma, FdSteps, OperatorConfig};
use euclid_dyn::{Algorithm, DigitCost, Error};

fn cfg() -> OperatorConfig {
    OperatorConfig::default()
}

#[test]
fn standard_unit_cost_constants() {
    let k = constants(Algorithm::Standard, &DigitCost::unit(), &cfg()).unwrap();
    let ln2 = std::f64::consts::LN_2;
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((k.mu - 12.0 * ln2 / pi2).abs() < 1e-9, "mu = {}", k.mu);
    // the unit cost is a constant: its weight derivative is the identity on pressure
    assert!((k.mu_c - k.mu).abs() < 1e-8);
    assert!((k.mu_hat - 1.0).abs() < 1e-12);
    assert!(k.delta_hat2.abs() < 1e-6, "delta_hat2 = {}", k.delta_hat2);
    assert!(k.chi_c.abs() < 1e-5, "chi = {}", k.chi_c);
    assert!((k.delta2_c - k.delta2).abs() / k.delta2 < 1e-5);
    assert!((k.delta2 - 0.5160624).abs() < 1e-6, "delta2 = {}", k.delta2);
    assert!(k.all_pass(), "{:#?}", k.checks);
}

#[test]
fn bundles_pass_their_own_checks() {
    for algo in Algorithm::ALL {
        for cost in [DigitCost::unit(), DigitCost::binary_length(), DigitCost::indicator(3)] {
            let k = constants(algo, &cost, &cfg()).unwrap();
            assert!(k.derivatives.d_s < 0.0 && k.derivatives.d_ss > 0.0, "{algo} {}", k.cost);
            assert!(k.mu > 0.0 && k.delta2 > 0.0 && k.delta2_c > 0.0 && k.mu_c > 0.0);
            assert!(k.derivatives.residual <= 1e-10);
            assert!(k.all_pass(), "{algo} {}: {:#?}", k.cost, k.checks);
        }
    }
}

#[test]
fn constants_are_stable_under_refinement() {
    let coarse = cfg();
    let fine = OperatorConfig { degree: 56, m_cap: 128, ..cfg() };
    for algo in Algorithm::ALL {
        let cost = DigitCost::binary_length();
        let a = pressure_derivatives(algo, &cost, &coarse, FdSteps::default()).unwrap();
        let b = pressure_derivatives(algo, &cost, &fine, FdSteps::default()).unwrap();
        for (x, y, name) in [
            (a.d_s, b.d_s, "d_s"),
            (a.d_w, b.d_w, "d_w"),
            (a.d_ss, b.d_ss, "d_ss"),
            (a.d_ww, b.d_ww, "d_ww"),
            (a.d_sw, b.d_sw, "d_sw"),
        ] {
            assert!((x - y).abs() <= 1e-8, "{algo} {name}: {x} vs {y}");
        }
    }
}

#[test]
fn sigma_slope_at_zero_is_half_the_mean_rate() {
    for algo in Algorithm::ALL {
        let cost = DigitCost::binary_length();
        let k = constants(algo, &cost, &cfg()).unwrap();
        let h = 1e-3;
        let up = solve_sigma(algo, &cost, h, &cfg()).unwrap();
        let down = solve_sigma(algo, &cost, -h, &cfg()).unwrap();
        let slope = (up - down) / (2.0 * h);
        assert!((slope - k.mu_c / 2.0).abs() <= 1e-5, "{algo}: {slope} vs {}", k.mu_c / 2.0);
    }
}

#[test]
fn lambda_decreases_in_sigma() {
    for algo in Algorithm::ALL {
        let vals: Vec<f64> = (0..=8)
            .map(|k| lambda_fn(algo, &DigitCost::unit(), 0.8 + 0.05 * k as f64, 0.0, &cfg()).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{algo}: {vals:?}");
        assert!(vals[0] > 1.0 && vals[8] < 1.0);
    }
}

#[test]
fn degenerate_inputs_are_rejected() {
    assert!(matches!(
        constants(Algorithm::Centered, &DigitCost::indicator(1), &cfg()),
        Err(Error::DegenerateVariance)
    ));
    let tiny = OperatorConfig { degree: 4, ..cfg() };
    assert!(lambda_fn(Algorithm::Standard, &DigitCost::unit(), 1.0, 0.0, &tiny).is_err());
}
