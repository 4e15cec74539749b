//! Exhaustive checks of the exact identities on all small inputs.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::algorithm::{decompose_u64, divide_u64, reconstruct, Algorithm, Sign};
use crate::cost::DigitCost;
use crate::ensemble::{psi_poly, psi_poly_from_phi, smoothed, trans1_holds, CostProfile, InputSet};
use crate::error::Result;
use crate::lft::compose_digits;
use crate::stats::Check;

/// Number of failures of each identity over every input with `v <= v_max`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdentityFailures {
    pub round_trip: u64,
    pub remainder_range: u64,
    pub determinant: u64,
    pub denominator_law: u64,
    pub phi_count: u64,
    pub psi_sum: u64,
    pub trans1: u64,
    pub inputs: u64,
}

fn remainder_ok(algo: Algorithm, u: u64, v: u64) -> bool {
    let Ok((m, eps, r)) = divide_u64(algo, u, v) else {
        return false;
    };
    let back = match eps {
        Sign::Plus => m * u + r,
        Sign::Minus => m * u - r,
    };
    let range = match algo {
        Algorithm::Standard => r < u,
        Algorithm::Centered => 2 * r <= u,
        Algorithm::Odd => r <= u,
    };
    back == v && range && algo.admits(m, eps) && (r == 0 || algo.accepts(&r, &u))
}

/// Runs every identity for one algorithm.
pub fn identity_failures(algo: Algorithm, v_max: u64) -> Result<IdentityFailures> {
    let mut f = IdentityFailures::default();
    for v in 1..=v_max {
        for u in 1..=v {
            if !algo.accepts(&u, &v) {
                continue;
            }
            f.remainder_range += u64::from(!remainder_ok(algo, u, v));
            if u.gcd(&v) != 1 {
                continue;
            }
            f.inputs += 1;
            let t = decompose_u64(algo, u, v)?;
            let (ru, rv) = reconstruct(&t);
            if t.validate().is_err() || ru != BigUint::from(u) || rv != BigUint::from(v) {
                f.round_trip += 1;
            }
            let h = compose_digits(t.digits.iter());
            f.determinant += u64::from(!h.det().abs().is_one());
            let d = h.denom(&BigRational::from_integer(0.into()))?;
            f.denominator_law += u64::from(d != BigRational::from_integer(v.into()));
        }
    }

    for cost in [DigitCost::unit(), DigitCost::binary_length()] {
        let profile = CostProfile::build(algo, &cost, v_max)?;
        for reduced in [true, false] {
            let set = InputSet::new(algo, v_max, reduced);
            for n in 1..=v_max {
                let s = set.with_n(n);
                let phi0: u64 = profile.histogram(&s)?.iter().sum();
                f.phi_count += u64::from(phi0 != s.iter().count() as u64);
                f.psi_sum += u64::from(psi_poly(&profile, &s, n)? != psi_poly_from_phi(&profile, &s, n)?);
                if n >= 4 {
                    let sm = smoothed(&profile, &s, 0.5)?;
                    f.trans1 += u64::from(!trans1_holds(&profile, &sm)?);
                }
            }
        }
    }
    Ok(f)
}

/// One check per identity, aggregated over the three algorithms.
pub fn identity_checks(v_max: u64) -> Result<Vec<Check>> {
    let mut total = IdentityFailures::default();
    for algo in Algorithm::ALL {
        let f = identity_failures(algo, v_max)?;
        total.round_trip += f.round_trip;
        total.remainder_range += f.remainder_range;
        total.determinant += f.determinant;
        total.denominator_law += f.denominator_law;
        total.phi_count += f.phi_count;
        total.psi_sum += f.psi_sum;
        total.trans1 += f.trans1;
        total.inputs += f.inputs;
    }
    let row = |name: &str, fails: u64| Check::absolute(&format!("{name} failures (v <= {v_max})"), fails as f64, 0.0, 0.0);
    Ok(vec![
        row("decompose/reconstruct round trip", total.round_trip),
        row("remainder ranges", total.remainder_range),
        row("determinant +-1", total.determinant),
        row("denominator law", total.denominator_law),
        row("Phi_0 = |Omega_N|", total.phi_count),
        row("Psi_w = sum Phi_w", total.psi_sum),
        row("smoothing identity", total.trans1),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_range_is_clean() {
        for algo in Algorithm::ALL {
            let f = identity_failures(algo, 40).unwrap();
            assert!(f.inputs > 100);
            assert_eq!(IdentityFailures { inputs: f.inputs, ..Default::default() }, f);
        }
    }
}
