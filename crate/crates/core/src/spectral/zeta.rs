//! Hurwitz zeta values `ζ(s, q) = Σ_{k>=0} (q + k)^{−s}` for real `s > 1`.

/// `B_{2k}/(2k)!` for `k = 1..=8`.
const BERNOULLI_OVER_FACT: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
];

pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    hurwitz_family(s, q, 0)[0]
}

/// `ζ(s + p, q)` for `p = 0..=p_max`, sharing the direct-summation shift.
pub fn hurwitz_family(s: f64, q: f64, p_max: usize) -> Vec<f64> {
    assert!(s > 1.0 && q > 0.0, "hurwitz_zeta needs s > 1, q > 0");
    let s_max = s + p_max as f64;
    let target = q.max(2.0 * s_max + 20.0);
    let mut out = vec![0.0; p_max + 1];
    let mut a = q;
    while a < target {
        let inv = 1.0 / a;
        let mut term = a.powf(-s);
        for o in out.iter_mut() {
            *o += term;
            term *= inv;
        }
        a += 1.0;
    }
    let inv = 1.0 / a;
    let mut a_s = a.powf(-s);
    for (p, o) in out.iter_mut().enumerate() {
        let t = s + p as f64;
        let mut acc = a * a_s / (t - 1.0) + 0.5 * a_s;
        let mut term = t * a_s * inv;
        for (k, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
            acc += c * term;
            let kk = (k + 1) as f64;
            term *= (t + 2.0 * kk - 1.0) * (t + 2.0 * kk) * inv * inv;
        }
        *o += acc;
        a_s *= inv;
    }
    out
}
