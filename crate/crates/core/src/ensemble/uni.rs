//! Empirical check of the UNI condition on truncated depth-`n` branch sets.

use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, Sign};
use crate::error::{Error, Result};
use crate::lft::{lft_delta, Lft};

const MAX_BRANCHES: usize = 20_000_000;
const MAX_GENERIC_BRANCHES: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniReport {
    pub algo: Algorithm,
    pub depth: u32,
    pub a: f64,
    pub m_cap: u64,
    /// `ρ^{an}`.
    pub eta: f64,
    /// `max_h |J(h, η)| / η`, including the bound for omitted branches.
    pub worst_ratio: f64,
    /// Digits `(m, ±1)` of a maximizing branch.
    pub worst_branch: Vec<(u64, i8)>,
    /// Omitted-branch bound added for the maximizing branch.
    pub worst_tail: f64,
    /// `|I| − Σ |k(I)|` over the truncated set.
    pub truncated_mass: f64,
    pub branches: usize,
}

#[derive(Clone, Copy)]
struct Small {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl Small {
    fn then(self, m: u64, eps: Sign) -> Small {
        let (e, m) = (eps.to_i8() as i64, m as i64);
        Small { a: self.b * e, b: self.a + self.b * m, c: self.d * e, d: self.c + self.d * m }
    }

    fn eval(self, x: f64) -> f64 {
        (self.a as f64 * x + self.b as f64) / (self.c as f64 * x + self.d as f64)
    }

    fn image_len(self, end: f64) -> f64 {
        (self.eval(end) - self.eval(0.0)).abs()
    }
}

fn branches(algo: Algorithm, n: u32, m_cap: u64) -> Result<Vec<(Vec<(u64, Sign)>, Small)>> {
    let digits = algo.digits_up_to(m_cap);
    let total = (digits.len() as f64).powi(n as i32);
    if total > MAX_BRANCHES as f64 {
        return Err(Error::Config(format!("{total} branches exceed the desk-scale limit")));
    }
    let mut out = vec![(Vec::new(), Small { a: 1, b: 0, c: 0, d: 1 })];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * digits.len());
        for (word, h) in &out {
            for &(m, eps) in &digits {
                let mut w = word.clone();
                w.push((m, eps));
                next.push((w, h.then(m, eps)));
            }
        }
        out = next;
    }
    Ok(out)
}

/// Families of omitted standard branches: `(t_lo, t_hi, measure bound)`.
///
/// A family fixes the last digits `m_{i+1}..m_n <= m_cap`, has `m_i > m_cap` and
/// leaves earlier digits free. On it `t = c/(c+d) = 1/(1 + [m_n; …, m_{i+1}, z])`
/// with `z >= m_cap + 1`, and its total length is at most twice the length of
/// the corresponding shifted cylinder (Gauss-measure comparison).
fn standard_tail_families(n: u32, m_cap: u64) -> Vec<(f64, f64, f64)> {
    let mut fams = Vec::new();
    for i in 1..=n {
        let free = (n - i) as usize;
        let mut w = vec![1u64; free];
        loop {
            // y(z) = [w_last; …, w_first, z] with w = (m_{i+1}, …, m_n)
            let y = |z: f64| w.iter().fold(z, |val, &m| m as f64 + 1.0 / val);
            let y_cut = y((m_cap + 1) as f64);
            let y_inf = if free == 0 { f64::INFINITY } else { y(f64::INFINITY) };
            let t = |y: f64| 1.0 / (1.0 + y);
            let (t_lo, t_hi) = if t(y_cut) <= t(y_inf) { (t(y_cut), t(y_inf)) } else { (t(y_inf), t(y_cut)) };

            // cylinder of w (forward digits) and the mass of m_1 > m_cap in front of it
            let g = w.iter().fold(Small { a: 1, b: 0, c: 0, d: 1 }, |h, &m| h.then(m, Sign::Plus));
            let (alpha, beta) = {
                let (p, q) = (g.eval(0.0), g.eval(1.0));
                (p.min(q), p.max(q))
            };
            let upper = m_cap + 64;
            let mut mass: f64 = (m_cap + 1..=upper)
                .map(|m| 1.0 / (m as f64 + alpha) - 1.0 / (m as f64 + beta))
                .sum();
            mass += ((upper as f64 + beta) / (upper as f64 + alpha)).ln();
            let factor = if i == 1 { 1.0 } else { 2.0 };
            fams.push((t_lo, t_hi, factor * mass));

            // next word
            let mut k = 0;
            while k < free {
                w[k] += 1;
                if w[k] <= m_cap {
                    break;
                }
                w[k] = 1;
                k += 1;
            }
            if k == free {
                break;
            }
        }
    }
    fams
}

fn prefix(v: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(v.len() + 1);
    p.push(0.0);
    for x in v {
        p.push(p.last().unwrap() + x);
    }
    p
}

/// Worst ratio `|J(h, ρ^{an})| / ρ^{an}` over the truncated depth-`n` branches.
pub fn uni_check(algo: Algorithm, n: u32, a: f64, m_cap: u64) -> Result<UniReport> {
    if n == 0 || !(a > 0.0 && a < 1.0) || m_cap < 2 {
        return Err(Error::Config("uni_check needs n >= 1, 0 < a < 1, m_cap >= 2".into()));
    }
    let eta = algo.contraction_ratio().powf(a * n as f64);
    let end = algo.interval_end();
    let hs = branches(algo, n, m_cap)?;
    let lens: Vec<f64> = hs.iter().map(|(_, h)| h.image_len(end)).collect();
    let truncated_mass = (end - lens.iter().sum::<f64>()).max(0.0);

    let (best, worst_tail) = if algo == Algorithm::Standard {
        // Δ(h, k) = |t_h − t_k| with t = c/(c+d) on [0, 1]
        let t: Vec<f64> = hs.iter().map(|(_, h)| h.c as f64 / (h.c + h.d) as f64).collect();
        let mut order: Vec<usize> = (0..hs.len()).collect();
        order.sort_by(|&i, &j| t[i].total_cmp(&t[j]));
        let ts: Vec<f64> = order.iter().map(|&i| t[i]).collect();
        let pl = prefix(&order.iter().map(|&i| lens[i]).collect::<Vec<_>>());

        let fams = standard_tail_families(n, m_cap);
        let mut by_lo: Vec<(f64, f64)> = fams.iter().map(|f| (f.0, f.2)).collect();
        let mut by_hi: Vec<(f64, f64)> = fams.iter().map(|f| (f.1, f.2)).collect();
        by_lo.sort_by(|x, y| x.0.total_cmp(&y.0));
        by_hi.sort_by(|x, y| x.0.total_cmp(&y.0));
        let lo_keys: Vec<f64> = by_lo.iter().map(|x| x.0).collect();
        let hi_keys: Vec<f64> = by_hi.iter().map(|x| x.0).collect();
        let lo_pref = prefix(&by_lo.iter().map(|x| x.1).collect::<Vec<_>>());
        let hi_pref = prefix(&by_hi.iter().map(|x| x.1).collect::<Vec<_>>());
        let fam_total = *lo_pref.last().unwrap();

        let mut best = (f64::NEG_INFINITY, 0usize, 0.0);
        for (idx, &th) in t.iter().enumerate() {
            let (x0, x1) = (th - eta, th + eta);
            let i0 = ts.partition_point(|&s| s < x0);
            let i1 = ts.partition_point(|&s| s <= x1);
            let main = pl[i1] - pl[i0];
            // families entirely right of the window, or entirely left of it
            let right = fam_total - lo_pref[lo_keys.partition_point(|&s| s <= x1)];
            let left = hi_pref[hi_keys.partition_point(|&s| s < x0)];
            let tail = (fam_total - right - left).max(0.0);
            let ratio = (main + tail) / eta;
            if ratio > best.0 {
                best = (ratio, idx, tail);
            }
        }
        ((best.0, best.1), best.2)
    } else {
        if hs.len() > MAX_GENERIC_BRANCHES {
            return Err(Error::Config(format!(
                "{} branches exceed the pairwise limit for {algo}",
                hs.len()
            )));
        }
        let lfts: Vec<Lft> = hs.iter().map(|(_, h)| Lft::new(h.a, h.b, h.c, h.d)).collect();
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, h) in lfts.iter().enumerate() {
            let j: f64 = lfts
                .iter()
                .zip(&lens)
                .filter(|(k, _)| lft_delta(h, k, 0.0, end) <= eta)
                .map(|(_, l)| l)
                .sum();
            let ratio = (j + truncated_mass) / eta;
            if ratio > best.0 {
                best = (ratio, i);
            }
        }
        (best, truncated_mass)
    };

    Ok(UniReport {
        algo,
        depth: n,
        a,
        m_cap,
        eta,
        worst_ratio: best.0,
        worst_branch: hs[best.1].0.iter().map(|&(m, e)| (m, e.to_i8())).collect(),
        worst_tail,
        truncated_mass,
        branches: hs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_standard_is_finite() {
        let r = uni_check(Algorithm::Standard, 1, 0.5, 20).unwrap();
        assert!(r.worst_ratio.is_finite() && r.worst_ratio > 0.0);
        assert_eq!(r.branches, 20);
    }

    #[test]
    fn j_contains_the_branch_itself() {
        // with m_cap = 2 every branch is large; the ratio is at least |h(I)|/η
        let r = uni_check(Algorithm::Standard, 2, 0.5, 3).unwrap();
        let hs = branches(Algorithm::Standard, 2, 3).unwrap();
        let max_len = hs.iter().map(|(_, h)| h.image_len(1.0)).fold(0.0, f64::max);
        assert!(r.worst_ratio >= max_len / r.eta);
    }

    #[test]
    fn fast_path_agrees_with_pairwise_deltas() {
        // recompute the main part for G by brute force with exact Δ
        let (n, cap, a) = (2, 6, 0.5);
        let eta = Algorithm::Standard.contraction_ratio().powf(a * n as f64);
        let hs = branches(Algorithm::Standard, n, cap).unwrap();
        let lfts: Vec<Lft> = hs.iter().map(|(_, h)| Lft::new(h.a, h.b, h.c, h.d)).collect();
        for (h, sh) in lfts.iter().zip(&hs) {
            for (k, sk) in lfts.iter().zip(&hs) {
                let th = sh.1.c as f64 / (sh.1.c + sh.1.d) as f64;
                let tk = sk.1.c as f64 / (sk.1.c + sk.1.d) as f64;
                assert!((lft_delta(h, k, 0.0, 1.0) - (th - tk).abs()).abs() < 1e-12);
            }
        }
        assert!(uni_check(Algorithm::Standard, n, a, cap).unwrap().eta == eta);
    }

    #[test]
    fn tail_families_cover_omitted_mass() {
        for (n, cap) in [(1u32, 5u64), (2, 5), (3, 4)] {
            let hs = branches(Algorithm::Standard, n, cap).unwrap();
            let kept: f64 = hs.iter().map(|(_, h)| h.image_len(1.0)).sum();
            let fam: f64 = standard_tail_families(n, cap).iter().map(|f| f.2).sum();
            assert!(fam >= 1.0 - kept - 1e-12, "n={n} cap={cap}: {fam} < {}", 1.0 - kept);
        }
    }

    #[test]
    fn centered_generic_path_runs() {
        let r = uni_check(Algorithm::Centered, 2, 0.5, 8).unwrap();
        assert!(r.worst_ratio.is_finite());
    }
}
