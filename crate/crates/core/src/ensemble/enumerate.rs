//! Input sets and the per-denominator cost profile.

use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, Sign};
use crate::cost::{detect_span, lattice_indices, DigitCost};
use crate::error::{Error, Result};

/// `Ω_N` (reduced) or `Ω̃_N` (all pairs) for one algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputSet {
    pub algo: Algorithm,
    #[serde(rename = "N")]
    pub n: u64,
    pub reduced: bool,
}

impl InputSet {
    pub fn new(algo: Algorithm, n: u64, reduced: bool) -> Self {
        InputSet { algo, n, reduced }
    }

    pub fn reduced(algo: Algorithm, n: u64) -> Self {
        InputSet::new(algo, n, true)
    }

    pub fn with_n(self, n: u64) -> Self {
        InputSet { n, ..self }
    }

    /// Pairs in increasing `v`, then increasing `u`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> {
        let set = *self;
        (1..=set.n).flat_map(move |v| {
            (1..=v).filter_map(move |u| {
                let ok = set.algo.accepts(&u, &v) && (!set.reduced || u.gcd(&v) == 1);
                ok.then_some((u, v))
            })
        })
    }
}

/// Every pair of `set`, ascending in `v` then `u`.
pub fn enumerate_inputs(set: &InputSet) -> impl Iterator<Item = (u64, u64)> {
    set.iter()
}

/// Counts of reduced inputs by denominator and cost index.
///
/// `planes[j][v]` is the number of `u` with `(u, v)` in `Ω_v \ Ω_{v-1}` and
/// total cost `j·span`. One profile answers every question about `Ω_N` and
/// `Ω̃_N` for `N <= n_max`.
#[derive(Clone, Debug)]
pub struct CostProfile {
    pub algo: Algorithm,
    pub cost: String,
    pub span: BigRational,
    pub n_max: u64,
    planes: Vec<Vec<u32>>,
}

struct Walker<'a> {
    algo: Algorithm,
    n: u64,
    idx: &'a [Vec<u32>; 2],
}

impl Walker<'_> {
    fn bump(&self, planes: &mut Vec<Vec<u32>>, j: usize, v: u64) {
        while planes.len() <= j {
            planes.push(vec![0; self.n as usize + 1]);
        }
        planes[j][v as usize] += 1;
    }

    /// Visits every extension of the trajectory tail `a/b` by one more leading digit.
    fn walk(&self, planes: &mut Vec<Vec<u32>>, a: u64, b: u64, j: usize) {
        let (n, algo) = (self.n, self.algo);
        let visit = |planes: &mut Vec<Vec<u32>>, m: u64, eps: Sign, v: u64| {
            let jj = j + self.idx[(eps == Sign::Minus) as usize][m as usize] as usize;
            self.bump(planes, jj, v);
            // children of (b, v) have denominator at least v + b
            if v + b <= n {
                self.walk(planes, b, v, jj);
            }
        };
        match algo {
            Algorithm::Standard => {
                let m0 = if a == 0 { 2 } else { 1 };
                let mut v = m0 * b + a;
                let mut m = m0;
                while v <= n {
                    visit(planes, m, Sign::Plus, v);
                    m += 1;
                    v += b;
                }
            }
            Algorithm::Centered => {
                if 2 * a < b {
                    let mut m = 2;
                    while m * b + a <= n {
                        visit(planes, m, Sign::Plus, m * b + a);
                        m += 1;
                    }
                }
                if a > 0 {
                    let mut m = 3;
                    while m * b - a <= n {
                        visit(planes, m, Sign::Minus, m * b - a);
                        m += 1;
                    }
                }
            }
            Algorithm::Odd => {
                if a < b {
                    let mut m = 1;
                    while m * b + a <= n {
                        visit(planes, m, Sign::Plus, m * b + a);
                        m += 2;
                    }
                }
                if a > 0 {
                    let mut m = 3;
                    while m * b - a <= n {
                        visit(planes, m, Sign::Minus, m * b - a);
                        m += 2;
                    }
                }
            }
        }
    }
}

fn add_planes(mut a: Vec<Vec<u32>>, b: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    if a.len() < b.len() {
        return add_planes(b, a);
    }
    for (pa, pb) in a.iter_mut().zip(b) {
        for (x, y) in pa.iter_mut().zip(pb) {
            *x += y;
        }
    }
    a
}

impl CostProfile {
    /// Exhaustive profile of `Ω_{n_max}` under `cost`.
    pub fn build(algo: Algorithm, cost: &DigitCost, n_max: u64) -> Result<Self> {
        if n_max > u32::MAX as u64 / 2 {
            return Err(Error::Config(format!("N = {n_max} is too large to enumerate")));
        }
        let span = detect_span(cost, n_max.max(1) + 1)
            .ok_or_else(|| Error::Config(format!("cost {cost} vanishes on all digits up to {n_max}")))?;
        // quotients reach N + 1 (odd system: 1/1 -> 1/N via (N+1, -1))
        let idx = lattice_indices(cost, algo, n_max + 1, &span)?;
        let walker = Walker { algo, n: n_max, idx: &idx };

        // Split the tree at depth one; each subtree is walked independently.
        let mut roots = Vec::new();
        let mut planes: Vec<Vec<u32>> = Vec::new();
        {
            let mut probe = Vec::new();
            let mut m = 1;
            while m <= n_max {
                if algo.admits(m, Sign::Plus) && !(algo == Algorithm::Standard && m == 1) {
                    let j = idx[0][m as usize] as usize;
                    probe.push((m, j));
                }
                m += 1;
            }
            for (m, j) in probe {
                walker.bump(&mut planes, j, m);
                if m + 1 <= n_max {
                    roots.push((1u64, m, j));
                }
            }
        }
        let min_len = (roots.len() / (8 * rayon::current_num_threads()).max(1)).max(1);
        let sub = roots
            .par_iter()
            .with_min_len(min_len)
            .fold(Vec::new, |mut acc, &(a, b, j)| {
                walker.walk(&mut acc, a, b, j);
                acc
            })
            .reduce(Vec::new, add_planes);
        let planes = add_planes(planes, sub);
        Ok(CostProfile { algo, cost: cost.descriptor(), span, n_max, planes })
    }

    /// Number of cost bins (largest index + 1).
    pub fn bins(&self) -> usize {
        self.planes.len()
    }

    /// Count of reduced pairs with denominator exactly `v` and cost index `j`.
    pub fn at(&self, j: usize, v: u64) -> u32 {
        self.planes.get(j).map_or(0, |p| p[v as usize])
    }

    fn check(&self, set: &InputSet) -> Result<()> {
        if set.algo != self.algo {
            return Err(Error::Config(format!("profile is for {} not {}", self.algo, set.algo)));
        }
        if set.n > self.n_max {
            return Err(Error::Config(format!("profile covers N <= {}, asked {}", self.n_max, set.n)));
        }
        Ok(())
    }

    /// Histogram `j -> count` over the input set.
    pub fn histogram(&self, set: &InputSet) -> Result<Vec<u64>> {
        self.check(set)?;
        let n = set.n as usize;
        let mut h: Vec<u64> = self
            .planes
            .iter()
            .map(|p| {
                if set.reduced {
                    p[1..=n].iter().map(|&c| c as u64).sum()
                } else {
                    (1..=n).map(|v| p[v] as u64 * (set.n / v as u64)).sum()
                }
            })
            .collect();
        while h.last() == Some(&0) {
            h.pop();
        }
        Ok(h)
    }

    /// Dirichlet coefficient `c_n` as a polynomial in `exp(w·span)`: entry `j`
    /// counts pairs of the set with denominator exactly `n` and cost `j·span`.
    pub fn dirichlet_coeff(&self, set: &InputSet, n: u64) -> Result<Vec<u64>> {
        self.check(&set.with_n(n))?;
        let mut c = vec![0u64; self.planes.len()];
        if n == 0 {
            return Ok(c);
        }
        for (j, p) in self.planes.iter().enumerate() {
            c[j] = if set.reduced {
                p[n as usize] as u64
            } else {
                (1..=n).filter(|v| n % v == 0).map(|v| p[v as usize] as u64).sum()
            };
        }
        Ok(c)
    }

    /// Number of pairs of the set with denominator exactly `n`, for `n = 0..=N`.
    pub fn pairs_by_denominator(&self, set: &InputSet) -> Result<Vec<u64>> {
        self.check(set)?;
        let n = set.n as usize;
        let mut reduced = vec![0u64; n + 1];
        for p in &self.planes {
            for v in 1..=n {
                reduced[v] += p[v] as u64;
            }
        }
        if set.reduced {
            return Ok(reduced);
        }
        let mut all = vec![0u64; n + 1];
        for v in 1..=n {
            let mut k = v;
            while k <= n {
                all[k] += reduced[v];
                k += v;
            }
        }
        Ok(all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::decompose_u64;
    use crate::cost::total_cost;
    use num_traits::ToPrimitive;

    #[test]
    fn enumerate_examples() {
        let g5: Vec<_> = enumerate_inputs(&InputSet::reduced(Algorithm::Standard, 5)).collect();
        assert_eq!(g5, vec![(1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (1, 5), (2, 5), (3, 5), (4, 5)]);
        let o1: Vec<_> = enumerate_inputs(&InputSet::reduced(Algorithm::Odd, 1)).collect();
        assert_eq!(o1, vec![(1, 1)]);
        assert_eq!(enumerate_inputs(&InputSet::reduced(Algorithm::Standard, 1)).count(), 0);
        assert_eq!(enumerate_inputs(&InputSet::new(Algorithm::Standard, 4, false)).count(), 6);
    }

    fn brute(algo: Algorithm, cost: &DigitCost, n: u64) -> Vec<Vec<u32>> {
        let span = detect_span(cost, n.max(2)).unwrap();
        let mut planes: Vec<Vec<u32>> = Vec::new();
        for (u, v) in enumerate_inputs(&InputSet::reduced(algo, n)) {
            let t = decompose_u64(algo, u, v).unwrap();
            let j = (total_cost(cost, &t).unwrap() / &span).to_integer().to_usize().unwrap();
            while planes.len() <= j {
                planes.push(vec![0; n as usize + 1]);
            }
            planes[j][v as usize] += 1;
        }
        planes
    }

    #[test]
    fn tree_walk_matches_direct_decomposition() {
        for algo in Algorithm::ALL {
            for cost in [DigitCost::unit(), DigitCost::binary_length(), DigitCost::indicator(3)] {
                let p = CostProfile::build(algo, &cost, 300).unwrap();
                let b = brute(algo, &cost, 300);
                assert_eq!(p.bins(), b.len(), "{algo} {cost}");
                for (j, plane) in b.iter().enumerate() {
                    for v in 1..=300u64 {
                        assert_eq!(p.at(j, v), plane[v as usize], "{algo} {cost} j={j} v={v}");
                    }
                }
            }
        }
    }

    #[test]
    fn tiny_profiles() {
        let p = CostProfile::build(Algorithm::Standard, &DigitCost::unit(), 1).unwrap();
        assert!(p.histogram(&InputSet::reduced(Algorithm::Standard, 1)).unwrap().is_empty());
        let p = CostProfile::build(Algorithm::Odd, &DigitCost::unit(), 1).unwrap();
        assert_eq!(p.histogram(&InputSet::reduced(Algorithm::Odd, 1)).unwrap(), vec![0, 1]);
    }

    #[test]
    fn multiplicity_weighting_matches_double_loop() {
        for algo in Algorithm::ALL {
            let p = CostProfile::build(algo, &DigitCost::unit(), 300).unwrap();
            for n in 1..=300 {
                let set = InputSet::new(algo, n, false);
                let weighted: u64 = p.histogram(&set).unwrap().iter().sum();
                let direct = (1..=n)
                    .flat_map(|v| (1..=v).map(move |u| (u, v)))
                    .filter(|(u, v)| algo.accepts(u, v))
                    .count() as u64;
                assert_eq!(weighted, direct, "{algo} N={n}");
                assert_eq!(p.pairs_by_denominator(&set).unwrap().iter().sum::<u64>(), direct);
            }
        }
    }
}
