//! Polynomial interpolants at Chebyshev–Lobatto nodes on `[0, b]`.

use serde::{Deserialize, Serialize};

/// Ascending Chebyshev–Lobatto nodes `b(1 − cos(jπ/n))/2`, `j = 0..=n`.
pub fn nodes(n: usize, b: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            if j == 0 {
                0.0
            } else if j == n {
                b
            } else {
                0.5 * b * (1.0 - (j as f64 * std::f64::consts::PI / n as f64).cos())
            }
        })
        .collect()
}

/// Barycentric weights for Lobatto nodes (common factors dropped).
pub fn bary_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Values at `y` of all Lagrange basis polynomials.
pub fn lagrange_row(y: f64, xs: &[f64], ws: &[f64], out: &mut [f64]) {
    if let Some(k) = xs.iter().position(|&x| x == y) {
        out.iter_mut().for_each(|o| *o = 0.0);
        out[k] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for ((o, &x), &w) in out.iter_mut().zip(xs).zip(ws) {
        *o = w / (y - x);
        denom += *o;
    }
    out.iter_mut().for_each(|o| *o /= denom);
}

/// Chebyshev coefficients `a_i` of the interpolant, in the variable `t = 2x/b − 1`.
pub fn coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    let pi = std::f64::consts::PI;
    // node j sits at t = cos((n − j)π/n)
    (0..=n)
        .map(|i| {
            let mut s = 0.0;
            for (j, &f) in values.iter().enumerate() {
                let c = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += c * f * ((i * (n - j)) as f64 * pi / n as f64).cos();
            }
            let a = 2.0 * s / n as f64;
            if i == 0 || i == n {
                0.5 * a
            } else {
                a
            }
        })
        .collect()
}

/// `T_i^{(p)}(−1)·(2/b)^p/p!` for `i, p = 0..=n`, indexed `[i][p]`: Taylor
/// coefficients at `x = 0` of the basis `T_i(2x/b − 1)`.
pub fn taylor_at_zero(n: usize, b: f64) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|i| {
            let mut row = vec![0.0; n + 1];
            let sign_i = if i % 2 == 0 { 1.0 } else { -1.0 };
            let mut prod = 1.0;
            for (p, slot) in row.iter_mut().enumerate() {
                if p > i {
                    break;
                }
                let sign = if p % 2 == 0 { sign_i } else { -sign_i };
                *slot = sign * prod;
                // next: multiply by (i² − p²)/(2p+1) · (2/b)/(p+1)
                let ii = (i * i) as f64;
                prod *= (ii - (p * p) as f64) / (2 * p + 1) as f64 * (2.0 / b) / (p + 1) as f64;
            }
            row
        })
        .collect()
}

/// Clenshaw–Curtis weights: `∫_0^b f ≈ Σ_k w_k f(x_k)`.
pub fn quadrature_weights(n: usize, b: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let mut e = vec![0.0; n + 1];
    for k in 0..=n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[k] = 1.0;
        let a = coefficients(&e);
        w[k] = 0.5 * b * a.iter().enumerate().step_by(2).map(|(i, ai)| ai * 2.0 / (1.0 - (i * i) as f64)).sum::<f64>();
    }
    w
}

/// A function on `[0, b]` stored by its values at Chebyshev–Lobatto nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionModel {
    pub b: f64,
    pub values: Vec<f64>,
}

impl FunctionModel {
    pub fn from_values(b: f64, values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "need at least two nodes");
        FunctionModel { b, values }
    }

    pub fn sample(n: usize, b: f64, f: impl Fn(f64) -> f64) -> Self {
        FunctionModel { b, values: nodes(n, b).into_iter().map(f).collect() }
    }

    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        nodes(self.degree(), self.b)
    }

    pub fn coefficients(&self) -> Vec<f64> {
        coefficients(&self.values)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let xs = self.nodes();
        let ws = bary_weights(self.degree());
        let mut row = vec![0.0; xs.len()];
        lagrange_row(x, &xs, &ws, &mut row);
        row.iter().zip(&self.values).map(|(l, v)| l * v).sum()
    }

    /// `f'(x)` from the differentiated Chebyshev series.
    pub fn derivative(&self, x: f64) -> f64 {
        let a = self.coefficients();
        let n = a.len() - 1;
        // coefficients of d/dt via the standard backward recurrence
        let mut d = vec![0.0; n + 2];
        for i in (1..=n).rev() {
            d[i - 1] = d[i + 1] + 2.0 * i as f64 * a[i];
        }
        d[0] *= 0.5;
        let t = 2.0 * x / self.b - 1.0;
        clenshaw(&d[..n.max(1)], t) * 2.0 / self.b
    }

    pub fn integral(&self) -> f64 {
        quadrature_weights(self.degree(), self.b).iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Same function scaled to unit integral.
    pub fn normalized(&self) -> Self {
        let s = self.integral();
        FunctionModel { b: self.b, values: self.values.iter().map(|v| v / s).collect() }
    }
}

/// `Σ a_i T_i(t)`.
pub fn clenshaw(a: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in a.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    a.first().copied().unwrap_or(0.0) + t * b1 - b2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolant_reproduces_nodes_and_smooth_functions() {
        let f = FunctionModel::sample(40, 1.0, |x| 1.0 / (1.0 + x));
        for (x, v) in f.nodes().iter().zip(&f.values) {
            assert!((f.eval(*x) - v).abs() < 1e-13);
        }
        for k in 0..100 {
            let x = k as f64 / 99.0;
            assert!((f.eval(x) - 1.0 / (1.0 + x)).abs() < 1e-14);
            assert!((f.derivative(x) + 1.0 / (1.0 + x).powi(2)).abs() < 1e-11);
        }
        assert!((f.integral() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn coefficients_agree_with_clenshaw() {
        let f = FunctionModel::sample(16, 0.5, |x| (3.0 * x).sin());
        let a = f.coefficients();
        for x in [0.0, 0.1, 0.37, 0.5] {
            assert!((clenshaw(&a, 4.0 * x - 1.0) - (3.0 * x).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn taylor_coefficients_match_polynomial() {
        // f(x) = x^3 - 2x on [0, 2]: Taylor coefficients at 0 are (0, -2, 0, 1)
        let n = 10;
        let f = FunctionModel::sample(n, 2.0, |x| x * x * x - 2.0 * x);
        let a = f.coefficients();
        let tz = taylor_at_zero(n, 2.0);
        let tau: Vec<f64> = (0..=n).map(|p| (0..=n).map(|i| a[i] * tz[i][p]).sum()).collect();
        let want = [0.0, -2.0, 0.0, 1.0];
        for p in 0..=n {
            let w = want.get(p).copied().unwrap_or(0.0);
            assert!((tau[p] - w).abs() < 1e-11, "p={p}: {}", tau[p]);
        }
    }
}
