//! Chebyshev series on an interval `[a, b]`, evaluable at complex points.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `f(x) = Σ c_k T_k(t)`, `t = (2x - a - b) / (b - a)`; `c_0` carries full weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cheb {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl Cheb {
    /// Interpolates `f` at `n` Chebyshev points of the first kind.
    pub fn fit<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> Cheb {
        assert!(b > a && n >= 1);
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let t = (PI * (k as f64 + 0.5) / n as f64).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * t)
            })
            .collect();
        Self::from_values(&vals, a, b)
    }

    /// Coefficients from samples at the first-kind points (`n` = `vals.len()`).
    pub fn from_values(vals: &[f64], a: f64, b: f64) -> Cheb {
        let n = vals.len();
        let mut coeffs = vec![0.0; n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, v) in vals.iter().enumerate() {
                s += v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
            *c = if j == 0 { s / n as f64 } else { 2.0 * s / n as f64 };
        }
        Cheb { a, b, coeffs }
    }

    /// Chebyshev points of the first kind mapped to `[a, b]`.
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| 0.5 * (a + b) + 0.5 * (b - a) * (PI * (k as f64 + 0.5) / n as f64).cos())
            .collect()
    }

    pub fn constant(a: f64, b: f64, v: f64) -> Cheb {
        Cheb { a, b, coeffs: vec![v] }
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
    }

    pub fn eval_c(&self, z: C64) -> C64 {
        let t = (2.0 * z - C64::new(self.a + self.b, 0.0)) / (self.b - self.a);
        let (mut b1, mut b2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
    }

    pub fn derivative(&self) -> Cheb {
        let n = self.coeffs.len();
        if n <= 1 {
            return Cheb { a: self.a, b: self.b, coeffs: vec![0.0] };
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.b - self.a);
        Cheb { a: self.a, b: self.b, coeffs: d.into_iter().map(|v| v * scale).collect() }
    }

    /// Antiderivative vanishing at `x0`.
    pub fn integral(&self, x0: f64) -> Cheb {
        let n = self.coeffs.len();
        let c = |k: usize| self.coeffs.get(k).copied().unwrap_or(0.0);
        let mut big = vec![0.0; n + 1];
        big[1] = c(0) - 0.5 * c(2);
        for (k, slot) in big.iter_mut().enumerate().skip(2) {
            *slot = (c(k - 1) - c(k + 1)) / (2.0 * k as f64);
        }
        let scale = 0.5 * (self.b - self.a);
        for v in big.iter_mut() {
            *v *= scale;
        }
        let mut out = Cheb { a: self.a, b: self.b, coeffs: big };
        out.coeffs[0] -= out.eval(x0);
        out
    }

    /// Pointwise product, refit on `n` nodes.
    pub fn product(&self, other: &Cheb, n: usize) -> Cheb {
        Cheb::fit(|x| self.eval(x) * other.eval(x), self.a, self.b, n)
    }

    /// Largest magnitude among the last `m` coefficients.
    pub fn tail(&self, m: usize) -> f64 {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(m)..].iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// Bernstein-ellipse parameter estimated from the coefficient decay
    /// (Cauchy-Hadamard on the Chebyshev coefficients).
    pub fn bernstein_rho(&self) -> f64 {
        let cmax = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        if cmax == 0.0 {
            return f64::INFINITY;
        }
        let floor = 1e-13 * cmax;
        let last = self.coeffs.iter().rposition(|c| c.abs() > floor).unwrap_or(0);
        if last <= 2 {
            return f64::INFINITY;
        }
        (cmax / floor).powf(1.0 / last as f64)
    }

    /// Semi-minor axis of the Bernstein ellipse: a safe half-width for
    /// complex evaluation off the real axis.
    pub fn continuation_radius(&self) -> f64 {
        let rho = self.bernstein_rho();
        if !rho.is_finite() {
            return f64::INFINITY;
        }
        0.25 * (self.b - self.a) * (rho - 1.0 / rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact_and_continues() {
        let p = Cheb::fit(|x| x * x - 3.0 * x + 1.0, -1.0, 2.0, 8);
        let z = C64::new(0.3, 0.7);
        let exact = z * z - 3.0 * z + 1.0;
        assert!((p.eval_c(z) - exact).norm() < 1e-13);
        assert!((p.derivative().eval(0.5) - (-2.0)).abs() < 1e-13);
        let ip = p.integral(0.0);
        let x: f64 = 1.5;
        assert!((ip.eval(x) - (x.powi(3) / 3.0 - 1.5 * x * x + x)).abs() < 1e-13);
        assert!(p.continuation_radius().is_infinite());
    }

    #[test]
    fn cosine_series_matches_complex_cosine() {
        let c = Cheb::fit(f64::cos, 0.0, 2.0, 32);
        let z = C64::new(1.1, 0.2);
        let err = (c.eval_c(z) - z.cos()).norm();
        assert!(err < 1e-12, "{err}");
        let d2 = c.derivative().derivative();
        assert!((d2.eval(0.4) + 0.4f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn pole_limits_radius() {
        // 1/(x^2 + 0.25) has poles at ±0.5i
        let c = Cheb::fit(|x| 1.0 / (x * x + 0.25), -1.0, 1.0, 96);
        let r = c.continuation_radius();
        assert!(r > 0.2 && r < 0.8, "radius {r}");
    }
}
