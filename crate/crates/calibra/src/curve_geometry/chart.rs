//! The conformal chart `(ξ, η)` around an arc-length parameterized curve.
//!
//! `Ψ(ξ + iη)` is the complex continuation of the parameterization, so `ξ`
//! is harmonic with `ξ(Γ(s)) = s`, `∂ξ/∂ν = 0` on `Γ`, and `η` is its
//! conjugate vanishing on `Γ`. Positive `η` lies on the side of `ν = (-ẏ, ẋ)`.

use super::curve::AnalyticCurve;
use super::{curvature_profile, CurvatureProfile};
use crate::analytic_kernel::harmonic::Composed;
use crate::analytic_kernel::{HarmonicFunction, Holomorphic, Provenance, C64};
use crate::{Error, Result};
use std::sync::Arc;

const SEEDS: usize = 1024;

#[derive(Clone, Debug)]
pub struct CurveChart {
    curve: AnalyticCurve,
    pub halfwidth: f64,
    pub length: f64,
    pub curvature: CurvatureProfile,
    seeds: Arc<Vec<(f64, [f64; 2])>>,
}

/// `min(0.25 · radius, 0.1 · l)`.
pub fn default_halfwidth(curve: &AnalyticCurve) -> f64 {
    let l = curve.domain.1 - curve.domain.0;
    (0.25 * curve.continuation_radius()).min(0.1 * l)
}

/// Builds the chart on `[0, l] × (-halfwidth, halfwidth)` after checking the
/// continuation radius and sampled injectivity.
pub fn build_chart(curve: &AnalyticCurve, halfwidth: f64) -> Result<CurveChart> {
    let curvature = curvature_profile(curve)?;
    let radius = curve.continuation_radius();
    if !(halfwidth > 0.0) || halfwidth > radius {
        return Err(Error::HalfwidthTooLarge { requested: halfwidth, radius });
    }
    let (a, b) = curve.domain;
    let seeds = (0..=SEEDS)
        .map(|k| {
            let s = a + (b - a) * k as f64 / SEEDS as f64;
            (s, curve.point(s))
        })
        .collect();
    let chart = CurveChart { curve: curve.clone(), halfwidth, length: b - a, curvature, seeds: Arc::new(seeds) };
    chart.check_injective(64, 16)?;
    Ok(chart)
}

impl CurveChart {
    pub fn curve(&self) -> &AnalyticCurve {
        &self.curve
    }

    /// `[Ψ, Ψ', Ψ'']` at `ξ + iη`.
    pub fn psi_jet(&self, xi: f64, eta: f64) -> [C64; 3] {
        self.curve.eval2(C64::new(xi, eta))
    }

    pub fn psi(&self, xi: f64, eta: f64) -> [f64; 2] {
        let p = self.psi_jet(xi, eta)[0];
        [p.re, p.im]
    }

    /// `γ = |Ψ'| = g^{1/4}`.
    pub fn gamma(&self, xi: f64, eta: f64) -> f64 {
        self.psi_jet(xi, eta)[1].norm()
    }

    pub fn curv(&self, xi: f64) -> f64 {
        self.curvature.at(xi)
    }

    /// `(τ_ξ, τ_η) = (∂_ξ Ψ, ∂_η Ψ)`, each of length `γ`.
    pub fn frame(&self, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        let d = self.psi_jet(xi, eta)[1];
        [[d.re, d.im], [-d.im, d.re]]
    }

    /// Chart-to-Cartesian map of a field: `(1/γ²)(φ^ξ τ_ξ + φ^η τ_η + φ^z e_z)`.
    pub fn to_cartesian(&self, v: [f64; 3], xi: f64, eta: f64) -> [f64; 3] {
        let [tx, te] = self.frame(xi, eta);
        let g2 = tx[0] * tx[0] + tx[1] * tx[1];
        [
            (v[0] * tx[0] + v[1] * te[0]) / g2,
            (v[0] * tx[1] + v[1] * te[1]) / g2,
            v[2] / g2,
        ]
    }

    /// Inverse of `Ψ` by complex Newton from the nearest curve sample.
    pub fn forward(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let target = C64::new(x, y);
        let (s0, p0) = self
            .seeds
            .iter()
            .min_by(|a, b| {
                let da = (a.1[0] - x).hypot(a.1[1] - y);
                let db = (b.1[0] - x).hypot(b.1[1] - y);
                da.total_cmp(&db)
            })
            .copied()
            .expect("seeds are nonempty");
        let v = self.curve.derivs(s0)[1];
        let eta0 = ((x - p0[0]) * -v[1] + (y - p0[1]) * v[0]) / v[0].hypot(v[1]).powi(2);
        let mut z = C64::new(s0, eta0);
        for _ in 0..60 {
            let [f, f1, _] = self.curve.eval2(z);
            let dz = (f - target) / f1;
            z -= dz;
            if dz.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        let miss = (self.curve.eval2(z)[0] - target).norm();
        if !(miss <= 1e-11 * (1.0 + target.norm())) {
            return Err(Error::ChartOverlap { xi: s0, eta: eta0, xi_back: z.re, eta_back: z.im });
        }
        Ok([z.re, z.im])
    }

    /// Sampled injectivity: `forward(Ψ(ξ, η)) = (ξ, η)` within `1e-9`.
    pub fn check_injective(&self, nx: usize, ne: usize) -> Result<()> {
        for i in 0..=nx {
            let xi = self.length * i as f64 / nx as f64;
            for j in 0..=ne {
                let eta = self.halfwidth * (2.0 * j as f64 / ne as f64 - 1.0);
                let p = self.psi(xi, eta);
                let back = self.forward(p[0], p[1]).map_err(|_| Error::ChartOverlap {
                    xi,
                    eta,
                    xi_back: f64::NAN,
                    eta_back: f64::NAN,
                })?;
                if (back[0] - xi).abs() > 1e-9 || (back[1] - eta).abs() > 1e-9 || self.gamma(xi, eta) <= 0.0 {
                    return Err(Error::ChartOverlap { xi, eta, xi_back: back[0], eta_back: back[1] });
                }
            }
        }
        Ok(())
    }

    /// Largest `forward ∘ Ψ - id` over an `n × n` grid.
    pub fn inverse_residual(&self, n: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for (xi, eta) in self.grid(n) {
            let p = self.psi(xi, eta);
            match self.forward(p[0], p[1]) {
                Ok(b) => worst = worst.max((b[0] - xi).abs()).max((b[1] - eta).abs()),
                Err(_) => return f64::INFINITY,
            }
        }
        worst
    }

    /// Finite-difference residual of `∂_ξx̃ = ∂_ηỹ`, `∂_ηx̃ = -∂_ξỹ` on an `n × n` grid.
    pub fn cauchy_riemann_residual(&self, n: usize) -> f64 {
        let h = 1e-5 * self.halfwidth.max(1e-3);
        let mut worst: f64 = 0.0;
        for (xi, eta) in self.grid(n) {
            let dx = |f: &dyn Fn(f64, f64) -> f64| (f(xi + h, eta) - f(xi - h, eta)) / (2.0 * h);
            let de = |f: &dyn Fn(f64, f64) -> f64| (f(xi, eta + h) - f(xi, eta - h)) / (2.0 * h);
            let x = |a: f64, b: f64| self.psi(a, b)[0];
            let y = |a: f64, b: f64| self.psi(a, b)[1];
            worst = worst.max((dx(&x) - de(&y)).abs()).max((de(&x) + dx(&y)).abs());
        }
        worst
    }

    /// Interior `n × n` sample of the strip (η endpoints at `±0.99 · halfwidth`).
    pub fn grid(&self, n: usize) -> Vec<(f64, f64)> {
        let m = n.max(2) - 1;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..=m {
            for j in 0..=m {
                let xi = self.length * i as f64 / m as f64;
                let eta = 0.99 * self.halfwidth * (2.0 * j as f64 / m as f64 - 1.0);
                out.push((xi, eta));
            }
        }
        out
    }

    /// Pulls back a holomorphic Cartesian expression `F(x + iy)` to the chart.
    pub fn pull_back(&self, outer: Arc<dyn Holomorphic>) -> HarmonicFunction {
        HarmonicFunction::new(
            Arc::new(Composed { outer, inner: Arc::new(self.curve.clone()) }),
            Provenance::ClosedForm,
        )
    }

    /// Chart-side divergence `(1/γ²)(∂_ξ(γ² X^ξ) + ∂_η(γ² X^η))` of
    /// `X = X^ξ τ_ξ + X^η τ_η`, by central differences.
    pub fn divergence_chart(&self, field: &dyn Fn(f64, f64) -> [f64; 2], xi: f64, eta: f64, h: f64) -> f64 {
        let g2 = |a: f64, b: f64| self.gamma(a, b).powi(2);
        let fx = |a: f64, b: f64| g2(a, b) * field(a, b)[0];
        let fe = |a: f64, b: f64| g2(a, b) * field(a, b)[1];
        let d = (fx(xi + h, eta) - fx(xi - h, eta) + fe(xi, eta + h) - fe(xi, eta - h)) / (2.0 * h);
        d / g2(xi, eta)
    }

    /// Cartesian divergence of the same field, differencing in `(x, y)`
    /// through the inverse chart.
    pub fn divergence_cartesian(
        &self,
        field: &dyn Fn(f64, f64) -> [f64; 2],
        xi: f64,
        eta: f64,
        h: f64,
    ) -> Result<f64> {
        let p = self.psi(xi, eta);
        let cart = |x: f64, y: f64| -> Result<[f64; 2]> {
            let [a, b] = self.forward(x, y)?;
            let v = field(a, b);
            let [tx, te] = self.frame(a, b);
            Ok([v[0] * tx[0] + v[1] * te[0], v[0] * tx[1] + v[1] * te[1]])
        };
        let dx = (cart(p[0] + h, p[1])?[0] - cart(p[0] - h, p[1])?[0]) / (2.0 * h);
        let dy = (cart(p[0], p[1] + h)?[1] - cart(p[0], p[1] - h)?[1]) / (2.0 * h);
        Ok(dx + dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_geometry::{arc_length_reparameterize, CurveKind};

    #[test]
    fn line_is_identity_chart() {
        let c = AnalyticCurve::segment([0.0, 0.0], [1.0, 0.0]);
        let ch = build_chart(&c, 0.1).unwrap();
        assert_eq!(ch.psi(0.3, 0.05), [0.3, 0.05]);
        assert_eq!(ch.gamma(0.3, 0.05), 1.0);
        assert_eq!(ch.to_cartesian([1.0, 2.0, 3.0], 0.3, 0.05), [1.0, 2.0, 3.0]);
        let f = ch.forward(0.4, -0.07).unwrap();
        assert!((f[0] - 0.4).abs() < 1e-15 && (f[1] + 0.07).abs() < 1e-15);
    }

    #[test]
    fn circle_gamma_closed_form() {
        let r = 2.0;
        let c = AnalyticCurve::new(
            CurveKind::CircleArc { center: [0.0, 0.0], radius: r, theta0: 0.0, theta1: 1.0 },
            (0.0, 1.0),
        );
        let c = arc_length_reparameterize(&c, 1e-12).unwrap();
        let ch = build_chart(&c, 0.2).unwrap();
        for &(x, e) in &[(0.3, 0.1), (1.5, -0.15)] {
            assert!((ch.gamma(x, e) - (-e / r).exp()).abs() < 1e-13);
        }
        let t = ch.to_cartesian([1.0, 0.0, 0.0], 0.7, 0.0);
        assert!((t[0] + (0.7f64 / r).sin()).abs() < 1e-14 && (t[1] - (0.7f64 / r).cos()).abs() < 1e-14);
    }

    #[test]
    fn overwide_strip_reports_overlap() {
        let c = AnalyticCurve::new(CurveKind::SineGraph { amp: 0.3, freq: 3.0, phase: 0.0, offset: 0.0 }, (0.0, 2.0));
        let c = arc_length_reparameterize(&c, 1e-10).unwrap();
        let mut ch = build_chart(&c, 0.02).unwrap();
        ch.halfwidth = 0.6;
        assert!(matches!(ch.check_injective(64, 16), Err(Error::ChartOverlap { .. })));
    }
}
