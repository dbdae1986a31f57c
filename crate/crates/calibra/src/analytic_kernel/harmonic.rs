//! Harmonic functions represented as real parts of holomorphic maps.

use super::cheb::Cheb;
use crate::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// A holomorphic map with its first two complex derivatives.
pub trait Holomorphic: Send + Sync + fmt::Debug {
    fn eval2(&self, z: C64) -> [C64; 3];
}

/// Value, gradient and Hessian of a real function of `(ξ, η)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet {
    /// Jet of `Re F` from `[F, F', F'']`.
    pub fn from_re(w: [C64; 3]) -> Jet {
        Jet { v: w[0].re, dx: w[1].re, dy: -w[1].im, dxx: w[2].re, dxy: -w[2].im, dyy: -w[2].re }
    }
    pub fn grad(&self) -> [f64; 2] {
        [self.dx, self.dy]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Cauchy,
    Grid,
}

/// Closed-form holomorphic expressions used by fixtures and configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    Const { re: f64, #[serde(default)] im: f64 },
    /// `Σ c_k (z - center)^k`, coefficients as `[re, im]` pairs.
    Poly { center: [f64; 2], coeffs: Vec<[f64; 2]> },
    /// `log(z - center)` with the branch cut along angle `cut`.
    Log { center: [f64; 2], cut: f64 },
    /// `re + i im` times the inner expression.
    Scale { re: f64, im: f64, inner: Box<Expr> },
    Sum { terms: Vec<Expr> },
    /// `outer(inner(z))`.
    Compose { outer: Box<Expr>, inner: Box<Expr> },
}

fn c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const { re: v, im: 0.0 }
    }
    /// `a + b z` with real coefficients.
    pub fn linear(a: f64, b: f64) -> Expr {
        Expr::Poly { center: [0.0, 0.0], coeffs: vec![[a, 0.0], [b, 0.0]] }
    }
    /// `scale · arg(z - center) + offset` as a real part.
    pub fn polar_angle(center: [f64; 2], scale: f64, offset: f64, cut: f64) -> Expr {
        Expr::Sum {
            terms: vec![
                Expr::Scale { re: 0.0, im: -scale, inner: Box::new(Expr::Log { center, cut }) },
                Expr::constant(offset),
            ],
        }
    }
    /// `self(e^{-i angle} (z - shift))`: the expression carried along a rigid motion.
    pub fn moved(self, angle: f64, shift: [f64; 2]) -> Expr {
        let (s, c) = (-angle).sin_cos();
        let inner = Expr::Poly { center: shift, coeffs: vec![[0.0, 0.0], [c, s]] };
        Expr::Compose { outer: Box::new(self), inner: Box::new(inner) }
    }
    pub fn plus(self, v: f64) -> Expr {
        Expr::Sum { terms: vec![self, Expr::constant(v)] }
    }
}

impl Holomorphic for Expr {
    fn eval2(&self, z: C64) -> [C64; 3] {
        let zero = C64::new(0.0, 0.0);
        match self {
            Expr::Const { re, im } => [C64::new(*re, *im), zero, zero],
            Expr::Poly { center, coeffs } => {
                let d = z - c(*center);
                let (mut p0, mut p1, mut p2) = (zero, zero, zero);
                for k in coeffs.iter().rev() {
                    p2 = p2 * d + 2.0 * p1;
                    p1 = p1 * d + p0;
                    p0 = p0 * d + c(*k);
                }
                [p0, p1, p2]
            }
            Expr::Log { center, cut } => {
                let d = z - c(*center);
                let mut arg = d.im.atan2(d.re);
                while arg > *cut {
                    arg -= 2.0 * std::f64::consts::PI;
                }
                while arg <= *cut - 2.0 * std::f64::consts::PI {
                    arg += 2.0 * std::f64::consts::PI;
                }
                [C64::new(d.norm().ln(), arg), 1.0 / d, -1.0 / (d * d)]
            }
            Expr::Scale { re, im, inner } => {
                let s = C64::new(*re, *im);
                let v = inner.eval2(z);
                [s * v[0], s * v[1], s * v[2]]
            }
            Expr::Sum { terms } => terms.iter().fold([zero; 3], |acc, t| {
                let v = t.eval2(z);
                [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]
            }),
            Expr::Compose { outer, inner } => {
                let [p, p1, p2] = inner.eval2(z);
                let [f, f1, f2] = outer.eval2(p);
                [f, f1 * p1, f2 * p1 * p1 + f1 * p2]
            }
        }
    }
}

/// `outer ∘ inner`, e.g. a Cartesian expression pulled back through a chart.
#[derive(Debug)]
pub struct Composed {
    pub outer: Arc<dyn Holomorphic>,
    pub inner: Arc<dyn Holomorphic>,
}

impl Holomorphic for Composed {
    fn eval2(&self, z: C64) -> [C64; 3] {
        let [p, p1, p2] = self.inner.eval2(z);
        let [f, f1, f2] = self.outer.eval2(p);
        [f, f1 * p1, f2 * p1 * p1 + f1 * p2]
    }
}

/// `W = f - i G` with `G' = g`: real part has trace `f` and normal derivative `g`.
#[derive(Clone, Debug)]
pub struct CauchySeries {
    f: [Cheb; 3],
    g: [Cheb; 3],
}

impl Holomorphic for CauchySeries {
    fn eval2(&self, z: C64) -> [C64; 3] {
        let i = C64::new(0.0, 1.0);
        [
            self.f[0].eval_c(z) - i * self.g[0].eval_c(z),
            self.f[1].eval_c(z) - i * self.g[1].eval_c(z),
            self.f[2].eval_c(z) - i * self.g[2].eval_c(z),
        ]
    }
}

/// Real part of a holomorphic map on a strip.
#[derive(Clone)]
pub struct HarmonicFunction {
    inner: Arc<dyn Holomorphic>,
    shift: f64,
    pub provenance: Provenance,
}

impl fmt::Debug for HarmonicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HarmonicFunction")
            .field("provenance", &self.provenance)
            .field("shift", &self.shift)
            .finish()
    }
}

impl HarmonicFunction {
    pub fn new(inner: Arc<dyn Holomorphic>, provenance: Provenance) -> Self {
        HarmonicFunction { inner, shift: 0.0, provenance }
    }

    pub fn closed_form(e: Expr) -> Self {
        Self::new(Arc::new(e), Provenance::ClosedForm)
    }

    pub fn holomorphic(&self) -> Arc<dyn Holomorphic> {
        self.inner.clone()
    }

    /// Same function plus a constant.
    pub fn shifted(&self, by: f64) -> Self {
        HarmonicFunction { inner: self.inner.clone(), shift: self.shift + by, provenance: self.provenance }
    }

    pub fn jet(&self, xi: f64, eta: f64) -> Jet {
        let mut j = Jet::from_re(self.inner.eval2(C64::new(xi, eta)));
        j.v += self.shift;
        j
    }

    pub fn value(&self, xi: f64, eta: f64) -> f64 {
        self.inner.eval2(C64::new(xi, eta))[0].re + self.shift
    }

    pub fn grad(&self, xi: f64, eta: f64) -> [f64; 2] {
        self.jet(xi, eta).grad()
    }

    /// Five-point Laplacian with one Richardson step, `O(h^4)`.
    pub fn laplacian_fd(&self, xi: f64, eta: f64, h: f64) -> f64 {
        let lap = |h: f64| {
            (self.value(xi + h, eta) + self.value(xi - h, eta) + self.value(xi, eta + h)
                + self.value(xi, eta - h)
                - 4.0 * self.value(xi, eta))
                / (h * h)
        };
        (4.0 * lap(0.5 * h) - lap(h)) / 3.0
    }
}

/// Builds `w` with `Δw = 0`, `w(ξ,0) = f(ξ)`, `∂_η w(ξ,0) = g(ξ)` on
/// `[a, b] × (-halfwidth, halfwidth)` as `Re f(ζ) + Im G(ζ)`, `G' = g`.
pub fn harmonic_from_cauchy(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    interval: (f64, f64),
    halfwidth: f64,
    nodes: usize,
) -> Result<HarmonicFunction> {
    let (a, b) = interval;
    let fc = Cheb::fit(f, a, b, nodes);
    let gc = Cheb::fit(g, a, b, nodes);
    let scale = fc.coeffs.iter().chain(gc.coeffs.iter()).fold(1e-300f64, |m, c| m.max(c.abs()));
    let tail = fc.tail(4).max(gc.tail(4));
    if tail > 1e-11 * scale.max(1.0) {
        return Err(Error::RadiusTooSmall { tail });
    }
    let radius = fc.continuation_radius().min(gc.continuation_radius());
    if halfwidth > radius {
        return Err(Error::HalfwidthTooLarge { requested: halfwidth, radius });
    }
    let f1 = fc.derivative();
    let f2 = f1.derivative();
    let gi = gc.integral(a);
    let g1 = gc.derivative();
    Ok(HarmonicFunction::new(
        Arc::new(CauchySeries { f: [fc, f1, f2], g: [gi, gc, g1] }),
        Provenance::Cauchy,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_from_unit_normal_derivative() {
        let w = harmonic_from_cauchy(&|_| 0.0, &|_| 1.0, (0.0, 1.0), 0.2, 16).unwrap();
        assert!((w.value(0.3, 0.1) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn square_trace_gives_xi2_minus_eta2() {
        let w = harmonic_from_cauchy(&|x| x * x, &|_| 0.0, (-1.0, 1.0), 0.3, 16).unwrap();
        assert!((w.value(0.4, 0.2) - (0.16 - 0.04)).abs() < 1e-13);
    }

    #[test]
    fn cosine_normal_derivative() {
        let w = harmonic_from_cauchy(&|_| 0.0, &f64::cos, (0.0, 2.0), 0.2, 40).unwrap();
        for &(x, y) in &[(0.5, 0.1), (1.7, -0.15)] {
            assert!((w.value(x, y) - x.cos() * y.sinh()).abs() < 1e-12);
            assert!(w.laplacian_fd(x, y, 1e-2).abs() < 1e-10);
        }
    }

    #[test]
    fn polynomial_jet() {
        let e = Expr::Poly { center: [0.0, 0.0], coeffs: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]] };
        let j = HarmonicFunction::closed_form(e).jet(0.5, 0.25);
        assert!((j.v - (0.25 - 0.0625)).abs() < 1e-15);
        assert!((j.dx - 1.0).abs() < 1e-15 && (j.dy + 0.5).abs() < 1e-15);
        assert!((j.dxx - 2.0).abs() < 1e-15 && (j.dyy + 2.0).abs() < 1e-15);
    }

    #[test]
    fn polar_angle_branch() {
        let e = Expr::polar_angle([0.0, 0.0], 1.0, 0.0, std::f64::consts::PI);
        let h = HarmonicFunction::closed_form(e);
        assert!((h.value(0.0, 1.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        let g = h.grad(0.0, 1.0);
        assert!((g[0] + 1.0).abs() < 1e-14 && g[1].abs() < 1e-14);
    }
}
