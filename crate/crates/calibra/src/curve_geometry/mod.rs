//! Analytic curves, arc-length parameterization, curvature and the
//! curvilinear chart `(ξ, η)`.

mod chart;
mod curve;

pub use chart::{build_chart, default_halfwidth, CurveChart};
pub use curve::{arc_length_reparameterize, AnalyticCurve, CurveKind};

use crate::{Error, Result};

/// `curv Γ(ξ) = -(ẍ, ÿ)·ν` on an arc-length curve, with `k(Γ) = sup |curv|`
/// and the residual of `|curv|² = ẍ² + ÿ²`.
#[derive(Clone, Debug)]
pub struct CurvatureProfile {
    curve: AnalyticCurve,
    pub k: f64,
    pub curvq_residual: f64,
}

impl CurvatureProfile {
    pub fn at(&self, xi: f64) -> f64 {
        let [_, v, a] = self.curve.derivs(xi);
        a[0] * v[1] - v[0] * a[1]
    }

    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let (a, b) = self.curve.domain;
        (0..n)
            .map(|i| {
                let s = a + (b - a) * i as f64 / (n - 1).max(1) as f64;
                (s, self.at(s))
            })
            .collect()
    }
}

pub fn curvature_profile(curve: &AnalyticCurve) -> Result<CurvatureProfile> {
    let (a, b) = curve.domain;
    let n = 1000;
    let mut k: f64 = 0.0;
    let mut resid: f64 = 0.0;
    for i in 0..=n {
        let s = a + (b - a) * i as f64 / n as f64;
        let [_, v, acc] = curve.derivs(s);
        let speed = v[0].hypot(v[1]);
        if (speed - 1.0).abs() > 1e-8 {
            return Err(Error::Parameter(format!("curve is not arc-length parameterized (speed {speed} at {s})")));
        }
        let c = acc[0] * v[1] - v[0] * acc[1];
        k = k.max(c.abs());
        resid = resid.max((c * c - (acc[0] * acc[0] + acc[1] * acc[1])).abs());
    }
    Ok(CurvatureProfile { curve: curve.clone(), k, curvq_residual: resid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_radius_two_inward() {
        let c = AnalyticCurve::new(
            CurveKind::CircleArc { center: [0.0, 0.0], radius: 2.0, theta0: 0.0, theta1: PI },
            (0.0, 1.0),
        );
        let p = curvature_profile(&arc_length_reparameterize(&c, 1e-12).unwrap()).unwrap();
        assert!((p.at(1.0) + 0.5).abs() < 1e-13);
        assert!((p.k - 0.5).abs() < 1e-13);
        assert!(p.curvq_residual < 1e-12);
    }

    #[test]
    fn line_has_no_curvature() {
        let p = curvature_profile(&AnalyticCurve::segment([0.0, 0.0], [1.0, 0.0])).unwrap();
        assert_eq!(p.k, 0.0);
    }

    #[test]
    fn needs_unit_speed() {
        assert!(curvature_profile(&AnalyticCurve::segment([0.0, 0.0], [2.0, 0.0])).is_err());
    }
}
