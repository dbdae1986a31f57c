//! Candidates `(u₁, u₂)` across `Γ` and the Euler conditions
//! (i) harmonicity, (ii) vanishing normal derivative, (iii) the curvature balance.

use crate::analytic_kernel::{HarmonicFunction, Jet};
use crate::curve_geometry::CurveChart;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Number of ξ-samples used for sup-norms on `Γ`.
pub const TRACE_SAMPLES: usize = 1001;

/// `u₁` below `Γ` (η < 0), `u₂` above, both harmonic on the whole strip and
/// written in chart coordinates.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub name: String,
    pub chart: CurveChart,
    pub u1: HarmonicFunction,
    pub u2: HarmonicFunction,
    /// Constant added to both sides by [`Candidate::normalized`].
    pub shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerReport {
    pub laplacian: f64,
    pub neumann: f64,
    pub curvature: f64,
    /// ξ where the curvature residual peaks.
    pub curvature_at: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Candidate {
    pub fn new(name: impl Into<String>, chart: CurveChart, u1: HarmonicFunction, u2: HarmonicFunction) -> Self {
        Candidate { name: name.into(), chart, u1, u2, shift: 0.0 }
    }

    pub fn side(&self, i: usize) -> &HarmonicFunction {
        if i == 1 {
            &self.u1
        } else {
            &self.u2
        }
    }

    pub fn length(&self) -> f64 {
        self.chart.length
    }

    pub fn xi_samples(&self, n: usize) -> Vec<f64> {
        (0..n).map(|k| self.length() * k as f64 / (n - 1) as f64).collect()
    }

    /// Jet of `u_i` at `(ξ, 0)`.
    pub fn trace(&self, i: usize, xi: f64) -> Jet {
        self.side(i).jet(xi, 0.0)
    }

    /// Adds a constant to both sides so that `min u₁(ξ, 0) = 1`.
    pub fn normalized(mut self) -> Self {
        let m = self.xi_samples(TRACE_SAMPLES).iter().map(|&x| self.u1.value(x, 0.0)).fold(f64::INFINITY, f64::min);
        let by = 1.0 - m;
        self.u1 = self.u1.shifted(by);
        self.u2 = self.u2.shifted(by);
        self.shift += by;
        self
    }

    pub fn shifted(&self, by: f64) -> Self {
        let mut c = self.clone();
        c.u1 = c.u1.shifted(by);
        c.u2 = c.u2.shifted(by);
        c.shift += by;
        c
    }

    /// Same candidate on a narrower strip.
    pub fn with_halfwidth(&self, h: f64) -> Self {
        let mut c = self.clone();
        c.chart.halfwidth = h;
        c
    }

    /// `min_ξ (u₂ - u₁)(ξ, 0)`.
    pub fn min_gap(&self) -> f64 {
        self.xi_samples(TRACE_SAMPLES)
            .iter()
            .map(|&x| self.u2.value(x, 0.0) - self.u1.value(x, 0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// `sup_ξ |∂_ξ u_i(ξ, 0)|` for both sides.
    pub fn sup_tangential(&self) -> [f64; 2] {
        let xs = self.xi_samples(TRACE_SAMPLES);
        [1, 2].map(|i| xs.iter().map(|&x| self.trace(i, x).dx.abs()).fold(0.0, f64::max))
    }

    /// `‖∂_τ u_i‖_{C¹(Γ)} = sup|∂_ξ u_i| + sup|∂²_ξξ u_i|` on `η = 0`.
    pub fn c1_tangential(&self) -> [f64; 2] {
        let xs = self.xi_samples(TRACE_SAMPLES);
        [1, 2].map(|i| {
            let (a, b) = xs.iter().fold((0.0f64, 0.0f64), |(a, b), &x| {
                let j = self.trace(i, x);
                (a.max(j.dx.abs()), b.max(j.dxx.abs()))
            });
            a + b
        })
    }

    /// `sup_ξ |∂²_ηη u_i(ξ, 0)|` for both sides.
    pub fn sup_normal_second(&self) -> [f64; 2] {
        let xs = self.xi_samples(TRACE_SAMPLES);
        [1, 2].map(|i| xs.iter().map(|&x| self.trace(i, x).dyy.abs()).fold(0.0, f64::max))
    }

    /// Distinct positive traces: `0 < u₁(ξ, 0) < u₂(ξ, 0)`.
    pub fn check_traces(&self) -> Result<()> {
        for x in self.xi_samples(TRACE_SAMPLES) {
            let (a, b) = (self.u1.value(x, 0.0), self.u2.value(x, 0.0));
            if !(a > 0.0 && a < b) {
                return Err(Error::Parameter(format!("traces not ordered at xi = {x}: u1 = {a}, u2 = {b}")));
            }
        }
        Ok(())
    }
}

/// Residuals of the three Euler conditions; failure is report content.
pub fn check_euler(c: &Candidate, tol: f64) -> EulerReport {
    let h = 2e-3;
    let mut lap: f64 = 0.0;
    for (xi, eta) in c.chart.grid(16) {
        for u in [&c.u1, &c.u2] {
            lap = lap.max(u.laplacian_fd(xi, eta, h).abs());
        }
    }
    let (mut neu, mut curv, mut at) = (0.0f64, 0.0f64, 0.0);
    for x in c.xi_samples(TRACE_SAMPLES) {
        let (j1, j2) = (c.trace(1, x), c.trace(2, x));
        neu = neu.max(j1.dy.abs()).max(j2.dy.abs());
        let r = (j2.dx * j2.dx - j1.dx * j1.dx - c.chart.curv(x)).abs();
        if r > curv {
            curv = r;
            at = x;
        }
    }
    EulerReport {
        laplacian: lap,
        neumann: neu,
        curvature: curv,
        curvature_at: at,
        tol,
        pass: lap <= tol && neu <= tol && curv <= tol,
    }
}
