//! First-order transport `a · ∇β = f`, `β(ξ, 0) = init(ξ)`, by characteristics,
//! and the flow maps `p`, `q` of a harmonic function's gradient lines.

use super::harmonic::HarmonicFunction;
use super::ode::{Dopri, OdeOptions};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::sync::Arc;

pub type Field2 = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
pub type Field1 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Trace = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Lazily evaluated transport solution. Point values come from re-integrating
/// the characteristic through the query point back to `η = 0`, so no
/// interpolation error enters; [`Bundle`] stores a forward sweep for dumps.
#[derive(Clone)]
pub struct TransportSolution {
    drift: Field2,
    source: Field1,
    init: Trace,
    /// Admissible ξ-range for characteristics.
    pub xi_range: (f64, f64),
    pub opts: OdeOptions,
}

/// Forward characteristics from a set of footpoints, sampled at η-levels.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub footpoints: Vec<f64>,
    pub etas: Vec<f64>,
    /// `xs[level][k]`: ξ-position of characteristic `k` at `etas[level]`.
    pub xs: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl TransportSolution {
    fn check_drift(&self, xi: f64, eta: f64) -> Result<[f64; 2]> {
        let a = (self.drift)(xi, eta);
        if !(a[1].abs() > 1e-300) || !a[0].is_finite() {
            return Err(Error::Characteristic { xi });
        }
        Ok(a)
    }

    /// `(footpoint, β)` at `(ξ, η)`.
    pub fn eval_with_foot(&self, xi: f64, eta: f64) -> Result<(f64, f64)> {
        self.check_drift(xi, eta)?;
        if eta == 0.0 {
            return Ok((xi, (self.init)(xi)));
        }
        let (lo, hi) = self.xi_range;
        let mut out_of_range = None;
        let sol = Dopri::<2>::new(self.opts).solve(
            |s, y| {
                let a = (self.drift)(y[0], s);
                if y[0] < lo || y[0] > hi {
                    out_of_range.get_or_insert(s);
                }
                [a[0] / a[1], (self.source)(y[0], s) / a[1]]
            },
            eta,
            [xi, 0.0],
            0.0,
        )?;
        if let Some(s) = out_of_range {
            return Err(Error::LeftStrip { eta: s });
        }
        Ok((sol[0], (self.init)(sol[0]) - sol[1]))
    }

    pub fn eval(&self, xi: f64, eta: f64) -> Result<f64> {
        Ok(self.eval_with_foot(xi, eta)?.1)
    }

    /// Forward sweep from `footpoints` to the sorted levels `etas` (all of one sign).
    pub fn bundle(&self, footpoints: &[f64], etas: &[f64]) -> Result<Bundle> {
        let mut xs = vec![Vec::with_capacity(footpoints.len()); etas.len()];
        let mut values = vec![Vec::with_capacity(footpoints.len()); etas.len()];
        let d = Dopri::<2>::new(self.opts);
        for &x0 in footpoints {
            self.check_drift(x0, 0.0)?;
            let mut f = |s: f64, y: &[f64; 2]| {
                let a = (self.drift)(y[0], s);
                [a[0] / a[1], (self.source)(y[0], s) / a[1]]
            };
            let ys = d.solve_at(&mut f, 0.0, [x0, (self.init)(x0)], etas)?;
            for (lvl, y) in ys.iter().enumerate() {
                xs[lvl].push(y[0]);
                values[lvl].push(y[1]);
            }
        }
        Ok(Bundle { footpoints: footpoints.to_vec(), etas: etas.to_vec(), xs, values })
    }
}

impl Bundle {
    /// Cubic Lagrange interpolation across neighbouring characteristics at a stored level.
    pub fn interp(&self, level: usize, xi: f64) -> f64 {
        let x = &self.xs[level];
        let v = &self.values[level];
        let n = x.len();
        if n < 4 {
            return v[0];
        }
        let k = x.partition_point(|&p| p < xi).clamp(2, n - 2);
        let idx = [k - 2, k - 1, k, k + 1];
        let mut out = 0.0;
        for &i in &idx {
            let mut l = 1.0;
            for &j in &idx {
                if i != j {
                    l *= (xi - x[j]) / (x[i] - x[j]);
                }
            }
            out += l * v[i];
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("footpoint,eta,xi,value\n");
        for (lvl, eta) in self.etas.iter().enumerate() {
            for (k, f) in self.footpoints.iter().enumerate() {
                let _ = writeln!(s, "{f},{eta},{},{}", self.xs[lvl][k], self.values[lvl][k]);
            }
        }
        s
    }
}

/// Solves `drift · ∇β = source` with `β(ξ, 0) = init(ξ)`.
pub fn solve_transport(drift: Field2, source: Field1, init: Trace, xi_range: (f64, f64)) -> TransportSolution {
    TransportSolution { drift, source, init, xi_range, opts: OdeOptions::tight() }
}

/// Gradient-line flow of a harmonic `w`: `∂_η p = (w_ξ / w_η)(p, η)`,
/// `p(ξ, 0) = ξ`, and its ξ-inverse `q`.
#[derive(Clone, Debug)]
pub struct FlowPQ {
    pub w: HarmonicFunction,
    pub xi_range: (f64, f64),
    pub halfwidth: f64,
    pub opts: OdeOptions,
}

impl FlowPQ {
    fn slope(&self, x: f64, s: f64) -> f64 {
        let g = self.w.grad(x, s);
        g[0] / g[1]
    }

    pub fn p(&self, xi: f64, eta: f64) -> Result<f64> {
        if eta == 0.0 {
            return Ok(xi);
        }
        Ok(Dopri::<1>::new(self.opts).solve(|s, y| [self.slope(y[0], s)], 0.0, [xi], eta)?[0])
    }

    /// `q` by backward integration of the same gradient line.
    pub fn q(&self, xi: f64, eta: f64) -> Result<f64> {
        if eta == 0.0 {
            return Ok(xi);
        }
        Ok(Dopri::<1>::new(self.opts).solve(|s, y| [self.slope(y[0], s)], eta, [xi], 0.0)?[0])
    }

    /// `q` by monotone bracketing and bisection on `p(·, η)`, to `1e-12`.
    pub fn q_bisect(&self, xi: f64, eta: f64) -> Result<f64> {
        let mut step = (eta.abs() * 4.0).max(1e-6);
        let (mut lo, mut hi) = (xi - step, xi + step);
        for _ in 0..60 {
            if self.p(lo, eta)? <= xi && self.p(hi, eta)? >= xi {
                break;
            }
            step *= 2.0;
            lo = xi - step;
            hi = xi + step;
        }
        if !(self.p(lo, eta)? <= xi && self.p(hi, eta)? >= xi) {
            return Err(Error::NonMonotoneFlow { eta });
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.p(mid, eta)? < xi {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Checks that `p(·, η)` increases on an `nx × ne` sample of the strip.
    pub fn check_monotone(&self, nx: usize, ne: usize) -> Result<()> {
        let (a, b) = self.xi_range;
        for j in 0..=ne {
            let eta = -self.halfwidth + 2.0 * self.halfwidth * j as f64 / ne as f64;
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=nx {
                let x = a + (b - a) * i as f64 / nx as f64;
                let p = self.p(x, eta)?;
                if p <= prev {
                    return Err(Error::NonMonotoneFlow { eta });
                }
                prev = p;
            }
        }
        Ok(())
    }
}

/// Builds the flow maps after checking `∂_η w > 0` on `η = 0`.
pub fn flow_pq(w: &HarmonicFunction, xi_range: (f64, f64), halfwidth: f64) -> Result<FlowPQ> {
    let (a, b) = xi_range;
    for i in 0..=256 {
        let x = a + (b - a) * i as f64 / 256.0;
        if w.grad(x, 0.0)[1] <= 0.0 {
            return Err(Error::Characteristic { xi: x });
        }
    }
    Ok(FlowPQ { w: w.clone(), xi_range, halfwidth, opts: OdeOptions::tight() })
}
