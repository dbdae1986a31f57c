//! The piecewise calibration field in chart coordinates.
//!
//! On each vertical line over `(ξ, η)` the field is polynomial in `z` between
//! region boundaries, so a [`Column`] stores it as a [`ZProfile`]. Building a
//! column costs one backward integration of the gradient line of `w` through
//! `(ξ, η)`: along that line `q` is constant, so `σ = c/n(q)` is known and both
//! transport equations for `β₁`, `β₂` reduce to quadratures.

use super::params::{CalibrationParams, Variant};
use super::riccati::RiccatiSolution;
use crate::analytic_kernel::{
    flow_pq, harmonic_from_cauchy, solve_transport, Cheb, Dopri, FlowPQ, HarmonicFunction, Jet, OdeOptions, Segment,
    TransportSolution, ZProfile,
};
use crate::euler_check::Candidate;
use crate::{Error, Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Deliberate defects for exercising the verifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tamper {
    /// Multiplies `μ` in `A₄` everywhere.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_scale: Option<f64>,
    /// Multiplies `μ` in `A₄` on a small disc.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dip: Option<Dip>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    pub xi: f64,
    pub eta: f64,
    pub radius: f64,
    pub mu_scale: f64,
}

impl Tamper {
    pub fn is_clean(&self) -> bool {
        self.mu_scale.is_none() && self.dip.is_none()
    }

    fn mu_factor(&self, xi: f64, eta: f64) -> f64 {
        let mut f = self.mu_scale.unwrap_or(1.0);
        if let Some(d) = self.dip {
            if (xi - d.xi).hypot(eta - d.eta) < d.radius {
                f *= d.mu_scale;
            }
        }
        f
    }
}

/// Region labels. `OUTSIDE_*` only occur in the graph variant, where the
/// extension field takes over.
pub mod region {
    pub const OUTSIDE_BELOW: u8 = 0;
    pub const A4: u8 = 4;
    pub const OUTSIDE_ABOVE: u8 = 8;
}

#[derive(Clone, Debug)]
pub struct CalibrationField {
    pub params: CalibrationParams,
    pub candidate: Candidate,
    pub riccati: RiccatiSolution,
    pub w: HarmonicFunction,
    pub flow: FlowPQ,
    /// ξ-range on which `n`, `w` and the flow are built; contains `[0, l]`.
    pub xi_range: (f64, f64),
    /// Halfwidth of the strip the field lives on.
    pub halfwidth: f64,
    pub tamper: Tamper,
}

/// The field over one base point.
#[derive(Clone, Debug)]
pub struct Column {
    pub xi: f64,
    pub eta: f64,
    pub u: [Jet; 2],
    /// `v₁`, `v₂` at this point.
    pub v: [f64; 2],
    pub q: f64,
    pub sigma: f64,
    pub grad_w: [f64; 2],
    pub beta: [f64; 2],
    pub omega: [f64; 2],
    pub gamma: f64,
    pub profile: ZProfile,
}

impl Column {
    /// `I(ξ, η, s, t)`.
    pub fn integral(&self, s: f64, t: f64) -> [f64; 2] {
        self.profile.integrate(s, t)
    }

    pub fn phi(&self, z: f64) -> [f64; 3] {
        self.profile.phi(z)
    }

    /// `I(ξ, η, u₁, u₂)`.
    pub fn jump_integral(&self) -> [f64; 2] {
        self.integral(self.u[0].v, self.u[1].v)
    }

    /// Segment of a given region, if present.
    pub fn segment(&self, region: u8) -> Option<&Segment> {
        self.profile.segs.iter().find(|s| s.region == region)
    }

    /// `z`-range where (d) is checked; outside it the field is vertical or absent.
    pub fn caps(&self) -> (f64, f64) {
        let s = &self.profile.segs;
        (s[0].hi, s[s.len() - 1].lo)
    }
}

/// `w` from its Cauchy data: `∂_η w(ξ, 0) = n(ξ)` and
/// `w(ξ, 0) = -(jε/c) ∫₀^ξ n (∂_ξu₁ + ∂_ξu₂)` with `j = 2` (Dirichlet) or `4` (graph).
/// Returns `w` and its gradient-line flow.
pub fn build_w_sigma(
    c: &Candidate,
    n: &Cheb,
    params: &CalibrationParams,
    xi_range: (f64, f64),
    halfwidth: f64,
) -> Result<(HarmonicFunction, FlowPQ)> {
    let j = if params.variant == Variant::Dirichlet { 2.0 } else { 4.0 };
    let k = -j * params.eps / params.prefactor;
    let (a, b) = xi_range;
    let nodes = (2 * n.coeffs.len()).clamp(64, 512);
    let integrand = Cheb::fit(|x| n.eval(x) * (c.trace(1, x).dx + c.trace(2, x).dx), a, b, nodes);
    let prim = integrand.integral(0.0);
    let w = harmonic_from_cauchy(&|x| k * prim.eval(x), &|x| n.eval(x), xi_range, halfwidth, nodes)?;
    let flow = flow_pq(&w, xi_range, halfwidth)?;
    Ok((w, flow))
}

impl CalibrationField {
    /// Assembles the field for fixed parameters and `n`. No verification.
    pub fn new(
        candidate: &Candidate,
        params: CalibrationParams,
        riccati: RiccatiSolution,
        xi_range: (f64, f64),
        halfwidth: f64,
    ) -> Result<Self> {
        params.check()?;
        let (w, flow) = build_w_sigma(candidate, &riccati.n, &params, xi_range, halfwidth)?;
        Ok(CalibrationField {
            params,
            candidate: candidate.clone().with_halfwidth(candidate.chart.halfwidth),
            riccati,
            w,
            flow,
            xi_range,
            halfwidth,
            tamper: Tamper::default(),
        })
    }

    pub fn with_tamper(mut self, t: Tamper) -> Self {
        self.tamper = t;
        self
    }

    pub fn variant(&self) -> Variant {
        self.params.variant
    }

    pub fn n(&self, xi: f64) -> f64 {
        self.riccati.n.eval(xi)
    }

    /// `v₁, v₂` and, for the graph variant, `ṽ₁, ṽ₂`.
    fn weights(&self, eta: f64) -> ([f64; 2], [f64; 2]) {
        let p = &self.params;
        match p.variant {
            Variant::Dirichlet => ([p.eps + p.m * eta, p.eps - p.m * eta], [0.0; 2]),
            Variant::Graph => {
                let mp = p.m_prime.unwrap_or(0.0);
                ([1.0 + p.m * eta, 1.0 - p.m * eta], [2.0 * p.eps + mp * eta, 2.0 * p.eps - mp * eta])
            }
        }
    }

    /// `ω₁, ω₂` at a point with known gradients of `u₁, u₂`.
    fn omegas(&self, eta: f64, g: [[f64; 2]; 2]) -> [f64; 2] {
        let p = &self.params;
        let (v, vt) = self.weights(eta);
        let mp = p.m_prime.unwrap_or(0.0);
        [0, 1].map(|i| {
            let head = match p.variant {
                Variant::Dirichlet => (p.eps * p.m / v[i]).powi(2),
                Variant::Graph => (p.eps * (p.m + mp * (2.0 - v[i]) / vt[i])).powi(2),
            };
            head - g[i][0] * g[i][0] - g[i][1] * g[i][1]
        })
    }

    pub fn omega(&self, xi: f64, eta: f64) -> [f64; 2] {
        let g = [self.candidate.u1.grad(xi, eta), self.candidate.u2.grad(xi, eta)];
        self.omegas(eta, g)
    }

    /// Backward integration of the gradient line through `(ξ, η)`:
    /// returns `q`, and `J₁`, `J₂` with `β_i = mid(q) - J_i n(q)/c`.
    fn characteristic(&self, xi: f64, eta: f64) -> Result<[f64; 3]> {
        if eta == 0.0 {
            return Ok([xi, 0.0, 0.0]);
        }
        let p = &self.params;
        let (lo, hi) = self.xi_range;
        let mut left = None;
        let y = Dopri::<3>::new(OdeOptions::tight()).solve(
            |s, y| {
                let x = y[0];
                if !(lo..=hi).contains(&x) {
                    left.get_or_insert(s);
                }
                let gw = self.w.grad(x, s);
                let om = self.omega(x, s);
                [gw[0] / gw[1], (p.mu - om[0]) / (p.lambda * gw[1]), (p.mu - om[1]) / (p.lambda * gw[1])]
            },
            eta,
            [xi, 0.0, 0.0],
            0.0,
        )?;
        if let Some(s) = left {
            return Err(Error::LeftStrip { eta: s });
        }
        Ok(y)
    }

    /// `q(ξ, η)` and `σ(ξ, η) = c / n(q)`.
    pub fn q_sigma(&self, xi: f64, eta: f64) -> Result<(f64, f64)> {
        let q = self.characteristic(xi, eta)?[0];
        Ok((q, self.params.prefactor / self.n(q)))
    }

    fn mid(&self, xi: f64) -> f64 {
        0.5 * (self.candidate.u1.value(xi, 0.0) + self.candidate.u2.value(xi, 0.0))
    }

    pub fn beta(&self, xi: f64, eta: f64) -> Result<[f64; 2]> {
        let [q, j1, j2] = self.characteristic(xi, eta)?;
        let k = self.n(q) / self.params.prefactor;
        Ok([self.mid(q) - j1 * k, self.mid(q) - j2 * k])
    }

    /// `β_i` through the generic transport solver with drift `λσ∇w`, `σ` from
    /// the flow map. Independent of [`CalibrationField::beta`]; used as a cross-check.
    pub fn beta_transport(&self, i: usize) -> TransportSolution {
        let me = Arc::new(self.clone());
        let (a, b, c) = (me.clone(), me.clone(), me.clone());
        solve_transport(
            Arc::new(move |x, y| {
                let q = a.flow.q(x, y).unwrap_or(f64::NAN);
                let s = a.params.prefactor / a.n(q);
                let g = a.w.grad(x, y);
                [a.params.lambda * s * g[0], a.params.lambda * s * g[1]]
            }),
            Arc::new(move |x, y| b.params.mu - b.omega(x, y)[i - 1]),
            Arc::new(move |x| c.mid(x)),
            self.xi_range,
        )
    }

    /// Builds the column over `(ξ, η)`.
    pub fn column(&self, xi: f64, eta: f64) -> Result<Column> {
        let p = &self.params;
        let c = &self.candidate;
        let u = [c.u1.jet(xi, eta), c.u2.jet(xi, eta)];
        let [q, j1, j2] = self.characteristic(xi, eta)?;
        let nq = self.n(q);
        let sigma = p.prefactor / nq;
        let mid = self.mid(q);
        let beta = [mid - j1 * nq / p.prefactor, mid - j2 * nq / p.prefactor];
        let grad_w = self.w.grad(xi, eta);
        let omega = self.omegas(eta, [u[0].grad(), u[1].grad()]);
        let (v, vt) = self.weights(eta);
        let mu = p.mu * self.tamper.mu_factor(xi, eta);
        let a4 = {
            let (gx, ge) = (p.lambda * sigma * grad_w[0], p.lambda * sigma * grad_w[1]);
            move |lo: f64, hi: f64| Segment { lo, hi, region: 4, zref: 0.0, xi: [gx, 0.0], eta: [ge, 0.0], z: [mu, 0.0, 0.0] }
        };
        // 2G + 2 d g, |G + d g|² with d = z - zref
        let affine = |lo: f64, hi: f64, region: u8, zref: f64, big: [f64; 2], g: [f64; 2]| Segment {
            lo,
            hi,
            region,
            zref,
            xi: [2.0 * big[0], 2.0 * g[0]],
            eta: [2.0 * big[1], 2.0 * g[1]],
            z: [big[0] * big[0] + big[1] * big[1], 2.0 * (big[0] * g[0] + big[1] * g[1]), g[0] * g[0] + g[1] * g[1]],
        };
        let (u1, u2) = (u[0].v, u[1].v);
        let top = beta[1] + 1.0 / p.lambda;
        let segs = match p.variant {
            Variant::Dirichlet => {
                let e = p.eps;
                let g1 = [0.0, p.m / v[0]];
                let g2 = [0.0, -p.m / v[1]];
                let b = [u1 - e, u1 + e, beta[0], top, u2 - e, u2 + e];
                check_order(&b, xi, eta)?;
                if !(v[0] > 0.0 && v[1] > 0.0) {
                    return Err(Error::Parameter(format!("v_i vanishes at ({xi}, {eta})")));
                }
                vec![
                    Segment::vertical(f64::NEG_INFINITY, b[0], 1, omega[0]),
                    affine(b[0], b[1], 2, u1, u[0].grad(), g1),
                    Segment::vertical(b[1], b[2], 3, omega[0]),
                    a4(b[2], b[3]),
                    Segment::vertical(b[3], b[4], 5, omega[1]),
                    affine(b[4], b[5], 6, u2, u[1].grad(), g2),
                    Segment::vertical(b[5], f64::INFINITY, 7, omega[1]),
                ]
            }
            Variant::Graph => {
                let e = p.eps;
                let mp = p.m_prime.unwrap_or(0.0);
                if !(v[0] > 0.0 && v[1] > 0.0 && vt[0] > 0.0 && vt[1] > 0.0) {
                    return Err(Error::Parameter(format!("v_i or v~_i vanishes at ({xi}, {eta})")));
                }
                let g1 = [0.0, p.m / v[0]];
                let g2 = [0.0, -p.m / v[1]];
                let gt1 = [0.0, mp / vt[0]];
                let gt2 = [0.0, -mp / vt[1]];
                let (gu1, gu2) = (u[0].grad(), u[1].grad());
                let big1 = [gu1[0], gu1[1] + e * p.m];
                let big2 = [gu2[0], gu2[1] + e * p.m];
                let b = [
                    u1 - e * v[0],
                    u1 + e * v[0],
                    u1 + 2.0 * e,
                    beta[0],
                    top,
                    u2 - 2.0 * e,
                    u2 - e * v[1],
                    u2 + e * v[1],
                ];
                check_order(&b, xi, eta)?;
                vec![
                    Segment::vertical(f64::NEG_INFINITY, b[0], region::OUTSIDE_BELOW, 0.0),
                    affine(b[0], b[1], 1, u1, gu1, g1),
                    affine(b[1], b[2], 2, b[1], big1, gt1),
                    Segment::vertical(b[2], b[3], 3, omega[0]),
                    a4(b[3], b[4]),
                    Segment::vertical(b[4], b[5], 5, omega[1]),
                    affine(b[5], b[6], 6, b[6], big2, gt2),
                    affine(b[6], b[7], 7, u2, gu2, g2),
                    Segment::vertical(b[7], f64::INFINITY, region::OUTSIDE_ABOVE, 0.0),
                ]
            }
        };
        Ok(Column {
            xi,
            eta,
            u,
            v,
            q,
            sigma,
            grad_w,
            beta,
            omega,
            gamma: c.chart.gamma(xi, eta),
            profile: ZProfile::new(segs),
        })
    }

    /// Parameters, constants and sampled region boundaries.
    pub fn manifest(&self) -> FieldManifest {
        let l = self.candidate.length();
        let mut samples = Vec::new();
        for i in 0..=4 {
            let xi = l * i as f64 / 4.0;
            for eta in [-0.5 * self.halfwidth, 0.0, 0.5 * self.halfwidth] {
                let boundaries = match self.column(xi, eta) {
                    Ok(c) => c.profile.boundaries(),
                    Err(_) => Vec::new(),
                };
                samples.push(BoundarySample { xi, eta, boundaries });
            }
        }
        FieldManifest {
            schema_version: SCHEMA_VERSION.into(),
            candidate: self.candidate.name.clone(),
            shift: self.candidate.shift,
            params: self.params.clone(),
            halfwidth: self.halfwidth,
            xi_range: self.xi_range,
            riccati_exact: self.riccati.exact,
            sup_tau: self.riccati.sup_tau,
            tau_bound: self.riccati.bound,
            n_coefficients: self.riccati.n.coeffs.len(),
            tamper: self.tamper,
            boundaries: samples,
        }
    }
}

fn check_order(b: &[f64], xi: f64, eta: f64) -> Result<()> {
    for k in 1..b.len() {
        if !(b[k] > b[k - 1]) {
            return Err(Error::Parameter(format!(
                "regions {k} and {} overlap at ({xi}, {eta}): {} >= {}",
                k + 1,
                b[k - 1],
                b[k]
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub xi: f64,
    pub eta: f64,
    pub boundaries: Vec<f64>,
}

/// Reproducibility record of an assembled field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldManifest {
    pub schema_version: String,
    pub candidate: String,
    pub shift: f64,
    pub params: CalibrationParams,
    pub halfwidth: f64,
    pub xi_range: (f64, f64),
    pub riccati_exact: bool,
    pub sup_tau: f64,
    pub tau_bound: f64,
    pub n_coefficients: usize,
    #[serde(default, skip_serializing_if = "Tamper::is_clean")]
    pub tamper: Tamper,
    pub boundaries: Vec<BoundarySample>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration_builder::{build_field, initial_halfwidth, select_parameters};
    use crate::fixtures;

    fn field(name: &str) -> CalibrationField {
        let c = fixtures::build_candidate(&fixtures::by_name(name).unwrap()).unwrap();
        let p = select_parameters(&c, Variant::Dirichlet, 0.1 * c.min_gap(), None).unwrap();
        let h = initial_halfwidth(&c, &p);
        build_field(&c, p, h).unwrap()
    }

    fn d_eta(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
        (8.0 * (f(0.5 * h) - f(-0.5 * h)) - (f(h) - f(-h))) / (6.0 * h)
    }

    #[test]
    fn beta_starts_at_the_mid_trace() {
        let f = field("circle_arc");
        for xi in [0.0, 0.3, 1.0] {
            let c = f.column(xi, 0.0).unwrap();
            let mid = 0.5 * (c.u[0].v + c.u[1].v);
            assert_eq!(c.beta, [mid, mid]);
        }
    }

    #[test]
    fn beta_matches_generic_transport() {
        let f = field("circle_arc");
        let t = [f.beta_transport(1), f.beta_transport(2)];
        for (xi, eta) in [(0.2, 0.004), (0.5, -0.003), (0.9, 0.0045)] {
            let b = f.beta(xi, eta).unwrap();
            for i in 0..2 {
                assert!((b[i] - t[i].eval(xi, eta).unwrap()).abs() < 1e-8, "{xi} {eta} {i}");
            }
        }
    }

    #[test]
    fn beta_split_gives_curvature() {
        let f = field("circle_arc");
        let h = 1e-2 * f.halfwidth;
        for xi in [0.1, 0.5, 0.8] {
            let db = d_eta(&|e| f.beta(xi, e).map(|b| b[1] - b[0]).unwrap(), h);
            let (_, sigma) = f.q_sigma(xi, 0.0).unwrap();
            let v = f.params.lambda * db * sigma * f.w.grad(xi, 0.0)[1];
            assert!((v - f.candidate.chart.curv(xi)).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn sigma_w_trace_data() {
        let f = field("circle_arc");
        let (eps, l) = (f.params.eps, f.candidate.length());
        for xi in [0.0, 0.25, 0.7, l] {
            let (_, sigma) = f.q_sigma(xi, 0.0).unwrap();
            let a = f.candidate.trace(1, xi).dx + f.candidate.trace(2, xi).dx;
            assert!((sigma * f.w.grad(xi, 0.0)[0] + 2.0 * eps * a).abs() < 1e-8);
        }
        let pure = field("pure_jump_line");
        for xi in [0.0, 0.5, 1.0] {
            assert!(pure.w.value(xi, 0.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_grad_w_is_divergence_free() {
        let f = field("circle_arc");
        let h = 1e-2 * f.halfwidth;
        let flux = |x: f64, e: f64, i: usize| {
            let (_, s) = f.q_sigma(x, e).unwrap();
            s * f.w.grad(x, e)[i]
        };
        for (xi, eta) in [(0.3, 0.002), (0.6, -0.004)] {
            let div = d_eta(&|d| flux(xi + d, eta, 0), h) + d_eta(&|d| flux(xi, eta + d, 1), h);
            assert!(div.abs() < 1e-6, "{div}");
        }
    }

    #[test]
    fn regions_are_ordered_on_the_curve() {
        for name in ["pure_jump_line", "circle_arc"] {
            let f = field(name);
            let c = f.column(0.4, 0.0).unwrap();
            let b = c.profile.boundaries();
            assert!(b.windows(2).all(|w| w[0] < w[1]));
            assert!(c.u[0].v + f.params.eps < c.beta[0] && c.beta[1] + 1.0 / f.params.lambda < c.u[1].v - f.params.eps);
        }
    }

    #[test]
    fn jump_integral_on_the_curve() {
        let f = field("circle_arc");
        for xi in [0.0, 0.5, 1.0] {
            let i = f.column(xi, 0.0).unwrap().jump_integral();
            assert!(i[0].abs() < 1e-8 && (i[1] - 1.0).abs() < 1e-8, "{i:?}");
        }
    }

    #[test]
    fn saturation_beyond_the_caps() {
        let f = field("circle_arc");
        let c = f.column(0.3, 0.002).unwrap();
        let (lo, hi) = c.caps();
        let a = c.integral(lo + 0.1, hi);
        for t in [hi + 0.5, hi + 3.0] {
            assert_eq!(c.integral(lo + 0.1, t), a);
        }
        assert_eq!(c.integral(lo - 2.0, lo + 0.1), c.integral(lo, lo + 0.1));
    }

    #[test]
    fn manifest_records_boundaries() {
        let f = field("pure_jump_line");
        let m = f.manifest();
        assert_eq!(m.boundaries.len(), 15);
        assert!(m.boundaries.iter().all(|s| s.boundaries.len() == 6));
        let back: FieldManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
