//! Sampled verification of the calibration conditions (a)-(e) and of the
//! derivative identities of the jump integral at `η = 0`.
//!
//! All conditions are read in chart coordinates: with `φ = (φ^ξ, φ^η, φ^z)`
//! written in the orthonormal frame `(τ_ξ, τ_η)` scaled by `γ`,
//!
//! - (a) `∂_ξφ^ξ + ∂_ηφ^η + ∂_zφ^z = 0` inside each region, and the normal
//!   component is continuous across each region boundary `z = b(ξ, η)`;
//! - (b) `|φ^{ξη}|² ≤ 4φ^z`;
//! - (c) `φ^{ξη} = 2∇u_i`, `φ^z = |∇u_i|²` on `z = u_i`;
//! - (d) `|I(ξ, η, s, t)|² ≤ γ²(ξ, η)`;
//! - (e) `I(ξ, 0, u₁, u₂) = (0, 1)`.
//!
//! Between sample points nothing is certified.

use crate::calibration_builder::field::{region, CalibrationField, Column};
use crate::calibration_builder::params::Variant;
use crate::par::{self, Exec};
use crate::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative divergence residual inside regions.
    pub divergence: f64,
    /// Relative jump of the normal component across region boundaries.
    pub interface: f64,
    /// Relative residual of (b) where it holds with equality by construction.
    pub saturation: f64,
    pub graph: f64,
    pub jump: f64,
    /// `γ² - |I|² ≥ -equality` counts as satisfied.
    pub equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { divergence: 1e-6, interface: 1e-8, saturation: 1e-10, graph: 1e-8, jump: 1e-8, equality: 1e-13 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Base points per direction; even, so `η = 0` is not on the grid.
    pub grid: usize,
    /// Uniform `s`, `t` samples per base point before local refinement.
    pub st_samples: usize,
    pub tol: Tolerances,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { grid: 64, st_samples: 64, tol: Tolerances::default(), exec: Exec::Parallel }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub xi: f64,
    pub eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub st: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<u8>,
}

impl Witness {
    fn at(xi: f64, eta: f64) -> Self {
        Witness { xi, eta, ..Default::default() }
    }
}

/// Worst margin of one condition. Pass iff `margin ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub name: String,
    pub margin: f64,
    pub pass: bool,
    pub witness: Witness,
}

/// `I(ξ, η, u₁, u₂) = ρ (sin θ, cos θ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpDiagnostics {
    /// `min (γ - ρ)` over the grid.
    pub min_gamma_minus_rho: f64,
    pub max_abs_theta: f64,
    /// `max |θ| / (N |η|)`; the angle bound holds when below 1.
    pub angle_ratio: f64,
    pub angle_bound: bool,
    pub worst_angle: Witness,
}

/// Margins at one base point; the rows of the CSV dump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMargins {
    pub xi: f64,
    pub eta: f64,
    pub divergence: f64,
    pub interface: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub rho: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: String,
    pub candidate: String,
    pub variant: Variant,
    pub eps: f64,
    pub halfwidth: f64,
    pub grid: usize,
    pub st_samples: usize,
    pub tol: Tolerances,
    /// Conditions (a)-(e) in order.
    pub conditions: Vec<ConditionResult>,
    pub interior_residual: f64,
    pub interface_residual: f64,
    /// Base points where the column could not be built.
    pub build_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_build_failure: Option<String>,
    pub jump: JumpDiagnostics,
    pub pass: bool,
    #[serde(skip)]
    pub points: Vec<PointMargins>,
}

impl VerificationReport {
    pub fn condition(&self, name: &str) -> &ConditionResult {
        self.conditions.iter().find(|c| c.name == name).expect("known condition")
    }

    /// Failing condition with the smallest margin, or a build failure.
    pub fn worst(&self) -> Option<&ConditionResult> {
        self.conditions.iter().filter(|c| !c.pass).min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("xi,eta,divergence,interface,b,c,d,rho,theta\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{:e},{:e},{:e},{},{}",
                p.xi, p.eta, p.divergence, p.interface, p.b, p.c, p.d, p.rho, p.theta
            );
        }
        s
    }
}

/// Base points `[0, l] × (-0.99 H, 0.99 H)`, ξ-major.
pub fn base_grid(field: &CalibrationField, n: usize) -> Vec<(f64, f64)> {
    let l = field.candidate.length();
    let m = n.max(2) - 1;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..=m {
        for j in 0..=m {
            let eta = 0.99 * field.halfwidth * (2.0 * j as f64 / m as f64 - 1.0);
            out.push((l * i as f64 / m as f64, eta));
        }
    }
    out
}

/// Regions where (b) holds with equality.
fn saturated(variant: Variant, r: u8) -> bool {
    match variant {
        Variant::Dirichlet => r == 2 || r == 6,
        Variant::Graph => matches!(r, 1 | 2 | 6 | 7),
    }
}

fn outside(variant: Variant, r: u8) -> bool {
    variant == Variant::Graph && (r == region::OUTSIDE_BELOW || r == region::OUTSIDE_ABOVE)
}

fn norm_inf(v: [f64; 3]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `(4 D(h/2) - D(h))/3` with central `D`.
fn richardson_d1(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn richardson_d2(f: &dyn Fn(f64) -> f64, h: f64) -> f64 {
    let f0 = f(0.0);
    let d = |h: f64| (f(h) - 2.0 * f0 + f(-h)) / (h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

struct Stencil {
    /// `[ξ+h, ξ-h, ξ+h/2, ξ-h/2]` then the same in η.
    cols: Vec<Column>,
    h: f64,
}

impl Stencil {
    fn d(&self, axis: usize, f: &dyn Fn(&Column) -> f64) -> f64 {
        let o = 4 * axis;
        let d1 = (f(&self.cols[o]) - f(&self.cols[o + 1])) / (2.0 * self.h);
        let d2 = (f(&self.cols[o + 2]) - f(&self.cols[o + 3])) / self.h;
        (4.0 * d2 - d1) / 3.0
    }
}

#[derive(Clone, Debug)]
struct PointResult {
    xi: f64,
    eta: f64,
    failure: Option<String>,
    div: (f64, Witness),
    iface: (f64, Witness),
    b: (f64, Witness),
    c: (f64, Witness),
    d: (f64, Witness),
    rho: f64,
    theta: f64,
    gamma: f64,
}

/// `s`, `t` samples: a uniform lattice over the capped range, the region
/// boundaries, and a refined cluster around `u₁` and `u₂`.
fn st_lattice(col: &Column, n: usize, eps: f64) -> Vec<f64> {
    let (lo, hi) = col.caps();
    let mut pts: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    pts.extend(col.profile.boundaries().into_iter().filter(|b| (lo..=hi).contains(b)));
    for u in [col.u[0].v, col.u[1].v] {
        for j in -8..=8 {
            let p = u + eps * j as f64 / 8.0;
            if (lo..=hi).contains(&p) {
                pts.push(p);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn check_point(field: &CalibrationField, xi: f64, eta: f64, opts: &VerifyOptions) -> PointResult {
    let variant = field.variant();
    let tol = &opts.tol;
    let mut r = PointResult {
        xi,
        eta,
        failure: None,
        div: (0.0, Witness::at(xi, eta)),
        iface: (0.0, Witness::at(xi, eta)),
        b: (f64::INFINITY, Witness::at(xi, eta)),
        c: (0.0, Witness::at(xi, eta)),
        d: (f64::INFINITY, Witness::at(xi, eta)),
        rho: f64::NAN,
        theta: f64::NAN,
        gamma: f64::NAN,
    };
    let h = 1e-2 * field.halfwidth;
    let build = || -> crate::Result<(Column, Stencil)> {
        let col = field.column(xi, eta)?;
        let mut cols = Vec::with_capacity(8);
        for (dx, de) in [(h, 0.0), (-h, 0.0), (0.5 * h, 0.0), (-0.5 * h, 0.0)] {
            cols.push(field.column(xi + dx, eta + de)?);
        }
        for (dx, de) in [(0.0, h), (0.0, -h), (0.0, 0.5 * h), (0.0, -0.5 * h)] {
            cols.push(field.column(xi + dx, eta + de)?);
        }
        Ok((col, Stencil { cols, h }))
    };
    let (col, st) = match build() {
        Ok(v) => v,
        Err(e) => {
            r.failure = Some(format!("({xi}, {eta}): {e}"));
            return r;
        }
    };
    r.gamma = col.gamma;
    let segs = &col.profile.segs;

    // (a) inside each region, at its midpoint
    for (k, s) in segs.iter().enumerate() {
        if outside(variant, s.region) {
            continue;
        }
        let z = match (s.lo.is_finite(), s.hi.is_finite()) {
            (true, true) => 0.5 * (s.lo + s.hi),
            (true, false) => s.lo + 1.0,
            (false, true) => s.hi - 1.0,
            _ => 0.0,
        };
        let comp = |c: &Column, i: usize| c.profile.segs[k].phi(z)[i];
        let d = s.z[1] + 2.0 * s.z[2] * (z - s.zref);
        let div = st.d(0, &|c| comp(c, 0)) + st.d(1, &|c| comp(c, 1)) + d;
        let rel = div.abs() / (1.0 + norm_inf(s.phi(z)));
        if rel > r.div.0 {
            r.div = (rel, Witness { z: Some(z), region: Some(s.region), ..Witness::at(xi, eta) });
        }
    }
    // (a) across each boundary z = b(ξ, η)
    for k in 1..segs.len() {
        let (lo, up) = (&segs[k - 1], &segs[k]);
        if outside(variant, lo.region) || outside(variant, up.region) {
            continue;
        }
        let b = up.lo;
        let gb = [st.d(0, &|c| c.profile.segs[k].lo), st.d(1, &|c| c.profile.segs[k].lo)];
        let (pl, pu) = (lo.phi(b), up.phi(b));
        let jump = (pu[2] - pl[2]) - gb[0] * (pu[0] - pl[0]) - gb[1] * (pu[1] - pl[1]);
        let rel = jump.abs() / (1.0 + norm_inf(pl).max(norm_inf(pu)));
        if rel > r.iface.0 {
            r.iface = (rel, Witness { z: Some(b), region: Some(up.region), ..Witness::at(xi, eta) });
        }
    }
    // (b)
    for s in segs {
        if outside(variant, s.region) {
            continue;
        }
        let zs: Vec<f64> = match (s.lo.is_finite(), s.hi.is_finite()) {
            (true, true) => vec![s.lo, 0.5 * (s.lo + s.hi), s.hi],
            (true, false) => vec![s.lo],
            (false, true) => vec![s.hi],
            _ => vec![0.0],
        };
        for z in zs {
            let p = s.phi(z);
            let gap = 4.0 * p[2] - p[0] * p[0] - p[1] * p[1];
            let m = if saturated(variant, s.region) {
                tol.saturation - gap.abs() / (1.0 + 4.0 * p[2].abs())
            } else {
                gap
            };
            if m < r.b.0 {
                r.b = (m, Witness { z: Some(z), region: Some(s.region), ..Witness::at(xi, eta) });
            }
        }
    }
    // (c)
    for u in &col.u {
        let p = col.phi(u.v);
        let g = u.grad();
        let err = (p[0] - 2.0 * g[0]).abs().max((p[1] - 2.0 * g[1]).abs()).max((p[2] - g[0] * g[0] - g[1] * g[1]).abs());
        if err > r.c.0 {
            r.c = (err, Witness { z: Some(u.v), region: Some(segs[col.profile.locate(u.v)].region), ..Witness::at(xi, eta) });
        }
    }
    // (d)
    let g2 = col.gamma * col.gamma;
    let pts = st_lattice(&col, opts.st_samples, field.params.eps);
    let prim: Vec<[f64; 2]> = pts.iter().map(|&z| col.profile.primitive(z)).collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let v = [prim[j][0] - prim[i][0], prim[j][1] - prim[i][1]];
            let m = g2 - v[0] * v[0] - v[1] * v[1];
            if m < r.d.0 {
                r.d = (m, Witness { st: Some((pts[i], pts[j])), ..Witness::at(xi, eta) });
            }
        }
    }
    let ij = col.jump_integral();
    r.rho = ij[0].hypot(ij[1]);
    r.theta = ij[0].atan2(ij[1]);
    r
}

/// (e) along `η = 0`: `max |I(ξ, 0, u₁, u₂) - (0, 1)|`.
fn check_jump_trace(field: &CalibrationField, n: usize, exec: Exec) -> (f64, Witness, Option<String>) {
    let l = field.candidate.length();
    let rows = par::map_indexed(exec, n, |i| {
        let xi = l * i as f64 / (n - 1) as f64;
        field.column(xi, 0.0).map(|c| {
            let v = c.jump_integral();
            (v[0].abs().max((v[1] - 1.0).abs()), xi)
        })
    });
    let mut worst = (0.0, Witness::at(0.0, 0.0), None);
    for row in rows {
        match row {
            Ok((e, xi)) if e > worst.0 => worst = (e, Witness::at(xi, 0.0), worst.2),
            Ok(_) => {}
            Err(e) => {
                worst.2.get_or_insert_with(|| e.to_string());
            }
        }
    }
    worst
}

/// Checks (a)-(e) on the base grid. Never fails; every problem is report content.
pub fn verify_field(field: &CalibrationField, opts: &VerifyOptions) -> VerificationReport {
    let grid = base_grid(field, opts.grid);
    let rows = par::map_slice(opts.exec, &grid, |&(xi, eta)| check_point(field, xi, eta, opts));
    let tol = opts.tol;
    let mut div = (0.0, Witness::default());
    let mut iface = (0.0, Witness::default());
    let mut b = (f64::INFINITY, Witness::default());
    let mut c = (0.0, Witness::default());
    let mut d = (f64::INFINITY, Witness::default());
    let mut failures = 0;
    let mut first_failure = None;
    let n_big = field.params.constants.n_big;
    let mut jump = JumpDiagnostics {
        min_gamma_minus_rho: f64::INFINITY,
        max_abs_theta: 0.0,
        angle_ratio: 0.0,
        angle_bound: true,
        worst_angle: Witness::default(),
    };
    let mut points = Vec::with_capacity(rows.len());
    for r in rows {
        if let Some(f) = r.failure {
            failures += 1;
            first_failure.get_or_insert(f);
            continue;
        }
        let upd_max = |acc: &mut (f64, Witness), v: &(f64, Witness)| {
            if v.0 > acc.0 {
                *acc = *v;
            }
        };
        let upd_min = |acc: &mut (f64, Witness), v: &(f64, Witness)| {
            if v.0 < acc.0 {
                *acc = *v;
            }
        };
        upd_max(&mut div, &r.div);
        upd_max(&mut iface, &r.iface);
        upd_min(&mut b, &r.b);
        upd_max(&mut c, &r.c);
        upd_min(&mut d, &r.d);
        jump.min_gamma_minus_rho = jump.min_gamma_minus_rho.min(r.gamma - r.rho);
        jump.max_abs_theta = jump.max_abs_theta.max(r.theta.abs());
        let ratio = r.theta.abs() / (n_big * r.eta.abs());
        if ratio > jump.angle_ratio {
            jump.angle_ratio = ratio;
            jump.worst_angle = Witness::at(r.xi, r.eta);
        }
        points.push(PointMargins {
            xi: r.xi,
            eta: r.eta,
            divergence: r.div.0,
            interface: r.iface.0,
            b: r.b.0,
            c: r.c.0,
            d: r.d.0,
            rho: r.rho,
            theta: r.theta,
        });
    }
    jump.angle_bound = jump.angle_ratio < 1.0;
    let (e, e_wit, e_fail) = check_jump_trace(field, opts.grid, opts.exec);
    if let Some(f) = e_fail {
        failures += 1;
        first_failure.get_or_insert(f);
    }
    // (a) reports the worse of the two residuals against its own tolerance
    let a = if tol.divergence - div.0 <= tol.interface - iface.0 {
        (tol.divergence - div.0, div.1)
    } else {
        (tol.interface - iface.0, iface.1)
    };
    let cond = |name: &str, margin: f64, witness: Witness| ConditionResult {
        name: name.into(),
        margin,
        pass: margin >= 0.0 && failures == 0,
        witness,
    };
    let conditions = vec![
        cond("a", a.0, a.1),
        cond("b", b.0, b.1),
        cond("c", tol.graph - c.0, c.1),
        cond("d", d.0 + tol.equality, d.1),
        cond("e", tol.jump - e, e_wit),
    ];
    let pass = failures == 0 && conditions.iter().all(|c| c.pass);
    VerificationReport {
        schema_version: SCHEMA_VERSION.into(),
        candidate: field.candidate.name.clone(),
        variant: field.variant(),
        eps: field.params.eps,
        halfwidth: field.halfwidth,
        grid: opts.grid,
        st_samples: opts.st_samples,
        tol,
        conditions,
        interior_residual: div.0,
        interface_residual: iface.0,
        build_failures: failures,
        first_build_failure: first_failure,
        jump,
        pass,
        points,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identity {
    pub name: String,
    /// Largest deviation over the ξ samples.
    pub error: f64,
    pub tol: f64,
    pub at: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub step: f64,
    pub identities: Vec<Identity>,
    pub pass: bool,
}

/// Identities at `η = 0` by central differences in `η` with Richardson
/// extrapolation:
/// `∂_η|∇ξ|² = -2 curv`, `∂²_ηη|∇ξ|² = 4 curv²`, `∂_ηγ = curv`,
/// `∂_ηρ = curv`, `∂²_ηη(ρ - γ) = -π²/(16 l²)`.
/// The last one only holds when `n` was built with the exact coefficients.
pub fn derivative_identities(field: &CalibrationField, samples: usize, exec: Exec) -> IdentityReport {
    let chart = &field.candidate.chart;
    let l = field.candidate.length();
    let h = (1e-3 * chart.halfwidth).min(0.25 * field.halfwidth);
    let target = -PI * PI / (16.0 * l * l);
    let xs: Vec<f64> = (0..samples).map(|i| l * (i as f64 + 0.5) / samples as f64).collect();
    let names = ["d_eta |grad xi|^2", "d2_eta |grad xi|^2", "d_eta gamma", "d_eta rho", "d2_eta (rho - gamma)"];
    let tols = [1e-4, 1e-4, 1e-4, 1e-4, 1e-3];
    let rows = par::map_slice(exec, &xs, |&xi| {
        let k = chart.curv(xi);
        let inv = |e: f64| chart.gamma(xi, e).powi(-2);
        let gam = |e: f64| chart.gamma(xi, e);
        let rho = |e: f64| {
            field
                .column(xi, e)
                .map(|c| {
                    let v = c.jump_integral();
                    v[0].hypot(v[1])
                })
                .unwrap_or(f64::NAN)
        };
        let diff = |e: f64| rho(e) - gam(e);
        [
            (richardson_d1(&inv, h) + 2.0 * k).abs(),
            (richardson_d2(&inv, h) - 4.0 * k * k).abs(),
            (richardson_d1(&gam, h) - k).abs(),
            (richardson_d1(&rho, h) - k).abs(),
            (richardson_d2(&diff, h) - target).abs(),
        ]
    });
    let identities: Vec<Identity> = (0..5)
        .map(|j| {
            let (error, at) = rows
                .iter()
                .zip(&xs)
                .map(|(r, &x)| (if r[j].is_nan() { f64::INFINITY } else { r[j] }, x))
                .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
            Identity { name: names[j].into(), error, tol: tols[j], at, pass: error <= tols[j] }
        })
        .collect();
    let pass = identities.iter().all(|i| i.pass);
    IdentityReport { step: h, identities, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration_builder::field::{Dip, Tamper};
    use crate::calibration_builder::{build_field, initial_halfwidth, select_parameters};
    use crate::fixtures;

    fn field(name: &str) -> CalibrationField {
        let c = fixtures::build_candidate(&fixtures::by_name(name).unwrap()).unwrap();
        let p = select_parameters(&c, Variant::Dirichlet, 0.1 * c.min_gap(), None).unwrap();
        let h = initial_halfwidth(&c, &p);
        build_field(&c, p, h).unwrap()
    }

    fn opts(grid: usize) -> VerifyOptions {
        VerifyOptions { grid, st_samples: 16, ..Default::default() }
    }

    #[test]
    fn clean_field_passes_coarse_grid() {
        let r = verify_field(&field("pure_jump_line"), &opts(8));
        assert!(r.pass, "{r:?}");
        assert!(r.conditions.iter().all(|c| c.margin > 0.0));
        assert!(r.jump.angle_bound);
    }

    #[test]
    fn halved_mu_breaks_b_in_a4() {
        let f = field("pure_jump_line").with_tamper(Tamper { mu_scale: Some(0.5), dip: None });
        let r = verify_field(&f, &opts(8));
        let b = r.condition("b");
        assert!(!b.pass && !r.pass);
        assert_eq!(b.witness.region, Some(4));
    }

    #[test]
    fn fine_grid_finds_a_local_defect() {
        let clean = field("pure_jump_line");
        let h = clean.halfwidth;
        // between the nodes of an 8-grid, on nodes of a 64-grid
        let dip = Dip { xi: 10.0 / 63.0, eta: 0.99 * h * (2.0 * 33.0 / 63.0 - 1.0), radius: 0.004, mu_scale: 0.5 };
        let f = clean.with_tamper(Tamper { mu_scale: None, dip: Some(dip) });
        assert!(verify_field(&f, &opts(8)).condition("b").pass);
        let fine = verify_field(&f, &VerifyOptions { grid: 64, st_samples: 8, ..Default::default() });
        let b = fine.condition("b");
        assert!(!b.pass);
        assert!((b.witness.xi - dip.xi).hypot(b.witness.eta - dip.eta) < dip.radius);
    }

    #[test]
    fn diagonal_pairs_vanish() {
        let c = field("circle_arc").column(0.4, 0.001).unwrap();
        for s in [c.u[0].v - 0.5, c.u[0].v, c.beta[0], c.u[1].v + 0.01] {
            assert_eq!(c.integral(s, s), [0.0, 0.0]);
        }
    }

    #[test]
    fn margin_of_d_is_smallest_near_the_traces() {
        let f = field("pure_jump_line");
        let r = verify_field(&f, &opts(8));
        let (s, t) = r.condition("d").witness.st.unwrap();
        let c = f.column(r.condition("d").witness.xi, r.condition("d").witness.eta).unwrap();
        assert!((s - c.u[0].v).abs() <= f.params.eps && (t - c.u[1].v).abs() <= f.params.eps);
    }

    #[test]
    fn identities_on_both_fixtures() {
        for name in ["pure_jump_line", "circle_arc"] {
            let r = derivative_identities(&field(name), 7, Exec::Sequential);
            assert!(r.pass, "{name}: {r:?}");
        }
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let r = verify_field(&field("circle_arc"), &opts(6));
        assert_eq!(r.to_csv().lines().count(), 37);
    }
}
