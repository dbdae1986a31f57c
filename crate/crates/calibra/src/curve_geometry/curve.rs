//! Analytic planar curves with complex-extendable evaluation.

use crate::analytic_kernel::{Cheb, Holomorphic, C64};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Parametric forms. Each is evaluated as the complex map `P(t) = x(t) + i y(t)`,
/// which for complex `t` is the analytic continuation of the parameterization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveKind {
    Segment { start: [f64; 2], end: [f64; 2] },
    /// `center + radius (cos θ, sin θ)` with `θ = theta0 + (theta1 - theta0) t`.
    CircleArc { center: [f64; 2], radius: f64, theta0: f64, theta1: f64 },
    /// `center + (a cos θ, b sin θ)` with `θ` as for the circle.
    EllipseArc { center: [f64; 2], a: f64, b: f64, theta0: f64, theta1: f64 },
    /// `(t, offset + amp sin(freq t + phase))`.
    SineGraph { amp: f64, freq: f64, #[serde(default)] phase: f64, #[serde(default)] offset: f64 },
    /// Chebyshev series for each coordinate.
    Series { x: Cheb, y: Cheb },
    /// `base(t(s))`.
    Reparam { base: Box<CurveKind>, t_of_s: Cheb },
    /// Rigid motion `e^{i angle} P + shift` of another curve.
    Moved { base: Box<CurveKind>, angle: f64, shift: [f64; 2] },
}

#[derive(Debug)]
enum Compiled {
    Closed(CurveKind),
    Series { x: [Cheb; 3], y: [Cheb; 3] },
    Reparam { base: Box<Compiled>, t: [Cheb; 3] },
    Moved { base: Box<Compiled>, rot: C64, shift: C64 },
}

fn jet3(c: &Cheb) -> [Cheb; 3] {
    let d = c.derivative();
    let dd = d.derivative();
    [c.clone(), d, dd]
}

fn compile(kind: &CurveKind) -> Compiled {
    match kind {
        CurveKind::Series { x, y } => Compiled::Series { x: jet3(x), y: jet3(y) },
        CurveKind::Reparam { base, t_of_s } => {
            Compiled::Reparam { base: Box::new(compile(base)), t: jet3(t_of_s) }
        }
        CurveKind::Moved { base, angle, shift } => Compiled::Moved {
            base: Box::new(compile(base)),
            rot: C64::from_polar(1.0, *angle),
            shift: C64::new(shift[0], shift[1]),
        },
        k => Compiled::Closed(k.clone()),
    }
}

impl Compiled {
    fn eval2(&self, t: C64) -> [C64; 3] {
        let i = C64::new(0.0, 1.0);
        match self {
            Compiled::Closed(k) => match *k {
                CurveKind::Segment { start, end } => {
                    let d = C64::new(end[0] - start[0], end[1] - start[1]);
                    [C64::new(start[0], start[1]) + d * t, d, C64::new(0.0, 0.0)]
                }
                CurveKind::CircleArc { center, radius, theta0, theta1 } => {
                    let dt = theta1 - theta0;
                    let e = (i * (theta0 + dt * t)).exp() * radius;
                    [C64::new(center[0], center[1]) + e, i * dt * e, -dt * dt * e]
                }
                CurveKind::EllipseArc { center, a, b, theta0, theta1 } => {
                    let dt = theta1 - theta0;
                    let th = theta0 + dt * t;
                    let (c, s) = (th.cos(), th.sin());
                    [
                        C64::new(center[0], center[1]) + a * c + i * b * s,
                        dt * (-a * s + i * b * c),
                        -dt * dt * (a * c + i * b * s),
                    ]
                }
                CurveKind::SineGraph { amp, freq, phase, offset } => {
                    let th = freq * t + phase;
                    [
                        t + i * (offset + amp * th.sin()),
                        1.0 + i * amp * freq * th.cos(),
                        -i * amp * freq * freq * th.sin(),
                    ]
                }
                _ => unreachable!("compiled separately"),
            },
            Compiled::Series { x, y } => {
                [0, 1, 2].map(|k| x[k].eval_c(t) + i * y[k].eval_c(t))
            }
            Compiled::Reparam { base, t: tj } => {
                let [p, p1, p2] = tj.clone().map(|c| c.eval_c(t));
                let [f, f1, f2] = base.eval2(p);
                [f, f1 * p1, f2 * p1 * p1 + f1 * p2]
            }
            Compiled::Moved { base, rot, shift } => {
                let [f, f1, f2] = base.eval2(t);
                [rot * f + shift, rot * f1, rot * f2]
            }
        }
    }

    fn radius(&self) -> f64 {
        match self {
            Compiled::Closed(_) => f64::INFINITY,
            Compiled::Series { x, y } => x[0].continuation_radius().min(y[0].continuation_radius()),
            Compiled::Reparam { base, t } => {
                let dmax = (0..=64)
                    .map(|k| t[1].eval(t[1].a + (t[1].b - t[1].a) * k as f64 / 64.0).abs())
                    .fold(0.0f64, f64::max);
                let inherited = if dmax > 0.0 { base.radius() / dmax } else { f64::INFINITY };
                t[0].continuation_radius().min(inherited)
            }
            Compiled::Moved { base, .. } => base.radius(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CurveSpec {
    #[serde(flatten)]
    kind: CurveKind,
    domain: [f64; 2],
}

/// An analytic curve on a real parameter interval. The normal is `ν = (-ẏ, ẋ)`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(from = "CurveSpec", into = "CurveSpec")]
pub struct AnalyticCurve {
    pub kind: CurveKind,
    pub domain: (f64, f64),
    compiled: Arc<Compiled>,
}

impl From<CurveSpec> for AnalyticCurve {
    fn from(s: CurveSpec) -> Self {
        AnalyticCurve::new(s.kind, (s.domain[0], s.domain[1]))
    }
}

impl From<AnalyticCurve> for CurveSpec {
    fn from(c: AnalyticCurve) -> Self {
        CurveSpec { kind: c.kind, domain: [c.domain.0, c.domain.1] }
    }
}

impl std::fmt::Debug for AnalyticCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticCurve").field("kind", &self.kind).field("domain", &self.domain).finish()
    }
}

impl PartialEq for AnalyticCurve {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.domain == other.domain
    }
}

impl Holomorphic for AnalyticCurve {
    fn eval2(&self, z: C64) -> [C64; 3] {
        self.compiled.eval2(z)
    }
}

const SIMPLICITY_SEGMENTS: usize = 4096;

impl AnalyticCurve {
    pub fn new(kind: CurveKind, domain: (f64, f64)) -> Self {
        let compiled = Arc::new(compile(&kind));
        AnalyticCurve { kind, domain, compiled }
    }

    pub fn segment(start: [f64; 2], end: [f64; 2]) -> Self {
        Self::new(CurveKind::Segment { start, end }, (0.0, 1.0))
    }

    /// `[position, velocity, acceleration]` at a real parameter.
    pub fn derivs(&self, t: f64) -> [[f64; 2]; 3] {
        self.compiled.eval2(C64::new(t, 0.0)).map(|p| [p.re, p.im])
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        self.derivs(t)[0]
    }

    pub fn speed(&self, t: f64) -> f64 {
        let v = self.derivs(t)[1];
        v[0].hypot(v[1])
    }

    /// Signed curvature `-(ẍ, ÿ)·ν / |ẋ|³`; for unit speed this is `ẍẏ − ẋÿ`.
    pub fn signed_curvature(&self, t: f64) -> f64 {
        let [_, v, a] = self.derivs(t);
        (a[0] * v[1] - v[0] * a[1]) / v[0].hypot(v[1]).powi(3)
    }

    /// Cauchy-Hadamard estimate of how far off the real axis the
    /// parameterization may be continued; closed forms are entire.
    pub fn continuation_radius(&self) -> f64 {
        self.compiled.radius()
    }

    /// Same point set traversed backwards; flips `ν`.
    pub fn reversed(&self) -> AnalyticCurve {
        let (a, b) = self.domain;
        let t = Cheb { a, b, coeffs: vec![0.5 * (a + b), -0.5 * (b - a)] };
        AnalyticCurve::new(CurveKind::Reparam { base: Box::new(self.kind.clone()), t_of_s: t }, (a, b))
    }

    /// Rotates by `angle` about the origin, then translates by `shift`.
    pub fn moved(&self, angle: f64, shift: [f64; 2]) -> AnalyticCurve {
        AnalyticCurve::new(CurveKind::Moved { base: Box::new(self.kind.clone()), angle, shift }, self.domain)
    }

    fn samples(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.domain;
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    }

    /// Rejects vanishing speed on a sampled grid, reporting the worst parameter.
    pub fn check_regular(&self) -> Result<()> {
        let ts = self.samples(SIMPLICITY_SEGMENTS);
        let speeds: Vec<f64> = ts.iter().map(|&t| self.speed(t)).collect();
        let vmax = speeds.iter().cloned().fold(0.0, f64::max);
        let (k, vmin) = speeds
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bk, bv), (k, &v)| if v < bv { (k, v) } else { (bk, bv) });
        if !(vmin > 1e-9 * vmax.max(1e-300)) || !vmin.is_finite() {
            return Err(Error::NonRegular { t: ts[k], speed: vmin });
        }
        Ok(())
    }

    /// Sampled simplicity check: no two non-adjacent chords of a
    /// `2^12`-piece polyline intersect. Probabilistic, not a proof.
    pub fn check_simple(&self) -> Result<()> {
        let ts = self.samples(SIMPLICITY_SEGMENTS);
        let p: Vec<[f64; 2]> = ts.iter().map(|&t| self.point(t)).collect();
        let n = p.len() - 1;
        let bbox = |i: usize| {
            let (a, b) = (p[i], p[i + 1]);
            [a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1])]
        };
        let boxes: Vec<[f64; 4]> = (0..n).map(bbox).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| boxes[i][0].total_cmp(&boxes[j][0]));
        for (oi, &i) in order.iter().enumerate() {
            for &j in &order[oi + 1..] {
                if boxes[j][0] > boxes[i][1] {
                    break;
                }
                if i.abs_diff(j) <= 1 || boxes[j][3] < boxes[i][2] || boxes[j][2] > boxes[i][3] {
                    continue;
                }
                if chords_cross(p[i], p[i + 1], p[j], p[j + 1]) {
                    let (a, b) = (i.min(j), i.max(j));
                    return Err(Error::SelfIntersection { t1: ts[a], t2: ts[b] });
                }
            }
        }
        Ok(())
    }

    /// Length by integrating a Chebyshev fit of the speed.
    pub fn length(&self) -> f64 {
        let (a, b) = self.domain;
        speed_fit(self).integral(a).eval(b)
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn chords_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn speed_fit(curve: &AnalyticCurve) -> Cheb {
    let (a, b) = curve.domain;
    let mut n = 16;
    loop {
        let c = Cheb::fit(|t| curve.speed(t), a, b, n);
        let scale = c.coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if c.tail(3) <= 1e-15 * scale || n >= 2048 {
            return c;
        }
        n *= 2;
    }
}

/// Reparameterizes by arc length on `[0, l]`. Constant-speed curves get an
/// exact linear map; otherwise `t(s)` is a Chebyshev fit of the inverse of
/// the integrated speed, refined until `| |P'(s)| - 1 | ≤ tol` on `10^3` samples.
pub fn arc_length_reparameterize(curve: &AnalyticCurve, tol: f64) -> Result<AnalyticCurve> {
    curve.check_regular()?;
    let (a, b) = curve.domain;
    let probe: Vec<f64> = curve.samples(256).iter().map(|&t| curve.speed(t)).collect();
    let (vmin, vmax) = probe.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let base = Box::new(curve.kind.clone());
    if vmax - vmin <= 1e-14 * vmax {
        let v = 0.5 * (vmin + vmax);
        let l = v * (b - a);
        let t = Cheb { a: 0.0, b: l, coeffs: vec![0.5 * (a + b), 0.5 * (b - a)] };
        return Ok(AnalyticCurve::new(CurveKind::Reparam { base, t_of_s: t }, (0.0, l)));
    }
    let sfit = speed_fit(curve);
    let s_of_t = sfit.integral(a);
    let l = s_of_t.eval(b);
    let invert = |s: f64| {
        let (mut lo, mut hi) = (a, b);
        let mut t = a + (b - a) * s / l;
        for _ in 0..100 {
            let r = s_of_t.eval(t) - s;
            if r == 0.0 {
                break;
            } else if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let next = t - r / sfit.eval(t);
            if next >= lo && next <= hi {
                let done = (next - t).abs() < 1e-15 * (b - a);
                t = next;
                if done {
                    break;
                }
            } else {
                t = 0.5 * (lo + hi);
            }
        }
        t
    };
    let mut n = 16;
    let mut worst = f64::INFINITY;
    while n <= 2048 {
        let t = Cheb::fit(invert, 0.0, l, n);
        let out = AnalyticCurve::new(CurveKind::Reparam { base: base.clone(), t_of_s: t }, (0.0, l));
        worst = (0..1000)
            .map(|k| (out.speed(l * (k as f64 + 0.5) / 1000.0) - 1.0).abs())
            .fold(0.0, f64::max);
        if worst <= tol {
            return Ok(out);
        }
        n *= 2;
    }
    Err(Error::Geometry(format!("arc-length fit stalled at speed defect {worst:.3e}")))
}
