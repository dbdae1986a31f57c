//! Named candidates and the config form they are read from.

use crate::analytic_kernel::harmonic::Expr;
use crate::curve_geometry::{arc_length_reparameterize, build_chart, default_halfwidth, AnalyticCurve, CurveKind};
use crate::euler_check::Candidate;
use crate::steklov_capacity::SplitSpec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// A candidate as written in a config file: the curve, and `u₁`, `u₂` as real
/// parts of holomorphic Cartesian expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub name: String,
    pub curve: AnalyticCurve,
    /// Traverse the curve backwards, flipping `ν`.
    #[serde(default)]
    pub reversed: bool,
    pub u1: Expr,
    pub u2: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfwidth: Option<f64>,
    /// Γ-admissible domains used by the capacity checks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub splits: Vec<SplitSpec>,
}

pub const BUILTIN: [&str; 5] = ["pure_jump_line", "circle_arc", "linear_jump", "slope_mismatch", "sine_curve"];

/// Radius and arc length of the circle fixture.
pub const CIRCLE_RADIUS: f64 = 1.0;
pub const CIRCLE_ARC: f64 = 1.0;

impl FixtureSpec {
    /// The same configuration after a rigid motion of the plane.
    pub fn moved(&self, angle: f64, shift: [f64; 2]) -> FixtureSpec {
        let mut f = self.clone();
        f.curve = self.curve.moved(angle, shift);
        f.u1 = self.u1.clone().moved(angle, shift);
        f.u2 = self.u2.clone().moved(angle, shift);
        f.splits.clear();
        f
    }
}

fn segment_fixture(name: &str, a: [f64; 2], b: [f64; 2], u1: Expr, u2: Expr) -> FixtureSpec {
    FixtureSpec {
        name: name.into(),
        curve: AnalyticCurve::new(CurveKind::Segment { start: a, end: b }, (0.0, 1.0)),
        reversed: false,
        u1,
        u2,
        halfwidth: None,
        splits: Vec::new(),
    }
}

/// Straight `Γ = [0, 1] × {0}` with constant sides 0 and 1.
pub fn pure_jump_line() -> FixtureSpec {
    let mut f = segment_fixture("pure_jump_line", [0.0, 0.0], [1.0, 0.0], Expr::constant(0.0), Expr::constant(1.0));
    f.splits = vec![
        SplitSpec::Rectangle { a: 1.0, below: 1.0, above: 1.0 },
        SplitSpec::Rectangle { a: 1.0, below: 0.25, above: 2.0 },
        SplitSpec::Rectangle { a: 1.0, below: 0.05, above: 0.05 },
    ];
    f
}

/// Clockwise arc of the unit circle around `θ = π/2`, so `ν` points out;
/// `u₁` constant inside, `u₂ = √R θ` outside.
pub fn circle_arc() -> FixtureSpec {
    let r = CIRCLE_RADIUS;
    let half = 0.5 * CIRCLE_ARC / r;
    FixtureSpec {
        name: "circle_arc".into(),
        curve: AnalyticCurve::new(
            CurveKind::CircleArc { center: [0.0, 0.0], radius: r, theta0: 0.5 * PI + half, theta1: 0.5 * PI - half },
            (0.0, 1.0),
        ),
        reversed: false,
        u1: Expr::constant(0.0),
        u2: Expr::polar_angle([0.0, 0.0], r.sqrt(), 0.0, 1.5 * PI),
        halfwidth: None,
        splits: Vec::new(),
    }
}

/// `u = x` above and `u = -x` below `Γ = (1, 1 + 4l) × {0}`.
pub fn linear_jump(l: f64) -> FixtureSpec {
    let mut f = segment_fixture(
        "linear_jump",
        [1.0, 0.0],
        [1.0 + 4.0 * l, 0.0],
        Expr::linear(0.0, -1.0),
        Expr::linear(0.0, 1.0),
    );
    f.splits = vec![SplitSpec::Rectangle { a: 4.0 * l, below: l, above: l }];
    f
}

/// `u = x` above, `u = 2x` below a straight line: violates (iii) by 3.
pub fn slope_mismatch() -> FixtureSpec {
    segment_fixture("slope_mismatch", [0.0, 0.0], [1.0, 0.0], Expr::linear(0.0, 2.0), Expr::linear(0.0, 1.0))
}

/// Sine-shaped curve with constant sides; used for chart checks.
pub fn sine_curve() -> FixtureSpec {
    FixtureSpec {
        name: "sine_curve".into(),
        curve: AnalyticCurve::new(CurveKind::SineGraph { amp: 0.1, freq: 2.0, phase: 0.0, offset: 0.0 }, (0.0, 1.5)),
        reversed: false,
        u1: Expr::constant(0.0),
        u2: Expr::constant(1.0),
        halfwidth: None,
        splits: Vec::new(),
    }
}

pub fn by_name(name: &str) -> Result<FixtureSpec> {
    match name {
        "pure_jump_line" => Ok(pure_jump_line()),
        "circle_arc" => Ok(circle_arc()),
        "linear_jump" => Ok(linear_jump(1.0)),
        "slope_mismatch" => Ok(slope_mismatch()),
        "sine_curve" => Ok(sine_curve()),
        other => Err(Error::UnknownFixture(other.into())),
    }
}

/// Arc-length chart plus pulled-back sides, normalized so `min u₁(ξ, 0) = 1`.
pub fn build_candidate(spec: &FixtureSpec) -> Result<Candidate> {
    let raw = if spec.reversed { spec.curve.reversed() } else { spec.curve.clone() };
    let curve = arc_length_reparameterize(&raw, 1e-11)?;
    curve.check_simple()?;
    let h = spec.halfwidth.unwrap_or_else(|| default_halfwidth(&curve));
    let chart = build_chart(&curve, h)?;
    let u1 = chart.pull_back(Arc::new(spec.u1.clone()));
    let u2 = chart.pull_back(Arc::new(spec.u2.clone()));
    Ok(Candidate::new(spec.name.clone(), chart, u1, u2).normalized())
}
