//! Construction parameters and the derived constants `N`, `d`, `h`, `c̃`, `c`.

use crate::euler_check::Candidate;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Absolute constant in the sufficient condition.
pub const C_ABS: f64 = 78.0;
/// `c̃`, see [`c_tilde_holds`].
pub const C_TILDE: f64 = 78.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Dirichlet,
    Graph,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "N")]
    pub n_big: f64,
    pub d: f64,
    pub h: f64,
    pub c_tilde: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub variant: Variant,
    pub eps: f64,
    pub lambda: f64,
    pub m: f64,
    pub mu: f64,
    /// Only used by the graph variant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_prime: Option<f64>,
    pub delta: f64,
    /// Lower bound on `μ` that the chosen value exceeds.
    pub mu_floor: f64,
    /// `1 - 2εM` or `1 - εM' - 6ε²M`.
    pub prefactor: f64,
    pub constants: Constants,
    /// `(lower, upper)` window for `M` in the graph variant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_window: Option<(f64, f64)>,
}

/// `N = 1 + max(π/(4l), k)`, `d = 1/(1 + 16 l² N² / π²)` and the variant's `h`.
pub fn compute_constants(l: f64, k: f64, c: &Candidate, variant: Variant) -> Constants {
    let n_big = 1.0 + (PI / (4.0 * l)).max(k);
    let d = 1.0 / (1.0 + 16.0 * l * l * n_big * n_big / (PI * PI));
    let h = match variant {
        Variant::Dirichlet => {
            let s = c.sup_normal_second();
            (1.1 * (32.0 / (PI * PI)) * (2.0 - d) * l * l * (s[0] * s[0] + s[1] * s[1])).max(1.0)
        }
        Variant::Graph => {
            let s = c.c1_tangential();
            (64.0 / (PI * PI) * l * l * (s[0] * s[0] + s[1] * s[1])).max(1.0)
        }
    };
    Constants { n_big, d, h, c_tilde: C_TILDE, c: C_TILDE.max(64.0 / (PI * PI)) }
}

/// `c̃ (1 + l² + l²k²) ≥ 16/d` at one `(l, k)`.
pub fn c_tilde_holds(l: f64, k: f64) -> bool {
    let n_big = 1.0 + (PI / (4.0 * l)).max(k);
    let d = 1.0 / (1.0 + 16.0 * l * l * n_big * n_big / (PI * PI));
    C_TILDE * (1.0 + l * l + l * l * k * k) >= 16.0 / d
}

fn prefactor(variant: Variant, eps: f64, m: f64, m_prime: f64) -> f64 {
    match variant {
        Variant::Dirichlet => 1.0 - 2.0 * eps * m,
        Variant::Graph => 1.0 - eps * m_prime - 6.0 * eps * eps * m,
    }
}

/// `sup_ξ (λ²/4) c² (1 + (jε/c)² A²)` with `A = ∂_ξu₁ + ∂_ξu₂` and `j = 2` or `4`.
pub fn mu_lower_bound(c: &Candidate, variant: Variant, eps: f64, lambda: f64, pre: f64) -> f64 {
    let j = if variant == Variant::Dirichlet { 2.0 } else { 4.0 };
    c.xi_samples(crate::euler_check::TRACE_SAMPLES)
        .iter()
        .map(|&x| {
            let a = c.trace(1, x).dx + c.trace(2, x).dx;
            0.25 * lambda * lambda * (pre * pre + j * j * eps * eps * a * a)
        })
        .fold(0.0, f64::max)
}

/// Parameters for a given `ε`. The graph variant needs `capacity`, the smaller
/// of the two `K(Γ, Ω_i)`, to place `M` inside its window.
pub fn select_parameters(c: &Candidate, variant: Variant, eps: f64, capacity: Option<f64>) -> Result<CalibrationParams> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps = {eps}")));
    }
    let l = c.length();
    let k = c.chart.curvature.k;
    let constants = compute_constants(l, k, c, variant);
    let sup = c.sup_tangential();
    let s = sup[0].max(sup[1]);
    let lambda = (4.0 / c.min_gap()).max(10.0);
    let (m, m_prime, m_window) = match variant {
        Variant::Dirichlet => ((1.1 * s).max(1.0), None, None),
        Variant::Graph => {
            let cap = capacity.ok_or_else(|| Error::Parameter("graph variant needs the capacity".into()))?;
            let c1 = c.c1_tangential();
            let lower = constants.c * (1.0 + l * l + l * l * k * k) * (c1[0] * c1[0] + c1[1] * c1[1]);
            if !(lower < cap) {
                return Err(Error::EmptyWindow { lower, upper: cap });
            }
            let m = lower + 0.25 * (cap - lower);
            (m, Some((2.2 * s).max(1.0)), Some((lower, cap)))
        }
    };
    let pre = prefactor(variant, eps, m, m_prime.unwrap_or(0.0));
    if !(pre > 0.0) {
        return Err(Error::EpsilonTooLarge { reason: format!("prefactor {pre} is not positive") });
    }
    let mu_floor = mu_lower_bound(c, variant, eps, lambda, pre);
    Ok(CalibrationParams {
        variant,
        eps,
        lambda,
        m,
        mu: 1.1 * mu_floor,
        m_prime,
        delta: 0.5 * eps,
        mu_floor,
        prefactor: pre,
        constants,
        m_window,
    })
}

impl CalibrationParams {
    pub fn check(&self) -> Result<()> {
        let k = &self.constants;
        let ok = self.eps > 0.0
            && self.lambda > 0.0
            && self.m > 0.0
            && self.mu > self.mu_floor
            && self.prefactor > 0.0
            && k.d > 0.0
            && k.d < 1.0
            && k.n_big >= 1.0
            && k.h > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("{self:?}")))
        }
    }
}
