//! The Riccati step for `τ = n'/n`:
//! `-a(ξ) τ' + h(ξ, τ) - τ² - curv² = -π²/(16 l²)`, `τ(0) = 0`, and `n = exp ∫τ`.

use crate::analytic_kernel::{Cheb, Dopri, OdeOptions};
use crate::euler_check::Candidate;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

type Coef1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Coef2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `a_ε(ξ)` and `h_ε(ξ, τ)`.
#[derive(Clone)]
pub struct Coefficients {
    pub a: Coef1,
    pub h: Coef2,
    pub exact: bool,
}

impl std::fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Coefficients").field("exact", &self.exact).finish()
    }
}

impl Coefficients {
    /// `a = 1`, `h = 2τ²`.
    pub fn limit() -> Self {
        Coefficients { a: Arc::new(|_| 1.0), h: Arc::new(|_, t| 2.0 * t * t), exact: false }
    }

    /// Finite-ε coefficients of the Dirichlet field, from the traces of the
    /// candidate. With `A = ∂_ξu₁ + ∂_ξu₂`, `κ = A (∂_ξu₂ - ∂_ξu₁)`,
    /// `c = 1 - 2εM`, `e = 2ε/c` and `P = cτ(1 + e²A²) - eAκ`:
    /// `a = c(1 + e²A²)`, `h = P² + e(Aκ)' - 2ce²τAA' + τ²`.
    pub fn dirichlet(c: &Candidate, eps: f64, m: f64) -> Self {
        let pre = 1.0 - 2.0 * eps * m;
        let e = 2.0 * eps / pre;
        let (c1, c2) = (c.clone(), c.clone());
        let trace = move |c: &Candidate, x: f64| {
            let (j1, j2) = (c.trace(1, x), c.trace(2, x));
            let (a, a1) = (j1.dx + j2.dx, j1.dxx + j2.dxx);
            let (d, d1) = (j2.dx - j1.dx, j2.dxx - j1.dxx);
            (a, a1, a * d, a1 * d + a * d1)
        };
        Coefficients {
            a: Arc::new(move |x| {
                let (a, ..) = trace(&c1, x);
                pre * (1.0 + e * e * a * a)
            }),
            h: Arc::new(move |x, t| {
                let (a, a1, k, k1) = trace(&c2, x);
                let p = pre * t * (1.0 + e * e * a * a) - e * a * k;
                p * p + e * (a1 * k + a * k1) - 2.0 * pre * e * e * t * a * a1 + t * t
            }),
            exact: true,
        }
    }
}

/// Solution on an interval containing `[0, l]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RiccatiSolution {
    pub tau: Cheb,
    pub n: Cheb,
    pub l: f64,
    /// `sup_{[0,l]} |τ|`.
    pub sup_tau: f64,
    /// `N`.
    pub bound: f64,
    /// `max(‖τ₁‖∞, ‖τ₂‖∞)` of the constant-coefficient comparison problems.
    pub comparison: f64,
    pub exact: bool,
}

/// `sup_{[0,l]} |τ|` for `τ' = τ² - k² + π²/(16 l²)`, `τ(0) = 0`, in closed form.
pub fn comparison_sup(l: f64, k: f64) -> f64 {
    let w2 = PI * PI / (16.0 * l * l) - k * k;
    if w2 > 0.0 {
        let w = w2.sqrt();
        if w * l >= 0.5 * PI {
            f64::INFINITY
        } else {
            w * (w * l).tan()
        }
    } else {
        let w = (-w2).sqrt();
        w * (w * l).tanh()
    }
}

/// Integrates the Riccati step on `range ⊇ [0, l]` and returns `τ` and `n`
/// as Chebyshev series. Blow-up or `‖τ‖∞ > N` on `[0, l]` is reported as
/// `ε` too large.
pub fn solve_riccati_n(
    curv: &(dyn Fn(f64) -> f64 + Sync),
    l: f64,
    coeffs: &Coefficients,
    range: (f64, f64),
) -> Result<RiccatiSolution> {
    let (lo, hi) = range;
    assert!(lo <= 0.0 && hi >= l);
    let k = (0..=1000).map(|i| curv(l * i as f64 / 1000.0).abs()).fold(0.0, f64::max);
    let bound = 1.0 + (PI / (4.0 * l)).max(k);
    let target = PI * PI / (16.0 * l * l);
    let rhs = |x: f64, y: &[f64; 1]| {
        let t = y[0];
        let c = curv(x);
        [((coeffs.h)(x, t) - t * t - c * c + target) / (coeffs.a)(x)]
    };
    let ode = Dopri::<1>::new(OdeOptions { blowup: 1e8, ..OdeOptions::tight() });
    let too_large = |e: Error| Error::EpsilonTooLarge { reason: format!("Riccati step: {e}") };
    let mut n_nodes = 48;
    loop {
        let nodes = Cheb::nodes(lo, hi, n_nodes);
        let mut fwd: Vec<(usize, f64)> = nodes.iter().copied().enumerate().filter(|p| p.1 >= 0.0).collect();
        let mut bwd: Vec<(usize, f64)> = nodes.iter().copied().enumerate().filter(|p| p.1 < 0.0).collect();
        fwd.sort_by(|a, b| a.1.total_cmp(&b.1));
        bwd.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut vals = vec![0.0; n_nodes];
        for part in [&fwd, &bwd] {
            if part.is_empty() {
                continue;
            }
            let ts: Vec<f64> = part.iter().map(|p| p.1).collect();
            let ys = ode.solve_at(&mut |x, y| rhs(x, y), 0.0, [0.0], &ts).map_err(too_large)?;
            for (p, y) in part.iter().zip(ys) {
                vals[p.0] = y[0];
            }
        }
        let tau = Cheb::from_values(&vals, lo, hi);
        let scale = tau.coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        if tau.tail(4) > 1e-13 * scale && n_nodes < 512 {
            n_nodes *= 2;
            continue;
        }
        let sup_tau = (0..=2000).map(|i| tau.eval(l * i as f64 / 2000.0).abs()).fold(0.0, f64::max);
        if !(sup_tau <= bound) {
            return Err(Error::EpsilonTooLarge { reason: format!("sup |tau| = {sup_tau} exceeds N = {bound}") });
        }
        let big = tau.integral(0.0);
        let n = Cheb::fit(|x| big.eval(x).exp(), lo, hi, n_nodes);
        return Ok(RiccatiSolution {
            tau,
            n,
            l,
            sup_tau,
            bound,
            comparison: comparison_sup(l, 0.0).max(comparison_sup(l, k)),
            exact: coeffs.exact,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_limit_is_a_tangent() {
        let r = solve_riccati_n(&|_| 0.0, 1.0, &Coefficients::limit(), (-0.1, 1.1)).unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let exact = 0.25 * PI * (0.25 * PI * x).tan();
            assert!((r.tau.eval(x) - exact).abs() < 1e-11);
        }
        assert!((r.n.eval(0.0) - 1.0).abs() < 1e-14);
        assert!(r.sup_tau <= r.comparison + 1e-12 && r.comparison < r.bound);
    }

    #[test]
    fn constant_curvature_below_comparison() {
        let k = 2.0;
        let r = solve_riccati_n(&|_| k, 1.0, &Coefficients::limit(), (0.0, 1.0)).unwrap();
        assert!((r.sup_tau - comparison_sup(1.0, k)).abs() < 1e-10);
        assert!(r.sup_tau < k);
    }

    #[test]
    fn blow_up_is_reported() {
        let wild = Coefficients { a: Arc::new(|_| 0.05), h: Arc::new(|_, t| 2.0 * t * t), exact: false };
        let e = solve_riccati_n(&|_| 0.0, 1.0, &wild, (0.0, 1.0)).unwrap_err();
        assert!(matches!(e, Error::EpsilonTooLarge { .. }));
    }
}
