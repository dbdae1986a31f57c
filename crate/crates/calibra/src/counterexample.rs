//! A candidate that satisfies the Euler conditions but is not a local
//! graph-minimizer: `u = x` above and `u = -x` below the segment
//! `(1, 1 + 4l) × {0}` in `R = (1, 1 + 4l) × (-l, l)`, for `l` larger than the
//! energy `c` of a reference function on `R₀ = (0, 4) × (-1, 0)`.
//!
//! The competitor lifts the crack over `(1, 1 + 2l)` to the two upper sides
//! of the triangle `T_ε` with vertices `(1, 0)`, `(1 + l, ε)`, `(1 + 2l, 0)`;
//! on `T_ε` it is `-x + η_amp (x - 1)` and below the axis it is
//! `-x + η_amp v` with `v(x, y) = l w((x - 1)/l, y/l)`.
//!
//! Energies are reported as gains: positive means the competitor is cheaper.

use crate::par::{self, Exec};
use crate::steklov_capacity::sparse::{Csr, Skyline};
use crate::steklov_capacity::{eigen, mesh, Mesh};
use crate::{Error, Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// `w` on `R₀` at one mesh size. Stored on `(0, 4) × (0, 1)` with `s = -y`.
#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    pub mesh: Mesh,
    pub w: Vec<f64>,
    pub h: f64,
    /// `∫_{R₀} |∇w_h|²`.
    pub energy: f64,
    /// `∫_{R₀} ∂_x w_h`, zero up to rounding.
    pub x_flux: f64,
    /// `max |w_h(x, 0) - x|` over nodes with `x ∈ [0, 2]`.
    pub trace_error: f64,
    /// `max |w_h|` over nodes on the zero-trace part of `∂R₀`.
    pub boundary_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEnergy {
    /// Energy of the finest solve; this `w` is the one the competitor uses.
    pub c: f64,
    /// Mesh sizes and energies, coarse to fine.
    pub levels: Vec<(f64, f64)>,
    /// Observed convergence order.
    pub order: f64,
    /// Richardson limit with the observed order.
    pub c_limit: f64,
    /// `|c - c_limit| / c_limit`.
    pub relative_gap: f64,
}

fn boundary_value(p: [f64; 2]) -> f64 {
    if p[1].abs() < 1e-12 && p[0] <= 2.0 + 1e-12 {
        p[0]
    } else {
        0.0
    }
}

/// P1 solve of the mixed problem on a structured mesh with `1/h` cells per unit.
pub fn solve_w0_at(cells_per_unit: usize) -> Result<ReferenceSolution> {
    let n = cells_per_unit.max(1);
    let h = 1.0 / n as f64;
    let m = mesh::rectangle(4.0, 1.0, 4 * n, n, (2.0, 4.0));
    let s = eigen::stiffness(&m);
    let nn = m.nodes.len();
    let free: Vec<usize> = (0..nn).filter(|&k| !m.dirichlet[k]).collect();
    let mut slot = vec![usize::MAX; nn];
    for (i, &k) in free.iter().enumerate() {
        slot[k] = i;
    }
    let mut w: Vec<f64> = (0..nn).map(|k| if m.dirichlet[k] { boundary_value(m.nodes[k]) } else { 0.0 }).collect();
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for &k in &free {
        for (j, a) in s.row(k) {
            if m.dirichlet[j] {
                rhs[slot[k]] -= a * w[j];
            } else {
                trip.push((slot[k], slot[j], a));
            }
        }
    }
    let x = Skyline::factor(&Csr::from_triplets(free.len(), trip))?.solve(&rhs);
    for (i, &k) in free.iter().enumerate() {
        w[k] = x[i];
    }
    let energy = s.dot_form(&w, &w);
    let mut x_flux = 0.0;
    for t in &m.tris {
        let p = t.map(|k| m.nodes[k]);
        // ∫ ∂_x φ_i over a triangle is b_i / 2
        let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
        x_flux += 0.5 * (b[0] * w[t[0]] + b[1] * w[t[1]] + b[2] * w[t[2]]);
    }
    let (mut trace_error, mut boundary_error) = (0.0f64, 0.0f64);
    for (k, p) in m.nodes.iter().enumerate() {
        if p[1].abs() < 1e-12 && p[0] <= 2.0 + 1e-12 {
            trace_error = trace_error.max((w[k] - p[0]).abs());
        } else if m.dirichlet[k] {
            boundary_error = boundary_error.max(w[k].abs());
        }
    }
    Ok(ReferenceSolution { mesh: m, w, h, energy, x_flux, trace_error, boundary_error })
}

/// `c` over three nested meshes starting at `cells_per_unit`, with the
/// observed order and its Richardson limit. Returns the finest solution.
pub fn solve_w0(cells_per_unit: usize) -> Result<(ReferenceSolution, ReferenceEnergy)> {
    let ns = [cells_per_unit, 2 * cells_per_unit, 4 * cells_per_unit];
    let mut sols: Vec<ReferenceSolution> = ns.iter().map(|&n| solve_w0_at(n)).collect::<Result<_>>()?;
    let e: Vec<f64> = sols.iter().map(|s| s.energy).collect();
    let order = ((e[0] - e[1]) / (e[1] - e[2])).log2();
    let c_limit = e[2] - (e[1] - e[2]) / (2f64.powf(order) - 1.0);
    let fine = sols.pop().expect("three levels");
    let r = ReferenceEnergy {
        c: fine.energy,
        levels: sols.iter().chain(std::iter::once(&fine)).map(|s| (s.h, s.energy)).collect(),
        order,
        c_limit,
        relative_gap: (fine.energy - c_limit).abs() / c_limit,
    };
    Ok((fine, r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub l: f64,
    pub eps: f64,
    pub eta_amp: f64,
    pub c: f64,
    /// `H¹(S_u) - H¹(S_ũ) = 2l - 2√(l² + ε²)`.
    pub term_length: f64,
    /// Gain on `T_ε`: `lε(2η_amp - η_amp²)`.
    pub term_triangle: f64,
    /// Gain on `R₂`: `-η_amp² ∫|∇v|² + 2η_amp ∫∂_x v`.
    pub term_r2: f64,
    pub delta_e: f64,
    pub decrease: bool,
}

/// Exact gain of the competitor for one `(ε, η_amp)`.
pub fn perturbed_energy(l: f64, eps: f64, eta_amp: f64, w: &ReferenceSolution) -> Result<EnergyReport> {
    if !(eps > 0.0 && eps < l) || !(0.0..1.0).contains(&eta_amp) {
        return Err(Error::Geometry(format!("eps = {eps}, eta_amp = {eta_amp}, l = {l}")));
    }
    // the triangle leg, computed without cancellation
    let term_length = -2.0 * eps * eps / (l + (l * l + eps * eps).sqrt());
    let area = l * eps;
    let term_triangle = area * (1.0 - (eta_amp - 1.0).powi(2));
    // ∇v(x, y) = ∇w((x-1)/l, y/l), so ∫_{R₂} scales by l²
    let term_r2 = -eta_amp * eta_amp * l * l * w.energy + 2.0 * eta_amp * l * l * w.x_flux;
    let delta_e = term_length + term_triangle + term_r2;
    Ok(EnergyReport {
        l,
        eps,
        eta_amp,
        c: w.energy,
        term_length,
        term_triangle,
        term_r2,
        delta_e,
        decrease: delta_e > 0.0,
    })
}

/// Leading-order gain `-ε²/l + 2lεη - lεη² - c l² η²`.
pub fn expansion(l: f64, eps: f64, eta_amp: f64, c: f64) -> f64 {
    -eps * eps / l + 2.0 * l * eps * eta_amp - l * eps * eta_amp * eta_amp - c * l * l * eta_amp * eta_amp
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecreaseReport {
    pub schema_version: String,
    pub l: f64,
    pub c: f64,
    /// Energy of the discrete `w` actually used.
    pub w_energy: f64,
    pub rows: Vec<EnergyReport>,
    /// Largest `ε` on the sweep with a strict decrease.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first: Option<EnergyReport>,
    /// Limit of `ΔE/ε²` from a linear fit in `ε` over the smallest `ε`.
    pub slope: f64,
    /// `1/c - 1/l`.
    pub slope_expected: f64,
    /// `decrease`, `none-found` or `boundary`.
    pub verdict: String,
}

impl DecreaseReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,eta_amp,term_length,term_triangle,term_r2,delta_e\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{:e},{:e},{:e},{:e}", r.eps, r.eta_amp, r.term_length, r.term_triangle, r.term_r2, r.delta_e);
        }
        s
    }
}

/// Default sweep `ε = 0.1 · 2^{-k}`, `k = 0..12`.
pub fn default_eps() -> Vec<f64> {
    (0..12).map(|k| 0.1 * 0.5f64.powi(k)).collect()
}

/// Sweeps `ε` with `η_amp = ε/(cl)`. `c` is the reference energy used to
/// choose `l` and `η_amp` (normally the mesh limit); the competitor itself
/// uses the discrete `w`, whose energy is slightly larger.
pub fn find_energy_decrease(l: f64, c: f64, w: &ReferenceSolution, eps: &[f64], exec: Exec) -> Result<DecreaseReport> {
    let rows = par::map_slice(exec, eps, |&e| perturbed_energy(l, e, e / (c * l), w))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let first = rows.iter().find(|r| r.decrease).cloned();
    // ΔE/ε² = s + b ε + O(ε²): least squares over the five smallest ε
    let mut tail: Vec<&EnergyReport> = rows.iter().collect();
    tail.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    tail.truncate(5);
    let n = tail.len() as f64;
    let (sx, sy) = tail.iter().fold((0.0, 0.0), |(a, b), r| (a + r.eps, b + r.delta_e / (r.eps * r.eps)));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = tail.iter().fold((0.0, 0.0), |(a, b), r| {
        let dx = r.eps - mx;
        (a + dx * (r.delta_e / (r.eps * r.eps) - my), b + dx * dx)
    });
    let slope = my - if sxx > 0.0 { sxy / sxx } else { 0.0 } * mx;
    let slope_expected = 1.0 / c - 1.0 / l;
    let verdict = if first.is_some() {
        "decrease"
    } else if slope_expected.abs() < 1e-12 * (1.0 / c) {
        "boundary"
    } else {
        "none-found"
    };
    Ok(DecreaseReport {
        schema_version: SCHEMA_VERSION.into(),
        l,
        c,
        w_energy: w.energy,
        rows,
        first,
        slope,
        slope_expected,
        verdict: verdict.into(),
    })
}

/// Log-log slope of `|ΔE_exact - ΔE_expansion|` against `ε`.
pub fn expansion_order(l: f64, w: &ReferenceSolution, eps: &[f64]) -> Result<f64> {
    let c = w.energy;
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .map(|&e| {
            let eta = e / (c * l);
            let r = perturbed_energy(l, e, eta, w)?;
            Ok((e.ln(), (r.delta_e - expansion(l, e, eta, c)).abs().ln()))
        })
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    Ok(sxy / sxx)
}

/// `ũ - u` on `∂R` and the jump of `ũ` across `y = 0` under `T_ε`, both at
/// mesh nodes of the reference solution.
pub fn boundary_mismatch(l: f64, eta_amp: f64, w: &ReferenceSolution) -> (f64, f64) {
    let (mut bnd, mut iface) = (0.0f64, 0.0f64);
    for (k, p) in w.mesh.nodes.iter().enumerate() {
        let x = 1.0 + l * p[0];
        let below = -x + eta_amp * l * w.w[k];
        let on_edge = p[0] < 1e-12 || p[0] > 4.0 - 1e-12 || p[1] > 1.0 - 1e-12;
        if on_edge {
            bnd = bnd.max((below + x).abs());
        }
        if p[1].abs() < 1e-12 && p[0] <= 2.0 + 1e-12 {
            let on_triangle = -x + eta_amp * (x - 1.0);
            iface = iface.max((below - on_triangle).abs());
        }
    }
    (bnd, iface)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_energy_decreases_under_refinement() {
        let e: Vec<f64> = [4, 8, 16].iter().map(|&n| solve_w0_at(n).unwrap().energy).collect();
        assert!(e[0] > e[1] && e[1] > e[2] && e[2] > 0.0, "{e:?}");
    }

    #[test]
    fn imposed_data_is_reproduced() {
        let w = solve_w0_at(8).unwrap();
        assert!(w.trace_error < 1e-8 && w.boundary_error < 1e-8);
        assert!(w.x_flux.abs() < 1e-10, "{}", w.x_flux);
    }

    #[test]
    fn terms_have_their_closed_forms() {
        let w = solve_w0_at(8).unwrap();
        let (l, eps) = (3.0, 0.05);
        let r = perturbed_energy(l, eps, 0.0, &w).unwrap();
        assert!((r.delta_e - (2.0 * l - 2.0 * (l * l + eps * eps).sqrt())).abs() < 1e-15);
        assert!(!r.decrease);
        let eta = 0.2;
        let r = perturbed_energy(l, eps, eta, &w).unwrap();
        assert!((r.term_triangle - l * eps * (2.0 * eta - eta * eta)).abs() < 1e-15);
        assert!((r.term_r2 + w.energy * l * l * eta * eta).abs() < 1e-6 * w.energy * l * l * eta * eta);
        assert_eq!(r.delta_e, r.term_length + r.term_triangle + r.term_r2);
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        let w = solve_w0_at(4).unwrap();
        assert!(perturbed_energy(1.0, 1.0, 0.1, &w).is_err());
        assert!(perturbed_energy(1.0, 0.1, 1.0, &w).is_err());
    }

    #[test]
    fn competitor_keeps_the_boundary_trace() {
        let w = solve_w0_at(8).unwrap();
        let (b, i) = boundary_mismatch(5.0, 0.01, &w);
        assert!(b < 1e-12 && i < 1e-8, "{b} {i}");
    }

    #[test]
    fn expansion_error_is_higher_order() {
        let w = solve_w0_at(8).unwrap();
        let eps: Vec<f64> = (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        assert!(expansion_order(2.0 * w.energy, &w, &eps).unwrap() >= 2.9);
    }

    #[test]
    fn long_rectangle_loses_and_short_one_does_not() {
        let (w, r) = solve_w0(8).unwrap();
        let c = r.c_limit;
        let long = find_energy_decrease(2.0 * c, c, &w, &default_eps(), Exec::Sequential).unwrap();
        assert_eq!(long.verdict, "decrease");
        assert!(long.first.as_ref().unwrap().eps <= 0.1);
        assert!((long.slope - long.slope_expected).abs() < 0.05 * long.slope_expected, "{} {}", long.slope, long.slope_expected);
        let short = find_energy_decrease(0.5 * c, c, &w, &default_eps(), Exec::Sequential).unwrap();
        assert_eq!(short.verdict, "none-found");
        assert!(short.rows.iter().all(|r| r.delta_e < 0.0));
        assert_eq!(short.to_csv().lines().count(), 13);
    }
}
