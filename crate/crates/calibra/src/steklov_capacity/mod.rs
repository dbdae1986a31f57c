//! The capacity `K(Γ, A)` as the first mixed Steklov-Dirichlet eigenvalue,
//! the graph-minimality sufficient condition and the thin-domain width.

pub mod eigen;
pub mod mesh;
pub mod sparse;

pub use mesh::{Arc, DomainSpec, Mesh};

use crate::calibration_builder::params::C_ABS;
use crate::euler_check::Candidate;
use crate::par::Exec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Meshes above this size report lower bounds only.
pub const MAX_NODES: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub h: f64,
    pub k: f64,
    /// `(4 K_{h/2} - K_h) / 3`, assuming `O(h²)` eigenvalue error.
    pub richardson: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteklovResult {
    pub k: f64,
    pub h: f64,
    pub nodes: usize,
    pub trace_nodes: usize,
    /// `|K - ∫|∇v|²|` for the normalized eigenfunction.
    pub rayleigh_residual: f64,
    /// `∫_Γ v²`, 1 after normalization.
    pub trace_norm: f64,
    /// Smallest interior nodal value of the normalized eigenfunction.
    pub min_interior: f64,
    pub positive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined: Option<Refinement>,
    #[serde(skip)]
    pub eigenfunction: Vec<f64>,
}

/// `π / (a tanh(π b / a))`.
pub fn rectangle_k(a: f64, b: f64) -> f64 {
    PI / (a * (PI * b / a).tanh())
}

/// One solve on a given mesh.
pub fn compute_k_on(mesh: &Mesh, h: f64, exec: Exec) -> Result<SteklovResult> {
    if mesh.nodes.len() > MAX_NODES {
        return Err(Error::Solver(format!("mesh of {} nodes exceeds the cap", mesh.nodes.len())));
    }
    let ep = eigen::steklov_first(mesh, exec)?;
    let s = eigen::stiffness(mesh);
    let b = eigen::gamma_mass(mesh, &|_| 1.0);
    let energy = s.dot_form(&ep.v, &ep.v);
    let trace_norm = b.dot_form(&ep.v, &ep.v);
    let min_interior = (0..mesh.nodes.len())
        .filter(|&k| !mesh.dirichlet[k])
        .map(|k| ep.v[k])
        .fold(f64::INFINITY, f64::min);
    Ok(SteklovResult {
        k: ep.lambda,
        h,
        nodes: mesh.nodes.len(),
        trace_nodes: ep.trace_nodes,
        rayleigh_residual: (energy - ep.lambda).abs(),
        trace_norm,
        min_interior,
        positive: min_interior > 0.0,
        refined: None,
        eigenfunction: ep.v,
    })
}

/// `K(Γ, A)` at mesh size `h`, with the `h/2` solve for a Richardson estimate.
pub fn compute_k(domain: &DomainSpec, h: f64, exec: Exec) -> Result<SteklovResult> {
    let mut r = compute_k_on(&domain.mesh(h)?, h, exec)?;
    let fine = compute_k_on(&domain.mesh(0.5 * h)?, 0.5 * h, exec)?;
    r.refined = Some(Refinement { h: 0.5 * h, k: fine.k, richardson: (4.0 * fine.k - r.k) / 3.0 });
    Ok(r)
}

/// A Γ-admissible domain split by `Γ` into `Ω₁` (below) and `Ω₂` (above).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SplitSpec {
    /// `(0, a) × (-below, above)` around `Γ = (0, a) × {0}`.
    Rectangle { a: f64, below: f64, above: f64 },
    /// Annulus sector `r_in < r < r_out`, `0 < θ < theta`, split by the arc `r = r_mid`.
    AnnularSector { r_in: f64, r_mid: f64, r_out: f64, theta: f64 },
}

impl SplitSpec {
    pub fn components(&self) -> Result<[DomainSpec; 2]> {
        match *self {
            SplitSpec::Rectangle { a, below, above } => {
                if !(a > 0.0 && below > 0.0 && above > 0.0) {
                    return Err(Error::NotAdmissible(format!("{self:?}")));
                }
                Ok([DomainSpec::rectangle(a, below), DomainSpec::rectangle(a, above)])
            }
            SplitSpec::AnnularSector { r_in, r_mid, r_out, theta } => {
                if !(0.0 < r_in && r_in < r_mid && r_mid < r_out && 0.0 < theta && theta < 2.0 * PI) {
                    return Err(Error::NotAdmissible(format!("{self:?}")));
                }
                Ok([
                    DomainSpec::AnnularSector { r_inner: r_in, r_outer: r_mid, theta, marked: Arc::Outer },
                    DomainSpec::AnnularSector { r_inner: r_mid, r_outer: r_out, theta, marked: Arc::Inner },
                ])
            }
        }
    }

    /// Mesh size giving about `cells` elements along the longer side.
    pub fn mesh_size(&self, cells: f64) -> f64 {
        match *self {
            SplitSpec::Rectangle { a, below, above } => a.max(below).max(above) / cells,
            SplitSpec::AnnularSector { r_in, r_out, theta, .. } => (r_out * theta).max(r_out - r_in) / cells,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficientReport {
    pub k: [f64; 2],
    pub length: f64,
    pub curvature: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; absent when the right side vanishes.
    pub ratio: Option<f64>,
    pub pass: bool,
}

/// `min_i K(Γ, Ω_i) / (1 + l² + l²k²)` against `c Σ ‖∂_τ u_i‖²_{C¹}`.
pub fn sufficient_condition(candidate: &Candidate, split: &SplitSpec, exec: Exec) -> Result<SufficientReport> {
    let comps = split.components()?;
    let h = split.mesh_size(96.0);
    let k0 = compute_k_on(&comps[0].mesh(h)?, h, exec)?.k;
    let k1 = compute_k_on(&comps[1].mesh(h)?, h, exec)?.k;
    let l = comps[0].gamma_length();
    let kc = comps[0].gamma_curvature().max(comps[1].gamma_curvature());
    let lhs = k0.min(k1) / (1.0 + l * l + l * l * kc * kc);
    let c1 = candidate.c1_tangential();
    let rhs = C_ABS * (c1[0] * c1[0] + c1[1] * c1[1]);
    let ratio = if rhs > 0.0 { Some(lhs / rhs) } else { None };
    Ok(SufficientReport { k: [k0, k1], length: l, curvature: kc, lhs, rhs, ratio, pass: ratio.map_or(true, |r| r > 1.0) })
}

/// Lower-bound prefactor for graphs with Lipschitz constant `lip`: the smaller
/// of `(1 + lip)^{-3/2}` and `(1 + lip²)^{-3/2}`.
pub fn graph_prefactor(lip: f64) -> f64 {
    (1.0 + lip).powf(-1.5).min((1.0 + lip * lip).powf(-1.5))
}

/// Largest width `h` with `prefactor · π / (2h) ≥ c M² (1 + l² + l²k²)`.
pub fn thin_domain_h(lip: f64, m: f64, l: f64, k: f64) -> f64 {
    graph_prefactor(lip) * PI / (2.0 * C_ABS * m * m * (1.0 + l * l + l * l * k * k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub delta: f64,
    pub k: f64,
    pub k_delta: f64,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupTable {
    pub length: f64,
    pub rows: Vec<BlowupRow>,
    pub increasing: bool,
    pub min_k_delta: f64,
}

/// `K(Γ, Γ_δ^+)` for a straight `Γ` of the given length over the listed `δ`.
/// Cells are `length / nx` by `δ / ny` with `nx` capped so the trace problem stays dense-solvable.
pub fn blowup_study(length: f64, deltas: &[f64], ny: usize, exec: Exec) -> Result<BlowupTable> {
    let mut rows = Vec::new();
    for &delta in deltas {
        if !(delta > 0.0 && delta < 0.5 * length) {
            rows.push(BlowupRow { delta, k: f64::NAN, k_delta: f64::NAN, nodes: 0, note: Some("neighbourhood is not split in two".into()) });
            continue;
        }
        let hx = (4.0 * delta / ny as f64).clamp(length / 640.0, length / 64.0);
        let mesh = DomainSpec::HalfStadium { length, delta, ny }.mesh(hx)?;
        match compute_k_on(&mesh, hx, exec) {
            Ok(r) => rows.push(BlowupRow { delta, k: r.k, k_delta: r.k * delta, nodes: r.nodes, note: None }),
            Err(e) => rows.push(BlowupRow { delta, k: f64::NAN, k_delta: f64::NAN, nodes: mesh.nodes.len(), note: Some(e.to_string()) }),
        }
    }
    let mut sorted: Vec<&BlowupRow> = rows.iter().filter(|r| r.k.is_finite()).collect();
    sorted.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let increasing = sorted.windows(2).all(|w| w[1].k > w[0].k);
    let min_k_delta = sorted.iter().map(|r| r.k_delta).fold(f64::INFINITY, f64::min);
    Ok(BlowupTable { length, rows, increasing, min_k_delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((rectangle_k(1.0, 1.0) - 3.153_348_094_937).abs() < 1e-11);
        assert!((rectangle_k(2.0, 1e3) - PI / 2.0).abs() < 1e-12);
        assert!((rectangle_k(100.0, 1.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn coarse_square() {
        let r = compute_k_on(&DomainSpec::rectangle(1.0, 1.0).mesh(1.0 / 16.0).unwrap(), 1.0 / 16.0, Exec::Sequential).unwrap();
        assert!((r.k / rectangle_k(1.0, 1.0) - 1.0).abs() < 0.02, "{}", r.k);
        assert!(r.k >= rectangle_k(1.0, 1.0));
        assert!(r.positive);
        assert!((r.trace_norm - 1.0).abs() < 1e-10);
        assert!(r.rayleigh_residual < 1e-8);
    }

    #[test]
    fn inverse_iteration_agrees() {
        let m = DomainSpec::rectangle(1.0, 1.0).mesh(1.0 / 16.0).unwrap();
        let dense = compute_k_on(&m, 1.0 / 16.0, Exec::Sequential).unwrap().k;
        let (k, _) = eigen::inverse_iteration(&m, 1e-12, 500).unwrap();
        assert!((k - dense).abs() < 1e-8 * dense);
    }

    #[test]
    fn thin_width_prefactor() {
        let h0 = thin_domain_h(0.0, 1.0, 1.0, 0.0);
        assert!((h0 - PI / (2.0 * C_ABS * 2.0)).abs() < 1e-15);
        assert!((thin_domain_h(1.0, 1.0, 1.0, 0.0) / h0 - 2f64.powf(-1.5)).abs() < 1e-15);
    }
}
