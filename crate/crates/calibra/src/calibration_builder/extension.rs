//! Extension of the graph-variant field away from the tube around `Γ`.
//!
//! On each outer component `Ω'_i ∖ U'` the weight `v̂_i` solves
//! `Δv̂ = 0`, `∂_ν v̂ = α |∇η| v̂` on the tube boundary `Γ_i` and `v̂ = 1` on
//! the rest, with `α = M/(1 - Mk)`. The component is modelled as a
//! rectangle whose bottom edge is `Γ_i`, so `|∇η| = 1` there.

use super::params::CalibrationParams;
use crate::euler_check::Candidate;
use crate::par::Exec;
use crate::steklov_capacity::sparse::{Csr, Skyline};
use crate::steklov_capacity::{compute_k_on, eigen, mesh, Mesh};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSpec {
    /// Length of `Γ_i`.
    pub width: f64,
    /// Depth of the outer component.
    pub depth: f64,
    /// Tube halfwidth `k`.
    pub k: f64,
    /// Mesh cells across the depth.
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub alpha: f64,
    /// `K(Γ_i, Ω'_i ∖ U')` on the same mesh.
    pub capacity: f64,
    pub min_v: f64,
    pub max_v: f64,
    /// `sup |∇v̂| / v̂` over elements.
    pub grad_ratio: f64,
    /// `max |∂_ν v̂ - α v̂| / (α v̂)` on the middle half of `Γ_i`, one-sided
    /// second order. The corners, where the Robin and Dirichlet parts meet,
    /// are singular and left out.
    pub normal_mismatch: f64,
    /// `(4 sup|∇u| + 2 sup|∇v̂|/v̂)⁻¹`.
    pub delta_cap: f64,
    pub delta: f64,
    pub delta_ok: bool,
    pub h: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug)]
pub struct Extension {
    pub report: ExtensionReport,
    pub mesh: Mesh,
    pub v: Vec<f64>,
}

/// `(2∇u - 2((u - z)/v̂)∇v̂, |∇u - ((u - z)/v̂)∇v̂|²)`.
pub fn outer_field(u: f64, grad_u: [f64; 2], z: f64, v: f64, grad_v: [f64; 2]) -> [f64; 3] {
    let r = (u - z) / v;
    let g = [grad_u[0] - r * grad_v[0], grad_u[1] - r * grad_v[1]];
    [2.0 * g[0], 2.0 * g[1], g[0] * g[0] + g[1] * g[1]]
}

fn tri_grad(m: &Mesh, t: [usize; 3], v: &[f64]) -> [f64; 2] {
    let [a, b, c] = t.map(|k| m.nodes[k]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let (d1, d2) = (v[t[1]] - v[t[0]], v[t[2]] - v[t[0]]);
    [(d1 * (c[1] - a[1]) - d2 * (b[1] - a[1])) / det, (d2 * (b[0] - a[0]) - d1 * (c[0] - a[0])) / det]
}

/// Solves for `v̂` after checking `α < K(Γ_i, Ω'_i ∖ U')`.
pub fn build_extension_field(
    c: &Candidate,
    params: &CalibrationParams,
    spec: &ExtensionSpec,
    exec: Exec,
) -> Result<Extension> {
    if !(params.m * spec.k < 1.0) {
        return Err(Error::Parameter(format!("M k = {} >= 1", params.m * spec.k)));
    }
    let alpha = params.m / (1.0 - params.m * spec.k);
    let ny = spec.cells.max(4);
    let h = spec.depth / ny as f64;
    let nx = (spec.width / h).round().max(4.0) as usize;
    let m = mesh::rectangle(spec.width, spec.depth, nx, ny, (0.0, spec.width));
    let capacity = compute_k_on(&m, h, exec)?.k;
    if !(alpha < capacity) {
        return Err(Error::Coercivity { lhs: alpha, capacity });
    }
    let s = eigen::stiffness(&m);
    let b = eigen::gamma_mass(&m, &|_| 1.0);
    let n = m.nodes.len();
    let free: Vec<usize> = (0..n).filter(|&k| !m.dirichlet[k]).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &k) in free.iter().enumerate() {
        slot[k] = i;
    }
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for &k in &free {
        for (j, a) in s.row(k) {
            let v = a - alpha * b.get(k, j);
            if m.dirichlet[j] {
                rhs[slot[k]] -= v;
            } else {
                trip.push((slot[k], slot[j], v));
            }
        }
    }
    let a = Csr::from_triplets(free.len(), trip);
    let x = Skyline::factor(&a)?.solve(&rhs);
    let mut v = vec![1.0; n];
    for (i, &k) in free.iter().enumerate() {
        v[k] = x[i];
    }
    let (min_v, max_v) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let grad_ratio = m
        .tris
        .iter()
        .map(|&t| {
            let g = tri_grad(&m, t, &v);
            g[0].hypot(g[1]) / t.iter().map(|&k| v[k]).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    // nodes on columns x = i h_x, rows y = j h
    let hx = spec.width / nx as f64;
    let find = |x: f64, y: f64| {
        m.nodes.iter().position(|p| (p[0] - x).abs() < 1e-9 * hx && (p[1] - y).abs() < 1e-9 * h).expect("grid node")
    };
    let mut normal_mismatch: f64 = 0.0;
    for i in nx / 4..=3 * nx / 4 {
        let x0 = hx * i as f64;
        let [v0, v1, v2] = [0.0, h, 2.0 * h].map(|y| v[find(x0, y)]);
        let dn = -(-3.0 * v0 + 4.0 * v1 - v2) / (2.0 * h);
        normal_mismatch = normal_mismatch.max((dn - alpha * v0).abs() / (alpha * v0));
    }
    let sup_grad_u = c
        .chart
        .grid(32)
        .iter()
        .flat_map(|&(xi, eta)| [c.u1.grad(xi, eta), c.u2.grad(xi, eta)])
        .map(|g| g[0].hypot(g[1]))
        .fold(0.0, f64::max);
    let delta_cap = 1.0 / (4.0 * sup_grad_u + 2.0 * grad_ratio);
    let report = ExtensionReport {
        alpha,
        capacity,
        min_v,
        max_v,
        grad_ratio,
        normal_mismatch,
        delta_cap,
        delta: params.delta.min(delta_cap),
        delta_ok: params.delta <= delta_cap,
        h,
        nodes: n,
    };
    Ok(Extension { report, mesh: m, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration_builder::{select_parameters, Variant};
    use crate::fixtures;

    fn setup(cap: f64) -> (Candidate, CalibrationParams) {
        let c = fixtures::build_candidate(&fixtures::pure_jump_line()).unwrap();
        let p = select_parameters(&c, Variant::Graph, 0.1, Some(cap)).unwrap();
        (c, p)
    }

    #[test]
    fn weight_is_at_least_one_and_matches_the_robin_trace() {
        let (c, p) = setup(3.0);
        let spec = ExtensionSpec { width: 1.0, depth: 0.5, k: 0.005, cells: 64 };
        let e = build_extension_field(&c, &p, &spec, Exec::Sequential).unwrap();
        let r = &e.report;
        assert!(r.min_v >= 1.0 - 1e-12 && r.max_v > 1.0, "{r:?}");
        assert!(r.normal_mismatch < 1e-4, "{r:?}");
        assert!(r.delta_ok && r.delta > 0.0);
    }

    #[test]
    fn mismatch_shrinks_with_the_mesh() {
        let (c, p) = setup(3.0);
        let m = [16, 32, 64].map(|cells| {
            let spec = ExtensionSpec { width: 1.0, depth: 0.5, k: 0.005, cells };
            build_extension_field(&c, &p, &spec, Exec::Sequential).unwrap().report.normal_mismatch
        });
        assert!(m[1] < m[0] && m[2] < m[1], "{m:?}");
    }

    #[test]
    fn thin_outer_domain_is_coercive() {
        let (c, p) = setup(3.0);
        let spec = ExtensionSpec { width: 1.0, depth: 0.05, k: 0.005, cells: 8 };
        let e = build_extension_field(&c, &p, &spec, Exec::Sequential).unwrap();
        assert!(e.report.capacity > 10.0 * e.report.alpha);
    }

    #[test]
    fn coercivity_failure_is_rejected() {
        let (c, mut p) = setup(3.0);
        p.m = 4.0;
        let spec = ExtensionSpec { width: 1.0, depth: 1.0, k: 0.005, cells: 16 };
        let e = build_extension_field(&c, &p, &spec, Exec::Sequential).unwrap_err();
        assert!(matches!(e, Error::Coercivity { .. }));
    }

    #[test]
    fn outer_field_is_saturated() {
        let f = outer_field(1.3, [0.2, -0.4], 1.25, 1.1, [0.0, 0.7]);
        assert!((f[0] * f[0] + f[1] * f[1] - 4.0 * f[2]).abs() < 1e-14);
        let g = outer_field(1.3, [0.2, -0.4], 1.3, 1.1, [0.0, 0.7]);
        assert!((g[0] - 0.4).abs() + (g[1] + 0.8).abs() + (g[2] - 0.2).abs() < 1e-15);
    }
}
