//! P1 assembly and the first mixed Steklov-Dirichlet eigenpair.
//!
//! The generalized problem `S v = λ B v` has a mass `B` supported on `Γ`;
//! eliminating the interior unknowns gives the dense Γ-trace problem
//! `D x = λ M x` with the discrete Dirichlet-to-Neumann map `D`.

use super::mesh::Mesh;
use super::sparse::{Csr, Skyline};
use crate::par::{self, Exec};
use crate::{Error, Result};

/// Stiffness over all nodes.
pub fn stiffness(mesh: &Mesh) -> Csr {
    let mut t = Vec::with_capacity(9 * mesh.tris.len());
    for tri in &mesh.tris {
        let p = tri.map(|k| mesh.nodes[k]);
        let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
        let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
        let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
        for i in 0..3 {
            for j in 0..3 {
                t.push((tri[i], tri[j], (b[i] * b[j] + c[i] * c[j]) / (2.0 * area2)));
            }
        }
    }
    Csr::from_triplets(mesh.nodes.len(), t)
}

/// Boundary mass on `Γ` with an optional edge weight (midpoint value).
pub fn gamma_mass(mesh: &Mesh, weight: &dyn Fn([f64; 2]) -> f64) -> Csr {
    let mut t = Vec::with_capacity(4 * mesh.gamma.len());
    for e in &mesh.gamma {
        let (p, q) = (mesh.nodes[e[0]], mesh.nodes[e[1]]);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        let w = weight([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]) * len / 6.0;
        t.push((e[0], e[0], 2.0 * w));
        t.push((e[1], e[1], 2.0 * w));
        t.push((e[0], e[1], w));
        t.push((e[1], e[0], w));
    }
    Csr::from_triplets(mesh.nodes.len(), t)
}

/// Cyclic Jacobi on a dense symmetric matrix (row-major); eigenvalues and
/// column eigenvectors in ascending order.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j].powi(2)).sum();
        if off.sqrt() <= 1e-15 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let vals = idx.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new, &old) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = v[k * n + old];
        }
    }
    (vals, vecs)
}

/// Dense Cholesky `M = L Lᵀ` (row-major lower factor).
fn dense_cholesky(m: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::DegenerateMarking(format!("Γ mass is singular at trace node {i}")));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// First eigenpair of the Γ-trace problem, lifted to all mesh nodes.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Nodal values, Dirichlet nodes zero, normalized so `∫_Γ v² = 1` and `v ≥ 0`.
    pub v: Vec<f64>,
    pub trace_nodes: usize,
    pub second: Option<f64>,
}

/// Splits free nodes into trace (on `Γ`) and interior sets.
pub fn partition(mesh: &Mesh) -> (Vec<usize>, Vec<usize>) {
    let mut on_gamma = vec![false; mesh.nodes.len()];
    for e in &mesh.gamma {
        on_gamma[e[0]] = true;
        on_gamma[e[1]] = true;
    }
    let free = |k: &usize| !mesh.dirichlet[*k];
    let trace: Vec<usize> = (0..mesh.nodes.len()).filter(free).filter(|&k| on_gamma[k]).collect();
    let interior: Vec<usize> = (0..mesh.nodes.len()).filter(free).filter(|&k| !on_gamma[k]).collect();
    (trace, interior)
}

/// Smallest `λ` with `S v = λ B v` via the dense Schur complement on `Γ`.
pub fn steklov_first(mesh: &Mesh, exec: Exec) -> Result<Eigenpair> {
    let (trace, interior) = partition(mesh);
    let m = trace.len();
    if m == 0 || mesh.gamma_length() <= 0.0 {
        return Err(Error::DegenerateMarking("no free nodes on the marked boundary".into()));
    }
    let s = stiffness(mesh);
    let b = gamma_mass(mesh, &|_| 1.0);
    let sii = s.submatrix(&interior);
    let fac = if interior.is_empty() { None } else { Some(Skyline::factor(&sii)?) };
    let mut pos_i = vec![usize::MAX; mesh.nodes.len()];
    for (k, &g) in interior.iter().enumerate() {
        pos_i[g] = k;
    }
    let mut pos_t = vec![usize::MAX; mesh.nodes.len()];
    for (k, &g) in trace.iter().enumerate() {
        pos_t[g] = k;
    }
    // Columns of S_IΓ, solves, then D[:, j] = S_ΓΓ e_j - S_ΓI y_j.
    let cols: Vec<(Vec<f64>, Vec<f64>)> = par::map_indexed(exec, m, |j| {
        let g = trace[j];
        let mut rhs = vec![0.0; interior.len()];
        let mut dcol = vec![0.0; m];
        for (k, v) in s.row(g) {
            if pos_i[k] != usize::MAX {
                rhs[pos_i[k]] = v;
            } else if pos_t[k] != usize::MAX {
                dcol[pos_t[k]] += v;
            }
        }
        let y = fac.as_ref().map_or_else(Vec::new, |f| f.solve(&rhs));
        for (r, &gr) in trace.iter().enumerate() {
            let mut acc = 0.0;
            for (k, v) in s.row(gr) {
                if pos_i[k] != usize::MAX {
                    acc += v * y[pos_i[k]];
                }
            }
            dcol[r] -= acc;
        }
        (dcol, y)
    });
    let mut d = vec![0.0; m * m];
    for (j, (col, _)) in cols.iter().enumerate() {
        for r in 0..m {
            d[r * m + j] = col[r];
        }
    }
    for r in 0..m {
        for c in r + 1..m {
            let avg = 0.5 * (d[r * m + c] + d[c * m + r]);
            d[r * m + c] = avg;
            d[c * m + r] = avg;
        }
    }
    let mut mm = vec![0.0; m * m];
    for (r, &gr) in trace.iter().enumerate() {
        for (k, v) in b.row(gr) {
            if pos_t[k] != usize::MAX {
                mm[r * m + pos_t[k]] = v;
            }
        }
    }
    // C = L⁻¹ D L⁻ᵀ.
    let l = dense_cholesky(&mm, m)?;
    let lsolve = |col: &mut [f64]| {
        for i in 0..m {
            let mut s = col[i];
            for k in 0..i {
                s -= l[i * m + k] * col[k];
            }
            col[i] = s / l[i * m + i];
        }
    };
    let mut tmp = vec![0.0; m * m];
    for j in 0..m {
        let mut col: Vec<f64> = (0..m).map(|r| d[r * m + j]).collect();
        lsolve(&mut col);
        for r in 0..m {
            tmp[r * m + j] = col[r];
        }
    }
    let mut cmat = vec![0.0; m * m];
    for r in 0..m {
        let mut row: Vec<f64> = (0..m).map(|c| tmp[r * m + c]).collect();
        lsolve(&mut row);
        for c in 0..m {
            cmat[r * m + c] = row[c];
        }
    }
    let (vals, vecs) = jacobi_eigen(&cmat, m);
    // x = L⁻ᵀ y.
    let mut x: Vec<f64> = (0..m).map(|r| vecs[r * m]).collect();
    for i in (0..m).rev() {
        let mut s = x[i];
        for k in i + 1..m {
            s -= l[k * m + i] * x[k];
        }
        x[i] = s / l[i * m + i];
    }
    let mut v = vec![0.0; mesh.nodes.len()];
    for (j, &g) in trace.iter().enumerate() {
        v[g] = x[j];
    }
    for (k, &g) in interior.iter().enumerate() {
        v[g] = -(0..m).map(|j| cols[j].1.get(k).copied().unwrap_or(0.0) * x[j]).sum::<f64>();
    }
    let norm = b.dot_form(&v, &v).sqrt();
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for x in v.iter_mut() {
        *x *= sign / norm;
    }
    Ok(Eigenpair { lambda: vals[0], v, trace_nodes: m, second: vals.get(1).copied() })
}

/// Shift-free inverse iteration `x ← S⁻¹ B x` on the full free system, with a
/// Rayleigh-quotient stopping rule. Slow when the first two eigenvalues cluster.
pub fn inverse_iteration(mesh: &Mesh, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
    let free: Vec<usize> = (0..mesh.nodes.len()).filter(|&k| !mesh.dirichlet[k]).collect();
    let s = stiffness(mesh).submatrix(&free);
    let b = gamma_mass(mesh, &|_| 1.0).submatrix(&free);
    let fac = Skyline::factor(&s)?;
    let mut x = vec![1.0; free.len()];
    let mut lambda = f64::INFINITY;
    for it in 1..=max_iter {
        let y = fac.solve(&b.matvec(&x));
        let nb = b.dot_form(&y, &y).sqrt();
        x = y.iter().map(|v| v / nb).collect();
        let next = s.dot_form(&x, &x);
        let change = (next - lambda).abs();
        lambda = next;
        if change <= tol * lambda {
            return Ok((lambda, it));
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, change: f64::NAN })
}
