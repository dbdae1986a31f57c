//! Triangulations with a marked Steklov portion `Γ` of the boundary; the
//! rest of the boundary carries the homogeneous Dirichlet condition.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Clone, Debug, Default)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub tris: Vec<[usize; 3]>,
    /// Nodes with `v = 0` (or another prescribed value, for Robin solves).
    pub dirichlet: Vec<bool>,
    /// Boundary edges on `Γ`.
    pub gamma: Vec<[usize; 2]>,
}

/// Which arc of an annular sector is marked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arc {
    Inner,
    Outer,
}

/// Domain `A` with its marked portion `Γ ⊂ ∂A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `(0, a) × (0, b)`, `Γ = (g0, g1) × {0}` (whole bottom edge by default).
    Rectangle {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<[f64; 2]>,
    },
    /// `r_inner < r < r_outer`, `0 < θ < theta`; `Γ` is one full arc.
    AnnularSector { r_inner: f64, r_outer: f64, theta: f64, marked: Arc },
    /// Upper half of the `δ`-neighbourhood of `[0, length] × {0}`: a rectangle
    /// capped by two quarter discs. `Γ` is the open segment.
    HalfStadium { length: f64, delta: f64, ny: usize },
}

impl DomainSpec {
    pub fn rectangle(a: f64, b: f64) -> DomainSpec {
        DomainSpec::Rectangle { a, b, gamma: None }
    }

    pub fn gamma_length(&self) -> f64 {
        match *self {
            DomainSpec::Rectangle { a, gamma, .. } => gamma.map_or(a, |g| g[1] - g[0]),
            DomainSpec::AnnularSector { r_inner, r_outer, theta, marked } => {
                theta * if marked == Arc::Inner { r_inner } else { r_outer }
            }
            DomainSpec::HalfStadium { length, .. } => length,
        }
    }

    /// `sup |curv|` on `Γ`.
    pub fn gamma_curvature(&self) -> f64 {
        match *self {
            DomainSpec::AnnularSector { r_inner, r_outer, marked, .. } => {
                1.0 / if marked == Arc::Inner { r_inner } else { r_outer }
            }
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::Rectangle { a, b, gamma } => {
                a > 0.0 && b > 0.0 && gamma.map_or(true, |g| 0.0 <= g[0] && g[0] < g[1] && g[1] <= a)
            }
            DomainSpec::AnnularSector { r_inner, r_outer, theta, .. } => {
                0.0 < r_inner && r_inner < r_outer && theta > 0.0 && theta < 2.0 * PI
            }
            DomainSpec::HalfStadium { length, delta, ny } => length > 0.0 && delta > 0.0 && ny >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DegenerateMarking(format!("{self:?}")))
        }
    }

    /// Triangulation with target edge length `h` (`h` along the thin
    /// direction is set by `ny` for half-stadia).
    pub fn mesh(&self, h: f64) -> Result<Mesh> {
        self.validate()?;
        match *self {
            DomainSpec::Rectangle { a, b, gamma } => {
                let (g0, g1) = gamma.map_or((0.0, a), |g| (g[0], g[1]));
                Ok(rectangle(a, b, (a / h).round().max(1.0) as usize, (b / h).round().max(1.0) as usize, (g0, g1)))
            }
            DomainSpec::AnnularSector { r_inner, r_outer, theta, marked } => {
                let nr = ((r_outer - r_inner) / h).round().max(1.0) as usize;
                let nt = (theta * r_outer / h).round().max(2.0) as usize;
                Ok(annular_sector(r_inner, r_outer, theta, nr, nt, marked))
            }
            DomainSpec::HalfStadium { length, delta, ny } => {
                let nx = (length / h).round().max(2.0) as usize;
                Ok(half_stadium(length, delta, nx, ny))
            }
        }
    }
}

#[derive(Default)]
struct Builder {
    mesh: Mesh,
    index: HashMap<(i64, i64), usize>,
    scale: f64,
}

impl Builder {
    fn new(scale: f64) -> Self {
        Builder { scale, ..Default::default() }
    }

    /// Node at `p`, merged with an existing node at the same location.
    fn node(&mut self, p: [f64; 2]) -> usize {
        let key = ((p[0] / self.scale * 1e9).round() as i64, (p[1] / self.scale * 1e9).round() as i64);
        if let Some(&k) = self.index.get(&key) {
            return k;
        }
        self.mesh.nodes.push(p);
        self.mesh.dirichlet.push(false);
        let k = self.mesh.nodes.len() - 1;
        self.index.insert(key, k);
        k
    }

    /// Counter-clockwise triangle; degenerate ones are dropped.
    fn tri(&mut self, a: usize, b: usize, c: usize) {
        if a == b || b == c || a == c {
            return;
        }
        let (p, q, r) = (self.mesh.nodes[a], self.mesh.nodes[b], self.mesh.nodes[c]);
        let area = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
        if area.abs() < 1e-14 * self.scale * self.scale {
            return;
        }
        self.mesh.tris.push(if area > 0.0 { [a, b, c] } else { [a, c, b] });
    }

    /// Marks every boundary node Dirichlet except the interiors of `Γ` edges.
    fn finish(mut self, is_gamma: impl Fn([f64; 2], [f64; 2]) -> bool) -> Mesh {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.mesh.tris {
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *count.entry((e.0.min(e.1), e.0.max(e.1))).or_insert(0) += 1;
            }
        }
        let mut boundary: Vec<(usize, usize)> = count.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
        boundary.sort_unstable();
        let mut on_gamma = vec![false; self.mesh.nodes.len()];
        let mut on_other = vec![false; self.mesh.nodes.len()];
        for (a, b) in boundary {
            if is_gamma(self.mesh.nodes[a], self.mesh.nodes[b]) {
                self.mesh.gamma.push([a, b]);
                on_gamma[a] = true;
                on_gamma[b] = true;
            } else {
                on_other[a] = true;
                on_other[b] = true;
            }
        }
        for k in 0..self.mesh.nodes.len() {
            self.mesh.dirichlet[k] = on_other[k];
        }
        let _ = on_gamma;
        self.mesh
    }
}

/// Structured `nx × ny` rectangle `(0, a) × (0, b)` with `Γ = (g0, g1) × {0}`.
/// The Γ endpoints are snapped to grid lines.
pub fn rectangle(a: f64, b: f64, nx: usize, ny: usize, (g0, g1): (f64, f64)) -> Mesh {
    let mut bld = Builder::new(a.max(b));
    let mut id = vec![vec![0; ny + 1]; nx + 1];
    for (i, col) in id.iter_mut().enumerate() {
        for (j, slot) in col.iter_mut().enumerate() {
            *slot = bld.node([a * i as f64 / nx as f64, b * j as f64 / ny as f64]);
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            let (p00, p10, p01, p11) = (id[i][j], id[i + 1][j], id[i][j + 1], id[i + 1][j + 1]);
            if (i + j) % 2 == 0 {
                bld.tri(p00, p10, p11);
                bld.tri(p00, p11, p01);
            } else {
                bld.tri(p00, p10, p01);
                bld.tri(p10, p11, p01);
            }
        }
    }
    let hx = a / nx as f64;
    bld.finish(|p, q| {
        p[1].abs() < 1e-12 * b && q[1].abs() < 1e-12 * b && p[0].min(q[0]) >= g0 - 0.5 * hx && p[0].max(q[0]) <= g1 + 0.5 * hx
    })
}

/// Polar grid on `r_inner < r < r_outer`, `0 < θ < theta`.
pub fn annular_sector(r0: f64, r1: f64, theta: f64, nr: usize, nt: usize, marked: Arc) -> Mesh {
    let mut bld = Builder::new(r1);
    let mut id = vec![vec![0; nt + 1]; nr + 1];
    for (i, row) in id.iter_mut().enumerate() {
        let r = r0 + (r1 - r0) * i as f64 / nr as f64;
        for (j, slot) in row.iter_mut().enumerate() {
            let t = theta * j as f64 / nt as f64;
            *slot = bld.node([r * t.cos(), r * t.sin()]);
        }
    }
    for i in 0..nr {
        for j in 0..nt {
            let (p00, p10, p01, p11) = (id[i][j], id[i + 1][j], id[i][j + 1], id[i + 1][j + 1]);
            bld.tri(p00, p10, p11);
            bld.tri(p00, p11, p01);
        }
    }
    let target = if marked == Arc::Inner { r0 } else { r1 };
    bld.finish(|p, q| {
        let tol = 1e-9 * r1;
        (p[0].hypot(p[1]) - target).abs() < tol && (q[0].hypot(q[1]) - target).abs() < tol
    })
}

/// `(0, L) × (0, δ)` with `nx × ny` cells, plus quarter discs of radius `δ`
/// centred at both ends with `ny` rings so the interfaces conform.
pub fn half_stadium(length: f64, delta: f64, nx: usize, ny: usize) -> Mesh {
    let mut bld = Builder::new(length.max(delta));
    let mut id = vec![vec![0; ny + 1]; nx + 1];
    for (i, col) in id.iter_mut().enumerate() {
        for (j, slot) in col.iter_mut().enumerate() {
            *slot = bld.node([length * i as f64 / nx as f64, delta * j as f64 / ny as f64]);
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            let (p00, p10, p01, p11) = (id[i][j], id[i + 1][j], id[i][j + 1], id[i + 1][j + 1]);
            if (i + j) % 2 == 0 {
                bld.tri(p00, p10, p11);
                bld.tri(p00, p11, p01);
            } else {
                bld.tri(p00, p10, p01);
                bld.tri(p10, p11, p01);
            }
        }
    }
    let nt = (ny / 2).max(4);
    for (cx, t0) in [(0.0, 0.5 * PI), (length, 0.0)] {
        let mut ring = vec![vec![0; nt + 1]; ny + 1];
        for (i, row) in ring.iter_mut().enumerate() {
            let r = delta * i as f64 / ny as f64;
            for (j, slot) in row.iter_mut().enumerate() {
                let t = t0 + 0.5 * PI * j as f64 / nt as f64;
                *slot = bld.node([cx + r * t.cos(), r * t.sin()]);
            }
        }
        for i in 0..ny {
            for j in 0..nt {
                let (p00, p10, p01, p11) = (ring[i][j], ring[i + 1][j], ring[i][j + 1], ring[i + 1][j + 1]);
                bld.tri(p00, p10, p11);
                bld.tri(p00, p11, p01);
            }
        }
    }
    let tol = 1e-12 * length.max(delta);
    bld.finish(|p, q| {
        p[1].abs() < tol && q[1].abs() < tol && p[0].min(q[0]) >= -tol && p[0].max(q[0]) <= length + tol
    })
}

impl Mesh {
    pub fn area(&self) -> f64 {
        self.tris
            .iter()
            .map(|t| {
                let (p, q, r) = (self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
                0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
            })
            .sum()
    }

    pub fn gamma_length(&self) -> f64 {
        self.gamma
            .iter()
            .map(|e| {
                let (p, q) = (self.nodes[e[0]], self.nodes[e[1]]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum()
    }

    /// Uniform scaling of all coordinates.
    pub fn dilated(&self, s: f64) -> Mesh {
        let mut m = self.clone();
        for p in m.nodes.iter_mut() {
            p[0] *= s;
            p[1] *= s;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_counts() {
        let m = rectangle(2.0, 1.0, 4, 2, (0.0, 2.0));
        assert_eq!(m.nodes.len(), 15);
        assert_eq!(m.tris.len(), 16);
        assert!((m.area() - 2.0).abs() < 1e-14);
        assert!((m.gamma_length() - 2.0).abs() < 1e-14);
        assert_eq!(m.dirichlet.iter().filter(|d| !**d).count(), 3 + 3);
    }

    #[test]
    fn partial_marking() {
        let m = rectangle(2.0, 1.0, 8, 4, (0.0, 1.0));
        assert!((m.gamma_length() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stadium_area_and_conformity() {
        let (l, d) = (1.0, 0.1);
        let m = half_stadium(l, d, 20, 8);
        let exact = l * d + 0.5 * PI * d * d;
        assert!((m.area() - exact).abs() < 1e-2 * exact);
        assert!((m.gamma_length() - l).abs() < 1e-13);
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &m.tris {
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *count.entry((e.0.min(e.1), e.0.max(e.1))).or_insert(0) += 1;
            }
        }
        let boundary = count.values().filter(|&&c| c == 1).count();
        // bottom 20 + top 20 + two flats of 8 + two arcs of 4 each
        assert_eq!(boundary, 20 + 20 + 16 + 8);
    }

    #[test]
    fn sector_marks_inner_arc() {
        let m = annular_sector(1.0, 2.0, 1.0, 4, 16, Arc::Inner);
        assert!((m.gamma_length() - 1.0).abs() < 1e-3);
    }
}
