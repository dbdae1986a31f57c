//! Symmetric sparse matrices: CSR storage, reverse Cuthill-McKee ordering and
//! an envelope (skyline) Cholesky factorization.

use crate::{Error, Result};
use std::collections::VecDeque;

/// Square CSR matrix with sorted, deduplicated columns per row.
#[derive(Clone, Debug)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Csr {
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *data.last_mut().expect("entry exists") += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Csr { n, indptr, indices, data }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn dot_form(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    /// Principal submatrix on `keep` (in that order).
    pub fn submatrix(&self, keep: &[usize]) -> Csr {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = Vec::new();
        for (new, &old) in keep.iter().enumerate() {
            for (j, v) in self.row(old) {
                if map[j] != usize::MAX {
                    t.push((new, map[j], v));
                }
            }
        }
        Csr::from_triplets(keep.len(), t)
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn rcm(a: &Csr) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.indptr[i + 1] - a.indptr[i]).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n).filter(|&i| !seen[i]).min_by_key(|&i| degree[i]).expect("unvisited node");
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !seen[j]).collect();
            nb.sort_by_key(|&j| degree[j]);
            for j in nb {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// `P A Pᵀ = L Lᵀ` with `L` stored row-wise over each row's envelope.
#[derive(Clone, Debug)]
pub struct Skyline {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl Skyline {
    /// Factors a symmetric positive definite matrix after RCM reordering.
    pub fn factor(a: &Csr) -> Result<Skyline> {
        Self::factor_with(a, rcm(a))
    }

    pub fn factor_with(a: &Csr, perm: Vec<usize>) -> Result<Skyline> {
        let n = a.n;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                let c = inv[j];
                if c < first[new] {
                    first[new] = c;
                }
            }
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut vals = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let c = inv[j];
                if c <= new {
                    vals[start[new] + c - first[new]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = vals[start[i] + j - fi];
                let (ri, rj) = (start[i] - fi, start[j] - fj);
                for k in k0..j {
                    s -= vals[ri + k] * vals[rj + k];
                }
                if j < i {
                    vals[ri + j] = s / vals[start[j] + j - fj];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::Solver(format!("matrix not positive definite at pivot {i} ({s:.3e})")));
                    }
                    vals[ri + i] = s.sqrt();
                }
            }
        }
        Ok(Skyline { n, perm, first, start, vals })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let (fi, ri) = (self.first[i], self.start[i] - self.first[i]);
            let mut s = y[i];
            for k in fi..i {
                s -= self.vals[ri + k] * y[k];
            }
            y[i] = s / self.vals[ri + i];
        }
        for i in (0..n).rev() {
            let (fi, ri) = (self.first[i], self.start[i] - self.first[i]);
            y[i] /= self.vals[ri + i];
            let xi = y[i];
            for k in fi..i {
                y[k] -= self.vals[ri + k] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    pub fn envelope(&self) -> usize {
        self.vals.len()
    }
}
