//! Exact vertical quadrature of fields that are polynomial in `z` on each
//! region of a vertical line.

use serde::{Deserialize, Serialize};

/// One region on a vertical line. With `d = z - zref`:
/// `φ^ξ = xi[0] + xi[1] d`, `φ^η = eta[0] + eta[1] d`,
/// `φ^z = z[0] + z[1] d + z[2] d²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub region: u8,
    pub zref: f64,
    pub xi: [f64; 2],
    pub eta: [f64; 2],
    pub z: [f64; 3],
}

impl Segment {
    /// Vertical segment `(0, 0, value)`.
    pub fn vertical(lo: f64, hi: f64, region: u8, value: f64) -> Segment {
        Segment { lo, hi, region, zref: 0.0, xi: [0.0; 2], eta: [0.0; 2], z: [value, 0.0, 0.0] }
    }

    pub fn phi(&self, z: f64) -> [f64; 3] {
        let d = z - self.zref;
        [
            self.xi[0] + self.xi[1] * d,
            self.eta[0] + self.eta[1] * d,
            self.z[0] + self.z[1] * d + self.z[2] * d * d,
        ]
    }

    /// Antiderivative of the horizontal part relative to `zref`.
    fn anti(&self, z: f64) -> [f64; 2] {
        let d = z - self.zref;
        [self.xi[0] * d + 0.5 * self.xi[1] * d * d, self.eta[0] * d + 0.5 * self.eta[1] * d * d]
    }
}

/// Ordered, contiguous regions covering the whole line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZProfile {
    pub segs: Vec<Segment>,
    anchors: Vec<f64>,
    at_anchor: Vec<[f64; 2]>,
}

impl ZProfile {
    /// `segs` must be sorted with `segs[k].hi == segs[k+1].lo`; the first and
    /// last may be unbounded provided their horizontal parts vanish.
    pub fn new(segs: Vec<Segment>) -> ZProfile {
        assert!(!segs.is_empty());
        let n = segs.len();
        let mut anchors = Vec::with_capacity(n);
        let mut at_anchor = Vec::with_capacity(n);
        for k in 0..n {
            let s = &segs[k];
            let a = if s.lo.is_finite() { s.lo } else { s.hi };
            let v = if k == 0 {
                [0.0, 0.0]
            } else {
                let p = &segs[k - 1];
                let base: [f64; 2] = at_anchor[k - 1];
                let pa: f64 = anchors[k - 1];
                let (x1, x0) = (p.anti(p.hi), p.anti(pa));
                [base[0] + x1[0] - x0[0], base[1] + x1[1] - x0[1]]
            };
            anchors.push(a);
            at_anchor.push(v);
        }
        ZProfile { segs, anchors, at_anchor }
    }

    /// Index of the region containing `z` (upper boundaries belong to the upper region).
    pub fn locate(&self, z: f64) -> usize {
        let k = self.segs.partition_point(|s| s.hi <= z);
        k.min(self.segs.len() - 1)
    }

    pub fn phi(&self, z: f64) -> [f64; 3] {
        self.segs[self.locate(z)].phi(z)
    }

    /// `∫_{z*}^{z} φ^{ξη}` from the first finite boundary `z*`.
    pub fn primitive(&self, z: f64) -> [f64; 2] {
        let k = self.locate(z);
        let s = &self.segs[k];
        let (a, b) = (s.anti(z), s.anti(self.anchors[k]));
        [self.at_anchor[k][0] + a[0] - b[0], self.at_anchor[k][1] + a[1] - b[1]]
    }

    /// `I(s, t) = ∫_s^t (φ^ξ, φ^η) dz`; `I(s, t) = -I(t, s)`.
    pub fn integrate(&self, s: f64, t: f64) -> [f64; 2] {
        if s == t {
            return [0.0, 0.0];
        }
        let (fs, ft) = (self.primitive(s), self.primitive(t));
        [ft[0] - fs[0], ft[1] - fs[1]]
    }

    /// Finite region boundaries in increasing order.
    pub fn boundaries(&self) -> Vec<f64> {
        self.segs.iter().skip(1).map(|s| s.lo).collect()
    }
}
