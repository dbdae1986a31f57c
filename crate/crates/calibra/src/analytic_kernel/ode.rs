//! Dormand-Prince 5(4) with adaptive step control for small fixed-size systems.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
    /// Abort when any component exceeds this magnitude.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h_init: 0.0, max_steps: 200_000, blowup: 1e12 }
    }
}

impl OdeOptions {
    pub fn tight() -> Self {
        OdeOptions { rtol: 1e-13, atol: 1e-14, ..Default::default() }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stateless integrator; `N` is the system size.
pub struct Dopri<const N: usize> {
    pub opts: OdeOptions,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl<const N: usize> Dopri<N> {
    pub fn new(opts: OdeOptions) -> Self {
        Dopri { opts }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
    pub fn solve<F>(&self, mut f: F, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = self.solve_at(&mut f, t0, y0, &[t1])?;
        Ok(out.pop().unwrap())
    }

    /// Returns the solution at each of `ts`, which must be monotone in the
    /// direction of integration away from `t0`. Steps land exactly on them.
    pub fn solve_at<F>(&self, f: &mut F, t0: f64, y0: [f64; N], ts: &[f64]) -> Result<Vec<[f64; N]>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let o = &self.opts;
        let mut out = Vec::with_capacity(ts.len());
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let span = ts.last().map(|&e| (e - t0).abs()).unwrap_or(0.0);
        let mut h_abs = if o.h_init > 0.0 { o.h_init } else { (span * 0.01).max(1e-6) };
        let mut steps = 0usize;
        for &target in ts {
            let dir = if target >= t { 1.0 } else { -1.0 };
            while (target - t).abs() > 1e-15 * (1.0 + t.abs()) {
                steps += 1;
                if steps > o.max_steps {
                    return Err(Error::Ode(format!("step budget exhausted at t = {t}")));
                }
                let mut last = false;
                if h_abs >= (target - t).abs() {
                    h_abs = (target - t).abs();
                    last = true;
                }
                let h = dir * h_abs;
                let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
                let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
                let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
                let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
                let k6 = f(
                    t + h,
                    &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
                );
                let y5 = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
                let k7 = f(t + h, &y5);
                let mut err = 0.0f64;
                let mut finite = true;
                for i in 0..N {
                    let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let sc = o.atol + o.rtol * y[i].abs().max(y5[i].abs());
                    err = err.max((e / sc).abs());
                    finite &= y5[i].is_finite();
                }
                if !finite || !err.is_finite() {
                    h_abs *= 0.25;
                    if h_abs < 1e-14 * (1.0 + t.abs()) {
                        return Err(Error::Ode(format!("non-finite state near t = {t}")));
                    }
                    continue;
                }
                if err <= 1.0 {
                    t = if last { target } else { t + h };
                    y = y5;
                    k1 = k7;
                    if y.iter().any(|v| v.abs() > o.blowup) {
                        return Err(Error::Ode(format!("blow-up near t = {t}")));
                    }
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if err <= 1.0 || !last {
                    h_abs *= fac;
                } else {
                    h_abs *= fac.min(1.0);
                }
                if h_abs < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::Ode(format!("step size underflow near t = {t}")));
                }
            }
            out.push(y);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_backward() {
        let d = Dopri::<1>::new(OdeOptions::tight());
        let y = d.solve(|_, y| [y[0]], 0.0, [1.0], 1.0).unwrap();
        assert!((y[0] - std::f64::consts::E).abs() < 1e-12);
        let back = d.solve(|_, y| [y[0]], 1.0, y, 0.0).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_blows_up() {
        let d = Dopri::<1>::new(OdeOptions::default());
        assert!(d.solve(|_, y| [1.0 + y[0] * y[0]], 0.0, [0.0], 2.0).is_err());
    }

    #[test]
    fn dense_points() {
        let d = Dopri::<2>::new(OdeOptions::tight());
        let ts = [0.5, 1.0, 2.0];
        let mut f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let ys = d.solve_at(&mut f, 0.0, [0.0, 1.0], &ts).unwrap();
        for (t, y) in ts.iter().zip(ys) {
            assert!((y[0] - t.sin()).abs() < 1e-11);
        }
    }
}
