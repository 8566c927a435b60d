//! Dormand–Prince 5(4) integrator with an optional state-resizing hook.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-10, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are the error weights b − b*
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    /// Integrates `y' = f(t, y)` from `t0` to `t1` in place.
    ///
    /// `after_step` runs after every accepted step and may resize `y`.
    pub fn integrate<F, G>(&self, mut f: F, t0: f64, t1: f64, y: &mut Vec<f64>, mut after_step: G) -> Result<OdeStats>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        G: FnMut(&mut Vec<f64>) -> Result<()>,
    {
        let mut stats = OdeStats { accepted: 0, rejected: 0 };
        if t1 <= t0 {
            return Ok(stats);
        }
        let mut t = t0;
        let mut h = self.initial_step(&mut f, t0, y, t1 - t0);
        let mut k: Vec<Vec<f64>> = Vec::new();
        let mut tmp = Vec::new();
        while t < t1 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::NoConvergence {
                    iterations: self.max_steps,
                    residual: t1 - t,
                    best: None,
                });
            }
            let dim = y.len();
            k.resize_with(7, Vec::new);
            for ki in k.iter_mut() {
                ki.resize(dim, 0.0);
            }
            tmp.resize(dim, 0.0);
            h = h.min(t1 - t);
            f(t, y, &mut k[0]);
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += h * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                let (_, rest) = k.split_at_mut(s);
                f(t + C[s] * h, &tmp, &mut rest[0]);
            }
            // tmp now holds the fifth-order solution (stage 7 argument)
            let mut err = 0.0f64;
            for i in 0..dim {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let scale = self.atol + self.rtol * y[i].abs().max(tmp[i].abs());
                err = err.max((h * e).abs() / scale);
            }
            if err <= 1.0 {
                t += h;
                y.copy_from_slice(&tmp);
                stats.accepted += 1;
                after_step(y)?;
            } else {
                stats.rejected += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if h < 1e-14 * t1.abs().max(1e-300) {
                return Err(Error::NoConvergence { iterations: stats.accepted, residual: err, best: None });
            }
        }
        Ok(stats)
    }

    fn initial_step<F: FnMut(f64, &[f64], &mut [f64])>(&self, f: &mut F, t0: f64, y: &[f64], span: f64) -> f64 {
        let mut dy = vec![0.0; y.len()];
        f(t0, y, &mut dy);
        let d0 = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let d1 = dy.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let h = if d1 < 1e-300 { span } else { 0.01 * (d0.max(self.atol) / d1) };
        h.min(span)
    }
}
