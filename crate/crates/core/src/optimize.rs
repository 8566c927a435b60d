//! Local optimizers: Nelder–Mead, safeguarded 1-D Newton on a finite-difference
//! derivative, and a joint Newton polish for stationarity systems.

use nalgebra::{DMatrix, DVector};

/// Step of the central differences used for stationarity residuals.
pub const FD_STEP: f64 = 1e-5;

/// Central-difference derivative of `f` along coordinate `i`.
pub fn partial(f: &impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

pub fn gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len()).map(|i| partial(f, x, i, h)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Finite-difference Hessian with step `h`.
pub fn hessian(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut hess = DMatrix::zeros(n, n);
    let eval = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut y = x.to_vec();
        y[di] += si * h;
        y[dj] += sj * h;
        f(&y)
    };
    for i in 0..n {
        hess[(i, i)] = (eval(i, 1.0, i, 0.0) - 2.0 * f0 + eval(i, -1.0, i, 0.0)) / (h * h);
        for j in 0..i {
            let v = (eval(i, 1.0, j, 1.0) - eval(i, 1.0, j, -1.0) - eval(i, -1.0, j, 1.0)
                + eval(i, -1.0, j, -1.0))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Stop once the simplex values span less than this.
    pub f_tol: f64,
    pub x_tol: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evals: 20_000, f_tol: 1e-15, x_tol: 1e-10, initial_step: 0.1 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl NelderMead {
    /// Minimizes `f` starting from `x0`.
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let evals = std::cell::Cell::new(0usize);
        let eval = |x: &[f64]| {
            evals.set(evals.get() + 1);
            let v = f(x);
            if v.is_nan() { f64::INFINITY } else { v }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let v = eval(&x);
            simplex.push((x, v));
        }
        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        loop {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex
                .iter()
                .skip(1)
                .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if (spread.abs() <= self.f_tol && size <= self.x_tol) || evals.get() >= self.max_evals {
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in simplex.iter().take(n) {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let along = |t: f64, worst: &[f64]| -> Vec<f64> {
                centroid.iter().zip(worst).map(|(c, w)| c + t * (w - c)).collect()
            };
            let worst = simplex[n].0.clone();
            let xr = along(-alpha, &worst);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(-gamma, &worst);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(-rho, &worst);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(rho, &worst);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = best.iter().zip(&item.0).map(|(b, x)| b + sigma * (x - b)).collect();
                        let v = eval(&x);
                        *item = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value, evals: evals.get() }
    }

    /// Restarts from the incumbent until the value stops improving.
    pub fn minimize_restarted(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64], restarts: usize) -> Minimum {
        let mut best = self.minimize(&f, x0);
        let mut step = self.clone();
        for _ in 0..restarts {
            step.initial_step = (step.initial_step * 0.3).max(1e-4);
            let next = step.minimize(&f, &best.x);
            let improved = next.value < best.value - 1e-16;
            let evals = best.evals + next.evals;
            if next.value <= best.value {
                best = Minimum { evals, ..next };
            } else {
                best.evals = evals;
            }
            if !improved {
                break;
            }
        }
        best
    }
}

/// Outcome of a 1-D stationarity solve.
#[derive(Debug, Clone, Copy)]
pub struct Stationary1d {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `f'(x) = 0` for a local maximum of `f` on `(lo, hi)`.
///
/// Newton steps use central-difference first and second derivatives. A step is
/// rejected when the curvature is not negative, the step leaves the interval or
/// the objective decreases; then a sign-change bracket of `f'` is located around
/// the iterate and bisected.
pub fn stationary_point_1d(
    f: impl Fn(f64) -> f64,
    x0: f64,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Stationary1d {
    let h = FD_STEP;
    let deriv = |x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let curv = |x: f64| {
        let hc = 1e-4;
        (f(x + hc) - 2.0 * f(x) + f(x - hc)) / (hc * hc)
    };
    let lo_in = lo + 2.0 * h;
    let hi_in = hi - 2.0 * h;
    let mut x = x0.clamp(lo_in, hi_in);
    let mut g = deriv(x);
    let mut iterations = 0;
    while iterations < max_iter && g.abs() >= tol {
        iterations += 1;
        let c = curv(x);
        let mut accepted = false;
        if c < 0.0 {
            let step = -g / c;
            let xn = x + step;
            if xn > lo_in && xn < hi_in && f(xn) >= f(x) - 1e-15 {
                x = xn;
                g = deriv(x);
                accepted = true;
            }
        }
        if accepted {
            continue;
        }
        // Bracket a + → − sign change of f' in the ascent direction.
        let dir = g.signum();
        let mut a = x;
        let mut ga = g;
        let mut width = 1e-3f64.max(1e-2 * (hi - lo).abs());
        let mut b;
        let mut gb;
        loop {
            b = (a + dir * width).clamp(lo_in, hi_in);
            gb = deriv(b);
            if gb.signum() != ga.signum() || b == lo_in || b == hi_in {
                break;
            }
            a = b;
            ga = gb;
            width *= 2.0;
        }
        if gb.signum() == ga.signum() {
            // Maximum sits on the boundary of the admissible interval.
            x = b;
            g = gb;
            break;
        }
        let (mut left, mut right) = if a < b { (a, b) } else { (b, a) };
        for _ in 0..200 {
            let mid = 0.5 * (left + right);
            let gm = deriv(mid);
            if gm > 0.0 {
                left = mid;
            } else {
                right = mid;
            }
            if right - left < 1e-3 * (tol.max(1e-14)) || gm.abs() < tol {
                break;
            }
        }
        x = 0.5 * (left + right);
        g = deriv(x);
    }
    Stationary1d { x, residual: g.abs(), iterations }
}

/// Joint Newton iteration on the finite-difference gradient of `f` (maximization).
/// Returns the final point and residual norm.
pub fn newton_polish(
    f: &impl Fn(&[f64]) -> f64,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, usize) {
    let mut x = x0.to_vec();
    let mut g = gradient(f, &x, FD_STEP);
    let mut res = norm(&g);
    let mut it = 0;
    while it < max_iter && res >= tol {
        it += 1;
        let hess = hessian(f, &x, 1e-4);
        let rhs = DVector::from_vec(g.iter().map(|v| -v).collect());
        let step = hess.clone().lu().solve(&rhs).unwrap_or_else(|| rhs.clone() * 1e-3);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let gn = gradient(f, &xn, FD_STEP);
            let rn = norm(&gn);
            if rn < res {
                x = xn;
                g = gn;
                res = rn;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, res, it)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = NelderMead::default().minimize_restarted(f, &[-1.2, 1.0], 5);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn stationary_1d_finds_interior_maximum() {
        let s = stationary_point_1d(|x| (x - 0.3f64).cos() * (-x * x).exp(), 1.5, -3.0, 3.0, 1e-10, 200);
        let fd = ((s.x + 1e-6 - 0.3).cos() * (-(s.x + 1e-6).powi(2)).exp()
            - (s.x - 1e-6 - 0.3).cos() * (-(s.x - 1e-6).powi(2)).exp())
            / 2e-6;
        assert!(fd.abs() < 1e-8);
        assert!(s.residual < 1e-10);
    }

    #[test]
    fn stationary_1d_uses_bracket_from_convex_region() {
        // start where curvature is positive
        let s = stationary_point_1d(|x| -(x * x - 1.0).powi(2), 0.05, -3.0, 3.0, 1e-10, 200);
        assert!((s.x.abs() - 1.0).abs() < 1e-8, "{}", s.x);
    }

    #[test]
    fn newton_polish_converges() {
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2) - 2.0 * (x[1] + 0.5).powi(2) - 0.3 * x[0] * x[1];
        let (_, res, _) = newton_polish(&f, &[0.0, 0.0], 1e-10, 50);
        assert!(res < 1e-10);
    }
}
