//! Lawson–Hanson nonnegative least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Minimizes `‖A x − b‖²` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::InvalidParameter("nnls: dimension mismatch".into()));
    }
    let tol = 10.0 * f64::EPSILON * a.norm() * (m.max(n) as f64);
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
        let Some(j) = candidate else {
            return Ok(x);
        };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = a.select_columns(&idx);
            let z_sub = sub
                .clone()
                .svd(true, true)
                .solve(b, 1e-14)
                .map_err(|e| Error::RankDeficient(e.to_string()))?;
            if z_sub.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z_sub[k];
                }
                break;
            }
            // step back towards the feasible region
            let mut alpha = f64::INFINITY;
            for (k, &i) in idx.iter().enumerate() {
                if z_sub[k] <= 0.0 {
                    let denom = x[i] - z_sub[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z_sub[k] - x[i]);
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Err(Error::NoConvergence { iterations: max_outer, residual: (b - a * &x).norm(), best: Some(x.iter().copied().collect()) })
}
