//! Special functions: log-factorials, Laguerre polynomials and Gauss–Laguerre
//! quadrature rules.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

const LN_FACT_TABLE: usize = 171;

fn ln_fact_table() -> &'static [f64; LN_FACT_TABLE] {
    static TABLE: OnceLock<[f64; LN_FACT_TABLE]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; LN_FACT_TABLE];
        let mut f = 1.0f64;
        for (k, slot) in t.iter_mut().enumerate().skip(1) {
            f *= k as f64;
            *slot = f.ln();
        }
        t
    })
}

/// `ln(n!)`, exact table up to 170 and a Stirling series above.
pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACT_TABLE {
        return ln_fact_table()[n];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` by the three-term recurrence.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `L_0(x) ..= L_nmax(x)` (ordinary Laguerre polynomials).
pub fn laguerre_table(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    if nmax == 0 {
        return out;
    }
    out.push(1.0 - x);
    for k in 1..nmax {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Gauss–Laguerre rule for `∫_0^∞ e^{-x} f(x) dx`. Weights are stored as logarithms
/// because they underflow for the outer nodes of high orders.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&x, &lw)| lw.exp() * f(x))
            .sum()
    }
}

/// Laguerre `L_{n-1}, L_n, L_{n+1}` at x, sharing a common log scale factor.
fn scaled_laguerre_triplet(n: usize, x: f64) -> (f64, f64, f64, f64) {
    const BIG: f64 = 1e150;
    let mut ln_scale = 0.0;
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    let mut prevprev = 0.0;
    for k in 1..=n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prevprev = prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prevprev /= BIG;
            prev /= BIG;
            cur /= BIG;
            ln_scale += BIG.ln();
        }
    }
    // After the loop: cur = L_{n+1}, prev = L_n, prevprev = L_{n-1}
    (prevprev, prev, cur, ln_scale)
}

fn build_rule(order: usize) -> GaussLaguerre {
    assert!(order >= 1);
    let jacobi = DMatrix::from_fn(order, order, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i + 1 == j {
            j as f64
        } else if j + 1 == i {
            i as f64
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = order as f64;
    let mut ln_weights = Vec::with_capacity(order);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (lm1, ln, _, _) = scaled_laguerre_triplet(order, *x);
            let deriv = nf * (ln - lm1) / *x;
            if deriv != 0.0 {
                *x -= ln / deriv;
            }
        }
        let (_, _, lp1, ln_scale) = scaled_laguerre_triplet(order, *x);
        ln_weights.push(x.ln() - 2.0 * (nf + 1.0).ln() - 2.0 * (lp1.abs().ln() + ln_scale));
    }
    GaussLaguerre { nodes, ln_weights }
}

/// Cached Gauss–Laguerre rule of the given order.
pub fn gauss_laguerre(order: usize) -> Arc<GaussLaguerre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLaguerre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&order) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build_rule(order));
    cache
        .lock()
        .unwrap()
        .entry(order)
        .or_insert_with(|| Arc::clone(&rule))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_matches_direct_product() {
        let mut f = 0.0;
        for n in 1..400usize {
            f += (n as f64).ln();
            assert!((ln_factorial(n) - f).abs() < 1e-9 * f.max(1.0), "n={n}");
        }
        assert_eq!(ln_factorial(0), 0.0);
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert!((laguerre(2, 0.0, x) - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-14);
        assert!((laguerre(1, 3.0, x) - (4.0 - x)).abs() < 1e-14);
        let t = laguerre_table(5, x);
        assert!((t[5] - laguerre(5, 0.0, x)).abs() < 1e-14);
    }

    #[test]
    fn gauss_laguerre_integrates_moments() {
        for &order in &[8usize, 64, 128, 300] {
            let rule = gauss_laguerre(order);
            assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-10, "order {order}");
            // ∫ e^{-x} x^5 = 120
            assert!((rule.integrate(|x| x.powi(5)) / 120.0 - 1.0).abs() < 1e-10);
            // ∫ e^{-x} e^{-x} = 1/2
            if order >= 64 {
                assert!((rule.integrate(|x| (-x).exp()) - 0.5).abs() < 1e-10);
            }
        }
    }
}
