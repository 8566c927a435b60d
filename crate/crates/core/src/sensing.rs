//! Phase-insensitive displacement sensing with Fock-diagonal probes: Fisher
//! information, Cramér–Rao deviation and the ratio to vacuum sensing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{displaced_fock_prob, displaced_fock_prob_with_derivative, PhononDistribution};

/// Output index range that holds the displaced distribution for any input below `trunc`.
fn displaced_support(trunc: usize, u: f64) -> usize {
    trunc + (u + 12.0 * u.sqrt() + 30.0).ceil() as usize
}

/// Phase-averaged displacement by `|α|² = u` of a Fock-diagonal state.
pub fn displaced_diag_dist(dist: &PhononDistribution, u: f64) -> Result<PhononDistribution> {
    check_u(u, true)?;
    if u == 0.0 {
        return Ok(dist.clone());
    }
    let p = dist.probs();
    let out_max = displaced_support(dist.truncation(), u);
    let out: Vec<f64> = (0..=out_max)
        .map(|n| p.iter().enumerate().filter(|(_, &pm)| pm > 0.0).map(|(m, &pm)| pm * displaced_fock_prob(n, m, u)).sum())
        .collect();
    PhononDistribution::from_weights(out)
}

fn check_u(u: f64, allow_zero: bool) -> Result<()> {
    let ok = u.is_finite() && if allow_zero { u >= 0.0 } else { u > 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("displacement |α|² = {u}")))
    }
}

/// `P_n(u)` and `dP_n/du` of the displaced distribution.
fn displaced_with_derivative(p: &[f64], n: usize, u: f64) -> (f64, f64) {
    p.iter()
        .enumerate()
        .filter(|(_, &pm)| pm > 0.0)
        .fold((0.0, 0.0), |(v, d), (m, &pm)| {
            let (dv, dd) = displaced_fock_prob_with_derivative(n, m, u);
            (v + pm * dv, d + pm * dd)
        })
}

fn fisher_term(p: &[f64], n: usize, u: f64) -> (f64, f64) {
    let (pn, dpn) = displaced_with_derivative(p, n, u);
    let term = if pn < 1e-300 { 0.0 } else { dpn * dpn / pn };
    (term, pn)
}

/// Fisher information and the estimated contribution of indices beyond `trunc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherValue {
    pub fisher: f64,
    pub tail: f64,
    pub trunc: usize,
}

/// Fisher information of the phonon-number measurement for `u = |α|²`,
/// summed over output indices `0..=trunc`.
pub fn fisher_with_tail(dist: &PhononDistribution, u: f64, trunc: usize) -> Result<FisherValue> {
    check_u(u, false)?;
    let p = dist.probs();
    let fisher: f64 = (0..=trunc).map(|n| fisher_term(p, n, u).0).sum();
    // tail: continue until the populations are negligible and the terms stop mattering
    let mut tail = 0.0;
    let mut n = trunc + 1;
    let limit = displaced_support(dist.truncation(), u).max(trunc + 1) + 64;
    while n <= limit {
        let (term, pn) = fisher_term(p, n, u);
        tail += term;
        if n > dist.truncation() + (u as usize) && pn < 1e-14 && term < 1e-16 * fisher.max(1e-300) {
            break;
        }
        n += 1;
    }
    if tail > 1e-6 * fisher {
        return Err(Error::FisherTail { trunc, tail, fisher });
    }
    Ok(FisherValue { fisher, tail, trunc })
}

pub fn fisher(dist: &PhononDistribution, u: f64, trunc: usize) -> Result<f64> {
    Ok(fisher_with_tail(dist, u, trunc)?.fisher)
}

/// A truncation large enough for [`fisher`] at `u`.
pub fn default_fisher_trunc(dist: &PhononDistribution, u: f64) -> usize {
    displaced_support(dist.truncation(), u)
}

/// Cramér–Rao standard deviation of the `|α|²` estimate from `shots` repetitions.
pub fn sigma(dist: &PhononDistribution, u: f64, shots: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidParameter("at least one shot".into()));
    }
    let f = fisher(dist, u, default_fisher_trunc(dist, u))?;
    if f <= 0.0 {
        return Err(Error::Uninformative);
    }
    Ok(1.0 / (shots as f64 * f).sqrt())
}

/// `σ(dist)/σ(vacuum)` at the same `u` and shot number; the vacuum Fisher
/// information is `1/u`.
pub fn metrological_ratio(dist: &PhononDistribution, u: f64, shots: u64) -> Result<f64> {
    let s = sigma(dist, u, shots)?;
    let s0 = (u / shots as f64).sqrt();
    Ok(s / s0)
}

/// Small-displacement ratio of an ideal Fock state `|n⟩`.
pub fn ideal_ratio(n: usize) -> f64 {
    1.0 / ((2 * n + 1) as f64).sqrt()
}

/// Small-`u`, small-`P_e` approximation of the Cramér–Rao deviation for a
/// noisy Fock state with `P_n` in the target and `P_e` in its neighbours.
pub fn approx_sigma(n: usize, p_n: f64, p_e: f64, u: f64, shots: u64) -> Result<f64> {
    if !(p_n > 0.0) || p_e < 0.0 || p_n + p_e > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("P_n = {p_n}, P_e = {p_e}")));
    }
    check_u(u, true)?;
    if shots == 0 {
        return Err(Error::InvalidParameter("at least one shot".into()));
    }
    let k = (2 * n + 1) as f64;
    let nn = shots as f64;
    Ok((u / (k * p_n * nn) + p_e / (k * k * nn * p_n * p_n)).sqrt())
}

/// Fock state weakly mixed with its neighbours: `P_{n−1} = n n̄`,
/// `P_{n+1} = (n+1) n̄` with `n̄ = (1 − P_n)/(2n + 1)`.
pub fn noisy_fock(n: usize, p_n: f64) -> Result<PhononDistribution> {
    if !(0.0..=1.0).contains(&p_n) {
        return Err(Error::InvalidParameter(format!("P_n = {p_n}")));
    }
    let nbar = (1.0 - p_n) / (2 * n + 1) as f64;
    let mut probs = vec![0.0; n + 2];
    probs[n] = p_n;
    if n > 0 {
        probs[n - 1] = n as f64 * nbar;
    }
    probs[n + 1] = (n + 1) as f64 * nbar;
    PhononDistribution::new(probs)
}

/// Log-spaced grid of `points` values over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

pub const DEFAULT_U_MIN: f64 = 1e-6;
pub const DEFAULT_U_MAX: f64 = 1.0;
pub const DEFAULT_U_POINTS: usize = 60;

pub fn default_u_grid() -> Vec<f64> {
    log_grid(DEFAULT_U_MIN, DEFAULT_U_MAX, DEFAULT_U_POINTS)
}

/// Minimum of `R(u)` over `[u_lo, u_hi]`: grid search, then golden-section
/// refinement in `ln u` around the best grid point.
pub fn min_ratio(dist: &PhononDistribution, u_lo: f64, u_hi: f64) -> Result<(f64, f64)> {
    let grid = log_grid(u_lo, u_hi, DEFAULT_U_POINTS);
    let values: Vec<f64> = grid
        .iter()
        .map(|&u| metrological_ratio(dist, u, 1))
        .collect::<Result<_>>()?;
    let (i, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("nonempty grid");
    let mut a = grid[i.saturating_sub(1)].ln();
    let mut b = grid[(i + 1).min(grid.len() - 1)].ln();
    let r = |x: f64| metrological_ratio(dist, x.exp(), 1);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (r(c)?, r(d)?);
    for _ in 0..60 {
        if (b - a).abs() < 1e-10 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = r(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = r(d)?;
        }
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
    if fx < values[i] {
        Ok((x.exp(), fx))
    } else {
        Ok((grid[i], values[i]))
    }
}

/// Smallest `P_n` of the noisy-Fock model whose best ratio beats an ideal
/// `|n−1⟩` for some `u` in `[1e-6, 1]`.
pub fn advantage_threshold(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("advantage needs n ≥ 1".into()));
    }
    let target = ideal_ratio(n - 1);
    let beats = |p: f64| -> Result<bool> {
        let d = noisy_fock(n, p)?;
        Ok(min_ratio(&d, DEFAULT_U_MIN, DEFAULT_U_MAX)?.1 < target)
    };
    if !beats(1.0)? {
        return Err(Error::NoDepth);
    }
    let mut hi = 1.0;
    let mut lo = hi;
    while lo > 0.0 {
        lo = (lo - 0.01f64).max(0.0);
        if !beats(lo)? {
            break;
        }
        hi = lo;
    }
    if lo == 0.0 && beats(0.0)? {
        return Ok(0.0);
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if beats(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Advantage thresholds for several `n`, computed in parallel.
pub fn advantage_table(ns: &[usize]) -> Result<Vec<(usize, f64)>> {
    ns.par_iter().map(|&n| Ok((n, advantage_threshold(n)?))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingReport {
    pub u_grid: Vec<f64>,
    pub fisher: Vec<f64>,
    pub sigma: Vec<f64>,
    pub ratio: Vec<f64>,
    pub shots: u64,
}

impl SensingReport {
    pub fn compute(dist: &PhononDistribution, u_grid: &[f64], shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("at least one shot".into()));
        }
        let fisher: Vec<f64> = u_grid
            .par_iter()
            .map(|&u| fisher(dist, u, default_fisher_trunc(dist, u)))
            .collect::<Result<_>>()?;
        if fisher.iter().any(|&f| f <= 0.0) {
            return Err(Error::Uninformative);
        }
        let nn = shots as f64;
        let sigma: Vec<f64> = fisher.iter().map(|f| 1.0 / (nn * f).sqrt()).collect();
        let ratio = u_grid.iter().zip(&sigma).map(|(u, s)| s / (u / nn).sqrt()).collect();
        Ok(Self { u_grid: u_grid.to_vec(), fisher, sigma, ratio, shots })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,F,sigma,ratio\n");
        for i in 0..self.u_grid.len() {
            out.push_str(&format!("{},{},{},{}\n", self.u_grid[i], self.fisher[i], self.sigma[i], self.ratio[i]));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::gaussian_additive;

    #[test]
    fn displacement_of_vacuum_is_poisson() {
        let out = displaced_diag_dist(&PhononDistribution::vacuum(), 0.7).unwrap();
        let mut fact = 1.0;
        for n in 0..15 {
            if n > 0 {
                fact *= n as f64;
            }
            let poisson = (-0.7f64).exp() * 0.7f64.powi(n) / fact;
            assert!((out.get(n as usize) - poisson).abs() < 1e-14);
        }
        let d = PhononDistribution::new(vec![0.2, 0.0, 0.5, 0.3]).unwrap();
        assert_eq!(displaced_diag_dist(&d, 0.0).unwrap(), d);
        let shifted = displaced_diag_dist(&d, 0.4).unwrap();
        assert!((shifted.mean() - d.mean() - 0.4).abs() < 1e-8);
    }

    #[test]
    fn vacuum_fisher_is_poisson() {
        for u in [1e-4, 0.01, 0.5, 2.0] {
            let f = fisher(&PhononDistribution::vacuum(), u, 60).unwrap();
            assert!((f * u - 1.0).abs() < 1e-8, "u={u} F·u={}", f * u);
        }
        let s = sigma(&PhononDistribution::vacuum(), 0.01, 1).unwrap();
        assert!((s * s - 0.01).abs() < 1e-10);
        let s100 = sigma(&PhononDistribution::vacuum(), 0.01, 100).unwrap();
        assert!((s100 - s / 10.0).abs() < 1e-14);
    }

    #[test]
    fn fisher_rejects_short_truncation() {
        assert!(matches!(fisher(&PhononDistribution::fock(5), 0.5, 3), Err(Error::FisherTail { .. })));
    }

    #[test]
    fn ideal_fock_ratio_matches_small_displacement_limit() {
        for n in [1usize, 5] {
            let r = metrological_ratio(&PhononDistribution::fock(n), 1e-5, 1).unwrap();
            assert!((r - ideal_ratio(n)).abs() < 1e-3 * ideal_ratio(n));
        }
        assert!((ideal_ratio(1) - 0.57735).abs() < 1e-5);
        assert!((ideal_ratio(12) - 0.2).abs() < 1e-15);
        assert_eq!(ideal_ratio(0), 1.0);
        let s = sigma(&PhononDistribution::fock(1), 1e-4, 1).unwrap();
        assert!((s * s * 3.0 / 1e-4 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn approximation_limits() {
        let exact = approx_sigma(2, 1.0, 0.0, 1e-3, 10).unwrap();
        assert!((exact * exact - 1e-3 / 50.0).abs() < 1e-15);
        let offset = approx_sigma(2, 0.9, 0.1, 0.0, 1).unwrap();
        assert!((offset * offset - 0.1 / (25.0 * 0.81)).abs() < 1e-15);
        assert!(approx_sigma(2, 0.0, 0.1, 1e-3, 1).is_err());
    }

    #[test]
    fn approximation_tracks_exact_for_one_phonon() {
        let d = gaussian_additive(&PhononDistribution::fock(1), 0.05).unwrap();
        let pe = d.get(0) + d.get(2);
        for u in [1e-5, 1e-4, 1e-3] {
            let exact = sigma(&d, u, 1).unwrap().powi(2);
            let approx = approx_sigma(1, d.get(1), pe, u, 1).unwrap().powi(2);
            assert!((approx / exact - 1.0).abs() < 0.05, "u={u}: {approx} vs {exact}");
        }
    }

    #[test]
    fn one_phonon_advantage_threshold_is_interior() {
        let t = advantage_threshold(1).unwrap();
        assert!(t > 0.0 && t < 1.0, "{t}");
        let above = noisy_fock(1, (t + 1e-3).min(1.0)).unwrap();
        assert!(min_ratio(&above, 1e-6, 1.0).unwrap().1 < 1.0);
    }

    #[test]
    fn report_layout() {
        let r = SensingReport::compute(&PhononDistribution::fock(2), &[1e-3, 1e-2], 10).unwrap();
        assert!(r.to_csv().starts_with("u,F,sigma,ratio\n"));
        for i in 0..2 {
            assert!((r.sigma[i].powi(2) * 10.0 * r.fisher[i] - 1.0).abs() < 1e-12);
        }
    }
}
