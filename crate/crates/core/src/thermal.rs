//! Thermalization channels acting on phonon-number distributions, the
//! Doppler-limit rate equations, and the thermal depth of a criterion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{Criterion, ThresholdTable};
use crate::error::{Error, Result};
use crate::fock::PhononDistribution;
use crate::ode::Dopri5;
use crate::special::{gauss_laguerre, laguerre, ln_factorial};

/// Mass allowed outside the output truncation of a channel.
const MASS_TOL: f64 = 1e-10;
const QUADRATURE_START: usize = 64;
const QUADRATURE_MAX: usize = 1024;
const QUADRATURE_TOL: f64 = 1e-10;
const OUTPUT_CAP: usize = 4096;

/// `ln |⟨n|D(√u)|m⟩|² + u`, the polynomial part in log form.
fn ln_displaced_poly(n: usize, m: usize, u: f64) -> f64 {
    let (lo, hi) = if n < m { (n, m) } else { (m, n) };
    let d = hi - lo;
    let l = laguerre(lo, d as f64, u);
    if l == 0.0 || u == 0.0 && d > 0 {
        return f64::NEG_INFINITY;
    }
    ln_factorial(lo) - ln_factorial(hi) + d as f64 * u.ln() + 2.0 * l.abs().ln()
}

/// Channel outputs `P′_n` for `n in 0..=out_max` at a given quadrature order.
fn additive_at_order(probs: &[f64], nbar: f64, order: usize, out_max: usize) -> Vec<f64> {
    let rule = gauss_laguerre(order);
    let scale = nbar / (1.0 + nbar);
    let support: Vec<usize> = (0..probs.len()).filter(|&m| probs[m] > 0.0).collect();
    (0..=out_max)
        .into_par_iter()
        .map(|n| {
            let mut total = 0.0;
            for &m in &support {
                let integral: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.ln_weights)
                    .map(|(&x, &lw)| (lw + ln_displaced_poly(n, m, x * scale)).exp())
                    .sum();
                total += probs[m] * integral / (1.0 + nbar);
            }
            total
        })
        .collect()
}

/// Phase-averaged Gaussian displacement channel adding `nbar` thermal phonons.
///
/// The integral over `u = |α|²` against `(1/n̄) e^{−u/n̄}` is done by
/// Gauss–Laguerre quadrature after `u = x n̄/(1+n̄)`; the integrand is then a
/// polynomial of degree `n + m`, so the rule is exact once its order exceeds
/// `(n + m)/2`. The order still doubles until the output is stable to `1e-10`.
pub fn gaussian_additive(dist: &PhononDistribution, nbar: f64) -> Result<PhononDistribution> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!("added thermal mean {nbar}")));
    }
    if nbar == 0.0 {
        return Ok(dist.clone());
    }
    let probs = dist.probs();
    // Output support: input support plus enough thermal tail for 1e-10.
    let mean = dist.mean() + nbar;
    let mut out_max = dist.truncation() + 16;
    loop {
        let ratio = nbar / (1.0 + nbar);
        let tail_len = ((MASS_TOL * 1e-2).ln() / ratio.ln()).ceil() as usize;
        let guess = dist.truncation() + tail_len.max(8);
        out_max = out_max.max(guess).max((4.0 * mean) as usize);
        if out_max > OUTPUT_CAP {
            return Err(Error::TruncationCap { cap: OUTPUT_CAP, leakage: f64::NAN });
        }
        let mut order = QUADRATURE_START.max((out_max + dist.truncation()) / 2 + 1);
        let mut current = additive_at_order(probs, nbar, order, out_max);
        loop {
            let next_order = order * 2;
            if next_order > QUADRATURE_MAX {
                return Err(Error::Quadrature { order, change: f64::NAN });
            }
            let next = additive_at_order(probs, nbar, next_order, out_max);
            let change = current.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            current = next;
            order = next_order;
            if change < QUADRATURE_TOL {
                break;
            }
            if order * 2 > QUADRATURE_MAX {
                return Err(Error::Quadrature { order, change });
            }
        }
        let mass: f64 = current.iter().sum();
        if 1.0 - mass < MASS_TOL {
            return PhononDistribution::from_weights(current.into_iter().map(|p| p.max(0.0)).collect())
                .map(|d| d.with_meta("channel", "gaussian_additive"));
        }
        out_max *= 2;
    }
}

/// First-order (Lindblad-like) expansion of the additive channel with
/// expansion coefficient `eps`; negatives are clamped and the result renormalized.
pub fn lindblad_first_order(dist: &PhononDistribution, eps: f64) -> Result<PhononDistribution> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("expansion coefficient {eps}")));
    }
    let p = dist.probs();
    let get = |k: isize| if k < 0 || k as usize >= p.len() { 0.0 } else { p[k as usize] };
    let out: Vec<f64> = (0..=p.len())
        .map(|n| {
            let nf = n as f64;
            let k = n as isize;
            let v = get(k) + eps * ((nf + 1.0) * get(k + 1) + nf * get(k - 1) - (2.0 * nf + 1.0) * get(k));
            v.max(0.0)
        })
        .collect();
    PhononDistribution::from_weights(out)
}

/// Rates of the Doppler-limit rate equations, in 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerRates {
    /// Damping `n → n−1`.
    #[serde(rename = "A")]
    pub a: f64,
    /// Excitation `n → n+1`.
    #[serde(rename = "B")]
    pub b: f64,
}

impl DopplerRates {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("Doppler rates A = {a}, B = {b}")));
        }
        Ok(Self { a, b })
    }

    /// Mean of the Bose–Einstein steady state, if one exists (`A > B`).
    pub fn steady_state_mean(&self) -> Option<f64> {
        (self.a > self.b).then(|| self.b / (self.a - self.b))
    }

    /// Closed-form mean phonon number of `dn̄/dt = −A n̄ + B(1 + n̄)`.
    pub fn mean_at(&self, nbar0: f64, t: f64) -> f64 {
        let k = self.a - self.b;
        if k == 0.0 {
            return nbar0 + self.b * t;
        }
        let target = self.b / k;
        target + (nbar0 - target) * (-k * t).exp()
    }
}

const DOPPLER_GROWTH: usize = 16;
const DOPPLER_CAP: usize = 4096;
const TOP_MASS_TOL: f64 = 1e-10;

/// Integrates the rate equations from `dist` over a time `t` (seconds).
///
/// The top state reflects (no flow beyond the truncation), and the truncation
/// grows by 16 states whenever the top-state population exceeds `1e-10`.
pub fn doppler_evolve(dist: &PhononDistribution, rates: DopplerRates, t: f64) -> Result<PhononDistribution> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("evolution time {t}")));
    }
    if t == 0.0 {
        return Ok(dist.clone());
    }
    let mut y = dist.probs().to_vec();
    y.resize(y.len() + DOPPLER_GROWTH, 0.0);
    let DopplerRates { a, b } = rates;
    let rhs = |_t: f64, p: &[f64], dp: &mut [f64]| {
        let top = p.len() - 1;
        for n in 0..=top {
            let nf = n as f64;
            let mut v = -a * nf * p[n];
            if n < top {
                v += a * (nf + 1.0) * p[n + 1] - b * (nf + 1.0) * p[n];
            }
            if n > 0 {
                v += b * nf * p[n - 1];
            }
            dp[n] = v;
        }
    };
    let grow = |p: &mut Vec<f64>| -> Result<()> {
        let top_mass = *p.last().unwrap_or(&0.0);
        if top_mass > TOP_MASS_TOL {
            if p.len() + DOPPLER_GROWTH > DOPPLER_CAP {
                return Err(Error::TruncationCap { cap: DOPPLER_CAP, leakage: top_mass });
            }
            p.resize(p.len() + DOPPLER_GROWTH, 0.0);
        }
        Ok(())
    };
    Dopri5::default().integrate(rhs, 0.0, t, &mut y, grow)?;
    // trim numerically empty top states
    while y.len() > dist.probs().len() && y.last().is_some_and(|v| v.abs() < 1e-16) {
        y.pop();
    }
    PhononDistribution::from_weights(y.into_iter().map(|v| v.max(0.0)).collect())
}

/// Short-time series `P_n(t) = Σ_k μ_{n,k} t^k` of the rate equations for an
/// initial Fock state `|m⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorTable {
    pub m: usize,
    pub order: usize,
    /// `mu[n][k]`, for `n` in `0..=m + order`.
    pub mu: Vec<Vec<f64>>,
}

impl TaylorTable {
    pub fn coefficient(&self, n: usize, k: usize) -> f64 {
        self.mu.get(n).and_then(|row| row.get(k)).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, n: usize, t: f64) -> f64 {
        match self.mu.get(n) {
            Some(row) => row.iter().rev().fold(0.0, |acc, &c| acc * t + c),
            None => 0.0,
        }
    }

    pub fn distribution(&self, t: f64) -> Vec<f64> {
        (0..self.mu.len()).map(|n| self.eval(n, t)).collect()
    }
}

pub const MAX_TAYLOR_ORDER: usize = 8;

/// Series coefficients by matching powers of `t` in the rate equations:
/// `(k+1) μ_{n,k+1} = A(n+1) μ_{n+1,k} + B n μ_{n−1,k} − (A n + B(n+1)) μ_{n,k}`.
pub fn doppler_taylor(m: usize, rates: DopplerRates, order: usize) -> Result<TaylorTable> {
    if order > MAX_TAYLOR_ORDER {
        return Err(Error::InvalidParameter(format!("order {order} above {MAX_TAYLOR_ORDER}")));
    }
    let rows = m + order + 2;
    let mut mu = vec![vec![0.0; order + 1]; rows];
    mu[m][0] = 1.0;
    let DopplerRates { a, b } = rates;
    for k in 0..order {
        for n in 0..rows {
            let nf = n as f64;
            let up = if n + 1 < rows { mu[n + 1][k] } else { 0.0 };
            let down = if n > 0 { mu[n - 1][k] } else { 0.0 };
            mu[n][k + 1] = (a * (nf + 1.0) * up + b * nf * down - (a * nf + b * (nf + 1.0)) * mu[n][k]) / (k as f64 + 1.0);
        }
    }
    mu.truncate(m + order + 1);
    Ok(TaylorTable { m, order, mu })
}

/// Criterion whose robustness against added thermal noise is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthCriterion {
    Genuine,
    Basic,
    WignerNegativity,
}

impl From<Criterion> for DepthCriterion {
    fn from(c: Criterion) -> Self {
        match c {
            Criterion::Genuine => Self::Genuine,
            Criterion::Basic => Self::Basic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub n: usize,
    pub criterion: DepthCriterion,
    pub depth_nbar: f64,
    pub bisection_tolerance: f64,
}

pub const DEPTH_TOL: f64 = 1e-4;
const DEPTH_BRACKET_START: f64 = 0.01;
const DEPTH_BRACKET_MAX: f64 = 1e3;

/// Largest added thermal mean for which `holds` stays true, by bracketing
/// (doubling from 0.01) and bisection to `tol` mean phonons. The reported depth
/// is the last value found to hold; the criterion fails within `tol` above it.
pub fn thermal_depth_with<P>(
    dist: &PhononDistribution,
    n: usize,
    criterion: DepthCriterion,
    tol: f64,
    holds: P,
) -> Result<DepthReport>
where
    P: Fn(&PhononDistribution) -> Result<bool>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bisection tolerance {tol}")));
    }
    if !holds(dist)? {
        return Err(Error::NoDepth);
    }
    let check = |nbar: f64| -> Result<bool> { holds(&gaussian_additive(dist, nbar)?) };
    let mut lo = 0.0;
    let mut hi = DEPTH_BRACKET_START;
    while check(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > DEPTH_BRACKET_MAX {
            return Err(Error::NoConvergence { iterations: 0, residual: hi, best: None });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if check(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DepthReport { n, criterion, depth_nbar: lo, bisection_tolerance: tol })
}

/// Depth of the genuine or basic criterion for `P_n`.
pub fn thermal_depth(
    dist: &PhononDistribution,
    n: usize,
    criterion: Criterion,
    table: &ThresholdTable,
) -> Result<DepthReport> {
    let p_bar = table.p_bar(n, criterion)?;
    thermal_depth_with(dist, n, criterion.into(), DEPTH_TOL, |d| Ok(d.get(n) > p_bar))
}

/// Calibration of recoil-heating pulses against the vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoilCalibration {
    /// Mean phonons added per second of pulse.
    pub rate: f64,
}

impl Default for RecoilCalibration {
    fn default() -> Self {
        Self { rate: 115e3 }
    }
}

impl RecoilCalibration {
    pub fn nbar(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse duration {tau}")));
        }
        Ok(self.rate * tau)
    }
}

/// Added thermal mean of a recoil pulse of duration `tau` (seconds).
pub fn pulse_to_nbar(tau: f64) -> Result<f64> {
    RecoilCalibration::default().nbar(tau)
}

/// Applies `gaussian_additive` at every `nbar` in parallel.
pub fn channel_sweep(dist: &PhononDistribution, nbars: &[f64]) -> Result<Vec<PhononDistribution>> {
    nbars.par_iter().map(|&nb| gaussian_additive(dist, nb)).collect()
}

/// CSV rows `nbar,P_0,…,P_N`, padded with zeros to a common width.
pub fn sweep_csv(nbars: &[f64], dists: &[PhononDistribution]) -> String {
    let width = dists.iter().map(|d| d.truncation()).max().unwrap_or(0);
    let mut out = String::from("nbar");
    for k in 0..=width {
        out.push_str(&format!(",P_{k}"));
    }
    out.push('\n');
    for (nb, d) in nbars.iter().zip(dists) {
        out.push_str(&format!("{nb}"));
        for k in 0..=width {
            out.push_str(&format!(",{}", d.get(k)));
        }
        out.push('\n');
    }
    out
}

/// Trajectory points `(P_n, P_{n−1} + P_{n+1})` along a sweep.
pub fn neighbour_trajectory(n: usize, dists: &[PhononDistribution]) -> Vec<(f64, f64)> {
    dists
        .iter()
        .map(|d| {
            let below = if n > 0 { d.get(n - 1) } else { 0.0 };
            (d.get(n), below + d.get(n + 1))
        })
        .collect()
}
