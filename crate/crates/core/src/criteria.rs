//! Genuine n-phonon and basic quantum non-Gaussianity thresholds, and
//! certification of phonon-number distributions against them.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::RwLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{core_amplitude, core_overlap, default_dim, GaussianParams, PhononDistribution};
use crate::optimize::{self, newton_polish, stationary_point_1d, NelderMead, FD_STEP};

/// Largest `n` accepted by the staged solver.
pub const MAX_GENUINE_N: usize = 15;
/// Largest `n` accepted by the multistart oracle.
pub const MAX_ORACLE_N: usize = 8;
/// Required stationarity residual of a staged threshold.
pub const STAGED_RESIDUAL_TOL: f64 = 1e-8;

const R_BOUND: f64 = 1.5;

fn alpha_bound(n: usize) -> f64 {
    (n as f64).sqrt() + 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Core superposition of `|0⟩ … |n−1⟩`.
    Genuine,
    /// Core fixed to the vacuum.
    Basic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Staged,
    MultistartOracle,
    Multistart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub n: usize,
    pub criterion: Criterion,
    pub p_bar: f64,
    pub argmax: GaussianParams,
    pub method: Method,
    pub residual_norm: f64,
    pub dim_used: usize,
    /// Staged sweeps performed, or restarts for multistart methods.
    pub iterations: usize,
    /// Spread of the best decile of restart values (oracle only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<f64>,
}

/// Real parametrization `[α, r, c_1, …, c_{n−1}]` with `c_0 = √(1 − Σ_{k≥1} c_k²)`.
fn core_from_tail(n: usize, x: &[f64]) -> Vec<f64> {
    let tail = &x[2..];
    let rest: f64 = tail.iter().map(|c| c * c).sum();
    let mut core = Vec::with_capacity(n);
    core.push((1.0 - rest).max(0.0).sqrt());
    core.extend_from_slice(tail);
    core
}

/// Objective on the constrained real parametrization.
pub fn genuine_objective(n: usize, x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), n + 1);
    let core: Vec<Complex64> = core_from_tail(n, x).into_iter().map(|c| Complex64::new(c, 0.0)).collect();
    core_amplitude(n, Complex64::new(x[0], 0.0), Complex64::new(x[1], 0.0), &core).norm_sqr()
}

fn basic_objective(n: usize, alpha: f64, r: f64) -> f64 {
    core_amplitude(n, Complex64::new(alpha, 0.0), Complex64::new(r, 0.0), &[Complex64::new(1.0, 0.0)]).norm_sqr()
}

/// Amplitudes `v_m = ⟨n|D(α)S(r)|m⟩` for `m < n` at real `α`, `r`.
pub fn core_vector(n: usize, alpha: f64, r: f64) -> Vec<f64> {
    let (alpha, r) = (Complex64::new(alpha, 0.0), Complex64::new(r, 0.0));
    (0..n)
        .map(|m| {
            let mut e = vec![Complex64::new(0.0, 0.0); m + 1];
            e[m] = Complex64::new(1.0, 0.0);
            core_amplitude(n, alpha, r, &e).re
        })
        .collect()
}

/// `max_c |⟨n|D S Σ c_m|m⟩|² = Σ_m v_m²` for fixed real `(α, r)`.
fn reduced_objective(n: usize, alpha: f64, r: f64) -> f64 {
    core_vector(n, alpha, r).iter().map(|v| v * v).sum()
}

/// The `n + 1` partial derivatives `∂_α, ∂_r, ∂_{c_{n−1}}, …, ∂_{c_1}` of the
/// overlap with `c_0² = 1 − Σ_{k≥1} c_k²` substituted.
///
/// `∂_α` and `∂_r` are central differences with step `1e-5`. The overlap is a
/// quadratic form in the core, so its core derivatives are taken exactly and
/// combined with `∂c_0/∂c_k = −c_k/c_0`.
pub fn stationarity_residuals(n: usize, params: &GaussianParams) -> Result<Vec<f64>> {
    if !params.is_real() {
        return Err(Error::InvalidParameter("stationarity residuals need real α and r".into()));
    }
    if params.core.len() != n || n == 0 {
        return Err(Error::InvalidParameter(format!("core must have {n} coefficients")));
    }
    let norm: f64 = params.core.iter().map(|c| c * c).sum();
    if (norm - 1.0).abs() > crate::fock::CORE_NORM_TOL {
        return Err(Error::InvalidParameter(format!("core norm {norm} differs from 1")));
    }
    let c = &params.core;
    if n > 1 && c[0] == 0.0 {
        return Err(Error::InvalidParameter("c_0 = 0: the constraint cannot be substituted".into()));
    }
    let (alpha, r) = (params.alpha.re, params.r.re);
    let overlap = |a: f64, r: f64| {
        let v = core_vector(n, a, r);
        v.iter().zip(c).map(|(v, c)| v * c).sum::<f64>().powi(2)
    };
    let h = FD_STEP;
    let mut out = vec![
        (overlap(alpha + h, r) - overlap(alpha - h, r)) / (2.0 * h),
        (overlap(alpha, r + h) - overlap(alpha, r - h)) / (2.0 * h),
    ];
    let v = core_vector(n, alpha, r);
    let amp: f64 = v.iter().zip(c).map(|(v, c)| v * c).sum();
    for k in (1..n).rev() {
        out.push(2.0 * amp * (v[k] - c[k] * v[0] / c[0]));
    }
    Ok(out)
}

fn params_to_x(params: &GaussianParams) -> Vec<f64> {
    let mut x = vec![params.alpha.re, params.r.re];
    x.extend_from_slice(&params.core[1..]);
    x
}

fn x_to_params(n: usize, x: &[f64]) -> GaussianParams {
    let core = core_from_tail(n, x);
    GaussianParams {
        alpha: Complex64::new(x[0], 0.0),
        r: Complex64::new(x[1], 0.0),
        core,
    }
}

/// Settings of the staged stationarity solver.
#[derive(Debug, Clone)]
pub struct StagedConfig {
    /// Total sweeps over (α, r) followed by `c_{n−1} … c_1`.
    pub passes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub grid: usize,
    /// Joint Newton refinement when the sweeps leave a residual above `tol`.
    pub polish: bool,
}

impl Default for StagedConfig {
    fn default() -> Self {
        Self { passes: 2, tol: 1e-10, max_iter: 200, grid: 21, polish: true }
    }
}

/// Evaluates `core_overlap` at the argmax through truncated operator products,
/// growing the dimension until the leakage check passes.
fn matrix_route(n: usize, params: &GaussianParams, expected: f64) -> Result<usize> {
    let mut dim = default_dim(n);
    loop {
        match core_overlap(n, params, dim) {
            Ok(v) => {
                if (v - expected).abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "closed-form and matrix overlaps disagree: {expected} vs {v}"
                    )));
                }
                return Ok(dim);
            }
            Err(Error::Truncation { .. }) if dim < 1024 => dim *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// Genuine threshold `p̄_n` by the staged stationarity procedure.
pub fn threshold_genuine(n: usize) -> Result<ThresholdRecord> {
    threshold_genuine_with(n, &StagedConfig::default())
}

pub fn threshold_genuine_with(n: usize, cfg: &StagedConfig) -> Result<ThresholdRecord> {
    if n == 0 || n > MAX_GENUINE_N {
        return Err(Error::InvalidParameter(format!("n = {n} outside 1..={MAX_GENUINE_N}")));
    }
    let f = |y: &[f64]| genuine_objective(n, y);
    let a_max = alpha_bound(n);

    // Step 1 start: c_{n−1} = 1, basin from a coarse grid around (√n/2, 0).
    let mut x = vec![0.0; n + 1];
    if n > 1 {
        x[n] = 1.0;
    }
    let alpha0 = (n as f64).sqrt() / 2.0;
    x[0] = alpha0;
    let mut best = f(&x);
    let g = cfg.grid.max(2);
    for i in 0..g {
        for j in 0..g {
            let alpha = (2.0 * alpha0 + 1.0) * i as f64 / (g - 1) as f64;
            let r = -0.6 + 1.2 * j as f64 / (g - 1) as f64;
            let mut y = x.clone();
            y[0] = alpha;
            y[1] = r;
            let v = f(&y);
            if v > best {
                best = v;
                x = y;
            }
        }
    }

    let coordinate = |x: &mut Vec<f64>, i: usize, lo: f64, hi: f64| {
        let base = x.clone();
        let line = |t: f64| {
            let mut y = base.clone();
            y[i] = t;
            f(&y)
        };
        let s = stationary_point_1d(line, x[i], lo, hi, cfg.tol, cfg.max_iter);
        x[i] = s.x;
    };

    let mut sweeps = 0;
    for _pass in 0..cfg.passes.max(1) {
        sweeps += 1;
        // (α, r) stationarity for the current core.
        for _ in 0..cfg.max_iter {
            coordinate(&mut x, 0, -a_max, a_max);
            coordinate(&mut x, 1, -R_BOUND, R_BOUND);
            let ga = optimize::partial(&f, &x, 0, FD_STEP);
            let gr = optimize::partial(&f, &x, 1, FD_STEP);
            if ga.hypot(gr) < cfg.tol {
                break;
            }
        }
        // Sequential correction of c_{n−1}, …, c_1.
        for k in (1..n).rev() {
            let i = k + 1;
            // Move along the unit sphere: c_k = t, the remaining coefficients
            // (c_0 included) rescaled to keep the core normalized.
            let base = x.clone();
            let others: f64 = base[2..].iter().enumerate().filter(|(j, _)| j + 2 != i).map(|(_, c)| c * c).sum::<f64>()
                + core_from_tail(n, &base)[0].powi(2);
            let along = |t: f64| -> Vec<f64> {
                let mut y = base.clone();
                let scale = if others > 0.0 { ((1.0 - t * t).max(0.0) / others).sqrt() } else { 0.0 };
                for (j, c) in y.iter_mut().enumerate().skip(2) {
                    if j != i {
                        *c *= scale;
                    }
                }
                y[i] = t;
                y
            };
            let line = |t: f64| f(&along(t));
            let lim = 1.0 - 1e-9;
            let mut start = base[i].clamp(-lim, lim);
            let mut best = line(start);
            for s in 1..40 {
                let t = -1.0 + 2.0 * s as f64 / 40.0;
                let v = line(t);
                if v > best {
                    best = v;
                    start = t;
                }
            }
            let s = stationary_point_1d(line, start, -lim, lim, cfg.tol, cfg.max_iter);
            x = along(s.x);
        }

    }
    // Joint refinement: with (α, r) fixed the optimal core is ∝ v, leaving a
    // two-dimensional stationarity problem.
    let mut argmax = x_to_params(n, &x);
    let mut residual = optimize::norm(&stationarity_residuals(n, &argmax)?);
    if residual >= cfg.tol && cfg.polish {
        if let Some(candidate) = polish_reduced(n, x[0], x[1], cfg) {
            if let Ok(res) = stationarity_residuals(n, &candidate).map(|g| optimize::norm(&g)) {
                if res < residual && reduced_objective(n, candidate.alpha.re, candidate.r.re) >= f(&x) - 1e-12 {
                    argmax = candidate;
                    residual = res;
                }
            }
        }
    }
    let argmax = canonical_representative(argmax);
    let p_bar = core_amplitude(
        n,
        argmax.alpha,
        argmax.r,
        &argmax.core.iter().map(|&c| Complex64::new(c, 0.0)).collect::<Vec<_>>(),
    )
    .norm_sqr();
    if residual >= STAGED_RESIDUAL_TOL {
        return Err(Error::NoConvergence { iterations: sweeps, residual, best: Some(params_to_x(&argmax)) });
    }
    let dim_used = matrix_route(n, &argmax, p_bar)?;
    Ok(ThresholdRecord {
        n,
        criterion: Criterion::Genuine,
        p_bar,
        argmax,
        method: Method::Staged,
        residual_norm: residual,
        dim_used,
        iterations: sweeps,
        dispersion: None,
    })
}

fn optimal_core(n: usize, alpha: f64, r: f64) -> Option<GaussianParams> {
    let v = core_vector(n, alpha, r);
    let nv = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    (nv > 0.0).then(|| GaussianParams {
        alpha: Complex64::new(alpha, 0.0),
        r: Complex64::new(r, 0.0),
        core: v.iter().map(|c| c / nv).collect(),
    })
}

/// Newton iteration on the `(α, r)` residuals with the core held at its
/// optimum `c ∝ v(α, r)`, where the core residuals vanish identically.
fn polish_reduced(n: usize, alpha: f64, r: f64, cfg: &StagedConfig) -> Option<GaussianParams> {
    let eval = |y: [f64; 2]| -> Option<[f64; 2]> {
        let p = optimal_core(n, y[0], y[1])?;
        let g = stationarity_residuals(n, &p).ok()?;
        Some([g[0], g[1]])
    };
    let mut y = [alpha, r];
    let mut g = eval(y)?;
    let mut res = g[0].hypot(g[1]);
    let step = 1e-5;
    for _ in 0..cfg.max_iter {
        if res < cfg.tol {
            break;
        }
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let (mut yp, mut ym) = (y, y);
            yp[j] += step;
            ym[j] -= step;
            let (gp, gm) = (eval(yp)?, eval(ym)?);
            for i in 0..2 {
                jac[i][j] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = [
            -(jac[1][1] * g[0] - jac[0][1] * g[1]) / det,
            -(-jac[1][0] * g[0] + jac[0][0] * g[1]) / det,
        ];
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let yn = [y[0] + t * dx[0], y[1] + t * dx[1]];
            if let Some(gn) = eval(yn) {
                let rn = gn[0].hypot(gn[1]);
                if rn < res {
                    (y, g, res) = (yn, gn, rn);
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    optimal_core(n, y[0], y[1])
}

/// Picks, among the parametrizations related by `α → −α, c_k → (−1)^k c_k` and a
/// global sign, the one with `α ≥ 0` and `c_{n−1} > 0`.
fn canonical_representative(mut p: GaussianParams) -> GaussianParams {
    if p.alpha.re < 0.0 {
        p.alpha = -p.alpha;
        for (k, c) in p.core.iter_mut().enumerate() {
            if k % 2 == 1 {
                *c = -*c;
            }
        }
    }
    if p.core.last().is_some_and(|&c| c < 0.0) {
        p.core.iter_mut().for_each(|c| *c = -*c);
    }
    p
}

/// Whether `|c_{n−1}| > |c_{n−2}| > … > |c_0|`.
pub fn coefficients_ordered(core: &[f64]) -> bool {
    core.windows(2).all(|w| w[1].abs() > w[0].abs())
}

/// Basic threshold: core fixed to the vacuum, maximized over real `(α, r)`
/// by multistart Nelder–Mead and a Newton polish.
pub fn threshold_basic(n: usize) -> Result<ThresholdRecord> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let f = |y: &[f64]| basic_objective(n, y[0], y[1]);
    let neg = |y: &[f64]| {
        if y[0].abs() > alpha_bound(n) || y[1].abs() > R_BOUND {
            return 1.0;
        }
        -f(y)
    };
    let nm = NelderMead { initial_step: 0.1, ..Default::default() };
    let amax = (n as f64).sqrt() + 2.0;
    let starts: Vec<[f64; 2]> = (0..7)
        .flat_map(|i| (0..7).map(move |j| [0.1 + amax * i as f64 / 6.0, -0.8 + 1.6 * j as f64 / 6.0]))
        .collect();
    let results: Vec<optimize::Minimum> = starts
        .par_iter()
        .map(|s| nm.minimize_restarted(neg, s, 3))
        .collect();
    let best = results
        .iter()
        .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        .expect("nonempty starts");
    let (x, residual, _) = newton_polish(&f, &best.x, 1e-10, 50);
    let x = if f(&x) >= -best.value - 1e-12 { x } else { best.x.clone() };
    let residual = residual.min(optimize::norm(&optimize::gradient(&f, &x, FD_STEP)));
    let p_bar = f(&x);
    let argmax = canonical_representative(
        GaussianParams { alpha: Complex64::new(x[0], 0.0), r: Complex64::new(x[1], 0.0), core: vec![1.0] },
    );
    let dim_used = matrix_route_basic(n, &argmax, p_bar)?;
    Ok(ThresholdRecord {
        n,
        criterion: Criterion::Basic,
        p_bar,
        argmax,
        method: Method::Multistart,
        residual_norm: residual,
        dim_used,
        iterations: starts.len(),
        dispersion: None,
    })
}

fn matrix_route_basic(n: usize, params: &GaussianParams, expected: f64) -> Result<usize> {
    // ⟨n|D S|0⟩ through the matrix route: embed the vacuum core in an n-long core.
    let mut core = vec![0.0; n];
    core[0] = 1.0;
    let padded = GaussianParams { core, ..params.clone() };
    matrix_route(n, &padded, expected)
}

/// Restart statistics of the oracle.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub record: ThresholdRecord,
    /// Best value of every restart, sorted descending.
    pub values: Vec<f64>,
}

fn top_decile_dispersion(sorted_desc: &[f64]) -> f64 {
    let k = (sorted_desc.len() / 10).max(1);
    sorted_desc[0] - sorted_desc[k - 1]
}

/// Direct multistart maximization over real `(α, r, c_0 … c_{n−1})`.
pub fn threshold_oracle(n: usize, restarts: usize) -> Result<OracleReport> {
    threshold_oracle_seeded(n, restarts, 0x5eed)
}

pub fn threshold_oracle_seeded(n: usize, restarts: usize, seed: u64) -> Result<OracleReport> {
    oracle(n, restarts, seed, false)
}

/// Oracle with complex `α`, `r` and core coefficients.
pub fn threshold_oracle_complex(n: usize, restarts: usize, seed: u64) -> Result<OracleReport> {
    oracle(n, restarts, seed, true)
}

fn complex_core(x: &[f64], complex: bool) -> (Complex64, Complex64, Vec<Complex64>) {
    if complex {
        let core: Vec<Complex64> = x[4..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let norm = core.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        (
            Complex64::new(x[0], x[1]),
            Complex64::new(x[2], x[3]),
            core.into_iter().map(|c| c / norm).collect(),
        )
    } else {
        let norm = x[2..].iter().map(|c| c * c).sum::<f64>().sqrt();
        (
            Complex64::new(x[0], 0.0),
            Complex64::new(x[1], 0.0),
            x[2..].iter().map(|c| Complex64::new(c / norm, 0.0)).collect(),
        )
    }
}

fn oracle(n: usize, restarts: usize, seed: u64, complex: bool) -> Result<OracleReport> {
    if n == 0 || n > MAX_ORACLE_N {
        return Err(Error::InvalidParameter(format!("n = {n} outside 1..={MAX_ORACLE_N}")));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart".into()));
    }
    let a_max = alpha_bound(n);
    let neg = |x: &[f64]| -> f64 {
        let (alpha, r, core) = complex_core(x, complex);
        if alpha.norm() > a_max || r.norm() > R_BOUND {
            return 1.0;
        }
        if core.iter().any(|c| !c.re.is_finite()) {
            return 1.0;
        }
        -core_amplitude(n, alpha, r, &core).norm_sqr()
    };
    let nm = NelderMead { initial_step: 0.2, ..Default::default() };
    let runs: Vec<optimize::Minimum> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let spread = (n as f64).sqrt() + 1.0;
            let mut x = if complex {
                vec![
                    rng.gen_range(-spread..spread),
                    rng.gen_range(-spread..spread),
                    rng.gen_range(-0.6..0.6),
                    rng.gen_range(-0.6..0.6),
                ]
            } else {
                vec![rng.gen_range(-spread..spread), rng.gen_range(-0.6..0.6)]
            };
            let width = if complex { 2 * n } else { n };
            for _ in 0..width {
                x.push(rng.sample::<f64, _>(StandardNormal));
            }
            nm.minimize_restarted(neg, &x, 4)
        })
        .collect();
    let mut values: Vec<f64> = runs.iter().map(|m| -m.value).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let best = runs
        .iter()
        .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        .expect("restarts > 0");
    let (alpha, r, core) = complex_core(&best.x, complex);
    // Report the real part of the core after removing the global phase of c_0.
    let phase = if core[0].norm() > 0.0 { core[0].conj() / core[0].norm() } else { Complex64::new(1.0, 0.0) };
    let argmax = GaussianParams {
        alpha,
        r,
        core: core.iter().map(|c| (c * phase).re).collect(),
    };
    let dispersion = top_decile_dispersion(&values);
    Ok(OracleReport {
        record: ThresholdRecord {
            n,
            criterion: Criterion::Genuine,
            p_bar: values[0],
            argmax,
            method: Method::MultistartOracle,
            residual_norm: optimize::norm(&optimize::gradient(&|y: &[f64]| -neg(y), &best.x, FD_STEP)),
            dim_used: 0,
            iterations: restarts,
            dispersion: Some(dispersion),
        },
        values,
    })
}

/// Outcome of certifying `P_n` against both thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult {
    pub n: usize,
    #[serde(rename = "P_n")]
    pub p_n: f64,
    pub p_bar_genuine: f64,
    pub p_bar_basic: f64,
    pub genuine: bool,
    pub basic: bool,
    pub margin_genuine: f64,
    pub margin_basic: f64,
}

impl CertificationResult {
    pub fn from_thresholds(n: usize, p_n: f64, p_bar_genuine: f64, p_bar_basic: f64) -> Self {
        Self {
            n,
            p_n,
            p_bar_genuine,
            p_bar_basic,
            genuine: p_n > p_bar_genuine,
            basic: p_n > p_bar_basic,
            margin_genuine: p_n - p_bar_genuine,
            margin_basic: p_n - p_bar_basic,
        }
    }
}

/// Threshold cache shared by certifications: single writer, many readers.
#[derive(Debug, Default)]
pub struct ThresholdTable {
    records: RwLock<BTreeMap<(usize, Criterion), ThresholdRecord>>,
}

impl ThresholdTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = ThresholdRecord>) -> Self {
        let table = Self::new();
        for r in records {
            table.insert(r);
        }
        table
    }

    pub fn insert(&self, record: ThresholdRecord) {
        self.records.write().unwrap().insert((record.n, record.criterion), record);
    }

    pub fn get(&self, n: usize, criterion: Criterion) -> Option<ThresholdRecord> {
        self.records.read().unwrap().get(&(n, criterion)).cloned()
    }

    /// Cached record, computed on demand.
    pub fn get_or_compute(&self, n: usize, criterion: Criterion) -> Result<ThresholdRecord> {
        if let Some(r) = self.get(n, criterion) {
            return Ok(r);
        }
        let record = match criterion {
            Criterion::Genuine => threshold_genuine(n)?,
            Criterion::Basic => threshold_basic(n)?,
        };
        self.insert(record.clone());
        Ok(record)
    }

    pub fn p_bar(&self, n: usize, criterion: Criterion) -> Result<f64> {
        Ok(self.get_or_compute(n, criterion)?.p_bar)
    }

    /// Computes missing records for every `n` in the range, in parallel.
    pub fn fill(&self, ns: impl IntoIterator<Item = usize>) -> Result<()> {
        let jobs: Vec<(usize, Criterion)> = ns
            .into_iter()
            .flat_map(|n| [(n, Criterion::Genuine), (n, Criterion::Basic)])
            .filter(|(n, c)| self.get(*n, *c).is_none())
            .collect();
        let computed: Vec<Result<ThresholdRecord>> = jobs
            .par_iter()
            .map(|&(n, c)| match c {
                Criterion::Genuine => threshold_genuine(n),
                Criterion::Basic => threshold_basic(n),
            })
            .collect();
        for r in computed {
            self.insert(r?);
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<ThresholdRecord> {
        self.records.read().unwrap().values().cloned().collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.records())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<ThresholdRecord> = serde_json::from_str(text)?;
        Ok(Self::from_records(records))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        // write-then-rename so concurrent readers never see a partial file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        std::fs::write(&tmp, self.to_json()?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Compares `P_n` against the genuine and basic thresholds (strict inequality).
pub fn certify(dist: &PhononDistribution, n: usize, table: &ThresholdTable) -> Result<CertificationResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("certification needs n ≥ 1".into()));
    }
    if n > dist.truncation() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} beyond the distribution truncation {}",
            dist.truncation()
        )));
    }
    let genuine = table.p_bar(n, Criterion::Genuine)?;
    let basic = table.p_bar(n, Criterion::Basic)?;
    Ok(CertificationResult::from_thresholds(n, dist.get(n), genuine, basic))
}
