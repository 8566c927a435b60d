//! Truncated Fock-basis operators and the phonon-number distribution type.
//!
//! Displacement convention: `D(α) = exp(α a† − α* a)`. Squeeze convention:
//! `S(r) = exp(r a†² − r* a²)`, so `|⟨0|S(r)|0⟩|² = 1/cosh(2|r|)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{laguerre, ln_factorial};

/// Allowed deviation of the total probability from one.
pub const NORM_TOL: f64 = 1e-9;
/// Allowed norm deficit of an operator column inside the truncated space.
pub const LEAKAGE_TOL: f64 = 1e-10;
/// Absolute tolerance on `Σ c_m² = 1` for [`GaussianParams`].
pub const CORE_NORM_TOL: f64 = 1e-12;

/// Default truncation dimension when the largest Fock index involved is `max_index`.
pub fn default_dim(max_index: usize) -> usize {
    4 * max_index + 20
}

/// Phonon-number distribution `P_n = ⟨n|ρ|n⟩`, indexed from `n = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct PhononDistribution {
    probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    meta: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct RawDistribution {
    probs: Vec<f64>,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

impl TryFrom<RawDistribution> for PhononDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        Ok(PhononDistribution::new(raw.probs)?.with_meta_map(raw.meta))
    }
}

impl PhononDistribution {
    /// Validates entries in `[0, 1]` and total mass within [`NORM_TOL`] of one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        for (n, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidDistribution(format!("P_{n} = {p} outside [0, 1]")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs, meta: BTreeMap::new() })
    }

    /// Normalizes nonnegative weights. Negative round-off down to `-1e-12` is clamped.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        for (n, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() || *w < -1e-12 {
                return Err(Error::InvalidDistribution(format!("weight {n} = {w}")));
            }
            *w = w.max(0.0);
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(weights)
    }

    /// Ideal Fock state `|n⟩`.
    pub fn fock(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        Self { probs, meta: BTreeMap::new() }
    }

    pub fn vacuum() -> Self {
        Self::fock(0)
    }

    /// Bose–Einstein distribution with mean `nbar`, truncated once the tail mass
    /// drops below `1e-14` and renormalized.
    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::InvalidParameter(format!("thermal mean {nbar}")));
        }
        if nbar == 0.0 {
            return Ok(Self::vacuum());
        }
        let ratio = nbar / (1.0 + nbar);
        // tail beyond N is ratio^{N+1}
        let trunc = ((1e-14f64).ln() / ratio.ln()).ceil() as usize + 1;
        Self::thermal_truncated(nbar, trunc)
    }

    /// Bose–Einstein distribution of mean `nbar` on `0..=trunc`, renormalized.
    pub fn thermal_truncated(nbar: f64, trunc: usize) -> Result<Self> {
        let ratio = nbar / (1.0 + nbar);
        let weights = (0..=trunc)
            .map(|n| ratio.powi(n as i32) / (1.0 + nbar))
            .collect();
        Self::from_weights(weights)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P_n`, zero beyond the truncation.
    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Largest represented phonon number.
    pub fn truncation(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// Parity expectation `Σ (−1)^n P_n`.
    pub fn parity(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| if n % 2 == 0 { *p } else { -p })
            .sum()
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    fn with_meta_map(mut self, meta: BTreeMap<String, String>) -> Self {
        self.meta = meta;
        self
    }

    /// Classical fidelity `(Σ √(p q))²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        let n = self.probs.len().max(other.probs.len());
        let bc: f64 = (0..n).map(|k| (self.get(k) * other.get(k)).sqrt()).sum();
        bc * bc
    }

    /// Largest absolute difference between two distributions.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.probs.len().max(other.probs.len());
        (0..n)
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Gaussian operation parameters acting on a core superposition `Σ c_m |m⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub alpha: Complex64,
    pub r: Complex64,
    pub core: Vec<f64>,
}

impl GaussianParams {
    pub fn new(alpha: Complex64, r: Complex64, core: Vec<f64>) -> Result<Self> {
        let norm: f64 = core.iter().map(|c| c * c).sum();
        if core.is_empty() || (norm - 1.0).abs() > CORE_NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "core coefficients must satisfy Σc² = 1 (got {norm})"
            )));
        }
        Ok(Self { alpha, r, core })
    }

    /// Real parameters with the core normalized on construction.
    pub fn real(alpha: f64, r: f64, core: &[f64]) -> Result<Self> {
        let norm = core.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("zero core vector".into()));
        }
        Self::new(
            Complex64::new(alpha, 0.0),
            Complex64::new(r, 0.0),
            core.iter().map(|c| c / norm).collect(),
        )
    }

    pub fn is_real(&self) -> bool {
        self.alpha.im == 0.0 && self.r.im == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Displacement,
    Squeeze,
    Product,
}

/// Square complex matrix in the truncated Fock basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    kind: OperatorKind,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// `1 − Σ_j |M_{jk}|²` for column `k`.
    pub fn column_deficit(&self, k: usize) -> f64 {
        1.0 - self.entries.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Errors when any of the columns `0..=last` leaks more than [`LEAKAGE_TOL`].
    pub fn check_leakage(&self, last: usize) -> Result<()> {
        for k in 0..=last.min(self.dim() - 1) {
            let leakage = self.column_deficit(k);
            if leakage > LEAKAGE_TOL {
                return Err(Error::Truncation { dim: self.dim(), column: k, leakage });
            }
        }
        Ok(())
    }

    pub fn product(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries * &rhs.entries,
            kind: OperatorKind::Product,
        }
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.entries * v
    }
}

/// `⟨j|D(α)|k⟩` from the associated-Laguerre closed form.
pub fn displacement_element(j: usize, k: usize, alpha: Complex64) -> Complex64 {
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return if j == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let (lo, hi) = if j >= k { (k, j) } else { (j, k) };
    let d = hi - lo;
    let magnitude = (0.5 * (ln_factorial(lo) - ln_factorial(hi)) + 0.5 * d as f64 * x.ln() - 0.5 * x).exp()
        * laguerre(lo, d as f64, x);
    // α^{j-k} for j ≥ k, (−α*)^{k-j} otherwise
    let phase_angle = if j >= k {
        d as f64 * alpha.arg()
    } else {
        d as f64 * (PI - alpha.arg())
    };
    Complex64::from_polar(magnitude, phase_angle)
}

fn displacement_unchecked(alpha: Complex64, dim: usize) -> OperatorMatrix {
    OperatorMatrix {
        entries: DMatrix::from_fn(dim, dim, |j, k| displacement_element(j, k, alpha)),
        kind: OperatorKind::Displacement,
    }
}

/// Truncated displacement operator. Errors if column 0 leaks out of `dim`;
/// callers needing higher columns check them with [`OperatorMatrix::check_leakage`].
pub fn displacement_matrix(alpha: Complex64, dim: usize) -> Result<OperatorMatrix> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dim {dim} < 2")));
    }
    let m = displacement_unchecked(alpha, dim);
    m.check_leakage(0)?;
    Ok(m)
}

fn squeeze_unchecked(r: Complex64, dim: usize) -> OperatorMatrix {
    // Exponentiate in an enlarged space so the kept block is free of edge effects.
    let ext = dim + (dim / 2).max(24);
    let mut generator = DMatrix::<Complex64>::zeros(ext, ext);
    for j in 0..ext - 2 {
        let c = (((j + 1) * (j + 2)) as f64).sqrt();
        generator[(j + 2, j)] = r * c;
        generator[(j, j + 2)] = -r.conj() * c;
    }
    let full = generator.exp();
    let mut entries = full.view((0, 0), (dim, dim)).into_owned();
    for j in 0..dim {
        for k in 0..dim {
            if (j + k) % 2 == 1 {
                entries[(j, k)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    OperatorMatrix { entries, kind: OperatorKind::Squeeze }
}

/// Truncated squeeze operator via Padé scaling-and-squaring of the generator.
/// Leakage is checked on column 0 as for [`displacement_matrix`].
pub fn squeeze_matrix(r: Complex64, dim: usize) -> Result<OperatorMatrix> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dim {dim} < 2")));
    }
    let m = squeeze_unchecked(r, dim);
    m.check_leakage(0)?;
    Ok(m)
}

/// `|⟨n|D(√u)|m⟩|²`, symmetric in `n` and `m`.
pub fn displaced_fock_prob(n: usize, m: usize, u: f64) -> f64 {
    displaced_fock_prob_with_derivative(n, m, u).0
}

/// `|⟨n|D(√u)|m⟩|²` and its derivative in `u`.
///
/// The probability is `e^{-u} Q(u)` with `Q = (lo!/hi!) u^d [L_lo^{(d)}(u)]²`,
/// `d = |n − m|`; the derivative is `e^{-u} (Q' − Q)` using
/// `d/du L_k^{(d)} = −L_{k−1}^{(d+1)}`.
pub fn displaced_fock_prob_with_derivative(n: usize, m: usize, u: f64) -> (f64, f64) {
    debug_assert!(u >= 0.0);
    let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
    let d = hi - lo;
    if u == 0.0 {
        let value = if d == 0 { 1.0 } else { 0.0 };
        let deriv = match d {
            0 => -(2.0 * lo as f64 + 1.0),
            1 => hi as f64,
            _ => 0.0,
        };
        return (value, deriv);
    }
    let pre = (ln_factorial(lo) - ln_factorial(hi) - u).exp();
    let lag = laguerre(lo, d as f64, u);
    let lag_deriv = if lo == 0 { 0.0 } else { -laguerre(lo - 1, d as f64 + 1.0, u) };
    let ud = u.powi(d as i32);
    let q = ud * lag * lag;
    let dq = if d == 0 { 0.0 } else { d as f64 * u.powi(d as i32 - 1) * lag * lag } + 2.0 * ud * lag * lag_deriv;
    (pre * q, pre * (dq - q))
}

/// `|⟨n| D(α) S(r) Σ_m c_m |m⟩|²` from products of truncated [`OperatorMatrix`]es.
pub fn core_overlap(n: usize, params: &GaussianParams, dim: usize) -> Result<f64> {
    if params.core.len() != n {
        return Err(Error::InvalidParameter(format!(
            "core has {} coefficients, expected {n}",
            params.core.len()
        )));
    }
    if dim < 4 * n.max(1) {
        return Err(Error::InvalidParameter(format!("dim {dim} too small for n = {n}")));
    }
    let squeeze = squeeze_unchecked(params.r, dim);
    squeeze.check_leakage(n.saturating_sub(1))?;
    let displacement = displacement_unchecked(params.alpha, dim);
    let product = displacement.product(&squeeze);
    let amp: Complex64 = params
        .core
        .iter()
        .enumerate()
        .map(|(m, &c)| product.get(n, m) * c)
        .sum();
    Ok(amp.norm_sqr())
}

/// Closed-form squeeze amplitudes from the SU(1,1) disentangled form
/// `S = exp(τ a†²/2) (sech s)^{a†a+1/2} exp(−τ* a²/2)`, with `s = 2|r|` and
/// `τ = e^{i arg r} tanh s`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SqueezeClosedForm {
    ln_half_tau: f64,
    arg_tau: f64,
    ln_sech: f64,
    zero: bool,
}

impl SqueezeClosedForm {
    pub(crate) fn new(r: Complex64) -> Self {
        let s = 2.0 * r.norm();
        if s == 0.0 {
            return Self { ln_half_tau: 0.0, arg_tau: 0.0, ln_sech: 0.0, zero: true };
        }
        Self {
            ln_half_tau: (s.tanh() / 2.0).ln(),
            arg_tau: r.arg(),
            ln_sech: -s.cosh().ln(),
            zero: false,
        }
    }

    /// `⟨j|S(r)|m⟩`.
    pub(crate) fn element(&self, j: usize, m: usize) -> Complex64 {
        if (j + m) % 2 == 1 {
            return Complex64::new(0.0, 0.0);
        }
        if self.zero {
            return if j == m { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        }
        let base = 0.5 * (ln_factorial(j) + ln_factorial(m)) + 0.5 * self.ln_sech;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut k = m % 2;
        let kmax = j.min(m);
        while k <= kmax {
            let p = (j - k) / 2;
            let q = (m - k) / 2;
            let ln_mag = base
                + (p + q) as f64 * self.ln_half_tau
                - ln_factorial(p)
                + k as f64 * self.ln_sech
                - ln_factorial(k)
                - ln_factorial(q);
            let phase = p as f64 * self.arg_tau + q as f64 * (PI - self.arg_tau);
            acc += Complex64::from_polar(ln_mag.exp(), phase);
            k += 2;
        }
        acc
    }
}

/// Cap on the intermediate Fock index summed by [`core_amplitude`].
const MAX_INTERMEDIATE: usize = 50_000;

/// `⟨n| D(α) S(r) Σ_m c_m |m⟩` without a fixed truncation: the intermediate sum
/// runs until the displacement row has decayed below `1e-18`.
pub(crate) fn core_amplitude(n: usize, alpha: Complex64, r: Complex64, core: &[Complex64]) -> Complex64 {
    let squeeze = SqueezeClosedForm::new(r);
    let x = alpha.norm_sqr();
    let past_peak = n + (x + 6.0 * x.sqrt()).ceil() as usize + 4;
    let mut amp = Complex64::new(0.0, 0.0);
    for j in 0..MAX_INTERMEDIATE {
        let d = displacement_element(n, j, alpha);
        if j > past_peak && d.norm() < 1e-18 {
            break;
        }
        if d.norm() == 0.0 {
            continue;
        }
        let mut v = Complex64::new(0.0, 0.0);
        for (m, c) in core.iter().enumerate() {
            if (j + m) % 2 == 0 && *c != Complex64::new(0.0, 0.0) {
                v += squeeze.element(j, m) * c;
            }
        }
        amp += d * v;
    }
    amp
}

/// Same quantity as [`core_overlap`] evaluated with closed-form squeeze
/// amplitudes and no fixed truncation. Used on optimizer hot paths.
pub fn core_overlap_closed_form(n: usize, params: &GaussianParams) -> f64 {
    let core: Vec<Complex64> = params.core.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    core_amplitude(n, params.alpha, params.r, &core).norm_sqr()
}
