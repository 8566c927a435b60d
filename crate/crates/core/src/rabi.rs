//! Blue-sideband Rabi oscillations: forward model, population fit and
//! projection-noise uncertainties.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::PhononDistribution;
use crate::nnls::nnls;

/// Largest acceptable condition number of the fit design matrix.
const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiConfig {
    /// Carrier Rabi frequency (rad/s).
    #[serde(with = "crate::units::angular")]
    pub omega_c: f64,
    /// Lamb–Dicke parameter.
    pub eta: f64,
    /// Decay rate of the ground-state oscillation (rad/s).
    #[serde(with = "crate::units::angular")]
    pub gamma0: f64,
    /// `γ_n = (n+1)^x γ_0`.
    pub x: f64,
    /// Projective measurements per time point.
    pub shots: u64,
}

impl RabiConfig {
    pub fn new(omega_c: f64, eta: f64, gamma0: f64, x: f64, shots: u64) -> Result<Self> {
        let cfg = Self { omega_c, eta, gamma0, x, shots };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Ω_c = 2π·69.7 kHz, η = 0.0632, γ_0 = 2π·0.054 kHz, x = 0.7, 100 shots.
    pub fn reference() -> Self {
        Self { omega_c: 2.0 * PI * 69.7e3, eta: 0.0632, gamma0: 2.0 * PI * 54.0, x: 0.7, shots: 100 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega_c > 0.0
            && self.omega_c.is_finite()
            && self.eta > 0.0
            && self.eta < 1.0
            && self.gamma0 >= 0.0
            && self.gamma0.is_finite()
            && (0.0..=2.0).contains(&self.x)
            && self.shots > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("Rabi configuration {self:?}")))
        }
    }

    pub fn omega_n(&self, n: usize) -> f64 {
        ((n + 1) as f64).sqrt() * self.omega_c * self.eta
    }

    pub fn gamma_n(&self, n: usize) -> f64 {
        ((n + 1) as f64).powf(self.x) * self.gamma0
    }
}

/// Sideband Rabi frequency `Ω_n = √(n+1) Ω_c η`.
pub fn omega_n(n: usize, cfg: &RabiConfig) -> f64 {
    cfg.omega_n(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiTrace {
    /// Seconds.
    pub times: Vec<f64>,
    pub p_g: Vec<f64>,
    pub shots: u64,
}

impl RabiTrace {
    pub fn new(times: Vec<f64>, p_g: Vec<f64>, shots: u64) -> Result<Self> {
        if times.len() != p_g.len() || times.is_empty() {
            return Err(Error::InvalidParameter("trace needs equal, nonzero numbers of times and probabilities".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("trace times must increase strictly".into()));
        }
        if p_g.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("p_g outside [0, 1]".into()));
        }
        if shots == 0 {
            return Err(Error::InvalidParameter("trace needs at least one shot per point".into()));
        }
        Ok(Self { times, p_g, shots })
    }

    /// CSV with header `time_us,p_g,shots`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_us,p_g,shots\n");
        for (t, p) in self.times.iter().zip(&self.p_g) {
            out.push_str(&format!("{},{},{}\n", t * 1e6, p, self.shots));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::InvalidParameter("empty trace file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["time_us", "p_g", "shots"] {
            return Err(Error::InvalidParameter(format!("trace header '{header}', expected time_us,p_g,shots")));
        }
        let (mut times, mut p_g, mut shots) = (Vec::new(), Vec::new(), None);
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::InvalidParameter(format!("trace row {}: '{line}'", i + 1));
            if f.len() != 3 {
                return Err(bad());
            }
            let t: f64 = f[0].parse().map_err(|_| bad())?;
            let p: f64 = f[1].parse().map_err(|_| bad())?;
            let s: u64 = f[2].parse().map_err(|_| bad())?;
            if *shots.get_or_insert(s) != s {
                return Err(Error::InvalidParameter("shots must be equal on every row".into()));
            }
            times.push(t * 1e-6);
            p_g.push(p);
        }
        Self::new(times, p_g, shots.unwrap_or(0))
    }
}

/// `p_g(t) = ½(1 − Σ_n P_n cos(Ω_n t) e^{−γ_n t})`.
pub fn rabi_signal(dist: &PhononDistribution, times: &[f64], cfg: &RabiConfig) -> Vec<f64> {
    let p = dist.probs();
    times
        .iter()
        .map(|&t| {
            let s: f64 = p
                .iter()
                .enumerate()
                .filter(|(_, &pn)| pn > 0.0)
                .map(|(n, &pn)| pn * (cfg.omega_n(n) * t).cos() * (-cfg.gamma_n(n) * t).exp())
                .sum();
            (0.5 * (1.0 - s)).clamp(0.0, 1.0)
        })
        .collect()
}

/// Samples per period of the fastest component `Ω_{n_target+2}`.
const SAMPLES_PER_PERIOD: f64 = 64.0;
/// Periods of `Ω_0` covered by the plan.
const SPAN_PERIODS: f64 = 8.0;

/// Uniform grid with 64 samples per period of `Ω_{n_target+2}`, spanning eight periods of `Ω_0`.
pub fn sampling_plan(n_target: usize, cfg: &RabiConfig) -> Vec<f64> {
    let dt = 2.0 * PI / cfg.omega_n(n_target + 2) / SAMPLES_PER_PERIOD;
    let span = SPAN_PERIODS * 2.0 * PI / cfg.omega_n(0);
    let count = (span / dt).ceil() as usize;
    (1..=count).map(|k| k as f64 * dt).collect()
}

/// Fitted populations with the sum of squared `p_g` residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiFit {
    pub dist: PhononDistribution,
    pub residual: f64,
    pub n_max: usize,
}

fn design_matrix(times: &[f64], cfg: &RabiConfig, n_max: usize) -> DMatrix<f64> {
    DMatrix::from_fn(times.len(), n_max + 1, |i, n| {
        let t = times[i];
        (cfg.omega_n(n) * t).cos() * (-cfg.gamma_n(n) * t).exp()
    })
}

/// Nonnegative least squares of the populations `P_0 … P_{n_max}` against the
/// trace, renormalized to unit sum. The usual choice is `n_max = N + 2` for a
/// target `|N⟩`.
pub fn fit_populations(trace: &RabiTrace, cfg: &RabiConfig, n_max: usize) -> Result<RabiFit> {
    cfg.validate()?;
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let a = design_matrix(&trace.times, cfg, n_max);
    check_rank(&a)?;
    fit_with_matrix(&a, &trace.p_g, n_max)
}

fn check_rank(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() < a.ncols() {
        return Err(Error::RankDeficient(format!(
            "{} samples for {} populations; use a denser sampling plan",
            a.nrows(),
            a.ncols()
        )));
    }
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return Err(Error::RankDeficient(format!(
            "condition number {:.3e}; the grid cannot separate the Rabi frequencies, use a denser or longer sampling plan",
            max / min
        )));
    }
    Ok(())
}

fn fit_with_matrix(a: &DMatrix<f64>, p_g: &[f64], n_max: usize) -> Result<RabiFit> {
    let y = DVector::from_iterator(p_g.len(), p_g.iter().map(|p| 1.0 - 2.0 * p));
    let x = nnls(a, &y)?;
    let model = a * &x;
    let residual = 0.25 * (y - model).norm_squared();
    let dist = PhononDistribution::from_weights(x.iter().copied().collect())?;
    Ok(RabiFit { dist, residual, n_max })
}

/// Per-population standard deviations from binomial resampling of the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McUncertainty {
    pub std: Vec<f64>,
    pub draws: usize,
    pub failed: usize,
}

/// Resamples every point as `Binomial(shots, p_g)/shots`, refits, and reports
/// the spread of each `P_n`. Draw `i` uses its own ChaCha stream of `seed`.
pub fn mc_uncertainty(trace: &RabiTrace, cfg: &RabiConfig, n_max: usize, draws: usize, seed: u64) -> Result<McUncertainty> {
    if draws < 100 {
        return Err(Error::InvalidParameter(format!("{draws} draws; at least 100 required")));
    }
    cfg.validate()?;
    let a = design_matrix(&trace.times, cfg, n_max);
    check_rank(&a)?;
    let fits: Vec<Option<Vec<f64>>> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let resampled = resample(&trace.p_g, trace.shots, &mut rng);
            fit_with_matrix(&a, &resampled, n_max).ok().map(|f| {
                let mut p = f.dist.probs().to_vec();
                p.resize(n_max + 1, 0.0);
                p
            })
        })
        .collect();
    let ok: Vec<&Vec<f64>> = fits.iter().flatten().collect();
    let failed = draws - ok.len();
    if ok.len() < 2 {
        return Err(Error::NoConvergence { iterations: draws, residual: f64::NAN, best: None });
    }
    let count = ok.len() as f64;
    let std = (0..=n_max)
        .map(|k| {
            let mean = ok.iter().map(|p| p[k]).sum::<f64>() / count;
            (ok.iter().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        })
        .collect();
    Ok(McUncertainty { std, draws, failed })
}

/// One binomial projection-noise realization of the probabilities.
pub fn resample(p_g: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    p_g.iter()
        .map(|&p| {
            let k = Binomial::new(shots, p.clamp(0.0, 1.0)).expect("valid binomial").sample(rng);
            k as f64 / shots as f64
        })
        .collect()
}

/// Synthetic noisy trace of `dist` on `times`.
pub fn synthetic_trace(dist: &PhononDistribution, times: &[f64], cfg: &RabiConfig, rng: &mut ChaCha8Rng) -> Result<RabiTrace> {
    let clean = rabi_signal(dist, times, cfg);
    RabiTrace::new(times.to_vec(), resample(&clean, cfg.shots, rng), cfg.shots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabi_frequencies() {
        let cfg = RabiConfig::reference();
        assert!((omega_n(0, &cfg) / (2.0 * PI) - 4405.04).abs() < 0.01);
        assert!((omega_n(3, &cfg) - 2.0 * omega_n(0, &cfg)).abs() < 1e-9);
        assert!((1..20).all(|n| omega_n(n, &cfg) > omega_n(n - 1, &cfg)));
    }

    #[test]
    fn signal_limits() {
        let cfg = RabiConfig { gamma0: 0.0, ..RabiConfig::reference() };
        let d = PhononDistribution::new(vec![0.3, 0.2, 0.5]).unwrap();
        assert!(rabi_signal(&d, &[0.0], &cfg)[0].abs() < 1e-15);
        let t = PI / cfg.omega_n(0);
        assert!((rabi_signal(&PhononDistribution::vacuum(), &[t], &cfg)[0] - 1.0).abs() < 1e-12);
        let reference = RabiConfig::reference();
        let tau = 1.0 / reference.gamma0;
        // envelope at t = 1/γ_0 via the peak of a full period near tau
        let period = 2.0 * PI / reference.omega_n(0);
        let t_peak = (tau / period).round() * period;
        let env = 1.0 - 2.0 * rabi_signal(&PhononDistribution::vacuum(), &[t_peak], &reference)[0];
        assert!((env - (-reference.gamma0 * t_peak).exp()).abs() < 1e-12);
        assert!(((-reference.gamma0 * tau).exp() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn plan_resolves_fastest_component() {
        let cfg = RabiConfig::reference();
        let plan = sampling_plan(0, &cfg);
        let dt = plan[1] - plan[0];
        assert!(dt <= 2.0 * PI / cfg.omega_n(2) / 32.0);
        assert!(*plan.last().unwrap() >= 6.0 * 2.0 * PI / cfg.omega_n(0) - 1e-12);
        let p10 = sampling_plan(10, &cfg);
        assert!(p10[1] - p10[0] <= 2.0 * PI / cfg.omega_n(12) / 32.0);
        let more = RabiConfig { shots: 200, ..cfg };
        assert_eq!(sampling_plan(4, &cfg), sampling_plan(4, &more));
    }

    #[test]
    fn noiseless_fit_inverts_the_model() {
        let cfg = RabiConfig::reference();
        let times = sampling_plan(2, &cfg);
        let d = PhononDistribution::fock(2);
        let trace = RabiTrace::new(times.clone(), rabi_signal(&d, &times, &cfg), 100).unwrap();
        let fit = fit_populations(&trace, &cfg, 4).unwrap();
        assert!((fit.dist.get(2) - 1.0).abs() < 1e-6);
        let mixed = PhononDistribution::new(vec![0.1, 0.2, 0.6, 0.1]).unwrap();
        let trace = RabiTrace::new(times.clone(), rabi_signal(&mixed, &times, &cfg), 100).unwrap();
        let fit = fit_populations(&trace, &cfg, 4).unwrap();
        assert!(fit.dist.max_abs_diff(&mixed) < 1e-6);
    }

    #[test]
    fn sparse_grid_is_rank_deficient() {
        let cfg = RabiConfig::reference();
        let trace = RabiTrace::new(vec![1e-6, 2e-6, 3e-6], vec![0.0, 0.01, 0.02], 100).unwrap();
        assert!(matches!(fit_populations(&trace, &cfg, 5), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn csv_round_trip() {
        let trace = RabiTrace::new(vec![1e-6, 2.5e-6], vec![0.1, 0.25], 100).unwrap();
        let back = RabiTrace::from_csv(&trace.to_csv()).unwrap();
        assert_eq!(back.p_g, trace.p_g);
        assert!((back.times[1] - 2.5e-6).abs() < 1e-18);
        assert!(RabiTrace::from_csv("t,p\n1,0.1\n").is_err());
    }

    #[test]
    fn config_requires_units() {
        let json = r#"{"omega_c":"69.7kHz*2pi","eta":0.0632,"gamma0":"2pi*0.054kHz","x":0.7,"shots":100}"#;
        let cfg: RabiConfig = serde_json::from_str(json).unwrap();
        assert!((cfg.omega_c - RabiConfig::reference().omega_c).abs() < 1e-6);
        let bare = r#"{"omega_c":69.7,"eta":0.0632,"gamma0":"2pi*0.054kHz","x":0.7,"shots":100}"#;
        assert!(serde_json::from_str::<RabiConfig>(bare).is_err());
        let back: RabiConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn monte_carlo_uncertainty_shrinks_with_shots() {
        let cfg = RabiConfig::reference();
        let times = sampling_plan(1, &cfg);
        let d = PhononDistribution::fock(1);
        let clean = rabi_signal(&d, &times, &cfg);
        let t100 = RabiTrace::new(times.clone(), clean.clone(), 100).unwrap();
        let t400 = RabiTrace::new(times, clean, 400).unwrap();
        let u100 = mc_uncertainty(&t100, &cfg, 3, 200, 1).unwrap();
        let u400 = mc_uncertainty(&t400, &cfg, 3, 200, 1).unwrap();
        assert!(u100.std[1] > 0.001 && u100.std[1] < 0.1, "{:?}", u100.std);
        let ratio = u100.std[1] / u400.std[1];
        assert!((1.5..2.7).contains(&ratio), "{ratio}");
        assert!(mc_uncertainty(&t100, &cfg, 3, 10, 1).is_err());
    }
}
