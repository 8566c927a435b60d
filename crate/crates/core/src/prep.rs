//! π-pulse ladder preparation of Fock states under motional heating.
//!
//! Pulse `k` transfers population from `k−1` to `k` and is treated as an
//! instantaneous transfer followed by heating for the pulse duration.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::PhononDistribution;
use crate::rabi::RabiConfig;
use crate::thermal::gaussian_additive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HeatingSchedule {
    /// Heat after every pulse for its own duration.
    #[default]
    PerPulse,
    /// Heat once for the whole sequence duration after the last pulse.
    EndOfSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    pub n_target: usize,
    pub rabi: RabiConfig,
    /// Phonons per second.
    pub heating_rate: f64,
    /// Ground-state population after cooling; the rest starts in `|1⟩`.
    pub p0_init: f64,
    /// Fraction of the resonant population moved by each π pulse.
    pub pulse_efficiency: f64,
    #[serde(default)]
    pub heating: HeatingSchedule,
}

impl PrepConfig {
    /// Ideal ladder: perfect cooling and pulses, no heating.
    pub fn ideal(n_target: usize, rabi: RabiConfig) -> Self {
        Self {
            n_target,
            rabi,
            heating_rate: 0.0,
            p0_init: 1.0,
            pulse_efficiency: 1.0,
            heating: HeatingSchedule::PerPulse,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rabi.validate()?;
        let unit = 0.0..=1.0;
        if !unit.contains(&self.p0_init) || !unit.contains(&self.pulse_efficiency) {
            return Err(Error::InvalidParameter(format!(
                "p0_init = {} and pulse_efficiency = {} must lie in [0, 1]",
                self.p0_init, self.pulse_efficiency
            )));
        }
        if !(self.heating_rate >= 0.0) || !self.heating_rate.is_finite() {
            return Err(Error::InvalidParameter(format!("heating rate {}", self.heating_rate)));
        }
        Ok(())
    }

    /// Duration of the π pulse driving `k−1 → k`.
    pub fn pulse_duration(&self, k: usize) -> f64 {
        PI / self.rabi.omega_n(k - 1)
    }
}

/// Total duration `Σ_k π/(√k Ω_c η)` of the ladder, in seconds.
pub fn sequence_duration(cfg: &PrepConfig) -> f64 {
    (1..=cfg.n_target).map(|k| cfg.pulse_duration(k)).sum()
}

fn transfer(probs: &mut Vec<f64>, k: usize, efficiency: f64) {
    if probs.len() <= k {
        probs.resize(k + 1, 0.0);
    }
    let moved = efficiency * probs[k - 1];
    probs[k - 1] -= moved;
    probs[k] += moved;
}

/// Runs the ladder and returns the final phonon distribution.
pub fn ladder_prepare(cfg: &PrepConfig) -> Result<PhononDistribution> {
    cfg.validate()?;
    let mut dist = PhononDistribution::from_weights(vec![cfg.p0_init, 1.0 - cfg.p0_init])?;
    for k in 1..=cfg.n_target {
        let mut probs = dist.probs().to_vec();
        transfer(&mut probs, k, cfg.pulse_efficiency);
        dist = PhononDistribution::from_weights(probs)?;
        if cfg.heating == HeatingSchedule::PerPulse {
            dist = gaussian_additive(&dist, cfg.heating_rate * cfg.pulse_duration(k))?;
        }
    }
    if cfg.heating == HeatingSchedule::EndOfSequence {
        dist = gaussian_additive(&dist, cfg.heating_rate * sequence_duration(cfg))?;
    }
    Ok(dist
        .with_meta("source", "ladder_prepare")
        .with_meta("n_target", cfg.n_target.to_string())
        .with_meta("heating_rate", format!("{}", cfg.heating_rate))
        .with_meta("p0_init", format!("{}", cfg.p0_init))
        .with_meta("pulse_efficiency", format!("{}", cfg.pulse_efficiency))
        .with_meta(
            "heating",
            match cfg.heating {
                HeatingSchedule::PerPulse => "per-pulse",
                HeatingSchedule::EndOfSequence => "end-of-sequence",
            },
        ))
}

/// [`ladder_prepare`] over a batch of configurations, in parallel.
pub fn ladder_batch(cfgs: &[PrepConfig]) -> Result<Vec<PhononDistribution>> {
    cfgs.par_iter().map(ladder_prepare).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations() {
        let cfg = PrepConfig::ideal(0, RabiConfig::reference());
        assert_eq!(sequence_duration(&cfg), 0.0);
        let one = sequence_duration(&PrepConfig::ideal(1, RabiConfig::reference()));
        assert!((one * 1e6 - 113.5).abs() < 0.05, "{}", one * 1e6);
        let d: Vec<f64> = (1..6).map(|n| sequence_duration(&PrepConfig::ideal(n, RabiConfig::reference()))).collect();
        for w in d.windows(3) {
            assert!(w[2] - w[1] < w[1] - w[0]);
        }
    }

    #[test]
    fn ideal_ladder_gives_fock_state() {
        for n in 0..6 {
            let d = ladder_prepare(&PrepConfig::ideal(n, RabiConfig::reference())).unwrap();
            assert_eq!(d.get(n), 1.0);
        }
    }

    #[test]
    fn three_pulse_bookkeeping() {
        let cfg = PrepConfig { p0_init: 0.95, pulse_efficiency: 0.9, ..PrepConfig::ideal(3, RabiConfig::reference()) };
        let d = ladder_prepare(&cfg).unwrap();
        // [0.95, 0.05] -> [0.095, 0.905] -> [0.095, 0.0905, 0.8145] -> ...
        let expected = PhononDistribution::new(vec![0.095, 0.0905, 0.08145, 0.73305]).unwrap();
        assert!((d.fidelity(&expected) - 1.0).abs() < 1e-10);
        assert!(d.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn heating_errors_sit_next_to_target() {
        let cfg = PrepConfig { heating_rate: 2.7, ..PrepConfig::ideal(5, RabiConfig::reference()) };
        let d = ladder_prepare(&cfg).unwrap();
        let mut errs: Vec<(usize, f64)> = d.probs().iter().copied().enumerate().filter(|&(k, _)| k != 5).collect();
        errs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let top: Vec<usize> = errs.iter().take(2).map(|e| e.0).collect();
        assert!(top.contains(&4) && top.contains(&6), "{errs:?}");
    }
}
