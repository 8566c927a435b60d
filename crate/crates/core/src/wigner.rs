//! Radial Wigner functions of Fock-diagonal states and their negative annuli.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::PhononDistribution;
use crate::special::laguerre_table;
use crate::thermal::{thermal_depth_with, DepthCriterion, DepthReport, DEPTH_TOL};

/// Values below `−ZERO_TOL` count as negative.
pub const ZERO_TOL: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_RETAIN: f64 = 0.05;

/// `W(s)` on a radial grid, normalized as `2π ∫ W(s) s ds = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialWigner {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialWigner {
    /// `2π ∫ W(s) s ds` by composite Simpson on a uniform grid (trapezoidal
    /// otherwise).
    pub fn normalization(&self) -> f64 {
        let f: Vec<f64> = self.radii.iter().zip(&self.values).map(|(s, w)| s * w).collect();
        let r = &self.radii;
        let n = r.len();
        if n < 2 {
            return 0.0;
        }
        let h = (r[n - 1] - r[0]) / (n - 1) as f64;
        let uniform = r.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
        let integral = if uniform && n >= 4 {
            let intervals = n - 1;
            // Simpson over an even number of intervals, 3/8 rule on a trailing triple
            let even = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
            let mut acc = 0.0;
            for k in (0..even).step_by(2) {
                acc += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
            }
            if even < intervals {
                let k = even;
                acc += 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
            }
            acc
        } else {
            r.windows(2).zip(f.windows(2)).map(|(r, v)| 0.5 * (r[1] - r[0]) * (v[0] + v[1])).sum()
        };
        2.0 * PI * integral
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,W\n");
        for (s, w) in self.radii.iter().zip(&self.values) {
            out.push_str(&format!("{s},{w}\n"));
        }
        out
    }
}

/// `W(s) = Σ_n P_n ((−1)^n/π) e^{−s²} L_n(2s²)`.
pub fn wigner_radial(dist: &PhononDistribution, radii: &[f64]) -> RadialWigner {
    let p = dist.probs();
    let nmax = p.len() - 1;
    let values = radii
        .iter()
        .map(|&s| {
            let s2 = s * s;
            let lag = laguerre_table(nmax, 2.0 * s2);
            let sum: f64 = p
                .iter()
                .zip(&lag)
                .enumerate()
                .map(|(n, (pn, l))| if n % 2 == 0 { pn * l } else { -pn * l })
                .sum();
            sum * (-s2).exp() / PI
        })
        .collect();
    RadialWigner { radii: radii.to_vec(), values }
}

/// Uniform grid of `samples` points on `[0, √(2N) + 5]` for truncation `N`.
pub fn default_radii(dist: &PhononDistribution) -> Vec<f64> {
    uniform_radii((2.0 * dist.truncation() as f64).sqrt() + 5.0, DEFAULT_SAMPLES)
}

pub fn uniform_radii(s_max: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|i| s_max * i as f64 / (samples - 1) as f64).collect()
}

/// Maximal runs of samples with `W < −1e-12`, as index ranges.
fn negative_runs(w: &RadialWigner) -> Result<Vec<(usize, usize)>> {
    let neg: Vec<bool> = w.values.iter().map(|&v| v < -ZERO_TOL).collect();
    let mut runs: Vec<(bool, usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=neg.len() {
        if i == neg.len() || neg[i] != neg[start] {
            runs.push((neg[start], start, i));
            start = i;
        }
    }
    let last = runs.len().saturating_sub(1);
    for (k, &(_, a, b)) in runs.iter().enumerate() {
        if k != 0 && k != last && b - a < 3 {
            return Err(Error::GridResolution(format!(
                "sign change separated by {} samples near s = {:.4}; use a denser radial grid",
                b - a,
                w.radii[a]
            )));
        }
    }
    Ok(runs.into_iter().filter(|r| r.0).map(|(_, a, b)| (a, b)).collect())
}

/// Number of radial intervals where the Wigner function is negative.
pub fn count_negative_annuli(w: &RadialWigner) -> Result<usize> {
    Ok(negative_runs(w)?.len())
}

/// Negative local minima `(radius, value)`, refined by a parabola through
/// the three samples around each grid minimum.
pub fn negative_peaks(w: &RadialWigner) -> Result<Vec<(f64, f64)>> {
    let v = &w.values;
    let r = &w.radii;
    let mut peaks = Vec::new();
    for (a, b) in negative_runs(w)? {
        let i = (a..b).min_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap()).expect("nonempty run");
        if i == 0 || i + 1 >= v.len() {
            peaks.push((r[i], v[i]));
            continue;
        }
        let (y0, y1, y2) = (v[i - 1], v[i], v[i + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        let h = r[i + 1] - r[i];
        if denom > 0.0 {
            let off = 0.5 * (y0 - y2) / denom;
            peaks.push((r[i] + off * h, y1 - 0.25 * (y0 - y2) * off));
        } else {
            peaks.push((r[i], y1));
        }
    }
    Ok(peaks)
}

/// Whether each ancestral peak has a distinct nearest-radius match holding at
/// least `retain` of its magnitude.
fn peaks_retained(ancestors: &[(f64, f64)], current: &[(f64, f64)], retain: f64) -> bool {
    if current.len() < ancestors.len() {
        return false;
    }
    let mut used = vec![false; current.len()];
    for &(s0, w0) in ancestors {
        let best = current
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 .0 - s0).abs().partial_cmp(&(b.1 .0 - s0).abs()).unwrap());
        match best {
            Some((j, &(_, w))) if !used[j] => {
                used[j] = true;
                if w.abs() < retain * w0.abs() {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// Largest added thermal mean keeping every negative region of `|n⟩` (there are
/// `⌈n/2⌉` of them) at no less than `retain` of its initial depth.
pub fn negativity_depth(n: usize, retain: f64) -> Result<DepthReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("the vacuum has no negative annuli".into()));
    }
    negativity_depth_of(&PhononDistribution::fock(n), n, retain)
}

/// [`negativity_depth`] for an arbitrary initial distribution; `n` only labels
/// the report.
pub fn negativity_depth_of(dist: &PhononDistribution, n: usize, retain: f64) -> Result<DepthReport> {
    if !(0.0..=1.0).contains(&retain) {
        return Err(Error::InvalidParameter(format!("retained fraction {retain}")));
    }
    let radii = default_radii(dist);
    let ancestors = negative_peaks(&wigner_radial(dist, &radii))?;
    if ancestors.is_empty() {
        return Err(Error::NoDepth);
    }
    thermal_depth_with(dist, n, DepthCriterion::WignerNegativity, DEPTH_TOL, |d| {
        let w = wigner_radial(d, &radii);
        Ok(match negative_peaks(&w) {
            Ok(peaks) => peaks_retained(&ancestors, &peaks, retain),
            Err(Error::GridResolution(_)) => false,
            Err(e) => return Err(e),
        })
    })
}
