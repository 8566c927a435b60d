//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria that cannot hold as stated are listed in `KNOWN_FAILURES` with the
//! reason; they are still evaluated and reported. Any other failure, or a
//! criterion that errors, makes the run fail.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use phonon_qng::criteria::{
    coefficients_ordered, threshold_basic, threshold_genuine, threshold_oracle, Criterion, ThresholdTable,
};
use phonon_qng::prep::{ladder_prepare, PrepConfig};
use phonon_qng::rabi::{fit_populations, sampling_plan, synthetic_trace, RabiConfig};
use phonon_qng::sensing::{approx_sigma, fisher, ideal_ratio, log_grid, metrological_ratio, min_ratio, noisy_fock, sigma};
use phonon_qng::thermal::{
    doppler_evolve, doppler_taylor, gaussian_additive, pulse_to_nbar, thermal_depth, DopplerRates,
};
use phonon_qng::wigner::{count_negative_annuli, default_radii, negativity_depth, wigner_radial, DEFAULT_RETAIN};
use phonon_qng::PhononDistribution;

const KNOWN_FAILURES: &[(usize, &str)] = &[
    (2, "|c_k| ordering breaks from n = 6 on (c_0 outgrows c_1)"),
    (8, "heating alone at 2.7 ph/s leaves the prepared |10> ahead of ideal |8>"),
    (10, "|n> has ceil(n/2) negative regions, not n"),
];

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> phonon_qng::Result<Outcome>;

fn outcome(pass: bool, detail: impl Into<String>) -> phonon_qng::Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn criterion_1() -> phonon_qng::Result<Outcome> {
    let rows: Vec<(usize, f64, f64)> = (1..=6)
        .map(|n| Ok((n, threshold_genuine(n)?.p_bar, threshold_oracle(n, 200)?.record.p_bar)))
        .collect::<phonon_qng::Result<_>>()?;
    let worst = rows.iter().map(|(_, s, o)| (s - o).abs()).fold(0.0, f64::max);
    let one = (threshold_genuine(1)?.p_bar - threshold_basic(1)?.p_bar).abs();
    outcome(
        worst < 1e-4 && one < 1e-10,
        format!("max |staged - oracle| = {worst:.1e} over n=1..6; |genuine(1) - basic(1)| = {one:.1e}"),
    )
}

fn criterion_2() -> phonon_qng::Result<Outcome> {
    let mut worst_res: f64 = 0.0;
    let mut unordered = Vec::new();
    for n in 1..=15 {
        let r = threshold_genuine(n)?;
        worst_res = worst_res.max(r.residual_norm);
        if !coefficients_ordered(&r.argmax.core) {
            unordered.push(n);
        }
    }
    for n in 1..=10 {
        worst_res = worst_res.max(threshold_basic(n)?.residual_norm);
    }
    outcome(
        worst_res < 1e-8 && unordered.is_empty(),
        format!("max residual {worst_res:.1e} (genuine n=1..15, basic n=1..10); ordering fails for n = {unordered:?}"),
    )
}

fn criterion_3() -> phonon_qng::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for nbar in [0.1, 0.5, 1.45] {
        let out = gaussian_additive(&PhononDistribution::vacuum(), nbar)?;
        let be = PhononDistribution::thermal_truncated(nbar, 80)?;
        let diff = (0..=80).map(|k| (out.get(k) - be.get(k)).abs()).fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    let cal = pulse_to_nbar(12.8e-6)?;
    outcome(
        worst < 1e-6 && (cal - 1.45).abs() <= 0.04,
        format!("max-norm vs Bose-Einstein {worst:.1e}; tau = 12.8 us -> nbar = {cal:.4}"),
    )
}

fn criterion_4() -> phonon_qng::Result<Outcome> {
    let table = ThresholdTable::new();
    table.fill(1..=10)?;
    let depths: Vec<(f64, f64)> = (1..=10usize)
        .into_par_iter()
        .map(|n| {
            let f = PhononDistribution::fock(n);
            Ok((
                thermal_depth(&f, n, Criterion::Genuine, &table)?.depth_nbar,
                thermal_depth(&f, n, Criterion::Basic, &table)?.depth_nbar,
            ))
        })
        .collect::<phonon_qng::Result<_>>()?;
    let decreasing = depths.windows(2).all(|w| w[1].0 < w[0].0);
    let basic_above = depths.iter().skip(1).all(|(g, b)| b > g);
    let ratio = depths[9].1 / depths[9].0;
    let wigner: Vec<f64> = (1..=5usize)
        .into_par_iter()
        .map(|n| negativity_depth(n, DEFAULT_RETAIN).map(|r| r.depth_nbar))
        .collect::<phonon_qng::Result<_>>()?;
    let wigner_above = wigner.iter().zip(&depths).all(|(w, (g, _))| w > g);
    outcome(
        decreasing && basic_above && ratio >= 5.0 && wigner_above,
        format!(
            "genuine {:.4}..{:.4} decreasing={decreasing}; basic>genuine={basic_above}; ratio(10) = {ratio:.2}; wigner>genuine={wigner_above}",
            depths[0].0, depths[9].0
        ),
    )
}

fn criterion_5() -> phonon_qng::Result<Outcome> {
    let mut stat_worst: f64 = 0.0;
    let mut normwise: f64 = 0.0;
    let mut entrywise: f64 = 0.0;
    for (a, b) in [(2.0, 1.0), (1.0, 0.3), (5.0, 4.5)] {
        let rates = DopplerRates::new(a, b)?;
        let rate = a.max(b);
        let be = PhononDistribution::thermal(rates.steady_state_mean().expect("A > B"))?;
        let evolved = doppler_evolve(&be, rates, 10.0 / rate)?;
        stat_worst = stat_worst.max(evolved.max_abs_diff(&be));
        for m in 0..=5 {
            let series = doppler_taylor(m, rates, 6)?;
            for frac in [0.01, 0.025, 0.05] {
                let t = frac / rate;
                let ode = doppler_evolve(&PhononDistribution::fock(m), rates, t)?;
                let len = series.mu.len().max(ode.probs().len());
                let diff = (0..len).map(|n| (series.eval(n, t) - ode.get(n)).abs()).fold(0.0, f64::max);
                let scale = ode.probs().iter().copied().fold(0.0, f64::max);
                normwise = normwise.max(diff / scale);
                for n in 0..series.mu.len() {
                    let exact = ode.get(n);
                    if exact > 1e-12 {
                        entrywise = entrywise.max((series.eval(n, t) - exact).abs() / exact);
                    }
                }
            }
        }
    }
    outcome(
        stat_worst < 1e-8 && normwise < 1e-3,
        format!(
            "stationarity drift {stat_worst:.1e}; Taylor order 6 relative error (max-norm) {normwise:.1e}, entrywise {entrywise:.1e}"
        ),
    )
}

fn criterion_6() -> phonon_qng::Result<Outcome> {
    let shots = 100;
    let mut cr_worst: f64 = 0.0;
    let mut ratio_worst: f64 = 0.0;
    for n in 0..=10 {
        let f = PhononDistribution::fock(n);
        let u = 1e-4;
        let s = sigma(&f, u, shots)?;
        cr_worst = cr_worst.max((s * s * shots as f64 * (2 * n + 1) as f64 / u - 1.0).abs());
        for u in log_grid(1e-6, 1e-2, 9) {
            let r = metrological_ratio(&f, u, shots)?;
            ratio_worst = ratio_worst.max((r / ideal_ratio(n) - 1.0).abs());
        }
    }
    let vac_worst = log_grid(1e-6, 1.0, 13)
        .into_iter()
        .map(|u| fisher(&PhononDistribution::vacuum(), u, 200).map(|f| (f * u - 1.0).abs()))
        .collect::<phonon_qng::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    outcome(
        cr_worst < 0.01 && ratio_worst < 0.01 && vac_worst < 1e-8,
        format!("|s^2 N(2n+1)/u - 1| <= {cr_worst:.1e}; ratio deviation {ratio_worst:.1e}; vacuum F*u - 1 = {vac_worst:.1e}"),
    )
}

fn criterion_7() -> phonon_qng::Result<Outcome> {
    let shots = 100;
    let grid = log_grid(1e-5, 1e-1, 9);
    let mut csv = String::from("n,u,approx_over_exact\n");
    let mut ratio_at = |n: usize| -> phonon_qng::Result<Vec<(f64, f64)>> {
        let d = gaussian_additive(&PhononDistribution::fock(n), 0.05)?;
        let p_e = d.get(n + 1) + if n > 0 { d.get(n - 1) } else { 0.0 };
        grid.iter()
            .map(|&u| {
                let q = approx_sigma(n, d.get(n), p_e, u, shots)?.powi(2) / sigma(&d, u, shots)?.powi(2);
                csv.push_str(&format!("{n},{u},{q}\n"));
                Ok((u, q))
            })
            .collect()
    };
    let low: Vec<(f64, f64)> = [1, 2].iter().map(|&n| ratio_at(n)).collect::<phonon_qng::Result<Vec<_>>>()?.concat();
    let tracks = low.iter().filter(|(u, _)| *u <= 1e-3).all(|(_, q)| (q - 1.0).abs() < 0.05);
    let worst_low = low.iter().filter(|(u, _)| *u <= 1e-3).map(|(_, q)| (q - 1.0).abs()).fold(0.0, f64::max);
    let eight = ratio_at(8)?;
    let off = |u0: f64| eight.iter().find(|(u, _)| (u / u0 - 1.0).abs() < 1e-9).map(|(_, q)| (q - 1.0).abs()).unwrap();
    let diverges = off(1e-2) > 0.05 && off(1e-1) > off(1e-2);
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::write(dir.join("approximation_study.csv"), csv)?;
    outcome(
        tracks && diverges,
        format!(
            "n=1,2 worst deviation for u<=1e-3: {:.1}%; n=8 deviation {:.0}% at u=1e-2, {:.0}% at u=1e-1",
            100.0 * worst_low,
            100.0 * off(1e-2),
            100.0 * off(1e-1)
        ),
    )
}

fn criterion_8() -> phonon_qng::Result<Outcome> {
    let prepared = |n: usize| {
        let cfg = PrepConfig { heating_rate: 2.7, p0_init: 0.97, ..PrepConfig::ideal(n, RabiConfig::reference()) };
        ladder_prepare(&cfg)
    };
    let (_, r8) = min_ratio(&prepared(8)?, 1e-6, 1.0)?;
    let (_, r10) = min_ratio(&prepared(10)?, 1e-6, 1.0)?;
    let beats5 = r8 < ideal_ratio(5);
    let fails8 = r10 >= ideal_ratio(8);
    outcome(
        beats5 && fails8,
        format!(
            "|8>: min R {r8:.4} < R_5 {:.4} is {beats5}; |10>: min R {r10:.4} >= R_8 {:.4} is {fails8}",
            ideal_ratio(5),
            ideal_ratio(8)
        ),
    )
}

fn criterion_9() -> phonon_qng::Result<Outcome> {
    let cfg = RabiConfig::reference();
    let mut worst: f64 = 0.0;
    let mut report = Vec::new();
    for target in [1usize, 2, 5, 10] {
        let truth = noisy_fock(target, 0.85)?;
        let n_max = target + 2;
        let times = sampling_plan(target, &cfg);
        let errors: Vec<Vec<f64>> = (0..100u64)
            .into_par_iter()
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let trace = synthetic_trace(&truth, &times, &cfg, &mut rng)?;
                let fit = fit_populations(&trace, &cfg, n_max)?;
                Ok((0..=n_max).map(|k| (fit.dist.get(k) - truth.get(k)).abs()).collect())
            })
            .collect::<phonon_qng::Result<_>>()?;
        let target_worst = (0..=n_max)
            .map(|k| {
                let mut col: Vec<f64> = errors.iter().map(|e| e[k]).collect();
                col.sort_by(|a, b| a.partial_cmp(b).unwrap());
                0.5 * (col[49] + col[50])
            })
            .fold(0.0, f64::max);
        report.push(format!("n={target}: {target_worst:.4}"));
        worst = worst.max(target_worst);
    }
    outcome(worst <= 0.02, format!("worst per-P_n median abs error {}", report.join(", ")))
}

fn criterion_10() -> phonon_qng::Result<Outcome> {
    let counts: Vec<usize> = (0..=12)
        .map(|n| {
            let d = PhononDistribution::fock(n);
            count_negative_annuli(&wigner_radial(&d, &default_radii(&d)))
        })
        .collect::<phonon_qng::Result<_>>()?;
    let mismatched: Vec<usize> = counts.iter().enumerate().filter(|(n, c)| *c != n).map(|(n, _)| n).collect();
    let mut parity_worst: f64 = 0.0;
    let mut states: Vec<PhononDistribution> = (0..=12).map(PhononDistribution::fock).collect();
    states.push(PhononDistribution::thermal(0.7)?);
    states.push(gaussian_additive(&PhononDistribution::fock(5), 0.1)?);
    states.push(noisy_fock(4, 0.8)?);
    for d in &states {
        let w0 = wigner_radial(d, &[0.0]).values[0];
        parity_worst = parity_worst.max((std::f64::consts::PI * w0 - d.parity()).abs());
    }
    outcome(
        mismatched.is_empty() && parity_worst < 1e-10,
        format!("counts for n=0..12: {counts:?}; differ from n at {mismatched:?}; parity error {parity_worst:.1e}"),
    )
}

fn run_qng(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_qng"))
        .args(args)
        .current_dir(dir)
        .env("QNG_CACHE_DIR", dir.join("cache"))
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_11() -> phonon_qng::Result<Outcome> {
    let runs: [&[&str]; 9] = [
        &["thresholds", "--n", "1..4", "--no-cache", "--out", "OUT"],
        &["certify", "--dist", "d.json", "--n", "2", "--no-cache", "--out", "OUT"],
        &["depth", "--state", "fock:3", "--criterion", "wigner-negativity", "--out", "OUT"],
        &["thermalize", "--dist", "d.json", "--nbar", "0:0.3:4", "--out", "OUT"],
        &["sense", "--dist", "d.json", "--grid", "1e-5:1:20", "--shots", "100", "--out", "OUT"],
        &["simulate", "--n-target", "3", "--heating-rate", "2.7/s", "--trace", "trace.csv", "--seed", "9", "--out", "OUT"],
        &["fit", "--trace", "trace.csv", "--n-max", "5", "--seed", "4", "--out", "OUT"],
        &["wigner", "--dist", "d.json", "--out", "OUT"],
        &["depth", "--dist", "d.json", "--n", "2", "--criterion", "basic", "--no-cache", "--out", "OUT"],
    ];
    let mut differing = Vec::new();
    let mut failed = Vec::new();
    let outputs: Vec<Vec<Vec<u8>>> = (0..2)
        .map(|_| -> phonon_qng::Result<Vec<Vec<u8>>> {
            let dir = tempfile::tempdir()?;
            std::fs::write(dir.path().join("d.json"), r#"{"probs": [0.05, 0.1, 0.8, 0.05]}"#)?;
            let mut files = Vec::new();
            for (i, args) in runs.iter().enumerate() {
                let out = format!("out{i}");
                let args: Vec<&str> = args.iter().map(|a| if *a == "OUT" { out.as_str() } else { a }).collect();
                if !run_qng(dir.path(), &args) {
                    failed.push(args[0].to_string());
                }
                files.push(std::fs::read(dir.path().join(&out)).unwrap_or_default());
                files.push(std::fs::read(dir.path().join(format!("{out}.manifest.json"))).unwrap_or_default());
            }
            files.push(std::fs::read(dir.path().join("trace.csv")).unwrap_or_default());
            Ok(files)
        })
        .collect::<phonon_qng::Result<_>>()?;
    for (i, (a, b)) in outputs[0].iter().zip(&outputs[1]).enumerate() {
        if a != b || a.is_empty() {
            differing.push(i);
        }
    }
    outcome(
        failed.is_empty() && differing.is_empty(),
        format!(
            "{} commands run twice, {} files compared; failed runs {failed:?}; differing files {differing:?}",
            runs.len(),
            outputs[0].len()
        ),
    )
}

fn main() {
    let criteria: [(usize, Check); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        let start = Instant::now();
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id).map(|(_, why)| *why);
        let secs = || start.elapsed().as_secs_f64();
        match check() {
            Ok(o) if o.pass => println!("criterion {id:>2}: PASS ({:.1}s) {}", secs(), o.detail),
            Ok(o) => {
                println!("criterion {id:>2}: FAIL ({:.1}s) {}", secs(), o.detail);
                match known {
                    Some(why) => println!("              known deviation: {why}"),
                    None => unexpected.push(id),
                }
            }
            Err(e) => {
                println!("criterion {id:>2}: FAIL ({:.1}s) error: {e}", secs());
                unexpected.push(id);
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance failures: {unexpected:?}");
        std::process::exit(1);
    }
}
