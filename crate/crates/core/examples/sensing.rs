//! Displacement sensing with Fock-like probes: Fisher information, the
//! metrological ratio against the vacuum, and advantage thresholds.

use phonon_qng::sensing::{
    advantage_table, approx_sigma, ideal_ratio, log_grid, min_ratio, noisy_fock, sigma, SensingReport,
};
use phonon_qng::thermal::gaussian_additive;
use phonon_qng::PhononDistribution;

fn main() -> phonon_qng::Result<()> {
    let shots = 1000;
    let grid = log_grid(1e-5, 1.0, 6);
    let report = SensingReport::compute(&PhononDistribution::fock(3), &grid, shots)?;
    print!("{}", report.to_csv());
    println!("ideal |3> ratio 1/sqrt(7) = {:.6}\n", ideal_ratio(3));

    // approximate error formula against the exact one, for a slightly heated |2>
    let d = gaussian_additive(&PhononDistribution::fock(2), 0.05)?;
    let p_e = d.get(1) + d.get(3);
    for u in [1e-4, 1e-3, 1e-2] {
        let exact = sigma(&d, u, shots)?.powi(2);
        let approx = approx_sigma(2, d.get(2), p_e, u, shots)?.powi(2);
        println!("u = {u:.0e}: approx/exact sigma^2 = {:.3}", approx / exact);
    }

    let noisy = noisy_fock(5, 0.9)?;
    let (u, r) = min_ratio(&noisy, 1e-6, 1.0)?;
    println!("\nnoisy |5> (P_5 = 0.9): best ratio {r:.4} at u = {u:.3e}");

    println!("\nP_n needed to beat the vacuum:");
    for (n, p) in advantage_table(&[1, 2, 3, 5, 8, 10])? {
        println!("  n = {n:>2}: {p:.4}");
    }
    Ok(())
}
