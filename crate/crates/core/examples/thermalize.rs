//! Recoil heating of a Fock state: calibrated pulse lengths, the exact
//! additive channel, and its first-order expansion.

use phonon_qng::thermal::{
    channel_sweep, gaussian_additive, lindblad_first_order, neighbour_trajectory, pulse_to_nbar, sweep_csv,
};
use phonon_qng::PhononDistribution;

fn main() -> phonon_qng::Result<()> {
    // vacuum calibration: 12.8 us of Doppler light
    let nbar = pulse_to_nbar(12.8e-6)?;
    let vac = gaussian_additive(&PhononDistribution::vacuum(), nbar)?;
    println!("tau = 12.8 us -> nbar = {nbar:.3}, <n> of heated vacuum = {:.4}", vac.mean());

    let fock = PhononDistribution::fock(2);
    let taus = [0.0, 0.1e-6, 0.2e-6, 0.5e-6, 1e-6, 2e-6];
    let nbars: Vec<f64> = taus.iter().map(|&t| pulse_to_nbar(t)).collect::<Result<_, _>>()?;
    let sweep = channel_sweep(&fock, &nbars)?;

    println!("\n  tau_us    P_2   P_1+P_3");
    for (tau, (p, nb)) in taus.iter().zip(neighbour_trajectory(2, &sweep)) {
        println!("{:>8.2} {p:>6.4} {nb:>9.4}", tau * 1e6);
    }

    let eps = 0.01;
    let exact = gaussian_additive(&fock, eps)?;
    let approx = lindblad_first_order(&fock, eps)?;
    println!("\nfirst order vs exact at nbar={eps}: max |dP| = {:.2e}", exact.max_abs_diff(&approx));

    // plot data
    let csv = sweep_csv(&nbars, &sweep);
    println!("\n{}", csv.lines().take(3).map(|l| &l[..l.len().min(70)]).collect::<Vec<_>>().join("\n"));
    Ok(())
}
