//! Doppler cooling/heating rate equations and their short-time expansion.

use phonon_qng::thermal::{doppler_evolve, doppler_taylor, DopplerRates};
use phonon_qng::PhononDistribution;

fn main() -> phonon_qng::Result<()> {
    let rates = DopplerRates::new(1.0e4, 0.4e4)?;
    let nbe = rates.steady_state_mean().expect("A > B");
    println!("steady state nbar = {nbe:.4}");

    let start = PhononDistribution::fock(3);
    for t in [1e-5, 1e-4, 1e-3, 1e-2] {
        let d = doppler_evolve(&start, rates, t)?;
        println!("t = {t:.0e}s  <n> = {:.4}  (mean equation {:.4})  P_3 = {:.4}", d.mean(), rates.mean_at(3.0, t), d.get(3));
    }

    let t = 2e-6;
    let series = doppler_taylor(3, rates, 6)?;
    let ode = doppler_evolve(&start, rates, t)?;
    println!("\nt = {t:e}s  n   ODE          Taylor");
    for n in 1..=5 {
        println!("            {n}   {:.9}  {:.9}", ode.get(n), series.eval(n, t));
    }
    Ok(())
}
