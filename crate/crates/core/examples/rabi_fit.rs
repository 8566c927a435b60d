//! Phonon populations from a blue-sideband Rabi trace: synthesize a noisy trace,
//! fit it by nonnegative least squares, and estimate uncertainties.

use phonon_qng::rabi::{fit_populations, mc_uncertainty, sampling_plan, synthetic_trace, RabiConfig, RabiTrace};
use phonon_qng::sensing::noisy_fock;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> phonon_qng::Result<()> {
    let cfg = RabiConfig::reference();
    let truth = noisy_fock(2, 0.85)?;
    let times = sampling_plan(2, &cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trace = synthetic_trace(&truth, &times, &cfg, &mut rng)?;
    println!("{} points over {:.0} us", trace.times.len(), times.last().unwrap() * 1e6);

    // the CSV form used by `qng fit`
    let csv = trace.to_csv();
    let trace = RabiTrace::from_csv(&csv)?;

    let fit = fit_populations(&trace, &cfg, 4)?;
    let unc = mc_uncertainty(&trace, &cfg, 4, 200, 1)?;
    println!(" n   true    fit     std");
    for n in 0..=4 {
        println!(" {n}  {:.4}  {:.4}  {:.4}", truth.get(n), fit.dist.get(n), unc.std[n]);
    }
    println!("residual {:.4}", fit.residual);
    Ok(())
}
