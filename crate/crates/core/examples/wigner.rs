//! Radial Wigner functions of Fock-diagonal states and their negative regions.

use phonon_qng::thermal::gaussian_additive;
use phonon_qng::wigner::{count_negative_annuli, default_radii, negative_peaks, wigner_radial};
use phonon_qng::PhononDistribution;

fn main() -> phonon_qng::Result<()> {
    for n in 0..=6 {
        let d = PhononDistribution::fock(n);
        let w = wigner_radial(&d, &default_radii(&d));
        println!(
            "|{n}>  W(0) = {:+.5}  negative regions {}  norm {:.8}",
            w.values[0],
            count_negative_annuli(&w)?,
            w.normalization()
        );
    }

    let fock = PhononDistribution::fock(4);
    println!("\n|4> negative peaks under heating:");
    for nbar in [0.0, 0.05, 0.1, 0.2] {
        let d = gaussian_additive(&fock, nbar)?;
        let peaks = negative_peaks(&wigner_radial(&d, &default_radii(&d)))?;
        let text: Vec<String> = peaks.iter().map(|(s, v)| format!("{v:.4}@{s:.3}")).collect();
        println!("  nbar {nbar:<5} {}", text.join("  "));
    }
    Ok(())
}
