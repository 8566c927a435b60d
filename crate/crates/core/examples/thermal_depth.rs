//! Thermal depth of the genuine and basic criteria, and of Wigner negativity,
//! for ideal Fock states.

use phonon_qng::criteria::{Criterion, ThresholdTable};
use phonon_qng::thermal::thermal_depth;
use phonon_qng::wigner::{negativity_depth, DEFAULT_RETAIN};
use phonon_qng::PhononDistribution;

fn main() -> phonon_qng::Result<()> {
    let table = ThresholdTable::new();
    table.fill(1..=10)?;

    println!("{:>3} {:>10} {:>10} {:>8} {:>10}", "n", "genuine", "basic", "ratio", "wigner");
    for n in 1..=10 {
        let fock = PhononDistribution::fock(n);
        let g = thermal_depth(&fock, n, Criterion::Genuine, &table)?.depth_nbar;
        let b = thermal_depth(&fock, n, Criterion::Basic, &table)?.depth_nbar;
        let w = if n <= 6 {
            format!("{:.5}", negativity_depth(n, DEFAULT_RETAIN)?.depth_nbar)
        } else {
            "-".into()
        };
        println!("{n:>3} {g:>10.5} {b:>10.5} {:>8.2} {w:>10}", b / g);
    }
    Ok(())
}
