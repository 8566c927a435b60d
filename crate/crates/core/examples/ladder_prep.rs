//! Fock states from a π-pulse ladder with motional heating, followed by
//! certification and the sensing ratio of the result.

use phonon_qng::criteria::{certify, ThresholdTable};
use phonon_qng::prep::{ladder_prepare, sequence_duration, PrepConfig};
use phonon_qng::rabi::RabiConfig;
use phonon_qng::sensing::{ideal_ratio, min_ratio};

fn main() -> phonon_qng::Result<()> {
    let table = ThresholdTable::new();
    println!(" n   T_us     P_n      P_n-1     P_n+1    genuine  R_min   R_ideal");
    for n in [1, 2, 3, 5, 8, 10] {
        let cfg = PrepConfig { heating_rate: 2.7, p0_init: 0.97, ..PrepConfig::ideal(n, RabiConfig::reference()) };
        let d = ladder_prepare(&cfg)?;
        let c = certify(&d, n, &table)?;
        let (_, r) = min_ratio(&d, 1e-6, 1.0)?;
        println!(
            "{n:>2} {:>7.1}  {:.5}  {:.2e}  {:.2e}  {:<7}  {r:.4}  {:.4}",
            sequence_duration(&cfg) * 1e6,
            d.get(n),
            d.get(n - 1),
            d.get(n + 1),
            c.genuine,
            ideal_ratio(n)
        );
    }

    // a much hotter trap
    let cfg = PrepConfig { heating_rate: 300.0, pulse_efficiency: 0.98, ..PrepConfig::ideal(5, RabiConfig::reference()) };
    let d = ladder_prepare(&cfg)?;
    println!("\n300 ph/s, 98% pulses: P_5 = {:.4}, genuine = {}", d.get(5), certify(&d, 5, &table)?.genuine);
    Ok(())
}
