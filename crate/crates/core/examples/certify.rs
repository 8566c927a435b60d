//! Certify phonon distributions against both criteria.

use phonon_qng::criteria::{certify, ThresholdTable};
use phonon_qng::sensing::noisy_fock;
use phonon_qng::thermal::gaussian_additive;
use phonon_qng::PhononDistribution;

fn main() -> phonon_qng::Result<()> {
    let table = ThresholdTable::new();
    table.fill(1..=5)?;

    println!("P_n   n  genuine  basic   margin");
    for n in 1..=5 {
        for p in [0.95, 0.7, 0.5, 0.3] {
            let d = noisy_fock(n, p)?;
            let c = certify(&d, n, &table)?;
            println!("{p:.2}  {n}  {:<7}  {:<6}  {:+.4}", c.genuine, c.basic, c.margin_genuine);
        }
    }

    // a measured-looking state read from JSON
    let text = r#"{"probs": [0.02, 0.05, 0.86, 0.05, 0.02], "meta": {"label": "approx |2>"}}"#;
    let d = PhononDistribution::from_json(text)?;
    println!("\n{}", serde_json::to_string_pretty(&certify(&d, 2, &table)?).unwrap());

    let heated = gaussian_additive(&PhononDistribution::fock(3), 0.1)?;
    let c = certify(&heated, 3, &table)?;
    println!("|3> after nbar=0.1: P_3 = {:.4}, genuine = {}", c.p_n, c.genuine);
    Ok(())
}
