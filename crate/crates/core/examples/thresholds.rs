//! Genuine n-phonon and basic non-Gaussianity thresholds.
//!
//!     cargo run --release --example thresholds -- 8

use phonon_qng::criteria::{threshold_basic, threshold_genuine, threshold_oracle};

fn main() -> phonon_qng::Result<()> {
    let n_max: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);

    println!("{:>3} {:>12} {:>12} {:>10} {:>8}", "n", "genuine", "basic", "residual", "alpha");
    for n in 1..=n_max {
        let g = threshold_genuine(n)?;
        let b = threshold_basic(n)?;
        println!(
            "{n:>3} {:>12.8} {:>12.8} {:>10.1e} {:>8.4}",
            g.p_bar, b.p_bar, g.residual_norm, g.argmax.alpha.re
        );
    }

    // independent check of the staged solver for a small n
    let report = threshold_oracle(3, 50)?;
    let staged = threshold_genuine(3)?;
    println!(
        "\nn=3 multistart: {:.10} (staged {:.10}, top-decile spread {:.1e})",
        report.record.p_bar,
        staged.p_bar,
        report.record.dispersion.unwrap_or(0.0)
    );

    let best = threshold_genuine(4)?;
    println!("n=4 optimal core: {:?}", best.argmax.core);
    Ok(())
}
