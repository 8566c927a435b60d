use num_complex::Complex64;
use proptest::prelude::*;

use phonon_qng::criteria::{certify, threshold_genuine, Criterion, ThresholdTable};
use phonon_qng::fock::{core_overlap, core_overlap_closed_form, default_dim, displaced_fock_prob};
use phonon_qng::prep::{ladder_prepare, PrepConfig};
use phonon_qng::rabi::RabiConfig;
use phonon_qng::sensing::{displaced_diag_dist, fisher, default_fisher_trunc};
use phonon_qng::thermal::{gaussian_additive, lindblad_first_order};
use phonon_qng::wigner::wigner_radial;
use phonon_qng::{GaussianParams, PhononDistribution};

fn distribution(max_len: usize) -> impl Strategy<Value = PhononDistribution> {
    prop::collection::vec(0.0f64..1.0, 1..max_len).prop_filter_map("all-zero weights", |w| {
        PhononDistribution::from_weights(w).ok()
    })
}

fn unit_core(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n).prop_filter_map("zero core", |c| {
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| c.iter().map(|x| x / norm).collect())
    })
}

fn thresholds() -> &'static ThresholdTable {
    static TABLE: std::sync::OnceLock<ThresholdTable> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let t = ThresholdTable::new();
        t.fill(1..=4).unwrap();
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn displaced_fock_rows_are_normalized(m in 0usize..12, u in 0.0f64..5.0) {
        let total: f64 = (0..m + 120).map(|n| displaced_fock_prob(n, m, u)).sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn displaced_fock_is_symmetric(n in 0usize..20, m in 0usize..20, u in 0.0f64..5.0) {
        let a = displaced_fock_prob(n, m, u);
        let b = displaced_fock_prob(m, n, u);
        prop_assert!((a - b).abs() < 1e-13 * a.max(1e-300).max(1.0));
    }

    #[test]
    fn no_gaussian_sample_beats_the_threshold(
        n in 1usize..5,
        alpha in -3.0f64..3.0,
        r in -1.0f64..1.0,
        seed_core in unit_core(4),
    ) {
        let mut core: Vec<f64> = seed_core[..n].to_vec();
        let norm = core.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        core.iter_mut().for_each(|c| *c /= norm);
        let params = GaussianParams::real(alpha, r, &core).unwrap();
        let p_bar = thresholds().p_bar(n, Criterion::Genuine).unwrap();
        prop_assert!(core_overlap_closed_form(n, &params) <= p_bar + 1e-9);
    }

    #[test]
    fn complex_parameters_do_not_beat_the_real_optimum(
        n in 1usize..4,
        a in (0.0f64..2.5, 0.0f64..std::f64::consts::TAU),
        r in (0.0f64..0.8, 0.0f64..std::f64::consts::TAU),
        core in unit_core(3),
    ) {
        let params = GaussianParams::new(
            Complex64::from_polar(a.0, a.1),
            Complex64::from_polar(r.0, r.1),
            core[..n].iter().map(|c| c / core[..n].iter().map(|x| x * x).sum::<f64>().sqrt()).collect(),
        );
        prop_assume!(params.is_ok());
        let value = core_overlap(n, &params.unwrap(), default_dim(n) + 40);
        prop_assume!(value.is_ok());
        let p_bar = thresholds().p_bar(n, Criterion::Genuine).unwrap();
        prop_assert!(value.unwrap() <= p_bar + 1e-9);
    }

    #[test]
    fn additive_channel_is_a_valid_map(d in distribution(8), nbar in 0.0f64..2.0) {
        let out = gaussian_additive(&d, nbar).unwrap();
        let total: f64 = out.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
        prop_assert!(out.probs().iter().all(|&p| (0.0..=1.0).contains(&p)));
        prop_assert!((out.mean() - d.mean() - nbar).abs() < 1e-6 * (1.0 + d.mean() + nbar));
    }

    #[test]
    fn additive_channel_composes(d in distribution(5), a in 0.0f64..0.5, b in 0.0f64..0.5) {
        let two = gaussian_additive(&gaussian_additive(&d, a).unwrap(), b).unwrap();
        let one = gaussian_additive(&d, a + b).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-8);
    }

    #[test]
    fn first_order_channel_stays_valid(d in distribution(8), eps in 0.0f64..0.2) {
        let out = lindblad_first_order(&d, eps).unwrap();
        let total: f64 = out.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
        prop_assert!(out.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn raising_p_n_never_revokes_certification(n in 1usize..5, d in distribution(6), t in 0.0f64..1.0) {
        prop_assume!(d.truncation() >= n);
        // mixing towards |n⟩ raises P_n
        let fock = PhononDistribution::fock(n);
        let mixed: Vec<f64> = (0..=d.truncation()).map(|k| (1.0 - t) * d.get(k) + t * fock.get(k)).collect();
        let mixed = PhononDistribution::from_weights(mixed).unwrap();
        let before = certify(&d, n, thresholds()).unwrap();
        let after = certify(&mixed, n, thresholds()).unwrap();
        prop_assert!(after.p_n >= before.p_n - 1e-15);
        prop_assert!(!before.genuine || after.genuine);
        prop_assert!(!before.basic || after.basic);
    }

    #[test]
    fn fisher_matches_finite_differences(d in distribution(5), u in 0.01f64..1.0) {
        let h = 1e-6 * u;
        let plus = displaced_diag_dist(&d, u + h).unwrap();
        let minus = displaced_diag_dist(&d, u - h).unwrap();
        let mid = displaced_diag_dist(&d, u).unwrap();
        let len = plus.probs().len().max(minus.probs().len());
        let fd: f64 = (0..len)
            .filter(|&k| mid.get(k) > 1e-12)
            .map(|k| ((plus.get(k) - minus.get(k)) / (2.0 * h)).powi(2) / mid.get(k))
            .sum();
        let exact = fisher(&d, u, default_fisher_trunc(&d, u)).unwrap();
        prop_assert!((fd - exact).abs() < 1e-4 * exact, "fd {} exact {}", fd, exact);
    }

    #[test]
    fn wigner_origin_is_parity(d in distribution(12)) {
        let w = wigner_radial(&d, &[0.0]);
        prop_assert!((std::f64::consts::PI * w.values[0] - d.parity()).abs() < 1e-12);
    }

    #[test]
    fn distribution_json_roundtrip(d in distribution(20)) {
        let back = PhononDistribution::from_json(&d.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn heating_never_helps_the_ladder(n in 1usize..7, rate in 0.0f64..500.0, extra in 0.0f64..500.0) {
        let base = PrepConfig { heating_rate: rate, ..PrepConfig::ideal(n, RabiConfig::reference()) };
        let hotter = PrepConfig { heating_rate: rate + extra, ..base.clone() };
        let a = ladder_prepare(&base).unwrap().get(n);
        let b = ladder_prepare(&hotter).unwrap().get(n);
        prop_assert!(b <= a + 1e-12);
    }
}

#[test]
fn staged_thresholds_are_monotone_in_n() {
    let mut last = 0.0;
    for n in 1..=8 {
        let p = threshold_genuine(n).unwrap().p_bar;
        assert!(p > last, "n={n}");
        last = p;
    }
}
