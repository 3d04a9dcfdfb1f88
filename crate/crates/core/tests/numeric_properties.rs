mod common;

use proptest::prelude::*;

use misreport_sim::channel::{apply_misreport, draw_channels, RngStream};
use misreport_sim::zf::evaluate_block;
use misreport_sim::{MisreportProfile, SystemParams};

#[test]
fn zero_forcing_diagonalises_the_block() {
    let err = common::zf_diagonal_error(300);
    assert!(err <= 1e-8, "{err:e}");
}

#[test]
fn maxmin_equalises_snr_and_spends_all_power() {
    let (snr, power) = common::maxmin_errors(300);
    assert!(snr <= 1e-9, "{snr:e}");
    assert!(power <= 1e-9, "{power:e}");
}

#[test]
fn gram_route_matches_nullspace_oracle() {
    let err = common::oracle_disagreement(1000);
    assert!(err <= 1e-8, "{err:e}");
}

#[test]
fn order_statistic_densities_normalise() {
    let err = common::orderstat_normalisation_error();
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn single_draw_inverse_moment() {
    let err = common::inverse_moment_error();
    assert!(err <= 1e-10, "{err:e}");
}

#[test]
fn grouping_preserving_reports_keep_the_plan() {
    assert_eq!(common::grouping_unchanged_violations(100), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Misreporting changes what the BS believes, never the true gains, and
    /// every block spends exactly the power budget.
    #[test]
    fn true_gains_ignore_reports(
        seed in any::<u64>(),
        m_idx in 0usize..3,
        kb_idx in 0usize..3,
        deltas in proptest::collection::vec(1e-3f64..1.0, 8),
        power in 0.1f64..1e3,
    ) {
        let m = common::ANTENNAS[m_idx];
        let k_b = common::BLOCK_SIZES[kb_idx].min(m - 1);
        let p = SystemParams::new(m, k_b, k_b, power).unwrap();
        let ch = draw_channels(&p, &vec![1.0; k_b], &RngStream::new(seed, 1)).unwrap();
        let members: Vec<usize> = (0..k_b).collect();
        let honest = apply_misreport(&ch, &MisreportProfile::honest(&vec![1.0; k_b])).unwrap();
        let mut mp = MisreportProfile::honest(&vec![1.0; k_b]);
        mp.scale.copy_from_slice(&deltas[..k_b]);
        let lying = apply_misreport(&ch, &mp).unwrap();
        let a = evaluate_block(&ch, &honest, &members, &p).unwrap();
        let b = evaluate_block(&ch, &lying, &members, &p).unwrap();
        for (x, y) in a.eff_gain_true.iter().zip(&b.eff_gain_true) {
            prop_assert!(((x - y) / x).abs() < 1e-12);
        }
        for out in [&a, &b] {
            let spent: f64 = out.power.iter().sum();
            prop_assert!((spent / power - 1.0).abs() < 1e-9);
            // Received SNR from first principles: power times true gain.
            for k in 0..k_b {
                let direct = out.power[k] * out.eff_gain_true[k] / p.noise_var;
                prop_assert!((out.snr_actual[k] / direct - 1.0).abs() < 1e-8);
            }
        }
    }
}
