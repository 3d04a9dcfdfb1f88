//! Ready-made experiments for each figure of the study.
//!
//! All share `M = 64`, unit noise and, unless laid out otherwise,
//! `K = 32`, `K_B = 8`. Homogeneous presets use unit β, `δ = -20 dB` and
//! 2000 trials per point; heterogeneous presets use the path-loss model
//! defaults, β_low = β_K / 2, β_high = 2 β_1 and 200 drops × 50 trials.

use crate::params::{GroupingRule, LargeScaleModel, Strategy};
use crate::scheduling::DEFAULT_SUS_ALPHA;
use crate::{Error, Result};

use super::config::{ExperimentConfig, Scenario, Sweep, SweepParam};

pub const PRESETS: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

pub const DEFAULT_SEED: u64 = 42;
pub const HOMOGENEOUS_TRIALS: usize = 2000;
pub const HETEROGENEOUS_DROPS: usize = 200;
pub const HETEROGENEOUS_TRIALS: usize = 50;

fn range(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(f64::from).collect()
}

fn base(name: &str, scenario: Scenario) -> ExperimentConfig {
    let heterogeneous = scenario == Scenario::Heterogeneous;
    ExperimentConfig {
        name: Some(name.into()),
        m: 64,
        k: Some(32),
        k_b: Some(8),
        t: Some(4),
        power: None,
        power_db: Some(10.0),
        noise_var: 1.0,
        beta_default: 1.0,
        scenario,
        grouping_rule: vec![GroupingRule::ChannelMagnitude],
        strategy: vec![Strategy::HomogeneousUniform],
        k_m: 1,
        delta: None,
        delta_db: Some(-20.0),
        beta_low_ratio: 0.5,
        beta_high_ratio: 2.0,
        sus_alpha: DEFAULT_SUS_ALPHA,
        large_scale: LargeScaleModel::default(),
        sweep: None,
        trials: if heterogeneous {
            HETEROGENEOUS_TRIALS
        } else {
            HOMOGENEOUS_TRIALS
        },
        drops: if heterogeneous {
            HETEROGENEOUS_DROPS
        } else {
            1
        },
        seed: DEFAULT_SEED,
        layouts: None,
    }
}

/// Builds the named preset.
///
/// * `fig2`: homogeneous loss vs `P_dB` at `K_M = 1` under CM, SUS and random
///   grouping, with the closed-form loss and its upper bound.
/// * `fig3`: the same three rules vs `K_M ∈ 0..=32` at 10 dB.
/// * `fig4`: per-user losses for grouping-changing underreporting, `K_M = 4`,
///   under large-scale and magnitude grouping.
/// * `fig5`: the same strategy vs `K_M ∈ 0..=20`; users 24 and 32 are the
///   ones to plot.
/// * `fig6`: average honest loss vs `K_M ∈ 0..=16` for both underreporting
///   strategies under large-scale and random grouping.
/// * `fig7`: grouping-preserving underreporting vs `K_M ∈ 0..=15` over the
///   `(T, K_B)` layouts (4, 8), (8, 4), (2, 16) and (4, 4). The first three
///   keep `K = 32`, the last has `K = 16`.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    use GroupingRule::*;
    let cfg = match name {
        "fig2" => ExperimentConfig {
            grouping_rule: vec![ChannelMagnitude, Sus, Random],
            sweep: Some(Sweep {
                name: SweepParam::PowerDb,
                values: range(-10, 20, 5),
            }),
            ..base(name, Scenario::Homogeneous)
        },
        "fig3" => ExperimentConfig {
            grouping_rule: vec![ChannelMagnitude, Sus, Random],
            sweep: Some(Sweep {
                name: SweepParam::Misreporters,
                values: range(0, 32, 1),
            }),
            ..base(name, Scenario::Homogeneous)
        },
        "fig4" => ExperimentConfig {
            grouping_rule: vec![LargeScale, ChannelMagnitude],
            strategy: vec![Strategy::GroupingChangedUnder],
            k_m: 4,
            delta_db: None,
            ..base(name, Scenario::Heterogeneous)
        },
        "fig5" => ExperimentConfig {
            grouping_rule: vec![LargeScale, ChannelMagnitude],
            strategy: vec![Strategy::GroupingChangedUnder],
            delta_db: None,
            sweep: Some(Sweep {
                name: SweepParam::Misreporters,
                values: range(0, 20, 1),
            }),
            ..base(name, Scenario::Heterogeneous)
        },
        "fig6" => ExperimentConfig {
            grouping_rule: vec![LargeScale, Random],
            strategy: vec![
                Strategy::GroupingUnchangedUnder,
                Strategy::GroupingChangedUnder,
            ],
            delta_db: None,
            sweep: Some(Sweep {
                name: SweepParam::Misreporters,
                values: range(0, 16, 1),
            }),
            ..base(name, Scenario::Heterogeneous)
        },
        "fig7" => ExperimentConfig {
            grouping_rule: vec![LargeScale],
            strategy: vec![Strategy::GroupingUnchangedUnder],
            delta_db: None,
            k: None,
            k_b: None,
            t: None,
            layouts: Some(vec![[4, 8], [8, 4], [2, 16], [4, 4]]),
            sweep: Some(Sweep {
                name: SweepParam::Misreporters,
                values: range(0, 15, 1),
            }),
            ..base(name, Scenario::Heterogeneous)
        },
        other => return Err(Error::UnknownPreset(other.into())),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESETS {
            preset(name).unwrap();
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("fig9"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn fig2_operating_point() {
        let cfg = preset("fig2").unwrap();
        let cell = &cfg.cells(Some(10.0)).unwrap()[0];
        let p = cell.params;
        assert_eq!((p.m, p.k, p.k_b, p.t), (64, 32, 8, 4));
        assert!((cell.delta - 0.01).abs() < 1e-15);
        assert_eq!(cell.k_m, 1);
        assert_eq!(cfg.trials, HOMOGENEOUS_TRIALS);
    }

    #[test]
    fn fig3_sweeps_every_misreporter_count() {
        let s = preset("fig3").unwrap().sweep.unwrap();
        assert_eq!(s.name, SweepParam::Misreporters);
        assert_eq!(s.values, (0..=32).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn fig4_uses_reference_drop_model() {
        let cfg = preset("fig4").unwrap();
        let m = cfg.large_scale;
        assert_eq!(
            (
                m.cell_radius,
                m.path_loss_exp,
                m.ref_distance,
                m.shadow_sigma_db
            ),
            (500.0, 3.8, 200.0, 8.0)
        );
        assert_eq!(
            (cfg.drops, cfg.trials),
            (HETEROGENEOUS_DROPS, HETEROGENEOUS_TRIALS)
        );
    }

    #[test]
    fn fig7_layouts() {
        let cells = preset("fig7").unwrap().cells(Some(3.0)).unwrap();
        let ks: Vec<usize> = cells.iter().map(|c| c.params.k).collect();
        assert_eq!(ks, vec![32, 32, 32, 16]);
    }
}
