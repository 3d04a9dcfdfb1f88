//! Attack planners. Each returns a [`MisreportProfile`] and never looks at
//! small-scale channels.
//!
//! For the large-scale strategies the power scale is derived as
//! `δ_k = reported β_k / true β_k`, so magnitude-based scheduling and the
//! SNR accounting in [`crate::zf`] see the same misreport.

use crate::params::{MisreportProfile, Strategy, SystemParams};
use crate::{Error, Result};

fn check_count(k_m: usize, k: usize) -> Result<()> {
    if k_m > k {
        Err(Error::Count { k_m, k })
    } else {
        Ok(())
    }
}

fn check_betas(betas: &[f64]) -> Result<()> {
    if betas.is_empty() {
        return Err(Error::Dimension("empty beta vector".into()));
    }
    if let Some((k, b)) = betas
        .iter()
        .enumerate()
        .find(|(_, b)| !(**b > 0.0 && b.is_finite()))
    {
        return Err(Error::Domain(format!("beta[{k}] = {b} must be positive")));
    }
    if betas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain(
            "betas must be sorted in descending order".into(),
        ));
    }
    Ok(())
}

fn from_reports(betas: &[f64], reported: Vec<f64>, strategy: Strategy) -> MisreportProfile {
    let scale = reported.iter().zip(betas).map(|(r, b)| r / b).collect();
    MisreportProfile {
        scale,
        reported_beta: reported,
        strategy,
    }
}

/// Users `0..k_m` scale their reported magnitude by `delta`.
pub fn homogeneous_uniform(p: &SystemParams, k_m: usize, delta: f64) -> Result<MisreportProfile> {
    let p = p.validate()?;
    check_count(k_m, p.k)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Scale {
            user: 0,
            scale: delta,
        });
    }
    let mut scale = vec![1.0; p.k];
    scale[..k_m].fill(delta);
    let reported_beta = scale.iter().map(|s| s * p.beta_default).collect();
    Ok(MisreportProfile {
        scale,
        reported_beta,
        strategy: Strategy::HomogeneousUniform,
    })
}

/// The `k_m` strongest users report `beta_low`, below everybody.
pub fn grouping_changed_under(
    betas: &[f64],
    k_m: usize,
    beta_low: f64,
) -> Result<MisreportProfile> {
    check_betas(betas)?;
    check_count(k_m, betas.len())?;
    let weakest = betas[betas.len() - 1];
    if !(beta_low > 0.0 && beta_low < weakest) {
        return Err(Error::Range(format!(
            "beta_low = {beta_low} must lie in (0, weakest beta = {weakest})"
        )));
    }
    let mut reported = betas.to_vec();
    reported[..k_m].fill(beta_low);
    Ok(from_reports(
        betas,
        reported,
        Strategy::GroupingChangedUnder,
    ))
}

/// The `k_m` weakest users report `beta_high`, above everybody.
pub fn grouping_changed_over(
    betas: &[f64],
    k_m: usize,
    beta_high: f64,
) -> Result<MisreportProfile> {
    check_betas(betas)?;
    check_count(k_m, betas.len())?;
    if !(beta_high > betas[0]) || !beta_high.is_finite() {
        return Err(Error::Range(format!(
            "beta_high = {beta_high} must exceed the strongest beta = {}",
            betas[0]
        )));
    }
    let mut reported = betas.to_vec();
    let k = betas.len();
    reported[k - k_m..].fill(beta_high);
    Ok(from_reports(betas, reported, Strategy::GroupingChangedOver))
}

/// Underreporting that leaves the large-scale grouping untouched.
///
/// Misreporters are added one at a time, cycling through blocks
/// `1, 2, …, T, 1, 2, …`; the `m`-th lands in block `t = ((m-1) mod T) + 1`
/// at index `(t-1) K_B + ceil(m / T)`, i.e. it is the strongest user of that
/// block not yet recruited. After each addition the reports are re-chained:
///
/// * misreporters of block `t < T` report the true β of the most recently
///   added misreporter of block `t+1`, or the midpoint between the last user
///   of block `t` and the first of block `t+1` if block `t+1` has none;
/// * misreporters of the last block report `beta_low`;
/// * misreporters of block `t-1` are re-pointed at the newcomer's true β.
///
/// Every report then sits strictly between block `t`'s honest members and
/// block `t+1`'s reports, so the partition is unchanged.
pub fn grouping_unchanged_under(
    betas: &[f64],
    p: &SystemParams,
    k_m: usize,
    beta_low: f64,
) -> Result<MisreportProfile> {
    let p = p.validate()?;
    check_betas(betas)?;
    if betas.len() != p.k {
        return Err(Error::Dimension(format!(
            "{} betas for K = {}",
            betas.len(),
            p.k
        )));
    }
    check_count(k_m, p.k)?;
    let weakest = betas[p.k - 1];
    if !(beta_low > 0.0 && beta_low < weakest) {
        return Err(Error::Range(format!(
            "beta_low = {beta_low} must lie in (0, weakest beta = {weakest})"
        )));
    }
    let (t_count, k_b) = (p.t, p.k_b);
    let mut reported = betas.to_vec();
    // Misreporter indices per block (0-based blocks), in order of addition.
    let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); t_count];
    for m in 1..=k_m {
        let t = (m - 1) % t_count; // 0-based block
        let i = t * k_b + m.div_ceil(t_count) - 1;
        chosen[t].push(i);
        if t + 1 < t_count {
            let level = match chosen[t + 1].last() {
                Some(&j) => betas[j],
                None => 0.5 * (betas[(t + 1) * k_b - 1] + betas[(t + 1) * k_b]),
            };
            if chosen[t + 1].is_empty() {
                reported[i] = level;
            } else {
                chosen[t].iter().for_each(|&u| reported[u] = level);
            }
        } else {
            chosen[t].iter().for_each(|&u| reported[u] = beta_low);
        }
        if t > 0 {
            chosen[t - 1].iter().for_each(|&u| reported[u] = betas[i]);
        }
    }
    Ok(from_reports(
        betas,
        reported,
        Strategy::GroupingUnchangedUnder,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::group_by_large_scale;

    fn nine_users() -> (Vec<f64>, SystemParams) {
        let betas = (0..9).map(|i| 1.0 / (i + 1) as f64).collect();
        (betas, SystemParams::new(16, 9, 3, 10.0).unwrap())
    }

    #[test]
    fn homogeneous_profiles() {
        let p = SystemParams::new(64, 32, 8, 10.0).unwrap();
        let none = homogeneous_uniform(&p, 0, 0.01).unwrap();
        assert!(none.scale.iter().all(|&s| s == 1.0));
        let one = homogeneous_uniform(&p, 1, 0.01).unwrap();
        assert_eq!(one.misreporters(), vec![0]);
        assert_eq!(one.scale[0], 0.01);
        let unit = homogeneous_uniform(&p, 5, 1.0).unwrap();
        assert_eq!(unit.misreporter_count(), 0);
        assert_eq!(unit.strategy, Strategy::HomogeneousUniform);
        assert!(matches!(
            homogeneous_uniform(&p, 33, 0.01),
            Err(Error::Count { .. })
        ));
    }

    #[test]
    fn changed_under_layout() {
        let (betas, p) = nine_users();
        let mp = grouping_changed_under(&betas, 1, 0.5 * betas[8]).unwrap();
        let plan = group_by_large_scale(&mp.reported_beta, &p).unwrap();
        assert_eq!(
            plan.grouping(),
            vec![vec![1, 2, 3], vec![4, 5, 6], vec![0, 7, 8]]
        );
        assert!(matches!(
            grouping_changed_under(&betas, 1, betas[8]),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn changed_under_full_block_leaves_honest_grouping() {
        let (betas, p) = nine_users();
        let mp = grouping_changed_under(&betas, 3, 0.5 * betas[8]).unwrap();
        let plan = group_by_large_scale(&mp.reported_beta, &p).unwrap();
        assert_eq!(
            plan.grouping(),
            vec![vec![3, 4, 5], vec![6, 7, 8], vec![0, 1, 2]]
        );
    }

    #[test]
    fn changed_over_layout() {
        let (betas, p) = nine_users();
        let mp = grouping_changed_over(&betas, 1, 2.0 * betas[0]).unwrap();
        let plan = group_by_large_scale(&mp.reported_beta, &p).unwrap();
        assert_eq!(
            plan.grouping(),
            vec![vec![0, 1, 8], vec![2, 3, 4], vec![5, 6, 7]]
        );
        assert!(matches!(
            grouping_changed_over(&betas, 1, betas[0]),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn under_and_complementary_over_group_honest_users_alike() {
        let (betas, p) = nine_users();
        for k_m in 1..3 {
            let under = grouping_changed_under(&betas, k_m, 0.5 * betas[8]).unwrap();
            let over = grouping_changed_over(&betas, 3 - k_m, 2.0 * betas[0]).unwrap();
            let plan_u = group_by_large_scale(&under.reported_beta, &p).unwrap();
            let plan_o = group_by_large_scale(&over.reported_beta, &p).unwrap();
            // Honest users that neither strategy touches share blocks identically.
            let block_u = plan_u.block_of();
            let block_o = plan_o.block_of();
            for u in (0..9).filter(|&u| !under.is_misreporter(u) && !over.is_misreporter(u)) {
                for v in (0..9).filter(|&v| !under.is_misreporter(v) && !over.is_misreporter(v)) {
                    assert_eq!(block_u[u] == block_u[v], block_o[u] == block_o[v]);
                }
            }
        }
    }

    #[test]
    fn unchanged_under_reference_chain() {
        let (betas, p) = nine_users();
        let beta_low = 0.5 * betas[8];
        let mp = grouping_unchanged_under(&betas, &p, 3, beta_low).unwrap();
        assert_eq!(mp.misreporters(), vec![0, 3, 6]);
        assert_eq!(mp.reported_beta[0], betas[3]);
        assert_eq!(mp.reported_beta[3], betas[6]);
        assert_eq!(mp.reported_beta[6], beta_low);
        let honest = group_by_large_scale(&betas, &p).unwrap();
        let attacked = group_by_large_scale(&mp.reported_beta, &p).unwrap();
        assert!(honest.same_grouping(&attacked));
    }

    #[test]
    fn unchanged_under_single_misreporter_takes_midpoint() {
        let (betas, p) = nine_users();
        let mp = grouping_unchanged_under(&betas, &p, 1, 0.5 * betas[8]).unwrap();
        assert_eq!(mp.misreporters(), vec![0]);
        assert_eq!(mp.reported_beta[0], 0.5 * (betas[2] + betas[3]));
    }

    #[test]
    fn unchanged_under_second_round_fills_block_one() {
        let (betas, p) = nine_users();
        let mp = grouping_unchanged_under(&betas, &p, 4, 0.5 * betas[8]).unwrap();
        assert_eq!(mp.misreporters(), vec![0, 1, 3, 6]);
        assert_eq!(mp.reported_beta[0], betas[3]);
        assert_eq!(mp.reported_beta[1], betas[3]);
    }

    #[test]
    fn unchanged_under_rejects_bad_floor() {
        let (betas, p) = nine_users();
        assert!(matches!(
            grouping_unchanged_under(&betas, &p, 2, betas[8] * 1.5),
            Err(Error::Range(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use proptest::strategy::Strategy;

        fn sorted_betas(k: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(1e-4f64..10.0, k).prop_map(|mut v| {
                v.sort_by(|a, b| b.total_cmp(a));
                v
            })
        }

        proptest! {
            #[test]
            fn unchanged_under_preserves_grouping(
                betas in sorted_betas(12), layout in 0usize..4, k_m in 1usize..=12
            ) {
                prop_assume!(betas.windows(2).all(|w| w[0] > w[1]));
                let (t, k_b) = [(1, 12), (2, 6), (3, 4), (4, 3)][layout];
                let p = SystemParams { m: 16, k: 12, k_b, t, power: 1.0, noise_var: 1.0, beta_default: 1.0 };
                let mp = grouping_unchanged_under(&betas, &p, k_m, 0.5 * betas[11]).unwrap();
                prop_assert_eq!(mp.misreporter_count(), k_m);
                for k in mp.misreporters() {
                    prop_assert!(mp.reported_beta[k] > 0.0 && mp.reported_beta[k] < betas[k]);
                }
                let honest = group_by_large_scale(&betas, &p).unwrap();
                let attacked = group_by_large_scale(&mp.reported_beta, &p).unwrap();
                prop_assert!(honest.same_grouping(&attacked));
            }

            #[test]
            fn changed_under_keeps_misreporters_last(betas in sorted_betas(12), k_m in 1usize..=3) {
                prop_assume!(betas.windows(2).all(|w| w[0] > w[1]));
                let p = SystemParams { m: 16, k: 12, k_b: 3, t: 4, power: 1.0, noise_var: 1.0, beta_default: 1.0 };
                let mp = grouping_changed_under(&betas, k_m, 0.5 * betas[11]).unwrap();
                let plan = group_by_large_scale(&mp.reported_beta, &p).unwrap();
                let blocks = plan.block_of();
                for k in mp.misreporters() {
                    prop_assert_eq!(blocks[k], 3);
                    prop_assert!(mp.reported_beta[k] < betas[k]);
                }
            }

            #[test]
            fn changed_over_reports_exceed_truth(betas in sorted_betas(12), k_m in 1usize..=12) {
                let mp = grouping_changed_over(&betas, k_m, 2.0 * betas[0]).unwrap();
                for k in mp.misreporters() {
                    prop_assert!(mp.reported_beta[k] > betas[k]);
                }
                prop_assert!(mp.reported_beta.iter().all(|&b| b > 0.0));
            }
        }
    }
}
