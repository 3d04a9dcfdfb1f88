//! Round-robin user grouping.
//!
//! Every rule works from the BS-perceived state only; true channels never
//! reach the scheduler.

use rand::seq::SliceRandom;

use crate::channel::{PerceivedState, RngStream};
use crate::params::{GroupingRule, SchedulePlan, SystemParams};
use crate::{Result, C64};

/// Default semi-orthogonality threshold for [`group_by_sus`].
pub const DEFAULT_SUS_ALPHA: f64 = 0.3;

/// Indices sorted by descending value, ties by index.
fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

fn chunk_ranked(values: &[f64], p: &SystemParams, rule: GroupingRule) -> Result<SchedulePlan> {
    let p = p.validate()?;
    let ranked = rank_descending(values);
    let plan = SchedulePlan {
        groups: ranked.chunks(p.k_b).map(<[usize]>::to_vec).collect(),
        rule,
    };
    plan.validate(&p)?;
    Ok(plan)
}

/// Strongest `K_B` reported magnitudes form block 1, the next `K_B` block 2, …
pub fn group_by_magnitude(ps: &PerceivedState, p: &SystemParams) -> Result<SchedulePlan> {
    chunk_ranked(&ps.reported_magnitudes, p, GroupingRule::ChannelMagnitude)
}

/// Same construction on reported large-scale coefficients.
pub fn group_by_large_scale(reported_beta: &[f64], p: &SystemParams) -> Result<SchedulePlan> {
    chunk_ranked(reported_beta, p, GroupingRule::LargeScale)
}

/// Uniformly random partition; members listed in index order.
pub fn group_randomly(p: &SystemParams, stream: &RngStream) -> Result<SchedulePlan> {
    let p = p.validate()?;
    let mut users: Vec<usize> = (0..p.k).collect();
    users.shuffle(&mut stream.rng());
    let plan = SchedulePlan {
        groups: users
            .chunks(p.k_b)
            .map(|c| {
                let mut g = c.to_vec();
                g.sort_unstable();
                g
            })
            .collect(),
        rule: GroupingRule::Random,
    };
    plan.validate(&p)?;
    Ok(plan)
}

/// Greedy semi-orthogonal user selection, one group at a time.
///
/// Each group is seeded with the strongest remaining user. Further members
/// maximise the energy orthogonal to the span of those already chosen, among
/// candidates whose normalised projection onto that span is below `alpha`.
/// When no candidate qualifies `alpha` is doubled.
pub fn group_by_sus(ps: &PerceivedState, p: &SystemParams, alpha: f64) -> Result<SchedulePlan> {
    let p = p.validate()?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(crate::Error::Domain(format!(
            "SUS alpha {alpha} outside (0, 1]"
        )));
    }
    let f = &ps.false_gains;
    let m = f.ncols();
    let rows: Vec<Vec<C64>> = (0..p.k)
        .map(|k| f.row(k).iter().copied().collect())
        .collect();
    let energy: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
        .collect();

    let mut remaining: Vec<bool> = vec![true; p.k];
    let mut groups = Vec::with_capacity(p.t);
    for _ in 0..p.t {
        let mut group: Vec<usize> = Vec::with_capacity(p.k_b);
        // Residual of every candidate after projecting out the basis.
        let mut residual: Vec<Vec<C64>> = rows.clone();
        let mut residual_energy = energy.clone();
        let mut threshold = alpha;
        while group.len() < p.k_b {
            let candidates = (0..p.k).filter(|&k| remaining[k]);
            let pick = if group.is_empty() {
                candidates.max_by(|&a, &b| energy[a].total_cmp(&energy[b]).then(b.cmp(&a)))
            } else {
                candidates
                    .filter(|&k| {
                        let proj = (energy[k] - residual_energy[k]).max(0.0);
                        energy[k] > 0.0 && (proj / energy[k]).sqrt() < threshold
                    })
                    .max_by(|&a, &b| {
                        residual_energy[a]
                            .total_cmp(&residual_energy[b])
                            .then(b.cmp(&a))
                    })
            };
            let Some(k) = pick else {
                threshold *= 2.0;
                continue;
            };
            remaining[k] = false;
            group.push(k);
            if residual_energy[k] > 0.0 {
                let s = 1.0 / residual_energy[k].sqrt();
                let q: Vec<C64> = residual[k].iter().map(|z| z * s).collect();
                for j in (0..p.k).filter(|&j| remaining[j]) {
                    let c: C64 = q.iter().zip(&residual[j]).map(|(a, b)| a.conj() * b).sum();
                    for i in 0..m {
                        residual[j][i] -= c * q[i];
                    }
                    residual_energy[j] = residual[j].iter().map(|z| z.norm_sqr()).sum();
                }
            }
        }
        group.sort_by(|&a, &b| {
            ps.reported_magnitudes[b]
                .total_cmp(&ps.reported_magnitudes[a])
                .then(a.cmp(&b))
        });
        groups.push(group);
    }
    let plan = SchedulePlan {
        groups,
        rule: GroupingRule::Sus,
    };
    plan.validate(&p)?;
    Ok(plan)
}

/// Dispatches on `rule`. `stream` feeds the random rule and `sus_alpha` the
/// SUS rule; the others ignore them.
pub fn build_plan(
    rule: GroupingRule,
    ps: &PerceivedState,
    p: &SystemParams,
    stream: &RngStream,
    sus_alpha: f64,
) -> Result<SchedulePlan> {
    match rule {
        GroupingRule::ChannelMagnitude => group_by_magnitude(ps, p),
        GroupingRule::LargeScale => group_by_large_scale(&ps.reported_beta, p),
        GroupingRule::Random => group_randomly(p, stream),
        GroupingRule::Sus => group_by_sus(ps, p, sus_alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_misreport, draw_channels};
    use crate::params::MisreportProfile;
    use crate::CMatrix;

    fn state_with_magnitudes(mags: &[f64]) -> PerceivedState {
        let k = mags.len();
        let mut g = CMatrix::zeros(k, k);
        for (i, &x) in mags.iter().enumerate() {
            g[(i, i)] = C64::new(x.sqrt(), 0.0);
        }
        PerceivedState {
            reported_magnitudes: mags.to_vec(),
            reported_beta: mags.to_vec(),
            false_gains: g,
            scale: vec![1.0; k],
        }
    }

    #[test]
    fn magnitude_grouping_sorts() {
        let p = SystemParams::new(4, 4, 2, 1.0).unwrap();
        let plan = group_by_magnitude(&state_with_magnitudes(&[5.0, 2.0, 9.0, 1.0]), &p).unwrap();
        assert_eq!(plan.groups, vec![vec![2, 0], vec![1, 3]]);
    }

    #[test]
    fn magnitude_grouping_is_scale_invariant() {
        let p = SystemParams::new(6, 6, 2, 1.0).unwrap();
        let m = [3.0, 7.5, 1.25, 9.0, 4.0, 0.5];
        let doubled: Vec<f64> = m.iter().map(|x| 2.0 * x).collect();
        assert_eq!(
            group_by_magnitude(&state_with_magnitudes(&m), &p).unwrap(),
            group_by_magnitude(&state_with_magnitudes(&doubled), &p).unwrap()
        );
    }

    #[test]
    fn honest_large_scale_layout() {
        let p = SystemParams::new(16, 9, 3, 1.0).unwrap();
        let betas: Vec<f64> = (0..9).map(|i| 1.0 / (i + 1) as f64).collect();
        let plan = group_by_large_scale(&betas, &p).unwrap();
        assert_eq!(
            plan.groups,
            vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]
        );
    }

    #[test]
    fn deep_underreport_moves_user_down() {
        let p = SystemParams::new(16, 9, 3, 1.0).unwrap();
        let mut betas: Vec<f64> = (0..9).map(|i| 1.0 / (i + 1) as f64).collect();
        betas[0] = 0.5 * betas[8];
        let plan = group_by_large_scale(&betas, &p).unwrap();
        assert_eq!(
            plan.grouping(),
            vec![vec![1, 2, 3], vec![4, 5, 6], vec![0, 7, 8]]
        );
    }

    #[test]
    fn strong_overreport_moves_user_up() {
        let p = SystemParams::new(16, 9, 3, 1.0).unwrap();
        let mut betas: Vec<f64> = (0..9).map(|i| 1.0 / (i + 1) as f64).collect();
        betas[8] = 2.0 * betas[0];
        let plan = group_by_large_scale(&betas, &p).unwrap();
        assert_eq!(
            plan.grouping(),
            vec![vec![0, 1, 8], vec![2, 3, 4], vec![5, 6, 7]]
        );
    }

    #[test]
    fn random_single_group() {
        let p = SystemParams::new(8, 5, 5, 1.0).unwrap();
        let plan = group_randomly(&p, &RngStream::new(3, 9)).unwrap();
        assert_eq!(plan.groups, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn random_is_deterministic_per_stream() {
        let p = SystemParams::new(64, 32, 8, 1.0).unwrap();
        let s = RngStream::new(1, 2);
        assert_eq!(
            group_randomly(&p, &s).unwrap(),
            group_randomly(&p, &s).unwrap()
        );
    }

    #[test]
    fn sus_on_orthogonal_channels_matches_magnitude() {
        let p = SystemParams::new(6, 6, 3, 1.0).unwrap();
        let ps = state_with_magnitudes(&[3.0, 7.5, 1.25, 9.0, 4.0, 0.5]);
        assert_eq!(
            group_by_sus(&ps, &p, DEFAULT_SUS_ALPHA).unwrap(),
            SchedulePlan {
                rule: GroupingRule::Sus,
                ..group_by_magnitude(&ps, &p).unwrap()
            }
        );
    }

    #[test]
    fn sus_single_user_groups_pick_strongest_first() {
        let p = SystemParams::new(16, 4, 1, 1.0).unwrap();
        let ch = draw_channels(&p, &[1.0; 4], &RngStream::new(4, 4)).unwrap();
        let ps = apply_misreport(&ch, &MisreportProfile::honest(&[1.0; 4])).unwrap();
        let plan = group_by_sus(&ps, &p, DEFAULT_SUS_ALPHA).unwrap();
        let strongest = rank_descending(&ps.reported_magnitudes)[0];
        assert_eq!(plan.groups[0], vec![strongest]);
    }

    #[test]
    fn sus_produces_a_partition_on_random_channels() {
        let p = SystemParams::new(64, 32, 8, 1.0).unwrap();
        for i in 0..20 {
            let ch = draw_channels(&p, &[1.0; 32], &RngStream::new(8, i)).unwrap();
            let ps = apply_misreport(&ch, &MisreportProfile::honest(&[1.0; 32])).unwrap();
            group_by_sus(&ps, &p, DEFAULT_SUS_ALPHA)
                .unwrap()
                .validate(&p)
                .unwrap();
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn magnitude_grouping_survives_monotone_transforms(
                mags in proptest::collection::vec(0.01f64..100.0, 12)
            ) {
                let p = SystemParams::new(12, 12, 3, 1.0).unwrap();
                let a = group_by_magnitude(&state_with_magnitudes(&mags), &p).unwrap();
                let t: Vec<f64> = mags.iter().map(|x| x.ln() * 3.0 + 7.0).collect();
                let mut ps = state_with_magnitudes(&mags);
                ps.reported_magnitudes = t;
                let b = group_by_magnitude(&ps, &p).unwrap();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn random_plans_partition(seed in any::<u64>(), t in 1usize..6, k_b in 1usize..6) {
                let p = SystemParams::new(8, t * k_b, k_b, 1.0).unwrap();
                group_randomly(&p, &RngStream::new(seed, 0)).unwrap().validate(&p).unwrap();
            }
        }
    }
}
