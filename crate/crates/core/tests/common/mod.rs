//! Numerical property checks shared by the property tests and the
//! acceptance gate. Each returns the worst observed error.
#![allow(dead_code)]

use misreport_sim::analytic::order_stats::orderstat_expectation;
use misreport_sim::analytic::{inverse_moment_integral, OrderStatSpec};
use misreport_sim::channel::{draw_channels, draw_large_scale, RngStream};
use misreport_sim::misreport::grouping_unchanged_under;
use misreport_sim::scheduling::group_by_large_scale;
use misreport_sim::zf::{maxmin_power, nullspace_gain_oracle, zf_effective_gains, zf_precoder};
use misreport_sim::{CMatrix, LargeScaleModel, SystemParams, C64};

pub const ANTENNAS: [usize; 3] = [8, 16, 64];
pub const BLOCK_SIZES: [usize; 3] = [2, 4, 8];

/// Random `rows × cols` block with unit-variance entries, scaled per row by
/// a spread of large-scale values so the Gram matrix is not equilibrated.
pub fn random_block(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let p = SystemParams::new(cols, rows, rows, 1.0).unwrap();
    let betas: Vec<f64> = (0..rows).map(|i| 10f64.powi(-(i as i32) % 4)).collect();
    draw_channels(&p, &betas, &RngStream::new(seed, 0xB10C))
        .unwrap()
        .gains
}

/// `instances` random blocks cycling through every (M, K_B) pair.
pub fn block_instances(instances: usize) -> impl Iterator<Item = CMatrix> {
    (0..instances).map(|i| {
        let m = ANTENNAS[i % 3];
        let k_b = BLOCK_SIZES[(i / 3) % 3];
        random_block(k_b, m, i as u64)
    })
}

/// Largest entry of `|G W D - diag(d)|`, relative to the largest `d`.
pub fn zf_diagonal_error(instances: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for g in block_instances(instances) {
        let (w, d2) = zf_precoder(&g).unwrap();
        let n = d2.len();
        let gw = &g * &w;
        let dmax = d2.iter().fold(0.0f64, |a, &b| a.max(b.sqrt()));
        for i in 0..n {
            for j in 0..n {
                let got = gw[(i, j)] * d2[j].sqrt();
                let want = if i == j {
                    C64::new(d2[i].sqrt(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((got - want).norm() / dmax);
            }
        }
    }
    worst
}

/// Worst relative spread of `P_k d_k² / σ²` within a block, and worst
/// relative error of `Σ P_k` against `P`.
pub fn maxmin_errors(instances: usize) -> (f64, f64) {
    let (mut snr_err, mut power_err): (f64, f64) = (0.0, 0.0);
    for (i, g) in block_instances(instances).enumerate() {
        let gains = zf_effective_gains(&g).unwrap();
        let total = 0.5 + i as f64;
        let alloc = maxmin_power(&gains, total, 1.0);
        for (p, d2) in alloc.power.iter().zip(&gains) {
            snr_err = snr_err.max(((p * d2) / alloc.snr - 1.0).abs());
        }
        power_err = power_err.max((alloc.power.iter().sum::<f64>() / total - 1.0).abs());
    }
    (snr_err, power_err)
}

/// Worst relative disagreement between the Gram-inverse gains and the
/// Gram–Schmidt null-space gains.
pub fn oracle_disagreement(instances: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for g in block_instances(instances) {
        let gains = zf_effective_gains(&g).unwrap();
        for (k, &d2) in gains.iter().enumerate() {
            let oracle = nullspace_gain_oracle(&g, k).unwrap();
            worst = worst.max(((d2 - oracle) / oracle).abs());
        }
    }
    worst
}

/// Worst `|∫ f_(k) - 1|` over a spread of sample sizes and ranks at `M = 64`.
pub fn orderstat_normalisation_error() -> f64 {
    let mut worst: f64 = 0.0;
    for (n, k) in [(1, 1), (8, 1), (8, 8), (31, 7), (32, 1), (32, 16), (32, 32)] {
        let spec = OrderStatSpec {
            shape: 64,
            scale: 1.0,
            sample_size: n,
            rank: k,
        };
        worst = worst.max((orderstat_expectation(&spec, |_| 1.0).unwrap() - 1.0).abs());
    }
    worst
}

/// Relative error of `E[1/X]` for a single draw against `1 / ((M-1) β)`.
pub fn inverse_moment_error() -> f64 {
    let mut worst: f64 = 0.0;
    for (m, beta) in [(64, 1.0), (32, 0.25), (128, 3.0)] {
        let got = inverse_moment_integral(&OrderStatSpec {
            shape: m,
            scale: beta,
            sample_size: 1,
            rank: 1,
        })
        .unwrap();
        let want = 1.0 / ((m as f64 - 1.0) * beta);
        worst = worst.max(((got - want) / want).abs());
    }
    worst
}

/// Number of (β draw, K_M) cases in which grouping-preserving
/// underreporting changed the large-scale grouping.
pub fn grouping_unchanged_violations(draws: u64) -> usize {
    let p = SystemParams::new(64, 32, 8, 10.0).unwrap();
    let model = LargeScaleModel::default();
    let mut bad = 0;
    for d in 0..draws {
        let betas = draw_large_scale(&p, &model, &RngStream::new(2024, d)).unwrap();
        let honest = group_by_large_scale(&betas, &p).unwrap();
        for k_m in 1..=p.k {
            let mp = grouping_unchanged_under(&betas, &p, k_m, betas[p.k - 1] / 2.0).unwrap();
            let plan = group_by_large_scale(&mp.reported_beta, &p).unwrap();
            if !plan.same_grouping(&honest) {
                bad += 1;
            }
        }
    }
    bad
}
