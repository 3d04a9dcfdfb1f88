//! Closed-form and semi-analytic large-array expressions.
//!
//! All rates are in bits/s/Hz and all `snr` arguments are the linear
//! transmit SNR `P / σ²`. Every expression is a large-`M` approximation and
//! refuses inputs outside its validity (`M <= K` or `M <= K_B`) instead of
//! extrapolating.

pub mod order_stats;
pub mod quadrature;

pub use order_stats::{inverse_moment_integral, orderstat_pdf, OrderStatSpec};

use crate::params::SystemParams;
use crate::{Error, Result};

fn require_more_antennas(m: usize, k: usize) -> Result<()> {
    if m > k {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "needs M > {k} antennas, got M = {m}"
        )))
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} must be positive")))
    }
}

/// Per-user rate with `K` honest users sharing one block.
pub fn rate_accurate_single_block(m: usize, k: usize, snr: f64, beta: f64) -> Result<f64> {
    require_more_antennas(m, k)?;
    require_positive("snr", snr)?;
    require_positive("beta", beta)?;
    Ok((1.0 + snr * beta * (m - k) as f64 / k as f64).log2())
}

/// Honest users' rate in a block where `k_m` of the `k` users scale their
/// reported power by `delta`.
pub fn rate_misreport_single_block(
    m: usize,
    k: usize,
    k_m: usize,
    delta: f64,
    snr: f64,
    beta: f64,
) -> Result<f64> {
    require_more_antennas(m, k)?;
    if k_m > k {
        return Err(Error::Count { k_m, k });
    }
    require_positive("delta", delta)?;
    require_positive("snr", snr)?;
    require_positive("beta", beta)?;
    let denom = (k - k_m) as f64 + k_m as f64 / delta;
    Ok((1.0 + snr * beta * (m - k) as f64 / denom).log2())
}

/// Fractional honest rate loss when everyone shares one block.
pub fn loss_single_block(
    m: usize,
    k: usize,
    k_m: usize,
    delta: f64,
    snr: f64,
    beta: f64,
) -> Result<f64> {
    let honest = rate_misreport_single_block(m, k, k_m, delta, snr, beta)?;
    let accurate = rate_accurate_single_block(m, k, snr, beta)?;
    Ok(1.0 - honest / accurate)
}

/// High- and low-SNR limits of [`loss_single_block`], valid when
/// `k_m / delta` dominates `k - k_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossLimits {
    pub high_snr: f64,
    pub low_snr: f64,
}

pub fn loss_limits(m: usize, k: usize, k_m: usize, delta: f64, snr: f64, beta: f64) -> LossLimits {
    let (m, k, k_m) = (m as f64, k as f64, k_m as f64);
    LossLimits {
        high_snr: (k_m / (delta * k)).log2() / (snr * beta * (m - k) / k).log2(),
        low_snr: 1.0 - delta * k / k_m,
    }
}

/// Components of the round-robin channel-magnitude loss with `k_m`
/// underreporters (all pushed into the last block).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LastBlockTerms {
    /// Per-user rate of any block under random grouping.
    pub rate_random: f64,
    /// Last-block rate, honest reporting.
    pub rate_last_honest: f64,
    /// Last-block rate seen by honest users when `k_m` misreport.
    pub rate_last_misreport: f64,
    /// `Σ E[1/X]` over the last block, honest reporting.
    pub inv_moment_honest: f64,
    /// `Σ E[1/X]` over the last block as the BS perceives it under misreporting.
    pub inv_moment_misreport: f64,
}

fn check_rr_regime(p: &SystemParams, k_m: usize, delta: f64, beta: f64) -> Result<SystemParams> {
    let p = p.validate()?;
    require_more_antennas(p.m, p.k_b)?;
    if k_m > p.k_b {
        return Err(Error::Regime(format!(
            "closed form covers K_M <= K_B = {}, got K_M = {k_m}",
            p.k_b
        )));
    }
    if k_m >= p.k {
        return Err(Error::Regime("no honest users left".into()));
    }
    require_positive("delta", delta)?;
    require_positive("beta", beta)?;
    Ok(p)
}

fn smallest_ranks_inverse_moment(m: usize, beta: f64, n: usize, ranks: usize) -> Result<f64> {
    (1..=ranks)
        .map(|rank| {
            inverse_moment_integral(&OrderStatSpec {
                shape: m,
                scale: beta,
                sample_size: n,
                rank,
            })
        })
        .sum()
}

pub fn last_block_terms(
    p: &SystemParams,
    k_m: usize,
    delta: f64,
    beta: f64,
) -> Result<LastBlockTerms> {
    let p = check_rr_regime(p, k_m, delta, beta)?;
    let snr = p.snr();
    let (m, k_b) = (p.m as f64, p.k_b as f64);
    let rate_random = (1.0 + snr * beta * (m - k_b) / k_b).log2();
    let inv_moment_honest = smallest_ranks_inverse_moment(p.m, beta, p.k, p.k_b)?;
    let inv_moment_misreport = k_m as f64 / (delta * beta * (m - 1.0))
        + smallest_ranks_inverse_moment(p.m, beta, p.k - k_m, p.k_b - k_m)?;
    let last = |a: f64| (1.0 + snr * (m - k_b) / ((m - 1.0) * a)).log2();
    Ok(LastBlockTerms {
        rate_random,
        rate_last_honest: last(inv_moment_honest),
        rate_last_misreport: last(inv_moment_misreport),
        inv_moment_honest,
        inv_moment_misreport,
    })
}

/// Time-averaged honest loss under round-robin magnitude grouping.
pub fn loss_rr_cm(p: &SystemParams, k_m: usize, delta: f64, beta: f64) -> Result<f64> {
    let terms = last_block_terms(p, k_m, delta, beta)?;
    let p = p.validate()?;
    let (k, k_b, t, k_m) = (p.k as f64, p.k_b as f64, p.t as f64, k_m as f64);
    Ok(
        -k_m * (t - 1.0) / (t * (k - k_m)) + terms.rate_last_honest / (t * terms.rate_random)
            - (k_b - k_m) * terms.rate_last_misreport / ((k - k_m) * terms.rate_random),
    )
}

/// Upper bound on [`loss_rr_cm`]; equals the random-grouping loss at `k_m = 1`.
pub fn loss_upper_bound(p: &SystemParams, k_m: usize, delta: f64, beta: f64) -> Result<f64> {
    let p = check_rr_regime(p, k_m, delta, beta)?;
    let share = (p.k_b - k_m) as f64 / (p.k - k_m) as f64;
    Ok(share * loss_single_block(p.m, p.k_b, k_m, delta, p.snr(), beta)?)
}

/// Per-user rate of a heterogeneous block with large-scale coefficients `betas`.
pub fn rate_heterogeneous_block(m: usize, snr: f64, betas: &[f64]) -> Result<f64> {
    let k_b = betas.len();
    if k_b == 0 {
        return Err(Error::Dimension("empty block".into()));
    }
    require_more_antennas(m, k_b)?;
    require_positive("snr", snr)?;
    for &b in betas {
        require_positive("beta", b)?;
    }
    let inv_sum: f64 = betas.iter().map(|b| 1.0 / b).sum();
    Ok((1.0 + snr * (m - k_b) as f64 / inv_sum).log2())
}
