//! Zero-forcing precoding, max-min power control and per-block rates.
//!
//! Effective gains come from the Gram matrix `G Gᴴ` of the block: with the
//! pseudoinverse precoder `W = Gᴴ (G Gᴴ)⁻¹`, column `k` of `W` has squared
//! norm `[(G Gᴴ)⁻¹]_kk`, so `d_k² = 1 / [(G Gᴴ)⁻¹]_kk`. The Gram matrix is
//! equilibrated to unit diagonal before the Cholesky solve, which makes the
//! conditioning guard insensitive to per-user power differences.

use crate::channel::PerceivedState;
use crate::params::{ChannelSet, SystemParams};
use crate::{CMatrix, Error, Result, C64};

/// Blocks whose equilibrated Gram matrix is worse conditioned than this are
/// rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e10;

struct GramInverse {
    /// `[(G Gᴴ)⁻¹]` restricted to the diagonal.
    inv_diag: Vec<f64>,
    /// Full inverse, only when requested.
    inverse: Option<CMatrix>,
}

fn gram_inverse(sub: &CMatrix, full: bool) -> Result<GramInverse> {
    let n = sub.nrows();
    if n == 0 {
        return Err(Error::Dimension("empty block".into()));
    }
    if sub.ncols() < n {
        return Err(Error::SingularMatrix(format!(
            "{} users cannot be zero-forced with {} antennas",
            n,
            sub.ncols()
        )));
    }
    let gram = sub * sub.adjoint();
    let diag: Vec<f64> = (0..n).map(|i| gram[(i, i)].re).collect();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::SingularMatrix(format!(
            "row {i} has zero or non-finite norm"
        )));
    }
    let s: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut corr = gram;
    for i in 0..n {
        for j in 0..n {
            corr[(i, j)] *= s[i] * s[j];
        }
        corr[(i, i)] = C64::new(1.0, 0.0);
    }
    let norm1 = |m: &CMatrix| -> f64 {
        (0..m.ncols())
            .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let corr_norm = norm1(&corr);
    let chol = corr
        .cholesky()
        .ok_or_else(|| Error::SingularMatrix("Gram matrix is not positive definite".into()))?;
    let inv = chol.inverse();
    let cond = corr_norm * norm1(&inv);
    if !cond.is_finite() || cond > MAX_GRAM_CONDITION {
        return Err(Error::SingularMatrix(format!(
            "Gram condition number {cond:e} exceeds {MAX_GRAM_CONDITION:e}"
        )));
    }
    let inv_diag = (0..n).map(|i| inv[(i, i)].re * s[i] * s[i]).collect();
    let inverse = full.then(|| {
        let mut g = inv;
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] *= s[i] * s[j];
            }
        }
        g
    });
    Ok(GramInverse { inv_diag, inverse })
}

/// Effective channel gains `d_k²` of a block (rows = users).
pub fn zf_effective_gains(sub: &CMatrix) -> Result<Vec<f64>> {
    Ok(gram_inverse(sub, false)?
        .inv_diag
        .into_iter()
        .map(|x| 1.0 / x)
        .collect())
}

/// Pseudoinverse precoder `W` (antennas × users) together with the gains.
pub fn zf_precoder(sub: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let gi = gram_inverse(sub, true)?;
    let inv = gi.inverse.expect("requested full inverse");
    let w = sub.adjoint() * inv;
    Ok((w, gi.inv_diag.into_iter().map(|x| 1.0 / x).collect()))
}

/// Gain of user `k` from its projection onto the orthogonal complement of
/// the other rows, built by modified Gram–Schmidt with reorthogonalisation.
///
/// Independent of the Gram solve and used to cross-check it.
pub fn nullspace_gain_oracle(sub: &CMatrix, k: usize) -> Result<f64> {
    let n = sub.nrows();
    if k >= n {
        return Err(Error::Dimension(format!("row {k} out of {n}")));
    }
    let row = |i: usize| -> Vec<C64> { sub.row(i).iter().copied().collect() };
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let norm2 = |a: &[C64]| -> f64 { a.iter().map(|z| z.norm_sqr()).sum() };
    let project_out = |v: &mut Vec<C64>, basis: &[Vec<C64>]| {
        for _ in 0..2 {
            for q in basis {
                let c = dot(q, v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
    };
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n.saturating_sub(1));
    for i in (0..n).filter(|&i| i != k) {
        let mut v = row(i);
        let before = norm2(&v);
        project_out(&mut v, &basis);
        let after = norm2(&v);
        if !(after > before / MAX_GRAM_CONDITION) {
            return Err(Error::SingularMatrix(format!(
                "row {i} is (nearly) dependent"
            )));
        }
        let s = 1.0 / after.sqrt();
        v.iter_mut().for_each(|x| *x *= s);
        basis.push(v);
    }
    let mut g = row(k);
    let before = norm2(&g);
    project_out(&mut g, &basis);
    let after = norm2(&g);
    if !(after > before / MAX_GRAM_CONDITION) {
        return Err(Error::SingularMatrix(format!(
            "row {k} lies in the span of the others"
        )));
    }
    Ok(after)
}

/// Max-min power split: every user ends up at the same SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub power: Vec<f64>,
    pub snr: f64,
}

pub fn maxmin_power(eff_gain: &[f64], power: f64, noise_var: f64) -> PowerAllocation {
    let inv_sum: f64 = eff_gain.iter().map(|g| 1.0 / g).sum();
    PowerAllocation {
        power: eff_gain.iter().map(|g| power / (g * inv_sum)).collect(),
        snr: power / (noise_var * inv_sum),
    }
}

/// Shannon rate in bits/s/Hz.
pub fn rate(snr: f64) -> f64 {
    (1.0 + snr).log2()
}

/// One resource block as served by the BS.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    pub member_ids: Vec<usize>,
    /// Gains the BS computes from the reported channels.
    pub eff_gain_bs: Vec<f64>,
    /// Gains of the true channels.
    pub eff_gain_true: Vec<f64>,
    pub power: Vec<f64>,
    /// Common SNR the BS believes every member gets.
    pub snr_bs: f64,
    pub snr_actual: Vec<f64>,
    pub rate_actual: Vec<f64>,
}

/// Precodes and power-controls `members` from the perceived state, then
/// scores what each member actually receives.
///
/// A member that scaled its report by `δ` actually sees `snr_bs / δ`: the
/// BS-side gain is `δ d²` while the power was allocated against it.
pub fn evaluate_block(
    ch: &ChannelSet,
    ps: &PerceivedState,
    members: &[usize],
    p: &SystemParams,
) -> Result<BlockOutcome> {
    if members.len() != p.k_b {
        return Err(Error::Dimension(format!(
            "block has {} members, expected K_B = {}",
            members.len(),
            p.k_b
        )));
    }
    if ps.users() != ch.users() {
        return Err(Error::Dimension(
            "perceived state and channels disagree on K".into(),
        ));
    }
    if let Some(&u) = members.iter().find(|&&u| u >= ch.users()) {
        return Err(Error::Dimension(format!("member {u} out of range")));
    }
    let sub_f = ps.false_gains.select_rows(members.iter());
    let eff_gain_bs = zf_effective_gains(&sub_f)?;
    let honest_block = members.iter().all(|&u| ps.scale[u] == 1.0);
    let eff_gain_true = if honest_block {
        eff_gain_bs.clone()
    } else {
        zf_effective_gains(&ch.gains.select_rows(members.iter()))?
    };
    let alloc = maxmin_power(&eff_gain_bs, p.power, p.noise_var);
    let snr_actual: Vec<f64> = members.iter().map(|&u| alloc.snr / ps.scale[u]).collect();
    let rate_actual = snr_actual.iter().map(|&s| rate(s)).collect();
    Ok(BlockOutcome {
        member_ids: members.to_vec(),
        eff_gain_bs,
        eff_gain_true,
        power: alloc.power,
        snr_bs: alloc.snr,
        snr_actual,
        rate_actual,
    })
}
