//! Channel generation and the misreporting transform.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::params::{ChannelSet, LargeScaleModel, MisreportProfile, SystemParams};
use crate::{CMatrix, Error, Result, C64};

/// A reproducible random substream.
///
/// The same `(seed, stream_id)` always yields the same draws; ChaCha's
/// 64-bit stream selector keeps different ids independent, so trial `i`
/// can be regenerated without replaying trials `0..i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draws `K` rows of i.i.d. CN(0, β_k) entries.
pub fn draw_channels(p: &SystemParams, betas: &[f64], stream: &RngStream) -> Result<ChannelSet> {
    let p = p.validate()?;
    if betas.len() != p.k {
        return Err(Error::Dimension(format!(
            "{} betas for K = {} users",
            betas.len(),
            p.k
        )));
    }
    if let Some((k, b)) = betas
        .iter()
        .enumerate()
        .find(|(_, b)| !(**b > 0.0 && b.is_finite()))
    {
        return Err(Error::Domain(format!("beta[{k}] = {b} must be positive")));
    }
    let mut rng = stream.rng();
    let mut gains = CMatrix::zeros(p.k, p.m);
    for (k, &beta) in betas.iter().enumerate() {
        let sd = (beta / 2.0).sqrt();
        for m in 0..p.m {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            gains[(k, m)] = C64::new(sd * re, sd * im);
        }
    }
    ChannelSet::new(gains, betas.to_vec())
}

/// Draws one user drop and returns the large-scale coefficients sorted in
/// descending order (users are relabelled by strength).
pub fn draw_large_scale(
    p: &SystemParams,
    model: &LargeScaleModel,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    let p = p.validate()?;
    let model = model.validate()?;
    let mut rng = stream.rng();
    let shadow = Normal::new(0.0, model.shadow_sigma_db)
        .map_err(|e| Error::Domain(format!("shadowing distribution: {e}")))?;
    let betas: Vec<f64> = (0..p.k)
        .map(|_| {
            let d = rng.random::<f64>() * model.cell_radius;
            let w = shadow.sample(&mut rng);
            model.coefficient(d, w)
        })
        .collect();
    Ok(sort_descending(&betas))
}

/// Sorts descending; equal values keep their original relative order.
pub(crate) fn sort_descending(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.into_iter().map(|i| values[i]).collect()
}

/// The channel state as the base station sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedState {
    /// Reported magnitudes `δ_k ‖g_k‖²`.
    pub reported_magnitudes: Vec<f64>,
    pub reported_beta: Vec<f64>,
    /// Row `k` is `√δ_k g_k`.
    pub false_gains: CMatrix,
    pub scale: Vec<f64>,
}

impl PerceivedState {
    pub fn users(&self) -> usize {
        self.false_gains.nrows()
    }
}

pub fn apply_misreport(ch: &ChannelSet, mp: &MisreportProfile) -> Result<PerceivedState> {
    mp.validate()?;
    if mp.users() != ch.users() {
        return Err(Error::Dimension(format!(
            "profile covers {} users, channel set has {}",
            mp.users(),
            ch.users()
        )));
    }
    let mut false_gains = ch.gains.clone();
    for (k, &delta) in mp.scale.iter().enumerate() {
        if delta != 1.0 {
            let s = delta.sqrt();
            false_gains.row_mut(k).iter_mut().for_each(|z| *z *= s);
        }
    }
    let reported_magnitudes = ch
        .magnitudes()
        .into_iter()
        .zip(&mp.scale)
        .map(|(x, &d)| d * x)
        .collect();
    Ok(PerceivedState {
        reported_magnitudes,
        reported_beta: mp.reported_beta.clone(),
        false_gains,
        scale: mp.scale.clone(),
    })
}
