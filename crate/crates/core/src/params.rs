//! Shared domain types, parameter validation and dB conversions.
//!
//! Everything in here is a plain value object. Arithmetic is linear
//! throughout the crate; dB values only appear at the configuration and CLI
//! boundary and are converted with [`db_to_linear`].

use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result};

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "linear_to_db needs a positive finite value, got {x}"
        )));
    }
    Ok(10.0 * x.log10())
}

/// Dimensional contract of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// BS antenna count.
    #[serde(rename = "M")]
    pub m: usize,
    /// Total users.
    #[serde(rename = "K")]
    pub k: usize,
    /// Users served per resource block.
    #[serde(rename = "K_B")]
    pub k_b: usize,
    /// Resource blocks per round-robin period.
    #[serde(rename = "T")]
    pub t: usize,
    /// Total transmit power per block (linear).
    #[serde(rename = "P")]
    pub power: f64,
    pub noise_var: f64,
    /// Large-scale coefficient shared by all users in the homogeneous case.
    pub beta_default: f64,
}

impl SystemParams {
    /// Builds params with `T = K / K_B`, unit noise and unit β, and validates.
    pub fn new(m: usize, k: usize, k_b: usize, power: f64) -> Result<Self> {
        if k_b == 0 {
            return Err(Error::Dimension("K_B must be at least 1".into()));
        }
        Self {
            m,
            k,
            k_b,
            t: k / k_b,
            power,
            noise_var: 1.0,
            beta_default: 1.0,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        if self.m < 2 {
            return Err(Error::Dimension(format!(
                "M = {} but M >= 2 is required",
                self.m
            )));
        }
        if self.k_b < 1 || self.k_b > self.k {
            return Err(Error::Dimension(format!(
                "K_B = {} must satisfy 1 <= K_B <= K = {}",
                self.k_b, self.k
            )));
        }
        if self.t.checked_mul(self.k_b) != Some(self.k) {
            return Err(Error::Dimension(format!(
                "K = {} must equal T * K_B = {} * {}",
                self.k, self.t, self.k_b
            )));
        }
        if self.m < self.k_b {
            return Err(Error::Dimension(format!(
                "zero-forcing needs M >= K_B, got M = {} and K_B = {}",
                self.m, self.k_b
            )));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(Error::Dimension(format!(
                "P = {} must be positive",
                self.power
            )));
        }
        if !(self.noise_var > 0.0) || !self.noise_var.is_finite() {
            return Err(Error::Dimension(format!(
                "noise_var = {} must be positive",
                self.noise_var
            )));
        }
        if !(self.beta_default > 0.0) || !self.beta_default.is_finite() {
            return Err(Error::Dimension(format!(
                "beta_default = {} must be positive",
                self.beta_default
            )));
        }
        Ok(self)
    }

    /// Transmit SNR `P / σ²`.
    pub fn snr(&self) -> f64 {
        self.power / self.noise_var
    }
}

/// Path loss plus log-normal shadowing drop model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleModel {
    /// Cell radius in metres.
    pub cell_radius: f64,
    /// Reference distance in metres.
    pub ref_distance: f64,
    pub path_loss_exp: f64,
    /// Shadowing standard deviation in dB.
    pub shadow_sigma_db: f64,
}

impl Default for LargeScaleModel {
    fn default() -> Self {
        Self {
            cell_radius: 500.0,
            ref_distance: 200.0,
            path_loss_exp: 3.8,
            shadow_sigma_db: 8.0,
        }
    }
}

impl LargeScaleModel {
    pub fn validate(self) -> Result<Self> {
        let ok = self.cell_radius > 0.0
            && self.ref_distance > 0.0
            && self.path_loss_exp > 0.0
            && self.shadow_sigma_db >= 0.0
            && [
                self.cell_radius,
                self.ref_distance,
                self.path_loss_exp,
                self.shadow_sigma_db,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(self)
        } else {
            Err(Error::Domain(format!("invalid large-scale model {self:?}")))
        }
    }

    /// Coefficient for a user at `distance` metres with `shadow_db` of shadowing.
    pub fn coefficient(&self, distance: f64, shadow_db: f64) -> f64 {
        db_to_linear(shadow_db) / (1.0 + (distance / self.ref_distance).powf(self.path_loss_exp))
    }
}

/// True per-user channels. Row `k` of `gains` is user `k`'s channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub gains: CMatrix,
    pub large_scale: Vec<f64>,
}

impl ChannelSet {
    pub fn new(gains: CMatrix, large_scale: Vec<f64>) -> Result<Self> {
        if gains.nrows() != large_scale.len() {
            return Err(Error::Dimension(format!(
                "{} channel rows but {} large-scale coefficients",
                gains.nrows(),
                large_scale.len()
            )));
        }
        if let Some((k, b)) = large_scale.iter().enumerate().find(|(_, b)| !(**b > 0.0)) {
            return Err(Error::Domain(format!("beta[{k}] = {b} must be positive")));
        }
        Ok(Self { gains, large_scale })
    }

    pub fn users(&self) -> usize {
        self.gains.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.gains.ncols()
    }

    /// Channel magnitudes ‖g_k‖².
    pub fn magnitudes(&self) -> Vec<f64> {
        self.gains
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }
}

/// Which attack produced a [`MisreportProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    None,
    HomogeneousUniform,
    GroupingChangedUnder,
    GroupingChangedOver,
    GroupingUnchangedUnder,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::HomogeneousUniform => "homogeneous_uniform",
            Strategy::GroupingChangedUnder => "grouping_changed_under",
            Strategy::GroupingChangedOver => "grouping_changed_over",
            Strategy::GroupingUnchangedUnder => "grouping_unchanged_under",
        }
    }
}

/// Per-user reported-over-true power ratios and reported large-scale values.
#[derive(Debug, Clone, PartialEq)]
pub struct MisreportProfile {
    pub scale: Vec<f64>,
    pub reported_beta: Vec<f64>,
    pub strategy: Strategy,
}

impl MisreportProfile {
    /// Everyone reports truthfully.
    pub fn honest(betas: &[f64]) -> Self {
        Self {
            scale: vec![1.0; betas.len()],
            reported_beta: betas.to_vec(),
            strategy: Strategy::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale.len() != self.reported_beta.len() {
            return Err(Error::Dimension(format!(
                "{} scales but {} reported betas",
                self.scale.len(),
                self.reported_beta.len()
            )));
        }
        for (user, &scale) in self.scale.iter().enumerate() {
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Error::Scale { user, scale });
            }
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.scale.len()
    }

    pub fn is_misreporter(&self, k: usize) -> bool {
        self.scale[k] != 1.0
    }

    pub fn misreporters(&self) -> Vec<usize> {
        (0..self.users())
            .filter(|&k| self.is_misreporter(k))
            .collect()
    }

    pub fn misreporter_count(&self) -> usize {
        self.scale.iter().filter(|&&s| s != 1.0).count()
    }
}

/// How the scheduler partitions users into resource-block groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingRule {
    #[serde(alias = "cm")]
    ChannelMagnitude,
    Sus,
    #[serde(alias = "rand")]
    Random,
    #[serde(alias = "ls")]
    LargeScale,
}

impl GroupingRule {
    /// Short tag used in metric names.
    pub fn tag(self) -> &'static str {
        match self {
            GroupingRule::ChannelMagnitude => "cm",
            GroupingRule::Sus => "sus",
            GroupingRule::Random => "rand",
            GroupingRule::LargeScale => "ls",
        }
    }
}

/// Ordered partition of the users into `T` groups of `K_B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulePlan {
    pub groups: Vec<Vec<usize>>,
    pub rule: GroupingRule,
}

impl SchedulePlan {
    /// Checks that the groups partition `0..K` into `T` groups of exactly `K_B`.
    pub fn validate(&self, p: &SystemParams) -> Result<()> {
        if self.groups.len() != p.t {
            return Err(Error::Dimension(format!(
                "plan has {} groups, expected T = {}",
                self.groups.len(),
                p.t
            )));
        }
        let mut seen = vec![false; p.k];
        for g in &self.groups {
            if g.len() != p.k_b {
                return Err(Error::Dimension(format!(
                    "group of size {} in plan, expected K_B = {}",
                    g.len(),
                    p.k_b
                )));
            }
            for &u in g {
                if u >= p.k || seen[u] {
                    return Err(Error::Dimension(format!("user {u} missing or repeated")));
                }
                seen[u] = true;
            }
        }
        Ok(())
    }

    /// Block index of every user.
    pub fn block_of(&self) -> Vec<usize> {
        let k: usize = self.groups.iter().map(Vec::len).sum();
        let mut out = vec![usize::MAX; k];
        for (t, g) in self.groups.iter().enumerate() {
            for &u in g {
                out[u] = t;
            }
        }
        out
    }

    /// Groups as sorted member lists; two plans with equal grouping compare
    /// equal here regardless of within-group order or rule.
    pub fn grouping(&self) -> Vec<Vec<usize>> {
        self.groups
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.sort_unstable();
                g
            })
            .collect()
    }

    pub fn same_grouping(&self, other: &SchedulePlan) -> bool {
        self.grouping() == other.grouping()
    }
}

/// Rates of every user over one scheduling period.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Period rate in bits/s/Hz: single-block rate divided by `T`.
    pub per_user_rate: Vec<f64>,
    /// Rate in the block the user is served in.
    pub per_user_block_rate: Vec<f64>,
    /// Mean member rate of each block.
    pub per_block_rate: Vec<f64>,
    pub misreporter: Vec<bool>,
    pub honest_avg_rate: f64,
    /// `None` when nobody misreports.
    pub misreporter_avg_rate: Option<f64>,
}

/// Loss of a misreported period against an honest baseline for the same channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    /// `1 - R_m / R_a` per honest user, `None` for misreporters.
    pub per_user_loss: Vec<Option<f64>>,
    /// Mean of the per-user losses over honest users.
    pub avg_honest_loss: f64,
    /// `1 - Σ R_m / Σ R_a` over honest users.
    pub honest_rate_loss: f64,
}

impl RateReport {
    pub fn honest_rate_sum(&self) -> f64 {
        self.per_user_rate
            .iter()
            .zip(&self.misreporter)
            .filter(|(_, &m)| !m)
            .map(|(r, _)| r)
            .sum()
    }

    /// Pairs `self` (with misreporting) against `baseline` (all honest).
    pub fn loss_against(&self, baseline: &RateReport) -> Result<LossReport> {
        if baseline.per_user_rate.len() != self.per_user_rate.len() {
            return Err(Error::Dimension(
                "baseline covers a different user set".into(),
            ));
        }
        let per_user_loss: Vec<Option<f64>> = self
            .per_user_rate
            .iter()
            .zip(&baseline.per_user_rate)
            .zip(&self.misreporter)
            .map(|((&rm, &ra), &mis)| (!mis).then(|| 1.0 - rm / ra))
            .collect();
        let honest: Vec<f64> = per_user_loss.iter().flatten().copied().collect();
        if honest.is_empty() {
            return Err(Error::Domain("no honest users to measure a loss on".into()));
        }
        let avg_honest_loss = honest.iter().sum::<f64>() / honest.len() as f64;
        let (mut sm, mut sa) = (0.0, 0.0);
        for ((rm, ra), mis) in self
            .per_user_rate
            .iter()
            .zip(&baseline.per_user_rate)
            .zip(&self.misreporter)
        {
            if !mis {
                sm += rm;
                sa += ra;
            }
        }
        Ok(LossReport {
            per_user_loss,
            avg_honest_loss,
            honest_rate_loss: 1.0 - sm / sa,
        })
    }
}
