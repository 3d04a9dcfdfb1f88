use serde::{Deserialize, Deserializer, Serialize};

use crate::params::{db_to_linear, GroupingRule, LargeScaleModel, Strategy, SystemParams};
use crate::scheduling::DEFAULT_SUS_ALPHA;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Every user has the same large-scale coefficient `beta_default`.
    Homogeneous,
    /// Large-scale coefficients are drawn per drop from the path-loss model.
    Heterogeneous,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Homogeneous => "homogeneous",
            Scenario::Heterogeneous => "heterogeneous",
        }
    }
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "P_dB")]
    PowerDb,
    #[serde(rename = "P")]
    Power,
    #[serde(rename = "K_M")]
    Misreporters,
    #[serde(rename = "delta_dB")]
    DeltaDb,
    #[serde(rename = "delta")]
    Delta,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PowerDb => "P_dB",
            SweepParam::Power => "P",
            SweepParam::Misreporters => "K_M",
            SweepParam::DeltaDb => "delta_dB",
            SweepParam::Delta => "delta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: SweepParam,
    pub values: Vec<f64>,
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

fn default_rules() -> Vec<GroupingRule> {
    vec![GroupingRule::ChannelMagnitude]
}
fn default_strategy() -> Vec<Strategy> {
    vec![Strategy::None]
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn half() -> f64 {
    0.5
}
fn two() -> f64 {
    2.0
}
fn sus_alpha() -> f64 {
    DEFAULT_SUS_ALPHA
}

/// Flat description of one experiment, as read from a JSON document.
///
/// `grouping_rule` and `strategy` take one value or a list; every
/// combination is simulated on the same channel draws. `layouts`, when
/// present, replaces `K`/`K_B`/`T` with a list of `[T, K_B]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix of the scenario column; defaults to the scenario kind.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K", default)]
    pub k: Option<usize>,
    #[serde(rename = "K_B", default)]
    pub k_b: Option<usize>,
    #[serde(rename = "T", default)]
    pub t: Option<usize>,
    #[serde(rename = "P", default)]
    pub power: Option<f64>,
    #[serde(rename = "P_dB", default)]
    pub power_db: Option<f64>,
    #[serde(default = "one")]
    pub noise_var: f64,
    #[serde(default = "one")]
    pub beta_default: f64,
    pub scenario: Scenario,
    #[serde(default = "default_rules", deserialize_with = "one_or_many")]
    pub grouping_rule: Vec<GroupingRule>,
    #[serde(default = "default_strategy", deserialize_with = "one_or_many")]
    pub strategy: Vec<Strategy>,
    #[serde(rename = "K_M", default)]
    pub k_m: usize,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(rename = "delta_dB", default)]
    pub delta_db: Option<f64>,
    /// Underreported β as a fraction of the weakest true β.
    #[serde(default = "half")]
    pub beta_low_ratio: f64,
    /// Overreported β as a multiple of the strongest true β.
    #[serde(default = "two")]
    pub beta_high_ratio: f64,
    #[serde(default = "sus_alpha")]
    pub sus_alpha: f64,
    #[serde(default)]
    pub large_scale: LargeScaleModel,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    pub trials: usize,
    #[serde(default = "one_usize")]
    pub drops: usize,
    pub seed: u64,
    #[serde(default)]
    pub layouts: Option<Vec<[usize; 2]>>,
}

/// One fully resolved simulation: a single layout, strategy and sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub label: String,
    pub params: SystemParams,
    pub scenario: Scenario,
    pub rules: Vec<GroupingRule>,
    pub strategy: Strategy,
    pub k_m: usize,
    pub delta: f64,
    pub beta_low_ratio: f64,
    pub beta_high_ratio: f64,
    pub sus_alpha: f64,
    pub large_scale: LargeScaleModel,
    pub trials: usize,
    pub drops: usize,
    pub seed: u64,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    fn power_linear(&self) -> Result<f64> {
        match (self.power, self.power_db) {
            (Some(p), None) => Ok(p),
            (None, Some(db)) => Ok(db_to_linear(db)),
            (None, None) if self.sweeps(&[SweepParam::Power, SweepParam::PowerDb]) => Ok(1.0),
            (None, None) => Err(config_err("one of P or P_dB is required")),
            (Some(_), Some(_)) => Err(config_err("give P or P_dB, not both")),
        }
    }

    fn delta_linear(&self) -> Result<f64> {
        match (self.delta, self.delta_db) {
            (Some(d), None) => Ok(d),
            (None, Some(db)) => Ok(db_to_linear(db)),
            (None, None) => Ok(1.0),
            (Some(_), Some(_)) => Err(config_err("give delta or delta_dB, not both")),
        }
    }

    fn sweeps(&self, params: &[SweepParam]) -> bool {
        self.sweep
            .as_ref()
            .is_some_and(|s| params.contains(&s.name))
    }

    fn layouts_resolved(&self) -> Result<Vec<(usize, usize)>> {
        if let Some(layouts) = &self.layouts {
            if self.k.is_some() || self.k_b.is_some() || self.t.is_some() {
                return Err(config_err(
                    "layouts replace K, K_B and T; give one or the other",
                ));
            }
            if layouts.is_empty() {
                return Err(config_err("layouts must not be empty"));
            }
            return Ok(layouts.iter().map(|&[t, k_b]| (t, k_b)).collect());
        }
        let (k, k_b) = match (self.k, self.k_b) {
            (Some(k), Some(k_b)) => (k, k_b),
            _ => return Err(config_err("K and K_B are required without layouts")),
        };
        if k_b == 0 || k % k_b != 0 {
            return Err(Error::Dimension(format!(
                "K = {k} is not a multiple of K_B = {k_b}"
            )));
        }
        let t = k / k_b;
        if self.t.is_some_and(|given| given != t) {
            return Err(Error::Dimension(format!("T must equal K / K_B = {t}")));
        }
        Ok(vec![(t, k_b)])
    }

    /// Sweep values, or a single `None` for an unswept experiment.
    pub fn sweep_points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }

    /// Checks everything that does not depend on a sweep value, then every
    /// sweep value.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.drops < 1 {
            return Err(config_err("drops must be at least 1"));
        }
        if self.grouping_rule.is_empty() || self.strategy.is_empty() {
            return Err(config_err("grouping_rule and strategy must not be empty"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(config_err("sweep has no values"));
            }
        }
        if !(self.beta_low_ratio > 0.0 && self.beta_low_ratio < 1.0) {
            return Err(Error::Range(format!(
                "beta_low_ratio = {} must lie in (0, 1)",
                self.beta_low_ratio
            )));
        }
        if !(self.beta_high_ratio > 1.0 && self.beta_high_ratio.is_finite()) {
            return Err(Error::Range(format!(
                "beta_high_ratio = {} must exceed 1",
                self.beta_high_ratio
            )));
        }
        if !(self.sus_alpha > 0.0 && self.sus_alpha <= 1.0) {
            return Err(Error::Range(format!(
                "sus_alpha = {} must lie in (0, 1]",
                self.sus_alpha
            )));
        }
        if self.scenario == Scenario::Homogeneous {
            if let Some(s) = self
                .strategy
                .iter()
                .find(|s| !matches!(s, Strategy::None | Strategy::HomogeneousUniform))
            {
                return Err(config_err(format!(
                    "strategy {} needs the heterogeneous scenario",
                    s.name()
                )));
            }
        } else {
            self.large_scale.validate()?;
        }
        for v in self.sweep_points() {
            self.cells(v)?;
        }
        Ok(())
    }

    /// Expands layouts and strategies into resolved cells at `sweep_value`.
    pub fn cells(&self, sweep_value: Option<f64>) -> Result<Vec<CellSpec>> {
        let mut power = self.power_linear()?;
        let mut delta = self.delta_linear()?;
        let mut k_m = self.k_m;
        if let (Some(s), Some(v)) = (&self.sweep, sweep_value) {
            if !v.is_finite() {
                return Err(config_err(format!("sweep value {v} is not finite")));
            }
            match s.name {
                SweepParam::PowerDb => power = db_to_linear(v),
                SweepParam::Power => power = v,
                SweepParam::DeltaDb => delta = db_to_linear(v),
                SweepParam::Delta => delta = v,
                SweepParam::Misreporters => {
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(config_err(format!("K_M = {v} is not a count")));
                    }
                    k_m = v as usize;
                }
            }
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Scale {
                user: 0,
                scale: delta,
            });
        }
        let layouts = self.layouts_resolved()?;
        let base = self
            .name
            .clone()
            .unwrap_or_else(|| self.scenario.name().into());
        let mut cells = Vec::new();
        for &(t, k_b) in &layouts {
            let params = SystemParams {
                m: self.m,
                k: t * k_b,
                k_b,
                t,
                power,
                noise_var: self.noise_var,
                beta_default: self.beta_default,
            }
            .validate()?;
            if k_m > params.k {
                return Err(Error::Count { k_m, k: params.k });
            }
            for &strategy in &self.strategy {
                let mut label = format!("{base}:{}", strategy.name());
                if self.layouts.is_some() {
                    label.push_str(&format!(":T{t}xKB{k_b}"));
                }
                cells.push(CellSpec {
                    label,
                    params,
                    scenario: self.scenario,
                    rules: self.grouping_rule.clone(),
                    strategy,
                    k_m,
                    delta,
                    beta_low_ratio: self.beta_low_ratio,
                    beta_high_ratio: self.beta_high_ratio,
                    sus_alpha: self.sus_alpha,
                    large_scale: self.large_scale,
                    trials: self.trials,
                    drops: self.drops,
                    seed: self.seed,
                });
            }
        }
        Ok(cells)
    }
}
