//! Paired honest-versus-misreport Monte Carlo over trials and drops.

use crate::analytic;
use crate::channel::{apply_misreport, draw_channels, draw_large_scale, PerceivedState, RngStream};
use crate::misreport;
use crate::params::{
    ChannelSet, MisreportProfile, RateReport, SchedulePlan, Strategy, SystemParams,
};
use crate::scheduling::build_plan;
use crate::zf::evaluate_block;
use crate::{Error, Result};

use super::config::{CellSpec, ExperimentConfig, Scenario};
use super::stats::{mean_ratio_loss, ratio_loss, summarize, Summary};

/// How trials are distributed over threads. Output never depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `workers = 0` lets the thread pool pick. Runs sequentially when the
    /// crate is built without the `parallel` feature.
    Parallel {
        workers: usize,
    },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { workers: 0 }
        } else {
            Execution::Sequential
        }
    }
}

/// One output line: a summary of one metric in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub sweep: Option<String>,
    pub sweep_value: Option<f64>,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
    pub trials: usize,
    pub drops: usize,
    pub seed: u64,
}

const STREAM_LARGE_SCALE: u64 = 1;
const STREAM_SMALL_SCALE: u64 = 2;
const STREAM_PLAN: u64 = 3;

/// Substream id for `kind` at (`drop`, `trial`). Channel draws depend only on
/// the seed and these indices, so every sweep value, strategy and grouping
/// rule sees the same channels.
fn stream_id(kind: u64, drop: usize, trial: usize) -> u64 {
    (kind << 60) | ((drop as u64) << 32) | trial as u64
}

/// Evaluates one round-robin period against an already perceived state.
pub fn run_period_perceived(
    ch: &ChannelSet,
    ps: &PerceivedState,
    plan: &SchedulePlan,
    p: &SystemParams,
) -> Result<RateReport> {
    plan.validate(p)?;
    let k = ch.users();
    if k != p.k || ps.users() != k {
        return Err(Error::Dimension(format!(
            "channels cover {k} users, params {}, perceived state {}",
            p.k,
            ps.users()
        )));
    }
    let mut per_user_block_rate = vec![0.0; k];
    let mut per_block_rate = Vec::with_capacity(p.t);
    for group in &plan.groups {
        let out = evaluate_block(ch, ps, group, p)?;
        for (&u, &r) in out.member_ids.iter().zip(&out.rate_actual) {
            per_user_block_rate[u] = r;
        }
        per_block_rate.push(out.rate_actual.iter().sum::<f64>() / group.len() as f64);
    }
    let per_user_rate: Vec<f64> = per_user_block_rate.iter().map(|r| r / p.t as f64).collect();
    let misreporter: Vec<bool> = ps.scale.iter().map(|&s| s != 1.0).collect();
    let mean_where = |want: bool| {
        let picked: Vec<f64> = per_user_rate
            .iter()
            .zip(&misreporter)
            .filter(|(_, &m)| m == want)
            .map(|(&r, _)| r)
            .collect();
        (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64)
    };
    Ok(RateReport {
        honest_avg_rate: mean_where(false).unwrap_or(0.0),
        misreporter_avg_rate: mean_where(true),
        per_user_rate,
        per_user_block_rate,
        per_block_rate,
        misreporter,
    })
}

/// Evaluates one period: the BS schedules by `plan` and precodes from the
/// reports in `mp`; rates are what users actually receive.
///
/// `honest_avg_rate` is 0 when every user misreports.
pub fn run_period(
    ch: &ChannelSet,
    mp: &MisreportProfile,
    plan: &SchedulePlan,
    p: &SystemParams,
) -> Result<RateReport> {
    let ps = apply_misreport(ch, mp)?;
    run_period_perceived(ch, &ps, plan, p)
}

/// Large-scale draw and misreport profile shared by every trial of a drop.
struct DropSetup {
    betas: Vec<f64>,
    honest: MisreportProfile,
    profile: MisreportProfile,
}

fn setup_drop(cell: &CellSpec, drop: usize) -> Result<DropSetup> {
    let p = &cell.params;
    let betas = match cell.scenario {
        Scenario::Homogeneous => vec![p.beta_default; p.k],
        Scenario::Heterogeneous => draw_large_scale(
            p,
            &cell.large_scale,
            &RngStream::new(cell.seed, stream_id(STREAM_LARGE_SCALE, drop, 0)),
        )?,
    };
    let weakest = betas[p.k - 1];
    let profile = match cell.strategy {
        Strategy::None => MisreportProfile::honest(&betas),
        Strategy::HomogeneousUniform => {
            let mut mp = misreport::homogeneous_uniform(p, cell.k_m, cell.delta)?;
            mp.reported_beta = mp.scale.iter().zip(&betas).map(|(s, b)| s * b).collect();
            mp
        }
        Strategy::GroupingChangedUnder => {
            misreport::grouping_changed_under(&betas, cell.k_m, cell.beta_low_ratio * weakest)?
        }
        Strategy::GroupingChangedOver => {
            misreport::grouping_changed_over(&betas, cell.k_m, cell.beta_high_ratio * betas[0])?
        }
        Strategy::GroupingUnchangedUnder => {
            misreport::grouping_unchanged_under(&betas, p, cell.k_m, cell.beta_low_ratio * weakest)?
        }
    };
    Ok(DropSetup {
        honest: MisreportProfile::honest(&betas),
        betas,
        profile,
    })
}

/// Per-user period rates of one trial, indexed `[rule][user]`.
struct TrialRates {
    honest: Vec<Vec<f64>>,
    misreport: Vec<Vec<f64>>,
}

fn run_trial(cell: &CellSpec, setup: &DropSetup, drop: usize, trial: usize) -> Result<TrialRates> {
    let p = &cell.params;
    let ch = draw_channels(
        p,
        &setup.betas,
        &RngStream::new(cell.seed, stream_id(STREAM_SMALL_SCALE, drop, trial)),
    )?;
    let ps_honest = apply_misreport(&ch, &setup.honest)?;
    let ps_false = apply_misreport(&ch, &setup.profile)?;
    // Grouping must not depend on the reports for the random rule, so both
    // runs share one plan stream.
    let plan_stream = RngStream::new(cell.seed, stream_id(STREAM_PLAN, drop, trial));
    let mut out = TrialRates {
        honest: Vec::with_capacity(cell.rules.len()),
        misreport: Vec::with_capacity(cell.rules.len()),
    };
    for &rule in &cell.rules {
        let plan_h = build_plan(rule, &ps_honest, p, &plan_stream, cell.sus_alpha)?;
        let plan_m = build_plan(rule, &ps_false, p, &plan_stream, cell.sus_alpha)?;
        out.honest
            .push(run_period_perceived(&ch, &ps_honest, &plan_h, p)?.per_user_rate);
        out.misreport
            .push(run_period_perceived(&ch, &ps_false, &plan_m, p)?.per_user_rate);
    }
    Ok(out)
}

/// Maps `f` over `0..n`, keeping index order whatever the execution mode.
fn map_ordered<T, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel { workers } => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| (0..n).into_par_iter().map(&f).collect())
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel { .. } => (0..n).map(f).collect(),
    }
}

struct RowSink<'a> {
    cell: &'a CellSpec,
    sweep: Option<String>,
    sweep_value: Option<f64>,
    rows: Vec<ResultRow>,
}

impl RowSink<'_> {
    fn push(&mut self, metric: String, s: Summary, trials: usize, drops: usize) {
        self.rows.push(ResultRow {
            scenario: self.cell.label.clone(),
            sweep: self.sweep.clone(),
            sweep_value: self.sweep_value,
            metric,
            mean: s.mean,
            std: s.std,
            ci95: s.ci95,
            trials,
            drops,
            seed: self.cell.seed,
        });
    }
}

fn mean_of(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn user_metric(base: &str, tag: &str, user: usize, width: usize) -> String {
    format!("{base}_{tag}[{:0width$}]", user + 1)
}

/// Homogeneous summaries: losses on honest rate sums, paired per trial.
fn reduce_homogeneous(sink: &mut RowSink, samples: &[TrialRates], misreporter: &[bool]) {
    let cell = sink.cell;
    let n = samples.len();
    for (r, rule) in cell.rules.iter().enumerate() {
        let tag = rule.tag();
        let honest_sum = |rates: &[f64]| {
            rates
                .iter()
                .zip(misreporter)
                .filter(|(_, &m)| !m)
                .map(|(x, _)| x)
                .sum::<f64>()
        };
        let a: Vec<f64> = samples.iter().map(|s| honest_sum(&s.honest[r])).collect();
        let m: Vec<f64> = samples
            .iter()
            .map(|s| honest_sum(&s.misreport[r]))
            .collect();
        let honest_count = misreporter.iter().filter(|&&m| !m).count();
        if honest_count > 0 {
            let h = honest_count as f64;
            sink.push(
                format!("theta_ratio_{tag}"),
                ratio_loss(&m, &a),
                n,
                cell.drops,
            );
            let paired: Vec<f64> = m.iter().zip(&a).map(|(x, y)| 1.0 - x / y).collect();
            sink.push(
                format!("theta_paired_{tag}"),
                summarize(&paired),
                n,
                cell.drops,
            );
            let per_user: Vec<f64> = m.iter().map(|x| x / h).collect();
            sink.push(
                format!("honest_rate_{tag}"),
                summarize(&per_user),
                n,
                cell.drops,
            );
            let per_user: Vec<f64> = a.iter().map(|x| x / h).collect();
            sink.push(
                format!("baseline_rate_{tag}"),
                summarize(&per_user),
                n,
                cell.drops,
            );
        }
        if misreporter.iter().any(|&m| m) {
            let mis: Vec<f64> = samples
                .iter()
                .map(|s| {
                    let rates = &s.misreport[r];
                    mean_of(
                        rates
                            .iter()
                            .zip(misreporter)
                            .filter(|(_, &m)| m)
                            .map(|(&x, _)| x),
                    )
                    .expect("at least one misreporter")
                })
                .collect();
            sink.push(
                format!("misreporter_rate_{tag}"),
                summarize(&mis),
                n,
                cell.drops,
            );
        }
    }
}

fn push_analytic(sink: &mut RowSink) -> Result<()> {
    let cell = sink.cell;
    if cell.scenario != Scenario::Homogeneous || cell.strategy != Strategy::HomogeneousUniform {
        return Ok(());
    }
    let p = &cell.params;
    let beta = p.beta_default;
    let candidates = [
        (
            "analytic_loss_cm",
            analytic::loss_rr_cm(p, cell.k_m, cell.delta, beta),
        ),
        (
            "analytic_upper_bound",
            analytic::loss_upper_bound(p, cell.k_m, cell.delta, beta),
        ),
        (
            "analytic_single_block",
            if p.t == 1 {
                analytic::loss_single_block(p.m, p.k, cell.k_m, cell.delta, p.snr(), beta)
            } else {
                Err(Error::Regime("more than one block".into()))
            },
        ),
    ];
    for (name, value) in candidates {
        match value {
            Ok(v) => sink.push(name.into(), Summary::exact(v), cell.trials, cell.drops),
            // Outside the closed form's regime the row is simply absent.
            Err(e) if e.is_configuration() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Heterogeneous summaries. `theta_ratio` is the loss of the mean honest rate
/// over all drops and trials. `avg_honest_loss` averages per-user losses
/// `1 - E[R_m] / E[R_a]` (expectations within a drop) over honest users and
/// drops. Drop 0 is also reported on its own as the representative
/// configuration.
fn reduce_heterogeneous(sink: &mut RowSink, per_drop: &[&[TrialRates]], misreporter: &[bool]) {
    let cell = sink.cell;
    let k = cell.params.k;
    let width = k.to_string().len();
    let honest: Vec<usize> = (0..k).filter(|&u| !misreporter[u]).collect();
    let trials = cell.trials;
    let drops = per_drop.len();
    for (r, rule) in cell.rules.iter().enumerate() {
        let tag = rule.tag();
        let user_means = |samples: &[TrialRates], u: usize, mis: bool| {
            let pick = |s: &TrialRates| {
                if mis {
                    s.misreport[r][u]
                } else {
                    s.honest[r][u]
                }
            };
            samples.iter().map(pick).sum::<f64>() / samples.len() as f64
        };
        let mut avg_loss = Vec::with_capacity(drops);
        let mut user_loss = vec![Vec::with_capacity(drops); k];
        let mut honest_rate = Vec::with_capacity(drops);
        let mut baseline_rate = Vec::with_capacity(drops);
        let mut mis_rate = Vec::with_capacity(drops);
        for samples in per_drop {
            let mut losses = Vec::with_capacity(honest.len());
            for &u in &honest {
                let l = 1.0 - user_means(samples, u, true) / user_means(samples, u, false);
                user_loss[u].push(l);
                losses.push(l);
            }
            if let Some(v) = mean_of(losses.iter().copied()) {
                avg_loss.push(v);
            }
            if let Some(v) = mean_of(honest.iter().map(|&u| user_means(samples, u, true))) {
                honest_rate.push(v);
                baseline_rate
                    .push(mean_of(honest.iter().map(|&u| user_means(samples, u, false))).unwrap());
            }
            let mis = (0..k)
                .filter(|&u| misreporter[u])
                .map(|u| user_means(samples, u, true));
            if let Some(v) = mean_of(mis) {
                mis_rate.push(v);
            }
        }
        if !honest.is_empty() {
            sink.push(
                format!("avg_honest_loss_{tag}"),
                summarize(&avg_loss),
                trials,
                drops,
            );
            sink.push(
                format!("theta_ratio_{tag}"),
                ratio_loss(&honest_rate, &baseline_rate),
                trials,
                drops,
            );
            sink.push(
                format!("honest_rate_{tag}"),
                summarize(&honest_rate),
                trials,
                drops,
            );
            sink.push(
                format!("baseline_rate_{tag}"),
                summarize(&baseline_rate),
                trials,
                drops,
            );
            for &u in &honest {
                let name = user_metric("per_user_loss", tag, u, width);
                sink.push(name, summarize(&user_loss[u]), trials, drops);
            }
            let rep = per_drop[0];
            let series = |u: usize, mis: bool| -> Vec<f64> {
                rep.iter()
                    .map(|s| {
                        if mis {
                            s.misreport[r][u]
                        } else {
                            s.honest[r][u]
                        }
                    })
                    .collect()
            };
            let num: Vec<Vec<f64>> = honest.iter().map(|&u| series(u, true)).collect();
            let den: Vec<Vec<f64>> = honest.iter().map(|&u| series(u, false)).collect();
            let name = format!("rep_avg_honest_loss_{tag}");
            sink.push(name, mean_ratio_loss(&num, &den), trials, 1);
            for (i, &u) in honest.iter().enumerate() {
                let name = user_metric("rep_per_user_loss", tag, u, width);
                sink.push(name, ratio_loss(&num[i], &den[i]), trials, 1);
            }
        }
        if !mis_rate.is_empty() {
            sink.push(
                format!("misreporter_rate_{tag}"),
                summarize(&mis_rate),
                trials,
                drops,
            );
        }
    }
}

fn run_one(
    cell: &CellSpec,
    sweep: Option<String>,
    sweep_value: Option<f64>,
    exec: Execution,
) -> Result<Vec<ResultRow>> {
    let setups = map_ordered(cell.drops, exec, |d| setup_drop(cell, d))?;
    let misreporter: Vec<bool> = setups[0].profile.scale.iter().map(|&s| s != 1.0).collect();
    if setups.iter().any(|s| {
        s.profile
            .scale
            .iter()
            .map(|&x| x != 1.0)
            .ne(misreporter.iter().copied())
    }) {
        return Err(Error::Config(
            "misreporter set differs between drops".into(),
        ));
    }
    let trials = cell.trials;
    let samples = map_ordered(cell.drops * trials, exec, |i| {
        let (d, t) = (i / trials, i % trials);
        run_trial(cell, &setups[d], d, t)
    })?;
    let mut sink = RowSink {
        cell,
        sweep,
        sweep_value,
        rows: Vec::new(),
    };
    match cell.scenario {
        Scenario::Homogeneous => reduce_homogeneous(&mut sink, &samples, &misreporter),
        Scenario::Heterogeneous => {
            let per_drop: Vec<&[TrialRates]> = samples.chunks(trials).collect();
            reduce_heterogeneous(&mut sink, &per_drop, &misreporter);
        }
    }
    push_analytic(&mut sink)?;
    Ok(sink.rows)
}

/// Runs every layout and strategy of `cfg` at one sweep value.
pub fn run_cell(
    cfg: &ExperimentConfig,
    sweep_value: Option<f64>,
    exec: Execution,
) -> Result<Vec<ResultRow>> {
    let sweep = cfg.sweep.as_ref().map(|s| s.name.name().to_string());
    let sweep_value = sweep.as_ref().and(sweep_value);
    let mut rows = Vec::new();
    for cell in cfg.cells(sweep_value)? {
        rows.extend(run_one(&cell, sweep.clone(), sweep_value, exec)?);
    }
    Ok(rows)
}

/// Runs the whole sweep and returns rows in output order.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for v in cfg.sweep_points() {
        rows.extend(run_cell(cfg, v, exec)?);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Output order: sweep value, then metric, then scenario.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        let va = a.sweep_value.unwrap_or(f64::NEG_INFINITY);
        let vb = b.sweep_value.unwrap_or(f64::NEG_INFINITY);
        va.total_cmp(&vb)
            .then_with(|| a.metric.cmp(&b.metric))
            .then_with(|| a.scenario.cmp(&b.scenario))
    });
}

/// Rows of `rows` matching `metric` (and `scenario` when given), in order.
pub fn select<'a>(
    rows: &'a [ResultRow],
    metric: &'a str,
    scenario: Option<&'a str>,
) -> impl Iterator<Item = &'a ResultRow> + 'a {
    rows.iter()
        .filter(move |r| r.metric == metric && scenario.is_none_or(|s| r.scenario == s))
}
