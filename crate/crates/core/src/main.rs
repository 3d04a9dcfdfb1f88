use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use misreport_sim::analytic;
use misreport_sim::experiments::{
    preset, run_experiment, write_csv_file, Execution, ExperimentConfig,
};
use misreport_sim::{db_to_linear, Error, Result, SystemParams};

#[derive(Parser)]
#[command(
    version,
    about = "Misreporting impact on massive-MIMO round-robin scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write its results as CSV.
    Run(RunArgs),
    /// Evaluate a closed-form expression.
    Analytic(AnalyticArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Named preset (fig2 .. fig7).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// JSON experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 picks the core count.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Formula {
    /// Honest per-user rate in one shared block.
    #[value(name = "eq6", alias = "rate-accurate")]
    RateAccurate,
    /// Honest per-user rate in one block with misreporters.
    #[value(name = "eq11", alias = "rate-misreport")]
    RateMisreport,
    /// Single-block honest loss.
    #[value(name = "eq12", alias = "loss-single-block")]
    LossSingleBlock,
    /// Round-robin magnitude-grouping loss.
    #[value(name = "eq17", alias = "loss-rr-cm")]
    LossRrCm,
    /// Upper bound on the round-robin loss.
    #[value(name = "eq21", alias = "loss-upper-bound")]
    LossUpperBound,
    /// Per-user rate of a heterogeneous block.
    #[value(name = "eq22", alias = "rate-heterogeneous")]
    RateHeterogeneous,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long, value_enum)]
    formula: Formula,
    #[arg(long = "M", default_value_t = 64)]
    m: usize,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "K_B")]
    k_b: Option<usize>,
    #[arg(long = "K_M", default_value_t = 0)]
    k_m: usize,
    #[arg(long, conflicts_with = "delta_db")]
    delta: Option<f64>,
    #[arg(long = "delta_dB", allow_hyphen_values = true)]
    delta_db: Option<f64>,
    /// Linear transmit SNR `P / σ²`.
    #[arg(long, conflicts_with_all = ["p_db", "power"])]
    snr: Option<f64>,
    /// Transmit power in dB (unit noise).
    #[arg(long = "P_dB", conflicts_with = "power", allow_hyphen_values = true)]
    p_db: Option<f64>,
    /// Linear transmit power (unit noise).
    #[arg(long = "P")]
    power: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Comma-separated large-scale coefficients of one block.
    #[arg(long, value_delimiter = ',')]
    betas: Vec<f64>,
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("--{name} is required for this formula")))
}

fn analytic_value(a: &AnalyticArgs) -> Result<f64> {
    let snr = match (a.snr, a.p_db, a.power) {
        (Some(s), _, _) => s,
        (_, Some(db), _) => db_to_linear(db),
        (_, _, Some(p)) => p,
        _ => {
            return Err(Error::Config(
                "one of --snr, --P_dB or --P is required".into(),
            ))
        }
    };
    let delta = match (a.delta, a.delta_db) {
        (Some(d), _) => d,
        (_, Some(db)) => db_to_linear(db),
        _ => 1.0,
    };
    let params = || -> Result<SystemParams> {
        let k = required(a.k, "K")?;
        let k_b = required(a.k_b, "K_B")?;
        SystemParams::new(a.m, k, k_b, snr)
    };
    match a.formula {
        Formula::RateAccurate => {
            analytic::rate_accurate_single_block(a.m, required(a.k, "K")?, snr, a.beta)
        }
        Formula::RateMisreport => analytic::rate_misreport_single_block(
            a.m,
            required(a.k, "K")?,
            a.k_m,
            delta,
            snr,
            a.beta,
        ),
        Formula::LossSingleBlock => {
            analytic::loss_single_block(a.m, required(a.k, "K")?, a.k_m, delta, snr, a.beta)
        }
        Formula::LossRrCm => analytic::loss_rr_cm(&params()?, a.k_m, delta, a.beta),
        Formula::LossUpperBound => analytic::loss_upper_bound(&params()?, a.k_m, delta, a.beta),
        Formula::RateHeterogeneous => {
            if a.betas.is_empty() {
                return Err(Error::Config("--betas is required for this formula".into()));
            }
            analytic::rate_heterogeneous_block(a.m, snr, &a.betas)
        }
    }
}

fn run(a: &RunArgs) -> Result<()> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, None) => return Err(Error::Config("give --preset or --config".into())),
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(d) = a.drops {
        cfg.drops = d;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel { workers: a.workers }
    };
    let rows = run_experiment(&cfg, exec)?;
    write_csv_file(&rows, &a.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Analytic(a) => analytic_value(a).map(|v| println!("{v:.16e}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(3)
            } else if e.is_configuration() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
