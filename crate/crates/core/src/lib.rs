//! Simulation and analysis of channel-magnitude misreporting against a
//! multi-user massive-MIMO downlink that uses round-robin user grouping,
//! zero-forcing precoding and max-min power control.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] holds the shared domain types and unit conversions.
//! * [`channel`] draws Rayleigh channels and large-scale coefficients, and
//!   applies a misreport profile to obtain what the base station perceives.
//! * [`zf`] computes zero-forcing effective gains, max-min power and rates.
//! * [`scheduling`] builds round-robin schedule plans from perceived state.
//! * [`misreport`] plans the attack strategies.
//! * [`analytic`] evaluates the closed-form and order-statistic expressions.
//! * [`experiments`] is the Monte Carlo harness, presets and CSV output.
//!
//! Trials are data-parallel through rayon when the `parallel` feature is on
//! (the default); output is bit-identical for any worker count.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod misreport;
pub mod params;
pub mod scheduling;
pub mod zf;

pub use error::{Error, Result};
pub use params::{
    db_to_linear, linear_to_db, ChannelSet, GroupingRule, LargeScaleModel, MisreportProfile,
    RateReport, SchedulePlan, Strategy, SystemParams,
};

/// Complex baseband sample type used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix; channel matrices are stored users × antennas.
pub type CMatrix = nalgebra::DMatrix<C64>;
