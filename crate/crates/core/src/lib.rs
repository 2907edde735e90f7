//! Detrended cross-correlation analysis (DCCA) and an asymptotic test for
//! power-law cross-correlation between two time series.
//!
//! The pipeline: [`series`] builds profiles and scale sets, [`fluctuation`] computes
//! per-scale DFA/DCCA statistics and `ρ_DCCA`, [`asymptotics`] supplies the null
//! covariance of the scaled coefficient vector from fBm trace formulas, and
//! [`testkit`] turns both into a test statistic, threshold and p-value.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod fbm;
pub mod fluctuation;
pub mod poly;
pub mod report;
pub mod series;
pub mod simulate;
pub mod studies;
pub mod testkit;

pub use asymptotics::{CovTable, NullCovariance, Provenance};
pub use error::{DccaError, Result};
pub use fbm::FbmParams;
pub use fluctuation::{FluctuationSet, HurstEstimate};
pub use series::{make_scales, ScaleSet, SeriesPair};
pub use testkit::{stat_dcca, HurstMode, TestConfig, TestOutcome};

/// Library version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
