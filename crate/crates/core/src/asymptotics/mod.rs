//! Null moments of the fluctuation statistics: exact trace formulas, tabulation over a
//! Hurst grid, and the covariance of the scaled `ρ_DCCA` vector.

pub mod nullcov;
pub mod spectral;
pub mod table;
pub mod trace;

pub use nullcov::{cached_mean, rho_null_cov, worst_case_cov, NullCovariance, Provenance};
pub use spectral::{cross_scale_corr, cross_scale_sum, fgn_spectral_density};
pub use table::{default_grid, default_ratios, tabulate, CovTable, TablePoint, TableSpec, TABLE_VERSION};
pub use trace::{asymptotic_variance, dfa_dcca_cross_cov_check, fluct_cov_exact, fluct_mean_exact, StatKind};
