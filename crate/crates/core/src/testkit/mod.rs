//! The joint-exceedance test: statistic `T_κ`, critical threshold, conservative p-value
//! and the full procedure on a series pair.

pub mod mc;
pub mod surrogate;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::asymptotics::{rho_null_cov, worst_case_cov, CovTable, NullCovariance, Provenance};
use crate::error::{DccaError, Result};
use crate::fluctuation::{hurst_estimate, FluctuationSet, HurstEstimate};
use crate::series::{ScaleSet, SeriesPair};

pub use mc::{
    binomial, crit_threshold, exceedance_prob_mc, kappa_statistic, pvalue_bound_kappa, Estimate, McPool, MIN_SAMPLES,
};
pub use surrogate::{surrogate_pvalue, SurrogateResult};

/// Lower end of the Hurst range supported by the tables.
pub const HURST_MIN: f64 = 0.5;
/// Upper end of the Hurst range supported by the default table.
pub const HURST_MAX: f64 = 0.98;
/// Estimated exponents below this (for both series) trigger a warning.
pub const LOW_HURST_WARNING: f64 = 0.55;

/// How the Hurst exponents entering the null covariance are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HurstMode {
    Known {
        h: f64,
        g: f64,
    },
    Range {
        h_low: f64,
        h_high: f64,
        g_low: f64,
        g_high: f64,
    },
    /// DFA estimates `± margin`, clipped to the tabulated range.
    Auto {
        margin: f64,
    },
}

impl Default for HurstMode {
    fn default() -> Self {
        HurstMode::Auto { margin: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub scales: Vec<usize>,
    pub degree: usize,
    pub kappa: usize,
    pub level: f64,
    pub hurst: HurstMode,
    pub mc_samples: usize,
    pub seed: u64,
}

impl TestConfig {
    /// `κ = r`, level 0.05, automatic Hurst range, `10⁵` Monte Carlo draws.
    pub fn new(scales: Vec<usize>, degree: usize) -> Self {
        let kappa = scales.len();
        Self { scales, degree, kappa, level: 0.05, hurst: HurstMode::default(), mc_samples: MIN_SAMPLES, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.scales.len();
        if self.kappa == 0 || self.kappa > r {
            return Err(DccaError::InvalidParameter(format!("kappa = {} outside 1..={r}", self.kappa)));
        }
        if r > mc::MAX_DIM {
            return Err(DccaError::InvalidParameter(format!("at most {} scales supported", mc::MAX_DIM)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(DccaError::InvalidParameter(format!("level {} outside (0, 1)", self.level)));
        }
        if self.mc_samples < MIN_SAMPLES {
            return Err(DccaError::InvalidParameter(format!(
                "Monte Carlo sample count {} below {MIN_SAMPLES}",
                self.mc_samples
            )));
        }
        match self.hurst {
            HurstMode::Known { h, g } => check_hurst_pair(h, h, g, g),
            HurstMode::Range { h_low, h_high, g_low, g_high } => check_hurst_pair(h_low, h_high, g_low, g_high),
            HurstMode::Auto { margin } if !(margin >= 0.0) => {
                Err(DccaError::InvalidParameter(format!("Hurst margin {margin} must be non-negative")))
            }
            HurstMode::Auto { .. } => Ok(()),
        }
    }
}

fn check_hurst_pair(hl: f64, hh: f64, gl: f64, gh: f64) -> Result<()> {
    for (lo, hi) in [(hl, hh), (gl, gh)] {
        if !(HURST_MIN <= lo && lo <= hi && hi <= HURST_MAX) {
            return Err(DccaError::InvalidParameter(format!(
                "Hurst values [{lo}, {hi}] outside [{HURST_MIN}, {HURST_MAX}]"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
    None,
}

/// Per-scale part of a test result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleResult {
    pub n: usize,
    pub windows: usize,
    pub discarded: usize,
    pub rho: f64,
    /// `√W ρ / √C_ii`.
    pub standardized: f64,
    /// `√C_ii`.
    pub null_sd: f64,
    /// Critical magnitude for `ρ` itself, `θ* √(C_ii / W)`.
    pub bound: f64,
    /// `+1` above `bound`, `-1` below `-bound`, else 0.
    pub exceeds: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub theta_star: f64,
    pub p_value: f64,
    pub p_value_stderr: f64,
    pub reject: bool,
    pub direction: Direction,
    pub kappa: usize,
    pub level: f64,
    pub provenance: Provenance,
    pub scales: Vec<ScaleResult>,
    pub hurst1: Option<HurstEstimate>,
    pub hurst2: Option<HurstEstimate>,
    pub mc_samples: usize,
    pub seed: u64,
    pub rounding_snaps: usize,
    pub warnings: Vec<String>,
}

/// `√W_i ρ_i / √C_ii`.
pub fn standardize(rho: &[f64], window_counts: &[usize], cov: &NullCovariance) -> Result<Vec<f64>> {
    if rho.len() != cov.dim() || window_counts.len() != rho.len() {
        return Err(DccaError::DimensionMismatch(format!(
            "{} coefficients, {} window counts, covariance of dimension {}",
            rho.len(),
            window_counts.len(),
            cov.dim()
        )));
    }
    Ok(rho.iter().zip(window_counts).zip(cov.diagonal()).map(|((r, &w), c)| r * (w as f64).sqrt() / c.sqrt()).collect())
}

/// `T_κ` of standardized values and the sign branch attaining it.
pub fn test_statistic(standardized: &[f64], kappa: usize) -> Result<(f64, Direction)> {
    let r = standardized.len();
    if kappa == 0 || kappa > r {
        return Err(DccaError::InvalidParameter(format!("kappa = {kappa} outside 1..={r}")));
    }
    let mut sorted = standardized.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let (pos, neg) = (sorted[r - kappa], -sorted[kappa - 1]);
    Ok(if pos >= neg { (pos, Direction::Positive) } else { (neg, Direction::Negative) })
}

/// Per-scale two-sided Bonferroni baseline: rejects when any `|z_i|` exceeds `Φ⁻¹(1 − p/(2r))`.
pub fn bonferroni_reject(standardized: &[f64], level: f64) -> bool {
    let r = standardized.len() as f64;
    let crit = Normal::standard().inverse_cdf(1.0 - level / (2.0 * r));
    standardized.iter().any(|z| z.abs() > crit)
}

/// DFA Hurst estimates of both series, when at least three scales are available.
pub fn estimate_hurst(fl: &FluctuationSet) -> Result<Option<(HurstEstimate, HurstEstimate)>> {
    if fl.scales.len() < 3 {
        return Ok(None);
    }
    let s = fl.scales.scales();
    Ok(Some((hurst_estimate(&fl.f2_auto1, s)?, hurst_estimate(&fl.f2_auto2, s)?)))
}

fn clip_range(center: f64, margin: f64) -> (f64, f64) {
    let lo = (center - margin).clamp(HURST_MIN, HURST_MAX);
    let hi = (center + margin).clamp(HURST_MIN, HURST_MAX);
    (lo, hi)
}

/// Null covariance for a fixed (data-independent) Hurst specification.
pub fn null_covariance(scales: &ScaleSet, mode: HurstMode, table: &CovTable) -> Result<NullCovariance> {
    match mode {
        HurstMode::Known { h, g } => rho_null_cov(scales, h, g, table),
        HurstMode::Range { h_low, h_high, g_low, g_high } => {
            worst_case_cov(scales, (h_low, h_high), (g_low, g_high), table)
        }
        HurstMode::Auto { .. } => {
            Err(DccaError::InvalidParameter("automatic Hurst mode needs data to fix the covariance".into()))
        }
    }
}

/// Covariance, Monte Carlo pool and threshold for one configuration, reusable across
/// series of the same length when the Hurst specification does not depend on the data.
#[derive(Debug, Clone)]
pub struct PreparedTest {
    pub config: TestConfig,
    pub scales: ScaleSet,
    pub cov: NullCovariance,
    pub pool: McPool,
    pub theta_star: f64,
}

impl PreparedTest {
    pub fn new(config: &TestConfig, len: usize, table: &CovTable) -> Result<Self> {
        config.validate()?;
        let scales = ScaleSet::new(config.scales.clone(), config.degree, len)?;
        let cov = null_covariance(&scales, config.hurst, table)?;
        Self::with_cov(config, scales, cov)
    }

    fn with_cov(config: &TestConfig, scales: ScaleSet, cov: NullCovariance) -> Result<Self> {
        let pool = McPool::new(&cov, config.kappa, config.mc_samples, config.seed)?;
        let theta_star = pool.threshold(config.level)?;
        Ok(Self { config: config.clone(), scales, cov, pool, theta_star })
    }

    /// Standardized coefficients of a fluctuation set computed on this scale set.
    pub fn standardized(&self, fl: &FluctuationSet) -> Result<Vec<f64>> {
        standardize(&fl.rho, &self.scales.window_counts(), &self.cov)
    }

    /// Decision without building a full outcome.
    pub fn decide(&self, fl: &FluctuationSet) -> Result<(f64, bool)> {
        let (t, _) = test_statistic(&self.standardized(fl)?, self.config.kappa)?;
        Ok((t, t > self.theta_star))
    }

    pub fn outcome(&self, fl: &FluctuationSet) -> Result<TestOutcome> {
        let hurst = estimate_hurst(fl)?;
        self.outcome_with(fl, hurst)
    }

    fn outcome_with(&self, fl: &FluctuationSet, hurst: Option<(HurstEstimate, HurstEstimate)>) -> Result<TestOutcome> {
        let z = self.standardized(fl)?;
        let kappa = self.config.kappa;
        let (statistic, branch) = test_statistic(&z, kappa)?;
        let p = self.pool.pvalue(statistic);
        let reject = statistic > self.theta_star;
        let windows = self.scales.window_counts();
        let discarded = self.scales.discarded();
        let diag = self.cov.diagonal();
        let scales = (0..z.len())
            .map(|i| {
                let null_sd = diag[i].sqrt();
                let bound = self.theta_star * null_sd / (windows[i] as f64).sqrt();
                let rho = fl.rho[i];
                ScaleResult {
                    n: self.scales.scales()[i],
                    windows: windows[i],
                    discarded: discarded[i],
                    rho,
                    standardized: z[i],
                    null_sd,
                    bound,
                    exceeds: if rho > bound {
                        1
                    } else if rho < -bound {
                        -1
                    } else {
                        0
                    },
                }
            })
            .collect();
        let mut warnings = Vec::new();
        if let Some((a, b)) = &hurst {
            if a.h_hat < LOW_HURST_WARNING && b.h_hat < LOW_HURST_WARNING {
                let msg = format!(
                    "estimated Hurst exponents {:.3} and {:.3} are both below {LOW_HURST_WARNING}: \
                     long-range dependence is doubtful and the test premise may not hold",
                    a.h_hat, b.h_hat
                );
                warnings.push(msg);
            }
        }
        if fl.rounding_snaps > 0 {
            warnings.push(format!("{} coefficient(s) rounded to +/-1", fl.rounding_snaps));
        }
        Ok(TestOutcome {
            statistic,
            theta_star: self.theta_star,
            p_value: p.value,
            p_value_stderr: p.stderr,
            reject,
            direction: if reject { branch } else { Direction::None },
            kappa,
            level: self.config.level,
            provenance: self.cov.provenance,
            scales,
            hurst1: hurst.map(|h| h.0),
            hurst2: hurst.map(|h| h.1),
            mc_samples: self.pool.samples(),
            seed: self.config.seed,
            rounding_snaps: fl.rounding_snaps,
            warnings,
        })
    }
}

/// Runs the full test on a series pair.
pub fn stat_dcca(pair: &SeriesPair, config: &TestConfig, table: &CovTable) -> Result<(TestOutcome, FluctuationSet)> {
    config.validate()?;
    if table.degree() != config.degree {
        return Err(DccaError::InvalidParameter(format!(
            "table degree {} differs from configured degree {}",
            table.degree(),
            config.degree
        )));
    }
    let scales = ScaleSet::new(config.scales.clone(), config.degree, pair.len())?;
    let fl = FluctuationSet::compute(pair, &scales)?;
    let hurst = estimate_hurst(&fl)?;
    let cov = match config.hurst {
        HurstMode::Auto { margin } => {
            let (a, b) = hurst.ok_or_else(|| {
                DccaError::InvalidParameter("automatic Hurst mode needs at least three scales".into())
            })?;
            let hr = clip_range(a.h_hat, margin);
            let gr = clip_range(b.h_hat, margin);
            worst_case_cov(&scales, hr, gr, table)?
        }
        mode => null_covariance(&scales, mode, table)?,
    };
    let prepared = PreparedTest::with_cov(config, scales, cov)?;
    let outcome = prepared.outcome_with(&fl, hurst)?;
    Ok((outcome, fl))
}
