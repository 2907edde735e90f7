//! Simulation studies: null calibration, non-Gaussian noise, short-range contamination,
//! worst-case dominance, power and speed. Each study returns a CSV-ready table.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{rho_null_cov, worst_case_cov, CovTable};
use crate::error::{DccaError, Result};
use crate::fbm::FbmParams;
use crate::fluctuation::FluctuationSet;
use crate::series::{make_scales, ScaleSet, SeriesPair};
use crate::simulate::{gen_mixture, replicate_seed, BfgnGenerator, SimSpec};
use crate::testkit::{
    bonferroni_reject, surrogate_pvalue, test_statistic, HurstMode, McPool, PreparedTest, TestConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Calibration,
    NonGaussian,
    ShortRange,
    UpperBound,
    Power,
    Speed,
}

impl Study {
    pub const ALL: [Study; 6] =
        [Study::Calibration, Study::NonGaussian, Study::ShortRange, Study::UpperBound, Study::Power, Study::Speed];

    pub fn name(self) -> &'static str {
        match self {
            Study::Calibration => "calibration",
            Study::NonGaussian => "nongaussian",
            Study::ShortRange => "shortrange",
            Study::UpperBound => "upperbound",
            Study::Power => "power",
            Study::Speed => "speed",
        }
    }
}

impl FromStr for Study {
    type Err = DccaError;

    fn from_str(s: &str) -> Result<Self> {
        Study::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| DccaError::InvalidParameter(format!("unknown study '{s}'")))
    }
}

/// Knobs shared by the studies. Fields a study does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub len: usize,
    pub reps: usize,
    pub seed: u64,
    pub degree: usize,
    /// `(n_min, n_max, r)`; `None` means `(20, N/20, 10)`.
    pub scales: Option<(usize, usize, usize)>,
    /// `None` means `κ = r`.
    pub kappa: Option<usize>,
    pub levels: Vec<f64>,
    pub mc_samples: usize,
    pub h: f64,
    pub g: f64,
    /// Exponent of the non-Gaussian transform.
    pub phi: f64,
    /// Cross-correlations for the power study.
    pub rhos: Vec<f64>,
    /// Surrogates for the speed comparison.
    pub surrogates: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            len: 10_000,
            reps: 200,
            seed: 1,
            degree: 1,
            scales: None,
            kappa: None,
            levels: vec![0.05],
            mc_samples: 100_000,
            h: 0.7,
            g: 0.8,
            phi: 3.0,
            rhos: vec![0.0, 0.05, 0.1, 0.2],
            surrogates: 1000,
        }
    }
}

impl StudyOptions {
    pub fn scale_set(&self) -> Result<ScaleSet> {
        let (lo, hi, r) = self.scales.unwrap_or((20, self.len / 20, 10));
        make_scales(self.len, lo, hi, r, self.degree)
    }

    pub fn config(&self, hurst: HurstMode, level: f64) -> Result<TestConfig> {
        let scales = self.scale_set()?;
        let mut cfg = TestConfig::new(scales.scales().to_vec(), self.degree);
        cfg.kappa = self.kappa.unwrap_or(cfg.kappa);
        cfg.level = level;
        cfg.hurst = hurst;
        cfg.mc_samples = self.mc_samples;
        cfg.seed = self.seed;
        Ok(cfg)
    }

    fn first_level(&self) -> Result<f64> {
        self.levels.first().copied().ok_or_else(|| DccaError::InvalidParameter("no test level given".into()))
    }
}

/// Header plus rows of string cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl StudyTable {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// Rejection count at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionRate {
    pub level: f64,
    pub threshold: f64,
    pub rejections: usize,
    pub reps: usize,
}

impl RejectionRate {
    pub fn rate(&self) -> f64 {
        self.rejections as f64 / self.reps as f64
    }

    pub fn stderr(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.reps as f64).sqrt()
    }
}

/// `T_κ` for each replicate, generated in parallel from derived seeds.
fn replicate_statistics(
    prepared: &PreparedTest,
    reps: usize,
    seed: u64,
    draw: impl Fn(u64) -> Result<SeriesPair> + Sync,
) -> Result<Vec<Vec<f64>>> {
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let pair = draw(replicate_seed(seed, i as u64))?;
            let fl = FluctuationSet::compute(&pair, &prepared.scales)?;
            prepared.standardized(&fl)
        })
        .collect()
}

fn rates_at_levels(prepared: &PreparedTest, z: &[Vec<f64>], levels: &[f64]) -> Result<Vec<RejectionRate>> {
    let stats: Vec<f64> = z.iter().map(|v| Ok(test_statistic(v, prepared.config.kappa)?.0)).collect::<Result<_>>()?;
    levels
        .iter()
        .map(|&level| {
            let threshold = prepared.pool.threshold(level)?;
            let rejections = stats.iter().filter(|&&t| t > threshold).count();
            Ok(RejectionRate { level, threshold, rejections, reps: stats.len() })
        })
        .collect()
}

/// Type I error rates of the known-Hurst test on independent fGn pairs, Gaussian
/// (`phi = None`) or driven by `sign(g)|g|^φ` noise.
pub fn null_rejection_rates(opts: &StudyOptions, table: &CovTable, phi: Option<f64>) -> Result<Vec<RejectionRate>> {
    let cfg = opts.config(HurstMode::Known { h: opts.h, g: opts.g }, opts.first_level()?)?;
    let prepared = PreparedTest::new(&cfg, opts.len, table)?;
    let generator = BfgnGenerator::new(opts.len, &FbmParams::null(opts.h, opts.g))?;
    let z = replicate_statistics(&prepared, opts.reps, opts.seed, |s| match phi {
        None => generator.generate(s),
        Some(phi) => generator.generate_nongaussian(phi, s),
    })?;
    rates_at_levels(&prepared, &z, &opts.levels)
}

fn rate_rows(study: &str, n: usize, rates: &[RejectionRate]) -> StudyTable {
    let mut t = StudyTable::new(&["study", "N", "level", "threshold", "reps", "rejections", "rate", "stderr"]);
    for r in rates {
        t.push(vec![
            study.into(),
            n.to_string(),
            r.level.to_string(),
            r.threshold.to_string(),
            r.reps.to_string(),
            r.rejections.to_string(),
            r.rate().to_string(),
            r.stderr().to_string(),
        ]);
    }
    t
}

/// Joint test and per-scale Bonferroni baseline on short-range-contaminated nulls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortRangeResult {
    pub reps: usize,
    pub joint_rejections: usize,
    pub bonferroni_rejections: usize,
}

/// Mixtures of independent `H = G = 0.9` fGn with a correlated high-passed white-noise
/// pair, tested with the null covariance of the long-range component.
pub fn short_range(opts: &StudyOptions, table: &CovTable) -> Result<ShortRangeResult> {
    let level = opts.first_level()?;
    let cfg = opts.config(HurstMode::Known { h: 0.9, g: 0.9 }, level)?;
    let prepared = PreparedTest::new(&cfg, opts.len, table)?;
    let z = replicate_statistics(&prepared, opts.reps, opts.seed, |s| gen_mixture(&SimSpec::mixture(opts.len, s)))?;
    let mut joint = 0;
    let mut bonf = 0;
    for v in &z {
        joint += (test_statistic(v, cfg.kappa)?.0 > prepared.theta_star) as usize;
        bonf += bonferroni_reject(v, level) as usize;
    }
    Ok(ShortRangeResult { reps: opts.reps, joint_rejections: joint, bonferroni_rejections: bonf })
}

/// Per-scale rejection bounds on `ρ` at one `(H, G)` node next to the worst-case bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub h: f64,
    pub g: f64,
    pub exact: Vec<f64>,
    pub worst: Vec<f64>,
}

impl BoundComparison {
    pub fn violations(&self) -> usize {
        self.exact.iter().zip(&self.worst).filter(|(e, w)| w < e).count()
    }
}

fn rho_bounds(cov: &crate::NullCovariance, scales: &ScaleSet, theta: f64) -> Vec<f64> {
    cov.diagonal().iter().zip(scales.window_counts()).map(|(c, w)| theta * (c / w as f64).sqrt()).collect()
}

/// Exact-(H, G) rejection bounds at every table node against the worst case over the
/// whole tabulated range. All thresholds share one random-number seed.
pub fn upper_bound(opts: &StudyOptions, table: &CovTable) -> Result<Vec<BoundComparison>> {
    let level = opts.first_level()?;
    let scales = opts.scale_set()?;
    let kappa = opts.kappa.unwrap_or(scales.len());
    let grid = table.grid().to_vec();
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let worst = worst_case_cov(&scales, (lo, hi), (lo, hi), table)?;
    let theta_w = McPool::new(&worst, kappa, opts.mc_samples, opts.seed)?.threshold(level)?;
    let worst_bounds = rho_bounds(&worst, &scales, theta_w);
    let nodes: Vec<(f64, f64)> = grid.iter().flat_map(|&h| grid.iter().map(move |&g| (h, g))).collect();
    nodes
        .par_iter()
        .map(|&(h, g)| {
            let cov = rho_null_cov(&scales, h, g, table)?;
            let theta = McPool::new(&cov, kappa, opts.mc_samples, opts.seed)?.threshold(level)?;
            Ok(BoundComparison { h, g, exact: rho_bounds(&cov, &scales, theta), worst: worst_bounds.clone() })
        })
        .collect()
}

/// Rejection rate per cross-correlation value.
pub fn power(opts: &StudyOptions, table: &CovTable) -> Result<Vec<(f64, RejectionRate)>> {
    let level = opts.first_level()?;
    let cfg = opts.config(HurstMode::Known { h: opts.h, g: opts.g }, level)?;
    let prepared = PreparedTest::new(&cfg, opts.len, table)?;
    opts.rhos
        .iter()
        .enumerate()
        .map(|(k, &rho)| {
            let generator = BfgnGenerator::new(opts.len, &FbmParams::correlated(opts.h, opts.g, rho))?;
            let seed = replicate_seed(opts.seed, 1_000_000 + k as u64);
            let z = replicate_statistics(&prepared, opts.reps, seed, |s| generator.generate(s))?;
            Ok((rho, rates_at_levels(&prepared, &z, &[level])?[0]))
        })
        .collect()
}

/// Wall-clock comparison of the tabulated-asymptotics p-value with a surrogate p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedResult {
    pub asymptotic_seconds: f64,
    pub surrogate_seconds: f64,
    pub asymptotic_p: f64,
    pub surrogate_p: f64,
    pub surrogates: usize,
}

impl SpeedResult {
    pub fn speedup(&self) -> f64 {
        self.surrogate_seconds / self.asymptotic_seconds
    }
}

pub fn speed(opts: &StudyOptions, table: &CovTable) -> Result<SpeedResult> {
    let level = opts.first_level()?;
    let cfg = opts.config(HurstMode::Known { h: opts.h, g: opts.g }, level)?;
    let scales = opts.scale_set()?;
    let pair = BfgnGenerator::new(opts.len, &FbmParams::null(opts.h, opts.g))?.generate(opts.seed)?;
    let fl = FluctuationSet::compute(&pair, &scales)?;

    let start = Instant::now();
    let prepared = PreparedTest::new(&cfg, opts.len, table)?;
    let asymptotic_p = prepared.outcome(&fl)?.p_value;
    let asymptotic_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let sur = surrogate_pvalue(&fl, opts.h, opts.g, cfg.kappa, opts.surrogates, opts.seed)?;
    let surrogate_seconds = start.elapsed().as_secs_f64();
    Ok(SpeedResult {
        asymptotic_seconds,
        surrogate_seconds,
        asymptotic_p,
        surrogate_p: sur.p_value,
        surrogates: opts.surrogates,
    })
}

/// Runs a study and formats its result.
pub fn run_study(study: Study, opts: &StudyOptions, table: &CovTable) -> Result<StudyTable> {
    match study {
        Study::Calibration => Ok(rate_rows("calibration", opts.len, &null_rejection_rates(opts, table, None)?)),
        Study::NonGaussian => {
            let gauss = null_rejection_rates(opts, table, None)?;
            let non = null_rejection_rates(opts, table, Some(opts.phi))?;
            let mut t = rate_rows("gaussian", opts.len, &gauss);
            t.rows.extend(rate_rows(&format!("nongaussian_phi{}", opts.phi), opts.len, &non).rows);
            Ok(t)
        }
        Study::ShortRange => {
            let r = short_range(opts, table)?;
            let mut t = StudyTable::new(&["method", "N", "reps", "rejections", "rate"]);
            for (name, k) in [("joint", r.joint_rejections), ("bonferroni", r.bonferroni_rejections)] {
                t.push(vec![
                    name.into(),
                    opts.len.to_string(),
                    r.reps.to_string(),
                    k.to_string(),
                    (k as f64 / r.reps as f64).to_string(),
                ]);
            }
            Ok(t)
        }
        Study::UpperBound => {
            let scales = opts.scale_set()?;
            let mut t = StudyTable::new(&["h", "g", "n", "exact_bound", "worst_bound"]);
            for c in upper_bound(opts, table)? {
                for (i, &n) in scales.scales().iter().enumerate() {
                    t.push(vec![
                        c.h.to_string(),
                        c.g.to_string(),
                        n.to_string(),
                        c.exact[i].to_string(),
                        c.worst[i].to_string(),
                    ]);
                }
            }
            Ok(t)
        }
        Study::Power => {
            let mut t = StudyTable::new(&["rho", "N", "reps", "rejections", "rate", "stderr"]);
            for (rho, r) in power(opts, table)? {
                t.push(vec![
                    rho.to_string(),
                    opts.len.to_string(),
                    r.reps.to_string(),
                    r.rejections.to_string(),
                    r.rate().to_string(),
                    r.stderr().to_string(),
                ]);
            }
            Ok(t)
        }
        Study::Speed => {
            let r = speed(opts, table)?;
            let mut t = StudyTable::new(&["method", "N", "seconds", "p_value"]);
            t.push(vec![
                "asymptotic".into(),
                opts.len.to_string(),
                r.asymptotic_seconds.to_string(),
                r.asymptotic_p.to_string(),
            ]);
            t.push(vec![
                format!("surrogate_{}", r.surrogates),
                opts.len.to_string(),
                r.surrogate_seconds.to_string(),
                r.surrogate_p.to_string(),
            ]);
            Ok(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        for s in Study::ALL {
            assert_eq!(s.name().parse::<Study>().unwrap(), s);
        }
        assert!("bogus".parse::<Study>().is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = StudyTable::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,2\n");
    }

    #[test]
    fn default_scales() {
        let s = StudyOptions::default().scale_set().unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!((s.scales()[0], s.scales()[9]), (20, 500));
    }
}
