//! Gaussian Monte Carlo for exceedance probabilities of the standardized coefficient vector.
//!
//! A pool of draws `y ~ N(0, R)` (`R` the correlation matrix of the null covariance) is
//! generated once and reused for thresholds and p-values, so every quantity derived
//! from one pool uses common random numbers. Draws are produced in fixed-size chunks
//! with one ChaCha stream per chunk, which makes the pool independent of thread count.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::NullCovariance;
use crate::error::{DccaError, Result};

const CHUNK: usize = 8192;

/// Largest dimension accepted (the binomial bound uses exact 128-bit integers).
pub const MAX_DIM: usize = 64;

/// Smallest pool size accepted by the public probability routines.
pub const MIN_SAMPLES: usize = 100_000;

/// Upper end of the threshold search interval.
pub const THETA_MAX: f64 = 50.0;

/// `C(r, k)` in exact integer arithmetic.
pub fn binomial(r: usize, k: usize) -> Result<u128> {
    if k > r || r > MAX_DIM {
        return Err(DccaError::InvalidParameter(format!("binomial({r}, {k}) outside supported range")));
    }
    let k = k.min(r - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Exact at each step: acc · (r - i) is divisible by (i + 1).
        acc = acc * (r - i) as u128 / (i + 1) as u128;
    }
    Ok(acc)
}

/// Lower-triangular `L` with `L Lᵀ = R`; eigen-based when `R` is singular within tolerance.
fn factor(corr: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(ch) = corr.clone().cholesky() {
        return Ok(ch.l());
    }
    let trace = corr.trace();
    let eig = SymmetricEigen::new(corr.clone());
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-8 * trace {
        return Err(DccaError::Factorization(format!(
            "covariance not positive semidefinite (smallest eigenvalue {min_eig:e})"
        )));
    }
    let sqrt = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt))
}

/// Correlation matrix of a covariance.
fn correlation(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let d: Vec<f64> = (0..cov.nrows()).map(|i| cov[(i, i)].sqrt()).collect();
    DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| cov[(i, j)] / (d[i] * d[j]))
}

/// `max(κ-th largest of y, κ-th largest of -y)`.
pub fn kappa_statistic(y: &mut [f64], kappa: usize) -> f64 {
    let r = y.len();
    if kappa == r || kappa == 1 {
        let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        return if kappa == r { lo.max(-hi) } else { hi.max(-lo) };
    }
    let upper = *y.select_nth_unstable_by(r - kappa, f64::total_cmp).1;
    let lower = *y.select_nth_unstable_by(kappa - 1, f64::total_cmp).1;
    upper.max(-lower)
}

/// Probability estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Sorted Monte Carlo statistics for one correlation structure and `κ`.
#[derive(Debug, Clone)]
pub struct McPool {
    kappa: usize,
    dim: usize,
    /// Sorted `T_κ` of each draw.
    stat: Vec<f64>,
    /// Sorted `min_{i<κ} y_i` of each draw (only for `κ < r`).
    lead: Vec<f64>,
    multiplier: u128,
}

impl McPool {
    pub fn new(cov: &NullCovariance, kappa: usize, samples: usize, seed: u64) -> Result<Self> {
        Self::from_matrix(&cov.matrix, kappa, samples, seed)
    }

    pub fn from_matrix(cov: &DMatrix<f64>, kappa: usize, samples: usize, seed: u64) -> Result<Self> {
        let r = cov.nrows();
        if r == 0 || r > MAX_DIM || !cov.is_square() {
            return Err(DccaError::DimensionMismatch(format!("covariance dimension {r} outside 1..={MAX_DIM}")));
        }
        if kappa == 0 || kappa > r {
            return Err(DccaError::InvalidParameter(format!("kappa = {kappa} outside 1..={r}")));
        }
        if samples == 0 {
            return Err(DccaError::InvalidParameter("sample count must be positive".into()));
        }
        let l = factor(&correlation(cov))?;
        let l_rows: Vec<Vec<f64>> = (0..r).map(|i| (0..=i.min(r - 1)).map(|j| l[(i, j)]).collect()).collect();
        let full_rows: Vec<Vec<f64>> = (0..r).map(|i| l.row(i).iter().copied().collect()).collect();
        let lower = (0..r).all(|i| (i + 1..r).all(|j| l[(i, j)] == 0.0));
        let with_lead = kappa < r;
        let chunks = samples.div_ceil(CHUNK);
        let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let count = CHUNK.min(samples - c * CHUNK);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let mut z = vec![0.0; r];
                let mut y = vec![0.0; r];
                let mut stat = Vec::with_capacity(count);
                let mut lead = Vec::with_capacity(if with_lead { count } else { 0 });
                for _ in 0..count {
                    z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                    let rows = if lower { &l_rows } else { &full_rows };
                    for (yi, row) in y.iter_mut().zip(rows) {
                        *yi = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                    }
                    if with_lead {
                        lead.push(y[..kappa].iter().copied().fold(f64::INFINITY, f64::min));
                    }
                    stat.push(kappa_statistic(&mut y, kappa));
                }
                (stat, lead)
            })
            .collect();
        let mut stat = Vec::with_capacity(samples);
        let mut lead = Vec::with_capacity(if with_lead { samples } else { 0 });
        for (s, l) in parts {
            stat.extend(s);
            lead.extend(l);
        }
        stat.par_sort_unstable_by(f64::total_cmp);
        lead.par_sort_unstable_by(f64::total_cmp);
        let multiplier = if with_lead { 2 * binomial(r, kappa)? } else { 1 };
        Ok(Self { kappa, dim: r, stat, lead, multiplier })
    }

    pub fn samples(&self) -> usize {
        self.stat.len()
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `2·C(r, κ)` for `κ < r`, else 1.
    pub fn multiplier(&self) -> u128 {
        self.multiplier
    }

    fn count_above(sorted: &[f64], theta: f64) -> usize {
        sorted.len() - sorted.partition_point(|&v| v <= theta)
    }

    fn estimate(&self, count: usize, factor: f64) -> Estimate {
        let s = self.samples() as f64;
        let q = count as f64 / s;
        Estimate { value: (factor * q).min(1.0), stderr: factor * (q * (1.0 - q) / s).sqrt() }
    }

    /// `Pr(A(θ))`: some `κ` standardized coordinates all exceed `θ` or all fall below `-θ`.
    pub fn exceedance(&self, theta: f64) -> Estimate {
        self.estimate(Self::count_above(&self.stat, theta), 1.0)
    }

    /// `Pr(y_1 > θ, ..., y_κ > θ)` for the leading block (requires `κ < r`).
    pub fn lead_exceedance(&self, theta: f64) -> Option<Estimate> {
        (self.kappa < self.dim).then(|| self.estimate(Self::count_above(&self.lead, theta), 1.0))
    }

    fn tail_source(&self) -> (&[f64], f64) {
        if self.kappa < self.dim {
            (&self.lead, self.multiplier as f64)
        } else {
            (&self.stat, 1.0)
        }
    }

    /// Conservative p-value of an observed statistic, floored at `1/samples`.
    ///
    /// `κ = r`: the estimated `Pr(A(T))`. `κ < r`: `min(1, 2 C(r,κ) Pr(lead block > T))`.
    /// Critical regions exist only for `θ ≥ 0`, so a non-positive statistic, which no
    /// level rejects, gets `p = 1`.
    pub fn pvalue(&self, t_obs: f64) -> Estimate {
        if t_obs <= 0.0 {
            return Estimate { value: 1.0, stderr: 0.0 };
        }
        let (sorted, factor) = self.tail_source();
        let mut e = self.estimate(Self::count_above(sorted, t_obs), factor);
        e.value = e.value.max(1.0 / self.samples() as f64);
        e
    }

    /// Smallest `θ ∈ [0, 50]` whose estimated (bounded) exceedance probability is below `level`.
    ///
    /// The estimate is a step function of `θ` over the pool, so the bisection limit is the
    /// order statistic located directly.
    pub fn threshold(&self, level: f64) -> Result<f64> {
        if !(level > 0.0 && level < 1.0) {
            return Err(DccaError::InvalidParameter(format!("level {level} outside (0, 1)")));
        }
        let (sorted, factor) = self.tail_source();
        let s = sorted.len();
        // Largest admissible count c with factor · c / s < level.
        let allowed = ((level * s as f64 / factor).ceil() as usize).saturating_sub(1).min(s);
        let theta = if allowed >= s { f64::NEG_INFINITY } else { sorted[s - allowed - 1] };
        if theta > THETA_MAX {
            return Err(DccaError::NonConvergent { cap: THETA_MAX as usize });
        }
        Ok(theta.max(0.0))
    }
}

/// Monte Carlo estimate of `Pr(A(θ))` under `N(0, C)`.
pub fn exceedance_prob_mc(
    cov: &NullCovariance,
    theta: f64,
    kappa: usize,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    check_samples(samples)?;
    Ok(McPool::new(cov, kappa, samples, seed)?.exceedance(theta))
}

/// Critical threshold `θ*` at level `p`.
pub fn crit_threshold(cov: &NullCovariance, level: f64, kappa: usize, samples: usize, seed: u64) -> Result<f64> {
    check_samples(samples)?;
    McPool::new(cov, kappa, samples, seed)?.threshold(level)
}

/// Conservative p-value of an observed `T_κ`.
pub fn pvalue_bound_kappa(
    cov: &NullCovariance,
    t_obs: f64,
    kappa: usize,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    check_samples(samples)?;
    Ok(McPool::new(cov, kappa, samples, seed)?.pvalue(t_obs))
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(DccaError::InvalidParameter(format!("Monte Carlo sample count {samples} below {MIN_SAMPLES}")));
    }
    Ok(())
}
