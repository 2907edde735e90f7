//! Bivariate fractional Brownian motion covariance kernel and window covariance blocks.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{DccaError, Result};

/// Half-width of the band around `H + G = 1` where the logarithmic kernel is used.
pub const LOG_BRANCH_TOL: f64 = 1e-9;

/// Largest window accepted by [`window_cov_block`].
pub const MAX_BLOCK: usize = 4096;

/// Parameters of a bivariate fBm `(X₁, X₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmParams {
    pub h: f64,
    pub g: f64,
    /// Instantaneous correlation of the increments at lag 0 (when `η = 0`).
    pub rho: f64,
    /// Antisymmetric (time-reversal) cross parameter.
    pub eta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl FbmParams {
    /// Independent components with unit scale.
    pub fn null(h: f64, g: f64) -> Self {
        Self { h, g, rho: 0.0, eta: 0.0, sigma1: 1.0, sigma2: 1.0 }
    }

    pub fn correlated(h: f64, g: f64, rho: f64) -> Self {
        Self { rho, ..Self::null(h, g) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("H", self.h), ("G", self.g)] {
            if !(0.5..1.0).contains(&v) {
                return Err(DccaError::InvalidParameter(format!("{name} = {v} outside [0.5, 1)")));
            }
        }
        if !(self.rho.abs() <= 1.0) {
            return Err(DccaError::InvalidParameter(format!("rho = {} outside [-1, 1]", self.rho)));
        }
        if !self.eta.is_finite() {
            return Err(DccaError::InvalidParameter("eta must be finite".into()));
        }
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0) || !self.sigma1.is_finite() || !self.sigma2.is_finite() {
            return Err(DccaError::InvalidParameter("sigma1 and sigma2 must be positive".into()));
        }
        Ok(())
    }

    pub fn is_null(&self) -> bool {
        self.rho == 0.0 && self.eta == 0.0
    }

    fn log_branch(&self) -> bool {
        (self.h + self.g - 1.0).abs() < LOG_BRANCH_TOL
    }

    /// Kernel term depending on the lag `u = t - s` only.
    fn lag_term(&self, u: f64) -> f64 {
        if self.log_branch() {
            self.rho * u.abs() + self.eta * xlogx(u)
        } else {
            (self.rho - self.eta * sgn(u)) * u.abs().powf(self.h + self.g)
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `x ln|x|` with `0 ln 0 = 0`.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

/// `E[X₁(s) X₂(t)]` for the bivariate fBm.
///
/// On the logarithmic branch the antisymmetric part is `η (t ln t − s ln s − (t−s) ln|t−s|)`,
/// the form that vanishes at `t = 0` as a covariance with `X₂(0) = 0` must.
pub fn fbm_cross_cov(s: f64, t: f64, p: &FbmParams) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(DccaError::InvalidParameter(format!("negative time ({s}, {t})")));
    }
    let scale = 0.5 * p.sigma1 * p.sigma2;
    let v = if p.log_branch() {
        p.rho * (s + t - (t - s).abs()) + p.eta * (xlogx(t) - xlogx(s) - xlogx(t - s))
    } else {
        let a = p.h + p.g;
        (p.rho + p.eta * sgn(s)) * s.powf(a) + (p.rho - p.eta * sgn(t)) * t.powf(a)
            - (p.rho - p.eta * sgn(t - s)) * (t - s).abs().powf(a)
    };
    Ok(scale * v)
}

/// Stationary part of the fBm autocovariance, `-|u|^{2H} / 2`.
///
/// Differs from the full kernel by terms depending on one time argument only,
/// which any detrending of degree `≥ 0` annihilates.
pub(crate) fn stationary_kernel(u: f64, h: f64) -> f64 {
    -0.5 * u.abs().powf(2.0 * h)
}

/// fBm autocovariance `(σ²/2)(s^{2H} + t^{2H} − |t−s|^{2H})`.
pub fn fbm_auto_cov(s: f64, t: f64, h: f64, sigma: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * sigma * sigma * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

/// Autocovariance of fractional Gaussian noise at integer lag `k`.
pub fn fgn_autocov(k: i64, h: f64, sigma: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(DccaError::InvalidParameter(format!("H = {h} outside (0, 1)")));
    }
    let e = 2.0 * h;
    let k = k.unsigned_abs() as f64;
    let v = (k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e);
    Ok(0.5 * sigma * sigma * v)
}

/// `E[Y₁(i) Y₂(i + k)]` for the increments of the bivariate fBm, any integer `k`.
pub fn fgn_cross_cov(k: i64, p: &FbmParams) -> f64 {
    let k = k as f64;
    let w = |u: f64| p.lag_term(u);
    0.5 * p.sigma1 * p.sigma2 * (w(k + 1.0) - 2.0 * w(k) + w(k - 1.0))
}

/// Which component pair a covariance block describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Auto1,
    Auto2,
    Cross,
}

/// Covariance between the profile values of a window of length `n` starting at time 1
/// and a window of length `m` starting at time `j·n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovBlock {
    pub matrix: DMatrix<f64>,
    pub offset: usize,
    pub n: usize,
    pub m: usize,
    pub kind: PairKind,
}

/// Builds the dense `n × m` block with entry `(a, b)` = `E[X(a) X'(j·n + b)]`, `a, b ≥ 1`.
pub fn window_cov_block(n: usize, m: usize, j: usize, p: &FbmParams, kind: PairKind) -> Result<CovBlock> {
    if n < 2 || m < 2 || n > MAX_BLOCK || m > MAX_BLOCK {
        return Err(DccaError::InfeasibleScales(format!("block sizes ({n}, {m}) outside [2, {MAX_BLOCK}]")));
    }
    p.validate()?;
    let shift = (j * n) as f64;
    let matrix = match kind {
        PairKind::Auto1 => {
            DMatrix::from_fn(n, m, |a, b| fbm_auto_cov((a + 1) as f64, shift + (b + 1) as f64, p.h, p.sigma1))
        }
        PairKind::Auto2 => {
            DMatrix::from_fn(n, m, |a, b| fbm_auto_cov((a + 1) as f64, shift + (b + 1) as f64, p.g, p.sigma2))
        }
        PairKind::Cross => {
            let mut out = DMatrix::zeros(n, m);
            for a in 0..n {
                for b in 0..m {
                    out[(a, b)] = fbm_cross_cov((a + 1) as f64, shift + (b + 1) as f64, p)?;
                }
            }
            out
        }
    };
    let block = CovBlock { matrix, offset: j, n, m, kind };
    if j == 0 && n == m && kind != PairKind::Cross {
        check_psd(&block.matrix)?;
    }
    Ok(block)
}

/// Fails unless the smallest eigenvalue of symmetric `a` is at least `−1e−8·trace(a)`.
pub fn check_psd(a: &DMatrix<f64>) -> Result<()> {
    let trace = a.trace();
    let min_eig = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-8 * trace.abs() {
        Err(DccaError::NotPsd { min_eig, trace })
    } else {
        Ok(())
    }
}
