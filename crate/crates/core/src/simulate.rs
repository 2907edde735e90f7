//! Synthetic series: bivariate fractional Gaussian noise, filtered non-Gaussian noise,
//! short-range-contaminated mixtures and polynomial trends.
//!
//! The bivariate fGn generator uses circulant embedding of size `2N` with a per-frequency
//! 2×2 Hermitian square root; when the embedding has a negative eigenvalue it falls
//! back to a dense Cholesky factor of the joint `2N × 2N` covariance.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{DccaError, Result};
use crate::fbm::{fgn_autocov, fgn_cross_cov, FbmParams};
use crate::series::SeriesPair;

/// Largest length for which the dense joint factorization is attempted.
pub const DENSE_MAX: usize = 2048;

type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    Bfgn,
    NonGaussian,
    Mixture,
    Trended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendTarget {
    Profile,
    Increments,
}

/// Full description of one simulated pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub kind: SimKind,
    pub len: usize,
    pub params: FbmParams,
    /// Exponent of the `sign(g)|g|^φ` transform for non-Gaussian noise.
    pub phi: f64,
    /// High-pass cutoff as a fraction of the sampling frequency (mixture).
    pub cutoff: f64,
    /// Variance share of the high-passed white-noise pair (mixture).
    pub weight: f64,
    /// Correlation of the white-noise pair before filtering (mixture).
    pub noise_corr: f64,
    pub trend1: Vec<f64>,
    pub trend2: Vec<f64>,
    pub trend_target: TrendTarget,
    pub seed: u64,
}

impl SimSpec {
    pub fn bfgn(len: usize, params: FbmParams, seed: u64) -> Self {
        Self {
            kind: SimKind::Bfgn,
            len,
            params,
            phi: 3.0,
            cutoff: 0.45,
            weight: 0.5,
            noise_corr: 0.5,
            trend1: Vec::new(),
            trend2: Vec::new(),
            trend_target: TrendTarget::Profile,
            seed,
        }
    }

    pub fn nongaussian(len: usize, params: FbmParams, phi: f64, seed: u64) -> Self {
        Self { kind: SimKind::NonGaussian, phi, ..Self::bfgn(len, params, seed) }
    }

    /// Independent `H = G = 0.9` fGn plus a correlated high-passed white-noise pair.
    pub fn mixture(len: usize, seed: u64) -> Self {
        Self { kind: SimKind::Mixture, ..Self::bfgn(len, FbmParams::null(0.9, 0.9), seed) }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DccaError::InvalidParameter(m));
        if self.len < 16 {
            return bad(format!("length {} below 16", self.len));
        }
        self.params.validate()?;
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return bad(format!("phi = {} must be positive", self.phi));
        }
        if !(self.cutoff > 0.0 && self.cutoff <= 0.5) {
            return bad(format!("cutoff = {} outside (0, 0.5]", self.cutoff));
        }
        if self.kind == SimKind::Mixture && !(self.weight > 0.0 && self.weight < 1.0) && self.weight != 0.0 {
            return bad(format!("mixture weight = {} outside [0, 1)", self.weight));
        }
        if !(self.noise_corr.abs() <= 1.0) {
            return bad(format!("noise correlation = {} outside [-1, 1]", self.noise_corr));
        }
        if self.trend1.iter().chain(&self.trend2).any(|c| !c.is_finite()) {
            return bad("trend coefficients must be finite".into());
        }
        Ok(())
    }
}

/// Seed of replicate `index` derived from a master seed.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Draws one pair according to `spec.kind`.
pub fn simulate(spec: &SimSpec) -> Result<SeriesPair> {
    spec.validate()?;
    match spec.kind {
        SimKind::Bfgn => gen_bfgn(spec),
        SimKind::NonGaussian => gen_nongaussian(spec),
        SimKind::Mixture => gen_mixture(spec),
        SimKind::Trended => {
            let pair = gen_bfgn(spec)?;
            add_trend(&pair, &spec.trend1, &spec.trend2, spec.trend_target)
        }
    }
}

/// 2×2 Hermitian matrix `[[a, b], [conj b, c]]`.
#[derive(Debug, Clone, Copy)]
struct Herm2 {
    a: f64,
    b: C64,
    c: f64,
}

impl Herm2 {
    fn eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * (self.a + self.c);
        let rad = (0.25 * (self.a - self.c).powi(2) + self.b.norm_sqr()).sqrt();
        (mid - rad, mid + rad)
    }

    /// Principal square root after clipping eigenvalues at zero; entries `[[p, q], [conj q, s]]`.
    fn sqrt(&self) -> [[C64; 2]; 2] {
        let (lo, hi) = self.eigenvalues();
        let (lo, hi) = (lo.max(0.0), hi.max(0.0));
        if hi - lo <= 1e-300 {
            let s = C64::new(hi.sqrt(), 0.0);
            return [[s, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), s]];
        }
        // sqrt = √hi P + √lo (I - P) with P = (M - lo I)/(hi - lo) on the unclipped spectrum.
        let (lo_raw, _) = self.eigenvalues();
        let span = hi - lo_raw;
        let pa = (self.a - lo_raw) / span;
        let pc = (self.c - lo_raw) / span;
        let pb = self.b / span;
        let (sh, sl) = (hi.sqrt(), lo.sqrt());
        let diag = |p: f64| C64::new(sh * p + sl * (1.0 - p), 0.0);
        let off = pb * (sh - sl);
        [[diag(pa), off], [off.conj(), diag(pc)]]
    }
}

enum Method {
    Circulant { roots: Vec<[[C64; 2]; 2]>, forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>> },
    Dense { factor: DMatrix<f64> },
}

/// Reusable bivariate fGn generator for a fixed length and parameter set.
pub struct BfgnGenerator {
    len: usize,
    method: Method,
}

impl std::fmt::Debug for BfgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.method {
            Method::Circulant { .. } => "circulant",
            Method::Dense { .. } => "dense",
        };
        f.debug_struct("BfgnGenerator").field("len", &self.len).field("method", &kind).finish()
    }
}

fn cross_lag_cov(params: &FbmParams) -> impl Fn(i64) -> [[f64; 2]; 2] + '_ {
    // Entry (a, b) = E[Y_a(s + k) Y_b(s)].
    move |k: i64| {
        [
            [fgn_autocov(k, params.h, params.sigma1).unwrap(), fgn_cross_cov(-k, params)],
            [fgn_cross_cov(k, params), fgn_autocov(k, params.g, params.sigma2).unwrap()],
        ]
    }
}

impl BfgnGenerator {
    /// Circulant embedding when valid, dense factorization otherwise.
    pub fn new(len: usize, params: &FbmParams) -> Result<Self> {
        params.validate()?;
        match Self::circulant(len, params) {
            Ok(g) => Ok(g),
            Err(e) if len <= DENSE_MAX => {
                log::debug!("circulant embedding rejected ({e}); using dense factorization");
                Self::dense(len, params)
            }
            Err(e) => Err(e),
        }
    }

    pub fn circulant(len: usize, params: &FbmParams) -> Result<Self> {
        params.validate()?;
        let m = 2 * len;
        let cov = cross_lag_cov(params);
        let mut seq = vec![[[0.0; 2]; 2]; m];
        for (k, slot) in seq.iter_mut().enumerate() {
            *slot = if k < len {
                cov(k as i64)
            } else if k == len {
                let (p, q) = (cov(len as i64), cov(-(len as i64)));
                let mut avg = [[0.0; 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        avg[a][b] = 0.5 * (p[a][b] + q[a][b]);
                    }
                }
                avg
            } else {
                cov(k as i64 - m as i64)
            };
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let spectrum = |a: usize, b: usize| {
            let mut buf: Vec<C64> = seq.iter().map(|c| C64::new(c[a][b], 0.0)).collect();
            forward.process(&mut buf);
            buf
        };
        let (s11, s12, s22) = (spectrum(0, 0), spectrum(0, 1), spectrum(1, 1));
        let scale = s11.iter().chain(&s22).map(|v| v.re.abs()).fold(0.0, f64::max);
        let mut roots = Vec::with_capacity(m);
        for f in 0..m {
            let h = Herm2 { a: s11[f].re, b: s12[f], c: s22[f].re };
            let (lo, _) = h.eigenvalues();
            if lo < -1e-10 * scale {
                return Err(DccaError::Factorization(format!(
                    "circulant embedding has negative eigenvalue {lo:e} at frequency {f}"
                )));
            }
            roots.push(h.sqrt());
        }
        Ok(Self { len, method: Method::Circulant { roots, forward, inverse } })
    }

    pub fn dense(len: usize, params: &FbmParams) -> Result<Self> {
        params.validate()?;
        if len > DENSE_MAX {
            return Err(DccaError::InvalidParameter(format!("dense factorization limited to length {DENSE_MAX}")));
        }
        let cov = cross_lag_cov(params);
        let joint = DMatrix::from_fn(2 * len, 2 * len, |i, j| {
            let (a, ti) = (i / len, (i % len) as i64);
            let (b, tj) = (j / len, (j % len) as i64);
            cov(ti - tj)[a][b]
        });
        let factor = joint
            .cholesky()
            .ok_or_else(|| DccaError::Factorization("joint covariance is not positive definite".into()))?
            .l();
        Ok(Self { len, method: Method::Dense { factor } })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_circulant(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    /// Length of each unit-variance white-noise input consumed by [`Self::filter`].
    pub fn noise_len(&self) -> usize {
        match self.method {
            Method::Circulant { .. } => 2 * self.len,
            Method::Dense { .. } => self.len,
        }
    }

    /// Maps two white-noise inputs to increments with the target second-order structure.
    pub fn filter(&self, xi1: &[f64], xi2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.len;
        match &self.method {
            Method::Circulant { roots, forward, inverse } => {
                let m = 2 * n;
                let mut a: Vec<C64> = xi1.iter().map(|&v| C64::new(v, 0.0)).collect();
                let mut b: Vec<C64> = xi2.iter().map(|&v| C64::new(v, 0.0)).collect();
                forward.process(&mut a);
                forward.process(&mut b);
                for f in 0..m {
                    let r = &roots[f];
                    let (u, v) = (a[f], b[f]);
                    a[f] = r[0][0] * u + r[0][1] * v;
                    b[f] = r[1][0] * u + r[1][1] * v;
                }
                inverse.process(&mut a);
                inverse.process(&mut b);
                let inv = 1.0 / m as f64;
                (a[..n].iter().map(|c| c.re * inv).collect(), b[..n].iter().map(|c| c.re * inv).collect())
            }
            Method::Dense { factor } => {
                let xi = DMatrix::from_iterator(2 * n, 1, xi1.iter().chain(xi2).copied());
                let y = factor * xi;
                (y.as_slice()[..n].to_vec(), y.as_slice()[n..].to_vec())
            }
        }
    }

    /// Gaussian draw seeded deterministically.
    pub fn generate(&self, seed: u64) -> Result<SeriesPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.noise_len();
        let xi1 = gaussian_noise(&mut rng, k);
        let xi2 = gaussian_noise(&mut rng, k);
        let (y1, y2) = self.filter(&xi1, &xi2);
        SeriesPair::new(y1, y2)
    }

    /// Draw driven by standardized `sign(g)|g|^φ` noise.
    pub fn generate_nongaussian(&self, phi: f64, seed: u64) -> Result<SeriesPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.noise_len();
        let xi1 = super_gaussian_noise(&mut rng, k, phi);
        let xi2 = super_gaussian_noise(&mut rng, k, phi);
        let (y1, y2) = self.filter(&xi1, &xi2);
        SeriesPair::new(y1, y2)
    }
}

pub fn gaussian_noise<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// `E|g|^p` for standard normal `g`.
fn abs_normal_moment(p: f64) -> f64 {
    2f64.powf(0.5 * p) * gamma(0.5 * (p + 1.0)) / std::f64::consts::PI.sqrt()
}

/// White noise `sign(g)|g|^φ`, rescaled to unit variance.
pub fn super_gaussian_noise<R: Rng>(rng: &mut R, len: usize, phi: f64) -> Vec<f64> {
    let scale = abs_normal_moment(2.0 * phi).sqrt().recip();
    (0..len)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            g.signum() * g.abs().powf(phi) * scale
        })
        .collect()
}

/// Theoretical excess kurtosis of `sign(g)|g|^φ`.
pub fn super_gaussian_excess_kurtosis(phi: f64) -> f64 {
    abs_normal_moment(4.0 * phi) / abs_normal_moment(2.0 * phi).powi(2) - 3.0
}

pub fn gen_bfgn(spec: &SimSpec) -> Result<SeriesPair> {
    spec.validate()?;
    BfgnGenerator::new(spec.len, &spec.params)?.generate(spec.seed)
}

/// Exact dense-factorization reference generator.
pub fn gen_bfgn_dense(spec: &SimSpec) -> Result<SeriesPair> {
    spec.validate()?;
    BfgnGenerator::dense(spec.len, &spec.params)?.generate(spec.seed)
}

pub fn gen_nongaussian(spec: &SimSpec) -> Result<SeriesPair> {
    spec.validate()?;
    BfgnGenerator::new(spec.len, &spec.params)?.generate_nongaussian(spec.phi, spec.seed)
}

/// Removes every Fourier component below `cutoff` cycles per sample.
pub fn highpass(x: &[f64], cutoff: f64) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let freq = k.min(n - k) as f64 / n as f64;
        if freq < cutoff {
            *v = C64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Fraction of DFT bins kept by [`highpass`].
fn highpass_share(n: usize, cutoff: f64) -> f64 {
    let kept = (0..n).filter(|&k| k.min(n - k) as f64 / n as f64 >= cutoff).count();
    kept as f64 / n as f64
}

/// `√(1−w)·(independent fGn pair) + √w·(correlated white noise, high-passed, unit variance)`.
pub fn gen_mixture(spec: &SimSpec) -> Result<SeriesPair> {
    spec.validate()?;
    let long = BfgnGenerator::new(spec.len, &spec.params)?.generate(spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let n = spec.len;
    let e1 = gaussian_noise(&mut rng, n);
    let e2 = gaussian_noise(&mut rng, n);
    let c = spec.noise_corr;
    let w2: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| c * a + (1.0 - c * c).sqrt() * b).collect();
    let share = highpass_share(n, spec.cutoff);
    if share == 0.0 {
        return Err(DccaError::InvalidParameter("cutoff removes every frequency".into()));
    }
    let norm = share.sqrt().recip();
    let (h1, h2) = (highpass(&e1, spec.cutoff), highpass(&w2, spec.cutoff));
    let (a, b) = ((1.0 - spec.weight).sqrt(), spec.weight.sqrt() * norm);
    let (l1, l2) = long.into_increments();
    let y1 = l1.iter().zip(&h1).map(|(x, y)| a * x + b * y).collect();
    let y2 = l2.iter().zip(&h2).map(|(x, y)| a * x + b * y).collect();
    SeriesPair::new(y1, y2)
}

fn polynomial(coef: &[f64], len: usize) -> Vec<f64> {
    (1..=len).map(|t| coef.iter().rev().fold(0.0, |acc, c| acc * t as f64 + c)).collect()
}

/// Adds `Σ_k c_k t^k` (`t = 1..N`) to the chosen representation of each series.
pub fn add_trend(pair: &SeriesPair, coef1: &[f64], coef2: &[f64], target: TrendTarget) -> Result<SeriesPair> {
    let n = pair.len();
    // A profile trend enters the increments through its first differences.
    let shape = |q: Vec<f64>| -> Vec<f64> {
        match target {
            TrendTarget::Increments => q,
            TrendTarget::Profile => (0..n).map(|t| if t == 0 { q[0] } else { q[t] - q[t - 1] }).collect(),
        }
    };
    let (q1, q2) = (shape(polynomial(coef1, n)), shape(polynomial(coef2, n)));
    let add = |v: &[f64], q: &[f64]| -> Vec<f64> { v.iter().zip(q).map(|(a, b)| a + b).collect() };
    SeriesPair::new(add(pair.y1(), &q1), add(pair.y2(), &q2))
}
