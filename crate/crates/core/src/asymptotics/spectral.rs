//! Alignment-averaged covariance of window statistics at two scales, as a spectral integral.
//!
//! For windows of lengths `n` and `m` whose relative position is summed over every
//! integer shift `τ`,
//!
//! `S(n, m) = Σ_τ c(τ) = (4π / (n m)) ∫_0^π f_H(λ) f_G(λ) ‖M_n e_λ‖² ‖M_m e_λ‖² dλ`,
//!
//! where `M_n` is cumulative summation followed by degree-`d` detrending and `f_H` is
//! the fGn spectral density. `S` is a Gram form, so correlations built from it lie in
//! `[0, 1]` and are jointly positive semidefinite.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::Result;
use crate::poly::PolyBasis;

const ALIAS_TERMS: i32 = 50;

/// Spectral density of unit-variance fGn on `[-π, π]`, normalized so `∫ f = 1`.
pub fn fgn_spectral_density(lambda: f64, h: f64) -> f64 {
    let lambda = lambda.abs();
    let a = 2.0 * h + 1.0;
    let cf = (PI * h).sin() * gamma(2.0 * h + 1.0) / (2.0 * PI);
    let mut sum = 0.0;
    for j in 1..=ALIAS_TERMS {
        let c = 2.0 * PI * j as f64;
        sum += (c + lambda).powf(-a) + (c - lambda).powf(-a);
    }
    // Remaining aliases by the integral of the summand beyond the last term.
    let edge = 2.0 * PI * (ALIAS_TERMS as f64 + 0.5);
    sum += ((edge + lambda).powf(1.0 - a) + (edge - lambda).powf(1.0 - a)) / (2.0 * PI * (a - 1.0));
    let s = (0.5 * lambda).sin();
    // Leading alias written as (2 sin(λ/2)/λ)² λ^{1-2H} so that tiny λ stays finite.
    let sinc = if lambda > 0.0 { 2.0 * s / lambda } else { 1.0 };
    cf * (4.0 * s * s * sum + sinc * sinc * lambda.powf(2.0 - a))
}

/// `‖(I - P) cumsum(e^{iλp})‖²` over a window of the basis length.
pub fn window_transfer(lambda: f64, basis: &PolyBasis) -> f64 {
    let n = basis.len();
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    let (mut cr, mut ci) = (0.0, 0.0);
    for p in 1..=n {
        let (s, c) = (lambda * p as f64).sin_cos();
        cr += c;
        ci += s;
        re.push(cr);
        im.push(ci);
    }
    basis.residualize(&mut re);
    basis.residualize(&mut im);
    re.iter().chain(&im).map(|v| v * v).sum()
}

const GL_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn push_panel(a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        nodes.push(mid - half * x);
        weights.push(half * w);
        nodes.push(mid + half * x);
        weights.push(half * w);
    }
}

/// Composite 8-point Gauss–Legendre rule on `(0, π]` resolving oscillations of
/// windows up to length `n_max`, with geometric refinement towards 0.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(n_max: usize) -> Self {
        Self::with_density(n_max, 2)
    }

    /// `density` panels per `π / n_max`.
    pub fn with_density(n_max: usize, density: usize) -> Self {
        let panels = (n_max.max(4) * density).max(8);
        let width = PI / panels as f64;
        let mut nodes = Vec::with_capacity(8 * (panels + 24));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut hi = width;
        for _ in 0..24 {
            push_panel(0.5 * hi, hi, &mut nodes, &mut weights);
            hi *= 0.5;
        }
        push_panel(0.0, hi, &mut nodes, &mut weights);
        for k in 1..panels {
            push_panel(k as f64 * width, (k + 1) as f64 * width, &mut nodes, &mut weights);
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Transfer values `‖M_n e_λ‖²` on the grid nodes.
pub(crate) fn transfer_on(grid: &SpectralGrid, n: usize, degree: usize) -> Result<Vec<f64>> {
    let basis = PolyBasis::new(n, degree)?;
    Ok(grid.nodes.iter().map(|&l| window_transfer(l, &basis)).collect())
}

pub(crate) fn density_on(grid: &SpectralGrid, h: f64) -> Vec<f64> {
    grid.nodes.iter().map(|&l| fgn_spectral_density(l, h)).collect()
}

/// `S(n, m)` assembled from precomputed node values.
pub(crate) fn combine(grid: &SpectralGrid, weight_hg: &[f64], tn: &[f64], tm: &[f64], n: usize, m: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.nodes.len() {
        acc += grid.weights[i] * weight_hg[i] * tn[i] * tm[i];
    }
    4.0 * PI * acc / (n * m) as f64
}

/// Alignment-averaged covariance sum `S(n, m)` for independent components with Hurst `H`, `G`.
pub fn cross_scale_sum(n: usize, m: usize, h: f64, g: f64, degree: usize) -> Result<f64> {
    let grid = SpectralGrid::new(n.max(m));
    let tn = transfer_on(&grid, n, degree)?;
    let tm = transfer_on(&grid, m, degree)?;
    let w: Vec<f64> = density_on(&grid, h).iter().zip(density_on(&grid, g)).map(|(a, b)| a * b).collect();
    Ok(combine(&grid, &w, &tn, &tm, n, m))
}

/// Correlation of `F²_DCCA` at scales `n` and `m` under averaged window alignment.
pub fn cross_scale_corr(n: usize, m: usize, h: f64, g: f64, degree: usize) -> Result<f64> {
    let snm = cross_scale_sum(n, m, h, g, degree)?;
    let snn = cross_scale_sum(n, n, h, g, degree)?;
    let smm = cross_scale_sum(m, m, h, g, degree)?;
    Ok(snm / (snn * smm).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::trace::{frobenius, residual_block};
    use crate::fbm::fgn_autocov;

    // ∫_0^π φ(λ) dλ by the substitution λ = π u^k, which flattens the λ^{1-2H} pole.
    fn integrate_singular(phi: impl Fn(f64) -> f64) -> f64 {
        let k = 60.0;
        let pieces = 4000;
        let mut acc = 0.0;
        for i in 0..pieces {
            let (a, b) = (i as f64 / pieces as f64, (i + 1) as f64 / pieces as f64);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                for u in [mid - half * x, mid + half * x] {
                    let lambda = PI * u.powf(k);
                    if lambda > 0.0 {
                        acc += half * w * phi(lambda) * PI * k * u.powf(k - 1.0);
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn white_noise_density_is_flat() {
        for l in [0.01, 0.5, 2.0, 3.1] {
            assert!((fgn_spectral_density(l, 0.5) - 1.0 / (2.0 * PI)).abs() < 1e-6);
        }
    }

    #[test]
    fn density_reproduces_autocovariance() {
        for h in [0.6, 0.75, 0.9] {
            let total = 2.0 * integrate_singular(|l| fgn_spectral_density(l, h));
            assert!((total - 1.0).abs() < 1e-5, "H={h}: {total}");
            let lag1 = 2.0 * integrate_singular(|l| fgn_spectral_density(l, h) * l.cos());
            let want = fgn_autocov(1, h, 1.0).unwrap();
            assert!((lag1 - want).abs() < 1e-5, "H={h}: {lag1} vs {want}");
        }
    }

    #[test]
    fn transfer_low_frequency_order() {
        // Detrending of degree d leaves ‖M_n e_λ‖² ~ λ^{2d} near zero frequency.
        for d in [1usize, 2] {
            let b = PolyBasis::new(12, d).unwrap();
            let ratio = window_transfer(1e-4, &b) / window_transfer(1e-2, &b);
            let order = ratio.ln() / 1e-2f64.ln();
            assert!((order - 2.0 * d as f64).abs() < 1e-3, "d={d}: {order}");
        }
    }

    // Direct summation over shifts of the time-domain covariance.
    fn brute_force(n: usize, m: usize, h: f64, g: f64, d: usize, reach: i64) -> f64 {
        let bn = PolyBasis::new(n, d).unwrap();
        let bm = PolyBasis::new(m, d).unwrap();
        (-reach..=reach)
            .map(|tau| frobenius(&residual_block(&bn, &bm, tau, h), &residual_block(&bn, &bm, tau, g)) / (n * m) as f64)
            .sum()
    }

    #[test]
    fn spectral_sum_matches_time_domain() {
        for &(n, m, h, g, d) in &[(8usize, 5usize, 0.6, 0.7, 1usize), (12, 12, 0.8, 0.75, 1), (10, 4, 0.7, 0.6, 2)] {
            let want = brute_force(n, m, h, g, d, 3000);
            let got = cross_scale_sum(n, m, h, g, d).unwrap();
            assert!((got / want - 1.0).abs() < 1e-6, "({n},{m},{h},{g},{d}): {got} vs {want}");
        }
    }

    #[test]
    fn quadrature_converged() {
        let coarse = SpectralGrid::with_density(200, 2);
        let fine = SpectralGrid::with_density(200, 8);
        let b = PolyBasis::new(200, 1).unwrap();
        let b2 = PolyBasis::new(37, 1).unwrap();
        let f = |l: f64| {
            fgn_spectral_density(l, 0.95)
                * fgn_spectral_density(l, 0.9)
                * window_transfer(l, &b)
                * window_transfer(l, &b2)
        };
        let (a, z) = (coarse.integrate(f), fine.integrate(f));
        assert!((a / z - 1.0).abs() < 1e-9, "{a} vs {z}");
    }

    #[test]
    fn correlation_in_unit_interval() {
        assert!((cross_scale_corr(40, 40, 0.7, 0.8, 1).unwrap() - 1.0).abs() < 1e-14);
        let c = cross_scale_corr(100, 20, 0.7, 0.8, 1).unwrap();
        assert!(c > 0.0 && c < 1.0);
        let c_far = cross_scale_corr(100, 5, 0.7, 0.8, 1).unwrap();
        assert!(c_far < c);
    }
}
