//! Detrended fluctuation statistics: DFA, DCCA and the DCCA correlation coefficient.
//!
//! Windows are non-overlapping; the tail `N - n [N/n]` is dropped at each scale.
//! Fluctuations are normalized as the mean over windows of the per-window mean
//! residual product, `F²(n) = (1 / (n [N/n])) Σ_j r_a^(j) · r_b^(j)`. The prefactor
//! cancels in the correlation coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{DccaError, Result};
use crate::poly::PolyBasis;
use crate::series::{ScaleSet, SeriesPair};

/// Residuals of `w` about its least-squares degree-`d` polynomial fit on `1..=n`.
pub fn detrend_window(w: &[f64], degree: usize) -> Result<Vec<f64>> {
    let basis = PolyBasis::new(w.len(), degree)?;
    let mut r = w.to_vec();
    basis.residualize(&mut r);
    Ok(r)
}

#[derive(Debug, Clone, Copy, Default)]
struct WindowSums {
    cross: f64,
    auto_a: f64,
    auto_b: f64,
    raw_a: f64,
    raw_b: f64,
}

// Residual energy below this fraction of the raw window energy is rounding noise
// left by fitting an exact polynomial.
const POLY_NOISE: f64 = 1e-20;

fn window_sums(xa: &[f64], xb: &[f64], n: usize, degree: usize) -> Result<(WindowSums, usize)> {
    if xa.len() != xb.len() {
        return Err(DccaError::LengthMismatch(xa.len(), xb.len()));
    }
    let windows = xa.len() / n.max(1);
    if n < degree + 2 || windows < 2 {
        return Err(DccaError::InfeasibleScales(format!(
            "scale {n} (degree {degree}) infeasible for series of length {}",
            xa.len()
        )));
    }
    let basis = PolyBasis::new(n, degree)?;
    let mut ra = vec![0.0; n];
    let mut rb = vec![0.0; n];
    let mut sums = WindowSums::default();
    for j in 0..windows {
        ra.copy_from_slice(&xa[j * n..(j + 1) * n]);
        rb.copy_from_slice(&xb[j * n..(j + 1) * n]);
        sums.raw_a += ra.iter().map(|v| v * v).sum::<f64>();
        sums.raw_b += rb.iter().map(|v| v * v).sum::<f64>();
        basis.residualize(&mut ra);
        basis.residualize(&mut rb);
        for (a, b) in ra.iter().zip(&rb) {
            sums.cross += a * b;
            sums.auto_a += a * a;
            sums.auto_b += b * b;
        }
    }
    Ok((sums, windows))
}

/// `F²_DCCA(n)` between two profiles; with `xa == xb` this is `F²_DFA(n)`.
pub fn dcca_coeff(xa: &[f64], xb: &[f64], n: usize, degree: usize) -> Result<f64> {
    let (sums, windows) = window_sums(xa, xb, n, degree)?;
    Ok(sums.cross / (windows * n) as f64)
}

/// `ρ_DCCA = F²_cross / sqrt(F²_auto1 F²_auto2)`.
///
/// Values beyond `±1` by no more than `1e-12` (floating-point rounding) snap to `±1`
/// and are reported through the second tuple field; larger violations are errors.
pub fn rho_dcca(cross: f64, auto1: f64, auto2: f64, scale: usize) -> Result<(f64, bool)> {
    if !(auto1 > 0.0) || !(auto2 > 0.0) {
        return Err(DccaError::ZeroFluctuation(scale));
    }
    let rho = cross / (auto1 * auto2).sqrt();
    if rho.abs() <= 1.0 {
        Ok((rho, false))
    } else if rho.abs() <= 1.0 + 1e-12 {
        Ok((rho.signum(), true))
    } else {
        Err(DccaError::RhoOutOfRange { scale, value: rho })
    }
}

/// `sign(v) · ln|v|`, with 0 mapped to 0.
pub fn sign_log(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * v.abs().ln()
    }
}

/// Per-scale fluctuation statistics of a series pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSet {
    pub scales: ScaleSet,
    pub f2_cross: Vec<f64>,
    pub f2_auto1: Vec<f64>,
    pub f2_auto2: Vec<f64>,
    pub rho: Vec<f64>,
    /// Number of coefficients that landed within rounding of ±1 and were snapped.
    pub rounding_snaps: usize,
}

impl FluctuationSet {
    pub fn compute(pair: &SeriesPair, scales: &ScaleSet) -> Result<Self> {
        Self::from_profiles(pair.x1(), pair.x2(), scales)
    }

    pub fn from_profiles(x1: &[f64], x2: &[f64], scales: &ScaleSet) -> Result<Self> {
        if x1.len() != x2.len() {
            return Err(DccaError::LengthMismatch(x1.len(), x2.len()));
        }
        let scales = ScaleSet::new(scales.scales().to_vec(), scales.degree(), x1.len())?;
        let r = scales.len();
        let mut out = Self {
            f2_cross: Vec::with_capacity(r),
            f2_auto1: Vec::with_capacity(r),
            f2_auto2: Vec::with_capacity(r),
            rho: Vec::with_capacity(r),
            rounding_snaps: 0,
            scales,
        };
        for &n in out.scales.scales() {
            let (sums, windows) = window_sums(x1, x2, n, out.scales.degree())?;
            if sums.auto_a <= POLY_NOISE * sums.raw_a || sums.auto_b <= POLY_NOISE * sums.raw_b {
                return Err(DccaError::ZeroFluctuation(n));
            }
            let norm = (windows * n) as f64;
            let (cross, a1, a2) = (sums.cross / norm, sums.auto_a / norm, sums.auto_b / norm);
            let (rho, snapped) = rho_dcca(cross, a1, a2, n)?;
            out.rounding_snaps += snapped as usize;
            out.f2_cross.push(cross);
            out.f2_auto1.push(a1);
            out.f2_auto2.push(a2);
            out.rho.push(rho);
        }
        Ok(out)
    }

    pub fn sign_log_cross(&self) -> Vec<f64> {
        self.f2_cross.iter().map(|&v| sign_log(v)).collect()
    }
}

/// DFA regression estimate of a Hurst exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub h_hat: f64,
    pub stderr: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub scales_used: usize,
}

/// Half the OLS slope of `ln F²` on `ln n`, since `F²(n)` grows like `n^{2H}`.
pub fn hurst_estimate(f2_auto: &[f64], scales: &[usize]) -> Result<HurstEstimate> {
    if f2_auto.len() != scales.len() {
        return Err(DccaError::DimensionMismatch(format!(
            "{} fluctuations for {} scales",
            f2_auto.len(),
            scales.len()
        )));
    }
    if scales.len() < 3 {
        return Err(DccaError::InvalidParameter("Hurst regression needs at least three scales".into()));
    }
    if let Some(i) = f2_auto.iter().position(|&v| !(v > 0.0)) {
        return Err(DccaError::ZeroFluctuation(scales[i]));
    }
    let k = scales.len() as f64;
    let xs: Vec<f64> = scales.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = f2_auto.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let se_slope = (sse / (k - 2.0) / sxx).sqrt();
    Ok(HurstEstimate {
        h_hat: slope / 2.0,
        stderr: se_slope / 2.0,
        n_min: scales[0],
        n_max: *scales.last().unwrap(),
        scales_used: scales.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_walk(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        let mut acc = 0.0;
        (0..len)
            .map(|_| {
                acc += rng.random::<f64>() - 0.5;
                acc
            })
            .collect()
    }

    // Normal equations solved directly: the residual of a least-squares fit is
    // orthogonal to every monomial column.
    fn monomial_dot(r: &[f64], k: i32) -> f64 {
        r.iter().enumerate().map(|(i, v)| v * ((i + 1) as f64).powi(k)).sum()
    }

    #[test]
    fn detrend_constant_and_line() {
        let r = detrend_window(&[3.0, 3.0, 3.0, 3.0], 1).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        let r = detrend_window(&[1.0, 2.0, 3.0, 4.0], 1).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        assert!(detrend_window(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn detrend_residuals_orthogonal_to_monomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[5usize, 37, 400] {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = detrend_window(&w, 2).unwrap();
            for k in 0..=2 {
                let scale = (1..=n).map(|i| (i as f64).powi(k).powi(2)).sum::<f64>().sqrt();
                let dot = monomial_dot(&r, k);
                assert!(dot.abs() <= 1e-9 * norm * scale, "n={n} k={k} dot={dot}");
            }
        }
    }

    #[test]
    fn dcca_identity_and_bilinearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_walk(&mut rng, 1000);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let dfa = dcca_coeff(&x, &x, 50, 1).unwrap();
        assert!(dfa > 0.0);
        let cross = dcca_coeff(&x, &neg, 50, 1).unwrap();
        assert_eq!(cross, -dfa);
        assert!(dcca_coeff(&x, &x, 600, 1).is_err());
        assert!(dcca_coeff(&x, &x[..999], 50, 1).is_err());
    }

    #[test]
    fn rho_identity_negation_and_trend() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_walk(&mut rng, 2000);
        let scales = ScaleSet::new(vec![10, 50, 200], 1, x.len()).unwrap();
        let same = FluctuationSet::from_profiles(&x, &x, &scales).unwrap();
        assert!(same.rho.iter().all(|&r| r == 1.0));
        assert_eq!(same.f2_cross, same.f2_auto1);

        let neg: Vec<f64> = x.iter().map(|v| -3.0 * v).collect();
        let f = FluctuationSet::from_profiles(&x, &neg, &scales).unwrap();
        assert!(f.rho.iter().all(|&r| (r + 1.0).abs() < 1e-12));

        let trended: Vec<f64> = x.iter().enumerate().map(|(t, v)| v + 0.3 - 0.01 * (t + 1) as f64).collect();
        let f = FluctuationSet::from_profiles(&x, &trended, &scales).unwrap();
        assert!(f.rho.iter().all(|&r| (r - 1.0).abs() < 1e-9));
    }

    #[test]
    fn rho_errors() {
        assert!(matches!(rho_dcca(0.0, 0.0, 1.0, 5), Err(DccaError::ZeroFluctuation(5))));
        assert!(matches!(rho_dcca(2.0, 1.0, 1.0, 5), Err(DccaError::RhoOutOfRange { .. })));
        assert_eq!(rho_dcca(1.0 + 1e-14, 1.0, 1.0, 5).unwrap(), (1.0, true));
        let line: Vec<f64> = (0..100).map(|t| 2.0 * t as f64).collect();
        let scales = ScaleSet::new(vec![10], 1, 100).unwrap();
        assert!(FluctuationSet::from_profiles(&line, &line, &scales).is_err());
    }

    #[test]
    fn sign_log_display() {
        assert_eq!(sign_log(0.0), 0.0);
        assert!((sign_log(std::f64::consts::E) - 1.0).abs() < 1e-15);
        assert!((sign_log(-std::f64::consts::E) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hurst_on_exact_power_laws() {
        let scales = [10usize, 100, 1000];
        let f2: Vec<f64> = scales.iter().map(|&n| (n as f64).powf(1.4)).collect();
        let h = hurst_estimate(&f2, &scales).unwrap();
        assert!((h.h_hat - 0.7).abs() < 1e-12);
        assert!(h.stderr < 1e-6);
        let f2: Vec<f64> = scales.iter().map(|&n| 3.7 * n as f64).collect();
        assert!((hurst_estimate(&f2, &scales).unwrap().h_hat - 0.5).abs() < 1e-12);
        assert!(hurst_estimate(&f2[..2], &scales[..2]).is_err());
        assert!(hurst_estimate(&[1.0, 0.0, 2.0], &scales).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn walk(seed: u64, len: usize) -> Vec<f64> {
            random_walk(&mut ChaCha8Rng::seed_from_u64(seed), len)
        }

        fn poly(coef: &[f64], len: usize) -> Vec<f64> {
            (1..=len)
                .map(|t| {
                    let u = t as f64 / len as f64;
                    coef.iter().rev().fold(0.0, |acc, c| acc * u + c)
                })
                .collect()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn symmetric_and_cauchy_schwarz(sa in 0u64..10_000, sb in 0u64..10_000, n in 4usize..60) {
                let a = walk(sa, 600);
                let b = walk(sb + 10_000, 600);
                let ab = dcca_coeff(&a, &b, n, 1).unwrap();
                let ba = dcca_coeff(&b, &a, n, 1).unwrap();
                prop_assert_eq!(ab, ba);
                let aa = dcca_coeff(&a, &a, n, 1).unwrap();
                let bb = dcca_coeff(&b, &b, n, 1).unwrap();
                prop_assert!(ab.abs() <= (aa * bb).sqrt() * (1.0 + 1e-12));
            }

            #[test]
            fn detrending_invariance(
                sa in 0u64..10_000,
                sb in 0u64..10_000,
                d in 1usize..4,
                coef in prop::collection::vec(-20.0f64..20.0, 4),
            ) {
                let a = walk(sa, 800);
                let b = walk(sb + 20_000, 800);
                let q = poly(&coef[..=d], a.len());
                let aq: Vec<f64> = a.iter().zip(&q).map(|(x, y)| x + y).collect();
                for &n in &[d + 3, 20, 100] {
                    let base = dcca_coeff(&a, &b, n, d).unwrap();
                    let moved = dcca_coeff(&aq, &b, n, d).unwrap();
                    let scale = (dcca_coeff(&a, &a, n, d).unwrap() * dcca_coeff(&b, &b, n, d).unwrap()).sqrt();
                    prop_assert!((base - moved).abs() <= 1e-9 * scale, "n={} {} vs {}", n, base, moved);
                }
            }

            #[test]
            fn rho_affine_invariance(
                sa in 0u64..10_000,
                sb in 0u64..10_000,
                a_mul in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
                b_mul in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
                c1 in prop::collection::vec(-20.0f64..20.0, 2),
                c2 in prop::collection::vec(-20.0f64..20.0, 2),
            ) {
                let x1 = walk(sa, 1000);
                let x2 = walk(sb + 30_000, 1000);
                let scales = ScaleSet::new(vec![8, 31, 120, 400], 1, 1000).unwrap();
                let base = FluctuationSet::from_profiles(&x1, &x2, &scales).unwrap();
                let q1 = poly(&c1, 1000);
                let q2 = poly(&c2, 1000);
                let y1: Vec<f64> = x1.iter().zip(&q1).map(|(x, q)| a_mul * x + q).collect();
                let y2: Vec<f64> = x2.iter().zip(&q2).map(|(x, q)| b_mul * x + q).collect();
                let moved = FluctuationSet::from_profiles(&y1, &y2, &scales).unwrap();
                let s = (a_mul * b_mul).signum();
                for (r0, r1) in base.rho.iter().zip(&moved.rho) {
                    prop_assert!((s * r0 - r1).abs() < 1e-9);
                }
            }
        }
    }
}
