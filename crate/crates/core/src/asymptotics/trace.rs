//! Exact moments of the fluctuation statistics under an fBm model.
//!
//! Only the stationary part `-|u|^{2H}/2` of the fBm kernel is used: the remaining
//! terms depend on one time argument alone and vanish under `I - P` for any `d ≥ 0`.

use crate::error::{DccaError, Result};
use crate::fbm::{check_psd, stationary_kernel, window_cov_block, FbmParams, PairKind, MAX_BLOCK};
use crate::poly::PolyBasis;

/// Which covariance of window statistics to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    /// `F²_DCCA` under independence of the two components.
    Cross,
    /// `F²_DFA` of the first component.
    Auto,
}

fn check_hurst(h: f64) -> Result<()> {
    if !(0.0 < h && h < 1.0) {
        return Err(DccaError::InvalidParameter(format!("Hurst exponent {h} outside (0, 1)")));
    }
    Ok(())
}

/// `(1/n) trace((I - P_d) Σ_H)`: the expected DFA fluctuation of unit fBm at scale `n`.
pub fn fluct_mean_exact(n: usize, h: f64, degree: usize) -> Result<f64> {
    check_hurst(h)?;
    let basis = PolyBasis::new(n, degree)?;
    let pw: Vec<f64> = (0..n).map(|u| stationary_kernel(u as f64, h)).collect();
    // trace(Σ) is zero for the stationary kernel, so only -Σ_k q_kᵀ Σ q_k remains.
    let mut quad = 0.0;
    let mut sq = vec![0.0; n];
    for q in basis.columns() {
        for (a, out) in sq.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (b, qb) in q.iter().enumerate() {
                acc += pw[a.abs_diff(b)] * qb;
            }
            *out = acc;
        }
        quad += q.iter().zip(&sq).map(|(x, y)| x * y).sum::<f64>();
    }
    let mean = -quad / n as f64;
    if !(mean > 0.0) {
        return Err(DccaError::Internal(format!("non-positive exact mean at n = {n}, H = {h}")));
    }
    Ok(mean)
}

/// `(I - P_n) K (I - P_m)` for the stationary kernel block between a window of length `n`
/// at time 0 and a window of length `m` starting at `shift` (row-major `n x m`).
pub(crate) fn residual_block(basis_n: &PolyBasis, basis_m: &PolyBasis, shift: i64, h: f64) -> Vec<f64> {
    let (n, m) = (basis_n.len(), basis_m.len());
    let lo = shift - n as i64 + 1;
    let table: Vec<f64> = (0..(n + m - 1) as i64).map(|i| stationary_kernel((lo + i) as f64, h)).collect();
    let mut block = vec![0.0; n * m];
    for a in 0..n {
        // Lag (shift + b - a) sits at table index (b + n - 1 - a).
        let start = n - 1 - a;
        block[a * m..(a + 1) * m].copy_from_slice(&table[start..start + m]);
    }
    basis_n.residualize_columns(&mut block, m);
    basis_m.residualize_rows(&mut block);
    block
}

pub(crate) fn frobenius(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Covariance of the window statistics of a window of length `n` at time 0 and a
/// window of length `m` starting `j` row-scale windows later (at time `j·n`).
///
/// Cross: `(1/(nm)) ⟨R_n Σ_H R_m, R_n Σ_G R_m⟩_F` with the two components independent.
/// Auto: `(2/(nm)) ‖R_n Σ_H R_m‖²_F`.
pub fn fluct_cov_exact(n: usize, m: usize, j: usize, h: f64, g: f64, degree: usize, kind: StatKind) -> Result<f64> {
    check_hurst(h)?;
    check_hurst(g)?;
    if n > MAX_BLOCK || m > MAX_BLOCK {
        return Err(DccaError::InfeasibleScales(format!("block sizes ({n}, {m}) exceed {MAX_BLOCK}")));
    }
    let basis_n = PolyBasis::new(n, degree)?;
    let basis_m = PolyBasis::new(m, degree)?;
    let shift = (j * n) as i64;
    let bh = residual_block(&basis_n, &basis_m, shift, h);
    let norm = (n * m) as f64;
    Ok(match kind {
        StatKind::Auto => 2.0 * frobenius(&bh, &bh) / norm,
        StatKind::Cross => {
            let bg = residual_block(&basis_n, &basis_m, shift, g);
            frobenius(&bh, &bg) / norm
        }
    })
}

/// Covariance between `F²_DFA` and `F²_DCCA` window statistics under independence:
/// `2 trace(P Σ₁ P Σ₁₂ᵀ)`, which is zero because the cross kernel vanishes.
pub fn dfa_dcca_cross_cov_check(n: usize, j: usize, h: f64, g: f64) -> Result<f64> {
    let p = FbmParams::null(h, g);
    let auto = window_cov_block(n, n, j, &p, PairKind::Auto1)?.matrix;
    let cross = window_cov_block(n, n, j, &p, PairKind::Cross)?.matrix;
    let basis = PolyBasis::new(n, 0)?;
    let q = nalgebra::DMatrix::from_fn(n, 1, |i, _| basis.columns()[0][i]);
    let proj = &q * q.transpose();
    Ok(2.0 * (&proj * auto * &proj * cross.transpose()).trace())
}

/// Exponent of the power-law decay of the offset covariance, `2H + 2G − 4(d + 1)`.
pub fn decay_exponent(h: f64, g: f64, degree: usize) -> f64 {
    2.0 * h + 2.0 * g - 4.0 * (degree as f64 + 1.0)
}

/// Largest offset examined before a tail sum is declared non-convergent.
pub const OFFSET_CAP: usize = 10_000;

/// Relative size of the neglected tail at which offset summation stops.
pub const TAIL_TOL: f64 = 1e-3;

pub(crate) const MIN_OFFSETS: usize = 3;

/// Bound on `2 Σ_{k > j} c(k)` from the decay rate and the last term.
pub(crate) fn tail_bound(last: f64, j: usize, alpha: f64) -> f64 {
    2.0 * last.abs() * j as f64 / (alpha.abs() - 1.0)
}

/// `Σ_k c(k n)` over all integer window offsets: the limit of `[N/n] · Var F²_DCCA(n)`.
///
/// Returns the sum and the number of positive offsets used.
pub fn asymptotic_variance(n: usize, h: f64, g: f64, degree: usize) -> Result<(f64, usize)> {
    check_hurst(h)?;
    check_hurst(g)?;
    let alpha = decay_exponent(h, g, degree);
    if alpha >= -1.0 {
        return Err(DccaError::NonConvergent { cap: OFFSET_CAP });
    }
    let basis = PolyBasis::new(n, degree)?;
    let block = |k: usize, hurst: f64| residual_block(&basis, &basis, (k * n) as i64, hurst);
    let norm = (n * n) as f64;
    let c0 = {
        let (bh, bg) = (block(0, h), block(0, g));
        frobenius(&bh, &bg) / norm
    };
    let mut sum = c0;
    for k in 1..=OFFSET_CAP {
        let ck = frobenius(&block(k, h), &block(k, g)) / norm;
        sum += 2.0 * ck;
        if k >= MIN_OFFSETS && tail_bound(ck, k, alpha) < TAIL_TOL * sum.abs() {
            return Ok((sum, k));
        }
    }
    Err(DccaError::NonConvergent { cap: OFFSET_CAP })
}

/// Auto-block positive-semidefiniteness over a set of scales; used as a self-check.
pub fn check_auto_blocks(h: f64, scales: &[usize]) -> Result<()> {
    for &n in scales {
        check_psd(&window_cov_block(n, n, 0, &FbmParams::null(h, h), PairKind::Auto1)?.matrix)?;
    }
    Ok(())
}
