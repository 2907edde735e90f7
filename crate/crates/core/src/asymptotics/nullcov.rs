//! Null covariance of the scaled coefficient vector `(√[N/n_i] ρ_DCCA(n_i))_i`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::table::CovTable;
use super::trace::fluct_mean_exact;
use crate::error::{DccaError, Result};
use crate::fbm::check_psd;
use crate::series::ScaleSet;

/// How a null covariance was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Exact { h: f64, g: f64 },
    WorstCase { h_low: f64, h_high: f64, g_low: f64, g_high: f64 },
}

/// Covariance matrix of `√[N/n_i] · ρ_DCCA(n_i)` under independence.
#[derive(Debug, Clone, PartialEq)]
pub struct NullCovariance {
    pub matrix: DMatrix<f64>,
    pub scales: Vec<usize>,
    pub provenance: Provenance,
}

impl NullCovariance {
    /// Wraps an arbitrary covariance (validated symmetric, positive diagonal, PSD).
    pub fn from_matrix(matrix: DMatrix<f64>, scales: Vec<usize>, provenance: Provenance) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != scales.len() {
            return Err(DccaError::DimensionMismatch(format!(
                "{}x{} covariance for {} scales",
                matrix.nrows(),
                matrix.ncols(),
                scales.len()
            )));
        }
        if (0..matrix.nrows()).any(|i| !(matrix[(i, i)] > 0.0 && matrix[(i, i)].is_finite())) {
            return Err(DccaError::InvalidParameter("covariance diagonal must be positive".into()));
        }
        let asym = (&matrix - matrix.transpose()).abs().max();
        if asym > 1e-12 * matrix.abs().max() {
            return Err(DccaError::InvalidParameter("covariance must be symmetric".into()));
        }
        check_psd(&matrix)?;
        Ok(Self { matrix, scales, provenance })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).collect()
    }

    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)] / (self.matrix[(i, i)] * self.matrix[(j, j)]).sqrt()
    }
}

type MeanKey = (usize, u64, usize);

fn mean_cache() -> &'static Mutex<HashMap<MeanKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<MeanKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// [`fluct_mean_exact`] memoized per `(n, H, d)`.
pub fn cached_mean(n: usize, h: f64, degree: usize) -> Result<f64> {
    let key = (n, h.to_bits(), degree);
    if let Some(&v) = mean_cache().lock().unwrap().get(&key) {
        return Ok(v);
    }
    let v = fluct_mean_exact(n, h, degree)?;
    mean_cache().lock().unwrap().insert(key, v);
    Ok(v)
}

fn check_degree(scales: &ScaleSet, table: &CovTable) -> Result<()> {
    if scales.degree() != table.degree() {
        return Err(DccaError::InvalidParameter(format!(
            "table tabulated for degree {}, scales use degree {}",
            table.degree(),
            scales.degree()
        )));
    }
    Ok(())
}

/// `Var(√W ρ)` at scale `n` from a scaled tabulated variance and exact means.
fn diagonal_entry(n: usize, h: f64, g: f64, scaled_var: f64, degree: usize) -> Result<f64> {
    let nf = n as f64;
    Ok(scaled_var * nf.powf(2.0 * (h + g)) / (cached_mean(n, h, degree)? * cached_mean(n, g, degree)?))
}

fn assemble(
    diag: &[f64],
    corr: impl Fn(usize, usize) -> Result<f64>,
    scales: &ScaleSet,
    provenance: Provenance,
) -> Result<NullCovariance> {
    let r = diag.len();
    let mut m = DMatrix::zeros(r, r);
    for i in 0..r {
        m[(i, i)] = diag[i];
        for j in 0..i {
            let v = corr(j, i)? * (diag[i] * diag[j]).sqrt();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    NullCovariance::from_matrix(m, scales.scales().to_vec(), provenance)
}

/// Null covariance at known Hurst exponents, interpolated bilinearly in the table.
pub fn rho_null_cov(scales: &ScaleSet, h: f64, g: f64, table: &CovTable) -> Result<NullCovariance> {
    check_degree(scales, table)?;
    let v = table.scaled_variance(h, g)?;
    let d = scales.degree();
    let diag: Vec<f64> = scales.scales().iter().map(|&n| diagonal_entry(n, h, g, v, d)).collect::<Result<_>>()?;
    let ns = scales.scales();
    assemble(&diag, |i, j| table.corr(h, g, ns[i] as f64 / ns[j] as f64), scales, Provenance::Exact { h, g })
}

/// Grid indices covering `[low, high]`, including the nodes just outside it.
fn enclosing_nodes(grid: &[f64], low: f64, high: f64) -> Result<Vec<usize>> {
    let (gmin, gmax) = (grid[0], grid[grid.len() - 1]);
    if high < gmin - 1e-12 || low > gmax + 1e-12 {
        return Err(DccaError::InvalidParameter(format!(
            "Hurst range [{low}, {high}] does not meet the tabulated range [{gmin}, {gmax}]"
        )));
    }
    if low < gmin - 1e-12 || high > gmax + 1e-12 {
        log::warn!("Hurst range [{low}, {high}] extends beyond the tabulated range [{gmin}, {gmax}]; clipping");
    }
    let lo = grid.iter().rposition(|&x| x <= low + 1e-12).unwrap_or(0);
    let hi = grid.iter().position(|&x| x >= high - 1e-12).unwrap_or(grid.len() - 1);
    Ok((lo..=hi).collect())
}

/// Worst-case covariance over a Hurst range: node-wise maxima of the per-scale
/// variances and of the cross-scale correlations over every grid node in the range.
pub fn worst_case_cov(
    scales: &ScaleSet,
    h_range: (f64, f64),
    g_range: (f64, f64),
    table: &CovTable,
) -> Result<NullCovariance> {
    check_degree(scales, table)?;
    for (lo, hi) in [h_range, g_range] {
        if !(0.5 <= lo && lo <= hi && hi < 1.0) {
            return Err(DccaError::InvalidParameter(format!("invalid Hurst range [{lo}, {hi}]")));
        }
    }
    let hs = enclosing_nodes(table.grid(), h_range.0, h_range.1)?;
    let gs = enclosing_nodes(table.grid(), g_range.0, g_range.1)?;
    let ns = scales.scales();
    let r = ns.len();
    let d = scales.degree();
    let mut diag = vec![0.0f64; r];
    let mut corr = vec![vec![0.0f64; r]; r];
    for &ih in &hs {
        for &ig in &gs {
            let (h, g) = (table.grid()[ih], table.grid()[ig]);
            let v = table.scaled_variance(h, g)?;
            for i in 0..r {
                diag[i] = diag[i].max(diagonal_entry(ns[i], h, g, v, d)?);
                for j in 0..i {
                    corr[j][i] = corr[j][i].max(table.corr(h, g, ns[j] as f64 / ns[i] as f64)?);
                }
            }
        }
    }
    let provenance = Provenance::WorstCase { h_low: h_range.0, h_high: h_range.1, g_low: g_range.0, g_high: g_range.1 };
    assemble(&diag, |i, j| Ok(corr[i][j]), scales, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::trace::asymptotic_variance;
    use crate::series::make_scales;

    fn table() -> CovTable {
        CovTable::builtin().unwrap()
    }

    #[test]
    fn diagonal_matches_offset_sum() {
        let (h, g) = (0.7, 0.8);
        let scales = ScaleSet::new(vec![32, 64], 1, 20_000).unwrap();
        let cov = rho_null_cov(&scales, h, g, &table()).unwrap();
        for (i, &n) in scales.scales().iter().enumerate() {
            let (sum, _) = asymptotic_variance(n, h, g, 1).unwrap();
            let direct = sum / (fluct_mean_exact(n, h, 1).unwrap() * fluct_mean_exact(n, g, 1).unwrap());
            let rel = (cov.matrix[(i, i)] - direct).abs() / direct;
            assert!(rel < 0.03, "n = {n}: table {} vs direct {direct}", cov.matrix[(i, i)]);
        }
    }

    #[test]
    fn worst_case_dominates_nodes_inside_range() {
        let t = table();
        let scales = make_scales(10_000, 20, 500, 10, 1).unwrap();
        let wc = worst_case_cov(&scales, (0.6, 0.8), (0.7, 0.9), &t).unwrap();
        for (h, g) in [(0.6, 0.7), (0.7, 0.8), (0.8, 0.9), (0.66, 0.84)] {
            let ex = rho_null_cov(&scales, h, g, &t).unwrap();
            for i in 0..ex.dim() {
                assert!(ex.matrix[(i, i)] <= wc.matrix[(i, i)] * (1.0 + 1e-12));
                for j in 0..i {
                    assert!(ex.correlation(i, j) <= wc.correlation(i, j) + 1e-12);
                }
            }
        }
        assert!(matches!(wc.provenance, Provenance::WorstCase { .. }));
    }

    #[test]
    fn correlation_decreases_with_scale_separation() {
        let scales = make_scales(10_000, 20, 500, 10, 1).unwrap();
        let cov = rho_null_cov(&scales, 0.7, 0.8, &table()).unwrap();
        for j in 2..cov.dim() {
            assert!(cov.correlation(0, j) < cov.correlation(0, j - 1));
        }
    }

    #[test]
    fn rejects_malformed_matrices() {
        let s = vec![10, 20];
        let p = Provenance::Exact { h: 0.7, g: 0.7 };
        let ok = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        assert!(NullCovariance::from_matrix(ok, s.clone(), p).is_ok());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(NullCovariance::from_matrix(asym, s.clone(), p).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(NullCovariance::from_matrix(neg, s.clone(), p).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(NullCovariance::from_matrix(indefinite, s.clone(), p).is_err());
        assert!(NullCovariance::from_matrix(DMatrix::identity(3, 3), s, p).is_err());
    }

    #[test]
    fn range_outside_grid_is_rejected() {
        let scales = make_scales(10_000, 20, 500, 5, 1).unwrap();
        assert!(worst_case_cov(&scales, (0.4, 0.6), (0.7, 0.8), &table()).is_err());
        assert!(worst_case_cov(&scales, (0.8, 0.7), (0.7, 0.8), &table()).is_err());
        let d2 = make_scales(10_000, 20, 500, 5, 2).unwrap();
        assert!(rho_null_cov(&d2, 0.7, 0.8, &table()).is_err());
    }
}
