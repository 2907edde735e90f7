//! Orthonormal polynomial bases on `1..=n` used for window detrending.

use nalgebra::DMatrix;

use crate::error::{DccaError, Result};

/// Orthonormal basis of the degree-`d` polynomials evaluated at `1..=n`.
#[derive(Debug, Clone)]
pub struct PolyBasis {
    n: usize,
    columns: Vec<Vec<f64>>,
}

impl PolyBasis {
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if n < degree + 2 {
            return Err(DccaError::InfeasibleScales(format!("window of length {n} too short for degree {degree}")));
        }
        let k = degree + 1;
        // Centered and scaled abscissae keep the Vandermonde well conditioned.
        let half = (n as f64 - 1.0) / 2.0;
        let scale = if half > 0.0 { half } else { 1.0 };
        let vander = DMatrix::from_fn(n, k, |i, j| ((i as f64 - half) / scale).powi(j as i32));
        let qr = vander.qr();
        let r = qr.r();
        let min_diag = (0..k).map(|j| r[(j, j)].abs()).fold(f64::INFINITY, f64::min);
        if !(min_diag > 1e-12) {
            return Err(DccaError::Internal(format!("rank-deficient polynomial fit (n = {n}, degree = {degree})")));
        }
        let q = qr.q();
        let columns = (0..k).map(|j| q.column(j).iter().copied().collect()).collect();
        Ok(Self { n, columns })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn degree(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Removes the least-squares polynomial from `w` in place (two projection passes).
    pub fn residualize(&self, w: &mut [f64]) {
        debug_assert_eq!(w.len(), self.n);
        for _ in 0..2 {
            for q in &self.columns {
                let c: f64 = q.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
    }

    /// Applies `I - P` to every column of a row-major `n x m` matrix (left multiplication).
    pub fn residualize_columns(&self, a: &mut [f64], m: usize) {
        debug_assert_eq!(a.len(), self.n * m);
        let mut coef = vec![0.0; m];
        for q in &self.columns {
            coef.iter_mut().for_each(|c| *c = 0.0);
            for (i, qi) in q.iter().enumerate() {
                let row = &a[i * m..(i + 1) * m];
                for (c, v) in coef.iter_mut().zip(row) {
                    *c += qi * v;
                }
            }
            for (i, qi) in q.iter().enumerate() {
                let row = &mut a[i * m..(i + 1) * m];
                for (v, c) in row.iter_mut().zip(&coef) {
                    *v -= qi * c;
                }
            }
        }
    }

    /// Applies `(I - P)` on the right of every row of a row-major matrix with `n` columns.
    pub fn residualize_rows(&self, a: &mut [f64]) {
        debug_assert_eq!(a.len() % self.n, 0);
        for row in a.chunks_exact_mut(self.n) {
            for q in &self.columns {
                let c: f64 = q.iter().zip(row.iter()).map(|(x, y)| x * y).sum();
                for (v, qi) in row.iter_mut().zip(q) {
                    *v -= c * qi;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_are_orthonormal() {
        for &(n, d) in &[(3usize, 1usize), (10, 3), (500, 5), (10_000, 5)] {
            let b = PolyBasis::new(n, d).unwrap();
            for i in 0..=d {
                for j in 0..=d {
                    let dot: f64 = b.columns()[i].iter().zip(&b.columns()[j]).map(|(x, y)| x * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-10, "n={n} d={d} ({i},{j}) dot={dot}");
                }
            }
        }
    }

    #[test]
    fn too_short_window() {
        assert!(PolyBasis::new(2, 1).is_err());
        assert!(PolyBasis::new(3, 1).is_ok());
    }
}
