//! Tabulated asymptotic variances and cross-scale correlations on a Hurst grid.
//!
//! Text format `covtab/1`:
//!
//! ```text
//! covtab/1
//! degree <d>
//! n_tab <n>
//! grid <H_1> ... <H_k>
//! ratios <q_1> ... <q_m>
//! mean <μ(H_1)/n^{2H_1}> ... <μ(H_k)/n^{2H_k}>
//! point <H> <G> <V/n^{2H+2G}> <offsets> <corr(q_1)> ... <corr(q_m)>
//! ```
//!
//! `point` lines may appear in any order, which lets an interrupted tabulation resume
//! by appending.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::spectral::{combine, density_on, transfer_on, SpectralGrid};
use super::trace::{
    decay_exponent, fluct_mean_exact, frobenius, residual_block, tail_bound, MIN_OFFSETS, OFFSET_CAP, TAIL_TOL,
};
use crate::error::{DccaError, Result};
use crate::poly::PolyBasis;

pub const TABLE_VERSION: &str = "covtab/1";

const DEFAULT_TABLE: &str = include_str!("../../data/covtab_d1.txt");

/// Default Hurst grid `0.50, 0.52, ..., 0.98`.
pub fn default_grid() -> Vec<f64> {
    (0..25).map(|i| round_grid(0.5 + 0.02 * i as f64)).collect()
}

/// Default ratio set `0.01, 0.02, ..., 1.00`.
pub fn default_ratios() -> Vec<f64> {
    (1..=100).map(|i| round_grid(i as f64 / 100.0)).collect()
}

fn round_grid(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Values at one `(H, G)` grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePoint {
    pub h: f64,
    pub g: f64,
    /// `[N/n] · Var F²_DCCA(n)` at `n = n_tab`, divided by `n_tab^{2H+2G}`.
    pub variance: f64,
    /// Positive window offsets summed before the tail bound was met.
    pub offsets: usize,
    /// Correlation of `F²_DCCA(n_tab)` with `F²_DCCA(q · n_tab)` per tabulated ratio `q`.
    pub corr: Vec<f64>,
}

/// What to tabulate.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub degree: usize,
    pub n_tab: usize,
    pub grid: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl Default for TableSpec {
    fn default() -> Self {
        Self { degree: 1, n_tab: 512, grid: default_grid(), ratios: default_ratios() }
    }
}

impl TableSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DccaError::InvalidParameter(m));
        if self.n_tab < 128 {
            return bad(format!("n_tab = {} below 128", self.n_tab));
        }
        if self.n_tab > crate::fbm::MAX_BLOCK {
            return bad(format!("n_tab = {} above {}", self.n_tab, crate::fbm::MAX_BLOCK));
        }
        if self.grid.is_empty() || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("Hurst grid must be non-empty and strictly increasing".into());
        }
        if self.grid.iter().any(|&h| !(0.5..1.0).contains(&h)) {
            return bad("Hurst grid values must lie in [0.5, 1)".into());
        }
        if self.ratios.is_empty() || self.ratios.windows(2).any(|w| w[0] >= w[1]) {
            return bad("ratios must be non-empty and strictly increasing".into());
        }
        if self.ratios.iter().any(|&q| !(q > 0.0 && q <= 1.0)) {
            return bad("ratios must lie in (0, 1]".into());
        }
        Ok(())
    }

    /// Window length paired with `n_tab` for ratio `q`.
    pub fn partner_scale(&self, q: f64) -> usize {
        ((q * self.n_tab as f64).round() as usize).max(self.degree + 2)
    }
}

/// Tabulated null moments for one detrending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct CovTable {
    pub spec: TableSpec,
    /// `μ_H(n_tab) / n_tab^{2H}` per grid value.
    pub mean_scaled: Vec<f64>,
    points: Vec<Option<TablePoint>>,
}

fn fmt_list(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

impl TablePoint {
    /// The `point` line of the text format, newline-terminated.
    pub fn to_line(&self) -> String {
        let mut s = format!("point {} {} {} {}", self.h, self.g, self.variance, self.offsets);
        fmt_list(&mut s, &self.corr);
        s
    }
}

fn table_err(line: usize, msg: impl Into<String>) -> DccaError {
    DccaError::Table(format!("line {line}: {}", msg.into()))
}

fn parse_floats(fields: &[&str], line: usize) -> Result<Vec<f64>> {
    fields.iter().map(|f| f.parse::<f64>().map_err(|_| table_err(line, format!("bad number '{f}'")))).collect()
}

impl CovTable {
    /// A table with exact means and no grid points yet.
    pub fn empty(spec: &TableSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_tab;
        let mean_scaled = spec
            .grid
            .par_iter()
            .map(|&h| Ok(fluct_mean_exact(n, h, spec.degree)? / (n as f64).powf(2.0 * h)))
            .collect::<Result<Vec<_>>>()?;
        let k = spec.grid.len();
        Ok(Self { spec: spec.clone(), mean_scaled, points: vec![None; k * k] })
    }

    /// The built-in table (degree 1).
    pub fn builtin() -> Result<Self> {
        Self::parse(DEFAULT_TABLE)
    }

    /// Embedded table text, for checksums and export.
    pub fn builtin_text() -> &'static str {
        DEFAULT_TABLE
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    pub fn grid(&self) -> &[f64] {
        &self.spec.grid
    }

    pub fn ratios(&self) -> &[f64] {
        &self.spec.ratios
    }

    fn index(&self, ih: usize, ig: usize) -> usize {
        ih * self.spec.grid.len() + ig
    }

    pub fn point(&self, ih: usize, ig: usize) -> Option<&TablePoint> {
        self.points.get(self.index(ih, ig)).and_then(|p| p.as_ref())
    }

    pub fn completed(&self) -> usize {
        self.points.iter().filter(|p| p.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.completed() == self.points.len()
    }

    fn require(&self, ih: usize, ig: usize) -> Result<&TablePoint> {
        self.point(ih, ig).ok_or_else(|| {
            DccaError::Table(format!(
                "grid point ({}, {}) missing from a partial table",
                self.spec.grid[ih], self.spec.grid[ig]
            ))
        })
    }

    fn insert(&mut self, p: TablePoint) -> Result<()> {
        let ih = self.node_index(p.h).ok_or_else(|| DccaError::Table(format!("H = {} not on grid", p.h)))?;
        let ig = self.node_index(p.g).ok_or_else(|| DccaError::Table(format!("G = {} not on grid", p.g)))?;
        if p.corr.len() != self.spec.ratios.len() {
            return Err(DccaError::Table(format!(
                "point ({}, {}) has {} correlations for {} ratios",
                p.h,
                p.g,
                p.corr.len(),
                self.spec.ratios.len()
            )));
        }
        let idx = self.index(ih, ig);
        self.points[idx] = Some(p);
        Ok(())
    }

    /// Grid index of an exact node value.
    pub fn node_index(&self, h: f64) -> Option<usize> {
        self.spec.grid.iter().position(|&x| (x - h).abs() < 1e-9)
    }

    /// Parses a complete table.
    pub fn parse(text: &str) -> Result<Self> {
        let t = Self::parse_partial(text)?;
        if !t.is_complete() {
            return Err(DccaError::Table(format!(
                "incomplete table: {} of {} grid points",
                t.completed(),
                t.points.len()
            )));
        }
        Ok(t)
    }

    /// Parses a table that may be missing `point` lines; a truncated final line is ignored.
    pub fn parse_partial(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, first) = lines.next().ok_or_else(|| DccaError::Table("empty table".into()))?;
        if first != TABLE_VERSION {
            return Err(DccaError::TableVersion { expected: TABLE_VERSION.into(), found: first.into() });
        }
        let mut header = |key: &str| -> Result<(usize, Vec<String>)> {
            let (no, line) = lines.next().ok_or_else(|| DccaError::Table(format!("missing '{key}' line")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(table_err(no, format!("expected '{key}'")));
            }
            Ok((no, parts.map(str::to_owned).collect()))
        };
        let single = |(no, v): (usize, Vec<String>)| -> Result<usize> {
            match v.as_slice() {
                [x] => x.parse().map_err(|_| table_err(no, format!("bad integer '{x}'"))),
                _ => Err(table_err(no, "expected one value")),
            }
        };
        let floats = |(no, v): (usize, Vec<String>)| -> Result<Vec<f64>> {
            parse_floats(&v.iter().map(String::as_str).collect::<Vec<_>>(), no)
        };
        let degree = single(header("degree")?)?;
        let n_tab = single(header("n_tab")?)?;
        let grid = floats(header("grid")?)?;
        let ratios = floats(header("ratios")?)?;
        let mean_scaled = floats(header("mean")?)?;
        let spec = TableSpec { degree, n_tab, grid, ratios };
        spec.validate().map_err(|e| DccaError::Table(e.to_string()))?;
        if mean_scaled.len() != spec.grid.len() {
            return Err(DccaError::Table("mean line length differs from grid".into()));
        }
        let k = spec.grid.len();
        let mut table = Self { spec, mean_scaled, points: vec![None; k * k] };
        let rest: Vec<(usize, &str)> = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('#')).collect();
        let ends_with_newline = text.ends_with('\n');
        for (pos, &(no, line)) in rest.iter().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = (|| -> Result<TablePoint> {
                if fields.first() != Some(&"point") || fields.len() != 5 + table.spec.ratios.len() {
                    return Err(table_err(no, "malformed point line"));
                }
                let head = parse_floats(&fields[1..4], no)?;
                let offsets = fields[4].parse().map_err(|_| table_err(no, "bad offset count"))?;
                let corr = parse_floats(&fields[5..], no)?;
                Ok(TablePoint { h: head[0], g: head[1], variance: head[2], offsets, corr })
            })();
            match parsed {
                Ok(p) => table.insert(p)?,
                // An interrupted writer can leave one partial trailing line.
                Err(_) if pos + 1 == rest.len() && !ends_with_newline => break,
                Err(e) => return Err(e),
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Header lines (everything before the `point` lines).
    pub fn header_text(&self) -> String {
        let mut s = format!("{TABLE_VERSION}\ndegree {}\nn_tab {}\ngrid", self.spec.degree, self.spec.n_tab);
        fmt_list(&mut s, &self.spec.grid);
        s.push_str("ratios");
        fmt_list(&mut s, &self.spec.ratios);
        s.push_str("mean");
        fmt_list(&mut s, &self.mean_scaled);
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = self.header_text();
        for p in self.points.iter().flatten() {
            s.push_str(&p.to_line());
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// SHA-256 of the canonical text form.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// Bracketing grid indices and the weight of the upper node.
    fn bracket(&self, h: f64) -> Result<(usize, usize, f64)> {
        let grid = &self.spec.grid;
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        if !(h >= lo - 1e-12 && h <= hi + 1e-12) {
            return Err(DccaError::InvalidParameter(format!(
                "Hurst exponent {h} outside tabulated range [{lo}, {hi}]"
            )));
        }
        if let Some(i) = self.node_index(h) {
            return Ok((i, i, 0.0));
        }
        let i = grid.iter().rposition(|&x| x <= h).unwrap_or(0);
        let j = (i + 1).min(grid.len() - 1);
        Ok((i, j, (h - grid[i]) / (grid[j] - grid[i])))
    }

    fn bilinear(&self, h: f64, g: f64, f: impl Fn(&TablePoint) -> f64) -> Result<f64> {
        let (h0, h1, wh) = self.bracket(h)?;
        let (g0, g1, wg) = self.bracket(g)?;
        let v00 = f(self.require(h0, g0)?);
        let v01 = f(self.require(h0, g1)?);
        let v10 = f(self.require(h1, g0)?);
        let v11 = f(self.require(h1, g1)?);
        Ok((1.0 - wh) * ((1.0 - wg) * v00 + wg * v01) + wh * ((1.0 - wg) * v10 + wg * v11))
    }

    /// Scaled asymptotic variance, bilinear in `(H, G)`.
    pub fn scaled_variance(&self, h: f64, g: f64) -> Result<f64> {
        self.bilinear(h, g, |p| p.variance)
    }

    /// Bracketing ratio indices and the weight of the upper one; ratios below the
    /// smallest tabulated value take its entry.
    ///
    /// Identical scales are perfectly correlated while distinct ones are not, so a ratio
    /// strictly below 1 never interpolates towards the entry at 1.
    pub fn ratio_bracket(&self, q: f64) -> (usize, usize, f64) {
        let r = &self.spec.ratios;
        let below_one = r.iter().rposition(|&x| x < 1.0 - 1e-12);
        if q < 1.0 - 1e-12 && below_one.is_some_and(|b| q >= r[b]) {
            let b = below_one.unwrap();
            return (b, b, 0.0);
        }
        let k = r.iter().position(|&x| x >= q - 1e-12).unwrap_or(r.len() - 1);
        if k == 0 || (r[k] - q).abs() <= 1e-12 || q > r[k] {
            return (k, k, 0.0);
        }
        (k - 1, k, (q - r[k - 1]) / (r[k] - r[k - 1]))
    }

    /// Cross-scale correlation at ratio `q ≤ 1`: linear in `q`, bilinear in `(H, G)`.
    pub fn corr(&self, h: f64, g: f64, q: f64) -> Result<f64> {
        let (k0, k1, w) = self.ratio_bracket(q);
        self.bilinear(h, g, |p| (1.0 - w) * p.corr[k0] + w * p.corr[k1])
    }
}

/// Progress callback: receives each finished grid point.
pub type PointSink<'a> = dyn FnMut(&TablePoint) -> Result<()> + 'a;

/// `Σ_k c(k m)` over window offsets at scale `m` for each pair of grid indices.
///
/// Offsets are processed outermost so each residualized kernel block is built once per
/// Hurst value and offset. `done(p, sum, offsets)` fires as soon as pair `p` meets its
/// tail bound.
fn lattice_sums(
    m: usize,
    degree: usize,
    grid: &[f64],
    pairs: &[(usize, usize)],
    mut done: impl FnMut(usize, f64, usize) -> Result<()>,
) -> Result<()> {
    let basis = PolyBasis::new(m, degree)?;
    let norm = (m * m) as f64;
    let mut sums = vec![0.0; pairs.len()];
    let mut active: Vec<usize> = (0..pairs.len()).collect();
    for offset in 0..=OFFSET_CAP {
        if active.is_empty() {
            return Ok(());
        }
        let needed: BTreeSet<usize> = active.iter().flat_map(|&p| [pairs[p].0, pairs[p].1]).collect();
        let needed: Vec<usize> = needed.into_iter().collect();
        let blocks: Vec<Vec<f64>> =
            needed.par_iter().map(|&i| residual_block(&basis, &basis, (offset * m) as i64, grid[i])).collect();
        let block_of = |i: usize| &blocks[needed.binary_search(&i).unwrap()];
        let terms: Vec<f64> =
            active.par_iter().map(|&p| frobenius(block_of(pairs[p].0), block_of(pairs[p].1)) / norm).collect();
        let mut still = Vec::with_capacity(active.len());
        for (&p, &c) in active.iter().zip(&terms) {
            sums[p] += if offset == 0 { c } else { 2.0 * c };
            let (i, j) = pairs[p];
            let alpha = decay_exponent(grid[i], grid[j], degree);
            if offset >= MIN_OFFSETS && tail_bound(c, offset, alpha) < TAIL_TOL * sums[p].abs() {
                done(p, sums[p], offset)?;
            } else {
                still.push(p);
            }
        }
        active = still;
    }
    if active.is_empty() {
        Ok(())
    } else {
        Err(DccaError::NonConvergent { cap: OFFSET_CAP })
    }
}

/// Tabulates every grid point not already present in `existing`.
///
/// Cross-scale correlations combine the alignment-summed spectral covariance with the
/// offset-summed variances at both scales, so the variances of every partner scale are
/// computed first. Points at `n_tab` are then emitted as soon as their tail bound is met.
pub fn tabulate(spec: &TableSpec, existing: Option<&CovTable>, sink: &mut PointSink<'_>) -> Result<CovTable> {
    spec.validate()?;
    if let Some(t) = existing {
        if &t.spec != spec {
            return Err(DccaError::Table("existing table has a different specification".into()));
        }
    }
    let n = spec.n_tab;
    let k = spec.grid.len();
    let mut table = match existing {
        Some(t) => t.clone(),
        None => CovTable::empty(spec)?,
    };

    // Unordered pairs with at least one orientation missing.
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for i in 0..k {
        for j in i..k {
            if table.point(i, j).is_none() || table.point(j, i).is_none() {
                pending.push((i, j));
            }
        }
    }
    if pending.is_empty() {
        return Ok(table);
    }
    for &(i, j) in &pending {
        if decay_exponent(spec.grid[i], spec.grid[j], spec.degree) >= -1.0 {
            return Err(DccaError::NonConvergent { cap: OFFSET_CAP });
        }
    }

    let partners: Vec<usize> = spec.ratios.iter().map(|&q| spec.partner_scale(q)).collect();
    let mut distinct: Vec<usize> = partners.iter().copied().filter(|&m| m != n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    // partner_var[s][p]: offset-summed variance at scale distinct[s] for pending pair p.
    let partner_var: Vec<Vec<f64>> = distinct
        .iter()
        .map(|&m| {
            let mut v = vec![0.0; pending.len()];
            lattice_sums(m, spec.degree, &spec.grid, &pending, |p, sum, _| {
                v[p] = sum;
                Ok(())
            })?;
            Ok(v)
        })
        .collect::<Result<_>>()?;

    let sgrid = SpectralGrid::new(n);
    let t_tab = transfer_on(&sgrid, n, spec.degree)?;
    let t_partner: Vec<Vec<f64>> =
        partners.par_iter().map(|&m| transfer_on(&sgrid, m, spec.degree)).collect::<Result<_>>()?;
    let densities: Vec<Vec<f64>> = spec.grid.par_iter().map(|&h| density_on(&sgrid, h)).collect();

    let finish = |p: usize, sum: f64, offsets: usize| -> TablePoint {
        let (i, j) = pending[p];
        let (h, g) = (spec.grid[i], spec.grid[j]);
        let w: Vec<f64> = densities[i].iter().zip(&densities[j]).map(|(a, b)| a * b).collect();
        let corr = partners
            .iter()
            .zip(&t_partner)
            .map(|(&m, tm)| {
                if m == n {
                    return 1.0;
                }
                let var_m = partner_var[distinct.binary_search(&m).unwrap()][p];
                let s_nm = combine(&sgrid, &w, &t_tab, tm, n, m);
                (s_nm / ((n as f64 * sum) * (m as f64 * var_m)).sqrt()).clamp(0.0, 1.0)
            })
            .collect();
        TablePoint { h, g, variance: sum / (n as f64).powf(2.0 * (h + g)), offsets, corr }
    };

    lattice_sums(n, spec.degree, &spec.grid, &pending, |p, sum, offsets| {
        let (i, j) = pending[p];
        let pt = finish(p, sum, offsets);
        for (a, b) in [(i, j), (j, i)] {
            if table.point(a, b).is_none() {
                let oriented = TablePoint { h: spec.grid[a], g: spec.grid[b], ..pt.clone() };
                sink(&oriented)?;
                table.insert(oriented)?;
            }
            if i == j {
                break;
            }
        }
        Ok(())
    })?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> TableSpec {
        TableSpec { degree: 1, n_tab: 128, grid: vec![0.5, 0.7], ratios: vec![0.1, 0.5, 1.0] }
    }

    #[test]
    fn tiny_table_properties_and_roundtrip() {
        let mut seen = 0;
        let t = tabulate(&tiny_spec(), None, &mut |_| {
            seen += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, 4);
        assert!(t.is_complete());
        for i in 0..2 {
            for j in 0..2 {
                let p = t.point(i, j).unwrap();
                assert!(p.variance > 0.0);
                assert!(p.corr.iter().all(|&c| (0.0..=1.0).contains(&c)));
                assert!((p.corr[2] - 1.0).abs() < 1e-12);
                assert!(p.corr[0] < p.corr[1]);
            }
        }
        assert_eq!(t.point(0, 1).unwrap().variance, t.point(1, 0).unwrap().variance);
        let back = CovTable::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.checksum(), t.checksum());
    }

    #[test]
    fn resume_from_partial_text() {
        let spec = tiny_spec();
        let full = tabulate(&spec, None, &mut |_| Ok(())).unwrap();
        let mut text = full.header_text();
        text.push_str(&full.point(0, 0).unwrap().to_line());
        text.push_str("point 0.7 0.5 1.2");
        let partial = CovTable::parse_partial(&text).unwrap();
        assert_eq!(partial.completed(), 1);
        assert!(CovTable::parse(&text).is_err());
        let mut added = 0;
        let resumed = tabulate(&spec, Some(&partial), &mut |_| {
            added += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(added, 3);
        assert_eq!(resumed, full);
        let again = tabulate(&spec, Some(&resumed), &mut |_| panic!("no work expected")).unwrap();
        assert_eq!(again, full);
    }

    #[test]
    fn version_and_spec_checks() {
        assert!(matches!(CovTable::parse("covtab/2\n"), Err(DccaError::TableVersion { .. })));
        let mut spec = tiny_spec();
        spec.n_tab = 64;
        assert!(tabulate(&spec, None, &mut |_| Ok(())).is_err());
        let spec = TableSpec { degree: 0, n_tab: 128, grid: vec![0.8], ratios: vec![1.0] };
        assert!(matches!(tabulate(&spec, None, &mut |_| Ok(())), Err(DccaError::NonConvergent { .. })));
    }

    #[test]
    fn lookups() {
        let t = tabulate(&tiny_spec(), None, &mut |_| Ok(())).unwrap();
        assert_eq!(t.ratio_bracket(0.05), (0, 0, 0.0));
        assert_eq!(t.ratio_bracket(0.1), (0, 0, 0.0));
        assert_eq!(t.ratio_bracket(0.5), (1, 1, 0.0));
        let (a, b, w) = t.ratio_bracket(0.3);
        assert_eq!((a, b), (0, 1));
        assert!((w - 0.5).abs() < 1e-12);
        let p = t.point(1, 0).unwrap();
        let want = 0.5 * (p.corr[0] + p.corr[1]);
        assert!((t.corr(0.7, 0.5, 0.3).unwrap() - want).abs() < 1e-12);
        let v00 = t.point(0, 0).unwrap().variance;
        let v11 = t.point(1, 1).unwrap().variance;
        assert_eq!(t.scaled_variance(0.5, 0.5).unwrap(), v00);
        let mid = t.scaled_variance(0.6, 0.6).unwrap();
        let v01 = t.point(0, 1).unwrap().variance;
        assert!((mid - 0.25 * (v00 + v11 + 2.0 * v01)).abs() < 1e-12 * mid);
        assert!(t.scaled_variance(0.45, 0.6).is_err());
        assert!(t.scaled_variance(0.6, 0.75).is_err());
    }

    #[test]
    fn builtin_table_loads() {
        let t = CovTable::builtin().unwrap();
        assert_eq!(t.degree(), 1);
        assert!(t.is_complete());
        assert!((t.corr(0.7, 0.8, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }
}
