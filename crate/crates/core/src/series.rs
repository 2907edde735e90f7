//! Paired series ingestion, integrated profiles and window-scale bookkeeping.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DccaError, Result};

/// Two equal-length increment series together with their integrated profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    y1: Vec<f64>,
    y2: Vec<f64>,
    x1: Vec<f64>,
    x2: Vec<f64>,
}

impl SeriesPair {
    /// Builds a pair from raw increments, forming both profiles.
    pub fn new(y1: Vec<f64>, y2: Vec<f64>) -> Result<Self> {
        if y1.len() != y2.len() {
            return Err(DccaError::LengthMismatch(y1.len(), y2.len()));
        }
        if y1.len() < 2 {
            return Err(DccaError::TooShort { needed: 2, got: y1.len() });
        }
        let x1 = integrate_profile(&y1)?;
        let x2 = integrate_profile(&y2)?;
        Ok(Self { y1, y2, x1, x2 })
    }

    /// Builds a pair from profiles by differencing, then re-integrates so the
    /// stored profiles are exact prefix sums of the stored increments.
    pub fn from_profiles(x1: &[f64], x2: &[f64]) -> Result<Self> {
        Self::new(difference(x1), difference(x2))
    }

    pub fn len(&self) -> usize {
        self.y1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y1.is_empty()
    }

    pub fn y1(&self) -> &[f64] {
        &self.y1
    }

    pub fn y2(&self) -> &[f64] {
        &self.y2
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    pub fn into_increments(self) -> (Vec<f64>, Vec<f64>) {
        (self.y1, self.y2)
    }

    /// Writes the increments as a two-column CSV readable by [`load_pair`].
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "y1,y2")?;
        for (a, b) in self.y1.iter().zip(&self.y2) {
            writeln!(out, "{a},{b}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn difference(x: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for &v in x {
        y.push(v - prev);
        prev = v;
    }
    y
}

/// Prefix sums `x(t) = y(1) + ... + y(t)`.
pub fn integrate_profile(y: &[f64]) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(DccaError::TooShort { needed: 1, got: 0 });
    }
    let mut acc = 0.0;
    let mut x = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        if !v.is_finite() {
            return Err(DccaError::NonFinite(i));
        }
        acc += v;
        x.push(acc);
    }
    Ok(x)
}

/// Strictly increasing window sizes with the detrending degree and per-scale window counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSet {
    scales: Vec<usize>,
    degree: usize,
    len: usize,
}

impl ScaleSet {
    /// Validates `scales` against a series of length `len` and degree `degree`.
    pub fn new(scales: Vec<usize>, degree: usize, len: usize) -> Result<Self> {
        if scales.is_empty() {
            return Err(DccaError::InfeasibleScales("no scales given".into()));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DccaError::InfeasibleScales("scales must be strictly increasing".into()));
        }
        if scales[0] < degree + 2 {
            return Err(DccaError::InfeasibleScales(format!(
                "smallest scale {} below degree + 2 = {}",
                scales[0],
                degree + 2
            )));
        }
        let largest = *scales.last().unwrap();
        if len / largest < 2 {
            return Err(DccaError::InfeasibleScales(format!(
                "largest scale {largest} leaves fewer than two windows in {len} samples"
            )));
        }
        Ok(Self { scales, degree, len })
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Series length the set was validated against.
    pub fn series_len(&self) -> usize {
        self.len
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// `[N / n_i]` for each scale.
    pub fn window_counts(&self) -> Vec<usize> {
        self.scales.iter().map(|&n| self.len / n).collect()
    }

    /// Tail samples dropped at each scale, `N - n_i [N / n_i]`.
    pub fn discarded(&self) -> Vec<usize> {
        self.scales.iter().map(|&n| self.len - n * (self.len / n)).collect()
    }
}

/// Approximately log-spaced integer scales between `n_min` and `n_max`.
///
/// Real-valued geometric points are rounded to the nearest integer and deduplicated.
pub fn make_scales(len: usize, n_min: usize, n_max: usize, r: usize, degree: usize) -> Result<ScaleSet> {
    if r < 2 {
        return Err(DccaError::InfeasibleScales("need at least two scales".into()));
    }
    if n_min < degree + 2 {
        return Err(DccaError::InfeasibleScales(format!("n_min {n_min} below degree + 2 = {}", degree + 2)));
    }
    if n_max > len / 2 {
        return Err(DccaError::InfeasibleScales(format!("n_max {n_max} exceeds N/2 = {}", len / 2)));
    }
    if n_max <= n_min {
        return Err(DccaError::InfeasibleScales(format!("n_max {n_max} must exceed n_min {n_min}")));
    }
    let lo = (n_min as f64).ln();
    let hi = (n_max as f64).ln();
    let mut scales: Vec<usize> = (0..r)
        .map(|i| {
            if i == 0 {
                n_min
            } else if i == r - 1 {
                n_max
            } else {
                let t = i as f64 / (r - 1) as f64;
                (lo + t * (hi - lo)).exp().round() as usize
            }
        })
        .collect();
    scales.dedup();
    if scales.len() < 2 {
        return Err(DccaError::InfeasibleScales("fewer than two distinct scales after rounding".into()));
    }
    ScaleSet::new(scales, degree, len)
}

/// Which columns to read from the input file(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnSpec {
    pub first: usize,
    pub second: usize,
}

/// Reads one or two delimited text files into a [`SeriesPair`].
///
/// With a single file, `columns` (default `0,1`) selects both series from it; with two
/// files, `columns.first` is read from `path_a` and `columns.second` from `path_b`
/// (default `0,0`). Lines starting with `#` are skipped and a single leading header
/// line is detected automatically.
pub fn load_pair(path_a: &Path, path_b: Option<&Path>, columns: Option<ColumnSpec>) -> Result<SeriesPair> {
    let (y1, y2) = match path_b {
        None => {
            let cols = columns.unwrap_or(ColumnSpec { first: 0, second: 1 });
            let text = fs::read_to_string(path_a)?;
            let table = parse_columns(&text, &[cols.first, cols.second])?;
            let mut it = table.into_iter();
            (it.next().unwrap(), it.next().unwrap())
        }
        Some(path_b) => {
            let cols = columns.unwrap_or(ColumnSpec { first: 0, second: 0 });
            let a = parse_columns(&fs::read_to_string(path_a)?, &[cols.first])?;
            let b = parse_columns(&fs::read_to_string(path_b)?, &[cols.second])?;
            (a.into_iter().next().unwrap(), b.into_iter().next().unwrap())
        }
    };
    SeriesPair::new(y1, y2)
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else if line.contains(';') {
        line.split(';').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses the requested columns from delimited text.
pub fn parse_columns(text: &str, columns: &[usize]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    let mut seen_data_line = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = split_fields(line);
        let parsed: std::result::Result<Vec<f64>, String> = columns
            .iter()
            .map(|&c| {
                let field = fields.get(c).ok_or_else(|| format!("missing column {c} ({} fields)", fields.len()))?;
                field.parse::<f64>().map_err(|e| format!("column {c}: {e} ({field:?})"))
            })
            .collect();
        match parsed {
            Ok(values) => {
                for (k, v) in values.into_iter().enumerate() {
                    if !v.is_finite() {
                        return Err(DccaError::Parse {
                            line: lineno + 1,
                            msg: format!("non-finite value in column {}", columns[k]),
                        });
                    }
                    out[k].push(v);
                }
                seen_data_line = true;
            }
            Err(_) if !seen_data_line && out[0].is_empty() && looks_like_header(&fields) => {
                seen_data_line = true;
            }
            Err(msg) => return Err(DccaError::Parse { line: lineno + 1, msg }),
        }
    }
    Ok(out)
}

// A header has at least one field that does not parse as a number.
fn looks_like_header(fields: &[&str]) -> bool {
    fields.iter().any(|f| f.parse::<f64>().is_err())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_of_constants_and_alternating() {
        assert_eq!(integrate_profile(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(integrate_profile(&[1.0, -1.0, 1.0, -1.0]).unwrap(), vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(integrate_profile(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert_eq!(integrate_profile(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 3.0, 6.0]);
    }

    #[test]
    fn profile_rejects_non_finite() {
        assert!(matches!(integrate_profile(&[1.0, f64::NAN]), Err(DccaError::NonFinite(1))));
        assert!(integrate_profile(&[]).is_err());
    }

    #[test]
    fn pair_validation() {
        assert!(matches!(SeriesPair::new(vec![1.0; 3], vec![1.0; 4]), Err(DccaError::LengthMismatch(3, 4))));
        assert!(matches!(SeriesPair::new(vec![1.0], vec![1.0]), Err(DccaError::TooShort { .. })));
        assert!(SeriesPair::new(vec![1.0, f64::INFINITY], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn from_profiles_round_trips() {
        let x1 = [1.5, 2.0, -1.0, 4.0];
        let x2 = [0.0, 1.0, 3.0, 6.0];
        let p = SeriesPair::from_profiles(&x1, &x2).unwrap();
        for (a, b) in p.x1().iter().zip(&x1) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(p.y2(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn scales_exact_geometric() {
        let s = make_scales(20000, 20, 2000, 3, 1).unwrap();
        assert_eq!(s.scales(), &[20, 200, 2000]);
        assert_eq!(s.window_counts(), vec![1000, 100, 10]);
        let s = make_scales(100, 10, 40, 2, 1).unwrap();
        assert_eq!(s.scales(), &[10, 40]);
        assert_eq!(s.discarded(), vec![0, 20]);
    }

    #[test]
    fn scales_infeasible() {
        assert!(make_scales(100, 2, 40, 3, 1).is_err());
        assert!(make_scales(100, 10, 60, 3, 1).is_err());
        assert!(make_scales(100, 10, 40, 1, 1).is_err());
        assert!(make_scales(100, 10, 11, 5, 1).is_ok());
        assert!(ScaleSet::new(vec![10, 10], 1, 100).is_err());
        assert!(ScaleSet::new(vec![10, 60], 1, 100).is_err());
    }

    #[test]
    fn parses_csv_with_header_and_comments() {
        let text = "# comment\na,b\n1,2\n3,4\n\n5,6\n";
        let cols = parse_columns(text, &[0, 1]).unwrap();
        assert_eq!(cols[0], vec![1.0, 3.0, 5.0]);
        assert_eq!(cols[1], vec![2.0, 4.0, 6.0]);
        let tsv = "x\ty\n1\t2\n";
        assert_eq!(parse_columns(tsv, &[1]).unwrap()[0], vec![2.0]);
        let ws = "1 2\n3 4\n";
        assert_eq!(parse_columns(ws, &[0]).unwrap()[0], vec![1.0, 3.0]);
    }

    #[test]
    fn parse_failure_after_data() {
        let text = "1,2\nfoo,4\n";
        assert!(matches!(parse_columns(text, &[0, 1]), Err(DccaError::Parse { line: 2, .. })));
        assert!(parse_columns("1,2\n", &[2]).is_err());
    }

    #[test]
    fn load_one_and_two_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        fs::write(&a, "1\n2\n3\n4\n5\n").unwrap();
        fs::write(&b, "value\n5\n4\n3\n2\n1\n").unwrap();
        let p = load_pair(&a, Some(&b), None).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.x2(), &[5.0, 9.0, 12.0, 14.0, 15.0]);

        let c = dir.path().join("c.csv");
        fs::write(&c, "1,2\n3,4\n5\n").unwrap();
        assert!(load_pair(&c, None, None).is_err());

        let short = dir.path().join("s.csv");
        fs::write(&short, "1\n").unwrap();
        assert!(load_pair(&short, Some(&b), None).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let p = SeriesPair::new(vec![0.1, -2.5e-7, 3.0], vec![1.0 / 3.0, 2.0, -0.0]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let cols = parse_columns(std::str::from_utf8(&buf).unwrap(), &[0, 1]).unwrap();
        assert_eq!(cols[0], p.y1());
        assert_eq!(cols[1], p.y2());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn profile_is_linear(
                y in prop::collection::vec(-10.0f64..10.0, 1..200),
                a in -3.0f64..3.0,
                b in -3.0f64..3.0,
                seed in 0u64..1000,
            ) {
                let z: Vec<f64> = y.iter().enumerate().map(|(i, v)| v * 1.7 + (i as f64 + seed as f64).sin()).collect();
                let combo: Vec<f64> = y.iter().zip(&z).map(|(u, v)| a * u + b * v).collect();
                let lhs = integrate_profile(&combo).unwrap();
                let py = integrate_profile(&y).unwrap();
                let pz = integrate_profile(&z).unwrap();
                for i in 0..lhs.len() {
                    let rhs = a * py[i] + b * pz[i];
                    let scale = (a.abs() * py[i].abs() + b.abs() * pz[i].abs()).max(1.0);
                    prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * scale * (i as f64 + 1.0));
                }
            }

            #[test]
            fn difference_inverts_profile(y in prop::collection::vec(-1e3f64..1e3, 2..300)) {
                let x = integrate_profile(&y).unwrap();
                for t in 1..y.len() {
                    let d = x[t] - x[t - 1];
                    prop_assert!((d - y[t]).abs() <= 1e-12 * x[t].abs().max(x[t-1].abs()).max(1.0));
                }
            }

            #[test]
            fn scales_are_log_spaced(n_min in 10usize..60, factor in 3usize..40, r in 2usize..12) {
                let n_max = n_min * factor;
                let len = n_max * 2 + 7;
                let g = (n_max as f64 / n_min as f64).powf(1.0 / (r - 1) as f64);
                prop_assume!(g >= 1.1);
                let s = make_scales(len, n_min, n_max, r, 1).unwrap();
                let again = make_scales(len, n_min, n_max, r, 1).unwrap();
                prop_assert_eq!(&s, &again);
                for w in s.scales().windows(2) {
                    let ratio = w[1] as f64 / w[0] as f64;
                    prop_assert!((ratio / g - 1.0).abs() <= 0.25, "ratio {} vs {}", ratio, g);
                }
            }
        }
    }
}
