//! Monte Carlo checks of the exact moment formulas and the generators.

use dcca_core::asymptotics::nullcov::rho_null_cov;
use dcca_core::asymptotics::table::{tabulate, TableSpec};
use dcca_core::asymptotics::trace::fluct_mean_exact;
use dcca_core::fbm::{fgn_autocov, window_cov_block, FbmParams, PairKind};
use dcca_core::fluctuation::{detrend_window, hurst_estimate};
use dcca_core::simulate::{gen_mixture, replicate_seed, BfgnGenerator, SimSpec};
use dcca_core::{make_scales, CovTable, FluctuationSet, ScaleSet, SeriesPair};
use rayon::prelude::*;

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

fn draws(len: usize, params: FbmParams, reps: usize, seed: u64) -> Vec<SeriesPair> {
    let gen = BfgnGenerator::new(len, &params).unwrap();
    (0..reps).into_par_iter().map(|i| gen.generate(replicate_seed(seed, i as u64)).unwrap()).collect()
}

#[test]
fn fbm_block_matches_simulated_windows() {
    let (n, j, h) = (16, 2, 0.8);
    let block = window_cov_block(n, n, j, &FbmParams::null(h, h), PairKind::Auto1).unwrap().matrix;
    let reps = 100_000;
    let paths: Vec<Vec<f64>> =
        draws((j + 1) * n, FbmParams::null(h, h), reps, 11).into_iter().map(|p| p.x1().to_vec()).collect();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let prod: Vec<f64> = paths.iter().map(|x| x[a] * x[j * n + b]).collect();
            let (m, sd) = mean_sd(&prod);
            worst = worst.max((m - block[(a, b)]).abs() / (sd / (reps as f64).sqrt()));
        }
    }
    assert!(worst < 3.0, "largest deviation {worst:.2} standard errors");
}

#[test]
fn dfa_mean_matches_trace_formula() {
    let (n, h) = (64, 0.6);
    let exact = fluct_mean_exact(n, h, 1).unwrap();
    let reps = 100_000;
    let f2: Vec<f64> = draws(n, FbmParams::null(h, h), reps, 12)
        .par_iter()
        .map(|p| detrend_window(p.x1(), 1).unwrap().iter().map(|r| r * r).sum::<f64>() / n as f64)
        .collect();
    let (m, sd) = mean_sd(&f2);
    assert!((m - exact).abs() < 3.0 * sd / (reps as f64).sqrt(), "sample {m} vs exact {exact}");
}

#[test]
fn null_rho_variance_matches_covariance_diagonal() {
    let (len, n, h, g) = (10_000, 100, 0.7, 0.8);
    let table = CovTable::builtin().unwrap();
    let scales = ScaleSet::new(vec![n], 1, len).unwrap();
    let cov = rho_null_cov(&scales, h, g, &table).unwrap();
    let model = cov.matrix[(0, 0)] / scales.window_counts()[0] as f64;
    let rho: Vec<f64> = draws(len, FbmParams::null(h, g), 10_000, 13)
        .par_iter()
        .map(|p| FluctuationSet::compute(p, &scales).unwrap().rho[0])
        .collect();
    let (_, sd) = mean_sd(&rho);
    let rel = (sd * sd - model).abs() / model;
    assert!(rel < 0.10, "sample variance {} vs model {model}", sd * sd);
}

#[test]
fn cross_fluctuation_is_centred_and_uncorrelated_with_auto() {
    let scales = ScaleSet::new(vec![50], 1, 20_000).unwrap();
    let fl: Vec<FluctuationSet> = draws(20_000, FbmParams::null(0.7, 0.8), 1000, 14)
        .par_iter()
        .map(|p| FluctuationSet::compute(p, &scales).unwrap())
        .collect();
    let cross: Vec<f64> = fl.iter().map(|f| f.f2_cross[0]).collect();
    let auto1: Vec<f64> = fl.iter().map(|f| f.f2_auto1[0]).collect();
    let auto2: Vec<f64> = fl.iter().map(|f| f.f2_auto2[0]).collect();
    let reps = cross.len() as f64;
    let (mc, sc) = mean_sd(&cross);
    assert!(mc.abs() < 3.0 * sc / reps.sqrt());
    for other in [&auto1, &auto2] {
        let (mo, _) = mean_sd(other);
        let prod: Vec<f64> = cross.iter().zip(other.iter()).map(|(a, b)| (a - mc) * (b - mo)).collect();
        let (mp, sp) = mean_sd(&prod);
        assert!(mp.abs() < 3.0 * sp / reps.sqrt());
    }
    let prod: Vec<f64> = auto1.iter().zip(&auto2).map(|(a, b)| a * b).collect();
    let (ma, sa) = mean_sd(&prod);
    let expect = mean_sd(&auto1).0 * mean_sd(&auto2).0;
    assert!((ma - expect).abs() < 3.0 * sa / reps.sqrt());
}

#[test]
fn tabulated_variance_is_stable_under_doubling_resolution() {
    let spec = |n_tab| TableSpec { degree: 1, n_tab, grid: vec![0.6, 0.8, 0.9], ratios: vec![0.5, 1.0] };
    let coarse = tabulate(&spec(128), None, &mut |_| Ok(())).unwrap();
    let fine = tabulate(&spec(256), None, &mut |_| Ok(())).unwrap();
    for ih in 0..3 {
        for ig in 0..3 {
            let (a, b) = (coarse.point(ih, ig).unwrap().variance, fine.point(ih, ig).unwrap().variance);
            assert!((a - b).abs() / b < 0.02, "node ({ih}, {ig}): {a} vs {b}");
        }
    }
}

#[test]
fn marginal_autocovariance_matches_fgn() {
    let (len, h, reps) = (256, 0.75, 500);
    let pairs = draws(len, FbmParams::null(h, 0.6), reps, 15);
    for lag in 0..=10 {
        let per_rep: Vec<f64> = pairs
            .iter()
            .map(|p| {
                let y = p.y1();
                (0..len - lag).map(|t| y[t] * y[t + lag]).sum::<f64>() / (len - lag) as f64
            })
            .collect();
        let (m, sd) = mean_sd(&per_rep);
        let exact = fgn_autocov(lag as i64, h, 1.0).unwrap();
        assert!((m - exact).abs() < 3.0 * sd / (reps as f64).sqrt(), "lag {lag}: {m} vs {exact}");
    }
}

#[test]
fn instantaneous_correlation_is_reproduced() {
    let corr: Vec<f64> = draws(4096, FbmParams::correlated(0.7, 0.8, 0.4), 100, 16)
        .iter()
        .map(|p| {
            let (a, b) = (p.y1(), p.y2());
            let (ma, sa) = mean_sd(a);
            let (mb, sb) = mean_sd(b);
            a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / ((a.len() - 1) as f64 * sa * sb)
        })
        .collect();
    let (m, sd) = mean_sd(&corr);
    assert!((m - 0.4).abs() < 3.0 * sd / 10.0, "mean correlation {m}");
}

fn hurst_hits(pairs: &[SeriesPair], scales: &ScaleSet, lo: f64, hi: f64) -> usize {
    pairs
        .par_iter()
        .filter(|p| {
            let fl = FluctuationSet::compute(p, scales).unwrap();
            let est = hurst_estimate(&fl.f2_auto1, scales.scales()).unwrap().h_hat;
            (lo..=hi).contains(&est)
        })
        .count()
}

#[test]
fn dfa_recovers_hurst_exponent() {
    let scales = make_scales(40_000, 20, 2000, 10, 1).unwrap();
    let pairs = draws(40_000, FbmParams::null(0.8, 0.7), 200, 17);
    assert!(hurst_hits(&pairs, &scales, 0.75, 0.85) >= 190);

    let gen = BfgnGenerator::new(20_000, &FbmParams::null(0.8, 0.7)).unwrap();
    let heavy: Vec<SeriesPair> =
        (0..100).into_par_iter().map(|i| gen.generate_nongaussian(3.0, replicate_seed(18, i)).unwrap()).collect();
    let scales = make_scales(20_000, 20, 2000, 10, 1).unwrap();
    assert!(hurst_hits(&heavy, &scales, 0.72, 0.88) >= 90);
}

#[test]
fn circulant_and_dense_generators_agree_in_distribution() {
    let p = FbmParams::null(0.7, 0.8);
    let circ = BfgnGenerator::circulant(64, &p).unwrap();
    let dense = BfgnGenerator::dense(64, &p).unwrap();
    assert!(circ.is_circulant() && !dense.is_circulant());
    let sample = |g: &BfgnGenerator, seed: u64| -> Vec<f64> {
        (0..1000).map(|i| g.generate(replicate_seed(seed, i)).unwrap().y2()[0]).collect()
    };
    let (mut a, mut b) = (sample(&circ, 19), sample(&dense, 20));
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    // Two-sample Kolmogorov-Smirnov distance against its 1% critical value.
    let (mut i, mut j, mut dist) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        dist = dist.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let critical = 1.628 * ((a.len() + b.len()) as f64 / (a.len() * b.len()) as f64).sqrt();
    assert!(dist < critical, "KS distance {dist} vs {critical}");
}

#[test]
fn mixture_has_short_range_but_no_long_range_correlation() {
    let len = 20_000;
    let scales = make_scales(len, 20, 1000, 5, 1).unwrap();
    let results: Vec<(f64, f64)> = (0..200)
        .into_par_iter()
        .map(|i| {
            let p = gen_mixture(&SimSpec::mixture(len, replicate_seed(21, i))).unwrap();
            let lag0 = p.y1().iter().zip(p.y2()).map(|(a, b)| a * b).sum::<f64>() / len as f64;
            let fl = FluctuationSet::compute(&p, &scales).unwrap();
            (lag0, *fl.rho.last().unwrap())
        })
        .collect();
    let lag0: Vec<f64> = results.iter().map(|r| r.0).collect();
    let top: Vec<f64> = results.iter().map(|r| r.1).collect();
    let (m0, s0) = mean_sd(&lag0);
    assert!(m0 > 5.0 * s0 / (200f64).sqrt(), "lag-0 covariance {m0}");
    let (mt, st) = mean_sd(&top);
    assert!(mt.abs() < 3.0 * st / (200f64).sqrt(), "largest-scale rho mean {mt}");

    let pure: Vec<f64> = (0..100)
        .into_par_iter()
        .map(|i| {
            let spec = SimSpec { weight: 0.0, ..SimSpec::mixture(len, replicate_seed(22, i)) };
            FluctuationSet::compute(&gen_mixture(&spec).unwrap(), &scales).unwrap().rho[0]
        })
        .collect();
    let (mp, sp) = mean_sd(&pure);
    assert!(mp.abs() < 3.0 * sp / 10.0);
}
