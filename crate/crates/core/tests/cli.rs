use std::path::Path;
use std::process::{Command, Output};

use dcca_core::report::RunReport;

fn dcca(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcca")).args(args).current_dir(dir).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn simulate_is_deterministic_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--kind", "bfgn", "--H", "0.7", "--G", "0.8", "--rho", "0.4", "--N", "2000", "--seed", "1"];
    for name in ["a.csv", "b.csv"] {
        let out = dcca(&[&args[..], &["--out", name]].concat(), dir.path());
        assert_eq!(code(&out), 0);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert!(!a.is_empty());

    let bad = dcca(&["simulate", "--rho", "1.5", "--out", "c.csv"], dir.path());
    assert_eq!(code(&bad), 2);
    assert!(!dir.path().join("c.csv").exists());
}

#[test]
fn analyze_identical_series_rejects() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&dcca(&["simulate", "--N", "4000", "--seed", "3", "--out", "s.csv"], dir.path())), 0);
    let out = dcca(&["analyze", "s.csv", "s.csv", "--hurst", "known:0.7,0.8", "--out", "r.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::from_json(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(report.outcome.reject);
    assert!(report.scales.iter().all(|s| s.rho == 1.0));
    assert_eq!(report.seed, 0);
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("reject independence"));
}

#[test]
fn analyze_echoes_configuration_and_warns_on_white_noise() {
    let dir = tempfile::tempdir().unwrap();
    let sim = ["simulate", "--H", "0.5", "--G", "0.5", "--N", "6000", "--seed", "4", "--out", "w.csv"];
    assert_eq!(code(&dcca(&sim, dir.path())), 0);
    let out = dcca(
        &["analyze", "w.csv", "--scales", "20:2000:10", "--kappa", "r-1", "--level", "0.05", "--seed", "9"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let report = RunReport::from_json(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(report.config.scales.len(), 10);
    assert_eq!((report.config.scales[0], report.config.scales[9]), (20, 2000));
    assert_eq!(report.config.kappa, 9);
    assert_eq!(report.seed, 9);
    assert!(String::from_utf8_lossy(&out.stderr).contains("long-range dependence is doubtful"));
    for row in &report.scales {
        assert_eq!(row.sign_log_cross, row.f2_cross.signum() * row.f2_cross.abs().ln());
    }
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&dcca(&["simulate", "--N", "1000", "--out", "s.csv"], dir.path())), 0);
    assert_eq!(code(&dcca(&["analyze", "s.csv", "--scales", "10:900:5"], dir.path())), 3);
    assert_eq!(code(&dcca(&["analyze", "missing.csv"], dir.path())), 2);
    assert_eq!(code(&dcca(&["analyze", "s.csv", "--hurst", "known:0.7"], dir.path())), 2);
    assert_eq!(code(&dcca(&["study", "nope"], dir.path())), 2);
}

#[test]
fn tabulate_small_grid_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["tabulate", "--out", "t.txt", "--n-tab", "128", "--grid", "0.5,0.7", "--ratios", "0.25,0.5,1"];
    let start = std::time::Instant::now();
    assert_eq!(code(&dcca(&args, dir.path())), 0);
    assert!(start.elapsed().as_secs() < 60);
    let first = std::fs::read_to_string(dir.path().join("t.txt")).unwrap();
    let table = dcca_core::CovTable::parse(&first).unwrap();
    assert!(table.is_complete());
    assert_eq!(dcca_core::CovTable::parse(&table.to_text()).unwrap(), table);

    assert_eq!(code(&dcca(&[&args[..], &["--resume"]].concat(), dir.path())), 0);
    assert_eq!(std::fs::read_to_string(dir.path().join("t.txt")).unwrap(), first);
    assert_eq!(code(&dcca(&["tabulate", "--out", "u.txt", "--grid", "0.7,0.5"], dir.path())), 2);
}

#[test]
fn study_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcca(&["study", "calibration", "--N", "2000", "--reps", "20", "--scales", "10:200:5"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("study,N,level,threshold,reps,rejections,rate,stderr"));
    assert_eq!(text.lines().filter(|l| l.starts_with("calibration")).count(), 1);
}
