use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dcca_core::asymptotics::{default_grid, default_ratios, tabulate, CovTable, TablePoint, TableSpec};
use dcca_core::fbm::FbmParams;
use dcca_core::report::RunReport;
use dcca_core::series::{load_pair, make_scales, ColumnSpec};
use dcca_core::simulate::{simulate, SimKind, SimSpec, TrendTarget};
use dcca_core::studies::{run_study, Study, StudyOptions};
use dcca_core::testkit::{stat_dcca, HurstMode, TestConfig};
use dcca_core::DccaError;

#[derive(Parser)]
#[command(name = "dcca", version, about = "Detrended cross-correlation test for long-range cross-correlation")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a pair of series for long-range cross-correlation.
    Analyze(AnalyzeArgs),
    /// Write a simulated pair as CSV.
    Simulate(SimulateArgs),
    /// Build a covariance table.
    Tabulate(TabulateArgs),
    /// Run a simulation study and write CSV.
    Study(StudyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// First input file (or the only one, holding both columns).
    input: PathBuf,
    /// Second input file.
    input2: Option<PathBuf>,
    /// Zero-based columns to read, `A,B`.
    #[arg(long)]
    columns: Option<String>,
    /// `MIN:MAX:R` log-spaced scales (default `max(d+2,10):N/10:10`).
    #[arg(long)]
    scales: Option<String>,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// `K`, `r` or `r-1`.
    #[arg(long, default_value = "r")]
    kappa: String,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// `known:H,G`, `range:HL,HH,GL,GH`, `auto` or `auto:MARGIN`.
    #[arg(long, default_value = "auto")]
    hurst: String,
    /// Covariance table (default: the built-in table).
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Bfgn,
    Nongaussian,
    Mixture,
    Trended,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "bfgn")]
    kind: KindArg,
    #[arg(long = "H", default_value_t = 0.7)]
    h: f64,
    #[arg(long = "G", default_value_t = 0.8)]
    g: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    eta: f64,
    #[arg(long = "N", default_value_t = 10_000)]
    len: usize,
    #[arg(long, default_value_t = 3.0)]
    phi: f64,
    #[arg(long, default_value_t = 0.45)]
    cutoff: f64,
    #[arg(long, default_value_t = 0.5)]
    weight: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    noise_corr: f64,
    /// Polynomial coefficients `c0,c1,...` added to the first series.
    #[arg(long, allow_hyphen_values = true)]
    trend1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    trend2: Option<String>,
    #[arg(long, default_value = "profile")]
    trend_target: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TabulateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[arg(long, default_value_t = 512)]
    n_tab: usize,
    /// Comma-separated Hurst values (default `0.50,0.52,...,0.98`).
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated ratios (default `0.01,...,1.00`).
    #[arg(long)]
    ratios: Option<String>,
    /// Continue a partial file instead of starting over.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct StudyArgs {
    /// calibration, nongaussian, shortrange, upperbound, power or speed.
    name: String,
    #[arg(long = "N")]
    len: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    scales: Option<String>,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[arg(long, default_value = "r")]
    kappa: String,
    /// Comma-separated test levels.
    #[arg(long, default_value = "0.05")]
    level: String,
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
    #[arg(long = "H", default_value_t = 0.7)]
    h: f64,
    #[arg(long = "G", default_value_t = 0.8)]
    g: f64,
    #[arg(long, default_value_t = 3.0)]
    phi: f64,
    /// Comma-separated cross-correlations for the power study.
    #[arg(long, default_value = "0,0.05,0.1,0.2")]
    rhos: String,
    #[arg(long, default_value_t = 1000)]
    surrogates: usize,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<DccaError> for Failure {
    fn from(e: DccaError) -> Self {
        Failure { code: if e.is_infeasible() { 3 } else { 2 }, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("bad number '{t}'"))))
        .collect()
}

fn parse_scales(s: &str) -> Result<(usize, usize, usize), Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || usage(format!("--scales expects MIN:MAX:R, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<usize> = parts.iter().map(|p| p.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok((v[0], v[1], v[2]))
}

fn parse_kappa(s: &str, r: usize) -> Result<usize, Failure> {
    match s {
        "r" => Ok(r),
        "r-1" => Ok(r.saturating_sub(1)),
        k => k.parse().map_err(|_| usage(format!("--kappa expects K, r or r-1, got '{k}'"))),
    }
}

fn parse_hurst(s: &str) -> Result<HurstMode, Failure> {
    let (mode, rest) = s.split_once(':').unwrap_or((s, ""));
    let v = if rest.is_empty() { Vec::new() } else { parse_list(rest)? };
    match (mode, v.as_slice()) {
        ("known", [h, g]) => Ok(HurstMode::Known { h: *h, g: *g }),
        ("range", [hl, hh, gl, gh]) => Ok(HurstMode::Range { h_low: *hl, h_high: *hh, g_low: *gl, g_high: *gh }),
        ("auto", []) => Ok(HurstMode::default()),
        ("auto", [m]) => Ok(HurstMode::Auto { margin: *m }),
        _ => Err(usage(format!("--hurst expects known:H,G, range:HL,HH,GL,GH or auto[:M], got '{s}'"))),
    }
}

fn load_table(path: Option<&Path>) -> Result<CovTable, Failure> {
    Ok(match path {
        Some(p) => CovTable::load(p)?,
        None => CovTable::builtin()?,
    })
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let columns = match &a.columns {
        Some(c) => {
            let v = parse_list(c)?;
            if v.len() != 2 || v.iter().any(|x| x.fract() != 0.0 || *x < 0.0) {
                return Err(usage("--columns expects two zero-based indices A,B"));
            }
            Some(ColumnSpec { first: v[0] as usize, second: v[1] as usize })
        }
        None => None,
    };
    let pair = load_pair(&a.input, a.input2.as_deref(), columns)?;
    let n = pair.len();
    let (lo, hi, r) = match &a.scales {
        Some(s) => parse_scales(s)?,
        None => ((a.degree + 2).max(10), n / 10, 10),
    };
    let scales = make_scales(n, lo, hi, r, a.degree)?;
    let table = load_table(a.table.as_deref())?;
    let mut config = TestConfig::new(scales.scales().to_vec(), a.degree);
    config.kappa = parse_kappa(&a.kappa, scales.len())?;
    config.level = a.level;
    config.hurst = parse_hurst(&a.hurst)?;
    config.mc_samples = a.mc_samples;
    config.seed = a.seed;
    let (outcome, fl) = stat_dcca(&pair, &config, &table)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let mut inputs = vec![a.input.display().to_string()];
    inputs.extend(a.input2.iter().map(|p| p.display().to_string()));
    let report = RunReport::new(&config, &fl, outcome, table.checksum(), inputs, start.elapsed().as_secs_f64());
    let text = match a.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv(),
    };
    write_out(a.out.as_deref(), &text)?;
    eprintln!("{}", report.summary());
    Ok(())
}

fn simulate_cmd(a: SimulateArgs) -> Result<(), Failure> {
    let params = FbmParams { h: a.h, g: a.g, rho: a.rho, eta: a.eta, sigma1: 1.0, sigma2: 1.0 };
    let mut spec = SimSpec::bfgn(a.len, params, a.seed);
    spec.kind = match a.kind {
        KindArg::Bfgn => SimKind::Bfgn,
        KindArg::Nongaussian => SimKind::NonGaussian,
        KindArg::Mixture => SimKind::Mixture,
        KindArg::Trended => SimKind::Trended,
    };
    spec.phi = a.phi;
    spec.cutoff = a.cutoff;
    spec.weight = a.weight;
    spec.noise_corr = a.noise_corr;
    spec.trend1 = a.trend1.as_deref().map(parse_list).transpose()?.unwrap_or_default();
    spec.trend2 = a.trend2.as_deref().map(parse_list).transpose()?.unwrap_or_default();
    spec.trend_target = match a.trend_target.as_str() {
        "profile" => TrendTarget::Profile,
        "increments" => TrendTarget::Increments,
        t => return Err(usage(format!("--trend-target expects profile or increments, got '{t}'"))),
    };
    let pair = simulate(&spec)?;
    match &a.out {
        Some(p) => pair.save_csv(p)?,
        None => pair.write_csv(std::io::stdout().lock())?,
    }
    eprintln!("seed {}", a.seed);
    Ok(())
}

fn tabulate_cmd(a: TabulateArgs) -> Result<(), Failure> {
    let spec = TableSpec {
        degree: a.degree,
        n_tab: a.n_tab,
        grid: a.grid.as_deref().map(parse_list).transpose()?.unwrap_or_else(default_grid),
        ratios: a.ratios.as_deref().map(parse_list).transpose()?.unwrap_or_else(default_ratios),
    };
    spec.validate()?;
    let existing = if a.resume && a.out.exists() {
        let t = CovTable::parse_partial(&std::fs::read_to_string(&a.out)?)?;
        if t.spec != spec {
            return Err(usage("existing table was built with different settings"));
        }
        Some(t)
    } else {
        None
    };
    let total = spec.grid.len() * spec.grid.len();
    let mut done = existing.as_ref().map_or(0, |t| t.completed());
    if existing.as_ref().is_some_and(|t| t.is_complete()) {
        eprintln!("{}: already complete ({total} points)", a.out.display());
        return Ok(());
    }
    let start = match existing {
        Some(t) => t,
        None => CovTable::empty(&spec)?,
    };
    // Rewriting the parsed content also drops a truncated trailing line.
    std::fs::write(&a.out, start.to_text())?;
    let mut file = OpenOptions::new().append(true).open(&a.out)?;
    let mut sink = |p: &TablePoint| -> dcca_core::Result<()> {
        file.write_all(p.to_line().as_bytes())?;
        file.flush()?;
        done += 1;
        eprintln!("[{done}/{total}] H={} G={} offsets={}", p.h, p.g, p.offsets);
        Ok(())
    };
    let table = tabulate(&spec, Some(&start), &mut sink)?;
    table.save(&a.out)?;
    eprintln!("wrote {} (checksum {})", a.out.display(), table.checksum());
    Ok(())
}

fn study_cmd(a: StudyArgs) -> Result<(), Failure> {
    let study: Study = a.name.parse()?;
    let mut opts = StudyOptions { seed: a.seed, degree: a.degree, ..StudyOptions::default() };
    if let Some(n) = a.len {
        opts.len = n;
    }
    if let Some(r) = a.reps {
        opts.reps = r;
    }
    opts.scales = a.scales.as_deref().map(parse_scales).transpose()?;
    let r = opts.scale_set()?.len();
    opts.kappa = Some(parse_kappa(&a.kappa, r)?);
    opts.levels = parse_list(&a.level)?;
    opts.mc_samples = a.mc_samples;
    opts.h = a.h;
    opts.g = a.g;
    opts.phi = a.phi;
    opts.rhos = parse_list(&a.rhos)?;
    opts.surrogates = a.surrogates;
    let table = load_table(a.table.as_deref())?;
    let out = run_study(study, &opts, &table)?;
    write_out(a.out.as_deref(), &out.to_csv())?;
    eprintln!("study {} finished (seed {})", study.name(), a.seed);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Tabulate(a) => tabulate_cmd(a),
        Command::Study(a) => study_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
