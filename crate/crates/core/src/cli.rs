//! `chainsys` command-line front end. Every output file starts with the tool
//! version and the fully resolved configuration so a run can be replayed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::charfun::SystemPair;
use crate::linalg::{c, log_grid, CVec};
use crate::models::{self, ModelName, ModelSpecifier};
use crate::semigroup::{
    cesaro_norms, decay_curve, fit_rate, laurent_decay, pointwise_max, CurveOptions, DecayCurve, Kind, PNorm,
    Quantity, Sample, TruncationSpec,
};
use crate::spectra::{circulant_spectrum, hypothesis_check, omega_contour, HypothesisConfig, Window};
use crate::verify;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const DEFAULT_N: &str = "4..512";
const DEFAULT_T: &str = "1:1e4:40";

const TOL_NAMES: [&str; 5] = ["char", "probes", "dense_svd_max", "contour_res", "n_max"];

#[derive(Parser, Debug)]
#[command(name = "chainsys", version, about = "Spectral and decay analysis of spatially invariant chains ẋ_k = A0 x_k + A1 x_{k-1}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hypothesis report and predicted decay law (JSON)
    Analyze(Common),
    /// σ(A0), the level curve |φ| = 1 and circulant spectra (CSV re,im,tag)
    Spectrum(Common),
    /// Norm curves ‖A_N T_N(t)‖ per N plus their supremum (CSV)
    Simulate(Common),
    /// Rate fit of a curve CSV produced by `simulate` (JSON)
    Fit {
        /// Curve CSV to fit
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Cesàro means of the limit sequence (CSV n,norm)
    Cesaro(Common),
    /// Run the built-in verification suite
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        threads: String,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// robot | platoon | platoon_from_zeros | platoon_pair | cascade
    #[arg(long, conflicts_with = "file")]
    model: Option<String>,
    /// System JSON file (schema 1)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Comma-separated model parameters
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    #[arg(long, default_value = "circulant")]
    kind: String,
    #[arg(long, default_value = "2")]
    p: String,
    /// List `4,8,16`, doubling range `4..512` or stepped range `2..10:1` [default: 4..512]
    #[arg(long = "N")]
    n: Option<String>,
    /// `lo:hi:per_decade` [default: 1:1e4:40]; for `fit` the window `lo:hi` [default: 1e2:1e4]
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// NAME=VAL, repeatable; names: char, probes, dense_svd_max, contour_res, n_max
    #[arg(long)]
    tol: Vec<String>,
    #[arg(long)]
    with_log: bool,
    /// derivative (‖A_N T_N(t)‖) or semigroup (‖T_N(t)‖)
    #[arg(long, default_value = "derivative")]
    quantity: String,
    /// Initial blocks for `cesaro`: components separated by `,`, blocks by `;`
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, default_value = "auto")]
    threads: String,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Failed,
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TGrid {
    pub lo: f64,
    pub hi: f64,
    pub per_decade: usize,
}

/// Fully explicit configuration echoed into every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub model: ModelSpecifier,
    pub label: String,
    pub kind: Kind,
    pub p: PNorm,
    pub n_list: Vec<usize>,
    pub t_grid: TGrid,
    pub quantity: Quantity,
    pub with_log: bool,
    pub seed: u64,
    pub tol: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
    pub threads: String,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Failed) => 1,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Verify { out, threads } => {
            set_threads(&threads)?;
            cmd_verify(out)
        }
        Command::Analyze(c) => cmd_analyze(&resolve("analyze", &c)?, &c),
        Command::Spectrum(c) => cmd_spectrum(&resolve("spectrum", &c)?),
        Command::Simulate(c) => cmd_simulate(&resolve("simulate", &c)?),
        Command::Cesaro(c) => cmd_cesaro(&resolve("cesaro", &c)?, &c),
        Command::Fit { input, common } => cmd_fit(&input, &common),
    }
}

fn set_threads(spec: &str) -> Result<(), CliError> {
    if spec == "auto" {
        return Ok(());
    }
    let n: usize = spec.parse().map_err(|_| CliError::Config(format!("bad --threads `{spec}`")))?;
    // a second call in the same process (tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn parse_n_list(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("bad --N `{s}`");
    let list: Vec<usize> = if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((h, st)) => (h, Some(st)),
            None => (rest, None),
        };
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        match step {
            Some(st) => {
                let st: usize = st.trim().parse().map_err(|_| bad())?;
                if st == 0 {
                    return Err(bad());
                }
                (lo..=hi).step_by(st).collect()
            }
            None => std::iter::successors(Some(lo), |&n| Some(n * 2)).take_while(|&n| n <= hi).collect(),
        }
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if list.is_empty() || list.iter().any(|&n| n < 2) {
        return Err(format!("--N `{s}`: truncation sizes must be at least 2"));
    }
    Ok(list)
}

pub fn parse_t_grid(s: &str) -> Result<TGrid, String> {
    let bad = || format!("bad --t `{s}` (expected lo:hi:per_decade)");
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let per_decade = match parts.get(2) {
        Some(p) => p.trim().parse().map_err(|_| bad())?,
        None => 40,
    };
    if !(lo > 0.0 && hi > lo && hi.is_finite() && per_decade > 0) {
        return Err(bad());
    }
    Ok(TGrid { lo, hi, per_decade })
}

fn parse_tol(items: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for it in items {
        let (k, v) = it.split_once('=').ok_or_else(|| format!("bad --tol `{it}` (expected NAME=VAL)"))?;
        if !TOL_NAMES.contains(&k) {
            return Err(format!("unknown tolerance `{k}` (known: {})", TOL_NAMES.join(", ")));
        }
        let v: f64 = v.parse().map_err(|_| format!("bad value in --tol `{it}`"))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(format!("--tol {k} must be positive"));
        }
        out.insert(k.to_string(), v);
    }
    Ok(out)
}

fn parse_params(s: &Option<String>) -> Result<Vec<f64>, String> {
    match s {
        None => Ok(Vec::new()),
        Some(s) if s.trim().is_empty() => Ok(Vec::new()),
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad --params entry `{x}`")))
            .collect(),
    }
}

fn default_params(name: ModelName) -> Vec<f64> {
    match name {
        ModelName::Platoon => vec![6.0, 11.0, 6.0],
        ModelName::PlatoonFromZeros => vec![1.0, 2.0, 3.0],
        ModelName::PlatoonPair => vec![2.0, 1.0, 1.0],
        ModelName::Cascade => vec![1.0, 2.0],
        _ => Vec::new(),
    }
}

fn resolve(command: &str, c: &Common) -> Result<(RunConfig, SystemPair), CliError> {
    set_threads(&c.threads)?;
    let tol = parse_tol(&c.tol)?;
    let (spec, system) = match (&c.model, &c.file) {
        (Some(_), Some(_)) => return Err(CliError::Config("--model and --file are exclusive".into())),
        (None, None) => return Err(CliError::Config("one of --model or --file is required".into())),
        (None, Some(path)) => {
            let mut spec = ModelSpecifier::new(ModelName::Custom, &[]);
            spec.path = Some(path.clone());
            let system = match tol.get("char") {
                Some(&t) => models::load_with_tol(path, t)?,
                None => models::load(path)?,
            };
            (spec, system)
        }
        (Some(name), None) => {
            let name: ModelName = name.parse()?;
            if name == ModelName::Custom {
                return Err(CliError::Config("use --file for custom systems".into()));
            }
            let mut params = parse_params(&c.params)?;
            if c.params.is_none() {
                params = default_params(name);
            }
            let spec = ModelSpecifier::new(name, &params);
            let system = models::build(&spec)?;
            (spec, system)
        }
    };
    let kind: Kind = c.kind.parse()?;
    let p: PNorm = c.p.parse()?;
    let quantity = match c.quantity.as_str() {
        "derivative" => Quantity::Derivative,
        "semigroup" => Quantity::Semigroup,
        q => return Err(CliError::Config(format!("unknown quantity `{q}` (derivative|semigroup)"))),
    };
    let n_list = if kind == Kind::Laurent { Vec::new() } else { parse_n_list(c.n.as_deref().unwrap_or(DEFAULT_N))? };
    let cfg = RunConfig {
        command: command.into(),
        version: VERSION.into(),
        model: spec,
        label: system.label.clone(),
        kind,
        p,
        n_list,
        t_grid: parse_t_grid(c.t.as_deref().unwrap_or(DEFAULT_T))?,
        quantity,
        with_log: c.with_log,
        seed: c.seed,
        tol,
        out: c.out.clone(),
        threads: c.threads.clone(),
    };
    Ok((cfg, system))
}

fn header(cfg: &RunConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    format!("# chainsys {VERSION}\n# config {json}\n")
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    config: &'a RunConfig,
    result: T,
}

fn cmd_analyze((cfg, system): &(RunConfig, SystemPair), _c: &Common) -> Result<(), CliError> {
    let report = hypothesis_check(system, &HypothesisConfig::default());
    let json = serde_json::to_string_pretty(&Envelope { version: VERSION, config: cfg, result: &report })?;
    emit(&cfg.out, &(json + "\n"))
}

fn push_point(buf: &mut String, z: Complex64, tag: &str) {
    let _ = writeln!(buf, "{:e},{:e},{}", z.re, z.im, tag);
}

fn cmd_spectrum((cfg, system): &(RunConfig, SystemPair)) -> Result<(), CliError> {
    let mut buf = header(cfg);
    buf.push_str("re,im,tag\n");
    let spec = system.spectrum_a0();
    for z in &spec {
        push_point(&mut buf, *z, "a0");
    }
    let radius = 1.5 * system.spectral_radius_a0().max(1.0) + 1.0;
    let res = cfg.tol.get("contour_res").map_or(256, |v| *v as usize).max(8);
    let contour = omega_contour(&system.phi, Window::around(c(0.0, 0.0), radius), (res, res))?;
    for (k, line) in contour.polylines.iter().enumerate() {
        let tag = format!("omega:{k}");
        for z in line {
            push_point(&mut buf, *z, &tag);
        }
    }
    if cfg.kind != Kind::Laurent {
        for &n in &cfg.n_list {
            for e in circulant_spectrum(system, n)? {
                push_point(&mut buf, e.value, &format!("circulant:N={n}:j={}", e.mode));
            }
        }
    }
    emit(&cfg.out, &buf)
}

fn push_curve(buf: &mut String, curve: &DecayCurve, n_tag: &str) {
    for s in &curve.samples {
        let _ = writeln!(
            buf,
            "{:e},{:e},{:e},{},{},{}",
            s.t,
            s.lower,
            s.upper,
            n_tag,
            curve.p.as_str(),
            curve.kind.as_str()
        );
    }
}

fn curve_options(cfg: &RunConfig) -> CurveOptions {
    let d = CurveOptions::default();
    CurveOptions {
        quantity: cfg.quantity,
        seed: cfg.seed,
        probes: cfg.tol.get("probes").map_or(d.probes, |v| *v as usize),
        dense_check: false,
        dense_svd_max: cfg.tol.get("dense_svd_max").map_or(d.dense_svd_max, |v| *v as usize),
    }
}

fn cmd_simulate((cfg, system): &(RunConfig, SystemPair)) -> Result<(), CliError> {
    let ts = log_grid(cfg.t_grid.lo, cfg.t_grid.hi, cfg.t_grid.per_decade);
    let mut buf = header(cfg);
    buf.push_str("t,lower,upper,N,p,kind\n");
    if cfg.kind == Kind::Laurent {
        if cfg.p != PNorm::Two {
            return Err(CliError::Config("the Laurent curve is available for --p 2 only".into()));
        }
        let curve = laurent_decay(system, &ts, cfg.quantity)?;
        push_curve(&mut buf, &curve, "inf");
        return emit(&cfg.out, &buf);
    }
    let opts = curve_options(cfg);
    let mut curves = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let curve = decay_curve(system, TruncationSpec { kind: cfg.kind, n }, cfg.p, &ts, &opts)?;
        push_curve(&mut buf, &curve, &n.to_string());
        curves.push(curve);
    }
    if curves.len() > 1 {
        let sup = pointwise_max(&curves);
        push_curve(&mut buf, &sup, "sup");
    }
    emit(&cfg.out, &buf)
}

struct CurveRow {
    sample: Sample,
    n: String,
    p: String,
    kind: String,
}

fn read_curve_csv(path: &PathBuf) -> Result<Vec<CurveRow>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some("t,lower,upper,N,p,kind") => {}
        other => return Err(format!("{}: unexpected header {other:?}", path.display())),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| f[i].parse::<f64>().map_err(|_| format!("row {}: bad number `{}`", k + 1, f[i]));
        if f.len() != 6 {
            return Err(format!("row {}: expected 6 fields", k + 1));
        }
        rows.push(CurveRow {
            sample: Sample { t: num(0)?, lower: num(1)?, upper: num(2)? },
            n: f[3].to_string(),
            p: f[4].to_string(),
            kind: f[5].to_string(),
        });
    }
    Ok(rows)
}

fn cmd_fit(input: &PathBuf, c: &Common) -> Result<(), CliError> {
    let rows = read_curve_csv(input)?;
    if rows.is_empty() {
        return Err(CliError::Config(format!("{}: no samples", input.display())));
    }
    let mut tags: Vec<&str> = rows.iter().map(|r| r.n.as_str()).collect();
    tags.dedup();
    let wanted = if let Some(n) = &c.n {
        n.clone()
    } else if tags.contains(&"sup") {
        "sup".to_string()
    } else if tags.len() == 1 {
        tags[0].to_string()
    } else {
        return Err(CliError::Config("curve file holds several N; choose one with --N".into()));
    };
    let picked: Vec<&CurveRow> = rows.iter().filter(|r| r.n == wanted).collect();
    if picked.is_empty() {
        return Err(CliError::Config(format!("no rows with N = {wanted}")));
    }
    let kind: Kind = picked[0].kind.parse()?;
    let p: PNorm = picked[0].p.parse()?;
    let window = parse_t_grid(c.t.as_deref().unwrap_or("1e2:1e4"))?;
    let curve = DecayCurve {
        label: input.display().to_string(),
        kind,
        n_list: Vec::new(),
        p,
        quantity: Quantity::Derivative,
        samples: picked.iter().map(|r| r.sample).collect(),
        exact: picked.iter().all(|r| r.sample.lower == r.sample.upper),
        dense_error: None,
    };
    let fit = fit_rate(&curve, (window.lo, window.hi), c.with_log)?;
    #[derive(Serialize)]
    struct FitConfig<'a> {
        command: &'static str,
        input: &'a PathBuf,
        curve: &'a str,
        window: (f64, f64),
        with_log: bool,
        out: &'a Option<PathBuf>,
    }
    #[derive(Serialize)]
    struct FitOut<'a> {
        version: &'static str,
        config: FitConfig<'a>,
        result: crate::semigroup::RateFit,
    }
    let out = FitOut {
        version: VERSION,
        config: FitConfig {
            command: "fit",
            input,
            curve: &wanted,
            window: (window.lo, window.hi),
            with_log: c.with_log,
            out: &c.out,
        },
        result: fit,
    };
    emit(&c.out, &(serde_json::to_string_pretty(&out)? + "\n"))
}

fn parse_x0(s: &str, m: usize) -> Result<Vec<CVec>, String> {
    s.split(';')
        .map(|block| {
            let v: Vec<f64> = block
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad --x0 entry `{x}`")))
                .collect::<Result<_, _>>()?;
            if v.len() > m {
                return Err(format!("--x0 block `{block}` has more than {m} components"));
            }
            Ok(CVec::from_fn(m, |i, _| c(v.get(i).copied().unwrap_or(0.0), 0.0)))
        })
        .collect()
}

fn cmd_cesaro((cfg, system): &(RunConfig, SystemPair), c: &Common) -> Result<(), CliError> {
    let x0 = parse_x0(c.x0.as_deref().unwrap_or("1"), system.m)?;
    let n_max = cfg.tol.get("n_max").map_or(10_000, |v| *v as usize).max(10);
    let res = cesaro_norms(system, &x0, cfg.p, n_max)?;
    let mut buf = header(cfg);
    let class = serde_json::to_string(&res.class)?;
    let _ = writeln!(buf, "# x0 {}", c.x0.as_deref().unwrap_or("1"));
    let _ = writeln!(buf, "# class {} exponent {:e}", class.trim_matches('"'), res.exponent);
    buf.push_str("n,norm\n");
    for (k, v) in res.norms.iter().enumerate() {
        let _ = writeln!(buf, "{},{:e}", k + 1, v);
    }
    eprintln!("class {} (exponent {:.4})", class.trim_matches('"'), res.exponent);
    emit(&cfg.out, &buf)
}

fn cmd_verify(out: Option<PathBuf>) -> Result<(), CliError> {
    let results = verify::run_all();
    for r in &results {
        println!("{}", verify::format_line(r));
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&results)?;
        std::fs::write(&path, json + "\n").map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    if passed == results.len() {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("4..32").unwrap(), vec![4, 8, 16, 32]);
        assert_eq!(parse_n_list("2..5:1").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_n_list("3,7").unwrap(), vec![3, 7]);
        assert!(parse_n_list("1..4").is_err());
        assert!(parse_n_list("8..4").is_err());
    }

    #[test]
    fn t_grids() {
        let g = parse_t_grid("1e2:1e4:40").unwrap();
        assert_eq!((g.lo, g.hi, g.per_decade), (100.0, 1e4, 40));
        assert!(parse_t_grid("0:1:3").is_err());
        assert!(parse_t_grid("5").is_err());
    }

    #[test]
    fn tolerances() {
        let t = parse_tol(&["char=1e-6".into()]).unwrap();
        assert_eq!(t["char"], 1e-6);
        assert!(parse_tol(&["bogus=1".into()]).is_err());
        assert!(parse_tol(&["char".into()]).is_err());
    }
}
