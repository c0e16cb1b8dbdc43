//! The `thermoptic` command line: file-emitting subcommands with SHA-256
//! manifests.
//!
//! Exit codes are 0 on success, 1 for usage errors, 2 for I/O failures and 3
//! for numerical failures (with a JSON diagnostic on stderr).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::blackbody::{optimal_frequencies, variance_map, BlackbodyScene};
use crate::error::Error;
use crate::linalg::CMatrix;
use crate::povm::{optimize_povm, DEFAULT_RESTARTS};
use crate::schemes::{ratio_map, MapScheme, DEFAULT_GRID, DEFAULT_PHASES, DEFAULT_TRIALS};
use crate::spatial::{weighted_scheme, SpatialParams};
use crate::verify::{all_passed, render_table, run as run_verify, Suite, VerifyOptions};

/// Caps the rayon pool when set to a positive integer.
pub const THREADS_ENV: &str = "THERMOPTIC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "thermoptic", version, about = "Estimation limits for far-field thermal light")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ln var(T) over an N×N grid of frequency pairs.
    TempVariance(TempVarianceArgs),
    /// Optimal frequency pairs for one or more temperatures.
    OptFreq(OptFreqArgs),
    /// Scheme ratio map over the coherence disk.
    SpatialMap(SpatialMapArgs),
    /// Run invariant suites and print a pass/fail table.
    Verify(VerifyArgs),
    /// Six-element POVM search against the weighted scheme.
    PovmSearch(PovmSearchArgs),
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct TempVarianceArgs {
    /// Temperature, K.
    #[arg(long, default_value_t = 1e4)]
    pub temp: f64,
    /// Collection constant κ, s².
    #[arg(long, default_value_t = 1e-32)]
    pub kappa: f64,
    /// Lowest frequency, Hz.
    #[arg(long, default_value_t = 1e13)]
    pub nu_min: f64,
    /// Highest frequency, Hz.
    #[arg(long, default_value_t = 3e15)]
    pub nu_max: f64,
    /// Points per axis (at least 8).
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct OptFreqArgs {
    /// Temperature, K; repeat for several.
    #[arg(long = "temp", required = true)]
    pub temps: Vec<f64>,
    #[arg(long, default_value_t = 1e-32)]
    pub kappa: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    Ft,
    Rp,
    Weighted,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct SpatialMapArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0.01)]
    pub n_mean: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random phases per trial (rp only).
    #[arg(long, default_value_t = DEFAULT_PHASES)]
    pub n_phases: usize,
    /// Trials per cell (rp only).
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub n_trials: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplies every tolerance; values below 1 tighten the checks.
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub tolerance_scale: f64,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct PovmSearchArgs {
    #[arg(long, default_value_t = 0.01)]
    pub n_mean: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub phi: f64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Numerical(Error),
    /// Checks ran but at least one failed.
    #[error("verification failed")]
    Verification,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(m) => CliError::Usage(m),
            Error::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            Error::Io(source) => CliError::Io {
                path: PathBuf::new(),
                source,
            },
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Numerical(_) | CliError::Verification => 3,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Everything needed to rerun a subcommand, with digests of what it wrote.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub outputs: Vec<OutputDigest>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    /// File name relative to the manifest.
    pub file: String,
    pub sha256: String,
}

fn write_manifest(
    out: &Path,
    subcommand: &'static str,
    parameters: &impl Serialize,
    seed: Option<u64>,
    files: &[PathBuf],
) -> CliResult<PathBuf> {
    let outputs = files
        .iter()
        .map(|f| {
            Ok(OutputDigest {
                file: f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: sha256_file(f)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut parameters = serde_json::to_value(parameters).expect("arguments serialize");
    if let Some(obj) = parameters.as_object_mut() {
        obj.remove("out");
    }
    let manifest = RunManifest {
        subcommand,
        parameters,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        outputs,
    };
    let path = sidecar(out, ".manifest.json");
    write_json(&path, &manifest)?;
    Ok(path)
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else if v > 0.0 {
        "inf".into()
    } else {
        "nan".into()
    }
}

pub fn cmd_temp_variance(a: &TempVarianceArgs) -> CliResult<Vec<PathBuf>> {
    if a.grid < 8 {
        return Err(CliError::Usage(format!("--grid must be at least 8, got {}", a.grid)));
    }
    let scene = BlackbodyScene::new(a.temp, a.kappa)?;
    let mut w = csv_writer(&a.out)?;
    let map = variance_map(&scene, a.nu_min, a.nu_max, a.grid)?;
    w.write_record(["nu1_hz", "nu2_hz", "ln_var_T"]).map_err(csv_err(&a.out))?;
    for (idx, v) in map.ln_var.iter().enumerate() {
        let (i, j) = (idx / a.grid, idx % a.grid);
        w.write_record([num(map.freqs[i]), num(map.freqs[j]), num(*v)])
            .map_err(csv_err(&a.out))?;
    }
    w.flush().map_err(io_err(&a.out))?;
    let summary_path = sidecar(&a.out, ".summary.json");
    let finite_max = map.ln_var.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    write_json(
        &summary_path,
        &json!({
            "temperature_k": a.temp,
            "kappa_s2": a.kappa,
            "grid": a.grid,
            "min_nu1_hz": map.min_nu1,
            "min_nu2_hz": map.min_nu2,
            "min_ln_var_T": map.min_ln_var,
            "max_ln_var_T": finite_max,
            "max_mean_photon_number": map.max_mean_photon_number,
        }),
    )?;
    let files = vec![a.out.clone(), summary_path];
    let manifest = write_manifest(&a.out, "temp-variance", a, None, &files)?;
    Ok([files, vec![manifest]].concat())
}

#[derive(Debug, Clone, Serialize)]
pub struct OptFreqRow {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub nu1: f64,
    pub nu2: f64,
    #[serde(rename = "nu1_over_T")]
    pub nu1_over_t: f64,
    #[serde(rename = "nu2_over_T")]
    pub nu2_over_t: f64,
}

pub fn cmd_opt_freq(a: &OptFreqArgs) -> CliResult<Vec<PathBuf>> {
    create(&a.out)?;
    let rows = a
        .temps
        .iter()
        .map(|&t| {
            let (nu1, nu2) = optimal_frequencies(&BlackbodyScene::new(t, a.kappa)?)?;
            Ok(OptFreqRow {
                temperature: t,
                nu1,
                nu2,
                nu1_over_t: nu1 / t,
                nu2_over_t: nu2 / t,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    write_json(&a.out, &rows)?;
    let manifest = write_manifest(&a.out, "opt-freq", a, None, &[a.out.clone()])?;
    Ok(vec![a.out.clone(), manifest])
}

pub fn cmd_spatial_map(a: &SpatialMapArgs) -> CliResult<Vec<PathBuf>> {
    if a.grid < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {}", a.grid)));
    }
    let scheme = match a.scheme {
        SchemeArg::Ft => MapScheme::Ft,
        SchemeArg::Weighted => MapScheme::Weighted,
        SchemeArg::Rp => MapScheme::Rp {
            n_phases: a.n_phases,
            n_trials: a.n_trials,
        },
    };
    let mut w = csv_writer(&a.out)?;
    let map = ratio_map(scheme, a.grid, a.n_mean, a.seed)?;
    w.write_record(["gamma_cos", "gamma_sin", "ratio"]).map_err(csv_err(&a.out))?;
    for c in &map.cells {
        w.write_record([num(c.gamma_cos), num(c.gamma_sin), c.value.map(num).unwrap_or_default()])
            .map_err(csv_err(&a.out))?;
    }
    w.flush().map_err(io_err(&a.out))?;
    let meta_path = sidecar(&a.out, ".meta.json");
    write_json(
        &meta_path,
        &json!({
            "scheme": map.metadata.scheme,
            "n_mean": map.metadata.n_mean,
            "grid": map.metadata.grid,
            "n_phases": map.metadata.n_phases,
            "n_trials": map.metadata.n_trials,
            "seed": map.metadata.seed,
            "present_cells": map.present().count(),
            "min_value": map.min_value(),
            "max_value": map.max_value(),
        }),
    )?;
    let files = vec![a.out.clone(), meta_path];
    let manifest = write_manifest(&a.out, "spatial-map", a, Some(a.seed), &files)?;
    Ok([files, vec![manifest]].concat())
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

pub fn cmd_povm_search(a: &PovmSearchArgs) -> CliResult<Vec<PathBuf>> {
    create(&a.out)?;
    let p = SpatialParams::new(a.n_mean, a.gamma, a.phi)?;
    let best = optimize_povm(&p, a.restarts, a.seed)?;
    let weighted = weighted_scheme(&p, false)?.cost_star;
    write_json(
        &a.out,
        &json!({
            "best_cost": best.best_cost,
            "weighted_cost": weighted,
            "gap": (best.best_cost - weighted) / weighted,
            "gill_massar_trace": best.gill_massar_trace,
            "untruncated_cost": best.gaussian_cost,
            "povm": {
                "coords": best.best_coords,
                "p": best.best_p,
                "u1": matrix_json(best.best_povm.u1()),
                "u2": matrix_json(best.best_povm.u2()),
            },
            "restarts": best.restarts,
        }),
    )?;
    let manifest = write_manifest(&a.out, "povm-search", a, Some(a.seed), &[a.out.clone()])?;
    Ok(vec![a.out.clone(), manifest])
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<String> {
    let results = run_verify(VerifyOptions {
        suite: a.suite,
        seed: a.seed,
        tolerance_scale: a.tolerance_scale,
    });
    let table = render_table(&results);
    print!("{table}");
    if all_passed(&results) {
        Ok(table)
    } else {
        Err(CliError::Verification)
    }
}

/// Reads [`THREADS_ENV`]; `None` when unset.
pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = thread_cap()? {
        // a pool configured earlier in the process stays in place
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::TempVariance(a) => cmd_temp_variance(a).map(drop),
        Command::OptFreq(a) => cmd_opt_freq(a).map(drop),
        Command::SpatialMap(a) => cmd_spatial_map(a).map(drop),
        Command::Verify(a) => cmd_verify(a).map(drop),
        Command::PovmSearch(a) => cmd_povm_search(a).map(drop),
    }
}

fn diagnostic(e: &CliError) -> Value {
    match e {
        CliError::Numerical(Error::NoConvergence {
            evaluations,
            best_value,
            best_point,
        }) => json!({
            "error": "no_convergence",
            "evaluations": evaluations,
            "best_value": best_value,
            "best_point": best_point,
        }),
        CliError::Numerical(Error::SingularFisher { null_directions }) => json!({
            "error": "singular_fisher",
            "null_directions": null_directions,
        }),
        CliError::Numerical(other) => json!({ "error": "numerical", "message": other.to_string() }),
        CliError::Verification => json!({ "error": "verification_failed" }),
        other => json!({ "error": "other", "message": other.to_string() }),
    }
}

/// Parses `args`, runs the subcommand and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e {
                CliError::Numerical(_) | CliError::Verification => eprintln!("{}", diagnostic(&e)),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
