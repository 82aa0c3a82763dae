//! Command-line front end: configuration merging, command execution and
//! versioned JSON/CSV run records.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bubbles::bubble_profile;
use crate::constants::{ConstantBundle, ProblemParams};
use crate::error::{Error, Result};
use crate::linearization::{nondegeneracy_report, umu_bubble, SpectrumOptions, SpectrumReport, Verdict};
use crate::radial::{GridSpec, Mapping, RadialFunction, RadialGrid};
use crate::riesz::{extremal_spread, hls_check, riesz_bound_ratio, riesz_identity_gap};
use crate::system::{
    bubble_pair, energy_with, fit_profile, fixed_point_solve, minimize_rayleigh_with, pde_residual_with,
    rayleigh_quotient_with, system_residual, umu_profile, FixedPointOptions, MinimizeOptions,
    NonlocalTerm, Normalization,
};
use crate::transforms::{moving_plane_table, write_moving_plane_csv, PairField, SampleBox};

/// Version of the JSON record layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    BubbleCheck,
    RieszCheck,
    HlsCheck,
    Minimize,
    Solve,
    Spectrum,
    MovingPlane,
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::BubbleCheck => "bubble-check",
            Command::RieszCheck => "riesz-check",
            Command::HlsCheck => "hls-check",
            Command::Minimize => "minimize",
            Command::Solve => "solve",
            Command::Spectrum => "spectrum",
            Command::MovingPlane => "moving-plane",
            Command::Sweep => "sweep",
        }
    }
}

/// Command-line arguments. Every option may also come from `--config`;
/// flags given on the command line take precedence.
#[derive(Debug, Parser)]
#[command(name = "choquard", version, about = "Numerical checks for the critical Choquard equation")]
pub struct Cli {
    /// Computation to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Spatial dimension.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Riesz exponent, 0 < mu < N.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Number of radial nodes.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Outer radius of the grid (default 1e5 × width).
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Innermost node of a logarithmic grid (default 1e-5 × width).
    #[arg(long)]
    pub inner: Option<f64>,
    /// Node distribution: log or algebraic.
    #[arg(long)]
    pub mapping: Option<Mapping>,
    /// Highest spherical-harmonic degree in spectra.
    #[arg(long)]
    pub ell_max: Option<usize>,
    /// Bubble width t.
    #[arg(long)]
    pub width: Option<f64>,
    /// Path of the JSON record; tables go next to it with a .csv extension.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML or JSON file with any of these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps and parallel kernels.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Zero tolerance for spectra (default: ten times the tangent residual).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of random profiles in hls-check.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Plane positions for moving-plane, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Shift of the bubble center along e1 before the Kelvin transform (moving-plane).
    #[arg(long)]
    pub shift: Option<f64>,
    /// Exponents visited by sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mu_values: Option<Vec<f64>>,
    /// Command executed for each sweep case.
    #[arg(long, value_enum)]
    pub task: Option<Command>,
    /// Iteration cap for minimize and solve.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Pass threshold of the command's main check.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Constants carried by the integral system: bare or green.
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationArg {
    Bare,
    Green,
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::Bare => Normalization::Bare,
            NormalizationArg::Green => Normalization::Green,
        }
    }
}

/// Options read from a configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub grid_size: Option<usize>,
    pub cutoff: Option<f64>,
    pub inner: Option<f64>,
    pub mapping: Option<Mapping>,
    pub ell_max: Option<usize>,
    pub width: Option<f64>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub tau: Option<f64>,
    pub samples: Option<usize>,
    pub lambdas: Option<Vec<f64>>,
    pub shift: Option<f64>,
    pub mu_values: Option<Vec<f64>>,
    pub task: Option<Command>,
    pub max_iter: Option<usize>,
    pub tolerance: Option<f64>,
    pub normalization: Option<NormalizationArg>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(serde_json::from_str(&text)?),
            Some("toml") => toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
            _ => Err(Error::Config(format!(
                "{}: configuration files must end in .toml or .json",
                path.display()
            ))),
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: ProblemParams,
    pub grid: GridSpec,
    pub width: f64,
    pub ell_max: usize,
    pub tau: Option<f64>,
    pub seed: u64,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub samples: usize,
    pub lambdas: Vec<f64>,
    pub shift: f64,
    pub mu_values: Vec<f64>,
    pub task: Command,
    pub max_iter: usize,
    pub tolerance: Option<f64>,
    pub normalization: Normalization,
}

impl RunConfig {
    /// Uniform grid for this configuration's width.
    pub fn build_grid(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(self.grid.build()?))
    }

    /// Same configuration at another exponent.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Ok(Self {
            params: ProblemParams::new(self.params.dim(), mu)?,
            ..self.clone()
        })
    }
}

/// Parse `argv` (including the program name) into a validated configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    resolve(cli)
}

/// Merge flags over the optional configuration file and fill defaults.
pub fn resolve(cli: Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let n = cli.n.or(file.n).unwrap_or(3);
    let mu = cli.mu.or(file.mu).unwrap_or(2.0);
    let params = ProblemParams::new(n, mu)
        .map_err(|e| Error::Config(format!("{e}; choose --mu strictly between 0 and N = {n}")))?;
    let width = cli.width.or(file.width).unwrap_or(1.0);
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Config(format!("--width must be positive, got {width}")));
    }
    let mapping = cli.mapping.or(file.mapping).unwrap_or(Mapping::Log);
    let cutoff = cli.cutoff.or(file.cutoff).unwrap_or(1e5 * width);
    let inner = cli.inner.or(file.inner).or(match mapping {
        Mapping::Log => Some(1e-5 * width),
        Mapping::Algebraic => None,
    });
    let grid = GridSpec {
        dim: n,
        cutoff,
        size: cli.grid_size.or(file.grid_size).unwrap_or(1024),
        mapping,
        inner,
    };
    grid.build().map_err(|e| Error::Config(format!("invalid grid: {e}")))?;
    let ell_max = cli.ell_max.or(file.ell_max).unwrap_or(6);
    let workers = cli.workers.or(file.workers);
    if workers == Some(0) {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let task = cli.task.or(file.task).unwrap_or(Command::Constants);
    if task == Command::Sweep {
        return Err(Error::Config("a sweep cannot run nested sweeps; choose another --task".into()));
    }
    let mu_values = cli.mu_values.or(file.mu_values).unwrap_or_else(|| vec![2.5, 2.8, 2.9, 2.99]);
    for &m in &mu_values {
        ProblemParams::new(n, m).map_err(|e| Error::Config(format!("--mu-values: {e}")))?;
    }
    Ok(RunConfig {
        command: cli.command,
        params,
        grid,
        width,
        ell_max,
        tau: cli.tau.or(file.tau),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        workers,
        output: cli.output.or(file.output),
        samples: cli.samples.or(file.samples).unwrap_or(20),
        lambdas: cli
            .lambdas
            .or(file.lambdas)
            .unwrap_or_else(|| vec![0.1, 0.5, 1.0, 2.0, 5.0]),
        shift: cli.shift.or(file.shift).unwrap_or(0.0),
        mu_values,
        task,
        max_iter: cli.max_iter.or(file.max_iter).unwrap_or(2000),
        tolerance: cli.tolerance.or(file.tolerance),
        normalization: cli.normalization.or(file.normalization).map_or(Normalization::Bare, Into::into),
    })
}

/// Outcome class of a run, mapped to the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Computation finished and its checks passed.
    Ok,
    /// Computation finished but a check failed.
    Failed,
    /// The spectrum could not be classified at the chosen tolerance.
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Inconclusive => 2,
        }
    }

    fn merge(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Failed, _) | (_, Failed) => Failed,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Ok,
        }
    }
}

/// Result of [`run`]: the JSON record, an optional CSV table and a summary.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: Status,
    pub record: Value,
    pub csv: Option<String>,
    pub summary: String,
}

struct CommandResult {
    status: Status,
    result: Value,
    csv: Option<String>,
    summary: String,
}

/// Execute the configured command.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let res = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(|| execute(cfg)),
        None => execute(cfg),
    }?;
    let record = json!({
        "schema": SCHEMA_VERSION,
        "library_version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "config": cfg,
        "status": res.status,
        "result": res.result,
        "timing": {
            "started_unix_seconds": started,
            "elapsed_seconds": clock.elapsed().as_secs_f64(),
        },
    });
    Ok(RunOutcome {
        status: res.status,
        record,
        csv: res.csv,
        summary: res.summary,
    })
}

/// The record without its `timing` field, for reproducibility checks.
pub fn deterministic_part(record: &Value) -> Value {
    let mut v = record.clone();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timing");
    }
    v
}

/// Write the record (and table) next to `cfg.output`, if set.
pub fn write_outputs(cfg: &RunConfig, outcome: &RunOutcome) -> Result<Vec<PathBuf>> {
    let Some(path) = &cfg.output else {
        return Ok(Vec::new());
    };
    let mut written = Vec::new();
    std::fs::write(path, serde_json::to_string_pretty(&outcome.record)? + "\n")?;
    written.push(path.clone());
    if let Some(table) = &outcome.csv {
        let csv_path = path.with_extension("csv");
        std::fs::write(&csv_path, table)?;
        written.push(csv_path);
    }
    Ok(written)
}

fn execute(cfg: &RunConfig) -> Result<CommandResult> {
    match cfg.command {
        Command::Constants => run_constants(cfg),
        Command::BubbleCheck => run_bubble_check(cfg),
        Command::RieszCheck => run_riesz_check(cfg),
        Command::HlsCheck => run_hls_check(cfg),
        Command::Minimize => run_minimize(cfg),
        Command::Solve => run_solve(cfg),
        Command::Spectrum => run_spectrum(cfg),
        Command::MovingPlane => run_moving_plane(cfg),
        Command::Sweep => run_sweep(cfg),
    }
}

fn pass(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::Failed
    }
}

fn run_constants(cfg: &RunConfig) -> Result<CommandResult> {
    let b = ConstantBundle::compute(&cfg.params)?;
    let summary = format!(
        "N = {}, mu = {}\n  2*_mu      {:.12}\n  I_mu norm  {:.12e}\n  C(N,mu)    {:.12}\n  C*         {:.12}\n  S          {:.12}\n  S*_HL      {:.12}\n  amplitude  {:.12}",
        cfg.params.dim(),
        cfg.params.mu(),
        b.two_star_mu,
        b.riesz_norm,
        b.hls_sharp,
        b.c_star,
        b.sobolev,
        b.s_star_hl,
        b.bubble_amp
    );
    Ok(CommandResult {
        status: Status::Ok,
        result: serde_json::to_value(&b)?,
        csv: None,
        summary,
    })
}

fn run_bubble_check(cfg: &RunConfig) -> Result<CommandResult> {
    let p = &cfg.params;
    let grid = cfg.build_grid()?;
    let term = NonlocalTerm::new(p, &grid)?;
    let u = umu_profile(p, &grid, cfg.width)?;
    let residual = pde_residual_with(&term, &u)?;
    let quotient = rayleigh_quotient_with(&term, &u)?;
    let s_star = crate::constants::s_star_hl(p)?;
    let rel = (quotient - s_star).abs() / s_star;
    let energy = energy_with(&term, &u)?;
    let pair = bubble_pair(p, &grid, cfg.width, cfg.normalization)?;
    let (res_u, res_v) = system_residual(&pair)?;
    let tol = cfg.tolerance.unwrap_or(1e-4);
    let status = pass(residual < tol && rel < tol && res_u < tol && res_v < tol);
    Ok(CommandResult {
        status,
        result: json!({
            "grid": cfg.grid,
            "pde_residual": residual,
            "rayleigh_quotient": quotient,
            "s_star_hl": s_star,
            "rayleigh_relative_error": rel,
            "energy": energy,
            "system_residual": {"u": res_u, "v": res_v},
            "tolerance": tol,
        }),
        csv: None,
        summary: format!(
            "pde residual {residual:.3e}\nRayleigh quotient {quotient:.12} (S*_HL {s_star:.12}, rel. error {rel:.3e})\nsystem residual u {res_u:.3e}, v {res_v:.3e}\nenergy {energy:.12}\n{}",
            verdict_line(status)
        ),
    })
}

fn gaussian(grid: &Arc<RadialGrid>, width: f64) -> RadialFunction {
    RadialFunction::from_fn(grid, |r| (-(r / width).powi(2)).exp())
}

fn run_riesz_check(cfg: &RunConfig) -> Result<CommandResult> {
    let p = &cfg.params;
    let n = p.dim();
    let grid = cfg.build_grid()?;
    let spread = extremal_spread(p, &grid, cfg.width)?;
    let cube = RadialFunction::from_fn(&grid, |r| bubble_profile(n, 1.0, cfg.width, r).powi(3));
    let gap = riesz_identity_gap(p, &cube)?;
    let g = gaussian(&grid, cfg.width);
    let ratio = riesz_bound_ratio(p, &g, 2.0)?;
    let tol = cfg.tolerance.unwrap_or(1e-4);
    let status = pass(spread < tol);
    Ok(CommandResult {
        status,
        result: json!({
            "grid": cfg.grid,
            "extremal_spread": spread,
            "identity_gap_bubble_cube": gap,
            "bounded_ratio_gaussian_r2": ratio,
            "tolerance": tol,
        }),
        csv: None,
        summary: format!(
            "extremal self-similarity spread on [0, 10t]: {spread:.3e}\n|I_mu * U0^3 - U0^3|_2 / |U0^3|_2 = {gap:.6}\n|I_mu * f|_s / |f|_2 (Gaussian) = {ratio:.6}\n{}",
            verdict_line(status)
        ),
    })
}

/// `count` random nonnegative radial mixtures of one to three bumps.
pub fn random_profiles(grid: &Arc<RadialGrid>, seed: u64, count: usize) -> Vec<RadialFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=3);
            let bumps: Vec<(f64, f64, f64)> = (0..k)
                .map(|_| {
                    (
                        rng.random_range(0.1..2.0),
                        rng.random_range(0.0..3.0),
                        rng.random_range(0.2..2.0),
                    )
                })
                .collect();
            RadialFunction::from_fn(grid, move |r| {
                bumps.iter().map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum()
            })
        })
        .collect()
}

fn run_hls_check(cfg: &RunConfig) -> Result<CommandResult> {
    let p = &cfg.params;
    let n = p.dim();
    let grid = cfg.build_grid()?;
    let profiles = random_profiles(&grid, cfg.seed, cfg.samples);
    let mut ratios = Vec::with_capacity(profiles.len());
    let mut rows = String::from("index,lhs,rhs,ratio\n");
    for (i, f) in profiles.iter().enumerate() {
        let (lhs, rhs) = hls_check(p, f, f)?;
        ratios.push(lhs / rhs);
        rows.push_str(&format!("{i},{lhs},{rhs},{}\n", lhs / rhs));
    }
    let nf = n as f64;
    let ext = RadialFunction::from_fn(&grid, |r| (1.0 + (r / cfg.width).powi(2)).powf(-(2.0 * nf - p.mu()) / 2.0));
    let (el, er) = hls_check(p, &ext, &ext)?;
    let extremal_ratio = el / er;
    rows.push_str(&format!("extremal,{el},{er},{extremal_ratio}\n"));
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let tol = cfg.tolerance.unwrap_or(1e-3);
    let status = pass(worst <= 1.0 && extremal_ratio >= 1.0 - tol);
    Ok(CommandResult {
        status,
        result: json!({
            "grid": cfg.grid,
            "seed": cfg.seed,
            "ratios": ratios,
            "max_ratio": worst,
            "extremal_ratio": extremal_ratio,
        }),
        csv: Some(rows),
        summary: format!(
            "{} random profiles: max lhs/rhs = {worst:.6}\nextremal lhs/rhs = {extremal_ratio:.8}\n{}",
            cfg.samples,
            verdict_line(status)
        ),
    })
}

fn fit_json(u: &RadialFunction) -> Value {
    match fit_profile(u) {
        Ok((c, t, rms)) => json!({"amplitude": c, "width": t, "log_rms": rms}),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn run_minimize(cfg: &RunConfig) -> Result<CommandResult> {
    let p = &cfg.params;
    let grid = cfg.build_grid()?;
    let term = NonlocalTerm::new(p, &grid)?;
    let u0 = gaussian(&grid, cfg.width);
    let opts = MinimizeOptions {
        max_iter: cfg.max_iter,
        ..Default::default()
    };
    let out = minimize_rayleigh_with(&term, &u0, &opts)?;
    let s_star = crate::constants::s_star_hl(p)?;
    let rel = (out.value - s_star).abs() / s_star;
    let fit = fit_json(&out.u);
    let residual = pde_residual_with(&term, &out.u.scale(amplitude_for_equation(&term, &out.u)?))?;
    let rms = fit["log_rms"].as_f64().unwrap_or(f64::INFINITY);
    let tol = cfg.tolerance.unwrap_or(1e-3);
    let status = pass(rel < tol && rms < 1e-2);
    Ok(CommandResult {
        status,
        result: json!({
            "params": p,
            "grid": cfg.grid,
            "iterations": out.iterations,
            "value": out.value,
            "s_star_hl": s_star,
            "relative_error": rel,
            "fit": fit,
            "residuals": {"pde": residual},
        }),
        csv: Some(
            std::iter::once("iteration,quotient".to_string())
                .chain(out.history.iter().enumerate().map(|(i, q)| format!("{i},{q}")))
                .collect::<Vec<_>>()
                .join("\n")
                + "\n",
        ),
        summary: format!(
            "minimized quotient {:.12} after {} iterations (S*_HL {s_star:.12}, rel. error {rel:.3e})\nbubble fit: {fit}\npde residual of the rescaled minimizer {residual:.3e}\n{}",
            out.value,
            out.iterations,
            verdict_line(status)
        ),
    })
}

/// Scalar `α` for which `α u` solves the equation when `u` is a minimizer.
fn amplitude_for_equation(term: &NonlocalTerm, u: &RadialFunction) -> Result<f64> {
    let d = u.grid().sector_form_values(u.values(), u.values(), 0);
    let g = term.coupling_values(u.values());
    let pw = term.params().two_star_mu();
    if !(g > 0.0) {
        return Err(Error::Domain("minimizer has no nonlocal energy".into()));
    }
    Ok((d / g).powf(1.0 / (2.0 * pw - 2.0)))
}

fn run_solve(cfg: &RunConfig) -> Result<CommandResult> {
    let p = &cfg.params;
    let grid = cfg.build_grid()?;
    let u0 = gaussian(&grid, cfg.width);
    let opts = FixedPointOptions {
        max_sweeps: cfg.max_iter.min(10_000),
        normalization: cfg.normalization,
        ..Default::default()
    };
    let out = fixed_point_solve(p, &u0, &opts)?;
    let (res_u, res_v) = system_residual(&out.pair)?;
    let fit = fit_json(&out.pair.u);
    let rms = fit["log_rms"].as_f64().unwrap_or(f64::INFINITY);
    let status = pass(rms < cfg.tolerance.unwrap_or(1e-2));
    Ok(CommandResult {
        status,
        result: json!({
            "params": p,
            "grid": cfg.grid,
            "normalization": cfg.normalization,
            "iterations": out.sweeps,
            "last_change": out.last_change,
            "value": out.pair.u.values()[0],
            "fit": fit,
            "residuals": {"u": res_u, "v": res_v},
        }),
        csv: None,
        summary: format!(
            "fixed point reached after {} sweeps (last change {:.3e})\nbubble fit: {fit}\nsystem residual u {res_u:.3e}, v {res_v:.3e}\n{}",
            out.sweeps,
            out.last_change,
            verdict_line(status)
        ),
    })
}

fn spectrum_report(cfg: &RunConfig) -> Result<SpectrumReport> {
    let grid = cfg.build_grid()?;
    let b = umu_bubble(&cfg.params, cfg.width)?;
    nondegeneracy_report(
        &cfg.params,
        &b,
        &grid,
        &SpectrumOptions {
            ell_max: cfg.ell_max,
            tau: cfg.tau,
            ..Default::default()
        },
    )
}

fn spectrum_status(rep: &SpectrumReport) -> Status {
    match rep.verdict {
        Verdict::Nondegenerate => Status::Ok,
        Verdict::Degenerate => Status::Failed,
        Verdict::Inconclusive => Status::Inconclusive,
    }
}

fn run_spectrum(cfg: &RunConfig) -> Result<CommandResult> {
    let rep = spectrum_report(cfg)?;
    let mut buf = Vec::new();
    rep.write_csv(&mut buf)?;
    let mut summary = format!(
        "tau = {:.3e} (tangent residuals {:.3e}, {:.3e})\n",
        rep.tau, rep.tangent_residual_t, rep.tangent_residual_x
    );
    for s in &rep.sectors {
        summary.push_str(&format!(
            "  ell = {}: smallest {:?}, zero modes {}\n",
            s.ell,
            s.eigenvalues.iter().take(3).map(|v| format!("{v:.4e}")).collect::<Vec<_>>(),
            s.zero_mode_count
        ));
    }
    summary.push_str(&format!(
        "kernel_dimension = {}, nondegenerate = {}, verdict = {:?}{}",
        rep.kernel_dimension,
        rep.nondegenerate,
        rep.verdict,
        if rep.experimental { " (experimental configuration)" } else { "" }
    ));
    Ok(CommandResult {
        status: spectrum_status(&rep),
        result: serde_json::to_value(&rep)?,
        csv: Some(String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))?),
        summary,
    })
}

fn run_moving_plane(cfg: &RunConfig) -> Result<CommandResult> {
    let p = &cfg.params;
    let grid = cfg.build_grid()?;
    let pair = bubble_pair(p, &grid, cfg.width, cfg.normalization)?;
    let mut base = PairField::from_pair(&pair, vec![0.0; p.dim()])?;
    if cfg.shift != 0.0 {
        let mut a = vec![0.0; p.dim()];
        a[0] = -cfg.shift;
        base = base.translate(&a)?;
    }
    let kelvin = base.kelvin();
    let rows = moving_plane_table(&kelvin, &cfg.lambdas, &SampleBox::default())?;
    let mut buf = Vec::new();
    write_moving_plane_csv(&rows, &mut buf)?;
    let monotone = rows.iter().all(|r| r.max_gap <= 0.0);
    let empty_consistent = rows.iter().all(|r| r.sigma_s_fraction > 0.0 || r.lhs == 0.0);
    let status = pass(empty_consistent && (cfg.shift != 0.0 || monotone));
    let mut summary = String::from("lambda  sigma_s_fraction  lhs  bracket  max(s - s_lambda)\n");
    for r in &rows {
        summary.push_str(&format!(
            "{:<7} {:<17.4} {:<.4e} {:<.4e} {:.3e}\n",
            r.lambda, r.sigma_s_fraction, r.lhs, r.bracket, r.max_gap
        ));
    }
    summary.push_str(&verdict_line(status));
    Ok(CommandResult {
        status,
        result: json!({"grid": cfg.grid, "shift": cfg.shift, "rows": rows}),
        csv: Some(String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))?),
        summary,
    })
}

fn run_sweep(cfg: &RunConfig) -> Result<CommandResult> {
    let cases = cfg
        .mu_values
        .iter()
        .map(|&mu| {
            let mut c = cfg.with_mu(mu)?;
            c.command = cfg.task;
            c.output = None;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<(f64, Result<CommandResult>)> = cases
        .par_iter()
        .map(|c| (c.params.mu(), execute(c)))
        .collect();
    let mut status = Status::Ok;
    let mut entries = Vec::new();
    let mut summary = format!("sweep of {} over mu = {:?}\n", cfg.task.name(), cfg.mu_values);
    if cfg.task == Command::Spectrum {
        summary.push_str("(exploratory: nondegeneracy is only established for mu close to N)\n");
    }
    let mut table = String::new();
    for (mu, r) in results {
        match r {
            Ok(res) => {
                status = status.merge(res.status);
                summary.push_str(&format!("  mu = {mu}: {:?}\n", res.status));
                if let Some(csv) = &res.csv {
                    let mut lines = csv.lines();
                    let header = lines.next().unwrap_or_default();
                    if table.is_empty() {
                        table = format!("case_mu,{header}\n");
                    }
                    for line in lines {
                        table.push_str(&format!("{mu},{line}\n"));
                    }
                }
                entries.push(json!({"mu": mu, "status": res.status, "result": res.result}));
            }
            Err(e) => {
                status = Status::Failed;
                summary.push_str(&format!("  mu = {mu}: error: {e}\n"));
                entries.push(json!({"mu": mu, "status": Status::Failed, "error": e.to_string()}));
            }
        }
    }
    summary.push_str(&verdict_line(status));
    Ok(CommandResult {
        status,
        result: json!({"task": cfg.task.name(), "exploratory": cfg.task == Command::Spectrum, "cases": entries}),
        csv: (!table.is_empty()).then_some(table),
        summary,
    })
}

fn verdict_line(status: Status) -> String {
    match status {
        Status::Ok => "PASS".into(),
        Status::Failed => "FAIL".into(),
        Status::Inconclusive => "INCONCLUSIVE".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spectrum_flags() {
        let cfg = parse_config(["choquard", "spectrum", "--N", "3", "--mu", "2.9", "--grid-size", "1024", "--ell-max", "6"])
            .unwrap();
        assert_eq!(cfg.command, Command::Spectrum);
        assert_eq!(cfg.params.dim(), 3);
        assert_eq!(cfg.params.mu(), 2.9);
        assert_eq!(cfg.grid.size, 1024);
        assert_eq!(cfg.ell_max, 6);
    }

    #[test]
    fn rejects_mu_above_dimension() {
        let err = parse_config(["choquard", "constants", "--N", "3", "--mu", "3.5"]).unwrap_err();
        assert!(err.to_string().contains("0 < mu < N"), "{err}");
    }

    #[test]
    fn rejects_unknown_flags() {
        assert!(parse_config(["choquard", "constants", "--frobnicate", "1"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Ok.exit_code(), 0);
        assert_eq!(Status::Failed.exit_code(), 1);
        assert_eq!(Status::Inconclusive.exit_code(), 2);
    }
}
