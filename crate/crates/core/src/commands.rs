//! Subcommands of the `tdho` executable.
//!
//! Every command renders exactly one output (CSV or JSON) to bytes, so the
//! same bytes can be written, digested and compared on replay.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ermakov::{ermakov_residual, SolverTolerances};
use crate::error::{Error, Result};
use crate::fd::Stencil;
use crate::frequency::{FrequencyProfile, FrequencyTable, RationalFrequency, Regime};
use crate::madelung::{Branch, ExactSolution};
use crate::manifest::RunManifest;
use crate::output::Table;
use crate::tdse::oracle_comparison;
use crate::verify::{observed_orders, refinement_study, ResidualReport};

#[derive(Debug, Parser)]
#[command(
    name = "tdho",
    version,
    about = "Exact Gaussian states and Bohm potentials of time-dependent harmonic oscillators"
)]
pub struct Cli {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a JSON run manifest here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Worker threads for surface evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Tabulate ρ, ν and their derivatives with the Ermakov residual.
    Ermakov(ErmakovArgs),
    /// Bohm and classical potentials, amplitude and phase on an (x, t) grid.
    Bohm(SurfaceArgs),
    /// Real part, imaginary part and density of ψ on an (x, t) grid.
    Wavefunction(SurfaceArgs),
    /// Finite-difference residuals of the governing equations under refinement.
    Verify(VerifyArgs),
    /// Compare the exact state with split-step propagation of ψ(x, 0).
    TdseCheck(TdseArgs),
    /// Bohm potential surface for b = 1.
    Fig1,
    /// Bohm potential surface for the critical branch b = 2.
    Fig2,
    /// Bohm potential at a probe point as b approaches 2, ending with b = 2.
    Transition(TransitionArgs),
    /// Rerun the command recorded in a manifest and compare output digests.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ermakov(_) => "ermakov",
            Command::Bohm(_) => "bohm",
            Command::Wavefunction(_) => "wavefunction",
            Command::Verify(_) => "verify",
            Command::TdseCheck(_) => "tdse-check",
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Transition(_) => "transition",
            Command::Replay(_) => "replay",
        }
    }
}

/// Selects the frequency profile and Ermakov solution.
#[derive(Debug, Clone, PartialEq, Default, Args, Serialize, Deserialize)]
pub struct FieldArgs {
    /// Slope of Ω(t) = 1/(a + bt); b = 0 is the static oscillator.
    #[arg(long, conflicts_with_all = ["critical", "omega_table"])]
    pub b: Option<f64>,
    /// Offset of Ω(t) = 1/(a + bt); defaults to √(1 - b²/4).
    #[arg(long, requires = "b")]
    pub a: Option<f64>,
    /// The critical branch b = 2, a = 1.
    #[arg(long, conflicts_with = "omega_table")]
    pub critical: bool,
    /// Two-column CSV (t, omega), linearly interpolated.
    #[arg(long)]
    pub omega_table: Option<PathBuf>,
    /// Integrate the Ermakov equation even when a closed form exists.
    #[arg(long)]
    pub numeric: bool,
    /// ρ(0) for the numeric path.
    #[arg(long)]
    pub rho0: Option<f64>,
    /// ρ̇(0) for the numeric path; b/(2a) for rational profiles, 0 for tables.
    #[arg(long)]
    pub rho_dot0: Option<f64>,
}

impl FieldArgs {
    pub fn subcritical(b: f64) -> Self {
        Self { b: Some(b), ..Self::default() }
    }

    pub fn critical() -> Self {
        Self { critical: true, ..Self::default() }
    }

    /// Builds the exact solution valid on `[0, t_max]`.
    pub fn resolve(&self, t_max: f64) -> Result<ExactSolution> {
        let profile = match (&self.omega_table, self.critical, self.b) {
            (Some(path), _, _) => return self.resolve_table(path, t_max),
            (None, true, _) => RationalFrequency::new(1.0, 2.0)?,
            (None, false, Some(b)) => match self.a {
                Some(a) => RationalFrequency::new(a, b)?,
                None => RationalFrequency::normalized(b)?,
            },
            (None, false, None) => return Err(Error::config("choose one of --b, --critical or --omega-table")),
        };
        if profile.regime() == Regime::Unsupported {
            return Err(Error::domain(format!("b = {} is outside 0 ≤ b ≤ 2", profile.b())));
        }
        let normalized = RationalFrequency::normalized(profile.b())?;
        let closed_form =
            (profile.a() - normalized.a()).abs() <= 1e-12 && self.rho0.is_none() && self.rho_dot0.is_none();
        if closed_form && !self.numeric {
            return ExactSolution::from_branch(Branch::rational(profile.b())?);
        }
        let rho_dot0 = self.rho_dot0.unwrap_or(profile.b() / (2.0 * profile.a()));
        let tol = SolverTolerances::default();
        ExactSolution::numeric(FrequencyProfile::rational(profile), self.rho0.unwrap_or(1.0), rho_dot0, t_max, tol)
    }

    fn resolve_table(&self, path: &Path, t_max: f64) -> Result<ExactSolution> {
        let table = FrequencyTable::from_csv(path)?;
        let (t0, t1) = table.span();
        if t0 > 0.0 || t1 < t_max {
            return Err(Error::domain(format!("frequency table covers [{t0}, {t1}] but [0, {t_max}] is needed")));
        }
        let profile = FrequencyProfile::table(table);
        let tol = SolverTolerances::default();
        ExactSolution::numeric(profile, self.rho0.unwrap_or(1.0), self.rho_dot0.unwrap_or(0.0), t_max, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ErmakovArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    /// Number of uniformly spaced times, endpoints included.
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 201)]
    pub nx: usize,
    #[arg(long, default_value_t = 6.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 121)]
    pub nt: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Time at which residuals are evaluated.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 8.0)]
    pub half_width: f64,
    /// Spatial step of the coarsest level.
    #[arg(long, default_value_t = 0.03125)]
    pub h: f64,
    /// Time step of the coarsest level.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Number of refinement levels; each halves h and dt.
    #[arg(long, default_value_t = 1)]
    pub refine: usize,
    #[arg(long, value_enum, default_value_t = Stencil::Fourth)]
    pub stencil: Stencil,
    /// Largest admissible residual at the finest level.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TdseArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    /// Grid size; must be a power of two.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Domain half width; sized from the largest ρ on [0, t_max] when omitted.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Number of uniformly spaced comparison times, t = 0 included.
    #[arg(long, default_value_t = 51)]
    pub samples: usize,
    /// Largest admissible 1 - fidelity.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TransitionArgs {
    /// Comma-separated slopes in (0, 2); defaults to 2 - 10^-k for k = 1..6.
    #[arg(long, value_delimiter = ',')]
    pub b_values: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t_probe: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x_probe: f64,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    pub manifest_path: PathBuf,
}

/// Result of one command: the rendered output and whether its checks passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub passed: bool,
    pub manifest: RunManifest,
}

fn uniform(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| if i + 1 == count { end } else { start + (end - start) * i as f64 / (count - 1) as f64 })
            .collect(),
    }
}

fn csv(table: Table) -> Result<(Vec<u8>, bool)> {
    Ok((table.to_csv_bytes()?, true))
}

/// Runs `command` and renders its output without touching the filesystem
/// (apart from reading an `--omega-table`).
pub fn execute(command: &Command) -> Result<Outcome> {
    let (bytes, passed) = match command {
        Command::Ermakov(args) => csv(ermakov_table(args)?)?,
        Command::Bohm(args) => csv(bohm_table(args)?)?,
        Command::Wavefunction(args) => csv(wavefunction_table(args)?)?,
        Command::Verify(args) => verify_report(args)?,
        Command::TdseCheck(args) => tdse_table(args)?,
        Command::Fig1 => csv(figure_table(FieldArgs::subcritical(1.0))?)?,
        Command::Fig2 => csv(figure_table(FieldArgs::critical())?)?,
        Command::Transition(args) => csv(transition_table(args)?)?,
        Command::Replay(args) => return replay(&args.manifest_path),
    };
    let params = serde_json::to_value(command)?;
    let manifest = RunManifest::new(command.name(), params);
    Ok(Outcome { bytes, passed, manifest })
}

/// Reruns a recorded command; passes when every recorded digest matches.
pub fn replay(path: &Path) -> Result<Outcome> {
    let recorded = RunManifest::read(path)?;
    let command: Command = serde_json::from_value(recorded.params.clone())?;
    let mut outcome = execute(&command)?;
    let digests_match = recorded.outputs.iter().all(|d| d.matches(&outcome.bytes));
    if !digests_match {
        log::error!("replayed output differs from the digest recorded in {}", path.display());
    }
    outcome.passed &= digests_match;
    Ok(outcome)
}

/// Executes the parsed command line, writing the output and manifest.
pub fn run(cli: &Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::config(e.to_string()))?;
    }
    let mut outcome = execute(&cli.command)?;
    let target = match &cli.out {
        Some(path) => {
            std::fs::write(path, &outcome.bytes)?;
            path.display().to_string()
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&outcome.bytes)?;
            "-".to_string()
        }
    };
    if let Some(path) = &cli.manifest {
        outcome.manifest.record_output(&target, &outcome.bytes);
        outcome.manifest.write(path)?;
    }
    Ok(outcome.passed)
}

pub fn ermakov_table(args: &ErmakovArgs) -> Result<Table> {
    if args.samples < 2 || !(args.t_max > 0.0) {
        return Err(Error::config("ermakov needs --samples ≥ 2 and --t-max > 0"));
    }
    let exact = args.field.resolve(args.t_max)?;
    let scale = exact.scale();
    let rows = uniform(0.0, args.t_max, args.samples)
        .into_par_iter()
        .map(|t| {
            let (rho, rho_dot, _) = scale.solution().state(t)?;
            let v = scale.at(t)?;
            let residual = ermakov_residual(scale.solution(), scale.profile(), t)?;
            Ok(vec![t, rho, rho_dot, v.nu, v.nu_dot, v.nu_ddot, residual])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(["t", "rho", "rho_dot", "nu", "nu_dot", "nu_ddot", "residual"]);
    table.extend(rows)?;
    Ok(table)
}

fn surface_axes(args: &SurfaceArgs) -> Result<(Vec<f64>, Vec<f64>)> {
    if args.nx < 2 || args.nt < 1 || !(args.x_max > args.x_min) || !(args.t_max >= 0.0) {
        return Err(Error::config("surface needs --nx ≥ 2, --nt ≥ 1, --x-max > --x-min and --t-max ≥ 0"));
    }
    Ok((uniform(0.0, args.t_max, args.nt), uniform(args.x_min, args.x_max, args.nx)))
}

/// Evaluates `row(t, x)` on the surface, `t`-major, in parallel over `t`.
fn surface<F>(ts: &[f64], xs: &[f64], row: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
{
    let blocks = ts
        .par_iter()
        .map(|&t| xs.iter().map(|&x| row(t, x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

pub fn bohm_table(args: &SurfaceArgs) -> Result<Table> {
    let (ts, xs) = surface_axes(args)?;
    let exact = args.field.resolve(args.t_max.max(f64::MIN_POSITIVE))?;
    let rows = surface(&ts, &xs, |t, x| {
        Ok(vec![
            t,
            x,
            exact.bohm_potential(x, t)?,
            exact.classical_potential(x, t)?,
            exact.amplitude(x, t)?,
            exact.phase(x, t)?,
        ])
    })?;
    let mut table = Table::new(["t", "x", "V_B", "V", "A", "S"]);
    table.extend(rows)?;
    Ok(table)
}

pub fn wavefunction_table(args: &SurfaceArgs) -> Result<Table> {
    let (ts, xs) = surface_axes(args)?;
    let exact = args.field.resolve(args.t_max.max(f64::MIN_POSITIVE))?;
    let rows = surface(&ts, &xs, |t, x| {
        let psi = exact.psi(x, t)?;
        Ok(vec![t, x, psi.re, psi.im, psi.norm_sqr()])
    })?;
    let mut table = Table::new(["t", "x", "re_psi", "im_psi", "density"]);
    table.extend(rows)?;
    Ok(table)
}

/// `V_B` on `x ∈ [-5, 5]` (201 points) by `t ∈ [0, 6]` (121 points).
pub fn figure_table(field: FieldArgs) -> Result<Table> {
    let args = SurfaceArgs { field, x_min: -5.0, x_max: 5.0, nx: 201, t_max: 6.0, nt: 121 };
    let (ts, xs) = surface_axes(&args)?;
    let exact = args.field.resolve(args.t_max)?;
    let rows = surface(&ts, &xs, |t, x| Ok(vec![t, x, exact.bohm_potential(x, t)?]))?;
    let mut table = Table::new(["t", "x", "V_B"]);
    table.extend(rows)?;
    Ok(table)
}

pub fn default_transition_slopes() -> Vec<f64> {
    (1..=6).map(|k| 2.0 - 10f64.powi(-k)).collect()
}

pub fn transition_table(args: &TransitionArgs) -> Result<Table> {
    if !(args.t_probe > 0.0) {
        return Err(Error::config("--t-probe must be positive"));
    }
    let slopes = if args.b_values.is_empty() { default_transition_slopes() } else { args.b_values.clone() };
    if let Some(b) = slopes.iter().find(|&&b| !(b > 0.0 && b < 2.0)) {
        return Err(Error::domain(format!("transition slopes must lie in (0, 2), got {b}")));
    }
    let mut table = Table::new(["b", "V_B"]);
    for &b in &slopes {
        let v = ExactSolution::from_branch(Branch::Subcritical { b })?.bohm_potential(args.x_probe, args.t_probe)?;
        table.push(vec![b, v])?;
    }
    let critical = ExactSolution::from_branch(Branch::Critical)?.bohm_potential(args.x_probe, args.t_probe)?;
    table.push(vec![2.0, critical])?;
    Ok(table)
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    tolerance: f64,
    passed: bool,
    reports: Vec<ResidualReport>,
    observed_orders: ObservedOrders,
}

#[derive(Debug, Serialize)]
struct ObservedOrders {
    schrodinger: Vec<f64>,
    continuity: Vec<f64>,
    qhje: Vec<f64>,
}

fn verify_report(args: &VerifyArgs) -> Result<(Vec<u8>, bool)> {
    if args.refine == 0 {
        return Err(Error::config("--refine must be at least 1"));
    }
    let t_end = args.t + 2.0 * args.dt;
    let exact = args.field.resolve(t_end)?;
    let label = match (&args.field.omega_table, args.field.critical, args.field.b) {
        (Some(p), _, _) => format!("table({})", p.display()),
        (None, true, _) => "critical".to_string(),
        (None, false, Some(b)) => format!("b={b}"),
        _ => "unknown".to_string(),
    };
    let reports =
        refinement_study(&exact, &label, args.t, args.half_width, args.h, args.dt, args.refine, args.stencil)?;
    let finest = reports.last().expect("at least one level");
    let passed = finest.is_finite() && finest.worst() < args.tolerance && finest.normalization_error < 1e-10;
    let column = |f: fn(&ResidualReport) -> f64| observed_orders(&reports.iter().map(f).collect::<Vec<_>>());
    let observed_orders = ObservedOrders {
        schrodinger: column(|r| r.se_residual_max),
        continuity: column(|r| r.continuity_residual_max),
        qhje: column(|r| r.qhje_residual_max),
    };
    let out = VerifyOutput { tolerance: args.tolerance, passed, reports, observed_orders };
    let mut bytes = serde_json::to_vec_pretty(&out)?;
    bytes.push(b'\n');
    Ok((bytes, passed))
}

/// `(t, fidelity, norm_error)` rows comparing propagation with the exact state.
pub fn tdse_comparison(args: &TdseArgs) -> Result<Table> {
    let exact = args.field.resolve(args.t_max)?;
    let samples = oracle_comparison(&exact, args.t_max, args.dt, args.n, args.half_width, args.samples)?;
    let mut table = Table::new(["t", "fidelity", "norm_error"]);
    table.extend(samples.iter().map(|s| vec![s.t, s.fidelity, s.norm_error]))?;
    Ok(table)
}

fn tdse_table(args: &TdseArgs) -> Result<(Vec<u8>, bool)> {
    let table = tdse_comparison(args)?;
    let passed = table.rows().iter().all(|r| 1.0 - r[1] <= args.tolerance);
    Ok((table.to_csv_bytes()?, passed))
}
