//! Madelung fields of the exact time-dependent oscillator state.
//!
//! With `ν = ln ρ` from an Ermakov solution, the Gaussian amplitude, the
//! quadratic phase and the potentials are
//!
//! ```text
//! A(x,t)   = π^{-1/4} exp(-x² e^{-2ν}/2 - ν/2)
//! S(x,t)   = x² ν̇/2 + μ,          μ̇ = -e^{-2ν}/2,  μ(0) = 0
//! ψ(x,t)   = A e^{iS}
//! V_B(x,t) = -x² e^{-4ν}/2 + e^{-2ν}/2
//! V(x,t)   = Ω²(t) x²/2
//! ```

use num_complex::Complex64;

use crate::ermakov::{ErmakovSolution, ErmakovSource, LogScale, SolverTolerances};
use crate::error::{Error, Result};
use crate::fd::{self, Stencil};
use crate::frequency::{classify_rational, FrequencyProfile, RationalFrequency, Regime};
use crate::grid::{CubicSpline, SpatialGrid, WavefunctionSlice};

/// `|A|` below which the Bohm potential from sampled amplitudes is masked.
pub const NODE_THRESHOLD: f64 = 1e-12;

/// Fraction of L² mass allowed to leave the grid under dilation before a warning.
pub const LOST_MASS_WARNING: f64 = 1e-6;

fn pi_quarter_inv() -> f64 {
    std::f64::consts::PI.powf(-0.25)
}

/// `π^{-1/4} exp(-x² e^{-2ν}/2 - ν/2)`.
pub fn gaussian_amplitude(x: f64, nu: f64) -> f64 {
    pi_quarter_inv() * (-0.5 * x * x * (-2.0 * nu).exp() - 0.5 * nu).exp()
}

/// Gaussian amplitude at `(x, t)`.
pub fn amplitude_gaussian(x: f64, t: f64, scale: &LogScale) -> Result<f64> {
    Ok(gaussian_amplitude(x, scale.nu(t)?))
}

/// Result of dilating a sampled initial amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedAmplitude {
    pub samples: Vec<f64>,
    /// `1 - ‖A‖²/‖A₀‖²` on the grid.
    pub lost_mass: f64,
}

impl DilatedAmplitude {
    pub fn mass_warning(&self) -> bool {
        self.lost_mass > LOST_MASS_WARNING
    }
}

/// `e^{-ν/2} A₀(x e^{-ν})` on the grid of `a0`, i.e. the squeeze operator
/// `exp[-iν(xp̂ + p̂x)/2]` applied to `A₀`. Off-grid arguments use a natural
/// cubic spline; arguments outside the grid read as zero.
pub fn amplitude_general(a0: &[f64], grid: &SpatialGrid, t: f64, scale: &LogScale) -> Result<DilatedAmplitude> {
    dilate(a0, grid, scale.nu(t)?)
}

/// [`amplitude_general`] for a given `ν`.
pub fn dilate(a0: &[f64], grid: &SpatialGrid, nu: f64) -> Result<DilatedAmplitude> {
    if a0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("initial amplitude has non-finite samples"));
    }
    let spline = CubicSpline::new(grid, a0)?;
    let (shrink, weight) = ((-nu).exp(), (-0.5 * nu).exp());
    let samples: Vec<f64> = grid.points().iter().map(|&x| weight * spline.eval(x * shrink)).collect();
    let norm0 = grid.integrate(&a0.iter().map(|v| v * v).collect::<Vec<_>>());
    let norm1 = grid.integrate(&samples.iter().map(|v| v * v).collect::<Vec<_>>());
    let lost_mass = if norm0 > 0.0 { 1.0 - norm1 / norm0 } else { 0.0 };
    if lost_mass > LOST_MASS_WARNING {
        log::warn!("dilation by ν = {nu} moved {lost_mass:.3e} of the L² mass off the grid");
    }
    Ok(DilatedAmplitude { samples, lost_mass })
}

/// `μ(t) = -(a/2b) ln((a+bt)/a)` with `a = √(1 - b²/4)`; `-t/2` at `b = 0`.
pub fn mu_subcritical(b: f64, t: f64) -> Result<f64> {
    let freq = RationalFrequency::normalized(b)?;
    if freq.regime() != Regime::Subcritical {
        return Err(Error::domain(format!("b = {b} is not subcritical")));
    }
    mu_rational(freq.a(), b, t)
}

fn mu_rational(a: f64, b: f64, t: f64) -> Result<f64> {
    let u = a + b * t;
    if u <= 0.0 {
        return Err(Error::domain(format!("a + bt = {u} ≤ 0 at t = {t}")));
    }
    if b == 0.0 {
        return Ok(-0.5 * t);
    }
    // ln_1p keeps small-bt accuracy.
    Ok(-(a / (2.0 * b)) * (b * t / a).ln_1p())
}

/// `μ(t) = -½ arctan(½ ln(1+2t))`.
pub fn mu_critical(t: f64) -> Result<f64> {
    let u = 1.0 + 2.0 * t;
    if u <= 0.0 {
        return Err(Error::domain(format!("1 + 2t = {u} ≤ 0 at t = {t}")));
    }
    Ok(-0.5 * (0.5 * (2.0 * t).ln_1p()).atan())
}

/// Phase `S(x,t) = x² ν̇/2 + μ(t)`.
#[derive(Debug, Clone)]
pub struct PhaseField {
    scale: LogScale,
}

impl PhaseField {
    pub fn new(scale: LogScale) -> Self {
        Self { scale }
    }

    pub fn scale(&self) -> &LogScale {
        &self.scale
    }

    pub fn mu(&self, t: f64) -> Result<f64> {
        let solution = self.scale.solution();
        match solution.source() {
            ErmakovSource::ClosedFormSubcritical { a, b, .. } => mu_rational(*a, *b, t),
            ErmakovSource::ClosedFormCritical => mu_critical(t),
            ErmakovSource::Numeric(_) => solution.numeric_mu(t).expect("numeric source"),
        }
    }

    /// `μ̇ = -1/(2ρ²)`.
    pub fn mu_dot(&self, t: f64) -> Result<f64> {
        let rho = self.scale.solution().rho(t)?;
        Ok(-0.5 / (rho * rho))
    }

    pub fn phase(&self, x: f64, t: f64) -> Result<f64> {
        Ok(0.5 * x * x * self.scale.nu_dot(t)? + self.mu(t)?)
    }

    /// `S' = x ν̇`.
    pub fn s_prime(&self, x: f64, t: f64) -> Result<f64> {
        Ok(x * self.scale.nu_dot(t)?)
    }

    /// `S'' = ν̇`, independent of `x`.
    pub fn s_double_prime(&self, t: f64) -> Result<f64> {
        self.scale.nu_dot(t)
    }

    /// `Ṡ = x² ν̈/2 + μ̇`.
    pub fn s_dot(&self, x: f64, t: f64) -> Result<f64> {
        Ok(0.5 * x * x * self.scale.nu_ddot(t)? + self.mu_dot(t)?)
    }
}

pub fn phase(x: f64, t: f64, field: &PhaseField) -> Result<f64> {
    field.phase(x, t)
}

/// Samples `ψ = A e^{iS}` on the grid at time `t`.
pub fn wavefunction(grid: &SpatialGrid, t: f64, scale: &LogScale, field: &PhaseField) -> Result<WavefunctionSlice> {
    let v = scale.at(t)?;
    let mu = field.mu(t)?;
    let psi = grid
        .points()
        .iter()
        .map(|&x| {
            let s = 0.5 * x * x * v.nu_dot + mu;
            Complex64::from_polar(gaussian_amplitude(x, v.nu), s)
        })
        .collect();
    WavefunctionSlice::new(*grid, t, psi)
}

/// `V_B = -x² e^{-4ν}/2 + e^{-2ν}/2`.
pub fn bohm_potential_gaussian(x: f64, t: f64, scale: &LogScale) -> Result<f64> {
    Ok(gaussian_bohm(x, scale.nu(t)?))
}

fn gaussian_bohm(x: f64, nu: f64) -> f64 {
    let e2 = (-2.0 * nu).exp();
    -0.5 * x * x * e2 * e2 + 0.5 * e2
}

/// `V_B = -(1 - b²/4) x² / (2(a+bt)²) + √(1 - b²/4) / (2(a+bt))`.
pub fn bohm_potential_subcritical(b: f64, x: f64, t: f64) -> Result<f64> {
    if classify_rational(b) != Regime::Subcritical {
        return Err(Error::domain(format!("no subcritical Bohm potential for b = {b}")));
    }
    let gap = 1.0 - 0.25 * b * b;
    let a = gap.sqrt();
    let u = a + b * t;
    if u <= 0.0 {
        return Err(Error::domain(format!("a + bt = {u} ≤ 0 at t = {t}")));
    }
    Ok(-gap * x * x / (2.0 * u * u) + a / (2.0 * u))
}

/// `V_B = -x² / (2(1+2t)² g²) + 1 / (2(1+2t) g)`, `g = 1 + ¼ ln²(1+2t)`.
pub fn bohm_potential_critical(x: f64, t: f64) -> Result<f64> {
    let u = 1.0 + 2.0 * t;
    if u <= 0.0 {
        return Err(Error::domain(format!("1 + 2t = {u} ≤ 0 at t = {t}")));
    }
    let l = u.ln();
    let g = 1.0 + 0.25 * l * l;
    let ug = u * g;
    Ok(-x * x / (2.0 * ug * ug) + 1.0 / (2.0 * ug))
}

/// Bohm potential from sampled amplitudes, `-A''/(2mA)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BohmSamples {
    /// `None` where `|A|` is below [`NODE_THRESHOLD`].
    pub values: Vec<Option<f64>>,
    /// Closed x-intervals of masked samples.
    pub masked: Vec<(f64, f64)>,
}

impl BohmSamples {
    pub fn masked_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

pub fn bohm_potential_from_amplitude(amplitude: &[f64], grid: &SpatialGrid, mass: f64) -> Result<BohmSamples> {
    bohm_potential_from_amplitude_with(amplitude, grid, mass, Stencil::Second)
}

pub fn bohm_potential_from_amplitude_with(
    amplitude: &[f64],
    grid: &SpatialGrid,
    mass: f64,
    stencil: Stencil,
) -> Result<BohmSamples> {
    if amplitude.len() != grid.len() {
        return Err(Error::config("amplitude samples do not match the grid"));
    }
    if !(mass > 0.0) {
        return Err(Error::domain(format!("mass must be positive, got {mass}")));
    }
    let d2 = fd::second_derivative(amplitude, grid.spacing(), stencil);
    let mut masked = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    let values = amplitude
        .iter()
        .zip(&d2)
        .enumerate()
        .map(|(i, (&a, &a2))| {
            let x = grid.x(i);
            if a.abs() < NODE_THRESHOLD {
                run = Some(run.map_or((x, x), |(lo, _)| (lo, x)));
                None
            } else {
                if let Some(r) = run.take() {
                    masked.push(r);
                }
                Some(-a2 / (2.0 * mass * a))
            }
        })
        .collect();
    if let Some(r) = run {
        masked.push(r);
    }
    Ok(BohmSamples { values, masked })
}

/// `V = Ω²(t) x²/2`.
pub fn classical_potential(profile: &FrequencyProfile, x: f64, t: f64) -> Result<f64> {
    let w = profile.omega(t)?;
    Ok(0.5 * w * w * x * x)
}

/// Named configurations with closed-form Ermakov solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// `Ω ≡ 1`, `ρ ≡ 1`: the stationary ground state.
    Static,
    /// `Ω = 1/(a + bt)`, `0 ≤ b < 2`, `a = √(1 - b²/4)`.
    Subcritical { b: f64 },
    /// `Ω = 1/(1 + 2t)`.
    Critical,
}

impl Branch {
    /// The rational branch for slope `b`.
    pub fn rational(b: f64) -> Result<Self> {
        match classify_rational(b) {
            Regime::Subcritical => Ok(Branch::Subcritical { b }),
            Regime::Critical => Ok(Branch::Critical),
            Regime::Unsupported => Err(Error::domain(format!("b = {b} is outside 0 ≤ b ≤ 2"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Branch::Static => "static".into(),
            Branch::Subcritical { b } => format!("subcritical(b={b})"),
            Branch::Critical => "critical".into(),
        }
    }
}

/// Everything needed to evaluate the exact state: profile, `ν` and `S`.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    phase: PhaseField,
}

impl ExactSolution {
    pub fn from_branch(branch: Branch) -> Result<Self> {
        let (solution, profile) = match branch {
            Branch::Static => (ErmakovSolution::subcritical(0.0)?, FrequencyProfile::constant(1.0)?),
            Branch::Subcritical { b } => {
                let freq = RationalFrequency::normalized(b)?;
                if freq.regime() != Regime::Subcritical {
                    return Err(Error::domain(format!("b = {b} is not subcritical")));
                }
                (ErmakovSolution::subcritical(b)?, FrequencyProfile::rational(freq))
            }
            Branch::Critical => {
                (ErmakovSolution::critical(), FrequencyProfile::rational(RationalFrequency::new(1.0, 2.0)?))
            }
        };
        Ok(Self::from_parts(solution, profile))
    }

    /// Integrates the Ermakov equation for an arbitrary profile.
    pub fn numeric(
        profile: FrequencyProfile,
        rho0: f64,
        rho_dot0: f64,
        t_max: f64,
        tolerances: SolverTolerances,
    ) -> Result<Self> {
        let solution = ErmakovSolution::solve_numeric(&profile, rho0, rho_dot0, t_max, tolerances)?;
        Ok(Self::from_parts(solution, profile))
    }

    pub fn from_parts(solution: ErmakovSolution, profile: FrequencyProfile) -> Self {
        Self { phase: PhaseField::new(LogScale::new(solution, profile)) }
    }

    pub fn scale(&self) -> &LogScale {
        self.phase.scale()
    }

    pub fn phase_field(&self) -> &PhaseField {
        &self.phase
    }

    pub fn profile(&self) -> &FrequencyProfile {
        self.scale().profile()
    }

    pub fn rho(&self, t: f64) -> Result<f64> {
        self.scale().solution().rho(t)
    }

    pub fn amplitude(&self, x: f64, t: f64) -> Result<f64> {
        amplitude_gaussian(x, t, self.scale())
    }

    pub fn phase(&self, x: f64, t: f64) -> Result<f64> {
        self.phase.phase(x, t)
    }

    pub fn psi(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar(self.amplitude(x, t)?, self.phase(x, t)?))
    }

    pub fn wavefunction(&self, grid: &SpatialGrid, t: f64) -> Result<WavefunctionSlice> {
        wavefunction(grid, t, self.scale(), &self.phase)
    }

    pub fn bohm_potential(&self, x: f64, t: f64) -> Result<f64> {
        bohm_potential_gaussian(x, t, self.scale())
    }

    pub fn classical_potential(&self, x: f64, t: f64) -> Result<f64> {
        classical_potential(self.profile(), x, t)
    }

    /// Largest `ρ` over uniformly spaced probe times in `[0, t_max]`.
    pub fn max_rho(&self, t_max: f64) -> Result<f64> {
        let probes = 256;
        (0..=probes).map(|i| self.rho(t_max * i as f64 / probes as f64)).try_fold(1.0f64, |m, r| Ok(m.max(r?)))
    }
}
