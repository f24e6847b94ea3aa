//! Finite-difference residuals of the governing equations:
//!
//! * Schrödinger: `iψ_t + ψ_xx/(2m) - Vψ = 0`
//! * continuity:  `(2A'S' + AS'')/(2m) + Ȧ = 0`
//! * QHJE:        `S'²/(2m) + V_B + V + Ṡ = 0`
//!
//! Residuals are evaluated at the centre of an odd, uniformly spaced set of
//! time slices, on the grid interior (two points dropped per side), and max
//! norms are restricted to where `|ψ| > 1e-10 · max|ψ|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::fd::Stencil;
use crate::grid::{SpatialGrid, WavefunctionGrid, WavefunctionSlice};
use crate::madelung::{bohm_potential_gaussian, ExactSolution};

/// Relative amplitude below which samples are left out of the norms.
pub const SIGNIFICANCE: f64 = 1e-10;

/// Points excluded at each end of the grid.
pub const BOUNDARY_SKIP: usize = 2;

/// Real field sampled on a shared grid at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFamily {
    pub grid: SpatialGrid,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ScalarFamily {
    pub fn new(grid: SpatialGrid, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::config("time and value counts differ"));
        }
        if values.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::config("slice length differs from the grid"));
        }
        Ok(Self { grid, times, values })
    }
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 3 || times.len().is_multiple_of(2) {
        return Err(Error::InsufficientSamples(format!(
            "need an odd number (≥ 3) of time samples, got {}",
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1e-300)) {
        return Err(Error::config("time samples must be increasing and uniformly spaced"));
    }
    Ok(dt)
}

/// Time samples the stencil needs, centred in the family.
fn time_window(len: usize, stencil: Stencil) -> Result<(usize, usize)> {
    let centre = len / 2;
    let r = stencil.reach();
    if centre < r {
        return Err(Error::InsufficientSamples(format!(
            "{stencil:?} stencil needs {} time samples, got {len}",
            2 * r + 1
        )));
    }
    Ok((centre - r, centre))
}

/// `true` where `|f| > SIGNIFICANCE · max|f|`, excluding the boundary points.
pub fn significant_region(magnitude: &[f64]) -> Vec<bool> {
    let peak = magnitude.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = magnitude.len();
    magnitude
        .iter()
        .enumerate()
        .map(|(i, v)| i >= BOUNDARY_SKIP && i + BOUNDARY_SKIP < n && v.abs() > SIGNIFICANCE * peak)
        .collect()
}

fn interior(n: usize, stencil: Stencil) -> std::ops::Range<usize> {
    let skip = BOUNDARY_SKIP.max(stencil.reach());
    skip..n.saturating_sub(skip)
}

/// L2 and max norms of the Schrödinger residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerResidual {
    pub l2: f64,
    pub max: f64,
}

/// Schrödinger residual at the central time of `family`. `potential` holds
/// `V(x_i)` at that time.
pub fn schrodinger_residual(
    family: &WavefunctionGrid,
    potential: &[f64],
    mass: f64,
    stencil: Stencil,
) -> Result<SchrodingerResidual> {
    let grid = family.grid();
    if potential.len() != grid.len() {
        return Err(Error::config("potential samples do not match the grid"));
    }
    let dt = uniform_step(family.times())?;
    let (first, centre) = time_window(family.len(), stencil)?;
    let h = grid.spacing();
    let psi_c = family.samples(centre);
    let region = significant_region(&psi_c.iter().map(|z| z.norm()).collect::<Vec<_>>());
    let column: Vec<Vec<Complex64>> = (0..grid.len())
        .map(|i| (first..first + 2 * stencil.reach() + 1).map(|j| family.samples(j)[i]).collect())
        .collect();

    let mut sum_sq = 0.0;
    let mut max = 0.0f64;
    for i in interior(grid.len(), stencil) {
        if !region[i] {
            continue;
        }
        let psi_t = stencil.d1(&column[i], stencil.reach(), dt);
        let psi_xx = stencil.d2(psi_c, i, h);
        let r = Complex64::i() * psi_t + psi_xx / (2.0 * mass) - psi_c[i] * potential[i];
        sum_sq += r.norm_sqr();
        max = max.max(r.norm());
    }
    Ok(SchrodingerResidual { l2: (sum_sq * h).sqrt(), max })
}

/// Max norm of the continuity residual at the central time.
pub fn continuity_residual(amplitude: &ScalarFamily, phase: &ScalarFamily, mass: f64, stencil: Stencil) -> Result<f64> {
    if amplitude.grid != phase.grid || amplitude.times != phase.times {
        return Err(Error::config("amplitude and phase families are sampled differently"));
    }
    let dt = uniform_step(&amplitude.times)?;
    let (first, centre) = time_window(amplitude.times.len(), stencil)?;
    let h = amplitude.grid.spacing();
    let a = &amplitude.values[centre];
    let s = &phase.values[centre];
    let region = significant_region(a);
    let mut max = 0.0f64;
    for i in interior(a.len(), stencil) {
        if !region[i] {
            continue;
        }
        let column: Vec<f64> = (first..first + 2 * stencil.reach() + 1).map(|j| amplitude.values[j][i]).collect();
        let a_t = stencil.d1(&column, stencil.reach(), dt);
        let r = (2.0 * stencil.d1(a, i, h) * stencil.d1(s, i, h) + a[i] * stencil.d2(s, i, h)) / (2.0 * mass) + a_t;
        max = max.max(r.abs());
    }
    Ok(max)
}

/// Max norm of the QHJE residual at the central time of `phase`, over
/// `region` and wherever `bohm` is present.
pub fn qhje_residual(
    phase: &ScalarFamily,
    bohm: &[Option<f64>],
    potential: &[f64],
    region: &[bool],
    mass: f64,
    stencil: Stencil,
) -> Result<f64> {
    let n = phase.grid.len();
    if bohm.len() != n || potential.len() != n || region.len() != n {
        return Err(Error::config("potential samples do not match the grid"));
    }
    let dt = uniform_step(&phase.times)?;
    let (first, centre) = time_window(phase.times.len(), stencil)?;
    let h = phase.grid.spacing();
    let s = &phase.values[centre];
    let mut max = 0.0f64;
    for i in interior(n, stencil) {
        let Some(vb) = bohm[i] else { continue };
        if !region[i] {
            continue;
        }
        let column: Vec<f64> = (first..first + 2 * stencil.reach() + 1).map(|j| phase.values[j][i]).collect();
        let s_t = stencil.d1(&column, stencil.reach(), dt);
        let s_x = stencil.d1(s, i, h);
        let r = s_x * s_x / (2.0 * mass) + vb + potential[i] + s_t;
        max = max.max(r.abs());
    }
    Ok(max)
}

/// `∫|ψ|² dx`.
pub fn normalization(psi: &WavefunctionSlice) -> f64 {
    psi.norm_sqr()
}

/// Continuity and QHJE residuals with every derivative taken analytically
/// from `ν`, `ν̇`, `ν̈` and `μ̇`.
pub fn analytic_residuals(exact: &ExactSolution, grid: &SpatialGrid, t: f64) -> Result<(f64, f64)> {
    let scale = exact.scale();
    let field = exact.phase_field();
    let v = scale.at(t)?;
    let mu_dot = field.mu_dot(t)?;
    let w = exact.profile().omega(t)?;
    let e2 = (-2.0 * v.nu).exp();
    let mut cont = 0.0f64;
    let mut qhje = 0.0f64;
    for x in grid.points() {
        let a = exact.amplitude(x, t)?;
        let a_x = -x * e2 * a;
        let a_t = a * (x * x * e2 * v.nu_dot - 0.5 * v.nu_dot);
        let s_x = x * v.nu_dot;
        cont = cont.max(((2.0 * a_x * s_x + a * v.nu_dot) / 2.0 + a_t).abs());
        let s_t = 0.5 * x * x * v.nu_ddot + mu_dot;
        let vb = -0.5 * x * x * e2 * e2 + 0.5 * e2;
        qhje = qhje.max((0.5 * s_x * s_x + vb + 0.5 * w * w * x * x + s_t).abs());
    }
    Ok((cont, qhje))
}

/// Residual norms for one `(h, Δt)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub label: String,
    pub t: f64,
    pub h: f64,
    pub dt: f64,
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub stencil: Stencil,
    pub se_residual_l2: f64,
    pub se_residual_max: f64,
    pub continuity_residual_max: f64,
    pub qhje_residual_max: f64,
    pub normalization_error: f64,
}

impl ResidualReport {
    pub fn worst(&self) -> f64 {
        self.se_residual_max.max(self.continuity_residual_max).max(self.qhje_residual_max)
    }

    pub fn is_finite(&self) -> bool {
        [
            self.se_residual_l2,
            self.se_residual_max,
            self.continuity_residual_max,
            self.qhje_residual_max,
            self.normalization_error,
        ]
        .iter()
        .all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Samples the exact fields around `t` and evaluates all three residuals.
/// The QHJE uses the Gaussian Bohm potential `-x²e^{-4ν}/2 + e^{-2ν}/2`.
pub fn verify_exact(
    exact: &ExactSolution,
    label: &str,
    t: f64,
    grid: &SpatialGrid,
    dt: f64,
    stencil: Stencil,
) -> Result<ResidualReport> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    let r = stencil.reach() as i64;
    let times: Vec<f64> = (-r..=r).map(|k| t + k as f64 * dt).collect();
    let slices = times.iter().map(|&tk| exact.wavefunction(grid, tk)).collect::<Result<Vec<_>>>()?;
    let family = WavefunctionGrid::from_slices(slices)?;
    let xs = grid.points();

    let potential = xs.iter().map(|&x| exact.classical_potential(x, t)).collect::<Result<Vec<_>>>()?;
    let se = schrodinger_residual(&family, &potential, 1.0, stencil)?;

    let amp_values = times
        .iter()
        .map(|&tk| xs.iter().map(|&x| exact.amplitude(x, tk)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let phase_values = times
        .iter()
        .map(|&tk| xs.iter().map(|&x| exact.phase(x, tk)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let amplitude = ScalarFamily::new(*grid, times.clone(), amp_values)?;
    let phase = ScalarFamily::new(*grid, times.clone(), phase_values)?;
    let continuity = continuity_residual(&amplitude, &phase, 1.0, stencil)?;

    let bohm =
        xs.iter().map(|&x| bohm_potential_gaussian(x, t, exact.scale()).map(Some)).collect::<Result<Vec<_>>>()?;
    let region = significant_region(&amplitude.values[r as usize]);
    let qhje = qhje_residual(&phase, &bohm, &potential, &region, 1.0, stencil)?;

    let centre = family.slice(r as usize);
    Ok(ResidualReport {
        label: label.to_string(),
        t,
        h: grid.spacing(),
        dt,
        n: grid.len(),
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        stencil,
        se_residual_l2: se.l2,
        se_residual_max: se.max,
        continuity_residual_max: continuity,
        qhje_residual_max: qhje,
        normalization_error: (normalization(&centre) - 1.0).abs(),
    })
}

/// Runs [`verify_exact`] at `levels` successive halvings of `h` and `Δt`.
#[allow(clippy::too_many_arguments)]
pub fn refinement_study(
    exact: &ExactSolution,
    label: &str,
    t: f64,
    half_width: f64,
    h: f64,
    dt: f64,
    levels: usize,
    stencil: Stencil,
) -> Result<Vec<ResidualReport>> {
    (0..levels)
        .map(|k| {
            let scale = 0.5f64.powi(k as i32);
            let grid = SpatialGrid::with_spacing(half_width, h * scale)?;
            verify_exact(exact, label, t, &grid, dt * scale, stencil)
        })
        .collect()
}

/// `log2(e_k / e_{k+1})` for successive entries.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
