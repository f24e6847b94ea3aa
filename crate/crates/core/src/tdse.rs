//! Strang split-step Fourier propagator for
//! `iψ_t = -ψ_xx/2 + Ω²(t) x² ψ/2` on a periodic grid.
//!
//! One step of size `δt` starting at `t` is
//! `e^{-iV(t+δt/2)δt/2} · F⁻¹ e^{-ik²δt/2} F · e^{-iV(t+δt/2)δt/2}`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::frequency::FrequencyProfile;
use crate::grid::{SpatialGrid, WavefunctionSlice};
use crate::madelung::ExactSolution;

/// Upper bound on `|δt| · max|V|` per step.
pub const PHASE_WRAP_LIMIT: f64 = 0.5;

/// The grid cutoff `π/h` must exceed this multiple of the momentum width.
pub const MOMENTUM_MARGIN: f64 = 6.0;

#[derive(Debug, Clone)]
pub struct PropagatorConfig {
    pub grid: SpatialGrid,
    /// Largest step; every interval is split into equal steps no longer than this.
    pub dt: f64,
    pub potential: FrequencyProfile,
}

impl PropagatorConfig {
    pub fn new(grid: SpatialGrid, dt: f64, potential: FrequencyProfile) -> Result<Self> {
        if !grid.is_power_of_two() {
            return Err(Error::config(format!("split-step grid needs a power-of-two size, got {}", grid.len())));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { grid, dt, potential })
    }
}

/// Wavenumbers in FFT order for `n` samples of spacing `h`, covering `[-π/h, π/h)`.
pub fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * h);
    (0..n).map(|j| if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * dk).collect()
}

/// Root-mean-square momentum spread `√(⟨k²⟩ - ⟨k⟩²)`.
pub fn momentum_width(psi: &WavefunctionSlice) -> f64 {
    let n = psi.psi.len();
    let mut buf = psi.psi.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let k = wavenumbers(n, psi.grid.spacing());
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mean: f64 = buf.iter().zip(&k).map(|(z, k)| z.norm_sqr() * k).sum::<f64>() / total;
    let mean_sq: f64 = buf.iter().zip(&k).map(|(z, k)| z.norm_sqr() * k * k).sum::<f64>() / total;
    (mean_sq - mean * mean).max(0.0).sqrt()
}

pub struct SplitStepPropagator {
    config: PropagatorConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k_sq: Vec<f64>,
    half_x_sq: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for SplitStepPropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitStepPropagator").field("config", &self.config).finish_non_exhaustive()
    }
}

impl SplitStepPropagator {
    pub fn new(config: PropagatorConfig) -> Result<Self> {
        let n = config.grid.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch =
            vec![Complex64::default(); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        let k_sq = wavenumbers(n, config.grid.spacing()).iter().map(|k| k * k).collect();
        let half_x_sq = config.grid.points().iter().map(|x| 0.5 * x * x).collect();
        Ok(Self { config, forward, inverse, k_sq, half_x_sq, scratch })
    }

    pub fn config(&self) -> &PropagatorConfig {
        &self.config
    }

    fn check_slice(&self, psi: &WavefunctionSlice) -> Result<()> {
        if psi.grid != self.config.grid {
            return Err(Error::config("wavefunction grid differs from the propagator grid"));
        }
        let cutoff = PI / self.config.grid.spacing();
        let width = momentum_width(psi);
        if cutoff <= MOMENTUM_MARGIN * width {
            return Err(Error::config(format!(
                "grid cutoff π/h = {cutoff:.3} does not exceed {MOMENTUM_MARGIN}× the momentum width {width:.3}"
            )));
        }
        Ok(())
    }

    /// Evolves `psi` in place from `t0` to `t1` (either direction) in equal
    /// steps no longer than the configured `dt`.
    pub fn evolve(&mut self, psi: &mut [Complex64], t0: f64, t1: f64) -> Result<()> {
        let n = self.config.grid.len();
        if psi.len() != n {
            return Err(Error::config("wavefunction length differs from the grid"));
        }
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(());
        }
        let steps = ((span.abs() / self.config.dt) - 1e-9).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let norm = 1.0 / n as f64;
        let kinetic: Vec<Complex64> = self.k_sq.iter().map(|k2| Complex64::from_polar(norm, -0.5 * k2 * dt)).collect();
        let max_half_x_sq = self.half_x_sq.iter().fold(0.0f64, |m, v| m.max(*v));
        let mut kick = vec![Complex64::default(); n];

        for step in 0..steps {
            let t_mid = t0 + (step as f64 + 0.5) * dt;
            let w = self.config.potential.omega(t_mid)?;
            let w2 = w * w;
            if dt.abs() * w2 * max_half_x_sq >= PHASE_WRAP_LIMIT {
                return Err(Error::config(format!(
                    "|dt|·max V = {:.3} at t = {t_mid} exceeds {PHASE_WRAP_LIMIT}; reduce dt or the grid extent",
                    dt.abs() * w2 * max_half_x_sq
                )));
            }
            for (k, v) in kick.iter_mut().zip(&self.half_x_sq) {
                *k = Complex64::from_polar(1.0, -0.5 * w2 * v * dt);
            }
            for (z, k) in psi.iter_mut().zip(&kick) {
                *z *= k;
            }
            self.forward.process_with_scratch(psi, &mut self.scratch);
            for (z, k) in psi.iter_mut().zip(&kinetic) {
                *z *= k;
            }
            self.inverse.process_with_scratch(psi, &mut self.scratch);
            for (z, k) in psi.iter_mut().zip(&kick) {
                *z *= k;
            }
        }
        Ok(())
    }

    /// Propagates `psi0` from its own time to `t_end`.
    pub fn propagate(&mut self, psi0: &WavefunctionSlice, t_end: f64) -> Result<WavefunctionSlice> {
        self.check_slice(psi0)?;
        let mut psi = psi0.psi.clone();
        self.evolve(&mut psi, psi0.t, t_end)?;
        WavefunctionSlice::new(psi0.grid, t_end, psi)
    }

    /// Propagates through increasing `times`, returning a slice at each.
    pub fn propagate_sampled(&mut self, psi0: &WavefunctionSlice, times: &[f64]) -> Result<Vec<WavefunctionSlice>> {
        self.check_slice(psi0)?;
        if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < psi0.t) {
            return Err(Error::config("sample times must be sorted and not precede the initial time"));
        }
        let mut psi = psi0.psi.clone();
        let mut t = psi0.t;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            self.evolve(&mut psi, t, target)?;
            t = target;
            out.push(WavefunctionSlice::new(psi0.grid, t, psi.clone())?);
        }
        Ok(out)
    }
}

pub fn propagate(psi0: &WavefunctionSlice, config: &PropagatorConfig, t_end: f64) -> Result<WavefunctionSlice> {
    SplitStepPropagator::new(config.clone())?.propagate(psi0, t_end)
}

/// `|∫ψ₁*ψ₂ dx| / (‖ψ₁‖‖ψ₂‖)` by the trapezoidal rule.
pub fn fidelity(psi1: &WavefunctionSlice, psi2: &WavefunctionSlice) -> Result<f64> {
    Ok(overlap(psi1, psi2)?.norm())
}

/// Normalized overlap `∫ψ₁*ψ₂ dx / (‖ψ₁‖‖ψ₂‖)`; its argument is the relative phase.
pub fn overlap(psi1: &WavefunctionSlice, psi2: &WavefunctionSlice) -> Result<Complex64> {
    if psi1.grid != psi2.grid {
        return Err(Error::config("fidelity needs both wavefunctions on the same grid"));
    }
    let prod: Vec<Complex64> = psi1.psi.iter().zip(&psi2.psi).map(|(a, b)| a.conj() * b).collect();
    let denom = (psi1.norm_sqr() * psi2.norm_sqr()).sqrt();
    if denom == 0.0 {
        return Err(Error::domain("fidelity of a zero wavefunction"));
    }
    Ok(psi1.grid.integrate_complex(&prod) / denom)
}

/// One comparison time of [`oracle_comparison`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    /// Fidelity between the propagated and the exact state.
    pub fidelity: f64,
    /// `|∫|ψ|² dx - 1|` of the propagated state.
    pub norm_error: f64,
}

/// Propagates the exact `ψ(x, 0)` to `samples` uniform times in `[0, t_max]`
/// and compares each with the exact state. The domain half width defaults to
/// [`SpatialGrid::half_width_for`] the largest `ρ` on the interval.
pub fn oracle_comparison(
    exact: &ExactSolution,
    t_max: f64,
    dt: f64,
    n: usize,
    half_width: Option<f64>,
    samples: usize,
) -> Result<Vec<OracleSample>> {
    if samples < 2 || !(t_max > 0.0) {
        return Err(Error::config("oracle comparison needs at least 2 samples and t_max > 0"));
    }
    let half_width = match half_width {
        Some(w) => w,
        None => SpatialGrid::half_width_for(exact.max_rho(t_max)?),
    };
    let grid = SpatialGrid::symmetric(half_width, n)?;
    let mut propagator = SplitStepPropagator::new(PropagatorConfig::new(grid, dt, exact.profile().clone())?)?;
    let times: Vec<f64> =
        (0..samples).map(|i| if i + 1 == samples { t_max } else { t_max * i as f64 / (samples - 1) as f64 }).collect();
    let psi0 = exact.wavefunction(&grid, 0.0)?;
    propagator
        .propagate_sampled(&psi0, &times)?
        .iter()
        .map(|slice| {
            let reference = exact.wavefunction(&grid, slice.t)?;
            Ok(OracleSample {
                t: slice.t,
                fidelity: fidelity(&reference, slice)?,
                norm_error: (slice.norm_sqr() - 1.0).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::madelung::{Branch, ExactSolution};

    fn ground(grid: SpatialGrid) -> WavefunctionSlice {
        ExactSolution::from_branch(Branch::Static).unwrap().wavefunction(&grid, 0.0).unwrap()
    }

    #[test]
    fn wavenumber_layout() {
        let k = wavenumbers(8, PI / 4.0);
        assert_eq!(k[0], 0.0);
        assert!((k[1] - 1.0).abs() < 1e-15);
        assert!((k[4] + 4.0).abs() < 1e-15);
        assert!((k[7] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let one = FrequencyProfile::constant(1.0).unwrap();
        assert!(PropagatorConfig::new(SpatialGrid::symmetric(8.0, 500).unwrap(), 1e-3, one.clone()).is_err());
        assert!(PropagatorConfig::new(SpatialGrid::default(), 0.0, one.clone()).is_err());
        let big = PropagatorConfig::new(SpatialGrid::symmetric(100.0, 512).unwrap(), 1e-3, one).unwrap();
        let psi0 = ground(big.grid);
        assert!(propagate(&psi0, &big, 0.01).is_err());
    }

    #[test]
    fn coarse_grid_fails_momentum_guard() {
        let one = FrequencyProfile::constant(1.0).unwrap();
        let grid = SpatialGrid::symmetric(40.0, 32).unwrap();
        let cfg = PropagatorConfig::new(grid, 1e-3, one).unwrap();
        let psi0 = ground(grid);
        assert!(propagate(&psi0, &cfg, 0.01).is_err());
    }

    #[test]
    fn stationary_ground_state() {
        let grid = SpatialGrid::symmetric(10.0, 256).unwrap();
        let cfg = PropagatorConfig::new(grid, 1e-3, FrequencyProfile::constant(1.0).unwrap()).unwrap();
        let psi0 = ground(grid);
        let out = propagate(&psi0, &cfg, PI).unwrap();
        let ov = overlap(&psi0, &out).unwrap();
        assert!(1.0 - ov.norm() < 1e-8);
        assert!((ov.arg() + PI / 2.0).abs() < 1e-6);
        assert!((out.norm_sqr() - psi0.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let grid = SpatialGrid::symmetric(10.0, 256).unwrap();
        let psi = ground(grid);
        assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-14);
        let mut rotated = psi.clone();
        rotated.psi.iter_mut().for_each(|z| *z *= Complex64::from_polar(1.0, 1.234));
        assert!((fidelity(&psi, &rotated).unwrap() - 1.0).abs() < 1e-14);
        // First excited state is odd; the grid is symmetric about 0.
        let odd: Vec<Complex64> =
            grid.points().iter().map(|&x| Complex64::new(x * (-x * x / 2.0).exp(), 0.0)).collect();
        let odd = WavefunctionSlice::new(grid, 0.0, odd).unwrap();
        assert!(fidelity(&psi, &odd).unwrap() < 1e-12);
        let zero = WavefunctionSlice::new(grid, 0.0, vec![Complex64::default(); 256]).unwrap();
        assert!(fidelity(&psi, &zero).is_err());
    }

    #[test]
    fn time_reversal_recovers_initial_state() {
        let exact = ExactSolution::from_branch(Branch::Subcritical { b: 1.0 }).unwrap();
        let grid = SpatialGrid::symmetric(20.0, 512).unwrap();
        let cfg = PropagatorConfig::new(grid, 1e-3, exact.profile().clone()).unwrap();
        let mut prop = SplitStepPropagator::new(cfg).unwrap();
        let psi0 = exact.wavefunction(&grid, 0.0).unwrap();
        let mut psi = psi0.psi.clone();
        prop.evolve(&mut psi, 0.0, 2.0).unwrap();
        prop.evolve(&mut psi, 2.0, 0.0).unwrap();
        let back = WavefunctionSlice::new(grid, 0.0, psi).unwrap();
        assert!(1.0 - fidelity(&psi0, &back).unwrap() < 1e-8);
    }

    #[test]
    fn splitting_is_second_order() {
        let exact = ExactSolution::from_branch(Branch::Subcritical { b: 1.0 }).unwrap();
        let grid = SpatialGrid::symmetric(12.0, 512).unwrap();
        let psi0 = exact.wavefunction(&grid, 0.0).unwrap();
        let target = exact.wavefunction(&grid, 1.0).unwrap();
        let err = |dt: f64| {
            let cfg = PropagatorConfig::new(grid, dt, exact.profile().clone()).unwrap();
            let out = propagate(&psi0, &cfg, 1.0).unwrap();
            out.psi.iter().zip(&target.psi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
        };
        let ratio = err(0.004) / err(0.002);
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }
}
