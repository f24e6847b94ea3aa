//! Solutions of the Ermakov equation `ρ̈ + Ω²(t) ρ = 1/ρ³`.
//!
//! For the normalized rational family (`ρ(0) = 1`) there are two closed
//! forms:
//!
//! * subcritical, `0 ≤ b < 2`: `ρ = C √(a + bt)`, `C = (1 - b²/4)^{-1/4}`, `a = √(1 - b²/4)`;
//! * critical, `b = 2`, `a = 1`: `ρ = √(1+2t) √(1 + ¼ ln²(1+2t))`.
//!
//! Anything else is integrated numerically with [`crate::ode::dopri5`] and
//! evaluated through a piecewise quintic Hermite interpolant built from
//! `(ρ, ρ̇, ρ̈)` at every accepted step.

use crate::error::{Error, Result};
use crate::frequency::{classify_rational, FrequencyProfile, RationalFrequency, Regime};
use crate::ode::{dopri5, Node, StepControl};

/// Integration aborts once `ρ` drops below this value.
pub const SINGULAR_RHO: f64 = 1e-8;

const INTERNAL_TOLERANCE_FACTOR: f64 = 0.1;

/// Smallest admissible `1 - b²/4` on the subcritical branch.
pub const NEAR_CRITICAL_GUARD: f64 = 1e-14;

fn subcritical_params(b: f64) -> Result<(f64, f64)> {
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::domain(format!("subcritical branch needs b ≥ 0, got {b}")));
    }
    let gap = 1.0 - 0.25 * b * b;
    if classify_rational(b) != Regime::Subcritical || gap < NEAR_CRITICAL_GUARD {
        return Err(Error::domain(format!(
            "b = {b} is not subcritical (1 - b²/4 = {gap:e}); use the critical branch for b = 2"
        )));
    }
    let a = gap.sqrt();
    let c = gap.powf(-0.25);
    Ok((a, c))
}

/// `ρ(t) = C √(a + bt)` with `a` forced so that `ρ(0) = 1`.
pub fn closed_form_subcritical(b: f64, t: f64) -> Result<f64> {
    let (a, c) = subcritical_params(b)?;
    let u = a + b * t;
    if u <= 0.0 {
        return Err(Error::domain(format!("a + bt = {u} ≤ 0 at t = {t}")));
    }
    Ok(c * u.sqrt())
}

/// `ρ(t) = √(1+2t) √(1 + ¼ ln²(1+2t))`.
pub fn closed_form_critical(t: f64) -> Result<f64> {
    Ok(critical_state(t)?.0)
}

// (ρ, ρ̇, ρ̈) on the critical branch. With u = 1+2t, L = ln u, g = 1 + L²/4:
// ρ² = u g, d(ρ²)/dt = 2g + L, d²(ρ²)/dt² = 2(L+1)/u.
fn critical_state(t: f64) -> Result<(f64, f64, f64)> {
    let u = 1.0 + 2.0 * t;
    if u <= 0.0 {
        return Err(Error::domain(format!("1 + 2t = {u} ≤ 0 at t = {t}")));
    }
    let l = u.ln();
    let g = 1.0 + 0.25 * l * l;
    let rho = (u * g).sqrt();
    let rho_dot = (2.0 * g + l) / (2.0 * rho);
    let rho_ddot = ((l + 1.0) / u - rho_dot * rho_dot) / rho;
    Ok((rho, rho_dot, rho_ddot))
}

fn subcritical_state(a: f64, b: f64, c: f64, t: f64) -> Result<(f64, f64, f64)> {
    let u = a + b * t;
    if u <= 0.0 {
        return Err(Error::domain(format!("a + bt = {u} ≤ 0 at t = {t}")));
    }
    let su = u.sqrt();
    Ok((c * su, 0.5 * c * b / su, -0.25 * c * b * b / (u * su)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size; `f64::INFINITY` leaves it to the controller.
    pub max_step: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY }
    }
}

/// Dense numeric Ermakov solution. The phase integral `μ(t) = -∫₀ᵗ dτ/(2ρ²)`
/// is carried along as a third state component.
#[derive(Debug, Clone)]
pub struct NumericErmakov {
    nodes: Vec<Node<3>>,
    // d³ρ/dt³ at each node, from differentiating the equation of motion.
    jerk: Vec<f64>,
    tolerances: SolverTolerances,
}

#[derive(Clone, Copy)]
struct Quintic {
    c: [f64; 6],
    h: f64,
}

impl Quintic {
    // Hermite quintic through value/slope/curvature at both ends of [0, h].
    fn new(h: f64, p0: f64, v0: f64, a0: f64, p1: f64, v1: f64, a1: f64) -> Self {
        let (hv0, hv1) = (h * v0, h * v1);
        let (ha0, ha1) = (h * h * a0, h * h * a1);
        let c = [
            p0,
            hv0,
            0.5 * ha0,
            -10.0 * p0 - 6.0 * hv0 - 1.5 * ha0 + 10.0 * p1 - 4.0 * hv1 + 0.5 * ha1,
            15.0 * p0 + 8.0 * hv0 + 1.5 * ha0 - 15.0 * p1 + 7.0 * hv1 - ha1,
            -6.0 * p0 - 3.0 * hv0 - 0.5 * ha0 + 6.0 * p1 - 3.0 * hv1 + 0.5 * ha1,
        ];
        Self { c, h }
    }

    /// Value and first two time derivatives at local offset `s·h`.
    fn eval(&self, s: f64) -> (f64, f64, f64) {
        let c = &self.c;
        let p = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
        let dp = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
        let ddp = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
        (p, dp / self.h, ddp / (self.h * self.h))
    }
}

impl NumericErmakov {
    pub fn t_max(&self) -> f64 {
        self.nodes.last().map(|n| n.t).unwrap_or(0.0)
    }

    pub fn tolerances(&self) -> SolverTolerances {
        self.tolerances
    }

    pub fn step_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    fn segment(&self, t: f64) -> Result<(usize, f64)> {
        let (t0, t1) = (self.nodes[0].t, self.t_max());
        let slack = 1e-12 * (1.0 + t1.abs());
        if !(t >= t0 - slack && t <= t1 + slack) {
            return Err(Error::domain(format!("t = {t} outside numeric solution window [{t0}, {t1}]")));
        }
        let t = t.clamp(t0, t1);
        let k = self.nodes.partition_point(|n| n.t <= t);
        let i = k.saturating_sub(1).min(self.nodes.len() - 2);
        let h = self.nodes[i + 1].t - self.nodes[i].t;
        Ok((i, (t - self.nodes[i].t) / h))
    }

    // ρ comes from its own quintic; ρ̇ and ρ̈ from a quintic on the ρ̇
    // channel, so ρ̈ is a first derivative of interpolated data.
    fn rho_state(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (i, s) = self.segment(t)?;
        let (n0, n1) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = n1.t - n0.t;
        let pos = Quintic::new(h, n0.y[0], n0.y[1], n0.dy[1], n1.y[0], n1.y[1], n1.dy[1]);
        let vel = Quintic::new(h, n0.y[1], n0.dy[1], self.jerk[i], n1.y[1], n1.dy[1], self.jerk[i + 1]);
        let (rho, _, _) = pos.eval(s);
        let (rho_dot, rho_ddot, _) = vel.eval(s);
        Ok((rho, rho_dot, rho_ddot))
    }

    fn mu(&self, t: f64) -> Result<f64> {
        let (i, s) = self.segment(t)?;
        let (n0, n1) = (&self.nodes[i], &self.nodes[i + 1]);
        let mu_ddot = |n: &Node<3>| n.y[1] / n.y[0].powi(3);
        let q = Quintic::new(n1.t - n0.t, n0.y[2], n0.dy[2], mu_ddot(n0), n1.y[2], n1.dy[2], mu_ddot(n1));
        Ok(q.eval(s).0)
    }
}

/// Where an [`ErmakovSolution`] comes from.
#[derive(Debug, Clone)]
pub enum ErmakovSource {
    ClosedFormSubcritical { a: f64, b: f64, c: f64 },
    ClosedFormCritical,
    Numeric(NumericErmakov),
}

/// `ρ(t) > 0` solving the Ermakov equation, with `ρ̇` and `ρ̈`.
#[derive(Debug, Clone)]
pub struct ErmakovSolution {
    source: ErmakovSource,
}

impl ErmakovSolution {
    /// Closed form for `0 ≤ b < 2`, normalized to `ρ(0) = 1`.
    pub fn subcritical(b: f64) -> Result<Self> {
        let (a, c) = subcritical_params(b)?;
        Ok(Self { source: ErmakovSource::ClosedFormSubcritical { a, b, c } })
    }

    /// Closed form for `b = 2`, `a = 1`.
    pub fn critical() -> Self {
        Self { source: ErmakovSource::ClosedFormCritical }
    }

    /// Picks the closed form matching the slope's regime.
    pub fn rational(b: f64) -> Result<Self> {
        match classify_rational(b) {
            Regime::Subcritical => Self::subcritical(b),
            Regime::Critical => Ok(Self::critical()),
            Regime::Unsupported => Err(Error::domain(format!("b = {b} > 2 is not supported"))),
        }
    }

    /// Integrates `(ρ, ρ̇)` from `(rho0, rho_dot0)` over `[0, t_max]`.
    pub fn solve_numeric(
        profile: &FrequencyProfile,
        rho0: f64,
        rho_dot0: f64,
        t_max: f64,
        tolerances: SolverTolerances,
    ) -> Result<Self> {
        if !(rho0 > 0.0 && rho0.is_finite()) {
            return Err(Error::domain(format!("initial ρ must be positive, got {rho0}")));
        }
        if !rho_dot0.is_finite() {
            return Err(Error::domain("initial ρ̇ must be finite"));
        }
        if !(t_max > 0.0) {
            return Err(Error::config(format!("solution window needs T > 0, got {t_max}")));
        }
        if !(tolerances.rel_tol > 0.0 && tolerances.abs_tol > 0.0 && tolerances.max_step > 0.0) {
            return Err(Error::config("solver tolerances must be positive"));
        }
        let rhs = |t: f64, y: &[f64; 3]| -> Result<[f64; 3]> {
            let rho = y[0];
            if !(rho >= SINGULAR_RHO) {
                return Err(Error::Integration {
                    t,
                    reason: format!("ρ = {rho:e} fell below {SINGULAR_RHO:e}; the configuration is singular"),
                });
            }
            let w = profile.omega(t)?;
            let inv_rho2 = 1.0 / (rho * rho);
            Ok([y[1], inv_rho2 / rho - w * w * rho, -0.5 * inv_rho2])
        };
        // The stepper runs a decade tighter than requested so that the dense
        // output keeps the Ermakov residual below 10·rel_tol.
        let control = StepControl {
            rel_tol: tolerances.rel_tol * INTERNAL_TOLERANCE_FACTOR,
            abs_tol: tolerances.abs_tol * INTERNAL_TOLERANCE_FACTOR,
            max_step: tolerances.max_step,
            ..StepControl::default()
        };
        let nodes = dopri5(rhs, 0.0, [rho0, rho_dot0, 0.0], t_max, control)?;
        if let Some(bad) = nodes.iter().find(|n| n.y[0] < SINGULAR_RHO) {
            return Err(Error::Integration { t: bad.t, reason: "ρ left the positive domain".into() });
        }
        // d/dt (1/ρ³ - Ω²ρ) = -3ρ̇/ρ⁴ - 2ΩΩ̇ρ - Ω²ρ̇
        let jerk = nodes
            .iter()
            .map(|n| {
                let (rho, rho_dot) = (n.y[0], n.y[1]);
                let w = profile.omega(n.t)?;
                let w_dot = profile.omega_dot(n.t)?;
                Ok(-3.0 * rho_dot / rho.powi(4) - 2.0 * w * w_dot * rho - w * w * rho_dot)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { source: ErmakovSource::Numeric(NumericErmakov { nodes, jerk, tolerances }) })
    }

    pub fn source(&self) -> &ErmakovSource {
        &self.source
    }

    /// Frequency profile the closed forms solve; `None` for numeric solutions.
    pub fn implied_profile(&self) -> Option<FrequencyProfile> {
        match &self.source {
            ErmakovSource::ClosedFormSubcritical { a, b, .. } => {
                RationalFrequency::new(*a, *b).ok().map(FrequencyProfile::rational)
            }
            ErmakovSource::ClosedFormCritical => RationalFrequency::new(1.0, 2.0).ok().map(FrequencyProfile::rational),
            ErmakovSource::Numeric(_) => None,
        }
    }

    /// Upper end of the validity window (infinite for closed forms).
    pub fn t_max(&self) -> f64 {
        match &self.source {
            ErmakovSource::Numeric(n) => n.t_max(),
            _ => f64::INFINITY,
        }
    }

    /// `(ρ, ρ̇, ρ̈)` with `ρ̈` analytic for closed forms and from the
    /// interpolant for numeric solutions.
    pub fn state(&self, t: f64) -> Result<(f64, f64, f64)> {
        match &self.source {
            ErmakovSource::ClosedFormSubcritical { a, b, c } => subcritical_state(*a, *b, *c, t),
            ErmakovSource::ClosedFormCritical => critical_state(t),
            ErmakovSource::Numeric(n) => n.rho_state(t),
        }
    }

    pub fn rho(&self, t: f64) -> Result<f64> {
        Ok(self.state(t)?.0)
    }

    pub fn rho_dot(&self, t: f64) -> Result<f64> {
        Ok(self.state(t)?.1)
    }

    /// Integrated phase for numeric solutions.
    pub(crate) fn numeric_mu(&self, t: f64) -> Option<Result<f64>> {
        match &self.source {
            ErmakovSource::Numeric(n) => Some(n.mu(t)),
            _ => None,
        }
    }
}

/// `ρ̈ + Ω²ρ - 1/ρ³` at time `t`.
pub fn ermakov_residual(solution: &ErmakovSolution, profile: &FrequencyProfile, t: f64) -> Result<f64> {
    let (rho, _, rho_ddot) = solution.state(t)?;
    let w = profile.omega(t)?;
    Ok(rho_ddot + w * w * rho - 1.0 / rho.powi(3))
}

/// `ν = ln ρ` and its first two derivatives. `ν̈` uses `ρ̈ = 1/ρ³ - Ω²ρ`
/// taken from the equation of motion, not from the interpolant.
#[derive(Debug, Clone)]
pub struct LogScale {
    solution: ErmakovSolution,
    profile: FrequencyProfile,
}

/// `(ν, ν̇, ν̈)` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaleValue {
    pub nu: f64,
    pub nu_dot: f64,
    pub nu_ddot: f64,
}

impl LogScale {
    pub fn new(solution: ErmakovSolution, profile: FrequencyProfile) -> Self {
        Self { solution, profile }
    }

    pub fn solution(&self) -> &ErmakovSolution {
        &self.solution
    }

    pub fn profile(&self) -> &FrequencyProfile {
        &self.profile
    }

    pub fn at(&self, t: f64) -> Result<LogScaleValue> {
        let (rho, rho_dot, _) = self.solution.state(t)?;
        let w = self.profile.omega(t)?;
        let rho_ddot = 1.0 / rho.powi(3) - w * w * rho;
        let nu_dot = rho_dot / rho;
        Ok(LogScaleValue { nu: rho.ln(), nu_dot, nu_ddot: rho_ddot / rho - nu_dot * nu_dot })
    }

    pub fn nu(&self, t: f64) -> Result<f64> {
        Ok(self.at(t)?.nu)
    }

    pub fn nu_dot(&self, t: f64) -> Result<f64> {
        Ok(self.at(t)?.nu_dot)
    }

    pub fn nu_ddot(&self, t: f64) -> Result<f64> {
        Ok(self.at(t)?.nu_ddot)
    }
}

pub fn log_scale(solution: &ErmakovSolution, profile: &FrequencyProfile) -> LogScale {
    LogScale::new(solution.clone(), profile.clone())
}
