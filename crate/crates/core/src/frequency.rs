//! Time-dependent frequency profiles `Ω(t)`.
//!
//! The rational family `Ω(t) = 1/(a + bt)` has closed-form Ermakov solutions
//! on two branches, `0 ≤ b < 2` and `b = 2`; [`classify_rational`] decides
//! which one applies. Any other profile (constant, tabulated, user closure)
//! goes through the numeric Ermakov solver.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Absolute tolerance on `|b - 2|` for the critical branch.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Regime of the rational family, decided by the slope `b` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `0 ≤ b < 2`: `ρ = C √(a + bt)` with `C = (1 - b²/4)^{-1/4}`.
    Subcritical,
    /// `b = 2`: `ρ = √(1+2t) √(1 + ¼ ln²(1+2t))`.
    Critical,
    /// `b > 2`: no real closed form.
    Unsupported,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Unsupported => "unsupported",
        };
        f.write_str(s)
    }
}

/// Classifies the rational-family slope. Total for finite `b ≥ 0`; negative
/// or non-finite slopes are reported as [`Regime::Unsupported`].
pub fn classify_rational(b: f64) -> Regime {
    if !b.is_finite() || b < 0.0 {
        Regime::Unsupported
    } else if (b - 2.0).abs() <= CRITICAL_TOLERANCE {
        Regime::Critical
    } else if b < 2.0 {
        Regime::Subcritical
    } else {
        Regime::Unsupported
    }
}

/// `Ω(t) = 1/(a + bt)` with `a > 0`, `b ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalFrequency {
    a: f64,
    b: f64,
}

impl RationalFrequency {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!("rational frequency needs a > 0, got a = {a}")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::domain(format!("rational frequency needs b ≥ 0, got b = {b}")));
        }
        Ok(Self { a, b })
    }

    /// The member of the family with `ρ(0) = 1`: `a = √(1 - b²/4)` on the
    /// subcritical branch and `a = 1` on the critical one.
    pub fn normalized(b: f64) -> Result<Self> {
        match classify_rational(b) {
            Regime::Subcritical => Self::new((1.0 - 0.25 * b * b).sqrt(), b),
            Regime::Critical => Self::new(1.0, 2.0),
            Regime::Unsupported => {
                Err(Error::domain(format!("slope b = {b} has no real Ermakov closed form (need 0 ≤ b ≤ 2)")))
            }
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn regime(&self) -> Regime {
        classify_rational(self.b)
    }

    pub fn omega(&self, t: f64) -> Result<f64> {
        let denom = self.a + self.b * t;
        if denom <= 0.0 || !denom.is_finite() {
            return Err(Error::domain(format!("a + bt = {denom} ≤ 0 at t = {t} (a = {}, b = {})", self.a, self.b)));
        }
        Ok(1.0 / denom)
    }
}

/// Piecewise-linear `Ω(t)` from `(t, Ω)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    times: Vec<f64>,
    omegas: Vec<f64>,
}

impl FrequencyTable {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::config("frequency table needs at least two samples"));
        }
        let (times, omegas): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("frequency table times must be strictly increasing"));
        }
        if let Some(w) = omegas.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::config(format!("frequency table has invalid Ω = {w}")));
        }
        Ok(Self { times, omegas })
    }

    /// Reads a two-column CSV `t,omega`. A header row is skipped if its first
    /// field does not parse as a number.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader =
            csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_path(path)?;
        let mut samples = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::config(format!("row {row}: expected two columns")));
            }
            let t = record[0].parse::<f64>();
            let w = record[1].parse::<f64>();
            match (t, w) {
                (Ok(t), Ok(w)) => samples.push((t, w)),
                _ if row == 0 => continue,
                _ => return Err(Error::config(format!("row {row}: unparsable number"))),
            }
        }
        Self::new(samples)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn omega(&self, t: f64) -> Result<f64> {
        let (t0, t1) = self.span();
        if !(t >= t0 && t <= t1) {
            return Err(Error::domain(format!("t = {t} outside table span [{t0}, {t1}]")));
        }
        let i = self.segment_index(t);
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let (wa, wb) = (self.omegas[i], self.omegas[i + 1]);
        Ok(wa + (wb - wa) * (t - ta) / (tb - ta))
    }

    fn segment_index(&self, t: f64) -> usize {
        match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k if k >= self.times.len() => self.times.len() - 2,
            k => k - 1,
        }
    }

    fn slope(&self, t: f64) -> f64 {
        let i = self.segment_index(t);
        (self.omegas[i + 1] - self.omegas[i]) / (self.times[i + 1] - self.times[i])
    }
}

type OmegaFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum ProfileKind {
    Constant(f64),
    Rational(RationalFrequency),
    Table(FrequencyTable),
    Custom(Arc<OmegaFn>),
}

/// A frequency profile `Ω(t) ≥ 0`, optionally restricted to a time window.
/// Cheap to clone and safe to share between threads.
#[derive(Clone)]
pub struct FrequencyProfile {
    kind: ProfileKind,
    window: Option<(f64, f64)>,
}

impl fmt::Debug for FrequencyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("FrequencyProfile");
        match &self.kind {
            ProfileKind::Constant(w) => d.field("constant", w),
            ProfileKind::Rational(r) => d.field("rational", r),
            ProfileKind::Table(t) => d.field("table_span", &t.span()),
            ProfileKind::Custom(_) => d.field("custom", &"<fn>"),
        };
        d.field("window", &self.window).finish()
    }
}

impl FrequencyProfile {
    pub fn constant(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::domain(format!("constant frequency must be finite and ≥ 0, got {omega}")));
        }
        Ok(Self { kind: ProfileKind::Constant(omega), window: None })
    }

    pub fn rational(freq: RationalFrequency) -> Self {
        Self { kind: ProfileKind::Rational(freq), window: None }
    }

    pub fn table(table: FrequencyTable) -> Self {
        let span = table.span();
        Self { kind: ProfileKind::Table(table), window: Some(span) }
    }

    /// Wraps an arbitrary evaluator. Non-finite or negative outputs surface
    /// as domain errors at evaluation time.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: ProfileKind::Custom(Arc::new(f)), window: None }
    }

    /// Restricts evaluation to `[t_start, t_end]`.
    pub fn with_window(mut self, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::config(format!("empty window [{t_start}, {t_end}]")));
        }
        self.window = Some((t_start, t_end));
        Ok(self)
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        self.window
    }

    pub fn as_rational(&self) -> Option<&RationalFrequency> {
        match &self.kind {
            ProfileKind::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn omega(&self, t: f64) -> Result<f64> {
        if let Some((t0, t1)) = self.window {
            // A little slack so that step endpoints computed as t0 + k·h still evaluate.
            let slack = 1e-12 * (1.0 + t1.abs().max(t0.abs()));
            if t < t0 - slack || t > t1 + slack {
                return Err(Error::domain(format!("t = {t} outside window [{t0}, {t1}]")));
            }
        }
        let w = match &self.kind {
            ProfileKind::Constant(w) => *w,
            ProfileKind::Rational(r) => r.omega(t)?,
            ProfileKind::Table(tab) => {
                let (t0, t1) = tab.span();
                tab.omega(t.clamp(t0, t1))?
            }
            ProfileKind::Custom(f) => f(t),
        };
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::domain(format!("Ω({t}) = {w} is not a finite non-negative frequency")));
        }
        Ok(w)
    }

    /// `dΩ/dt`. Analytic for constant and rational profiles, the segment
    /// slope for tables, and a central difference for closures.
    pub fn omega_dot(&self, t: f64) -> Result<f64> {
        match &self.kind {
            ProfileKind::Constant(_) => {
                self.omega(t)?;
                Ok(0.0)
            }
            ProfileKind::Rational(r) => {
                let w = r.omega(t)?;
                self.omega(t)?;
                Ok(-r.b() * w * w)
            }
            ProfileKind::Table(tab) => {
                self.omega(t)?;
                let (t0, t1) = tab.span();
                Ok(tab.slope(t.clamp(t0, t1)))
            }
            ProfileKind::Custom(_) => {
                let h = 1e-5 * (1.0 + t.abs());
                let (lo, hi) = match self.window {
                    Some((t0, t1)) => ((t - h).max(t0), (t + h).min(t1)),
                    None => (t - h, t + h),
                };
                Ok((self.omega(hi)? - self.omega(lo)?) / (hi - lo))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rational_values() {
        let crit = RationalFrequency::new(1.0, 2.0).unwrap();
        assert_eq!(crit.omega(0.0).unwrap(), 1.0);
        assert_eq!(crit.omega(0.5).unwrap(), 0.5);
        let sub = RationalFrequency::new(3f64.sqrt() / 2.0, 1.0).unwrap();
        assert_relative_eq!(sub.omega(0.0).unwrap(), 2.0 / 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn normalized_members() {
        let sub = RationalFrequency::normalized(1.0).unwrap();
        assert_relative_eq!(sub.a(), 3f64.sqrt() / 2.0, max_relative = 1e-15);
        let crit = RationalFrequency::normalized(2.0).unwrap();
        assert_eq!(crit.a(), 1.0);
        assert!(RationalFrequency::normalized(3.0).is_err());
        let stat = RationalFrequency::normalized(0.0).unwrap();
        assert_eq!(stat.omega(17.0).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(RationalFrequency::new(0.0, 1.0).is_err());
        assert!(RationalFrequency::new(1.0, -1.0).is_err());
        let r = RationalFrequency::new(1.0, 2.0).unwrap();
        assert!(matches!(r.omega(-0.5), Err(Error::Domain(_))));
        assert!(r.omega(-0.6).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(classify_rational(1.0), Regime::Subcritical);
        assert_eq!(classify_rational(0.0), Regime::Subcritical);
        assert_eq!(classify_rational(2.0), Regime::Critical);
        assert_eq!(classify_rational(2.0 + 5e-13), Regime::Critical);
        assert_eq!(classify_rational(2.0 - 1e-9), Regime::Subcritical);
        assert_eq!(classify_rational(3.0), Regime::Unsupported);
        assert_eq!(classify_rational(f64::NAN), Regime::Unsupported);
    }

    #[test]
    fn table_interpolates_linearly() {
        let tab = FrequencyTable::new(vec![(0.0, 1.0), (1.0, 3.0), (3.0, 3.0)]).unwrap();
        assert_eq!(tab.omega(0.5).unwrap(), 2.0);
        assert_eq!(tab.omega(1.0).unwrap(), 3.0);
        assert_eq!(tab.omega(3.0).unwrap(), 3.0);
        assert!(tab.omega(3.5).is_err());
        assert!(FrequencyTable::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }

    #[test]
    fn table_from_csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("omega.csv");
        std::fs::write(&path, "t,omega\n0,1\n2,0.5\n").unwrap();
        let profile = FrequencyProfile::table(FrequencyTable::from_csv(&path).unwrap());
        assert_eq!(profile.omega(1.0).unwrap(), 0.75);
        assert!(profile.omega(2.5).is_err());
    }

    #[test]
    fn omega_dot_variants() {
        let r = FrequencyProfile::rational(RationalFrequency::new(1.0, 2.0).unwrap());
        assert_eq!(r.omega_dot(0.0).unwrap(), -2.0);
        let f = FrequencyProfile::from_fn(|t| (1.0 + t).recip());
        assert!((f.omega_dot(1.0).unwrap() + 0.25).abs() < 1e-9);
        let tab = FrequencyProfile::table(FrequencyTable::new(vec![(0.0, 1.0), (2.0, 0.0)]).unwrap());
        assert_eq!(tab.omega_dot(1.0).unwrap(), -0.5);
        assert_eq!(FrequencyProfile::constant(3.0).unwrap().omega_dot(9.0).unwrap(), 0.0);
    }

    #[test]
    fn window_and_custom() {
        let p = FrequencyProfile::from_fn(|t| 1.0 + t).with_window(0.0, 1.0).unwrap();
        assert_eq!(p.omega(0.5).unwrap(), 1.5);
        assert!(p.omega(1.5).is_err());
        let bad = FrequencyProfile::from_fn(|_| f64::NAN);
        assert!(bad.omega(0.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn rational_strictly_decreasing(b in 1e-3f64..2.0, t1 in 0.0f64..50.0, dt in 1e-3f64..50.0) {
            let r = RationalFrequency::normalized(b).unwrap();
            proptest::prop_assert!(r.omega(t1 + dt).unwrap() < r.omega(t1).unwrap());
        }

        #[test]
        fn subcritical_has_real_scale(b in 0.0f64..2.0) {
            let regime = classify_rational(b);
            proptest::prop_assert_eq!(regime, classify_rational(b));
            if regime == Regime::Subcritical {
                let c = (1.0 - 0.25 * b * b).powf(-0.25);
                proptest::prop_assert!(c.is_finite() && c >= 1.0);
            }
        }
    }
}
