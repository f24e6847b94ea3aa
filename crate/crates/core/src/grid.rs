//! Uniform spatial grids and sampled wavefunctions.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest admissible number of grid points.
pub const MIN_POINTS: usize = 16;

/// `n` uniformly spaced points covering `[x_min, x_max]`, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Default for SpatialGrid {
    /// `[-8, 8]` with 512 points.
    fn default() -> Self {
        Self { x_min: -8.0, x_max: 8.0, n: 512 }
    }
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::config(format!("grid needs x_max > x_min, got [{x_min}, {x_max}]")));
        }
        if n < MIN_POINTS {
            return Err(Error::config(format!("grid needs at least {MIN_POINTS} points, got {n}")));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    /// Symmetric grid of spacing `h` on `[-half_width, half_width]`; the
    /// half width is rounded up to a whole number of steps.
    pub fn with_spacing(half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && half_width > 0.0) {
            return Err(Error::config("spacing and half width must be positive"));
        }
        let half_steps = (half_width / h - 1e-9).ceil() as usize;
        let hw = half_steps as f64 * h;
        Self::new(-hw, hw, 2 * half_steps + 1)
    }

    /// Half width beyond which a Gaussian of width `max_rho` has `|ψ|²`
    /// below 1e-14 of its peak; never less than 8.
    pub fn half_width_for(max_rho: f64) -> f64 {
        // exp(-x²/ρ²) < 1e-14  ⇔  x > ρ √(14 ln 10) ≈ 5.68 ρ
        let needed = max_rho * (14.0 * std::f64::consts::LN_10).sqrt();
        needed.max(8.0).ceil()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.n.is_power_of_two()
    }

    /// Trapezoidal rule over the grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let inner: f64 = values[1..self.n - 1].iter().sum();
        self.spacing() * (inner + 0.5 * (values[0] + values[self.n - 1]))
    }

    pub fn integrate_complex(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.n);
        let inner: Complex64 = values[1..self.n - 1].iter().sum();
        (inner + 0.5 * (values[0] + values[self.n - 1])) * self.spacing()
    }
}

/// `ψ(x_i, t)` on a grid at a single time.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionSlice {
    pub grid: SpatialGrid,
    pub t: f64,
    pub psi: Vec<Complex64>,
}

impl WavefunctionSlice {
    pub fn new(grid: SpatialGrid, t: f64, psi: Vec<Complex64>) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(Error::config(format!(
                "wavefunction has {} samples but the grid has {}",
                psi.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, t, psi })
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm()).collect()
    }

    pub fn phase(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.arg()).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `∫|ψ|² dx` by the trapezoidal rule.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.integrate(&self.density())
    }
}

/// `ψ(x_i, t_j)` on a shared grid at several times.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid {
    grid: SpatialGrid,
    times: Vec<f64>,
    psi: Vec<Vec<Complex64>>,
}

impl WavefunctionGrid {
    pub fn new(grid: SpatialGrid) -> Self {
        Self { grid, times: Vec::new(), psi: Vec::new() }
    }

    pub fn from_slices(slices: Vec<WavefunctionSlice>) -> Result<Self> {
        let first = slices.first().ok_or_else(|| Error::InsufficientSamples("no slices".into()))?;
        let mut out = Self::new(first.grid);
        for s in slices {
            out.push(s)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, slice: WavefunctionSlice) -> Result<()> {
        if slice.grid != self.grid {
            return Err(Error::config("slice grid differs from the family grid"));
        }
        self.times.push(slice.t);
        self.psi.push(slice.psi);
        Ok(())
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn samples(&self, j: usize) -> &[Complex64] {
        &self.psi[j]
    }

    pub fn slice(&self, j: usize) -> WavefunctionSlice {
        WavefunctionSlice { grid: self.grid, t: self.times[j], psi: self.psi[j].clone() }
    }
}

/// Natural cubic spline through uniformly spaced samples.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(grid: &SpatialGrid, y: &[f64]) -> Result<Self> {
        if y.len() != grid.len() {
            return Err(Error::config("spline samples do not match the grid"));
        }
        let n = y.len();
        let h = grid.spacing();
        // Second derivatives m_i with m_0 = m_{n-1} = 0: tridiagonal (1, 4, 1) system.
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
            let denom = 4.0 - c_prime[i - 1];
            c_prime[i] = 1.0 / denom;
            d_prime[i] = (rhs - d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(Self { x0: grid.x_min(), h, y: y.to_vec(), m })
    }

    /// Spline value; zero outside the sampled interval.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let s = (x - self.x0) / self.h;
        if !(s >= 0.0 && s <= (n - 1) as f64) {
            return 0.0;
        }
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        let w = 1.0 - u;
        let h2 = self.h * self.h;
        w * self.y[i] + u * self.y[i + 1] + h2 / 6.0 * ((w * w * w - w) * self.m[i] + (u * u * u - u) * self.m[i + 1])
    }
}
