//! Finite-difference stencils on uniform grids.

use serde::{Deserialize, Serialize};

/// Order of the central stencils used for spatial and temporal derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// Three-point central differences, O(h²).
    #[default]
    Second,
    /// Five-point central differences, O(h⁴).
    Fourth,
}

impl Stencil {
    /// Points needed on each side of the evaluation point.
    pub fn reach(self) -> usize {
        match self {
            Stencil::Second => 1,
            Stencil::Fourth => 2,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Stencil::Second => 2,
            Stencil::Fourth => 4,
        }
    }

    /// First derivative at the centre of `f[c - reach ..= c + reach]`.
    pub fn d1<T>(self, f: &[T], c: usize, h: f64) -> T
    where
        T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        match self {
            Stencil::Second => (f[c + 1] - f[c - 1]) * (0.5 / h),
            Stencil::Fourth => ((f[c + 1] - f[c - 1]) * 8.0 - (f[c + 2] - f[c - 2])) * (1.0 / (12.0 * h)),
        }
    }

    /// Second derivative at the centre of `f[c - reach ..= c + reach]`.
    pub fn d2<T>(self, f: &[T], c: usize, h: f64) -> T
    where
        T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        match self {
            Stencil::Second => (f[c + 1] + f[c - 1] - f[c] * 2.0) * (1.0 / (h * h)),
            Stencil::Fourth => {
                ((f[c + 1] + f[c - 1]) * 16.0 - (f[c + 2] + f[c - 2]) - f[c] * 30.0) * (1.0 / (12.0 * h * h))
            }
        }
    }
}

/// Second derivative at every sample: the chosen central stencil where it
/// fits, the 3-point stencil next to the ends and a second-order one-sided
/// formula at the ends themselves.
pub fn second_derivative(f: &[f64], h: f64, stencil: Stencil) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4, "need at least four samples");
    let r = stencil.reach();
    (0..n)
        .map(|i| {
            if i == 0 {
                (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
            } else if i == n - 1 {
                (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h)
            } else if i >= r && i + r < n {
                stencil.d2(f, i, h)
            } else {
                Stencil::Second.d2(f, i, h)
            }
        })
        .collect()
}
