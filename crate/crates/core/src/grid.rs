//! Frequency axes, tabulated spectra and the trapezoid rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("grid bounds must satisfy omega_min < omega_max, got [{0}, {1}]")]
    BadBounds(f64, f64),
    #[error("log spacing needs omega_min > 0, got {0}")]
    NonPositiveLogStart(f64),
    #[error("omega axis and values differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("omega axis must be strictly increasing")]
    NotIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// A strictly increasing angular-frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(
        omega_min: f64,
        omega_max: f64,
        n_points: usize,
        spacing: Spacing,
    ) -> Result<Self, GridError> {
        if n_points < MIN_POINTS {
            return Err(GridError::TooFewPoints(n_points));
        }
        if !(omega_min < omega_max) || !omega_min.is_finite() || !omega_max.is_finite() {
            return Err(GridError::BadBounds(omega_min, omega_max));
        }
        let last = (n_points - 1) as f64;
        let omegas = match spacing {
            Spacing::Linear => {
                let step = (omega_max - omega_min) / last;
                (0..n_points).map(|i| omega_min + step * i as f64).collect()
            }
            Spacing::Log => {
                if omega_min <= 0.0 {
                    return Err(GridError::NonPositiveLogStart(omega_min));
                }
                let (a, b) = (omega_min.ln(), omega_max.ln());
                (0..n_points)
                    .map(|i| (a + (b - a) * i as f64 / last).exp())
                    .collect()
            }
        };
        Ok(Self { omegas })
    }

    pub fn linear(omega_min: f64, omega_max: f64, n_points: usize) -> Result<Self, GridError> {
        Self::new(omega_min, omega_max, n_points, Spacing::Linear)
    }

    /// Linear grid centred on `center` with half-width `half_width`.
    pub fn centered(center: f64, half_width: f64, n_points: usize) -> Result<Self, GridError> {
        Self::linear(center - half_width, center + half_width, n_points)
    }

    /// Points ω = center + scale·sinh(u), u uniform, spanning
    /// [omega_min, omega_max]: spacing ≈ scale·du at the centre and grows in
    /// proportion to |ω − center| away from it. Resolves a line of width
    /// ~scale and its far tails with one modest point count.
    pub fn clustered(
        center: f64,
        scale: f64,
        omega_min: f64,
        omega_max: f64,
        n_points: usize,
    ) -> Result<Self, GridError> {
        if n_points < MIN_POINTS {
            return Err(GridError::TooFewPoints(n_points));
        }
        if !(omega_min < omega_max && omega_min <= center && center <= omega_max && scale > 0.0) {
            return Err(GridError::BadBounds(omega_min, omega_max));
        }
        let (a, b) = (
            ((omega_min - center) / scale).asinh(),
            ((omega_max - center) / scale).asinh(),
        );
        let last = (n_points - 1) as f64;
        let mut omegas: Vec<f64> = (0..n_points)
            .map(|i| center + scale * (a + (b - a) * i as f64 / last).sinh())
            .collect();
        omegas[0] = omega_min;
        omegas[n_points - 1] = omega_max;
        Self::from_omegas(omegas)
    }

    /// Wraps an existing axis (e.g. Welch bins).
    pub fn from_omegas(omegas: Vec<f64>) -> Result<Self, GridError> {
        if omegas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GridError::NotIncreasing);
        }
        Ok(Self { omegas })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.omegas[0]
    }

    pub fn max(&self) -> f64 {
        self.omegas[self.omegas.len() - 1]
    }

    /// Evaluates `f` on every point (parallel when enabled).
    pub fn map<U, F>(&self, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(f64) -> U + Sync + Send,
    {
        exec::map(&self.omegas, |&w| f(w))
    }

    pub fn map_sequential<U, F>(&self, f: F) -> Vec<U>
    where
        F: Fn(f64) -> U,
    {
        exec::map_sequential(&self.omegas, |&w| f(w))
    }

    pub fn tabulate<F>(&self, f: F) -> SpectrumGrid
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        SpectrumGrid {
            omega: self.omegas.clone(),
            values: self.map(f),
        }
    }
}

/// A real spectrum sampled on an increasing frequency axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectrumGrid {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self, GridError> {
        if omega.len() != values.len() {
            return Err(GridError::LengthMismatch(omega.len(), values.len()));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GridError::NotIncreasing);
        }
        Ok(Self { omega, values })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn integrate(&self) -> f64 {
        trapezoid(&self.omega, &self.values)
    }
}

/// Composite trapezoid rule on an arbitrary (sorted) abscissa.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert_eq!(
            FrequencyGrid::linear(0.0, 1.0, 8),
            Err(GridError::TooFewPoints(8))
        );
        assert!(matches!(
            FrequencyGrid::linear(1.0, 1.0, 32),
            Err(GridError::BadBounds(..))
        ));
        assert!(matches!(
            FrequencyGrid::new(0.0, 1.0, 32, Spacing::Log),
            Err(GridError::NonPositiveLogStart(_))
        ));
    }

    #[test]
    fn clustered_grid_is_dense_at_centre() {
        let g = FrequencyGrid::clustered(1.0, 1e-4, 0.0, 20.0, 2001).unwrap();
        assert_eq!(g.min(), 0.0);
        assert_eq!(g.max(), 20.0);
        let w = g.omegas();
        let i = w.partition_point(|&x| x < 1.0);
        assert!(w[i] - w[i - 1] < 2e-6);
        assert!(w[2000] - w[1999] > 0.1);
        let s = g.tabulate(|x| 1e-4 / ((x - 1.0).powi(2) + 1e-8));
        let exact = (19.0f64 / 1e-4).atan() + (1.0f64 / 1e-4).atan();
        assert!((s.integrate() / exact - 1.0).abs() < 1e-4);
    }

    #[test]
    fn endpoints_exact() {
        let g = FrequencyGrid::new(0.1, 10.0, 17, Spacing::Log).unwrap();
        assert!((g.min() - 0.1).abs() < 1e-15);
        assert!((g.max() - 10.0).abs() < 1e-13);
        let l = FrequencyGrid::linear(-1.0, 3.0, 17).unwrap();
        assert_eq!(l.omegas()[4], 0.0);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_functions() {
        let g = FrequencyGrid::linear(0.0, 2.0, 33).unwrap();
        let s = g.tabulate(|w| 3.0 * w + 1.0);
        assert!((s.integrate() - 8.0).abs() < 1e-13);
    }
}
