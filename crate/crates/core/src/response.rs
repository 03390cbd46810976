//! Mechanical susceptibility, the effective quantum-bath force spectrum and
//! the driven displacement spectrum.
//!
//! Fourier convention: `x(t) = ∫ x(ω) e^{-iωt} dω/2π`, so χ(ω) is the
//! transform of the causal kernel Θ(t)χ(t) and Im χ(ω) > 0 for ω > 0.
//! Spectra are single-sided: variances are ∫₀^∞ S dω/2π.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{trapezoid, FrequencyGrid};
use crate::model::{OscillatorParams, Units};

/// Fraction of the analytic Lorentzian mass a quadrature grid must cover.
pub const MIN_COVERED_MASS: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResponseError {
    #[error("grid covers only {covered:.6} of the Lorentzian mass (need {MIN_COVERED_MASS})")]
    GridTooNarrow { covered: f64 },
    #[error("grid must lie in omega >= 0, starts at {0}")]
    NegativeFrequency(f64),
    #[error("zero-point variance needs n_occ = 0, got {0}")]
    ThermalOccupancy(f64),
}

/// χ(ω) = −1 / (m (ω² − ω_m² + iκ_m ω)).
pub fn chi_freq(omega: f64, osc: &OscillatorParams) -> Complex64 {
    let denom = Complex64::new(
        omega * omega - osc.omega_m * osc.omega_m,
        osc.kappa_m * omega,
    );
    -1.0 / (osc.mass * denom)
}

/// |χ(ω)|², without forming the complex value.
pub fn chi_norm_sqr(omega: f64, osc: &OscillatorParams) -> f64 {
    let re = omega * omega - osc.omega_m * osc.omega_m;
    let im = osc.kappa_m * omega;
    1.0 / (osc.mass * osc.mass * (re * re + im * im))
}

/// Time-domain kernel e^{−κ_m|t|/2} sin(ω_m t) / (m ω_m).
pub fn chi_time(t: f64, osc: &OscillatorParams) -> f64 {
    (-0.5 * osc.kappa_m * t.abs()).exp() * (osc.omega_m * t).sin() / (osc.mass * osc.omega_m)
}

/// White bath force spectrum S_FF^q = (4⟨n⟩ + 2) ħ m κ_m ω_m.
pub fn bath_force_psd(units: &Units, osc: &OscillatorParams) -> f64 {
    (4.0 * osc.n_occ + 2.0) * units.hbar * osc.mass * osc.kappa_m * osc.omega_m
}

/// S_xx^q(ω) = |χ(ω)|² S_FF^q.
pub fn displacement_psd(omega: f64, units: &Units, osc: &OscillatorParams) -> f64 {
    chi_norm_sqr(omega, osc) * bath_force_psd(units, osc)
}

/// 2ħ Im χ(ω); the ground-state value of S_xx^q at ω = ω_m.
pub fn heisenberg_bound(omega: f64, units: &Units, osc: &OscillatorParams) -> f64 {
    2.0 * units.hbar * chi_freq(omega, osc).im
}

/// Near-resonance Lorentzian approximation `weight / ((ω−ω_m)² + (κ_m/2)²)`
/// helpers used for tail corrections.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Lorentzian {
    pub center: f64,
    pub half_width: f64,
}

impl Lorentzian {
    pub(crate) fn mechanical(osc: &OscillatorParams) -> Self {
        Self {
            center: osc.omega_m,
            half_width: 0.5 * osc.kappa_m,
        }
    }

    fn angle(&self, omega: f64) -> f64 {
        ((omega - self.center) / self.half_width).atan()
    }

    /// ∫_a^b dω / ((ω−c)² + γ²).
    pub(crate) fn mass_between(&self, a: f64, b: f64) -> f64 {
        (self.angle(b) - self.angle(a)) / self.half_width
    }

    /// ∫_0^∞ dω / ((ω−c)² + γ²).
    pub(crate) fn mass_positive(&self) -> f64 {
        (FRAC_PI_2 - self.angle(0.0)) / self.half_width
    }

    pub(crate) fn shape(&self, omega: f64) -> f64 {
        let d = omega - self.center;
        1.0 / (d * d + self.half_width * self.half_width)
    }
}

/// ∫₀^∞ S_xx^q dω/2π at ⟨n⟩ = 0 by trapezoid over `grid` plus Lorentzian
/// tails matched to the integrand at each grid edge.
pub fn integrated_zero_point_variance(
    units: &Units,
    osc: &OscillatorParams,
    grid: &FrequencyGrid,
) -> Result<f64, ResponseError> {
    if osc.n_occ != 0.0 {
        return Err(ResponseError::ThermalOccupancy(osc.n_occ));
    }
    let (lo, hi) = (grid.min(), grid.max());
    if lo < 0.0 {
        return Err(ResponseError::NegativeFrequency(lo));
    }
    let line = Lorentzian::mechanical(osc);
    let covered = line.mass_between(lo, hi) / line.mass_positive();
    if covered < MIN_COVERED_MASS {
        return Err(ResponseError::GridTooNarrow { covered });
    }
    let values = grid.map(|w| displacement_psd(w, units, osc));
    let core = trapezoid(grid.omegas(), &values);
    let lower_weight = values[0] / line.shape(lo);
    let upper_weight = values[values.len() - 1] / line.shape(hi);
    let tails = lower_weight * line.mass_between(0.0, lo)
        + upper_weight * (FRAC_PI_2 - line.angle(hi)) / line.half_width;
    Ok((core + tails) / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn osc(kappa_m: f64) -> OscillatorParams {
        OscillatorParams {
            mass: 1.0,
            omega_m: 1.0,
            kappa_m,
            n_occ: 0.0,
        }
    }

    #[test]
    fn chi_reference_points() {
        let o = osc(0.01);
        let c0 = chi_freq(0.0, &o);
        assert!((c0.re - 1.0).abs() < 1e-15 && c0.im == 0.0);
        let c1 = chi_freq(1.0, &o);
        assert!(c1.re.abs() < 1e-12 && (c1.im - 100.0).abs() < 1e-10);
        // extended-precision reference
        let c2 = chi_freq(2.0, &o);
        assert!((c2.re + 0.333_318_519_176_925_47).abs() < 1e-15);
        assert!((c2.im - 0.002_222_123_461_179_503).abs() < 1e-16);
    }

    #[test]
    fn chi_time_reference_points() {
        let o = osc(0.01);
        assert_eq!(chi_time(0.0, &o), 0.0);
        assert!((chi_time(FRAC_PI_2, &o) - 0.992_176_780_292_561_5).abs() < 1e-15);
        let undamped = osc(1e-300);
        assert!((chi_time(FRAC_PI_2, &undamped) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bath_spectrum_values() {
        let u = Units::default();
        assert!((bath_force_psd(&u, &osc(0.01)) - 0.02).abs() < 1e-16);
        let thermal = OscillatorParams {
            n_occ: 1.0,
            ..osc(0.01)
        };
        assert!((bath_force_psd(&u, &thermal) - 0.06).abs() < 1e-16);
        assert!(
            (bath_force_psd(&u, &osc(0.02)) - 2.0 * bath_force_psd(&u, &osc(0.01))).abs() < 1e-16
        );
    }

    #[test]
    fn displacement_psd_on_resonance() {
        let u = Units::default();
        let o = osc(0.01);
        assert!((displacement_psd(1.0, &u, &o) - 200.0).abs() < 1e-9);
        assert!((heisenberg_bound(1.0, &u, &o) - 200.0).abs() < 1e-9);
        let hot = OscillatorParams { n_occ: 7.0, ..o };
        assert!(
            (displacement_psd(1.0, &u, &hot) / displacement_psd(1.0, &u, &o) - 15.0).abs() < 1e-12
        );
    }

    #[test]
    fn variance_rejects_narrow_grid_and_thermal_state() {
        let u = Units::default();
        let o = osc(1e-3);
        let narrow = FrequencyGrid::centered(1.0, 0.1, 1001).unwrap();
        assert!(matches!(
            integrated_zero_point_variance(&u, &o, &narrow),
            Err(ResponseError::GridTooNarrow { .. })
        ));
        let grid = FrequencyGrid::linear(0.0, 2.0, 40_001).unwrap();
        let hot = OscillatorParams { n_occ: 1.0, ..o };
        assert!(matches!(
            integrated_zero_point_variance(&u, &hot, &grid),
            Err(ResponseError::ThermalOccupancy(_))
        ));
    }

    #[test]
    fn variance_scales_inversely_with_mass() {
        let u = Units::default();
        let grid = FrequencyGrid::linear(0.5, 1.5, 100_001).unwrap();
        let light = integrated_zero_point_variance(&u, &osc(1e-3), &grid).unwrap();
        let heavy = OscillatorParams {
            mass: 4.0,
            ..osc(1e-3)
        };
        let heavy = integrated_zero_point_variance(&u, &heavy, &grid).unwrap();
        assert!((light / heavy - 4.0).abs() < 1e-9);
        assert!((light - 0.5).abs() < 5e-3);
    }
}
