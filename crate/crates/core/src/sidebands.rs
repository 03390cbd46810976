//! Sideband asymmetry and the scattering picture.
//!
//! Detuning convention: Δ = ω_r − ω_laser. Δ = +ω_m puts the cavity on the
//! anti-Stokes sideband (rate ∝ ⟨n⟩), Δ = −ω_m on the Stokes sideband
//! (rate ∝ ⟨n⟩ + 1). The heterodyne spectra equal the photon-emission spectra
//! up to the constant vacuum floor: S_yy = κ_r/(2Ḡ₀²)·(1 + 2Γ).

use std::f64::consts::{FRAC_2_PI, PI};

use serde::Serialize;
use thiserror::Error;

use crate::grid::{trapezoid, SpectrumGrid};
use crate::model::{OscillatorParams, Params};
use crate::readout::{shot_noise_floor, ReadoutError};

pub const DEFAULT_WINDOW_HALFWIDTH: f64 = 50.0;
pub const DEFAULT_FLOOR_BAND: (f64, f64) = (100.0, 200.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SidebandError {
    #[error(transparent)]
    Readout(#[from] ReadoutError),
    #[error("spectrum [{grid_min}, {grid_max}] does not cover the required band [{need_min}, {need_max}]")]
    WindowExceedsGrid {
        need_min: f64,
        need_max: f64,
        grid_min: f64,
        grid_max: f64,
    },
    #[error("floor-subtracted area {area} is below -{tolerance}; floor misestimated")]
    NegativeArea { area: f64, tolerance: f64 },
    #[error("asymmetry undefined: zero denominator (infinite asymmetry)")]
    ZeroDenominator,
    #[error("floor curve has {0} samples, spectrum has {1}")]
    FloorLength(usize, usize),
}

/// Cavity photon density of states (κ_r/2)/((ω−Δ)² + (κ_r/2)²).
pub fn density_of_states(omega: f64, params: &Params) -> f64 {
    let c = params.cavity();
    let half = 0.5 * c.kappa_r;
    let d = omega - c.detuning;
    half / (d * d + half * half)
}

fn phonon_line(omega: f64, osc: &OscillatorParams) -> f64 {
    let d = omega - osc.omega_m;
    osc.kappa_m / (d * d + 0.25 * osc.kappa_m * osc.kappa_m)
}

/// Anti-Stokes emission rate Γ_AS(ω) = ḡ₀² κ_m ⟨n⟩ D(ω) / ((ω−ω_m)² + (κ_m/2)²).
pub fn gamma_anti_stokes(omega: f64, params: &Params) -> f64 {
    let g = params.derived().g0_bar_scaled;
    g * g * params.osc().n_occ * density_of_states(omega, params) * phonon_line(omega, params.osc())
}

/// Stokes emission rate Γ_S(ω) = ḡ₀² κ_m (⟨n⟩+1) D(−ω) / ((ω−ω_m)² + (κ_m/2)²).
pub fn gamma_stokes(omega: f64, params: &Params) -> f64 {
    let g = params.derived().g0_bar_scaled;
    g * g
        * (params.osc().n_occ + 1.0)
        * density_of_states(-omega, params)
        * phonon_line(omega, params.osc())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringRates {
    pub omega: f64,
    pub gamma_as: f64,
    pub gamma_s: f64,
    pub dos: f64,
}

pub fn scattering_rates(omega: f64, params: &Params) -> ScatteringRates {
    ScatteringRates {
        omega,
        gamma_as: gamma_anti_stokes(omega, params),
        gamma_s: gamma_stokes(omega, params),
        dos: density_of_states(omega, params),
    }
}

/// Emission rate of the sideband the cavity selects, with the density of
/// states taken at the line centre: D(±ω_m) = 2/κ_r is constant across a
/// mechanical line much narrower than κ_r.
pub fn narrow_line_rate(omega: f64, params: &Params) -> f64 {
    let osc = params.osc();
    let g = params.derived().g0_bar_scaled;
    let (occupation, dos) = if params.cavity().detuning > 0.0 {
        (osc.n_occ, density_of_states(osc.omega_m, params))
    } else {
        (osc.n_occ + 1.0, density_of_states(-osc.omega_m, params))
    };
    g * g * occupation * dos * phonon_line(omega, osc)
}

/// Heterodyne spectrum from the scattering picture, floor·(1 + 2Γ), for
/// Δ = ±ω_m (anti-Stokes for +, Stokes for −).
pub fn syy_from_scattering(omega: f64, params: &Params) -> Result<f64, SidebandError> {
    if !params.is_sideband_detuned() {
        return Err(ReadoutError::DetuningNotSideband {
            detuning: params.cavity().detuning,
            omega_m: params.osc().omega_m,
        }
        .into());
    }
    Ok(shot_noise_floor(params) * (1.0 + 2.0 * narrow_line_rate(omega, params)))
}

/// How the noise floor under the mechanical line is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum FloorEstimate {
    /// Median of the samples in the floor bands on both sides of ω_m.
    Median,
    /// A known floor curve sampled on the spectrum's own axis.
    Curve(Vec<f64>),
}

/// Window and floor-band geometry, in units of κ_m around ω_m.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaConfig {
    pub window_halfwidth: f64,
    pub floor_band: (f64, f64),
    pub floor: FloorEstimate,
    pub tail_correction: bool,
    /// Areas below `-negative_tolerance` are rejected. `None` picks
    /// 1e-6·|floor|·(window width).
    pub negative_tolerance: Option<f64>,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self {
            window_halfwidth: DEFAULT_WINDOW_HALFWIDTH,
            floor_band: DEFAULT_FLOOR_BAND,
            floor: FloorEstimate::Median,
            tail_correction: true,
            negative_tolerance: None,
        }
    }
}

impl AreaConfig {
    pub fn with_window(window_halfwidth: f64) -> Self {
        Self {
            window_halfwidth,
            ..Self::default()
        }
    }
}

/// Floor-subtracted area of one sideband spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandArea {
    pub area: f64,
    pub floor_estimate: f64,
    pub window: (f64, f64),
}

/// Mass fraction of a Lorentzian of FWHM κ inside ±Wκ of its centre.
pub fn lorentzian_window_fraction(window_halfwidth: f64) -> f64 {
    FRAC_2_PI * (2.0 * window_halfwidth).atan()
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Integrates the spectrum minus its floor over ω_m ± Wκ_m and adds the
/// Lorentzian mass outside the window.
pub fn sideband_area(
    spectrum: &SpectrumGrid,
    osc: &OscillatorParams,
    config: &AreaConfig,
) -> Result<SidebandArea, SidebandError> {
    let (center, kappa) = (osc.omega_m, osc.kappa_m);
    let half = config.window_halfwidth * kappa;
    let window = (center - half, center + half);
    let (grid_min, grid_max) = (spectrum.omega[0], spectrum.omega[spectrum.len() - 1]);

    let (need_min, need_max) = match config.floor {
        FloorEstimate::Median => (
            center - config.floor_band.1 * kappa,
            center + config.floor_band.1 * kappa,
        ),
        FloorEstimate::Curve(_) => window,
    };
    if need_min < grid_min || need_max > grid_max {
        return Err(SidebandError::WindowExceedsGrid {
            need_min,
            need_max,
            grid_min,
            grid_max,
        });
    }

    let inside: Vec<usize> = (0..spectrum.len())
        .filter(|&i| spectrum.omega[i] >= window.0 && spectrum.omega[i] <= window.1)
        .collect();
    let xs: Vec<f64> = inside.iter().map(|&i| spectrum.omega[i]).collect();

    let (floor_estimate, excess): (f64, Vec<f64>) = match &config.floor {
        FloorEstimate::Median => {
            let (inner, outer) = (config.floor_band.0 * kappa, config.floor_band.1 * kappa);
            let band: Vec<f64> = spectrum
                .omega
                .iter()
                .zip(&spectrum.values)
                .filter(|(w, _)| {
                    let d = (**w - center).abs();
                    d >= inner && d <= outer
                })
                .map(|(_, v)| *v)
                .collect();
            let floor = median(band);
            (
                floor,
                inside.iter().map(|&i| spectrum.values[i] - floor).collect(),
            )
        }
        FloorEstimate::Curve(curve) => {
            if curve.len() != spectrum.len() {
                return Err(SidebandError::FloorLength(curve.len(), spectrum.len()));
            }
            let mean = inside.iter().map(|&i| curve[i]).sum::<f64>() / inside.len() as f64;
            (
                mean,
                inside
                    .iter()
                    .map(|&i| spectrum.values[i] - curve[i])
                    .collect(),
            )
        }
    };

    let mut area = trapezoid(&xs, &excess);
    if config.tail_correction {
        // weight fitted to the in-window mass; the rest lies outside ±Wκ_m
        let fraction = lorentzian_window_fraction(config.window_halfwidth);
        area /= fraction;
    }
    let tolerance = config
        .negative_tolerance
        .unwrap_or(1e-6 * floor_estimate.abs() * (window.1 - window.0));
    if area < -tolerance {
        return Err(SidebandError::NegativeArea { area, tolerance });
    }
    Ok(SidebandArea {
        area,
        floor_estimate,
        window,
    })
}

/// Pair of sideband areas and the derived asymmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandAreas {
    pub i_plus: f64,
    pub i_minus: f64,
    pub floor_plus: f64,
    pub floor_minus: f64,
    pub window: (f64, f64),
    /// `None` when I₊ = 0 (infinite asymmetry).
    pub eta: Option<f64>,
}

impl SidebandAreas {
    pub fn from_areas(plus: SidebandArea, minus: SidebandArea) -> Self {
        Self {
            i_plus: plus.area,
            i_minus: minus.area,
            floor_plus: plus.floor_estimate,
            floor_minus: minus.floor_estimate,
            window: plus.window,
            eta: asymmetry_factor(plus.area, minus.area).ok(),
        }
    }

    /// Occupancy estimate 1/η; zero for infinite asymmetry.
    pub fn n_estimate(&self) -> f64 {
        match self.eta {
            Some(eta) if eta != 0.0 => 1.0 / eta,
            Some(_) => f64::INFINITY,
            None => 0.0,
        }
    }
}

/// η = I₋/I₊ − 1.
pub fn asymmetry_factor(i_plus: f64, i_minus: f64) -> Result<f64, SidebandError> {
    if i_plus <= 0.0 {
        return Err(SidebandError::ZeroDenominator);
    }
    Ok(i_minus / i_plus - 1.0)
}

/// η = 1/⟨n⟩.
pub fn eta_from_occupation(n_occ: f64) -> Result<f64, SidebandError> {
    if n_occ <= 0.0 {
        return Err(SidebandError::ZeroDenominator);
    }
    Ok(1.0 / n_occ)
}

/// Analytic Lorentzian area πħ(2⟨n⟩ + 1 ∓ 1)/(mω_m) of the resolved-sideband
/// spectrum for Δ = ±ω_m.
pub fn analytic_sideband_area(params: &Params) -> f64 {
    let osc = params.osc();
    let weight = 2.0 * osc.n_occ + 1.0 - params.cavity().detuning.signum();
    PI * params.hbar() * weight / (osc.mass * osc.omega_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;
    use crate::readout::s_yy_resolved_sideband;

    fn params(n: f64, detuning: f64) -> Params {
        Params::default()
            .adjust(|_, o, c| {
                o.n_occ = n;
                o.kappa_m = 1e-3;
                c.detuning = detuning;
            })
            .unwrap()
    }

    #[test]
    fn dos_shape() {
        let p = Params::default();
        assert!((density_of_states(1.0, &p) - 20.0).abs() < 1e-12);
        assert!((density_of_states(1.05, &p) - 10.0).abs() < 1e-12);
        assert!((density_of_states(0.95, &p) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rates_reference_values() {
        let p = Params::default();
        assert!(gamma_anti_stokes(1.0, &p) == 0.0);
        // 8 ḡ₀² / (κ_m κ_r) with ḡ₀² = 1/2
        let stokes = gamma_stokes(1.0, &p.mirrored());
        assert!((stokes - 4000.0).abs() < 1e-9);
        let hot = p.with_occupancy(1.0).unwrap();
        assert!((gamma_anti_stokes(1.0, &hot) - 4000.0).abs() < 1e-9);
        assert!(
            (gamma_stokes(1.0, &hot.mirrored()) / gamma_anti_stokes(1.0, &hot) - 2.0).abs() < 1e-12
        );
        let doubled = hot.adjust(|_, _, c| c.g0_bar *= 2.0).unwrap();
        assert!(
            (gamma_anti_stokes(1.0, &doubled) / gamma_anti_stokes(1.0, &hot) - 4.0).abs() < 1e-12
        );
    }

    #[test]
    fn stokes_anti_stokes_ratio_identity() {
        let p = params(0.7, 1.0);
        for &w in &[0.9, 0.999, 1.0, 1.02] {
            let lhs = gamma_stokes(w, &p) / gamma_anti_stokes(w, &p);
            let rhs = (0.7 + 1.0) * density_of_states(-w, &p) / (0.7 * density_of_states(w, &p));
            assert!((lhs / rhs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scattering_spectrum_reference() {
        use crate::readout::s_yy_resolved_sideband;
        let p = Params::default();
        assert!((syy_from_scattering(1.0, &p).unwrap() - 0.05).abs() < 1e-15);
        assert!((syy_from_scattering(1.0, &p.mirrored()).unwrap() - 400.05).abs() < 1e-9);
        let narrow = Params::default()
            .adjust(|_, o, c| {
                o.kappa_m = 1e-5;
                o.n_occ = 0.3;
                c.kappa_r = 0.02;
                c.g0_bar = 3e-5;
            })
            .unwrap();
        for p in [narrow, narrow.mirrored()] {
            for i in -100..=100 {
                let w = 1.0 + i as f64 * 1e-6;
                let a = syy_from_scattering(w, &p).unwrap();
                let b = s_yy_resolved_sideband(w, &p).unwrap();
                assert!((a / b - 1.0).abs() < 1e-12, "{w}: {a} vs {b}");
            }
        }
        let off = p.with_detuning(0.5).unwrap();
        assert!(matches!(
            syy_from_scattering(1.0, &off),
            Err(SidebandError::Readout(_))
        ));
    }

    fn resolved_spectrum(p: &Params) -> SpectrumGrid {
        let k = p.osc().kappa_m;
        let grid = FrequencyGrid::centered(1.0, 220.0 * k, 44_001).unwrap();
        grid.tabulate(|w| s_yy_resolved_sideband(w, p).unwrap())
    }

    #[test]
    fn areas_match_analytic_lorentzian() {
        let plus = params(1.0, 1.0);
        let minus = params(1.0, -1.0);
        let exact = AreaConfig {
            floor: FloorEstimate::Curve(vec![shot_noise_floor(&plus); 44_001]),
            ..AreaConfig::default()
        };
        let a = sideband_area(&resolved_spectrum(&plus), plus.osc(), &exact).unwrap();
        let b = sideband_area(&resolved_spectrum(&minus), minus.osc(), &exact).unwrap();
        assert!((a.area / (2.0 * PI) - 1.0).abs() < 1e-4, "{}", a.area);
        assert!((b.area / (4.0 * PI) - 1.0).abs() < 1e-4, "{}", b.area);
        let pair = SidebandAreas::from_areas(a, b);
        assert!((pair.eta.unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn empty_sideband_has_zero_area() {
        let p = params(0.0, 1.0);
        let a = sideband_area(&resolved_spectrum(&p), p.osc(), &AreaConfig::default()).unwrap();
        assert!(a.area.abs() < 1e-9);
        assert!((a.floor_estimate - 0.05).abs() < 1e-15);
    }

    #[test]
    fn window_must_fit() {
        let p = params(1.0, 1.0);
        let narrow = FrequencyGrid::centered(1.0, 150.0 * 1e-3, 1001).unwrap();
        let s = narrow.tabulate(|w| s_yy_resolved_sideband(w, &p).unwrap());
        assert!(matches!(
            sideband_area(&s, p.osc(), &AreaConfig::default()),
            Err(SidebandError::WindowExceedsGrid { .. })
        ));
    }

    #[test]
    fn overestimated_floor_is_flagged() {
        let p = params(0.0, 1.0);
        let s = resolved_spectrum(&p);
        let high = AreaConfig {
            floor: FloorEstimate::Curve(vec![0.06; s.len()]),
            ..AreaConfig::default()
        };
        assert!(matches!(
            sideband_area(&s, p.osc(), &high),
            Err(SidebandError::NegativeArea { .. })
        ));
    }

    #[test]
    fn asymmetry_definitions() {
        assert!((eta_from_occupation(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((asymmetry_factor(2.0 * PI, 4.0 * PI).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            asymmetry_factor(0.0, 1.0),
            Err(SidebandError::ZeroDenominator)
        );
        assert_eq!(
            eta_from_occupation(0.0),
            Err(SidebandError::ZeroDenominator)
        );
        assert!(eta_from_occupation(1e12).unwrap() < 1e-11);
    }

    #[test]
    fn analytic_areas() {
        assert!((analytic_sideband_area(&params(1.0, 1.0)) - 2.0 * PI).abs() < 1e-14);
        assert!((analytic_sideband_area(&params(1.0, -1.0)) - 4.0 * PI).abs() < 1e-14);
        assert_eq!(analytic_sideband_area(&params(0.0, 1.0)), 0.0);
    }
}
