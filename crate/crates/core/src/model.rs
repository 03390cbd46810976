//! Parameter records for the effective mechanical oscillator and the readout
//! mode, plus validation and the derived quantities shared by every other
//! module.
//!
//! All formulas are dimensionally closed, so any consistent unit system
//! works. The defaults use ħ = m = ω_m = 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for the optional `Ḡ₀ = ā·ω_r/L_c` consistency check.
const COUPLING_CONSISTENCY_RTOL: f64 = 1e-12;

/// Back-action peak above this fraction of the bath force spectrum flags the
/// weak-probe approximation as strained.
pub const WEAK_PROBE_WARNING_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{name}` must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("detuning must be nonzero")]
    ZeroDetuning,
    #[error("oscillator is not underdamped: kappa_m = {kappa_m} >= omega_m = {omega_m}")]
    OverdampedOscillator { kappa_m: f64, omega_m: f64 },
    #[error("coupling g0_bar = {given} disagrees with amplitude * omega_r / L_c = {implied}")]
    InconsistentCoupling { given: f64, implied: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}

/// Effective mechanical oscillator: the cooling beam and thermal bath are
/// folded into `kappa_m` and `n_occ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub mass: f64,
    /// Resonance (rad/s).
    pub omega_m: f64,
    /// Energy decay rate (rad/s).
    pub kappa_m: f64,
    /// Thermal occupancy ⟨n⟩.
    pub n_occ: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega_m: 1.0,
            kappa_m: 0.01,
            n_occ: 0.0,
        }
    }
}

impl OscillatorParams {
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.kappa_m
    }
}

/// Readout mode. Only `kappa_r`, `detuning` and `g0_bar` enter the
/// formulas; the remaining fields are descriptive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Readout-mode bandwidth (rad/s).
    pub kappa_r: f64,
    /// Δ = ω_r − ω_laser (rad/s). Positive selects the anti-Stokes sideband.
    pub detuning: f64,
    /// Ḡ₀ = ā·G₀, rad/(s·length).
    pub g0_bar: f64,
    #[serde(default)]
    pub omega_r: Option<f64>,
    #[serde(default)]
    pub cavity_length: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            kappa_r: 0.1,
            detuning: 1.0,
            g0_bar: 1.0,
            omega_r: None,
            cavity_length: None,
            amplitude: None,
        }
    }
}

impl CavityParams {
    /// Single-photon coupling G₀ = ω_r / L_c, when both are supplied.
    pub fn single_photon_coupling(&self) -> Option<f64> {
        Some(self.omega_r? / self.cavity_length?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    /// Zero-point amplitude sqrt(ħ / (2 m ω_m)).
    pub x_zpf: f64,
    /// ḡ₀ = Ḡ₀·x_zpf (rad/s).
    pub g0_bar_scaled: f64,
    pub quality_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// Peak back-action force spectrum relative to the bath force spectrum.
    StrainedWeakProbe { ratio: f64 },
}

/// A validated parameter bundle. Only obtainable through [`Params::new`],
/// so every consumer can rely on the invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    units: Units,
    osc: OscillatorParams,
    cavity: CavityParams,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            units: Units::default(),
            osc: OscillatorParams::default(),
            cavity: CavityParams::default(),
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NonPositiveParameter { name, value })
    }
}

/// Checks every invariant of the three records and returns the bundle.
pub fn validate(
    units: Units,
    osc: OscillatorParams,
    cavity: CavityParams,
) -> Result<Params, ParamError> {
    positive("hbar", units.hbar)?;
    positive("mass", osc.mass)?;
    positive("omega_m", osc.omega_m)?;
    positive("kappa_m", osc.kappa_m)?;
    if !(osc.n_occ.is_finite() && osc.n_occ >= 0.0) {
        return Err(ParamError::NonPositiveParameter {
            name: "n_occ",
            value: osc.n_occ,
        });
    }
    positive("kappa_r", cavity.kappa_r)?;
    positive("g0_bar", cavity.g0_bar)?;
    if !cavity.detuning.is_finite() {
        return Err(ParamError::NonPositiveParameter {
            name: "detuning",
            value: cavity.detuning,
        });
    }
    if cavity.detuning == 0.0 {
        return Err(ParamError::ZeroDetuning);
    }
    if osc.kappa_m >= osc.omega_m {
        return Err(ParamError::OverdampedOscillator {
            kappa_m: osc.kappa_m,
            omega_m: osc.omega_m,
        });
    }
    if let (Some(omega_r), Some(length), Some(amplitude)) =
        (cavity.omega_r, cavity.cavity_length, cavity.amplitude)
    {
        positive("omega_r", omega_r)?;
        positive("cavity_length", length)?;
        positive("amplitude", amplitude)?;
        let implied = amplitude * omega_r / length;
        if ((cavity.g0_bar - implied) / implied).abs() > COUPLING_CONSISTENCY_RTOL {
            return Err(ParamError::InconsistentCoupling {
                given: cavity.g0_bar,
                implied,
            });
        }
    }
    Ok(Params { units, osc, cavity })
}

/// Derived quantities of a validated bundle.
pub fn derive(params: &Params) -> DerivedQuantities {
    let Params { units, osc, cavity } = params;
    let x_zpf = (units.hbar / (2.0 * osc.mass * osc.omega_m)).sqrt();
    DerivedQuantities {
        x_zpf,
        g0_bar_scaled: cavity.g0_bar * x_zpf,
        quality_factor: osc.quality_factor(),
    }
}

impl Params {
    pub fn new(
        units: Units,
        osc: OscillatorParams,
        cavity: CavityParams,
    ) -> Result<Self, ParamError> {
        validate(units, osc, cavity)
    }

    pub fn units(&self) -> &Units {
        &self.units
    }

    pub fn osc(&self) -> &OscillatorParams {
        &self.osc
    }

    pub fn cavity(&self) -> &CavityParams {
        &self.cavity
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    pub fn derived(&self) -> DerivedQuantities {
        derive(self)
    }

    /// Copy with edited records, re-validated.
    pub fn adjust(
        &self,
        edit: impl FnOnce(&mut Units, &mut OscillatorParams, &mut CavityParams),
    ) -> Result<Self, ParamError> {
        let (mut units, mut osc, mut cavity) = (self.units, self.osc, self.cavity);
        edit(&mut units, &mut osc, &mut cavity);
        validate(units, osc, cavity)
    }

    pub fn with_detuning(&self, detuning: f64) -> Result<Self, ParamError> {
        self.adjust(|_, _, c| c.detuning = detuning)
    }

    pub fn with_occupancy(&self, n_occ: f64) -> Result<Self, ParamError> {
        self.adjust(|_, o, _| o.n_occ = n_occ)
    }

    /// Same parameters with the sign of Δ flipped.
    pub fn mirrored(&self) -> Self {
        let mut flipped = *self;
        flipped.cavity.detuning = -self.cavity.detuning;
        flipped
    }

    /// Ratio of the back-action force spectrum at its peak (ω = |Δ|) to the
    /// bath force spectrum.
    pub fn back_action_ratio(&self) -> f64 {
        let peak = crate::readout::s_ff_ba(self.cavity.detuning.abs(), self);
        peak / crate::response::bath_force_psd(&self.units, &self.osc)
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let ratio = self.back_action_ratio();
        if ratio > WEAK_PROBE_WARNING_RATIO {
            vec![Warning::StrainedWeakProbe { ratio }]
        } else {
            Vec::new()
        }
    }

    /// True when |Δ| equals ω_m to within a relative 1e-9.
    pub fn is_sideband_detuned(&self) -> bool {
        ((self.cavity.detuning.abs() - self.osc.omega_m) / self.osc.omega_m).abs() <= 1e-9
    }
}
