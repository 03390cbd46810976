//! Linear quantum-measurement model of a detuned-cavity readout of a
//! near-ground-state mechanical oscillator.
//!
//! - [`model`]: parameter records, validation, derived quantities.
//! - [`response`]: mechanical susceptibility and quantum-bath spectra.
//! - [`readout`]: sensing noise, back-action, their correlation, and the
//!   output spectrum.
//! - [`sidebands`]: scattering rates, sideband areas, asymmetry.
//! - [`force`]: force-sensitivity budget and quantum limits.
//! - [`oracle`]: exact time-domain simulation plus Welch estimator.
//! - [`table`]: labelled numeric tables with deterministic CSV output.
//!
//! Spectra are single-sided and symmetrized; variances are ∫₀^∞ S dω/2π.

mod dd;
pub mod exec;
pub mod force;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod readout;
pub mod response;
pub mod sidebands;
pub mod table;

pub use grid::{FrequencyGrid, GridError, Spacing, SpectrumGrid};
pub use model::{CavityParams, OscillatorParams, ParamError, Params, Units, Warning};
