//! Time-domain stochastic oracle for the analytic output spectrum.
//!
//! [`simulate`] integrates the linear Langevin equations exactly (matrix
//! exponential drift, exact discrete noise covariance) and records the step
//! average of the output quadrature Y₁. [`welch_psd`] estimates its spectrum
//! and [`compare`] scores the estimate against a closed-form spectrum in
//! units of the per-bin standard error. No frequency-domain formula is used
//! on the simulation side.

mod propagator;
mod welch;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::exec;
use crate::grid::SpectrumGrid;
use crate::model::Params;
use crate::readout::output_quadrature_psd;

pub use propagator::{
    NoiseStreams, Propagator, Switches, Vector, AS_IM, AS_RE, AV_IM, AV_RE, P, Q, X,
};
pub use welch::{hann, welch_psd as welch_samples, PsdEstimate, MIN_SEGMENTS};

/// Steps per mechanical period for the default time step.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 64.0;
/// Stability bound: dt ≤ 2π / (40·max rate).
pub const MIN_STEPS_PER_FASTEST_PERIOD: f64 = 40.0;
/// Default recorded span in units of the mechanical decay period 2π/κ_m.
pub const DEFAULT_DECAY_PERIODS: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("unstable simulation config: {0}")]
    UnstableConfig(String),
    #[error("non-finite state at step {0}")]
    NonFiniteState(usize),
    #[error("series has {samples} samples, need at least {needed}")]
    TooShort { samples: usize, needed: usize },
    #[error("band mismatch: {0}")]
    BandMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    /// Recorded span after the transient.
    pub duration: f64,
    pub seed: u64,
    pub welch_segment_length: usize,
    pub welch_overlap: f64,
    pub transient_skip: f64,
}

fn fastest_rate(params: &Params) -> f64 {
    let (o, c) = (params.osc(), params.cavity());
    o.omega_m
        .max(c.detuning.abs())
        .max(c.kappa_r)
        .max(o.kappa_m)
}

/// Largest admissible time step for `params`.
pub fn max_dt(params: &Params) -> f64 {
    2.0 * PI / (MIN_STEPS_PER_FASTEST_PERIOD * fastest_rate(params))
}

impl SimConfig {
    /// dt = 2π/(64ω_m) capped by the stability bound; 200 decay periods
    /// recorded; segments resolve κ_m/10; 20/κ_m of transient discarded.
    pub fn for_params(params: &Params, seed: u64) -> Self {
        let osc = params.osc();
        let dt = (2.0 * PI / (DEFAULT_STEPS_PER_PERIOD * osc.omega_m)).min(max_dt(params));
        let min_length = 20.0 * PI / (osc.kappa_m * dt);
        let welch_segment_length = (min_length.ceil() as usize).next_power_of_two();
        Self {
            dt,
            duration: DEFAULT_DECAY_PERIODS * 2.0 * PI / osc.kappa_m,
            seed,
            welch_segment_length,
            welch_overlap: 0.5,
            transient_skip: 20.0 / osc.kappa_m,
        }
    }

    /// Same settings with the recorded span set to exactly `n` samples.
    pub fn with_samples(mut self, n: usize) -> Self {
        self.duration = n as f64 * self.dt;
        self
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn transient_steps(&self) -> usize {
        (self.transient_skip / self.dt).ceil() as usize
    }

    pub fn validate(&self, params: &Params) -> Result<(), OracleError> {
        let limit = max_dt(params);
        if !(self.dt > 0.0) || self.dt > limit * (1.0 + 1e-12) {
            return Err(OracleError::UnstableConfig(format!(
                "dt = {} exceeds {limit}",
                self.dt
            )));
        }
        if !(0.0..1.0).contains(&self.welch_overlap) {
            return Err(OracleError::UnstableConfig(format!(
                "overlap {} not in [0, 1)",
                self.welch_overlap
            )));
        }
        if !(self.duration > 0.0) || !(self.transient_skip >= 0.0) {
            return Err(OracleError::UnstableConfig(
                "duration and transient_skip must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Whether the span reaches the 200 decay periods needed for usable
    /// statistics.
    pub fn has_usable_statistics(&self, params: &Params) -> bool {
        self.duration >= DEFAULT_DECAY_PERIODS * 2.0 * PI / params.osc().kappa_m * (1.0 - 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub dt: f64,
    /// Time of the first recorded sample (end of the transient).
    pub t0: f64,
    /// Step averages of Y₁.
    pub y1: Vec<f64>,
    pub x: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    /// Total readout amplitude (re, im).
    pub a: Option<Vec<(f64, f64)>>,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        (0..self.y1.len())
            .map(|k| self.t0 + (k + 1) as f64 * self.dt)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    pub switches: Switches,
    pub record_states: bool,
}

pub fn simulate(params: &Params, config: &SimConfig) -> Result<TimeSeries, OracleError> {
    simulate_with(params, config, SimOptions::default())
}

pub fn simulate_with(
    params: &Params,
    config: &SimConfig,
    options: SimOptions,
) -> Result<TimeSeries, OracleError> {
    config.validate(params)?;
    let prop = Propagator::new(params, config.dt, options.switches);
    let mut streams = NoiseStreams::new(config.seed);
    let (skip, n) = (config.transient_steps(), config.samples());
    let mut state = Vector::zeros();
    let mut y1 = Vec::with_capacity(n);
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    let mut amps = Vec::new();
    if options.record_states {
        xs.reserve(n);
        ps.reserve(n);
        amps.reserve(n);
    }
    for step in 0..skip + n {
        state[Q] = 0.0;
        state = prop.step(&state, &mut streams);
        if step < skip {
            continue;
        }
        if !state.iter().all(|v| v.is_finite()) {
            return Err(OracleError::NonFiniteState(step));
        }
        y1.push(state[Q] / config.dt);
        if options.record_states {
            xs.push(state[X]);
            ps.push(state[P]);
            amps.push((state[AV_RE] + state[AS_RE], state[AV_IM] + state[AS_IM]));
        }
    }
    let record = options.record_states;
    Ok(TimeSeries {
        dt: config.dt,
        t0: skip as f64 * config.dt,
        y1,
        x: record.then_some(xs),
        p: record.then_some(ps),
        a: record.then_some(amps),
    })
}

/// Noise-free trajectory of x from an initial displacement, sampled every
/// `dt` for `steps` steps (first sample at t = dt).
pub fn ringdown(params: &Params, x0: f64, dt: f64, steps: usize) -> Vec<f64> {
    let prop = Propagator::new(params, dt, Switches::default());
    let mut state = Vector::zeros();
    state[X] = x0;
    (0..steps)
        .map(|_| {
            state = prop.step_mean(&state);
            state[X]
        })
        .collect()
}

pub fn welch_psd(series: &TimeSeries, config: &SimConfig) -> Result<PsdEstimate, OracleError> {
    welch::welch_psd(
        &series.y1,
        series.dt,
        config.welch_segment_length,
        config.welch_overlap,
    )
}

/// Simulates and estimates one PSD per seed (in parallel) and pools them.
pub fn ensemble_psd(
    params: &Params,
    config: &SimConfig,
    seeds: &[u64],
    options: SimOptions,
) -> Result<PsdEstimate, OracleError> {
    let runs = exec::map(seeds, |&seed| {
        let cfg = SimConfig { seed, ..*config };
        let series = simulate_with(
            params,
            &cfg,
            SimOptions {
                record_states: false,
                ..options
            },
        )?;
        welch_psd(&series, &cfg)
    });
    let runs: Result<Vec<_>, _> = runs.into_iter().collect();
    PsdEstimate::average(&runs?)
}

/// Closed-form PSD of the simulated Y₁ under the given switches.
pub fn analytic_output_psd(omega: f64, params: &Params, switches: Switches) -> f64 {
    match switches {
        Switches {
            coupling: false, ..
        } => 1.0,
        Switches {
            coupling: true,
            bath: true,
        } => output_quadrature_psd(omega, params),
        Switches {
            coupling: true,
            bath: false,
        } => {
            let b = crate::readout::s_yy(omega, params);
            1.0 + crate::readout::output_scale(omega, params) * (b.corr_term + b.s_ba)
        }
    }
}

/// Tabulates `f` on the estimate's bins.
pub fn analytic_on_bins<F>(estimate: &PsdEstimate, f: F) -> SpectrumGrid
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    SpectrumGrid {
        omega: estimate.omega.clone(),
        values: exec::map(&estimate.omega, |&w| f(w)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinResidual {
    pub omega: f64,
    pub estimate: f64,
    pub analytic: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub band: (f64, f64),
    pub segments: usize,
    pub bins: Vec<BinResidual>,
    pub fraction_within_3: f64,
    pub rms_relative_deviation: f64,
    pub max_abs_residual: f64,
}

impl ResidualReport {
    pub fn passes(&self, min_fraction: f64) -> bool {
        self.fraction_within_3 >= min_fraction
    }

    /// Same summary restricted to a sub-band.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<ResidualReport, OracleError> {
        let bins: Vec<BinResidual> = self
            .bins
            .iter()
            .filter(|b| b.omega >= lo && b.omega <= hi)
            .copied()
            .collect();
        summarize((lo, hi), self.segments, bins)
    }
}

fn summarize(
    band: (f64, f64),
    segments: usize,
    bins: Vec<BinResidual>,
) -> Result<ResidualReport, OracleError> {
    if bins.is_empty() {
        return Err(OracleError::BandMismatch(format!(
            "no bins in [{}, {}]",
            band.0, band.1
        )));
    }
    let n = bins.len() as f64;
    let within = bins.iter().filter(|b| b.residual.abs() <= 3.0).count() as f64;
    let rms = (bins
        .iter()
        .map(|b| {
            let r = b.estimate / b.analytic - 1.0;
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let max_abs = bins.iter().map(|b| b.residual.abs()).fold(0.0, f64::max);
    Ok(ResidualReport {
        band,
        segments,
        bins,
        fraction_within_3: within / n,
        rms_relative_deviation: rms,
        max_abs_residual: max_abs,
    })
}

/// Per-bin residual (estimate − analytic)/σ with σ = analytic/√K.
///
/// The analytic spectrum must be sampled on the estimate's bins.
pub fn compare(
    analytic: &SpectrumGrid,
    estimate: &PsdEstimate,
    band: (f64, f64),
) -> Result<ResidualReport, OracleError> {
    if analytic.len() != estimate.len()
        || analytic
            .omega
            .iter()
            .zip(&estimate.omega)
            .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
    {
        return Err(OracleError::BandMismatch(
            "analytic spectrum is not on the estimate's bins".into(),
        ));
    }
    if !(band.0 < band.1) {
        return Err(OracleError::BandMismatch(format!(
            "empty band [{}, {}]",
            band.0, band.1
        )));
    }
    let rel = 1.0 / (estimate.segments as f64).sqrt();
    let bins = (0..estimate.len())
        .filter(|&k| estimate.omega[k] >= band.0 && estimate.omega[k] <= band.1)
        .map(|k| {
            let analytic = analytic.values[k];
            BinResidual {
                omega: estimate.omega[k],
                estimate: estimate.psd[k],
                analytic,
                residual: (estimate.psd[k] - analytic) / (analytic * rel),
            }
        })
        .collect();
    summarize(band, estimate.segments, bins)
}

/// Default comparison band: from 0.05ω_m (and at least two bins above DC,
/// where per-segment mean removal biases the estimate) up to 95% of the
/// Nyquist frequency.
pub fn default_band(params: &Params, config: &SimConfig) -> (f64, f64) {
    let resolution = 2.0 * PI / (config.welch_segment_length as f64 * config.dt);
    (
        (0.05 * params.osc().omega_m).max(2.0 * resolution),
        0.95 * PI / config.dt,
    )
}
