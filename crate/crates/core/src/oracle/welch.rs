//! Welch power spectral density estimator.
//!
//! Single-sided: for a sequence with spacing dt, the estimate satisfies
//! Σ PSD·Δω/2π ≈ variance, so a white sequence of variance σ² has flat
//! PSD 2σ²dt. Hann taper with exact power normalization, per-segment mean
//! removal, standard error PSD/√K for K segments.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::exec;
use crate::grid::SpectrumGrid;

use super::OracleError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdEstimate {
    pub omega: Vec<f64>,
    pub psd: Vec<f64>,
    pub stderr: Vec<f64>,
    pub segments: usize,
}

impl PsdEstimate {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Bin spacing Δω.
    pub fn resolution(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }

    /// Σ PSD·Δω/2π.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.resolution() / (2.0 * PI)
    }

    pub fn to_spectrum(&self) -> SpectrumGrid {
        SpectrumGrid {
            omega: self.omega.clone(),
            values: self.psd.clone(),
        }
    }

    /// Pools estimates over the same bins, weighting by segment count.
    pub fn average(estimates: &[PsdEstimate]) -> Result<Self, OracleError> {
        let first = estimates.first().ok_or(OracleError::TooShort {
            samples: 0,
            needed: 1,
        })?;
        if estimates.iter().any(|e| e.omega != first.omega) {
            return Err(OracleError::BandMismatch(
                "estimates use different bins".into(),
            ));
        }
        let segments: usize = estimates.iter().map(|e| e.segments).sum();
        let psd: Vec<f64> = (0..first.len())
            .map(|k| {
                estimates
                    .iter()
                    .map(|e| e.psd[k] * e.segments as f64)
                    .sum::<f64>()
                    / segments as f64
            })
            .collect();
        let scale = 1.0 / (segments as f64).sqrt();
        Ok(Self {
            omega: first.omega.clone(),
            stderr: psd.iter().map(|p| p * scale).collect(),
            psd,
            segments,
        })
    }
}

/// Periodic Hann window of length n.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

pub const MIN_SEGMENTS: usize = 4;

pub fn welch_psd(
    samples: &[f64],
    dt: f64,
    segment_length: usize,
    overlap: f64,
) -> Result<PsdEstimate, OracleError> {
    if segment_length < 2 || !(0.0..1.0).contains(&overlap) {
        return Err(OracleError::UnstableConfig(format!(
            "segment length {segment_length} / overlap {overlap} invalid"
        )));
    }
    let hop = (((1.0 - overlap) * segment_length as f64).round() as usize).max(1);
    let needed = segment_length + (MIN_SEGMENTS - 1) * hop;
    if samples.len() < needed {
        return Err(OracleError::TooShort {
            samples: samples.len(),
            needed,
        });
    }
    let segments = (samples.len() - segment_length) / hop + 1;
    let window = hann(segment_length);
    let power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_length);
    let bins = segment_length / 2 + 1;

    let periodograms = exec::map_range(segments, |s| {
        let seg = &samples[s * hop..s * hop + segment_length];
        let mean = seg.iter().sum::<f64>() / segment_length as f64;
        let mut buf: Vec<Complex<f64>> = seg
            .iter()
            .zip(&window)
            .map(|(x, w)| Complex::new((x - mean) * w, 0.0))
            .collect();
        fft.process(&mut buf);
        buf[..bins]
            .iter()
            .map(|c| c.norm_sqr())
            .collect::<Vec<f64>>()
    });

    // summed in segment order so the result does not depend on scheduling
    let mut acc = vec![0.0; bins];
    for p in &periodograms {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    let norm = dt / (power * segments as f64);
    let nyquist = segment_length % 2 == 0;
    let psd: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let edge = k == 0 || (nyquist && k == bins - 1);
            a * norm * if edge { 1.0 } else { 2.0 }
        })
        .collect();
    let d_omega = 2.0 * PI / (segment_length as f64 * dt);
    let scale = 1.0 / (segments as f64).sqrt();
    Ok(PsdEstimate {
        omega: (0..bins).map(|k| k as f64 * d_omega).collect(),
        stderr: psd.iter().map(|p| p * scale).collect(),
        psd,
        segments,
    })
}
