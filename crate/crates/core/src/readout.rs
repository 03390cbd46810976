//! The detuned-cavity position meter.
//!
//! The normalized output is `y(ω) = z(ω) + χ(ω)[F_BA(ω) + F_q(ω)]`, with the
//! sensing noise `z` and back-action force `F_BA` linear in the input
//! amplitude/phase quadratures `v₁, v₂`. Each quadrature carries a
//! single-sided symmetrized PSD of exactly 1 (vacuum), so the shot-noise
//! floor in the resolved-sideband limit is κ_r/(2Ḡ₀²).
//!
//! Commutator convention: `[v₁(ω), v₂†(ω′)] = i·2πδ(ω−ω′)`. With it the
//! sensing-noise/back-action kernel is `k_zF = −iħ` at every frequency,
//! the frequency-domain image of a commutator supported only at t < 0.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::dd::Dd;
use crate::grid::{trapezoid, FrequencyGrid, GridError};
use crate::model::{OscillatorParams, Params};
use crate::response::{bath_force_psd, chi_freq, chi_norm_sqr};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ReadoutError {
    #[error("resolved-sideband form needs |detuning| = omega_m, got detuning {detuning} with omega_m {omega_m}")]
    DetuningNotSideband { detuning: f64, omega_m: f64 },
}

/// Coefficients of `v₁, v₂` in `z` and `F_BA`, and of `x` in `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureTransfer {
    pub omega: f64,
    pub c_z1: f64,
    pub c_z2: f64,
    pub c_f1: Complex64,
    pub c_f2: Complex64,
    pub x_gain: f64,
}

impl QuadratureTransfer {
    /// S_zz = |c_z1|² + |c_z2|².
    pub fn s_zz(&self) -> f64 {
        self.c_z1 * self.c_z1 + self.c_z2 * self.c_z2
    }

    /// S_zF = c_z1 c_F1* + c_z2 c_F2*.
    pub fn s_zf(&self) -> Complex64 {
        self.c_z1 * self.c_f1.conj() + self.c_z2 * self.c_f2.conj()
    }

    pub fn s_ff(&self) -> f64 {
        self.c_f1.norm_sqr() + self.c_f2.norm_sqr()
    }
}

/// Cavity denominator `(ω − Δ + iκ_r/2)(ω + Δ + iκ_r/2)`.
pub fn cavity_denominator(omega: f64, params: &Params) -> Complex64 {
    let c = params.cavity();
    let half = 0.5 * c.kappa_r;
    Complex64::new(omega - c.detuning, half) * Complex64::new(omega + c.detuning, half)
}

/// `(Δ² − κ_r²/4 − ω²)² + κ_r²Δ²`, equal to |cavity_denominator|².
fn cavity_weight(omega: f64, params: &Params) -> f64 {
    let c = params.cavity();
    let d2 = c.detuning * c.detuning;
    let a = d2 - 0.25 * c.kappa_r * c.kappa_r - omega * omega;
    a * a + c.kappa_r * c.kappa_r * d2
}

pub fn transfer(omega: f64, params: &Params) -> QuadratureTransfer {
    let c = params.cavity();
    let (delta, kappa, g) = (c.detuning, c.kappa_r, c.g0_bar);
    let z_norm = (2.0 * kappa).sqrt() * g * delta;
    let c_z1 = (delta * delta - 0.25 * kappa * kappa - omega * omega) / z_norm;
    let c_z2 = -kappa * delta / z_norm;
    let f_pref = 2.0 * params.hbar() * g * (0.5 * kappa).sqrt() / cavity_denominator(omega, params);
    let c_f1 = f_pref * Complex64::new(0.5 * kappa, -omega);
    let c_f2 = f_pref * delta;
    QuadratureTransfer {
        omega,
        c_z1,
        c_z2,
        c_f1,
        c_f2,
        x_gain: 1.0,
    }
}

/// Sensing-noise PSD S_zz(ω).
pub fn s_zz(omega: f64, params: &Params) -> f64 {
    let c = params.cavity();
    cavity_weight(omega, params) / (2.0 * c.kappa_r * c.g0_bar * c.g0_bar * c.detuning * c.detuning)
}

/// Cross spectrum S_zF(ω) = ħ(κ_r/2 − iω)/Δ.
pub fn s_zf(omega: f64, params: &Params) -> Complex64 {
    let c = params.cavity();
    params.hbar() * Complex64::new(0.5 * c.kappa_r, -omega) / c.detuning
}

/// Back-action force PSD S_FF^BA(ω).
pub fn s_ff_ba(omega: f64, params: &Params) -> f64 {
    let c = params.cavity();
    let hbar = params.hbar();
    let num = 2.0
        * hbar
        * hbar
        * c.g0_bar
        * c.g0_bar
        * c.kappa_r
        * (0.25 * c.kappa_r * c.kappa_r + omega * omega + c.detuning * c.detuning);
    num / cavity_weight(omega, params)
}

/// S_zz, S_FF^BA and |S_zF|² in double-double precision.
fn spectra_dd(omega: f64, params: &Params) -> (Dd, Dd, Dd) {
    let c = params.cavity();
    let (w, d, k, g, h) = (
        Dd::from(omega),
        Dd::from(c.detuning),
        Dd::from(c.kappa_r),
        Dd::from(c.g0_bar),
        Dd::from(params.hbar()),
    );
    let two = Dd::from(2.0);
    let quarter_k2 = k * k / Dd::from(4.0);
    let a = d * d - quarter_k2 - w * w;
    let weight = a * a + k * k * d * d;
    let s_zz = weight / (two * k * g * g * d * d);
    let s_ba = two * h * h * g * g * k * (quarter_k2 + w * w + d * d) / weight;
    let s_zf_sqr = h * h * (quarter_k2 + w * w) / (d * d);
    (s_zz, s_ba, s_zf_sqr)
}

/// `S_zz·S_FF^BA − |S_zF|²`; equals ħ² for this lossless single-carrier meter.
///
/// For |Δ| ≪ ω both products are ~(ω/Δ)²ħ², so the difference is formed in
/// double-double arithmetic to keep it accurate relative to ħ².
pub fn heisenberg_product(omega: f64, params: &Params) -> f64 {
    let (s_zz, s_ba, s_zf_sqr) = spectra_dd(omega, params);
    (s_zz * s_ba - s_zf_sqr).to_f64()
}

/// Output-spectrum decomposition at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub omega: f64,
    pub s_zz: f64,
    /// 2 Re[χ* S_zF]; the only detuning-sign-odd term.
    pub corr_term: f64,
    pub s_ba: f64,
    pub s_thermal_zp: f64,
    pub s_yy_total: f64,
}

/// Full output spectrum S_yy with its components.
pub fn s_yy(omega: f64, params: &Params) -> NoiseBudget {
    let chi = chi_freq(omega, params.osc());
    let chi2 = chi_norm_sqr(omega, params.osc());
    let s_zz = s_zz(omega, params);
    let corr_term = 2.0 * (chi.conj() * s_zf(omega, params)).re;
    let s_ba = chi2 * s_ff_ba(omega, params);
    let s_thermal_zp = chi2 * bath_force_psd(params.units(), params.osc());
    NoiseBudget {
        omega,
        s_zz,
        corr_term,
        s_ba,
        s_thermal_zp,
        s_yy_total: s_zz + corr_term + s_ba + s_thermal_zp,
    }
}

/// Shot-noise floor κ_r/(2Ḡ₀²) of the resolved-sideband spectra.
pub fn shot_noise_floor(params: &Params) -> f64 {
    let c = params.cavity();
    c.kappa_r / (2.0 * c.g0_bar * c.g0_bar)
}

fn require_sideband(params: &Params) -> Result<(), ReadoutError> {
    if params.is_sideband_detuned() {
        Ok(())
    } else {
        Err(ReadoutError::DetuningNotSideband {
            detuning: params.cavity().detuning,
            omega_m: params.osc().omega_m,
        })
    }
}

/// Floor-plus-Lorentzian approximation of S_yy near ω_m for Δ = ±ω_m,
/// neglecting back-action and O(κ_r/ω_m) corrections.
pub fn s_yy_resolved_sideband(omega: f64, params: &Params) -> Result<f64, ReadoutError> {
    require_sideband(params)?;
    let osc = params.osc();
    // (2⟨n⟩ + 1 ∓ 1): upper sign for Δ = +ω_m
    let weight = 2.0 * osc.n_occ + 1.0 - params.cavity().detuning.signum();
    let d = omega - osc.omega_m;
    let lorentz = params.hbar() * osc.kappa_m * weight
        / (2.0 * osc.mass * osc.omega_m * (d * d + 0.25 * osc.kappa_m * osc.kappa_m));
    Ok(shot_noise_floor(params) + lorentz)
}

/// Integrals over ω ≥ 0 of the correlation term and of the zero-point
/// displacement spectrum (⟨n⟩ = 0 bath).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationIdentity {
    /// ∫ 2Re[χ*S_zF] dω.
    pub correlation: f64,
    /// ∫ |χ|² S_FF^q|ₙ₌₀ dω.
    pub zero_point: f64,
    /// (correlation ± zero_point)/zero_point, with the upper sign for Δ > 0.
    pub relative_residual: f64,
}

/// Trapezoid over `omegas` (with ω = 0 prepended) plus a 1/ω^p tail above
/// the last point.
fn integrate_with_tail<F: Fn(f64) -> f64 + Sync + Send>(
    grid: &FrequencyGrid,
    tail_power: f64,
    f: F,
) -> f64 {
    let mut xs = Vec::with_capacity(grid.len() + 1);
    if grid.min() > 0.0 {
        xs.push(0.0);
    }
    xs.extend_from_slice(grid.omegas());
    let ys = crate::exec::map(&xs, |&w| f(w));
    let hi = grid.max();
    trapezoid(&xs, &ys) + ys[ys.len() - 1] * hi / (tail_power - 1.0)
}

/// Checks that the correlation term carries ∓ the zero-point mass for
/// Δ = ±ω_m. `correlation_params` lets a caller evaluate S_zF with a
/// different (e.g. deliberately mis-signed) bundle.
pub fn correlation_identity(
    params: &Params,
    correlation_params: &Params,
    grid: &FrequencyGrid,
) -> Result<CorrelationIdentity, GridError> {
    if grid.min() < 0.0 {
        return Err(GridError::BadBounds(grid.min(), grid.max()));
    }
    let osc = params.osc();
    let ground = OscillatorParams { n_occ: 0.0, ..*osc };
    let bath = bath_force_psd(params.units(), &ground);
    let correlation = integrate_with_tail(grid, 2.0, |w| {
        2.0 * (chi_freq(w, correlation_params.osc()).conj() * s_zf(w, correlation_params)).re
    });
    let zero_point = integrate_with_tail(grid, 4.0, |w| chi_norm_sqr(w, &ground) * bath);
    let sign = params.cavity().detuning.signum();
    Ok(CorrelationIdentity {
        correlation,
        zero_point,
        relative_residual: (correlation + sign * zero_point) / zero_point,
    })
}

/// Commutator kernels of the O(1) noise operators at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorKernels {
    pub omega: f64,
    pub k_zz: Complex64,
    pub k_zf: Complex64,
}

pub fn commutator_kernels(omega: f64, params: &Params) -> CommutatorKernels {
    commutator_kernels_of(&transfer(omega, params))
}

pub fn commutator_kernels_of(t: &QuadratureTransfer) -> CommutatorKernels {
    let i = Complex64::i();
    let (z1, z2) = (Complex64::from(t.c_z1), Complex64::from(t.c_z2));
    CommutatorKernels {
        omega: t.omega,
        k_zz: i * (z1 * z2.conj() - z2 * z1.conj()),
        k_zf: i * (z1 * t.c_f2.conj() - z2 * t.c_f1.conj()),
    }
}

/// Scale from S_yy to the raw output-quadrature PSD S_Y1Y1:
/// `2κ_r Ḡ₀² Δ² / |(ω−Δ+iκ_r/2)(ω+Δ+iκ_r/2)|²`.
pub fn output_scale(omega: f64, params: &Params) -> f64 {
    let c = params.cavity();
    2.0 * c.kappa_r * c.g0_bar * c.g0_bar * c.detuning * c.detuning / cavity_weight(omega, params)
}

/// Raw output amplitude-quadrature PSD S_Y1Y1(ω); the vacuum floor is 1.
pub fn output_quadrature_psd(omega: f64, params: &Params) -> f64 {
    let b = s_yy(omega, params);
    let scale = output_scale(omega, params);
    // S_zz·scale ≡ 1; kept as a separate term so the floor is exact
    1.0 + scale * (b.corr_term + b.s_ba + b.s_thermal_zp)
}
