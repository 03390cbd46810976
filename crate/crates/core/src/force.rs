//! Force sensitivity of the oscillator used as a classical-force probe.

use serde::Serialize;

use crate::grid::FrequencyGrid;
use crate::model::{OscillatorParams, Params, Units};
use crate::readout::s_yy;
use crate::response::{bath_force_psd, chi_freq, chi_norm_sqr};

/// Total force-referred noise S_F = S_yy / |χ|².
pub fn s_f_total(omega: f64, params: &Params) -> f64 {
    s_yy(omega, params).s_yy_total / chi_norm_sqr(omega, params.osc())
}

/// S_SQL = 2ħ/|χ| = 2ħm √((ω²−ω_m²)² + κ_m²ω²).
pub fn sql(omega: f64, units: &Units, osc: &OscillatorParams) -> f64 {
    let re = omega * omega - osc.omega_m * osc.omega_m;
    2.0 * units.hbar * osc.mass * re.hypot(osc.kappa_m * omega)
}

/// Lower bound on S_F when sensing noise and back-action are uncorrelated:
/// 2ħ/|χ| + (4⟨n⟩+2)ħmκ_mω_m.
pub fn s_f_uncorrelated_bound(omega: f64, units: &Units, osc: &OscillatorParams) -> f64 {
    2.0 * units.hbar / chi_freq(omega, osc).norm() + bath_force_psd(units, osc)
}

/// Zero-point force floor 2ħmκ_mω_m.
pub fn s_f_zp(units: &Units, osc: &OscillatorParams) -> f64 {
    2.0 * units.hbar * osc.mass * osc.kappa_m * osc.omega_m
}

/// Total quantum limit S_SQL + S_zp.
pub fn s_f_qtot(omega: f64, units: &Units, osc: &OscillatorParams) -> f64 {
    sql(omega, units, osc) + s_f_zp(units, osc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqlZpRatio {
    pub exact: f64,
    /// √(1 + ((ω−ω_m)/(κ_m/2))²), valid for κ_m, |ω−ω_m| ≪ ω_m.
    pub approx: f64,
}

pub fn sql_zp_ratio(omega: f64, units: &Units, osc: &OscillatorParams) -> SqlZpRatio {
    let u = (omega - osc.omega_m) / (0.5 * osc.kappa_m);
    SqlZpRatio {
        exact: sql(omega, units, osc) / s_f_zp(units, osc),
        approx: (1.0 + u * u).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceBudget {
    pub omega: f64,
    pub s_f_total: f64,
    pub s_f_sql: f64,
    pub s_f_zp: f64,
    pub s_f_qtot: f64,
    pub ratio_exact: f64,
    pub ratio_approx: f64,
}

pub fn force_budget(omega: f64, params: &Params) -> ForceBudget {
    let (units, osc) = (params.units(), params.osc());
    let ratio = sql_zp_ratio(omega, units, osc);
    ForceBudget {
        omega,
        s_f_total: s_f_total(omega, params),
        s_f_sql: sql(omega, units, osc),
        s_f_zp: s_f_zp(units, osc),
        s_f_qtot: s_f_qtot(omega, units, osc),
        ratio_exact: ratio.exact,
        ratio_approx: ratio.approx,
    }
}

pub fn force_table(grid: &FrequencyGrid, params: &Params) -> Vec<ForceBudget> {
    grid.map(|w| force_budget(w, params))
}
