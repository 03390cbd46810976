//! One function per subcommand. Each returns the table to emit plus any
//! tolerance failures, which the caller turns into exit code 2.

use std::path::PathBuf;

use clap::ValueEnum;
use optomech::force::{force_budget, sql_zp_ratio};
use optomech::oracle::{
    analytic_on_bins, analytic_output_psd, compare, default_band, ensemble_psd, OracleError,
    SimOptions, Switches,
};
use optomech::readout::{
    commutator_kernels, correlation_identity, heisenberg_product, s_yy, s_yy_resolved_sideband,
    ReadoutError,
};
use optomech::response::integrated_zero_point_variance;
use optomech::sidebands::{
    sideband_area, syy_from_scattering, AreaConfig, FloorEstimate, SidebandAreas, SidebandError,
    DEFAULT_FLOOR_BAND,
};
use optomech::{FrequencyGrid, Params, Spacing, SpectrumGrid, Warning};

use crate::config::{RunConfig, SpectraKind};
use crate::output::{Cell, Output};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetuningSign {
    Both,
    #[value(name = "+", alias = "plus")]
    Plus,
    #[value(name = "-", alias = "minus")]
    Minus,
}

impl DetuningSign {
    fn signs(self) -> &'static [f64] {
        match self {
            DetuningSign::Both => &[1.0, -1.0],
            DetuningSign::Plus => &[1.0],
            DetuningSign::Minus => &[-1.0],
        }
    }
}

/// Settings shared by every subcommand after flag overrides.
pub struct Context {
    pub config: RunConfig,
    pub sign: DetuningSign,
    pub seed: Option<u64>,
}

pub struct Outcome {
    pub output: Output,
    pub failures: Vec<String>,
}

impl Outcome {
    fn ok(output: Output) -> Self {
        Self {
            output,
            failures: Vec::new(),
        }
    }
}

fn validation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

fn sideband_error(e: SidebandError) -> CliError {
    match e {
        SidebandError::NegativeArea { .. } | SidebandError::ZeroDenominator => {
            CliError::Failed(e.to_string())
        }
        other => CliError::Validation(other.to_string()),
    }
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::NonFiniteState(_) => CliError::Failed(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

pub fn warn(params: &Params) {
    for w in params.warnings() {
        match w {
            Warning::StrainedWeakProbe { ratio } => eprintln!(
                "warning: back-action peak is {ratio:.3} of the bath force spectrum; \
                 weak-probe approximation strained"
            ),
        }
    }
}

/// Copies of `params` with Δ = ±|Δ| for each requested sign.
fn detunings(params: &Params, sign: DetuningSign) -> Result<Vec<Params>, CliError> {
    let magnitude = params.cavity().detuning.abs();
    sign.signs()
        .iter()
        .map(|s| params.with_detuning(s * magnitude).map_err(validation))
        .collect()
}

pub fn spectrum(ctx: &Context) -> Result<Outcome, CliError> {
    let params = ctx.config.params()?;
    warn(&params);
    let w_m = params.osc().omega_m;
    let grid = ctx
        .config
        .grid_or(|| FrequencyGrid::linear(0.5 * w_m, 1.5 * w_m, 2001))?;
    let mut out = Output::new(&[
        "detuning",
        "omega",
        "s_zz",
        "corr_term",
        "s_ba",
        "s_thermal_zp",
        "s_yy_total",
    ]);
    for p in detunings(&params, ctx.sign)? {
        for b in grid.map(|w| s_yy(w, &p)) {
            out.push(vec![
                p.cavity().detuning.into(),
                b.omega.into(),
                b.s_zz.into(),
                b.corr_term.into(),
                b.s_ba.into(),
                b.s_thermal_zp.into(),
                b.s_yy_total.into(),
            ]);
        }
    }
    Ok(Outcome::ok(out))
}

pub fn asymmetry(ctx: &Context) -> Result<Outcome, CliError> {
    let base = ctx.config.params()?;
    let block = &ctx.config.asymmetry;
    let osc = *base.osc();
    let grid = ctx.config.grid_or(|| {
        let reach = 1.1 * DEFAULT_FLOOR_BAND.1.max(block.window);
        FrequencyGrid::centered(osc.omega_m, reach * osc.kappa_m, 44_001)
    })?;
    let magnitude = base.cavity().detuning.abs();
    let tabulate = |p: &Params| -> Result<SpectrumGrid, CliError> {
        match block.spectra {
            SpectraKind::Resolved => {
                let values: Result<Vec<f64>, ReadoutError> = grid
                    .map(|w| s_yy_resolved_sideband(w, p))
                    .into_iter()
                    .collect();
                Ok(SpectrumGrid {
                    omega: grid.omegas().to_vec(),
                    values: values.map_err(validation)?,
                })
            }
            SpectraKind::Full => Ok(grid.tabulate(|w| s_yy(w, p).s_yy_total)),
        }
    };
    let area = |p: &Params| {
        let spectrum = tabulate(p)?;
        let floor = match block.spectra {
            SpectraKind::Resolved => FloorEstimate::Median,
            SpectraKind::Full => FloorEstimate::Curve(grid.map(|w| s_yy(w, p).s_zz)),
        };
        let config = AreaConfig {
            floor,
            ..AreaConfig::with_window(block.window)
        };
        sideband_area(&spectrum, p.osc(), &config).map_err(sideband_error)
    };

    let mut out = Output::new(&["n_occ", "i_plus", "i_minus", "eta", "n_est"]);
    for &n in &block.occupancies {
        let plus = base
            .adjust(|_, o, c| {
                o.n_occ = n;
                c.detuning = magnitude;
            })
            .map_err(validation)?;
        warn(&plus);
        let pair = SidebandAreas::from_areas(area(&plus)?, area(&plus.mirrored())?);
        out.push(vec![
            n.into(),
            pair.i_plus.into(),
            pair.i_minus.into(),
            pair.eta.unwrap_or(f64::INFINITY).into(),
            pair.n_estimate().into(),
        ]);
    }
    Ok(Outcome::ok(out))
}

pub fn force(ctx: &Context) -> Result<Outcome, CliError> {
    let params = ctx.config.params()?;
    warn(&params);
    let w_m = params.osc().omega_m;
    let grid = ctx
        .config
        .grid_or(|| FrequencyGrid::new(0.1 * w_m, 10.0 * w_m, 2001, Spacing::Log))?;
    let kappas = ctx
        .config
        .force
        .kappa_m_values
        .clone()
        .unwrap_or_else(|| vec![params.osc().kappa_m]);
    let mut out = Output::new(&[
        "detuning",
        "kappa_m",
        "omega",
        "s_f_total",
        "s_f_sql",
        "s_f_zp",
        "s_f_qtot",
        "ratio_exact",
        "ratio_approx",
    ]);
    for p in detunings(&params, ctx.sign)? {
        for &k in &kappas {
            let pk = p
                .adjust(|_, o, _| o.kappa_m = k)
                .map_err(|e| CliError::Validation(format!("force.kappa_m_values: {e}")))?;
            for b in grid.map(|w| force_budget(w, &pk)) {
                out.push(vec![
                    pk.cavity().detuning.into(),
                    k.into(),
                    b.omega.into(),
                    b.s_f_total.into(),
                    b.s_f_sql.into(),
                    b.s_f_zp.into(),
                    b.s_f_qtot.into(),
                    b.ratio_exact.into(),
                    b.ratio_approx.into(),
                ]);
            }
        }
    }
    Ok(Outcome::ok(out))
}

pub const SCATTERING_TOLERANCE: f64 = 1e-12;

pub fn scattering(ctx: &Context) -> Result<Outcome, CliError> {
    let params = ctx.config.params()?;
    warn(&params);
    let osc = *params.osc();
    let grid = ctx
        .config
        .grid_or(|| FrequencyGrid::centered(osc.omega_m, 10.0 * osc.kappa_m, 2001))?;
    let mut out = Output::new(&[
        "detuning",
        "omega",
        "gamma_as",
        "gamma_s",
        "dos",
        "s_yy_scattering",
        "s_yy_resolved",
        "residual",
    ]);
    let mut worst: f64 = 0.0;
    for p in detunings(&params, ctx.sign)? {
        let rows = grid.map(|w| -> Result<Vec<f64>, CliError> {
            let rates = optomech::sidebands::scattering_rates(w, &p);
            let scattering = syy_from_scattering(w, &p).map_err(sideband_error)?;
            let resolved = s_yy_resolved_sideband(w, &p).map_err(validation)?;
            Ok(vec![
                p.cavity().detuning,
                w,
                rates.gamma_as,
                rates.gamma_s,
                rates.dos,
                scattering,
                resolved,
                (scattering / resolved - 1.0).abs(),
            ])
        });
        for row in rows {
            let row = row?;
            worst = worst.max(row[7]);
            out.push(row.into_iter().map(Cell::Num).collect());
        }
    }
    let mut outcome = Outcome::ok(out);
    if worst > SCATTERING_TOLERANCE {
        outcome.failures.push(format!(
            "scattering and resolved-sideband spectra differ by {worst:e} (tolerance {SCATTERING_TOLERANCE:e})"
        ));
    }
    Ok(outcome)
}

/// Welch segment length for the uncoupled control when none is configured:
/// the flat floor needs many averages, not resolution.
const CONTROL_SEGMENT_LENGTH: usize = 256;

pub fn oracle(
    ctx: &Context,
    psd_output: Option<PathBuf>,
) -> Result<(Outcome, Option<Output>), CliError> {
    let (params, coupled) = ctx.config.oracle_params()?;
    if coupled {
        warn(&params);
    }
    let block = &ctx.config.oracle;
    let switches = Switches {
        coupling: coupled,
        bath: true,
    };
    let mut sim = ctx.config.sim_config(&params, ctx.seed);
    if !coupled && ctx.config.sim.welch_segment_length.is_none() {
        sim.welch_segment_length = CONTROL_SEGMENT_LENGTH;
    }
    sim.validate(&params).map_err(oracle_error)?;
    if !sim.has_usable_statistics(&params) {
        eprintln!("warning: simulated span is shorter than 200 mechanical decay periods");
    }
    let runs = ctx.config.sim.ensemble.unwrap_or(1).max(1) as u64;
    let seeds: Vec<u64> = (0..runs).map(|i| sim.seed.wrapping_add(i)).collect();
    let options = SimOptions {
        switches,
        record_states: false,
    };

    let mut report = Output::new(&[
        "detuning",
        "samples",
        "segments",
        "bins",
        "band_lo",
        "band_hi",
        "fraction_within_3",
        "rms_relative_deviation",
        "max_abs_residual",
        "pass",
    ]);
    let mut dump = Output::new(&["detuning", "omega", "psd", "stderr", "analytic"]);
    let mut failures = Vec::new();
    for p in detunings(&params, ctx.sign)? {
        let est = ensemble_psd(&p, &sim, &seeds, options).map_err(oracle_error)?;
        let analytic = analytic_on_bins(&est, |w| analytic_output_psd(w, &p, switches));
        let band = match block.band {
            Some([lo, hi]) => (lo, hi),
            None => default_band(&p, &sim),
        };
        let r = compare(&analytic, &est, band).map_err(oracle_error)?;
        let delta = p.cavity().detuning;
        let pass = r.fraction_within_3 >= block.min_fraction
            && (coupled || r.rms_relative_deviation <= block.max_rms);
        if !pass {
            failures.push(format!(
                "Δ = {delta}: {:.2}% of bins within ±3σ, RMS deviation {:.2}%",
                100.0 * r.fraction_within_3,
                100.0 * r.rms_relative_deviation
            ));
        }
        report.push(vec![
            delta.into(),
            ((sim.samples() as u64 * runs) as f64).into(),
            (r.segments as f64).into(),
            (r.bins.len() as f64).into(),
            r.band.0.into(),
            r.band.1.into(),
            r.fraction_within_3.into(),
            r.rms_relative_deviation.into(),
            r.max_abs_residual.into(),
            pass.into(),
        ]);
        for i in 0..est.len() {
            dump.push(vec![
                delta.into(),
                est.omega[i].into(),
                est.psd[i].into(),
                est.stderr[i].into(),
                analytic.values[i].into(),
            ]);
        }
    }
    let wants_dump = psd_output.is_some() || block.psd_output.is_some();
    Ok((
        Outcome {
            output: report,
            failures,
        },
        wants_dump.then_some(dump),
    ))
}

/// Integration axis for the variance and correlation checks: clustered on
/// ω_m at the narrowest linewidth, out to 20ω_m.
fn integration_grid(params: &Params) -> Result<FrequencyGrid, CliError> {
    let osc = params.osc();
    let scale = osc.kappa_m.min(params.cavity().kappa_r);
    FrequencyGrid::clustered(osc.omega_m, scale, 0.0, 20.0 * osc.omega_m, 20_001)
        .map_err(validation)
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

pub fn check(ctx: &Context, flip_correlation_sign: bool) -> Result<Outcome, CliError> {
    let params = ctx.config.params()?;
    warn(&params);
    let (units, osc) = (*params.units(), *params.osc());
    let grid = ctx.config.grid_or(|| {
        FrequencyGrid::new(1e-2 * osc.omega_m, 1e2 * osc.omega_m, 2001, Spacing::Log)
    })?;
    let hbar = units.hbar;
    let signs = [params, params.mirrored()];

    let worst = |f: &(dyn Fn(f64, &Params) -> f64 + Sync)| -> f64 {
        signs
            .iter()
            .flat_map(|p| grid.map(|w| f(w, p)))
            .fold(0.0, f64::max)
    };
    let mut checks = vec![
        Check {
            name: "heisenberg_equality",
            value: worst(&|w, p| (heisenberg_product(w, p) / (hbar * hbar) - 1.0).abs()),
            tolerance: 1e-10,
        },
        Check {
            name: "commutator_k_zz",
            value: worst(&|w, p| commutator_kernels(w, p).k_zz.norm() / hbar),
            tolerance: 1e-12,
        },
        Check {
            name: "commutator_k_zf",
            value: worst(&|w, p| (commutator_kernels(w, p).k_zf.norm() / hbar - 1.0).abs()),
            tolerance: 1e-10,
        },
    ];

    let ground = params.with_occupancy(0.0).map_err(validation)?;
    let fine = integration_grid(&ground)?;
    let variance =
        integrated_zero_point_variance(&units, ground.osc(), &fine).map_err(validation)?;
    checks.push(Check {
        name: "zero_point_variance",
        value: (variance / (hbar / (2.0 * osc.mass * osc.omega_m)) - 1.0).abs(),
        tolerance: 1e-3,
    });

    for (name, sign) in [
        ("correlation_identity_plus", 1.0),
        ("correlation_identity_minus", -1.0),
    ] {
        let p = ground
            .with_detuning(sign * osc.omega_m)
            .map_err(validation)?;
        let source = if flip_correlation_sign {
            p.mirrored()
        } else {
            p
        };
        let id = correlation_identity(&p, &source, &fine).map_err(validation)?;
        checks.push(Check {
            name,
            value: id.relative_residual.abs(),
            tolerance: 3.0 * params.cavity().kappa_r / osc.omega_m,
        });
    }

    checks.push(Check {
        name: "sql_ratio_on_resonance",
        value: (sql_zp_ratio(osc.omega_m, &units, &osc).exact - 1.0).abs(),
        tolerance: 1e-12,
    });
    let near = FrequencyGrid::centered(osc.omega_m, 5.0 * osc.kappa_m, 201).map_err(validation)?;
    checks.push(Check {
        name: "sql_ratio_approximation",
        value: near
            .map(|w| {
                let r = sql_zp_ratio(w, &units, &osc);
                (r.approx / r.exact - 1.0).abs()
            })
            .into_iter()
            .fold(0.0, f64::max),
        // the approximant drops terms of order |ω−ω_m|/ω_m ≤ 5κ_m/ω_m
        tolerance: 0.01 + 2.5 * osc.kappa_m / osc.omega_m,
    });

    let mut out = Output::new(&["check", "value", "tolerance", "pass"]);
    let mut failures = Vec::new();
    for c in checks {
        let pass = c.value <= c.tolerance;
        if !pass {
            failures.push(format!(
                "{}: {:e} exceeds {:e}",
                c.name, c.value, c.tolerance
            ));
        }
        out.push(vec![
            c.name.into(),
            c.value.into(),
            c.tolerance.into(),
            pass.into(),
        ]);
    }
    Ok(Outcome {
        output: out,
        failures,
    })
}
