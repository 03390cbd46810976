//! TOML run configuration: flat parameter keys plus optional `[grid]`,
//! `[sim]`, `[asymmetry]`, `[force]` and `[oracle]` blocks.

use std::path::{Path, PathBuf};

use optomech::model::{CavityParams, OscillatorParams, Units};
use optomech::oracle::SimConfig;
use optomech::{FrequencyGrid, ParamError, Params, Spacing};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub omega_m: Option<f64>,
    pub kappa_m: Option<f64>,
    pub n_occ: Option<f64>,
    pub kappa_r: Option<f64>,
    pub detuning: Option<f64>,
    pub g0_bar_coupling: Option<f64>,
    pub omega_r: Option<f64>,
    pub cavity_length: Option<f64>,
    pub amplitude: Option<f64>,
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub sim: SimBlock,
    #[serde(default)]
    pub asymmetry: AsymmetryBlock,
    #[serde(default)]
    pub force: ForceBlock,
    #[serde(default)]
    pub oracle: OracleBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    /// Overrides `duration` with an exact sample count.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub welch_segment_length: Option<usize>,
    pub welch_overlap: Option<f64>,
    pub transient_skip: Option<f64>,
    /// Independent runs averaged (seeds seed, seed+1, ...).
    pub ensemble: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectraKind {
    #[default]
    Resolved,
    Full,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymmetryBlock {
    #[serde(default = "default_occupancies")]
    pub occupancies: Vec<f64>,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default)]
    pub spectra: SpectraKind,
}

fn default_occupancies() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

fn default_window() -> f64 {
    50.0
}

impl Default for AsymmetryBlock {
    fn default() -> Self {
        Self {
            occupancies: default_occupancies(),
            window: default_window(),
            spectra: SpectraKind::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceBlock {
    /// Decay rates to tabulate; defaults to the top-level `kappa_m`.
    pub kappa_m_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    /// Where to write the per-bin PSD table, if anywhere.
    pub psd_output: Option<PathBuf>,
    /// Comparison band (rad/s); defaults to the estimator's usable range.
    pub band: Option<[f64; 2]>,
    #[serde(default = "default_min_fraction")]
    pub min_fraction: f64,
    /// RMS bound applied when the coupling is zero (flat-floor control).
    #[serde(default = "default_max_rms")]
    pub max_rms: f64,
}

fn default_min_fraction() -> f64 {
    0.99
}

fn default_max_rms() -> f64 {
    0.02
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self {
            psd_output: None,
            band: None,
            min_fraction: default_min_fraction(),
            max_rms: default_max_rms(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Ḡ₀ as written, which may be zero (coupling switched off).
    pub fn coupling(&self) -> f64 {
        self.g0_bar_coupling
            .unwrap_or(CavityParams::default().g0_bar)
    }

    fn records(&self) -> (Units, OscillatorParams, CavityParams) {
        let (u, o, c) = (
            Units::default(),
            OscillatorParams::default(),
            CavityParams::default(),
        );
        (
            Units {
                hbar: self.hbar.unwrap_or(u.hbar),
            },
            OscillatorParams {
                mass: self.mass.unwrap_or(o.mass),
                omega_m: self.omega_m.unwrap_or(o.omega_m),
                kappa_m: self.kappa_m.unwrap_or(o.kappa_m),
                n_occ: self.n_occ.unwrap_or(o.n_occ),
            },
            CavityParams {
                kappa_r: self.kappa_r.unwrap_or(c.kappa_r),
                detuning: self.detuning.unwrap_or(c.detuning),
                g0_bar: self.coupling(),
                omega_r: self.omega_r,
                cavity_length: self.cavity_length,
                amplitude: self.amplitude,
            },
        )
    }

    /// Validated parameter bundle.
    pub fn params(&self) -> Result<Params, CliError> {
        let (u, o, c) = self.records();
        Params::new(u, o, c).map_err(param_error)
    }

    /// Bundle for the oracle, which also accepts Ḡ₀ = 0: the returned flag
    /// is false in that case and the bundle carries a placeholder coupling.
    pub fn oracle_params(&self) -> Result<(Params, bool), CliError> {
        if self.coupling() == 0.0 {
            let (u, o, mut c) = self.records();
            c.g0_bar = CavityParams::default().g0_bar;
            c.omega_r = None;
            Ok((Params::new(u, o, c).map_err(param_error)?, false))
        } else {
            Ok((self.params()?, true))
        }
    }

    /// The `[grid]` block, or `fallback` when absent.
    pub fn grid_or(
        &self,
        fallback: impl FnOnce() -> Result<FrequencyGrid, optomech::GridError>,
    ) -> Result<FrequencyGrid, CliError> {
        let grid = match &self.grid {
            Some(g) => FrequencyGrid::new(g.omega_min, g.omega_max, g.n_points, g.spacing),
            None => fallback(),
        };
        grid.map_err(|e| CliError::Validation(format!("grid: {e}")))
    }

    /// Simulation settings: defaults for `params`, overridden by `[sim]`.
    pub fn sim_config(&self, params: &Params, seed_flag: Option<u64>) -> SimConfig {
        let s = &self.sim;
        let seed = seed_flag.or(s.seed).unwrap_or(1);
        let mut cfg = SimConfig::for_params(params, seed);
        if let Some(dt) = s.dt {
            cfg.dt = dt;
        }
        if let Some(duration) = s.duration {
            cfg.duration = duration;
        }
        if let Some(n) = s.samples {
            cfg = cfg.with_samples(n);
        }
        if let Some(l) = s.welch_segment_length {
            cfg.welch_segment_length = l;
        }
        if let Some(o) = s.welch_overlap {
            cfg.welch_overlap = o;
        }
        if let Some(t) = s.transient_skip {
            cfg.transient_skip = t;
        }
        cfg
    }
}

/// Names the config key behind a validation error.
fn param_error(e: ParamError) -> CliError {
    let msg = match e {
        ParamError::NonPositiveParameter { name, value } => {
            let key = if name == "g0_bar" {
                "g0_bar_coupling"
            } else {
                name
            };
            format!("`{key}`: must be positive and finite, got {value}")
        }
        ParamError::ZeroDetuning => "`detuning`: must be nonzero".to_string(),
        ParamError::OverdampedOscillator { .. } => format!("`kappa_m`: {e}"),
        ParamError::InconsistentCoupling { .. } => format!("`g0_bar_coupling`: {e}"),
    };
    CliError::Validation(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.params().unwrap(), Params::default());
        assert_eq!(cfg.asymmetry.occupancies, vec![0.1, 1.0, 10.0]);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("kapa_m = 0.1").unwrap_err().to_string();
        assert!(err.contains("kapa_m"), "{err}");
        let err =
            RunConfig::parse("[grid]\nomega_min = 0.5\nomega_max = 1.5\nn_points = 32\nstep = 1")
                .unwrap_err()
                .to_string();
        assert!(err.contains("step"), "{err}");
    }

    #[test]
    fn validation_errors_name_keys() {
        let cfg = RunConfig::parse("g0_bar_coupling = -1.0").unwrap();
        assert!(cfg
            .params()
            .unwrap_err()
            .to_string()
            .contains("g0_bar_coupling"));
        let cfg = RunConfig::parse("detuning = 0.0").unwrap();
        assert!(cfg.params().unwrap_err().to_string().contains("detuning"));
    }

    #[test]
    fn zero_coupling_only_for_oracle() {
        let cfg = RunConfig::parse("g0_bar_coupling = 0.0").unwrap();
        assert!(cfg.params().is_err());
        let (_, coupled) = cfg.oracle_params().unwrap();
        assert!(!coupled);
    }

    #[test]
    fn sim_block_and_seed_flag() {
        let cfg = RunConfig::parse("[sim]\nseed = 5\nsamples = 4096\nwelch_segment_length = 256")
            .unwrap();
        let p = cfg.params().unwrap();
        let sim = cfg.sim_config(&p, None);
        assert_eq!(
            (sim.seed, sim.samples(), sim.welch_segment_length),
            (5, 4096, 256)
        );
        assert_eq!(cfg.sim_config(&p, Some(9)).seed, 9);
    }
}
