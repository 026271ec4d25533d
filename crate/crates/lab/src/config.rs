//! Key-value configuration shared by every subcommand.
//!
//! TOML is the primary encoding; a file with a `.json` extension is read as
//! JSON with the same schema. Every key is optional and falls back to the
//! documented default.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use displaced_core::kick::constants::{ATOMIC_MASS_UNIT, CA40_MASS_AMU, ELEMENTARY_CHARGE};
use displaced_core::kick::{KickTemplate, LowPassFilter, TrapSpec};
use displaced_core::sideband::{CouplingConfig, ThetaGrid};
use displaced_core::tomography::ReconstructionConfig;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "DISPLACED_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub mass_amu: f64,
    pub omega_ax_hz: f64,
    pub eta: f64,
    pub segment_offset_m: f64,
    pub filter_cutoff_hz: f64,
    pub filter_order: u32,
    pub kick_voltage_v: f64,
    pub kick_duration_s: f64,
    pub sample_dt_s: f64,
    pub steps_per_period: usize,
    pub holding_voltage_v: f64,
    pub field_per_volt_v_per_m: f64,
    pub kick_onset_s: f64,
    pub record_length_s: f64,
    pub synthesis: SynthesisSettings,
    pub reconstruction: ReconstructionSettings,
    pub pipeline: PipelineSettings,
}

impl Default for Config {
    fn default() -> Self {
        let template = KickTemplate::default();
        let spec = TrapSpec::default();
        Self {
            mass_amu: CA40_MASS_AMU,
            omega_ax_hz: spec.omega_ax / TAU,
            eta: CouplingConfig::default().eta,
            segment_offset_m: spec.segment_offset,
            filter_cutoff_hz: template.filter.cutoff_hz,
            filter_order: template.filter.order,
            kick_voltage_v: 2.0,
            kick_duration_s: template.duration,
            sample_dt_s: template.sample_dt,
            steps_per_period: template.steps_per_period,
            holding_voltage_v: spec.holding_voltage,
            field_per_volt_v_per_m: spec.field_per_volt,
            kick_onset_s: template.onset,
            record_length_s: template.total,
            synthesis: SynthesisSettings::default(),
            reconstruction: ReconstructionSettings::default(),
            pipeline: PipelineSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisSettings {
    pub shots: u32,
    /// Pulse areas per branch.
    pub theta_points: usize,
    /// Carrier grid span in ground-state carrier periods.
    pub carrier_periods: f64,
    /// Sideband grid span in ground-state blue-sideband periods.
    pub sideband_periods: f64,
    pub readout_fidelity: f64,
    pub contrast_decay: f64,
}

impl Default for SynthesisSettings {
    fn default() -> Self {
        Self {
            shots: 200,
            theta_points: 40,
            carrier_periods: 20.0,
            sideband_periods: 4.0,
            readout_fidelity: 0.97,
            contrast_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionSettings {
    pub k_max: usize,
    pub restarts: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub fit_readout_fidelity: bool,
    pub fit_bare_rabi: bool,
    /// Starting value, or the fixed value when not fitted.
    pub readout_fidelity: f64,
}

impl Default for ReconstructionSettings {
    fn default() -> Self {
        let d = ReconstructionConfig::default();
        Self {
            k_max: d.k_max,
            restarts: d.restarts,
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            fit_readout_fidelity: d.fit_readout_fidelity,
            fit_bare_rabi: d.fit_bare_rabi,
            readout_fidelity: d.coupling.readout_fidelity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preparation {
    pub n: usize,
    /// Population on `|n⟩`; the rest sits on `|n−1⟩`, or `|1⟩` for `n = 0`.
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    pub preparations: Vec<Preparation>,
    pub v_k_list: Vec<f64>,
    /// Truncation of the forward-model truth.
    pub truth_k_max: usize,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            preparations: vec![
                Preparation { n: 0, fidelity: 0.92 },
                Preparation { n: 1, fidelity: 0.77 },
                Preparation { n: 2, fidelity: 0.72 },
            ],
            v_k_list: (0..=10).map(|i| 0.2 * i as f64).collect(),
            truth_k_max: 40,
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LabError::Validation(msg.into()))
    }
}

impl Config {
    /// Reads `path`, as JSON when the extension is `.json` and TOML otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let config: Self = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| LabError::format(path, e))?
        } else {
            toml::from_str(&text).map_err(|e| LabError::format(path, e))?
        };
        config.validate()?;
        Ok(config)
    }

    /// Loads the explicit path, else the file named by [`CONFIG_ENV`], else
    /// the defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        match explicit.map(Path::to_path_buf).or(from_env) {
            Some(path) => Self::load(&path),
            None => Ok(Self::default()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        check(positive(self.mass_amu), "mass_amu must be positive")?;
        check(positive(self.omega_ax_hz), "omega_ax_hz must be positive")?;
        check(self.eta.is_finite() && self.eta >= 0.0, "eta must be non-negative")?;
        check(positive(self.segment_offset_m), "segment_offset_m must be positive")?;
        check(positive(self.filter_cutoff_hz), "filter_cutoff_hz must be positive")?;
        check(self.filter_order >= 1, "filter_order must be at least 1")?;
        check(self.kick_voltage_v.is_finite(), "kick_voltage_v must be finite")?;
        check(positive(self.kick_duration_s), "kick_duration_s must be positive")?;
        check(positive(self.sample_dt_s), "sample_dt_s must be positive")?;
        check(self.steps_per_period >= 64, "steps_per_period must be at least 64")?;
        check(self.holding_voltage_v < 0.0, "holding_voltage_v must be negative")?;
        check(positive(self.field_per_volt_v_per_m), "field_per_volt_v_per_m must be positive")?;
        check(self.kick_onset_s >= 0.0, "kick_onset_s must be non-negative")?;
        check(
            self.record_length_s > self.kick_onset_s + self.kick_duration_s,
            "record_length_s must extend past the end of the kick",
        )?;
        let s = &self.synthesis;
        check(s.shots > 0, "synthesis.shots must be positive")?;
        check(s.theta_points > 0, "synthesis.theta_points must be positive")?;
        check(positive(s.carrier_periods) && positive(s.sideband_periods), "synthesis spans must be positive")?;
        check((0.5..=1.0).contains(&s.readout_fidelity), "synthesis.readout_fidelity must lie in [0.5, 1]")?;
        check(s.contrast_decay >= 0.0, "synthesis.contrast_decay must be non-negative")?;
        self.reconstruction_config(0).validate()?;
        let p = &self.pipeline;
        check(!p.preparations.is_empty(), "pipeline.preparations must not be empty")?;
        check(
            p.preparations.iter().all(|q| q.fidelity > 0.0 && q.fidelity <= 1.0),
            "preparation fidelities must lie in (0, 1]",
        )?;
        check(p.v_k_list.iter().all(|v| v.is_finite()), "pipeline.v_k_list must be finite")?;
        check(p.v_k_list.contains(&0.0), "pipeline.v_k_list must include 0 for the preparation reference")?;
        check(p.truth_k_max >= self.reconstruction.k_max, "pipeline.truth_k_max must be at least reconstruction.k_max")?;
        Ok(())
    }

    pub fn trap_spec(&self) -> TrapSpec {
        TrapSpec {
            mass: self.mass_amu * ATOMIC_MASS_UNIT,
            charge: ELEMENTARY_CHARGE,
            omega_ax: TAU * self.omega_ax_hz,
            holding_voltage: self.holding_voltage_v,
            segment_offset: self.segment_offset_m,
            field_per_volt: self.field_per_volt_v_per_m,
        }
    }

    pub fn kick_template(&self) -> KickTemplate {
        KickTemplate {
            onset: self.kick_onset_s,
            duration: self.kick_duration_s,
            sample_dt: self.sample_dt_s,
            total: self.record_length_s,
            filter: LowPassFilter { cutoff_hz: self.filter_cutoff_hz, order: self.filter_order },
            steps_per_period: self.steps_per_period,
        }
    }

    /// Forward model used to synthesize data.
    pub fn coupling(&self) -> CouplingConfig {
        CouplingConfig {
            eta: self.eta,
            readout_fidelity: self.synthesis.readout_fidelity,
            contrast_decay: self.synthesis.contrast_decay,
            ..CouplingConfig::default()
        }
    }

    pub fn theta_grid(&self) -> ThetaGrid {
        let s = &self.synthesis;
        let sideband = if self.eta > 0.0 { s.sideband_periods * TAU / self.eta } else { s.carrier_periods * TAU };
        ThetaGrid::split(s.theta_points, s.carrier_periods * TAU, sideband)
    }

    pub fn reconstruction_config(&self, seed: u64) -> ReconstructionConfig {
        let r = &self.reconstruction;
        ReconstructionConfig {
            k_max: r.k_max,
            fit_readout_fidelity: r.fit_readout_fidelity,
            fit_bare_rabi: r.fit_bare_rabi,
            restarts: r.restarts,
            tolerance: r.tolerance,
            max_iterations: r.max_iterations,
            seed,
            coupling: CouplingConfig {
                eta: self.eta,
                readout_fidelity: r.readout_fidelity,
                contrast_decay: self.synthesis.contrast_decay,
                ..CouplingConfig::default()
            },
        }
    }
}
