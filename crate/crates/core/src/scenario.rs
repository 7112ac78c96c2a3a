//! Scenario configuration: a sectioned `key = value` (TOML) file whose
//! defaults reproduce the backhaul and offloading case study.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::engine::{CacheState, EngineContext};
use crate::error::ModelError;
use crate::modes::{ModeConfigs, ModeSet, RisConfig, RsConfig, SmbsConfig};
use crate::offload::CloudConfig;
use crate::propagation::{GaseousPath, RadioParams, ScenarioGeometry};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl From<ModelError> for ConfigError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::InvalidParameter { key, reason } => ConfigError::Invalid {
                key: key.to_string(),
                reason,
            },
            ModelError::FrequencyOutOfRange { frequency_hz } => ConfigError::Invalid {
                key: "radio.frequency_hz".into(),
                reason: format!("{frequency_hz} Hz is outside 1-50 GHz"),
            },
            other => ConfigError::Invalid {
                key: "?".into(),
                reason: other.to_string(),
            },
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Quantity swept by a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// HAPS horizontal offset from the gateway, meters.
    Offset,
    /// Task size, bits.
    TaskSize,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::Offset => "x",
            SweepVariable::TaskSize => "size_bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(invalid("sweep.step", "must be finite and > 0"));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.stop >= self.start) {
            return Err(invalid("sweep.stop", "range is empty (stop < start)"));
        }
        if self.start < 0.0 {
            return Err(invalid("sweep.start", "must be >= 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        crate::search::grid(self.start, self.stop, self.step)
    }

    pub fn with_step(&self, step: f64) -> Self {
        Self { step, ..*self }
    }
}

/// Fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: ScenarioGeometry,
    pub radio: RadioParams,
    pub modes: ModeConfigs,
    pub cloud: CloudConfig,
    pub cycles_per_bit: f64,
    pub popularity_threshold: u64,
    pub enabled: ModeSet,
    /// Surface sizes compared in the capacity and efficiency sweeps.
    pub sweep_elements: Vec<u32>,
    /// Onboard compute rates compared in the latency sweep.
    pub sweep_cpu_hz: Vec<f64>,
    pub sweep: Option<SweepRange>,
    pub output: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        RawConfig::default()
            .into_scenario()
            .expect("defaults are valid")
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        raw.into_scenario()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn engine_context(&self) -> Result<EngineContext, ModelError> {
        EngineContext::new(
            self.geometry,
            self.radio,
            self.modes,
            self.cloud,
            self.enabled,
        )
    }

    pub fn initial_cache(&self) -> CacheState {
        CacheState::new(self.modes.smbs.cache_capacity, self.popularity_threshold)
    }

    /// Default offset sweep: the whole corridor at 500 m.
    pub fn default_offset_sweep(&self) -> SweepRange {
        SweepRange {
            variable: SweepVariable::Offset,
            start: 0.0,
            stop: self.geometry.ground_distance_m(),
            step: 500.0,
        }
    }

    /// Default task-size sweep: 0 to 100 Mbit in 1 Mbit steps.
    pub fn default_size_sweep(&self) -> SweepRange {
        SweepRange {
            variable: SweepVariable::TaskSize,
            start: 0.0,
            stop: 1.0e8,
            step: 1.0e6,
        }
    }

    /// Configured sweep if it matches `variable`, the default otherwise.
    pub fn sweep_for(&self, variable: SweepVariable) -> Result<SweepRange, ConfigError> {
        match self.sweep {
            Some(range) if range.variable == variable => Ok(range),
            Some(range) => Err(invalid(
                "sweep.variable",
                format!(
                    "`{}` cannot drive this sweep (expected `{}`)",
                    range.variable.as_str(),
                    variable.as_str()
                ),
            )),
            None => Ok(match variable {
                SweepVariable::Offset => self.default_offset_sweep(),
                SweepVariable::TaskSize => self.default_size_sweep(),
            }),
        }
    }

    /// Same scenario with every antenna gain raised by `delta_db`.
    pub fn with_gain_offset(&self, delta_db: f64) -> Self {
        Self {
            radio: self.radio.with_gain_offset(delta_db),
            ..self.clone()
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGeometry {
    distance_m: f64,
    altitude_m: f64,
    offset_m: f64,
}

impl Default for RawGeometry {
    fn default() -> Self {
        let g = ScenarioGeometry::case_study();
        Self {
            distance_m: g.ground_distance_m(),
            altitude_m: g.altitude_m(),
            offset_m: g.offset_m(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRadio {
    frequency_hz: f64,
    bandwidth_hz: f64,
    noise_figure_db: f64,
    gnb_power_dbm: f64,
    gnb_gain_db: f64,
    gateway_power_dbm: f64,
    gateway_gain_db: f64,
    relay_gain_db: f64,
    haps_rx_gain_db: f64,
    scintillation_db: f64,
    pressure_pa: f64,
    temperature_c: f64,
    /// `column` or `slant`.
    gaseous_path: String,
    /// Column height; defaults to the HAPS altitude.
    gaseous_column_m: Option<f64>,
}

impl Default for RawRadio {
    fn default() -> Self {
        let r = RadioParams::default();
        Self {
            frequency_hz: r.frequency_hz,
            bandwidth_hz: r.bandwidth_hz,
            noise_figure_db: r.noise_figure_db,
            gnb_power_dbm: r.gnb_power_dbm,
            gnb_gain_db: r.gnb_gain_db,
            gateway_power_dbm: r.gateway_power_dbm,
            gateway_gain_db: r.gateway_gain_db,
            relay_gain_db: r.relay_gain_db,
            haps_rx_gain_db: r.haps_rx_gain_db,
            scintillation_db: r.scintillation_db,
            pressure_pa: r.pressure_pa,
            temperature_c: r.temperature_c,
            gaseous_path: "column".into(),
            gaseous_column_m: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRs {
    alpha: f64,
    payload_power_w: f64,
}

impl Default for RawRs {
    fn default() -> Self {
        let rs = RsConfig::default();
        Self {
            alpha: rs.alpha,
            payload_power_w: rs.payload_power_w,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRis {
    elements: u32,
    beta: f64,
    element_power_w: f64,
    sweep_elements: Vec<u32>,
}

impl Default for RawRis {
    fn default() -> Self {
        let ris = RisConfig::default();
        Self {
            elements: ris.elements,
            beta: ris.beta,
            element_power_w: ris.element_power_w,
            sweep_elements: vec![10_000, 30_000, 50_000],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSmbs {
    cpu_hz: f64,
    payload_power_w: f64,
    cache_capacity: usize,
    popularity_threshold: u64,
    sweep_cpu_hz: Vec<f64>,
}

impl Default for RawSmbs {
    fn default() -> Self {
        let smbs = SmbsConfig::default();
        Self {
            cpu_hz: smbs.cpu_hz,
            payload_power_w: smbs.payload_power_w,
            cache_capacity: smbs.cache_capacity,
            popularity_threshold: 3,
            sweep_cpu_hz: vec![1.0e9, 2.0e9, 3.0e9],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawCloud {
    cpu_hz: f64,
}

impl Default for RawCloud {
    fn default() -> Self {
        Self {
            cpu_hz: CloudConfig::default().cpu_hz,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTask {
    cycles_per_bit: f64,
}

impl Default for RawTask {
    fn default() -> Self {
        Self {
            cycles_per_bit: 4.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawModes {
    enabled: Vec<String>,
}

impl Default for RawModes {
    fn default() -> Self {
        Self {
            enabled: vec!["SMBS".into(), "RS".into(), "RIS".into()],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: String,
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    geometry: RawGeometry,
    radio: RawRadio,
    rs: RawRs,
    ris: RawRis,
    smbs: RawSmbs,
    cloud: RawCloud,
    task: RawTask,
    modes: RawModes,
    sweep: Option<RawSweep>,
    output: RawOutput,
}

impl RawConfig {
    fn into_scenario(self) -> Result<Scenario, ConfigError> {
        let geometry = ScenarioGeometry::new(
            self.geometry.distance_m,
            self.geometry.altitude_m,
            self.geometry.offset_m,
        )?;

        let gaseous_path = match self.radio.gaseous_path.as_str() {
            "slant" => GaseousPath::Slant,
            "column" => GaseousPath::Column {
                height_m: self.radio.gaseous_column_m.unwrap_or(geometry.altitude_m()),
            },
            other => {
                return Err(invalid(
                    "radio.gaseous_path",
                    format!("`{other}` (expected `column` or `slant`)"),
                ))
            }
        };
        let r = self.radio;
        let radio = RadioParams {
            frequency_hz: r.frequency_hz,
            bandwidth_hz: r.bandwidth_hz,
            noise_figure_db: r.noise_figure_db,
            gnb_power_dbm: r.gnb_power_dbm,
            gnb_gain_db: r.gnb_gain_db,
            gateway_power_dbm: r.gateway_power_dbm,
            gateway_gain_db: r.gateway_gain_db,
            relay_gain_db: r.relay_gain_db,
            haps_rx_gain_db: r.haps_rx_gain_db,
            scintillation_db: r.scintillation_db,
            pressure_pa: r.pressure_pa,
            temperature_c: r.temperature_c,
            gaseous_path,
        };
        radio.validate()?;

        let modes = ModeConfigs {
            rs: RsConfig {
                alpha: self.rs.alpha,
                payload_power_w: self.rs.payload_power_w,
            },
            ris: RisConfig {
                elements: self.ris.elements,
                beta: self.ris.beta,
                element_power_w: self.ris.element_power_w,
            },
            smbs: SmbsConfig {
                cpu_hz: self.smbs.cpu_hz,
                payload_power_w: self.smbs.payload_power_w,
                cache_capacity: self.smbs.cache_capacity,
            },
        };
        modes.validate()?;

        if self.ris.sweep_elements.is_empty() || self.ris.sweep_elements.contains(&0) {
            return Err(invalid(
                "ris.sweep_elements",
                "needs at least one size, all >= 1",
            ));
        }
        if self.smbs.sweep_cpu_hz.is_empty()
            || self
                .smbs
                .sweep_cpu_hz
                .iter()
                .any(|f| !(f.is_finite() && *f > 0.0))
        {
            return Err(invalid(
                "smbs.sweep_cpu_hz",
                "needs at least one rate, all > 0",
            ));
        }
        if self.smbs.popularity_threshold == 0 {
            return Err(invalid("smbs.popularity_threshold", "must be >= 1"));
        }

        let cloud = CloudConfig {
            cpu_hz: self.cloud.cpu_hz,
        };
        cloud.validate()?;
        if !(self.task.cycles_per_bit.is_finite() && self.task.cycles_per_bit > 0.0) {
            return Err(invalid("task.cycles_per_bit", "must be finite and > 0"));
        }

        let mut enabled = ModeSet {
            smbs: false,
            rs: false,
            ris: false,
        };
        for name in &self.modes.enabled {
            let mode = name
                .parse()
                .map_err(|e: String| invalid("modes.enabled", e))?;
            enabled = match mode {
                crate::modes::Mode::Smbs => ModeSet {
                    smbs: true,
                    ..enabled
                },
                crate::modes::Mode::Rs => ModeSet {
                    rs: true,
                    ..enabled
                },
                crate::modes::Mode::Ris => ModeSet {
                    ris: true,
                    ..enabled
                },
            };
        }
        if enabled.is_empty() {
            return Err(invalid(
                "modes.enabled",
                "at least one mode must be enabled",
            ));
        }

        let sweep = match self.sweep {
            None => None,
            Some(s) => {
                let variable = match s.variable.as_str() {
                    "x" | "offset" | "offset_m" => SweepVariable::Offset,
                    "size_bits" | "S" | "size" => SweepVariable::TaskSize,
                    other => {
                        return Err(invalid(
                            "sweep.variable",
                            format!("unknown variable `{other}`"),
                        ))
                    }
                };
                let range = SweepRange {
                    variable,
                    start: s.start,
                    stop: s.stop,
                    step: s.step,
                };
                range.validate()?;
                if variable == SweepVariable::Offset && range.stop > geometry.ground_distance_m() {
                    return Err(invalid(
                        "sweep.stop",
                        "offset sweep leaves the gateway-gNB corridor",
                    ));
                }
                Some(range)
            }
        };

        Ok(Scenario {
            geometry,
            radio,
            modes,
            cloud,
            cycles_per_bit: self.task.cycles_per_bit,
            popularity_threshold: self.smbs.popularity_threshold,
            enabled,
            sweep_elements: self.ris.sweep_elements,
            sweep_cpu_hz: self.smbs.sweep_cpu_hz,
            sweep,
            output: self.output.path,
        })
    }
}
