//! Capacity, payload power and energy efficiency of the three payload modes
//! on the gateway ↔ HAPS ↔ gNB backhaul.

use std::fmt;
use std::str::FromStr;

use crate::error::ModelError;
use crate::propagation::{
    db_to_linear, dbm_to_watts, link_snr_linear, Link, RadioParams, ScenarioGeometry,
};

/// Communication payload mode of the HAPS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Super macro base station: regenerative payload with compute and cache.
    Smbs,
    /// Half-duplex decode-and-forward relay.
    Rs,
    /// Passive reconfigurable intelligent surface.
    Ris,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Smbs, Mode::Rs, Mode::Ris];

    /// Tie-break order, most passive first.
    pub const PASSIVE_FIRST: [Mode; 3] = [Mode::Ris, Mode::Rs, Mode::Smbs];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Smbs => "SMBS",
            Mode::Rs => "RS",
            Mode::Ris => "RIS",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SMBS" => Ok(Mode::Smbs),
            "RS" => Ok(Mode::Rs),
            "RIS" => Ok(Mode::Ris),
            other => Err(format!("unknown mode `{other}` (expected SMBS, RS or RIS)")),
        }
    }
}

/// Set of payload modes the HAPS may activate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeSet {
    pub smbs: bool,
    pub rs: bool,
    pub ris: bool,
}

impl ModeSet {
    pub const ALL: ModeSet = ModeSet {
        smbs: true,
        rs: true,
        ris: true,
    };

    pub fn only(mode: Mode) -> Self {
        ModeSet {
            smbs: mode == Mode::Smbs,
            rs: mode == Mode::Rs,
            ris: mode == Mode::Ris,
        }
    }

    pub fn contains(&self, mode: Mode) -> bool {
        match mode {
            Mode::Smbs => self.smbs,
            Mode::Rs => self.rs,
            Mode::Ris => self.ris,
        }
    }

    pub fn without(mut self, mode: Mode) -> Self {
        match mode {
            Mode::Smbs => self.smbs = false,
            Mode::Rs => self.rs = false,
            Mode::Ris => self.ris = false,
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        !(self.smbs || self.rs || self.ris)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsConfig {
    /// Share of the gateway power budget spent on the first hop.
    pub alpha: f64,
    pub payload_power_w: f64,
}

impl Default for RsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            payload_power_w: 1000.0,
        }
    }
}

impl RsConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_alpha(self.alpha)?;
        if !(self.payload_power_w.is_finite() && self.payload_power_w > 0.0) {
            return Err(ModelError::invalid(
                "rs.payload_power_w",
                "must be finite and > 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisConfig {
    pub elements: u32,
    /// Per-element reflection amplitude.
    pub beta: f64,
    pub element_power_w: f64,
}

impl Default for RisConfig {
    fn default() -> Self {
        Self {
            elements: 30_000,
            beta: 1.0,
            element_power_w: 7.8e-3,
        }
    }
}

impl RisConfig {
    pub fn with_elements(&self, elements: u32) -> Self {
        Self { elements, ..*self }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.elements == 0 {
            return Err(ModelError::invalid("ris.elements", "must be >= 1"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(ModelError::invalid("ris.beta", "must lie in (0, 1]"));
        }
        if !(self.element_power_w.is_finite() && self.element_power_w >= 0.0) {
            return Err(ModelError::invalid(
                "ris.element_power_w",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmbsConfig {
    /// Onboard compute rate, CPU cycles per second.
    pub cpu_hz: f64,
    /// Placeholder; the base-station payload is only known to exceed the relay's.
    pub payload_power_w: f64,
    pub cache_capacity: usize,
}

impl Default for SmbsConfig {
    fn default() -> Self {
        Self {
            cpu_hz: 2.0e9,
            payload_power_w: 3000.0,
            cache_capacity: 64,
        }
    }
}

impl SmbsConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.cpu_hz.is_finite() && self.cpu_hz > 0.0) {
            return Err(ModelError::invalid("smbs.cpu_hz", "must be finite and > 0"));
        }
        if !(self.payload_power_w.is_finite() && self.payload_power_w > 0.0) {
            return Err(ModelError::invalid(
                "smbs.payload_power_w",
                "must be finite and > 0",
            ));
        }
        Ok(())
    }
}

/// Per-mode payload configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeConfigs {
    pub rs: RsConfig,
    pub ris: RisConfig,
    pub smbs: SmbsConfig,
}

impl ModeConfigs {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.rs.validate()?;
        self.ris.validate()?;
        self.smbs.validate()
    }
}

/// Capacity and energy figures of one mode at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeResult {
    pub capacity_bps_hz: f64,
    pub capacity_bps: f64,
    pub payload_power_w: f64,
    pub energy_efficiency_bits_per_joule: f64,
}

impl ModeResult {
    pub fn new(
        capacity_bps_hz: f64,
        bandwidth_hz: f64,
        payload_power_w: f64,
    ) -> Result<Self, ModelError> {
        let capacity_bps = capacity_bps_hz * bandwidth_hz;
        Ok(Self {
            capacity_bps_hz,
            capacity_bps,
            payload_power_w,
            energy_efficiency_bits_per_joule: energy_efficiency(capacity_bps, payload_power_w)?,
        })
    }
}

/// Traffic direction on the backhaul.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    /// Gateway → HAPS → gNB.
    #[default]
    Downstream,
    /// gNB → HAPS → gateway.
    Upstream,
}

struct Endpoints {
    source_power_dbm: f64,
    source_gain_db: f64,
    sink_gain_db: f64,
    source_leg_m: f64,
    sink_leg_m: f64,
}

fn endpoints(geom: &ScenarioGeometry, radio: &RadioParams, direction: Direction) -> Endpoints {
    match direction {
        Direction::Downstream => Endpoints {
            source_power_dbm: radio.gateway_power_dbm,
            source_gain_db: radio.gateway_gain_db,
            sink_gain_db: radio.gnb_gain_db,
            source_leg_m: geom.gateway_slant_m(),
            sink_leg_m: geom.gnb_slant_m(),
        },
        Direction::Upstream => Endpoints {
            source_power_dbm: radio.gnb_power_dbm,
            source_gain_db: radio.gnb_gain_db,
            sink_gain_db: radio.gateway_gain_db,
            source_leg_m: geom.gnb_slant_m(),
            sink_leg_m: geom.gateway_slant_m(),
        },
    }
}

fn check_alpha(alpha: f64) -> Result<(), ModelError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(ModelError::invalid(
            "rs.alpha",
            format!("must lie in (0, 1), got {alpha}"),
        ))
    }
}

/// Per-hop SNRs of the relay when the source power budget is split `alpha`
/// to hop 1 and `1 - alpha` to the relay's own transmission.
pub fn rs_hop_snrs(
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    alpha: f64,
    direction: Direction,
) -> Result<(f64, f64), ModelError> {
    check_alpha(alpha)?;
    let ends = endpoints(geom, radio, direction);
    let first = Link {
        distance_m: ends.source_leg_m,
        tx_power_dbm: ends.source_power_dbm + 10.0 * alpha.log10(),
        tx_gain_db: ends.source_gain_db,
        rx_gain_db: radio.relay_gain_db,
    };
    let second = Link {
        distance_m: ends.sink_leg_m,
        tx_power_dbm: ends.source_power_dbm + 10.0 * (1.0 - alpha).log10(),
        tx_gain_db: radio.relay_gain_db,
        rx_gain_db: ends.sink_gain_db,
    };
    Ok((
        link_snr_linear(&first, radio),
        link_snr_linear(&second, radio),
    ))
}

/// End-to-end spectral efficiency of the repetition-coded half-duplex
/// decode-and-forward relay, bps/Hz.
pub fn rs_capacity_directed(
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    alpha: f64,
    direction: Direction,
) -> Result<f64, ModelError> {
    let (first, second) = rs_hop_snrs(geom, radio, alpha, direction)?;
    Ok(0.5 * (1.0 + first).log2().min((1.0 + second).log2()))
}

pub fn rs_capacity_at(
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    alpha: f64,
) -> Result<f64, ModelError> {
    rs_capacity_directed(geom, radio, alpha, Direction::Downstream)
}

pub fn rs_capacity(
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    rs: &RsConfig,
) -> Result<f64, ModelError> {
    rs_capacity_at(geom, radio, rs.alpha)
}

/// Received SNR through the surface with every element phase-aligned.
///
/// Amplitude grows with `N·beta` and falls with the product of the two slant
/// ranges; atmospheric losses of both legs apply multiplicatively.
pub fn ris_snr_directed(
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    ris: &RisConfig,
    direction: Direction,
) -> f64 {
    let ends = endpoints(geom, radio, direction);
    let aperture = f64::from(ris.elements) * ris.beta;
    let wavelength_term = (radio.wavelength_m() / (4.0 * std::f64::consts::PI)).powi(4);
    let legs = ends.source_leg_m * ends.source_leg_m * ends.sink_leg_m * ends.sink_leg_m;
    let atmosphere = db_to_linear(
        radio.atmospheric_loss_db(ends.source_leg_m) + radio.atmospheric_loss_db(ends.sink_leg_m),
    );
    let noise_w = dbm_to_watts(radio.noise_power_dbm());

    dbm_to_watts(ends.source_power_dbm)
        * db_to_linear(ends.source_gain_db)
        * db_to_linear(ends.sink_gain_db)
        * aperture
        * aperture
        * wavelength_term
        / (legs * atmosphere * noise_w)
}

pub fn ris_snr_linear(geom: &ScenarioGeometry, radio: &RadioParams, ris: &RisConfig) -> f64 {
    ris_snr_directed(geom, radio, ris, Direction::Downstream)
}

/// Spectral efficiency of the reflected link. A single concurrent hop, so no
/// half-duplex penalty.
pub fn ris_capacity(geom: &ScenarioGeometry, radio: &RadioParams, ris: &RisConfig) -> f64 {
    (1.0 + ris_snr_linear(geom, radio, ris)).log2()
}

pub fn smbs_access_snr(geom: &ScenarioGeometry, radio: &RadioParams) -> f64 {
    let link = Link {
        distance_m: geom.gnb_slant_m(),
        tx_power_dbm: radio.gnb_power_dbm,
        tx_gain_db: radio.gnb_gain_db,
        rx_gain_db: radio.haps_rx_gain_db,
    };
    link_snr_linear(&link, radio)
}

/// Single gNB ↔ HAPS hop served by the regenerative payload, bps/Hz.
pub fn smbs_access_capacity(geom: &ScenarioGeometry, radio: &RadioParams) -> f64 {
    (1.0 + smbs_access_snr(geom, radio)).log2()
}

pub fn mode_payload_power_w(mode: Mode, configs: &ModeConfigs) -> f64 {
    match mode {
        Mode::Smbs => configs.smbs.payload_power_w,
        Mode::Rs => configs.rs.payload_power_w,
        Mode::Ris => f64::from(configs.ris.elements) * configs.ris.element_power_w,
    }
}

/// Delivered bits per joule of payload energy.
pub fn energy_efficiency(capacity_bps: f64, payload_power_w: f64) -> Result<f64, ModelError> {
    if payload_power_w > 0.0 {
        Ok(capacity_bps / payload_power_w)
    } else {
        Err(ModelError::ZeroPower)
    }
}
