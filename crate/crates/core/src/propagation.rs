//! Gateway–HAPS–gNB geometry and line-of-sight link budgets.
//!
//! All links are deterministic free-space links with dry-air oxygen
//! absorption and a fixed tropospheric scintillation margin. Powers are in
//! dBm, gains and losses in dB, distances in meters.

use std::f64::consts::PI;

use crate::error::ModelError;

/// Speed of light used for both spreading loss and propagation delay, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Thermal noise density at 290 K, dBm/Hz.
const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Placement of the HAPS relative to the gateway and the gNB.
///
/// The gateway sits at ground position 0, the gNB at `ground_distance_m`, and
/// the HAPS hovers at `altitude_m` above ground position `offset_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioGeometry {
    ground_distance_m: f64,
    altitude_m: f64,
    offset_m: f64,
}

impl ScenarioGeometry {
    pub fn new(ground_distance_m: f64, altitude_m: f64, offset_m: f64) -> Result<Self, ModelError> {
        if !(ground_distance_m.is_finite() && ground_distance_m > 0.0) {
            return Err(ModelError::invalid(
                "geometry.distance_m",
                "must be finite and > 0",
            ));
        }
        if !(altitude_m.is_finite() && altitude_m > 0.0) {
            return Err(ModelError::invalid(
                "geometry.altitude_m",
                "must be finite and > 0",
            ));
        }
        if !(0.0..=ground_distance_m).contains(&offset_m) {
            return Err(ModelError::invalid(
                "geometry.offset_m",
                format!("must lie in [0, {ground_distance_m}], got {offset_m}"),
            ));
        }
        Ok(Self {
            ground_distance_m,
            altitude_m,
            offset_m,
        })
    }

    /// Paper case-study corridor: 60 km gateway–gNB, HAPS at 20 km altitude,
    /// parked above the corridor midpoint.
    pub fn case_study() -> Self {
        Self {
            ground_distance_m: 60_000.0,
            altitude_m: 20_000.0,
            offset_m: 30_000.0,
        }
    }

    pub fn ground_distance_m(&self) -> f64 {
        self.ground_distance_m
    }

    pub fn altitude_m(&self) -> f64 {
        self.altitude_m
    }

    pub fn offset_m(&self) -> f64 {
        self.offset_m
    }

    /// Same corridor with the HAPS moved to `offset_m`.
    pub fn with_offset(&self, offset_m: f64) -> Result<Self, ModelError> {
        Self::new(self.ground_distance_m, self.altitude_m, offset_m)
    }

    /// Slant range gateway → HAPS.
    pub fn gateway_slant_m(&self) -> f64 {
        slant_distance(self.offset_m, self.altitude_m)
    }

    /// Slant range HAPS → gNB.
    pub fn gnb_slant_m(&self) -> f64 {
        slant_distance(self.ground_distance_m - self.offset_m, self.altitude_m)
    }
}

/// Which path length is charged with gaseous absorption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaseousPath {
    /// The full slant range of every link.
    Slant,
    /// A fixed vertical column of the given height, independent of where the
    /// HAPS is parked. Keeps every non-spreading loss position-independent.
    Column { height_m: f64 },
}

impl GaseousPath {
    fn charged_length_m(&self, distance_m: f64) -> f64 {
        match *self {
            GaseousPath::Slant => distance_m,
            GaseousPath::Column { height_m } => height_m,
        }
    }
}

/// Radio configuration shared by every link in the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub gnb_power_dbm: f64,
    pub gnb_gain_db: f64,
    pub gateway_power_dbm: f64,
    pub gateway_gain_db: f64,
    pub relay_gain_db: f64,
    /// HAPS receive gain when the payload runs as a base station.
    pub haps_rx_gain_db: f64,
    pub scintillation_db: f64,
    pub pressure_pa: f64,
    pub temperature_c: f64,
    pub gaseous_path: GaseousPath,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            frequency_hz: 2.0e9,
            bandwidth_hz: 20.0e6,
            noise_figure_db: 5.0,
            gnb_power_dbm: 35.0,
            gnb_gain_db: 15.0,
            gateway_power_dbm: 33.0,
            gateway_gain_db: 43.2,
            relay_gain_db: 15.0,
            haps_rx_gain_db: 15.0,
            scintillation_db: 0.5,
            pressure_pa: 101_300.0,
            temperature_c: 15.0,
            gaseous_path: GaseousPath::Column { height_m: 20_000.0 },
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(ModelError::invalid(
                "radio.frequency_hz",
                "must be finite and > 0",
            ));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(ModelError::invalid(
                "radio.bandwidth_hz",
                "must be finite and > 0",
            ));
        }
        let finite = [
            ("radio.noise_figure_db", self.noise_figure_db),
            ("radio.gnb_power_dbm", self.gnb_power_dbm),
            ("radio.gnb_gain_db", self.gnb_gain_db),
            ("radio.gateway_power_dbm", self.gateway_power_dbm),
            ("radio.gateway_gain_db", self.gateway_gain_db),
            ("radio.relay_gain_db", self.relay_gain_db),
            ("radio.haps_rx_gain_db", self.haps_rx_gain_db),
            ("radio.temperature_c", self.temperature_c),
        ];
        for (key, value) in finite {
            if !value.is_finite() {
                return Err(ModelError::invalid(key, "must be finite"));
            }
        }
        if !(self.scintillation_db.is_finite() && self.scintillation_db >= 0.0) {
            return Err(ModelError::invalid(
                "radio.scintillation_db",
                "must be finite and >= 0",
            ));
        }
        if !(self.pressure_pa.is_finite() && self.pressure_pa > 0.0) {
            return Err(ModelError::invalid(
                "radio.pressure_pa",
                "must be finite and > 0",
            ));
        }
        if self.temperature_c <= -273.15 {
            return Err(ModelError::invalid(
                "radio.temperature_c",
                "must be above absolute zero",
            ));
        }
        if let GaseousPath::Column { height_m } = self.gaseous_path {
            if !(height_m.is_finite() && height_m >= 0.0) {
                return Err(ModelError::invalid(
                    "radio.gaseous_column_m",
                    "must be finite and >= 0",
                ));
            }
        }
        dry_air_specific_attenuation(self.frequency_hz, self.pressure_pa, self.temperature_c)?;
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    /// Adds `delta_db` to every antenna gain in the scenario.
    pub fn with_gain_offset(&self, delta_db: f64) -> Self {
        Self {
            gnb_gain_db: self.gnb_gain_db + delta_db,
            gateway_gain_db: self.gateway_gain_db + delta_db,
            relay_gain_db: self.relay_gain_db + delta_db,
            haps_rx_gain_db: self.haps_rx_gain_db + delta_db,
            ..*self
        }
    }

    pub fn noise_power_dbm(&self) -> f64 {
        noise_power_dbm(self.bandwidth_hz, self.noise_figure_db)
    }

    /// Gaseous absorption plus scintillation charged on a link of the given
    /// length, dB.
    pub fn atmospheric_loss_db(&self, distance_m: f64) -> f64 {
        // validate() has already rejected out-of-window frequencies.
        let gamma =
            dry_air_specific_attenuation(self.frequency_hz, self.pressure_pa, self.temperature_c)
                .unwrap_or(0.0);
        gamma * self.gaseous_path.charged_length_m(distance_m) / 1000.0 + self.scintillation_db
    }
}

/// One point-to-point hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub distance_m: f64,
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
}

pub fn slant_distance(x_offset_m: f64, altitude_m: f64) -> f64 {
    x_offset_m.hypot(altitude_m)
}

/// Elevation of the HAPS seen from a ground point `x_offset_m` away, radians.
pub fn elevation_angle(x_offset_m: f64, altitude_m: f64) -> f64 {
    altitude_m.atan2(x_offset_m)
}

pub fn fspl_db(distance_m: f64, frequency_hz: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m * frequency_hz / SPEED_OF_LIGHT).log10()
}

/// Dry-air (oxygen) specific attenuation below the 60 GHz complex, dB/km.
///
/// Simplified ITU-R P.676 Annex 2 oxygen term with pressure and temperature
/// correction; valid from 1 to 50 GHz.
pub fn dry_air_specific_attenuation(
    frequency_hz: f64,
    pressure_pa: f64,
    temperature_c: f64,
) -> Result<f64, ModelError> {
    if !(1.0e9..=50.0e9).contains(&frequency_hz) {
        return Err(ModelError::FrequencyOutOfRange { frequency_hz });
    }
    let f = frequency_hz / 1.0e9;
    let rp = pressure_pa / 100.0 / 1013.0;
    let rt = 288.0 / (273.0 + temperature_c);
    let phi = |a: f64, b: f64, c: f64, d: f64| {
        rp.powf(a) * rt.powf(b) * (c * (1.0 - rp) + d * (1.0 - rt)).exp()
    };
    let xi1 = phi(0.0717, -1.8132, 0.0156, -1.6515);
    let xi2 = phi(0.5146, -4.6368, -0.1921, -5.7416);
    let xi3 = phi(0.3414, -6.5851, 0.2130, -8.5854);

    let resonant = 7.2 * rt.powf(2.8) / (f * f + 0.34 * rp * rp * rt.powf(1.6));
    let wing = 0.62 * xi3 / ((54.0 - f).powf(1.16 * xi1) + 0.83 * xi2);
    Ok((resonant + wing) * f * f * rp * rp * 1.0e-3)
}

/// Spreading loss plus atmospheric loss of a ground–HAPS link, dB.
pub fn total_link_loss_db(distance_m: f64, radio: &RadioParams) -> f64 {
    fspl_db(distance_m, radio.frequency_hz) + radio.atmospheric_loss_db(distance_m)
}

pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

pub fn link_snr_db(link: &Link, radio: &RadioParams) -> f64 {
    link.tx_power_dbm + link.tx_gain_db + link.rx_gain_db
        - total_link_loss_db(link.distance_m, radio)
        - radio.noise_power_dbm()
}

pub fn link_snr_linear(link: &Link, radio: &RadioParams) -> f64 {
    db_to_linear(link_snr_db(link, radio))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn slant_radio() -> RadioParams {
        RadioParams {
            gaseous_path: GaseousPath::Slant,
            ..RadioParams::default()
        }
    }

    fn vacuum_radio() -> RadioParams {
        RadioParams {
            scintillation_db: 0.0,
            gaseous_path: GaseousPath::Column { height_m: 0.0 },
            ..RadioParams::default()
        }
    }

    #[test]
    fn slant_distance_examples() {
        assert_eq!(slant_distance(0.0, 20_000.0), 20_000.0);
        assert!((slant_distance(30_000.0, 20_000.0) - 36_055.5).abs() < 0.05);
        assert!((slant_distance(60_000.0, 20_000.0) - 63_245.6).abs() < 0.05);
    }

    #[test]
    fn elevation_examples() {
        assert!((elevation_angle(0.0, 20_000.0) - PI / 2.0).abs() < 1e-15);
        assert!((elevation_angle(20_000.0, 20_000.0) - PI / 4.0).abs() < 1e-15);
        assert!((elevation_angle(30_000.0, 20_000.0) - 0.5880).abs() < 5e-5);
    }

    #[test]
    fn fspl_examples() {
        assert!((fspl_db(20_000.0, 2.0e9) - 124.48).abs() < 0.01);
        let reference = SPEED_OF_LIGHT / 2.0e9 / (4.0 * PI);
        assert!(fspl_db(reference, 2.0e9).abs() < 1e-12);
        assert!((fspl_db(36_055.5, 2.0e9) - 129.60).abs() < 0.01);
    }

    #[test]
    fn dry_air_regression_and_window() {
        let gamma = dry_air_specific_attenuation(2.0e9, 101_300.0, 15.0).unwrap();
        assert!((gamma - 0.0067).abs() < 5e-5);
        // Frozen from the implementation at 2 GHz, standard atmosphere.
        assert!((gamma - 0.006_661_076_264_481_9).abs() < 1e-15);
        assert!((gamma * 36.0555 - 0.24).abs() < 0.005);

        let doubled = dry_air_specific_attenuation(2.0e9, 202_600.0, 15.0).unwrap();
        assert!(doubled > gamma);

        for f in [0.5e9, 50.1e9, 60.0e9] {
            assert!(matches!(
                dry_air_specific_attenuation(f, 101_300.0, 15.0),
                Err(ModelError::FrequencyOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn total_loss_examples() {
        let vacuum = vacuum_radio();
        assert!((total_link_loss_db(36_055.5, &vacuum) - fspl_db(36_055.5, 2.0e9)).abs() < 1e-12);
        assert!((total_link_loss_db(36_055.5, &slant_radio()) - 130.34).abs() < 0.01);
    }

    #[test]
    fn noise_examples() {
        assert!((noise_power_dbm(2.0e7, 5.0) + 95.99).abs() < 0.005);
        assert_eq!(noise_power_dbm(1.0, 0.0), -174.0);
        assert!((noise_power_dbm(2.0e7, 0.0) + 100.99).abs() < 0.005);
    }

    #[test]
    fn snr_examples() {
        let radio = vacuum_radio();
        let noise = radio.noise_power_dbm();
        // Pick the distance so that the loss exactly equals tx_power - noise.
        let tx_power = 30.0;
        let target_loss = tx_power - noise;
        let distance =
            SPEED_OF_LIGHT / (4.0 * PI * radio.frequency_hz) * 10f64.powf(target_loss / 20.0);
        let balanced = Link {
            distance_m: distance,
            tx_power_dbm: tx_power,
            tx_gain_db: 0.0,
            rx_gain_db: 0.0,
        };
        assert!((link_snr_linear(&balanced, &radio) - 1.0).abs() < 1e-9);

        let boosted = Link {
            tx_power_dbm: tx_power + 10.0 * 2f64.log10(),
            ..balanced
        };
        let ratio = link_snr_linear(&boosted, &radio) / link_snr_linear(&balanced, &radio);
        assert!((ratio - 2.0).abs() < 1e-12);

        let overhead = Link {
            distance_m: 20_000.0,
            tx_power_dbm: 33.0,
            tx_gain_db: 43.2,
            rx_gain_db: 15.0,
        };
        let snr_db = linear_to_db(link_snr_linear(&overhead, &slant_radio()));
        let expected = 33.0 + 43.2 + 15.0 - (124.4888 + 0.006661 * 20.0 + 0.5) - (-95.9897);
        assert!((snr_db - expected).abs() < 1e-3);
        assert!((snr_db - 62.0).abs() < 0.1);
    }

    #[test]
    fn geometry_rejects_out_of_corridor() {
        assert!(ScenarioGeometry::new(60_000.0, 20_000.0, -1.0).is_err());
        assert!(ScenarioGeometry::new(60_000.0, 20_000.0, 60_001.0).is_err());
        assert!(ScenarioGeometry::new(0.0, 20_000.0, 0.0).is_err());
        assert!(ScenarioGeometry::new(60_000.0, 0.0, 0.0).is_err());
        let g = ScenarioGeometry::new(60_000.0, 20_000.0, 60_000.0).unwrap();
        assert_eq!(g.gnb_slant_m(), 20_000.0);
    }

    proptest! {
        #[test]
        fn slant_dominates_legs(x in 0.0..1e6f64, h in 1.0..1e5f64) {
            let d = slant_distance(x, h);
            prop_assert!(d >= x.max(h));
            if x == 0.0 {
                prop_assert_eq!(d, h);
            } else {
                prop_assert!(d > h);
            }
        }

        #[test]
        fn fspl_doubling(d in 1.0..1e7f64, f in 1e8..1e11f64) {
            let delta = fspl_db(2.0 * d, f) - fspl_db(d, f);
            prop_assert!((delta - 20.0 * 2f64.log10()).abs() < 1e-9);
        }

        #[test]
        fn loss_monotone(d in 1_000.0..1e6f64, step in 1.0..1e4f64, f in 1.0e9..49.0e9f64, p in 50_000.0..150_000.0f64) {
            let radio = RadioParams { frequency_hz: f, pressure_pa: p, ..slant_radio() };
            prop_assert!(total_link_loss_db(d + step, &radio) > total_link_loss_db(d, &radio));
            let higher_f = RadioParams { frequency_hz: f + 0.5e9, ..radio };
            prop_assert!(total_link_loss_db(d, &higher_f) >= total_link_loss_db(d, &radio));
            let higher_p = RadioParams { pressure_pa: p * 1.1, ..radio };
            prop_assert!(total_link_loss_db(d, &higher_p) >= total_link_loss_db(d, &radio));
        }

        #[test]
        fn gain_shift_is_neutral(k in -20.0..20.0f64, tx_gain in 0.0..40.0f64, rx_gain in 0.0..40.0f64) {
            let radio = RadioParams::default();
            let a = Link { distance_m: 40_000.0, tx_power_dbm: 30.0, tx_gain_db: tx_gain, rx_gain_db: rx_gain };
            let b = Link { tx_gain_db: tx_gain - k, rx_gain_db: rx_gain + k, ..a };
            let (sa, sb) = (link_snr_linear(&a, &radio), link_snr_linear(&b, &radio));
            prop_assert!(((sa - sb) / sa).abs() < 1e-12);
        }

        #[test]
        fn noise_formula(b in 1.0..1e10f64, nf in 0.0..20.0f64) {
            let expected = -174.0 + 10.0 * b.log10() + nf;
            prop_assert!((noise_power_dbm(b, nf) - expected).abs() < 1e-12);
        }
    }
}
