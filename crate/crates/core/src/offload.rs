//! Task-offloading latency: onboard computation on the base-station payload
//! versus forwarding through the relay or the surface to a ground cloud.

use crate::error::ModelError;
use crate::modes::{Mode, ModeConfigs};
use crate::optimizer::mode_capacity_bps_hz;
use crate::propagation::{RadioParams, ScenarioGeometry, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeTask {
    pub size_bits: f64,
    pub cycles_per_bit: f64,
}

impl ComputeTask {
    pub fn new(size_bits: f64, cycles_per_bit: f64) -> Result<Self, ModelError> {
        if !(size_bits.is_finite() && size_bits >= 0.0) {
            return Err(ModelError::invalid(
                "task.size_bits",
                "must be finite and >= 0",
            ));
        }
        if !(cycles_per_bit.is_finite() && cycles_per_bit > 0.0) {
            return Err(ModelError::invalid(
                "task.cycles_per_bit",
                "must be finite and > 0",
            ));
        }
        Ok(Self {
            size_bits,
            cycles_per_bit,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudConfig {
    pub cpu_hz: f64,
}

impl Default for CloudConfig {
    fn default() -> Self {
        Self { cpu_hz: 4.0e9 }
    }
}

impl CloudConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.cpu_hz.is_finite() && self.cpu_hz > 0.0 {
            Ok(())
        } else {
            Err(ModelError::invalid(
                "cloud.cpu_hz",
                "must be finite and > 0",
            ))
        }
    }
}

pub fn computation_latency(task: &ComputeTask, cpu_hz: f64) -> f64 {
    task.size_bits * task.cycles_per_bit / cpu_hz
}

pub fn transmission_latency(size_bits: f64, capacity_bps: f64) -> Result<f64, ModelError> {
    if capacity_bps > 0.0 {
        Ok(size_bits / capacity_bps)
    } else {
        Err(ModelError::Unreachable)
    }
}

pub fn propagation_latency(path_m: f64) -> f64 {
    path_m / SPEED_OF_LIGHT
}

/// Components of a one-way offload; result return traffic is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBreakdown {
    pub propagation_s: f64,
    pub transmission_s: f64,
    pub computation_s: f64,
}

impl LatencyBreakdown {
    pub fn total_s(&self) -> f64 {
        self.propagation_s + self.transmission_s + self.computation_s
    }
}

/// Fixed per-mode coefficients of the offload latency, which is affine in the
/// task size: `intercept + slope · S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffloadProfile {
    pub mode: Mode,
    pub path_m: f64,
    pub capacity_bps: f64,
    pub cpu_hz: f64,
}

impl OffloadProfile {
    /// Evaluates `mode` with the HAPS where `geom` puts it. The base station
    /// computes onboard; the relay and surface reach the cloud through the
    /// gateway.
    pub fn new(
        mode: Mode,
        geom: &ScenarioGeometry,
        radio: &RadioParams,
        configs: &ModeConfigs,
        cloud: &CloudConfig,
    ) -> Self {
        let (capacity, _) = mode_capacity_bps_hz(mode, geom, radio, configs);
        let (path_m, cpu_hz) = match mode {
            Mode::Smbs => (geom.gnb_slant_m(), configs.smbs.cpu_hz),
            Mode::Rs | Mode::Ris => (geom.gnb_slant_m() + geom.gateway_slant_m(), cloud.cpu_hz),
        };
        Self {
            mode,
            path_m,
            capacity_bps: capacity * radio.bandwidth_hz,
            cpu_hz,
        }
    }

    pub fn breakdown(&self, task: &ComputeTask) -> Result<LatencyBreakdown, ModelError> {
        Ok(LatencyBreakdown {
            propagation_s: propagation_latency(self.path_m),
            transmission_s: transmission_latency(task.size_bits, self.capacity_bps)?,
            computation_s: computation_latency(task, self.cpu_hz),
        })
    }

    pub fn latency(&self, task: &ComputeTask) -> Result<f64, ModelError> {
        self.breakdown(task).map(|b| b.total_s())
    }

    pub fn intercept_s(&self) -> f64 {
        propagation_latency(self.path_m)
    }

    pub fn slope_s_per_bit(&self, cycles_per_bit: f64) -> f64 {
        cycles_per_bit / self.cpu_hz + 1.0 / self.capacity_bps
    }
}

pub fn offload_latency(
    mode: Mode,
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    configs: &ModeConfigs,
    task: &ComputeTask,
    cloud: &CloudConfig,
) -> Result<LatencyBreakdown, ModelError> {
    OffloadProfile::new(mode, geom, radio, configs, cloud).breakdown(task)
}

/// Task size at which two affine latency profiles meet, if they cross at a
/// positive size. Found by bisection on the latency difference.
pub fn crossover_size_bits(
    first: &OffloadProfile,
    second: &OffloadProfile,
    cycles_per_bit: f64,
    max_size_bits: f64,
) -> Option<f64> {
    let diff = |s: f64| {
        let task = ComputeTask {
            size_bits: s,
            cycles_per_bit,
        };
        first
            .latency(&task)
            .ok()
            .zip(second.latency(&task).ok())
            .map(|(a, b)| a - b)
    };
    let (mut lo, mut hi) = (0.0, max_size_bits);
    let (d_lo, d_hi) = (diff(lo)?, diff(hi)?);
    if d_lo == 0.0 {
        return Some(0.0);
    }
    if d_lo.signum() == d_hi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d_mid = diff(mid)?;
        if d_mid.signum() == d_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-9 * hi.max(1.0) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}
