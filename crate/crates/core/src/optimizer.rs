//! Power-split and placement optimisation, and objective-driven mode choice
//! for a single communication demand.

use std::fmt;

use crate::decision::{Action, ModeDecision};
use crate::error::ModelError;
use crate::modes::{
    mode_payload_power_w, ris_capacity, rs_capacity_at, smbs_access_capacity, Mode, ModeConfigs,
    ModeResult, ModeSet,
};
use crate::propagation::{RadioParams, ScenarioGeometry};
use crate::search::{golden_section_max, grid_then_golden};

/// Absolute tolerance on the power split.
pub const ALPHA_TOLERANCE: f64 = 1e-5;

/// Default horizontal resolution of the placement grid scan, meters.
pub const DEFAULT_PLACEMENT_STEP_M: f64 = 100.0;

const PLACEMENT_TOLERANCE_M: f64 = 1e-3;

// Keeps log10(alpha) and log10(1 - alpha) finite.
const ALPHA_EDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaOptimum {
    pub alpha: f64,
    pub capacity_bps_hz: f64,
    pub iterations: usize,
}

/// Power split maximising the relay's end-to-end capacity.
pub fn optimize_alpha(geom: &ScenarioGeometry, radio: &RadioParams) -> AlphaOptimum {
    let found = golden_section_max(
        |alpha| rs_capacity_at(geom, radio, alpha).unwrap_or(0.0),
        ALPHA_EDGE,
        1.0 - ALPHA_EDGE,
        ALPHA_TOLERANCE,
    );
    AlphaOptimum {
        alpha: found.argmax,
        capacity_bps_hz: found.value,
        iterations: found.iterations,
    }
}

/// Closed-form surface placements minimising the product of slant ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RisPositions {
    Pair(f64, f64),
    /// `degenerate` is set when the altitude exceeds half the corridor and
    /// the midpoint is only the projection of the unconstrained optimum.
    Single {
        x_m: f64,
        degenerate: bool,
    },
}

impl RisPositions {
    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            RisPositions::Pair(a, b) => vec![a, b],
            RisPositions::Single { x_m, .. } => vec![x_m],
        }
    }
}

pub fn optimal_ris_positions(ground_distance_m: f64, altitude_m: f64) -> RisPositions {
    let half = ground_distance_m / 2.0;
    if altitude_m < half {
        let offset = (half * half - altitude_m * altitude_m).sqrt();
        RisPositions::Pair(half - offset, half + offset)
    } else {
        RisPositions::Single {
            x_m: half,
            degenerate: altitude_m > half,
        }
    }
}

/// Operating point of one mode at a fixed placement. The relay is always
/// evaluated at its optimal power split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub mode: Mode,
    pub alpha: Option<f64>,
    pub result: ModeResult,
}

pub fn mode_capacity_bps_hz(
    mode: Mode,
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    configs: &ModeConfigs,
) -> (f64, Option<f64>) {
    match mode {
        Mode::Smbs => (smbs_access_capacity(geom, radio), None),
        Mode::Rs => {
            let best = optimize_alpha(geom, radio);
            (best.capacity_bps_hz, Some(best.alpha))
        }
        Mode::Ris => (ris_capacity(geom, radio, &configs.ris), None),
    }
}

pub fn operating_point(
    mode: Mode,
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    configs: &ModeConfigs,
) -> Result<OperatingPoint, ModelError> {
    let (capacity, alpha) = mode_capacity_bps_hz(mode, geom, radio, configs);
    Ok(OperatingPoint {
        mode,
        alpha,
        result: ModeResult::new(
            capacity,
            radio.bandwidth_hz,
            mode_payload_power_w(mode, configs),
        )?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementResult {
    pub x_opt_m: f64,
    /// Mirror optimum of equal value, reported for the surface.
    pub x_alt_m: Option<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

/// Horizontal placement maximising the mode's capacity: grid scan at
/// `step_m` then golden-section refinement in the winning cell. The surface
/// is bimodal in x, so each half-corridor is searched on its own.
pub fn optimize_placement_numeric(
    mode: Mode,
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    configs: &ModeConfigs,
    step_m: f64,
) -> PlacementResult {
    let span = geom.ground_distance_m();
    let objective = |x: f64| {
        let placed = geom
            .with_offset(x.clamp(0.0, span))
            .expect("offset clamped into corridor");
        mode_capacity_bps_hz(mode, &placed, radio, configs).0
    };

    if mode != Mode::Ris {
        let best = grid_then_golden(objective, 0.0, span, step_m, PLACEMENT_TOLERANCE_M);
        return PlacementResult {
            x_opt_m: best.argmax,
            x_alt_m: None,
            objective_value: best.value,
            iterations: best.iterations,
        };
    }

    let half = span / 2.0;
    let near = grid_then_golden(objective, 0.0, half, step_m, PLACEMENT_TOLERANCE_M);
    let far = grid_then_golden(objective, half, span, step_m, PLACEMENT_TOLERANCE_M);
    let iterations = near.iterations + far.iterations;
    let (best, other) = if far.value > near.value {
        (far, near)
    } else {
        (near, far)
    };
    let tied = (best.value - other.value).abs() <= 1e-9 * best.value.abs();
    PlacementResult {
        x_opt_m: best.argmax,
        x_alt_m: (tied && (best.argmax - other.argmax).abs() > step_m).then_some(other.argmax),
        objective_value: best.value,
        iterations,
    }
}

/// Geometry with the HAPS moved to the mode's own optimum: above the gNB for
/// the base station, numeric search for the relay, closed form (the root
/// nearer the gNB) for the surface.
pub fn place_at_mode_optimum(
    mode: Mode,
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    configs: &ModeConfigs,
) -> ScenarioGeometry {
    let x = match mode {
        Mode::Smbs => geom.ground_distance_m(),
        Mode::Rs => {
            optimize_placement_numeric(Mode::Rs, geom, radio, configs, DEFAULT_PLACEMENT_STEP_M)
                .x_opt_m
        }
        Mode::Ris => match optimal_ris_positions(geom.ground_distance_m(), geom.altitude_m()) {
            RisPositions::Pair(_, far) => far,
            RisPositions::Single { x_m, .. } => x_m,
        },
    };
    geom.with_offset(x)
        .expect("optimum lies inside the corridor")
}

/// What a communication demand optimises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    MaxCapacity,
    MaxEnergyEfficiency,
    MinEnergySubjectToQos { qos_min_bps: f64 },
}

impl Objective {
    pub fn validate(&self) -> Result<(), ModelError> {
        if let Objective::MinEnergySubjectToQos { qos_min_bps } = *self {
            if !(qos_min_bps.is_finite() && qos_min_bps > 0.0) {
                return Err(ModelError::invalid(
                    "objective.qos_min_bps",
                    "must be finite and > 0",
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::MaxCapacity => "max_capacity",
            Objective::MaxEnergyEfficiency => "max_energy_efficiency",
            Objective::MinEnergySubjectToQos { .. } => "min_energy",
        }
    }

    /// Parses the objective token of a request; `qos_bps` is required for the
    /// constrained kind.
    pub fn parse(token: &str, qos_bps: Option<f64>) -> Result<Self, String> {
        match token {
            "max_capacity" => Ok(Objective::MaxCapacity),
            "max_energy_efficiency" | "max_ee" => Ok(Objective::MaxEnergyEfficiency),
            "min_energy" | "min_energy_subject_to_qos" => match qos_bps {
                Some(qos_min_bps) => Ok(Objective::MinEnergySubjectToQos { qos_min_bps }),
                None => Err("objective `min_energy` needs a qos_bps value".to_string()),
            },
            other => Err(format!(
                "unknown objective `{other}` (expected max_capacity, max_energy_efficiency or min_energy)"
            )),
        }
    }

    /// Score of an operating point; larger is better. `None` if the point
    /// violates the objective's constraint.
    fn score(&self, point: &OperatingPoint) -> Option<f64> {
        match *self {
            Objective::MaxCapacity => Some(point.result.capacity_bps),
            Objective::MaxEnergyEfficiency => Some(point.result.energy_efficiency_bits_per_joule),
            Objective::MinEnergySubjectToQos { qos_min_bps } => {
                (point.result.capacity_bps >= qos_min_bps).then_some(-point.result.payload_power_w)
            }
        }
    }

    /// Reported objective value: bps, bits/J or W.
    pub(crate) fn reported(&self, point: &OperatingPoint) -> f64 {
        match self {
            Objective::MaxCapacity => point.result.capacity_bps,
            Objective::MaxEnergyEfficiency => point.result.energy_efficiency_bits_per_joule,
            Objective::MinEnergySubjectToQos { .. } => point.result.payload_power_w,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Picks the best enabled operating point for `objective`; ties go to the
/// most passive mode.
pub fn best_operating_point(
    objective: &Objective,
    points: &[OperatingPoint],
) -> Option<(OperatingPoint, f64)> {
    let mut best: Option<(OperatingPoint, f64)> = None;
    for mode in Mode::PASSIVE_FIRST {
        let Some(point) = points.iter().find(|p| p.mode == mode) else {
            continue;
        };
        let Some(score) = objective.score(point) else {
            continue;
        };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((*point, score));
        }
    }
    best
}

/// Evaluates every enabled mode at the current placement and returns the one
/// that best serves `objective`.
pub fn select_mode_for_communication(
    objective: &Objective,
    geom: &ScenarioGeometry,
    radio: &RadioParams,
    configs: &ModeConfigs,
    enabled: ModeSet,
) -> Result<ModeDecision, ModelError> {
    objective.validate()?;
    if enabled.is_empty() {
        return Err(ModelError::invalid(
            "modes.enabled",
            "at least one mode must be enabled",
        ));
    }
    let points = Mode::ALL
        .iter()
        .filter(|m| enabled.contains(**m))
        .map(|&m| operating_point(m, geom, radio, configs))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(match best_operating_point(objective, &points) {
        Some((point, _)) => ModeDecision {
            mode: Some(point.mode),
            action: if point.mode == Mode::Smbs {
                Action::ServeDirect
            } else {
                Action::ForwardViaGateway
            },
            objective_value: objective.reported(&point),
            latency_s: None,
            energy_j: None,
        },
        None => ModeDecision::infeasible(match objective {
            Objective::MinEnergySubjectToQos { qos_min_bps } => *qos_min_bps,
            _ => 0.0,
        }),
    })
}
