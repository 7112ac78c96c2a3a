use std::fmt;
use std::str::FromStr;

use crate::modes::Mode;

/// What the payload does with a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    ServeDirect,
    ForwardViaGateway,
    ForwardAndCache,
    ComputeOnboard,
    ComputeAtCloud,
    Infeasible,
}

impl Action {
    pub fn as_str(&self) -> &'static str {
        match self {
            Action::ServeDirect => "serve_direct",
            Action::ForwardViaGateway => "forward_via_gateway",
            Action::ForwardAndCache => "forward_and_cache",
            Action::ComputeOnboard => "compute_onboard",
            Action::ComputeAtCloud => "compute_at_cloud",
            Action::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "serve_direct" => Action::ServeDirect,
            "forward_via_gateway" => Action::ForwardViaGateway,
            "forward_and_cache" => Action::ForwardAndCache,
            "compute_onboard" => Action::ComputeOnboard,
            "compute_at_cloud" => Action::ComputeAtCloud,
            "infeasible" => Action::Infeasible,
            other => return Err(format!("unknown action `{other}`")),
        })
    }
}

/// Mode chosen for one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDecision {
    /// `None` only for infeasible requests.
    pub mode: Option<Mode>,
    pub action: Action,
    pub objective_value: f64,
    pub latency_s: Option<f64>,
    pub energy_j: Option<f64>,
}

impl ModeDecision {
    pub fn infeasible(objective_value: f64) -> Self {
        Self {
            mode: None,
            action: Action::Infeasible,
            objective_value,
            latency_s: None,
            energy_j: None,
        }
    }

    /// Serving from the cache and onboard computing need the base-station
    /// payload; forwarding needs the relay or the surface.
    pub fn is_consistent(&self) -> bool {
        matches!(
            (self.action, self.mode),
            (Action::Infeasible, None)
                | (
                    Action::ServeDirect | Action::ComputeOnboard,
                    Some(Mode::Smbs)
                )
                | (
                    Action::ForwardViaGateway | Action::ForwardAndCache | Action::ComputeAtCloud,
                    Some(Mode::Rs | Mode::Ris)
                )
        )
    }
}
