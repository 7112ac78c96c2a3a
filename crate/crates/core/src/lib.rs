//! Link-budget, mode-selection and offloading models for a multi-mode HAPS
//! payload that can act as a base station (SMBS), a decode-and-forward relay
//! (RS) or a reconfigurable intelligent surface (RIS).

pub mod decision;
pub mod engine;
pub mod error;
pub mod modes;
pub mod offload;
pub mod optimizer;
pub mod propagation;
pub mod scenario;
pub mod search;
pub mod sweep;
pub mod table;
pub mod trace;

pub use decision::{Action, ModeDecision};
pub use engine::{
    handle_request, replay_trace, CacheState, DecisionRecord, Engine, EngineContext, EngineError,
    Replay, ReplaySummary, Request, RequestKind,
};
pub use error::ModelError;
pub use modes::{Mode, ModeConfigs, ModeResult, ModeSet, RisConfig, RsConfig, SmbsConfig};
pub use offload::{CloudConfig, ComputeTask, OffloadProfile};
pub use optimizer::{Objective, OperatingPoint};
pub use propagation::{GaseousPath, RadioParams, ScenarioGeometry};
pub use scenario::{ConfigError, Scenario, SweepRange, SweepVariable};
pub use sweep::Execution;
pub use table::Table;
