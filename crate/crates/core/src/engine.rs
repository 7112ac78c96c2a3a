//! Request-driven mode selection.
//!
//! Each request is classified (communication, content delivery, caching or
//! task offloading) and mapped to a payload mode and action. The engine owns
//! an onboard content cache whose state carries over from one request to the
//! next, so a trace must be processed in order by a single engine.
//!
//! The popularity policy is a cumulative per-item request counter: once an
//! item has been requested `popularity_threshold` times it is cached on the
//! next forward, evicting the least recently used entry when full.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::decision::{Action, ModeDecision};
use crate::error::ModelError;
use crate::modes::{Mode, ModeConfigs, ModeSet};
use crate::offload::{
    propagation_latency, transmission_latency, CloudConfig, ComputeTask, OffloadProfile,
};
use crate::optimizer::{best_operating_point, operating_point, Objective, OperatingPoint};
use crate::propagation::{RadioParams, ScenarioGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequestKind {
    Communication,
    ContentDelivery,
    Caching,
    TaskOffloading,
}

impl RequestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RequestKind::Communication => "communication",
            RequestKind::ContentDelivery => "content_delivery",
            RequestKind::Caching => "caching",
            RequestKind::TaskOffloading => "task_offloading",
        }
    }

    fn needs_content_id(&self) -> bool {
        matches!(self, RequestKind::ContentDelivery | RequestKind::Caching)
    }
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RequestKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "communication" => RequestKind::Communication,
            "content_delivery" => RequestKind::ContentDelivery,
            "caching" => RequestKind::Caching,
            "task_offloading" | "computation" => RequestKind::TaskOffloading,
            other => return Err(format!("unknown request kind `{other}`")),
        })
    }
}

/// One user request received over the control channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub t: f64,
    pub kind: RequestKind,
    pub content_id: Option<String>,
    /// Bits carried for communication, delivery and caching requests.
    pub payload_bits: Option<f64>,
    pub task: Option<ComputeTask>,
    pub objective: Option<Objective>,
    /// Minimum link rate for task offloading, bps.
    pub qos_min_bps: Option<f64>,
}

impl Request {
    pub fn communication(t: f64, objective: Objective, payload_bits: Option<f64>) -> Self {
        Self {
            t,
            kind: RequestKind::Communication,
            content_id: None,
            payload_bits,
            task: None,
            objective: Some(objective),
            qos_min_bps: None,
        }
    }

    pub fn content(t: f64, id: impl Into<String>, payload_bits: Option<f64>) -> Self {
        Self {
            t,
            kind: RequestKind::ContentDelivery,
            content_id: Some(id.into()),
            payload_bits,
            task: None,
            objective: None,
            qos_min_bps: None,
        }
    }

    pub fn caching(t: f64, id: impl Into<String>, payload_bits: Option<f64>) -> Self {
        Self {
            kind: RequestKind::Caching,
            ..Self::content(t, id, payload_bits)
        }
    }

    pub fn offload(t: f64, task: ComputeTask) -> Self {
        Self {
            t,
            kind: RequestKind::TaskOffloading,
            content_id: None,
            payload_bits: None,
            task: Some(task),
            objective: None,
            qos_min_bps: None,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let malformed = |reason: String| Err(EngineError::Malformed(reason));
        if !(self.t.is_finite() && self.t >= 0.0) {
            return malformed(format!(
                "arrival time must be finite and >= 0, got {}",
                self.t
            ));
        }
        match (&self.content_id, self.kind.needs_content_id()) {
            (None, true) => return malformed(format!("{} request needs a content_id", self.kind)),
            (Some(_), false) => {
                return malformed(format!("{} request must not carry a content_id", self.kind))
            }
            (Some(id), true) if id.is_empty() => return malformed("content_id is empty".into()),
            _ => {}
        }
        match (
            self.task.is_some(),
            self.kind == RequestKind::TaskOffloading,
        ) {
            (false, true) => return malformed("task_offloading request needs a task size".into()),
            (true, false) => {
                return malformed(format!("{} request must not carry a task", self.kind))
            }
            _ => {}
        }
        if let Some(task) = &self.task {
            ComputeTask::new(task.size_bits, task.cycles_per_bit)
                .map_err(|e| EngineError::Malformed(e.to_string()))?;
        }
        if self.kind == RequestKind::Communication && self.objective.is_none() {
            return malformed("communication request needs an objective".into());
        }
        if let Some(objective) = &self.objective {
            objective
                .validate()
                .map_err(|e| EngineError::Malformed(e.to_string()))?;
        }
        if let Some(bits) = self.payload_bits {
            if !(bits.is_finite() && bits >= 0.0) {
                return malformed(format!("size_bits must be finite and >= 0, got {bits}"));
            }
        }
        if let Some(qos) = self.qos_min_bps {
            if !(qos.is_finite() && qos > 0.0) {
                return malformed(format!("qos_bps must be finite and > 0, got {qos}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("malformed request: {0}")]
    Malformed(String),

    #[error("request {index}: {source}")]
    AtRequest {
        index: usize,
        #[source]
        source: Box<EngineError>,
    },

    #[error("arrival time {t} precedes previous request at {previous}")]
    OutOfOrder { t: f64, previous: f64 },

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Onboard content cache with least-recently-used eviction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheState {
    /// Oldest first.
    entries: VecDeque<String>,
    popularity: BTreeMap<String, u64>,
    capacity: usize,
    popularity_threshold: u64,
}

impl CacheState {
    pub fn new(capacity: usize, popularity_threshold: u64) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity),
            popularity: BTreeMap::new(),
            capacity,
            popularity_threshold: popularity_threshold.max(1),
        }
    }

    /// Cache pre-filled with `ids`, each counted as requested once.
    pub fn with_entries<I, S>(capacity: usize, popularity_threshold: u64, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut state = Self::new(capacity, popularity_threshold);
        for id in ids {
            let id = id.into();
            state.bump(&id);
            state.insert(id);
        }
        state
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.iter().any(|e| e == id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn popularity_threshold(&self) -> u64 {
        self.popularity_threshold
    }

    pub fn popularity(&self, id: &str) -> u64 {
        self.popularity.get(id).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    fn bump(&mut self, id: &str) -> u64 {
        let count = self.popularity.entry(id.to_owned()).or_insert(0);
        *count += 1;
        *count
    }

    fn touch(&mut self, id: &str) {
        if let Some(pos) = self.entries.iter().position(|e| e == id) {
            let entry = self.entries.remove(pos).expect("position is in range");
            self.entries.push_back(entry);
        }
    }

    /// Returns false when the cache has no room at all.
    fn insert(&mut self, id: String) -> bool {
        if self.capacity == 0 {
            return false;
        }
        if self.contains(&id) {
            self.touch(&id);
            return true;
        }
        while self.entries.len() >= self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(id);
        true
    }

    /// Occupancy within capacity and every cached item requested at least once.
    pub fn is_consistent(&self) -> bool {
        self.entries.len() <= self.capacity
            && self.entries.iter().all(|id| self.popularity(id) >= 1)
    }
}

/// Fixed scenario the engine decides in. Operating points are evaluated once
/// at construction because the HAPS does not move during a trace.
#[derive(Debug, Clone)]
pub struct EngineContext {
    geometry: ScenarioGeometry,
    radio: RadioParams,
    configs: ModeConfigs,
    enabled: ModeSet,
    /// Objective used to pick the forwarding mode when a delivery or caching
    /// request does not name one.
    pub default_objective: Objective,
    points: Vec<OperatingPoint>,
    offload: Vec<OffloadProfile>,
}

impl EngineContext {
    pub fn new(
        geometry: ScenarioGeometry,
        radio: RadioParams,
        configs: ModeConfigs,
        cloud: CloudConfig,
        enabled: ModeSet,
    ) -> Result<Self, ModelError> {
        radio.validate()?;
        configs.validate()?;
        cloud.validate()?;
        if enabled.is_empty() {
            return Err(ModelError::invalid(
                "modes.enabled",
                "at least one mode must be enabled",
            ));
        }
        let points = Mode::ALL
            .iter()
            .map(|&m| operating_point(m, &geometry, &radio, &configs))
            .collect::<Result<Vec<_>, _>>()?;
        let offload = Mode::ALL
            .iter()
            .map(|&m| OffloadProfile::new(m, &geometry, &radio, &configs, &cloud))
            .collect();
        Ok(Self {
            geometry,
            radio,
            configs,
            enabled,
            default_objective: Objective::MaxEnergyEfficiency,
            points,
            offload,
        })
    }

    pub fn enabled(&self) -> ModeSet {
        self.enabled
    }

    /// Same scenario restricted to `enabled`.
    pub fn restricted_to(&self, enabled: ModeSet) -> Self {
        Self {
            enabled,
            ..self.clone()
        }
    }

    pub fn geometry(&self) -> &ScenarioGeometry {
        &self.geometry
    }

    pub fn radio(&self) -> &RadioParams {
        &self.radio
    }

    pub fn configs(&self) -> &ModeConfigs {
        &self.configs
    }

    /// Operating point of `mode`, whether or not it is enabled.
    pub fn point(&self, mode: Mode) -> &OperatingPoint {
        self.points
            .iter()
            .find(|p| p.mode == mode)
            .expect("every mode evaluated")
    }

    fn profile(&self, mode: Mode) -> &OffloadProfile {
        self.offload
            .iter()
            .find(|p| p.mode == mode)
            .expect("every mode evaluated")
    }

    fn enabled_points(&self, modes: &[Mode]) -> Vec<OperatingPoint> {
        modes
            .iter()
            .filter(|m| self.enabled.contains(**m))
            .map(|&m| *self.point(m))
            .collect()
    }

    fn path_m(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Smbs => self.geometry.gnb_slant_m(),
            Mode::Rs | Mode::Ris => self.geometry.gnb_slant_m() + self.geometry.gateway_slant_m(),
        }
    }

    /// Time the payload of `mode` is on air to carry `bits`.
    pub fn airtime_s(&self, mode: Mode, bits: f64) -> Result<f64, ModelError> {
        transmission_latency(bits, self.point(mode).result.capacity_bps)
    }

    pub fn energy_j(&self, mode: Mode, bits: f64) -> Result<f64, ModelError> {
        Ok(self.point(mode).result.payload_power_w * self.airtime_s(mode, bits)?)
    }
}

/// A decision together with the request it answers.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub t: f64,
    pub kind: RequestKind,
    pub decision: ModeDecision,
    /// Bits the chosen payload carried over the air.
    pub carried_bits: f64,
    pub cache_hit: bool,
}

/// Stateful mode-selection engine.
#[derive(Debug, Clone)]
pub struct Engine {
    context: EngineContext,
    state: CacheState,
}

impl Engine {
    pub fn new(context: EngineContext, state: CacheState) -> Self {
        Self { context, state }
    }

    pub fn context(&self) -> &EngineContext {
        &self.context
    }

    pub fn state(&self) -> &CacheState {
        &self.state
    }

    pub fn into_state(self) -> CacheState {
        self.state
    }

    /// Decides one request. On error the cache state is left untouched.
    pub fn handle(&mut self, request: &Request) -> Result<DecisionRecord, EngineError> {
        request.validate()?;
        let mut next = self.state.clone();
        let record = decide(&self.context, &mut next, request)?;
        debug_assert!(record.decision.is_consistent());
        self.state = next;
        Ok(record)
    }
}

/// Functional form of [`Engine::handle`].
pub fn handle_request(
    request: &Request,
    state: &CacheState,
    context: &EngineContext,
) -> Result<(ModeDecision, CacheState), EngineError> {
    let mut engine = Engine::new(context.clone(), state.clone());
    let record = engine.handle(request)?;
    Ok((record.decision, engine.into_state()))
}

fn decide(
    ctx: &EngineContext,
    state: &mut CacheState,
    req: &Request,
) -> Result<DecisionRecord, EngineError> {
    let bits = req.payload_bits.unwrap_or(0.0);
    let record = |decision: ModeDecision, carried_bits: f64, cache_hit: bool| DecisionRecord {
        t: req.t,
        kind: req.kind,
        decision,
        carried_bits,
        cache_hit,
    };

    match req.kind {
        RequestKind::Communication => {
            let objective = req.objective.expect("validated");
            let points = ctx.enabled_points(&Mode::ALL);
            match best_operating_point(&objective, &points) {
                Some((point, _)) => {
                    let action = if point.mode == Mode::Smbs {
                        Action::ServeDirect
                    } else {
                        Action::ForwardViaGateway
                    };
                    let decision = carried(
                        ctx,
                        point.mode,
                        action,
                        objective.reported(&point),
                        req.payload_bits,
                    )?;
                    Ok(record(decision, bits, false))
                }
                None => Ok(record(
                    ModeDecision::infeasible(qos_of(&objective)),
                    0.0,
                    false,
                )),
            }
        }

        RequestKind::ContentDelivery => {
            let id = req.content_id.as_deref().expect("validated");
            let objective = req.objective.unwrap_or(ctx.default_objective);
            let count = state.bump(id);
            if ctx.enabled.contains(Mode::Smbs) && state.contains(id) {
                state.touch(id);
                let point = ctx.point(Mode::Smbs);
                let decision = carried(
                    ctx,
                    Mode::Smbs,
                    Action::ServeDirect,
                    objective.reported(point),
                    req.payload_bits,
                )?;
                return Ok(record(decision, bits, true));
            }
            let Some(point) = forwarding_choice(ctx, &objective) else {
                return Ok(record(
                    ModeDecision::infeasible(qos_of(&objective)),
                    0.0,
                    false,
                ));
            };
            let caches = ctx.enabled.contains(Mode::Smbs)
                && count >= state.popularity_threshold()
                && state.insert(id.to_owned());
            let action = if caches {
                Action::ForwardAndCache
            } else {
                Action::ForwardViaGateway
            };
            let decision = carried(
                ctx,
                point.mode,
                action,
                objective.reported(&point),
                req.payload_bits,
            )?;
            Ok(record(decision, bits, false))
        }

        RequestKind::Caching => {
            let id = req.content_id.as_deref().expect("validated");
            let objective = req.objective.unwrap_or(ctx.default_objective);
            if !ctx.enabled.contains(Mode::Smbs) || state.capacity() == 0 {
                return Ok(record(ModeDecision::infeasible(0.0), 0.0, false));
            }
            state.bump(id);
            if state.contains(id) {
                state.touch(id);
                let point = ctx.point(Mode::Smbs);
                let decision = carried(
                    ctx,
                    Mode::Smbs,
                    Action::ServeDirect,
                    objective.reported(point),
                    Some(0.0),
                )?;
                return Ok(record(decision, 0.0, false));
            }
            let Some(point) = forwarding_choice(ctx, &objective) else {
                return Ok(record(
                    ModeDecision::infeasible(qos_of(&objective)),
                    0.0,
                    false,
                ));
            };
            state.insert(id.to_owned());
            let decision = carried(
                ctx,
                point.mode,
                Action::ForwardAndCache,
                objective.reported(&point),
                req.payload_bits,
            )?;
            Ok(record(decision, bits, false))
        }

        RequestKind::TaskOffloading => {
            let task = req.task.expect("validated");
            let mut best: Option<(Mode, f64, f64)> = None;
            for mode in Mode::PASSIVE_FIRST {
                if !ctx.enabled.contains(mode) {
                    continue;
                }
                let profile = ctx.profile(mode);
                if req
                    .qos_min_bps
                    .is_some_and(|qos| profile.capacity_bps < qos)
                {
                    continue;
                }
                let breakdown = profile.breakdown(&task)?;
                let total = breakdown.total_s();
                if best.is_none_or(|(_, l, _)| total < l) {
                    best = Some((mode, total, breakdown.transmission_s));
                }
            }
            let Some((mode, latency, airtime)) = best else {
                return Ok(record(
                    ModeDecision::infeasible(req.qos_min_bps.unwrap_or(0.0)),
                    0.0,
                    false,
                ));
            };
            let decision = ModeDecision {
                mode: Some(mode),
                action: if mode == Mode::Smbs {
                    Action::ComputeOnboard
                } else {
                    Action::ComputeAtCloud
                },
                objective_value: latency,
                latency_s: Some(latency),
                energy_j: Some(ctx.point(mode).result.payload_power_w * airtime),
            };
            Ok(record(decision, task.size_bits, false))
        }
    }
}

fn forwarding_choice(ctx: &EngineContext, objective: &Objective) -> Option<OperatingPoint> {
    best_operating_point(objective, &ctx.enabled_points(&[Mode::Rs, Mode::Ris])).map(|(p, _)| p)
}

fn qos_of(objective: &Objective) -> f64 {
    match objective {
        Objective::MinEnergySubjectToQos { qos_min_bps } => *qos_min_bps,
        _ => 0.0,
    }
}

fn carried(
    ctx: &EngineContext,
    mode: Mode,
    action: Action,
    objective_value: f64,
    payload_bits: Option<f64>,
) -> Result<ModeDecision, ModelError> {
    let (latency_s, energy_j) = match payload_bits {
        Some(bits) => {
            let airtime = ctx.airtime_s(mode, bits)?;
            (
                Some(propagation_latency(ctx.path_m(mode)) + airtime),
                Some(ctx.point(mode).result.payload_power_w * airtime),
            )
        }
        None => (None, None),
    };
    Ok(ModeDecision {
        mode: Some(mode),
        action,
        objective_value,
        latency_s,
        energy_j,
    })
}

/// Aggregates over a replayed trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub requests: usize,
    pub activations: BTreeMap<Mode, usize>,
    pub infeasible: usize,
    pub total_energy_j: f64,
    pub content_requests: usize,
    pub cache_hits: usize,
    /// Energy had every carried bit gone through a single mode instead.
    pub single_mode_energy_j: BTreeMap<Mode, f64>,
}

impl ReplaySummary {
    pub fn cache_hit_rate(&self) -> f64 {
        if self.content_requests == 0 {
            0.0
        } else {
            self.cache_hits as f64 / self.content_requests as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub records: Vec<DecisionRecord>,
    pub final_state: CacheState,
    pub summary: ReplaySummary,
}

/// Folds `handle` over the trace. The first bad request aborts with its index.
pub fn replay_trace(
    trace: &[Request],
    initial: CacheState,
    context: &EngineContext,
) -> Result<Replay, EngineError> {
    let mut engine = Engine::new(context.clone(), initial);
    let mut records = Vec::with_capacity(trace.len());
    let mut previous = f64::NEG_INFINITY;
    for (index, request) in trace.iter().enumerate() {
        let at = |source: EngineError| EngineError::AtRequest {
            index,
            source: Box::new(source),
        };
        if request.t < previous {
            return Err(at(EngineError::OutOfOrder {
                t: request.t,
                previous,
            }));
        }
        previous = request.t;
        records.push(engine.handle(request).map_err(at)?);
    }
    let summary = summarize(&records, context)?;
    Ok(Replay {
        records,
        final_state: engine.into_state(),
        summary,
    })
}

fn summarize(records: &[DecisionRecord], ctx: &EngineContext) -> Result<ReplaySummary, ModelError> {
    let mut summary = ReplaySummary {
        requests: records.len(),
        activations: Mode::ALL.iter().map(|&m| (m, 0)).collect(),
        infeasible: 0,
        total_energy_j: 0.0,
        content_requests: 0,
        cache_hits: 0,
        single_mode_energy_j: Mode::ALL.iter().map(|&m| (m, 0.0)).collect(),
    };
    for r in records {
        match r.decision.mode {
            Some(mode) => *summary.activations.entry(mode).or_default() += 1,
            None => summary.infeasible += 1,
        }
        summary.total_energy_j += r.decision.energy_j.unwrap_or(0.0);
        if r.kind == RequestKind::ContentDelivery {
            summary.content_requests += 1;
            summary.cache_hits += usize::from(r.cache_hit);
        }
        if r.decision.mode.is_some() && r.carried_bits > 0.0 {
            for mode in Mode::ALL {
                *summary.single_mode_energy_j.entry(mode).or_default() +=
                    ctx.energy_j(mode, r.carried_bits)?;
            }
        }
    }
    Ok(summary)
}
