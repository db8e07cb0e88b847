//! Episodic decision-process wrapper around the slot engine.
//!
//! An episode starts from a fresh traffic matrix, link budget and
//! interference matrix and ends once every packet has been delivered or
//! dropped. Each step is one slot.
//!
//! Observations are flat `f32` vectors of length `2E + E²`:
//!
//! ```text
//! [ occupancy / capacity  (E) | occupancy / packets in system  (E) | I / max P_R  (E×E, row-major) ]
//! ```
//!
//! Actions are raw per-link reals; they are clamped to `[0, 1]` and rounded to
//! the 0.01 power grid before being applied.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::decision::ScheduleDecision;
use crate::error::{Error, Result};
use crate::radio::{gen_interference_geometric, gen_interference_synthetic, InterferenceMatrix, LinkBudget, NoiseRange};
use crate::rng::{derive_seed, seeded, stream};
use crate::sim::{gen_traffic, EpisodeState, StepOutcome, WorkloadKind};
use crate::topology::{RoutingTable, Topology};

/// Grid resolution of decoded actions.
pub const ACTION_LEVELS: u32 = 100;

pub fn state_dim(num_links: usize) -> usize {
    2 * num_links + num_links * num_links
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Weight of the dropped fraction.
    pub alpha: f64,
    /// Per-slot penalty.
    pub beta: f64,
}

impl RewardParams {
    /// Drop-sensitive agent.
    pub const DS: RewardParams = RewardParams { alpha: 10.0, beta: 1.0 };
    /// Drop-insensitive agent.
    pub const DI: RewardParams = RewardParams { alpha: 1.0, beta: 1.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be non-negative, got {}", self.beta)));
        }
        Ok(())
    }
}

impl Default for RewardParams {
    fn default() -> Self {
        Self::DS
    }
}

/// `−β − α·D/P + M/P`. Undefined for an empty system.
pub fn reward(o: &StepOutcome, p: &RewardParams) -> Result<f64> {
    if o.in_system_before == 0 {
        return Err(Error::Terminal);
    }
    let total = o.in_system_before as f64;
    Ok(-p.beta - p.alpha * (o.dropped as f64 / total) + o.moved as f64 / total)
}

/// Alternative reward: a per-slot penalty plus the slots delivered packets
/// spent beyond their shortest path.
pub fn delay_reward(o: &StepOutcome, step_penalty: f64) -> f64 {
    -step_penalty - o.excess_delay as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RewardKind {
    Drops(RewardParams),
    Delay { step_penalty: f64 },
}

impl Default for RewardKind {
    fn default() -> Self {
        Self::Drops(RewardParams::DS)
    }
}

/// Clamps to `[0, 1]` and rounds to the nearest 0.01, ties upward.
pub fn quantize_power(raw: f64) -> f64 {
    if raw.is_nan() {
        return 0.0;
    }
    let steps = ACTION_LEVELS as f64;
    (raw.clamp(0.0, 1.0) * steps + 0.5).floor() / steps
}

pub fn decode_action(raw: &[f32]) -> ScheduleDecision {
    ScheduleDecision::new(raw.iter().map(|&x| quantize_power(x as f64)).collect())
        .expect("quantized powers lie in [0, 1]")
}

/// Writes the observation for the given buffer occupancies into `out`.
pub fn encode_observation(
    occupancies: &[usize],
    capacity: usize,
    interference: &InterferenceMatrix,
    normalizer: f64,
    out: &mut Vec<f32>,
) {
    let e = occupancies.len();
    out.clear();
    out.reserve(state_dim(e));
    let cap = capacity as f64;
    out.extend(occupancies.iter().map(|&o| (o as f64 / cap).clamp(0.0, 1.0) as f32));
    let total: usize = occupancies.iter().sum();
    if total == 0 {
        out.extend(std::iter::repeat_n(0.0f32, e));
    } else {
        out.extend(occupancies.iter().map(|&o| (o as f64 / total as f64) as f32));
    }
    let scale = if normalizer > 0.0 { 1.0 / normalizer } else { 0.0 };
    out.extend(
        interference
            .as_slice()
            .iter()
            .map(|&v| (v * scale).clamp(0.0, 1.0) as f32),
    );
}

pub fn encode_state(st: &EpisodeState) -> Vec<f32> {
    let mut out = Vec::new();
    encode_observation(
        &st.occupancies(),
        st.topology().buffer_capacity(),
        st.interference(),
        st.budget().max_received_mw(),
        &mut out,
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum InterferenceMode {
    Synthetic { level: f64 },
    Geometric,
}

impl Default for InterferenceMode {
    fn default() -> Self {
        Self::Synthetic { level: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub workload: WorkloadKind,
    pub total_packets: u64,
    pub interference: InterferenceMode,
    #[serde(default)]
    pub noise: NoiseRange,
    #[serde(default)]
    pub reward: RewardKind,
    /// Episodes still running after this many slots are truncated.
    pub max_episode_slots: u64,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            workload: WorkloadKind::Uniform,
            total_packets: 2304,
            interference: InterferenceMode::default(),
            noise: NoiseRange::default(),
            reward: RewardKind::default(),
            max_episode_slots: 1000,
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if let InterferenceMode::Synthetic { level } = self.interference {
            if !(0.0..=1.0).contains(&level) {
                return Err(Error::Config(format!("interference level must be in [0, 1], got {level}")));
            }
        }
        if let RewardKind::Drops(p) = &self.reward {
            p.validate()?;
        }
        if self.max_episode_slots == 0 {
            return Err(Error::Config("max_episode_slots must be positive".into()));
        }
        Ok(())
    }
}

/// Builds the radio state and traffic for episode `index` of a seeded
/// sequence. Shared by the environment and the evaluation harness so both see
/// identical episodes for identical seeds.
pub fn build_episode(
    topology: &Arc<Topology>,
    routes: &Arc<RoutingTable>,
    config: &EnvConfig,
    index: u64,
) -> Result<EpisodeState> {
    let episode_seed = derive_seed(config.seed, index);
    let budget = LinkBudget::from_topology(
        topology,
        config.noise,
        &mut seeded(derive_seed(episode_seed, stream::BUDGET)),
    )?;
    let mut irng = seeded(derive_seed(episode_seed, stream::INTERFERENCE));
    let interference = match config.interference {
        InterferenceMode::Synthetic { level } => gen_interference_synthetic(&budget, level, &mut irng)?,
        InterferenceMode::Geometric => gen_interference_geometric(topology, &budget, config.noise, &mut irng)?,
    };
    let traffic = gen_traffic(
        topology,
        config.workload,
        config.total_packets,
        &mut seeded(derive_seed(episode_seed, stream::TRAFFIC)),
    )?;
    let mut st = EpisodeState::empty(
        topology.clone(),
        routes.clone(),
        budget,
        interference,
        derive_seed(episode_seed, stream::INJECTION),
    )?;
    st.inject_traffic(&traffic)?;
    Ok(st)
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub state: Vec<f32>,
    pub reward: f64,
    /// Every packet was delivered or dropped.
    pub done: bool,
    /// The slot limit was reached with packets still queued.
    pub truncated: bool,
    pub info: StepOutcome,
}

#[derive(Debug, Clone)]
pub struct MeshEnv {
    topology: Arc<Topology>,
    routes: Arc<RoutingTable>,
    config: EnvConfig,
    episode: Option<EpisodeState>,
    finished: bool,
    episodes_started: u64,
}

impl MeshEnv {
    pub fn new(topology: Arc<Topology>, config: EnvConfig) -> Result<Self> {
        let routes = Arc::new(RoutingTable::compute(&topology)?);
        Self::with_routes(topology, routes, config)
    }

    pub fn with_routes(topology: Arc<Topology>, routes: Arc<RoutingTable>, config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            topology,
            routes,
            config,
            episode: None,
            finished: true,
            episodes_started: 0,
        })
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn routes(&self) -> &Arc<RoutingTable> {
        &self.routes
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn num_links(&self) -> usize {
        self.topology.num_links()
    }

    pub fn state_dim(&self) -> usize {
        state_dim(self.num_links())
    }

    pub fn episode(&self) -> Option<&EpisodeState> {
        self.episode.as_ref()
    }

    pub fn episodes_started(&self) -> u64 {
        self.episodes_started
    }

    /// Starts the next episode in the seeded sequence.
    pub fn reset(&mut self) -> Result<Vec<f32>> {
        let st = build_episode(&self.topology, &self.routes, &self.config, self.episodes_started)?;
        self.episodes_started += 1;
        self.finished = st.is_terminal();
        let obs = encode_state(&st);
        self.episode = Some(st);
        Ok(obs)
    }

    /// Decodes a raw action and runs one slot.
    pub fn step(&mut self, raw_action: &[f32]) -> Result<EnvStep> {
        if raw_action.len() != self.num_links() {
            return Err(Error::Dimension {
                expected: self.num_links(),
                got: raw_action.len(),
            });
        }
        self.step_decision(&decode_action(raw_action))
    }

    /// Runs one slot with an already decoded decision.
    pub fn step_decision(&mut self, decision: &ScheduleDecision) -> Result<EnvStep> {
        if self.finished {
            return Err(Error::Terminal);
        }
        let st = self.episode.as_mut().ok_or(Error::Terminal)?;
        let info = st.apply_schedule(decision)?;
        let r = match &self.config.reward {
            RewardKind::Drops(p) => reward(&info, p)?,
            RewardKind::Delay { step_penalty } => delay_reward(&info, *step_penalty),
        };
        let done = st.is_terminal();
        let truncated = !done && st.slot() >= self.config.max_episode_slots;
        self.finished = done || truncated;
        Ok(EnvStep {
            state: encode_state(st),
            reward: r,
            done,
            truncated,
            info,
        })
    }
}
