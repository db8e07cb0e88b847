//! Scenario configuration files.
//!
//! All sections are optional; omitted fields take the defaults shown here.
//!
//! ```toml
//! [topology]
//! kind = "small-10"          # or: file = "mesh.topo"
//! seed = 7                   # generator seed for built-in kinds
//! # buffer_capacity = 650
//!
//! [traffic]
//! workload = "uniform"       # uniform | few-to-many | many-to-few
//! total_packets = 2304
//! # continuous_rate = 200    # per-slot arrivals instead of a drained matrix
//!
//! [interference]
//! mode = "synthetic"         # or: mode = "geometric"
//! level = 0.2
//!
//! [scheduler]
//! kind = "greedy"            # or: kind = "policy", checkpoint = "path"
//! power_levels = 11
//! loss_model = "linear"      # linear | exact
//! sample_actions = true      # false: use the policy mean
//!
//! [reward]
//! kind = "drops"
//! alpha = 10.0
//! beta = 1.0
//!
//! [run]
//! episodes = 30
//! seed = 1
//! lag = false
//! max_slots = 1000
//! out = "out"
//! threads = 1
//! normalize = false          # pair every run with greedy
//!
//! [sweep]
//! levels = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
//!
//! [bench]
//! topologies = ["small-10", "medium-48", "large-96"]
//! workloads = ["uniform", "few-to-many", "many-to-few"]
//! decisions = 30
//! warmup = 5
//!
//! [train]                    # overrides on top of the per-topology defaults
//! total_steps = 1200000
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, InterferenceMode, RewardKind, RewardParams};
use crate::error::{Error, Result};
use crate::greedy::{GreedyScheduler, LossModel};
use crate::ppo::TrainConfig;
use crate::radio::NoiseRange;
use crate::rng::seeded;
use crate::runner::RunOptions;
use crate::sim::WorkloadKind;
use crate::topology::{Topology, TopologyKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    /// Built-in topology; `small-10` when neither this nor `file` is set.
    pub kind: Option<TopologyKind>,
    pub file: Option<PathBuf>,
    pub seed: u64,
    pub buffer_capacity: Option<usize>,
}

impl Default for TopologySection {
    fn default() -> Self {
        Self {
            kind: None,
            file: None,
            seed: 7,
            buffer_capacity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub workload: WorkloadKind,
    pub total_packets: u64,
    pub continuous_rate: Option<u64>,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            workload: WorkloadKind::Uniform,
            total_packets: 2304,
            continuous_rate: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    #[default]
    Greedy,
    Policy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerSection {
    pub kind: SchedulerKind,
    pub checkpoint: Option<PathBuf>,
    pub power_levels: usize,
    pub loss_model: LossModel,
    /// Sample policy actions (seeded per episode) instead of taking the mean.
    pub sample_actions: bool,
}

impl Default for SchedulerSection {
    fn default() -> Self {
        Self {
            kind: SchedulerKind::Greedy,
            checkpoint: None,
            power_levels: 11,
            loss_model: LossModel::Linear,
            sample_actions: true,
        }
    }
}

impl SchedulerSection {
    pub fn greedy(&self) -> GreedyScheduler {
        GreedyScheduler::new(self.power_levels, self.loss_model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub episodes: u64,
    pub seed: u64,
    pub lag: bool,
    pub max_slots: u64,
    pub out: PathBuf,
    pub threads: usize,
    pub normalize: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            episodes: 30,
            seed: 1,
            lag: false,
            max_slots: 1000,
            out: PathBuf::from("out"),
            threads: 1,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub levels: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            levels: (0..=10).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub topologies: Vec<TopologyKind>,
    pub workloads: Vec<WorkloadKind>,
    pub decisions: usize,
    pub warmup: usize,
    /// Optional trained checkpoints, one per topology in `topologies` order.
    /// Missing entries are timed with freshly initialized networks of the
    /// same shape.
    pub checkpoints: Vec<PathBuf>,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            topologies: vec![TopologyKind::Small10, TopologyKind::Medium48, TopologyKind::Large96],
            workloads: WorkloadKind::ALL.to_vec(),
            decisions: 30,
            warmup: 5,
            checkpoints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub topology: TopologySection,
    pub traffic: TrafficSection,
    pub interference: InterferenceMode,
    pub noise: NoiseRange,
    pub scheduler: SchedulerSection,
    pub reward: RewardKind,
    pub run: RunSection,
    pub sweep: SweepSection,
    pub bench: BenchSection,
    /// Training hyperparameters that differ from the topology's defaults.
    pub train: Option<toml::Table>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.topology;
        match (&t.kind, &t.file) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("topology: set either kind or file, not both".into()));
            }
            (None, Some(f)) if !f.exists() => {
                return Err(Error::Config(format!("topology file {} does not exist", f.display())));
            }
            _ => {}
        }
        if t.buffer_capacity == Some(0) {
            return Err(Error::Config("buffer_capacity must be positive".into()));
        }
        if self.scheduler.power_levels < 2 {
            return Err(Error::Config("power_levels must be at least 2".into()));
        }
        if self.scheduler.kind == SchedulerKind::Policy {
            match &self.scheduler.checkpoint {
                None => return Err(Error::Config("policy scheduler needs a checkpoint".into())),
                Some(p) if !p.exists() => {
                    return Err(Error::Config(format!("checkpoint {} does not exist", p.display())));
                }
                _ => {}
            }
        }
        if self.run.max_slots == 0 {
            return Err(Error::Config("max_slots must be positive".into()));
        }
        for &level in &self.sweep.levels {
            let tenths = level * 10.0;
            if !(0.0..=1.0).contains(&level) || (tenths - tenths.round()).abs() > 1e-9 {
                return Err(Error::Config(format!("sweep level {level} is not one of 0, 0.1, ..., 1.0")));
            }
        }
        if self.bench.decisions < 30 {
            return Err(Error::Config("bench.decisions must be at least 30".into()));
        }
        if self.train.is_some() {
            self.train_config()?.validate()?;
        }
        self.env_config().validate()
    }

    pub fn load_topology(&self) -> Result<Arc<Topology>> {
        let mut rng = seeded(self.topology.seed);
        let mut topo = match (&self.topology.kind, &self.topology.file) {
            (_, Some(f)) => Topology::load(f, &mut rng)?,
            (k, None) => Topology::generate(k.unwrap_or_default(), &mut rng)?,
        };
        if let Some(c) = self.topology.buffer_capacity {
            topo = topo.with_buffer_capacity(c)?;
        }
        Ok(Arc::new(topo))
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            workload: self.traffic.workload,
            total_packets: self.traffic.total_packets,
            interference: self.interference,
            noise: self.noise,
            reward: self.reward,
            max_episode_slots: self.run.max_slots,
            seed: self.run.seed,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            lag: self.run.lag,
            max_slots: self.run.max_slots,
            continuous_rate: self.traffic.continuous_rate,
        }
    }

    /// Training hyperparameters: the per-topology defaults with the `[train]`
    /// section applied on top. The run seed is always used.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let mut tc = TrainConfig::for_topology(self.topology.kind.unwrap_or_default());
        if let Some(overrides) = &self.train {
            let mut table = toml::Table::try_from(&tc).map_err(|e| Error::Config(e.to_string()))?;
            for (k, v) in overrides {
                if !table.contains_key(k) {
                    return Err(Error::Config(format!("train: unknown field `{k}`")));
                }
                table.insert(k.clone(), v.clone());
            }
            tc = table.try_into().map_err(|e: toml::de::Error| Error::Config(format!("train: {e}")))?;
        }
        tc.seed = self.run.seed;
        Ok(tc)
    }

    /// Replaces the `[train]` section with every field of `tc`.
    pub fn set_train(&mut self, tc: &TrainConfig) {
        self.train = Some(toml::Table::try_from(tc).expect("train config serializes"));
    }

    pub fn reward_params(&self) -> Option<RewardParams> {
        match self.reward {
            RewardKind::Drops(p) => Some(p),
            RewardKind::Delay { .. } => None,
        }
    }
}
