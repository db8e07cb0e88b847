//! Scheduler-agnostic episode execution and per-episode metrics.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decision::ScheduleDecision;
use crate::env::{build_episode, encode_observation, decode_action, EnvConfig};
use crate::error::{Error, Result};
use crate::greedy::GreedyScheduler;
use crate::ppo::GaussianPolicy;
use crate::radio::{InterferenceMatrix, LinkBudget};
use crate::rng::{derive_seed, seeded, stream, SimRng};
use crate::sim::{EpisodeState, StepLog, WorkloadSampler};
use crate::topology::{RoutingTable, Topology};

/// What a scheduler sees when it decides a slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotView<'a> {
    pub occupancies: &'a [usize],
    pub capacity: usize,
    pub budget: &'a LinkBudget,
    pub interference: &'a InterferenceMatrix,
}

pub trait Scheduler {
    fn name(&self) -> &str;

    /// Called before each episode with that episode's seed.
    fn reset(&mut self, _episode_seed: u64) {}

    fn decide(&mut self, view: &SlotView) -> Result<ScheduleDecision>;
}

#[derive(Clone)]
pub struct GreedyAgent {
    inner: GreedyScheduler,
    rng: SimRng,
}

impl GreedyAgent {
    pub fn new(inner: GreedyScheduler) -> Self {
        Self { inner, rng: seeded(0) }
    }
}

impl Default for GreedyAgent {
    fn default() -> Self {
        Self::new(GreedyScheduler::default())
    }
}

impl Scheduler for GreedyAgent {
    fn name(&self) -> &str {
        "greedy"
    }

    fn reset(&mut self, episode_seed: u64) {
        self.rng = seeded(derive_seed(episode_seed, stream::SCHEDULER));
    }

    fn decide(&mut self, view: &SlotView) -> Result<ScheduleDecision> {
        Ok(self
            .inner
            .schedule(view.occupancies, view.budget, view.interference, &mut self.rng))
    }
}

/// Policy inference: encode, forward, decode.
///
/// By default the action is the policy mean. With [`PolicyAgent::sampling`]
/// the action is drawn from the policy, seeded per episode.
#[derive(Clone)]
pub struct PolicyAgent {
    policy: Arc<GaussianPolicy<f32>>,
    obs: Vec<f32>,
    sample: bool,
    rng: SimRng,
}

impl PolicyAgent {
    pub fn new(policy: impl Into<Arc<GaussianPolicy<f32>>>) -> Self {
        Self {
            policy: policy.into(),
            obs: Vec::new(),
            sample: false,
            rng: seeded(0),
        }
    }

    pub fn sampling(mut self, sample: bool) -> Self {
        self.sample = sample;
        self
    }

    pub fn is_sampling(&self) -> bool {
        self.sample
    }

    pub fn policy(&self) -> &GaussianPolicy<f32> {
        &self.policy
    }

    /// Fails unless the policy was built for `num_links` links.
    pub fn check_links(&self, num_links: usize) -> Result<()> {
        let dim = crate::env::state_dim(num_links);
        if self.policy.state_dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: self.policy.state_dim(),
            });
        }
        if self.policy.action_dim() != num_links {
            return Err(Error::Dimension {
                expected: num_links,
                got: self.policy.action_dim(),
            });
        }
        Ok(())
    }
}

impl Scheduler for PolicyAgent {
    fn name(&self) -> &str {
        "aarl"
    }

    fn reset(&mut self, episode_seed: u64) {
        self.rng = seeded(derive_seed(episode_seed, stream::POLICY));
    }

    fn decide(&mut self, view: &SlotView) -> Result<ScheduleDecision> {
        encode_observation(
            view.occupancies,
            view.capacity,
            view.interference,
            view.budget.max_received_mw(),
            &mut self.obs,
        );
        let a = self.policy.act(&self.obs, !self.sample, &mut self.rng)?;
        Ok(decode_action(&a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    /// Decide slot `t + 1` from the predicted buffers while slot `t` runs.
    pub lag: bool,
    pub max_slots: u64,
    /// Packets injected at the start of every slot instead of draining a
    /// fixed traffic matrix.
    pub continuous_rate: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: u64,
    pub injected: u64,
    pub delivered: u64,
    /// Dropped in flight or at injection.
    pub dropped: u64,
    /// Still queued when the run stopped.
    pub queued: u64,
    /// Packets counted as lost: drops, plus leftovers of a truncated drain.
    pub lost: u64,
    pub slots: u64,
    pub truncated: bool,
    pub goodput: f64,
    pub mean_decision_ms: f64,
}

/// Drives one episode to completion (or the slot limit) with `sched`.
pub fn run_episode<W: std::io::Write>(
    episode: u64,
    mut st: EpisodeState,
    sched: &mut dyn Scheduler,
    opts: &RunOptions,
    sampler: Option<&WorkloadSampler>,
    mut log: Option<&mut StepLog<W>>,
) -> Result<EpisodeMetrics> {
    let capacity = st.topology().buffer_capacity();
    let mut decide_ns: u128 = 0;
    let mut decisions: u64 = 0;
    let mut decide = |sched: &mut dyn Scheduler, st: &EpisodeState, occ: &[usize]| -> Result<ScheduleDecision> {
        let view = SlotView {
            occupancies: occ,
            capacity,
            budget: st.budget(),
            interference: st.interference(),
        };
        let t0 = Instant::now();
        let d = sched.decide(&view)?;
        decide_ns += t0.elapsed().as_nanos();
        decisions += 1;
        Ok(d)
    };

    let continuous = opts.continuous_rate.is_some();
    let mut lagged: Option<ScheduleDecision> = None;
    while st.slot() < opts.max_slots {
        if let (Some(rate), Some(s)) = (opts.continuous_rate, sampler) {
            st.inject_continuous(rate, s)?;
        }
        if !continuous && st.is_terminal() {
            break;
        }
        let d = match lagged.take() {
            Some(d) => d,
            None => decide(sched, &st, &st.occupancies())?,
        };
        if opts.lag {
            let predicted = st.predict_demand(&d)?;
            lagged = Some(decide(sched, &st, predicted.per_link())?);
        }
        let outcome = st.apply_schedule(&d)?;
        if let Some(l) = log.as_deref_mut() {
            l.record(&outcome)?;
        }
    }

    let totals = st.totals();
    let queued = st.in_system();
    let truncated = !continuous && queued > 0;
    let lost = totals.dropped + if truncated { queued } else { 0 };
    let goodput = if totals.injected == 0 {
        100.0
    } else {
        100.0 * (1.0 - lost as f64 / totals.injected as f64)
    };
    Ok(EpisodeMetrics {
        episode,
        injected: totals.injected,
        delivered: totals.delivered,
        dropped: totals.dropped,
        queued,
        lost,
        slots: totals.slots,
        truncated,
        goodput,
        mean_decision_ms: if decisions == 0 {
            0.0
        } else {
            decide_ns as f64 / decisions as f64 / 1e6
        },
    })
}

/// Runs episodes `first..first + count` of the seeded sequence described by
/// `config`.
pub fn evaluate(
    sched: &mut dyn Scheduler,
    topology: &Arc<Topology>,
    routes: &Arc<RoutingTable>,
    config: &EnvConfig,
    opts: &RunOptions,
    first: u64,
    count: u64,
) -> Result<Vec<EpisodeMetrics>> {
    (first..first + count)
        .map(|i| {
            let (st, sampler) = prepare_episode(topology, routes, config, opts, i)?;
            sched.reset(derive_seed(config.seed, i));
            run_episode::<std::io::Sink>(i, st, sched, opts, sampler.as_ref(), None)
        })
        .collect()
}

/// Builds episode `index`; in continuous mode the buffers start empty and a
/// sampler for per-slot arrivals is returned.
pub fn prepare_episode(
    topology: &Arc<Topology>,
    routes: &Arc<RoutingTable>,
    config: &EnvConfig,
    opts: &RunOptions,
    index: u64,
) -> Result<(EpisodeState, Option<WorkloadSampler>)> {
    if opts.continuous_rate.is_none() {
        return Ok((build_episode(topology, routes, config, index)?, None));
    }
    let empty = EnvConfig {
        total_packets: 0,
        ..config.clone()
    };
    let st = build_episode(topology, routes, &empty, index)?;
    let mut rng = seeded(derive_seed(derive_seed(config.seed, index), stream::TRAFFIC));
    let sampler = WorkloadSampler::new(config.workload, topology.num_nodes(), &mut rng)?;
    Ok((st, Some(sampler)))
}

/// The evaluation episodes kept apart from training episodes.
pub fn held_out(config: &EnvConfig) -> EnvConfig {
    EnvConfig {
        seed: derive_seed(config.seed, 0x4845_4c44),
        ..config.clone()
    }
}

/// Mean and population standard deviation.
pub fn mean_std(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.into_iter().collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
