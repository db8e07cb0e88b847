use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{clip_grad_norm, Adam};
use super::checkpoint::Checkpoint;
use super::loss::{ppo_loss, Batch, LossConfig, LossStats};
use super::policy::ActorCritic;
use super::rollout::{normalize, RolloutBuffer};
use crate::env::MeshEnv;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, stream};
use crate::runner::{evaluate, held_out, mean_std, PolicyAgent, RunOptions};
use crate::topology::TopologyKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub clip_epsilon: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub rollout_len: usize,
    pub total_steps: u64,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    pub one_sided_clip: bool,
    pub checkpoint_interval: u64,
    /// Held-out episodes evaluated at each checkpoint for early stopping.
    pub eval_episodes: u64,
    /// Evaluate with sampled actions rather than the policy mean.
    pub eval_sample: bool,
    /// Relative spread of the last three checkpoint rewards that counts as a
    /// plateau.
    pub plateau_tolerance: f64,
    pub early_stop: bool,
    /// Completed episodes averaged into each reward-curve row.
    pub reward_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            clip_epsilon: 0.2,
            gamma: 0.99,
            gae_lambda: 0.95,
            epochs: 10,
            minibatch_size: 256,
            rollout_len: 2048,
            total_steps: 1_200_000,
            seed: 0,
            hidden: vec![256, 256],
            value_coef: 0.5,
            entropy_coef: 0.01,
            max_grad_norm: 0.5,
            one_sided_clip: false,
            checkpoint_interval: 50_000,
            eval_episodes: 10,
            eval_sample: true,
            plateau_tolerance: 0.05,
            early_stop: true,
            reward_window: 100,
        }
    }
}

impl TrainConfig {
    /// Network width, minibatch size and step budget used for each topology.
    pub fn for_topology(kind: TopologyKind) -> Self {
        let base = Self::default();
        match kind {
            TopologyKind::Small10 => base,
            TopologyKind::Medium48 => Self {
                hidden: vec![1024, 1024],
                total_steps: 6_000_000,
                ..base
            },
            TopologyKind::Large96 => Self {
                hidden: vec![4096, 4096],
                minibatch_size: 512,
                total_steps: 6_000_000,
                ..base
            },
        }
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            clip_epsilon: self.clip_epsilon,
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
            one_sided: self.one_sided_clip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return bad("clip_epsilon must lie in (0, 1)");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) || !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return bad("gamma and gae_lambda must lie in (0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 || self.minibatch_size == 0 || self.rollout_len == 0 || self.checkpoint_interval == 0 {
            return bad("epochs, minibatch_size, rollout_len and checkpoint_interval must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden sizes must be positive");
        }
        if self.max_grad_norm <= 0.0 || self.value_coef < 0.0 || self.entropy_coef < 0.0 {
            return bad("max_grad_norm must be positive and loss coefficients non-negative");
        }
        if self.reward_window == 0 {
            return bad("reward_window must be positive");
        }
        Ok(())
    }
}

/// Greedy statistics on the held-out episodes, used by the early-stop rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub episodes: u64,
    pub mean_lost: f64,
    pub mean_goodput: f64,
    pub mean_slots: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub step: u64,
    pub mean_reward: f64,
    pub mean_episode_len: f64,
    pub drop_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub step: u64,
    pub mean_lost: f64,
    pub mean_goodput: f64,
    pub mean_slots: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub steps: u64,
    pub updates: usize,
    pub checkpoints: Vec<PathBuf>,
    pub curve: Vec<CurveRow>,
    pub evals: Vec<EvalSummary>,
    pub early_stopped: bool,
    pub model: ActorCritic<f32>,
    pub last_loss: Option<LossStats>,
}

pub const CURVE_FILE: &str = "reward_curve.csv";

pub fn checkpoint_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("checkpoint_{step:09}.ckpt"))
}

#[derive(Debug, Clone, Copy)]
struct FinishedEpisode {
    reward: f64,
    slots: u64,
    injected: u64,
    lost: u64,
}

/// Trains a policy on `env`, writing checkpoints and the reward curve into
/// `out_dir`. `on_checkpoint` sees each curve row as it is produced.
pub fn train(
    env: &mut MeshEnv,
    cfg: &TrainConfig,
    out_dir: &Path,
    baseline: Option<&Baseline>,
    mut on_checkpoint: impl FnMut(&CurveRow, Option<&EvalSummary>),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let e = env.num_links();
    let dim = env.state_dim();
    let mut model = ActorCritic::<f32>::new(dim, &cfg.hidden, e, &mut seeded(derive_seed(cfg.seed, stream::POLICY)));
    let mut act_rng = seeded(derive_seed(cfg.seed, stream::EPISODE));
    let mut shuffle_rng = seeded(derive_seed(cfg.seed, stream::SCHEDULER));
    let shapes: Vec<usize> = model.tensors().iter().map(|t| t.len()).collect();
    let mut opt = Adam::<f32>::new(&shapes, cfg.learning_rate);
    let loss_cfg = cfg.loss_config();

    let mut out = TrainOutcome {
        steps: 0,
        updates: 0,
        checkpoints: Vec::new(),
        curve: Vec::new(),
        evals: Vec::new(),
        early_stopped: false,
        model: model.clone(),
        last_loss: None,
    };
    let mut curve_csv = csv::Writer::from_path(out_dir.join(CURVE_FILE))?;

    let env_config = env.config().clone();
    let save = |model: &ActorCritic<f32>, step: u64, out: &mut TrainOutcome| -> Result<()> {
        let path = checkpoint_path(out_dir, step);
        Checkpoint::new(model.clone(), step, cfg.clone(), env_config.clone()).save(&path)?;
        out.checkpoints.push(path);
        Ok(())
    };
    save(&model, 0, &mut out)?;

    let eval_env = held_out(env.config());
    let eval_opts = RunOptions {
        lag: false,
        max_slots: env.config().max_episode_slots,
        continuous_rate: None,
    };

    let mut buffer = RolloutBuffer::new(dim, e);
    let mut finished: VecDeque<FinishedEpisode> = VecDeque::new();
    let mut ep_reward = 0.0;
    let mut state = env.reset()?;
    let mut step: u64 = 0;
    let mut grads = model.zeros_like();

    'outer: while step < cfg.total_steps {
        buffer.clear();
        let mut last_done = false;
        while buffer.len() < cfg.rollout_len && step < cfg.total_steps {
            let value = model.value.predict_one(&state)? as f64;
            let (action, log_prob) = model.policy.sample(&state, &mut act_rng)?;
            let s = env.step(&action)?;
            step += 1;
            ep_reward += s.reward;
            let mut reward = s.reward;
            if s.truncated {
                reward += cfg.gamma * model.value.predict_one(&s.state)? as f64;
            }
            let ended = s.done || s.truncated;
            buffer.push(&state, &action, log_prob, reward, value, ended);
            last_done = ended;
            if ended {
                let ep = env.episode().expect("episode in progress");
                let totals = ep.totals();
                let queued = ep.in_system();
                finished.push_back(FinishedEpisode {
                    reward: ep_reward,
                    slots: totals.slots,
                    injected: totals.injected,
                    lost: totals.dropped + queued,
                });
                if finished.len() > cfg.reward_window {
                    finished.pop_front();
                }
                ep_reward = 0.0;
                state = env.reset()?;
            } else {
                state = s.state;
            }

            if step.is_multiple_of(cfg.checkpoint_interval) {
                let row = curve_row(step, &finished);
                curve_csv.serialize(row)?;
                curve_csv.flush()?;
                out.curve.push(row);
                save(&model, step, &mut out)?;
                let eval = if cfg.early_stop && cfg.eval_episodes > 0 {
                    let mut agent = PolicyAgent::new(model.policy.clone()).sampling(cfg.eval_sample);
                    let m = evaluate(&mut agent, env.topology(), env.routes(), &eval_env, &eval_opts, 0, cfg.eval_episodes)?;
                    let summary = EvalSummary {
                        step,
                        mean_lost: mean_std(m.iter().map(|x| x.lost as f64)).0,
                        mean_goodput: mean_std(m.iter().map(|x| x.goodput)).0,
                        mean_slots: mean_std(m.iter().map(|x| x.slots as f64)).0,
                    };
                    out.evals.push(summary);
                    Some(summary)
                } else {
                    None
                };
                on_checkpoint(&row, eval.as_ref());
                if let (Some(b), Some(ev)) = (baseline, eval) {
                    if plateaued(&out.curve, cfg.plateau_tolerance) && ev.mean_lost <= b.mean_lost {
                        out.early_stopped = true;
                        break 'outer;
                    }
                }
            }
        }

        let last_value = if last_done {
            0.0
        } else {
            model.value.predict_one(&state)? as f64
        };
        buffer.compute_gae(last_value, cfg.gamma, cfg.gae_lambda)?;
        normalize(&mut buffer.advantages);
        out.last_loss = Some(update(&mut model, &mut grads, &mut opt, &buffer, cfg, &loss_cfg, &mut shuffle_rng, out.updates)?);
        out.updates += 1;
    }

    if out.checkpoints.last() != Some(&checkpoint_path(out_dir, step)) {
        save(&model, step, &mut out)?;
    }
    curve_csv.flush()?;
    out.steps = step;
    out.model = model;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn update(
    model: &mut ActorCritic<f32>,
    grads: &mut ActorCritic<f32>,
    opt: &mut Adam<f32>,
    buffer: &RolloutBuffer,
    cfg: &TrainConfig,
    loss_cfg: &LossConfig,
    rng: &mut crate::rng::SimRng,
    update_index: usize,
) -> Result<LossStats> {
    let n = buffer.len();
    let dim = buffer.state_dim();
    let e = buffer.action_dim();
    let mut idx: Vec<usize> = (0..n).collect();
    let mb = cfg.minibatch_size.min(n);
    let mut last = LossStats::default();
    for _ in 0..cfg.epochs {
        idx.shuffle(rng);
        for chunk in idx.chunks(mb) {
            let b = chunk.len();
            let mut states = Array2::<f32>::zeros((b, dim));
            let mut actions = Array2::<f32>::zeros((b, e));
            let mut old = Vec::with_capacity(b);
            let mut adv = Vec::with_capacity(b);
            let mut ret = Vec::with_capacity(b);
            for (r, &i) in chunk.iter().enumerate() {
                states
                    .row_mut(r)
                    .as_slice_mut()
                    .expect("contiguous")
                    .copy_from_slice(&buffer.states[i * dim..(i + 1) * dim]);
                actions
                    .row_mut(r)
                    .as_slice_mut()
                    .expect("contiguous")
                    .copy_from_slice(&buffer.actions[i * e..(i + 1) * e]);
                old.push(buffer.log_probs[i]);
                adv.push(buffer.advantages[i] as f32);
                ret.push(buffer.returns[i] as f32);
            }
            let batch = Batch {
                states: states.view(),
                actions: actions.view(),
                old_log_probs: &old,
                advantages: &adv,
                returns: &ret,
            };
            last = ppo_loss(model, &batch, loss_cfg, grads).map_err(|err| match err {
                Error::NonFiniteLoss { .. } => Error::NonFiniteLoss { update: update_index },
                other => other,
            })?;
            clip_grad_norm(grads.tensors_mut(), cfg.max_grad_norm);
            let g = grads.tensors();
            opt.update(model.tensors_mut(), &g);
        }
    }
    Ok(last)
}

fn curve_row(step: u64, finished: &VecDeque<FinishedEpisode>) -> CurveRow {
    if finished.is_empty() {
        return CurveRow {
            step,
            mean_reward: f64::NAN,
            mean_episode_len: f64::NAN,
            drop_rate: f64::NAN,
        };
    }
    let n = finished.len() as f64;
    let injected: u64 = finished.iter().map(|f| f.injected).sum();
    let lost: u64 = finished.iter().map(|f| f.lost).sum();
    CurveRow {
        step,
        mean_reward: finished.iter().map(|f| f.reward).sum::<f64>() / n,
        mean_episode_len: finished.iter().map(|f| f.slots as f64).sum::<f64>() / n,
        drop_rate: if injected == 0 { 0.0 } else { lost as f64 / injected as f64 },
    }
}

/// True when the last three checkpoint rewards lie within `tol` of each
/// other, relative to their magnitude.
pub fn plateaued(curve: &[CurveRow], tol: f64) -> bool {
    if curve.len() < 3 {
        return false;
    }
    let last: Vec<f64> = curve[curve.len() - 3..].iter().map(|r| r.mean_reward).collect();
    if last.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let hi = last.iter().cloned().fold(f64::MIN, f64::max);
    let lo = last.iter().cloned().fold(f64::MAX, f64::min);
    let scale = last.iter().map(|v| v.abs()).fold(1.0, f64::max);
    hi - lo <= tol * scale
}
