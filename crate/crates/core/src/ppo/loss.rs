use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::mlp::Real;
use super::policy::{gaussian_log_prob, ActorCritic};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub clip_epsilon: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Clip the ratio from above only.
    pub one_sided: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            clip_epsilon: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.01,
            one_sided: false,
        }
    }
}

/// One minibatch, one sample per row.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a, F> {
    pub states: ArrayView2<'a, F>,
    pub actions: ArrayView2<'a, F>,
    pub old_log_probs: &'a [F],
    pub advantages: &'a [F],
    pub returns: &'a [F],
}

impl<F> Batch<'_, F> {
    pub fn len(&self) -> usize {
        self.states.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    /// Largest `|ratio − 1|` in the batch.
    pub max_ratio_dev: f64,
}

/// Clipped surrogate plus value and entropy terms. Gradients of the total
/// loss are written into `grads`, which must have the model's shapes.
pub fn ppo_loss<F: Real>(
    model: &ActorCritic<F>,
    batch: &Batch<F>,
    cfg: &LossConfig,
    grads: &mut ActorCritic<F>,
) -> Result<LossStats> {
    let b = batch.len();
    let e = model.policy.action_dim();
    if b == 0 {
        return Err(Error::Config("empty minibatch".into()));
    }
    for (expected, got) in [
        (e, batch.actions.ncols()),
        (b, batch.actions.nrows()),
        (b, batch.old_log_probs.len()),
        (b, batch.advantages.len()),
        (b, batch.returns.len()),
    ] {
        if expected != got {
            return Err(Error::Dimension { expected, got });
        }
    }

    let log_std = model.policy.log_std.as_slice().expect("contiguous");
    let inv_var: Vec<F> = log_std.iter().map(|&ls| (-(ls + ls)).exp()).collect();
    let (mu, pcache) = model.policy.mean_train(batch.states)?;
    let inv_b = F::one() / F::lit(b as f64);
    let eps = F::lit(cfg.clip_epsilon);
    let lo = F::one() - eps;
    let hi = F::one() + eps;

    let mut dz = Array2::<F>::zeros((b, e));
    let mut d_log_std = vec![F::zero(); e];
    let mut policy_loss = F::zero();
    let mut clipped = 0usize;
    let mut kl = F::zero();
    let mut max_dev = 0.0f64;

    for i in 0..b {
        let a = batch.actions.row(i);
        let m = mu.row(i);
        let a = a.as_slice().expect("contiguous rows");
        let m = m.as_slice().expect("contiguous rows");
        let lp = gaussian_log_prob(a, m, log_std);
        let log_ratio = lp - batch.old_log_probs[i];
        let r = log_ratio.exp();
        let adv = batch.advantages[i];
        let c = if cfg.one_sided { r.min(hi) } else { r.max(lo).min(hi) };
        let surr = r * adv;
        let surr_clip = c * adv;
        policy_loss = policy_loss - surr.min(surr_clip);
        kl = kl + (r - F::one()) - log_ratio;
        max_dev = max_dev.max((r - F::one()).abs().to_f64_lossy());
        // The unclipped branch carries the gradient when it is the minimum or
        // when clipping did not change the ratio.
        let flows = surr <= surr_clip || c == r;
        if !flows {
            clipped += 1;
            continue;
        }
        if c != r {
            clipped += 1;
        }
        let g = -(adv * r) * inv_b;
        for j in 0..e {
            let diff = a[j] - m[j];
            dz[[i, j]] = g * diff * inv_var[j] * m[j] * (F::one() - m[j]);
            d_log_std[j] = d_log_std[j] + g * (diff * diff * inv_var[j] - F::one());
        }
    }
    policy_loss = policy_loss * inv_b;

    model.policy.mean.backward(&pcache, dz.view(), &mut grads.policy.mean);
    let ent_coef = F::lit(cfg.entropy_coef);
    for (g, d) in grads.policy.log_std.iter_mut().zip(&d_log_std) {
        *g = *d - ent_coef;
    }

    let (v, vcache) = model.value.net.forward_train(batch.states)?;
    let vc = F::lit(cfg.value_coef);
    let mut dv = Array2::<F>::zeros((b, 1));
    let mut value_loss = F::zero();
    for i in 0..b {
        let err = v[[i, 0]] - batch.returns[i];
        value_loss = value_loss + err * err;
        dv[[i, 0]] = vc * (err + err) * inv_b;
    }
    value_loss = value_loss * inv_b;
    model.value.net.backward(&vcache, dv.view(), &mut grads.value.net);

    let entropy = model.policy.entropy();
    let total = policy_loss + vc * value_loss - ent_coef * entropy;
    let stats = LossStats {
        total: total.to_f64_lossy(),
        policy: policy_loss.to_f64_lossy(),
        value: value_loss.to_f64_lossy(),
        entropy: entropy.to_f64_lossy(),
        clip_fraction: clipped as f64 / b as f64,
        approx_kl: (kl * inv_b).to_f64_lossy(),
        max_ratio_dev: max_dev,
    };
    if !stats.total.is_finite() {
        return Err(Error::NonFiniteLoss { update: 0 });
    }
    Ok(stats)
}
