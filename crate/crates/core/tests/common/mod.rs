#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use meshsched::ppo::{ppo_loss, ActorCritic, Batch, LossConfig};
use meshsched::rng::seeded;

pub struct GradCheck {
    /// Largest elementwise `|analytic − numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_rel_error: f64,
    /// `‖analytic − numeric‖ / (‖analytic‖ + ‖numeric‖)`.
    pub norm_rel_error: f64,
    pub parameters: usize,
}

/// Central-difference check of every parameter of a `[4, 8, 8, 2]`
/// actor-critic under the full clipped loss, on a batch of `samples`.
pub fn ppo_gradient_check(seed: u64, samples: usize, h: f64, floor: f64) -> GradCheck {
    let mut rng = seeded(seed);
    let mut model = ActorCritic::<f64>::new(4, &[8, 8], 2, &mut rng);
    // Move log-std and the output heads off their initial values so every
    // term carries a gradient of ordinary size.
    for (i, t) in model.tensors_mut().into_iter().enumerate() {
        for v in t.iter_mut() {
            *v += 0.3 * rng.random_range(-1.0..1.0) * if i == 6 { 1.0 } else { 0.5 };
        }
    }
    let states = Array2::from_shape_fn((samples, 4), |_| rng.random_range(0.0..1.0));
    let mean = model.policy.mean_batch(states.view()).unwrap();
    let actions = Array2::from_shape_fn((samples, 2), |(i, j)| {
        let n: f64 = StandardNormal.sample(&mut rng);
        mean[[i, j]] + 0.6 * n
    });
    let old: Vec<f64> = (0..samples)
        .map(|i| {
            let lp = model
                .policy
                .log_prob(actions.row(i).as_slice().unwrap(), mean.row(i).as_slice().unwrap())
                .unwrap();
            lp + rng.random_range(-0.5..0.5)
        })
        .collect();
    let adv: Vec<f64> = (0..samples).map(|_| StandardNormal.sample(&mut rng)).collect();
    let ret: Vec<f64> = (0..samples).map(|_| rng.random_range(-2.0..2.0)).collect();
    let batch = Batch {
        states: states.view(),
        actions: actions.view(),
        old_log_probs: &old,
        advantages: &adv,
        returns: &ret,
    };
    let cfg = LossConfig::default();

    let mut grads = model.zeros_like();
    ppo_loss(&model, &batch, &cfg, &mut grads).unwrap();
    let analytic: Vec<f64> = grads.tensors().iter().flat_map(|t| t.iter().copied()).collect();

    let loss_at = |m: &ActorCritic<f64>| {
        let mut g = m.zeros_like();
        ppo_loss(m, &batch, &cfg, &mut g).unwrap().total
    };
    let mut numeric = Vec::with_capacity(analytic.len());
    let shapes: Vec<usize> = model.tensors().iter().map(|t| t.len()).collect();
    for (ti, &len) in shapes.iter().enumerate() {
        for k in 0..len {
            let mut plus = model.clone();
            plus.tensors_mut()[ti][k] += h;
            let mut minus = model.clone();
            minus.tensors_mut()[ti][k] -= h;
            numeric.push((loss_at(&plus) - loss_at(&minus)) / (2.0 * h));
        }
    }

    let mut max_rel: f64 = 0.0;
    let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
    for (&a, &n) in analytic.iter().zip(&numeric) {
        max_rel = max_rel.max((a - n).abs() / a.abs().max(n.abs()).max(floor));
        diff += (a - n) * (a - n);
        na += a * a;
        nn += n * n;
    }
    GradCheck {
        max_rel_error: max_rel,
        norm_rel_error: diff.sqrt() / (na.sqrt() + nn.sqrt()).max(f64::MIN_POSITIVE),
        parameters: analytic.len(),
    }
}
