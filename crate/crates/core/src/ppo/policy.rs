use ndarray::{Array1, Array2, ArrayView2};
use rand_distr::{Distribution, StandardNormal};

use super::mlp::{Mlp, MlpCache, Real};
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub const LOG_STD_INIT: f64 = -0.5;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

pub(crate) fn sigmoid<F: Real>(z: F) -> F {
    F::one() / (F::one() + (-z).exp())
}

/// Diagonal Gaussian over per-link raw powers. The mean is a sigmoid of the
/// network output; the standard deviation is a free per-link parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy<F> {
    pub mean: Mlp<F>,
    pub log_std: Array1<F>,
}

impl<F: Real> GaussianPolicy<F> {
    pub fn new(sizes: &[usize], rng: &mut SimRng) -> Self {
        let mean = Mlp::init(sizes, 0.01, rng);
        let log_std = Array1::from_elem(mean.output_dim(), F::lit(LOG_STD_INIT));
        Self { mean, log_std }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        let mean = Mlp::zeros(sizes);
        let log_std = Array1::from_elem(mean.output_dim(), F::lit(LOG_STD_INIT));
        Self { mean, log_std }
    }

    pub fn state_dim(&self) -> usize {
        self.mean.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.mean.output_dim()
    }

    pub fn mean_one(&self, state: &[F]) -> Result<Vec<F>> {
        let mut z = self.mean.forward_one(state)?;
        z.iter_mut().for_each(|v| *v = sigmoid(*v));
        Ok(z)
    }

    pub fn mean_batch(&self, states: ArrayView2<F>) -> Result<Array2<F>> {
        Ok(self.mean.forward(states)?.mapv(sigmoid))
    }

    pub(crate) fn mean_train(&self, states: ArrayView2<F>) -> Result<(Array2<F>, MlpCache<F>)> {
        let (z, cache) = self.mean.forward_train(states)?;
        Ok((z.mapv(sigmoid), cache))
    }

    /// Raw action for `state`: the mean when `deterministic`, otherwise a
    /// Gaussian sample. Clamping and quantization happen in the environment.
    pub fn act(&self, state: &[F], deterministic: bool, rng: &mut SimRng) -> Result<Vec<F>> {
        let mut a = self.mean_one(state)?;
        if !deterministic {
            for (v, &ls) in a.iter_mut().zip(self.log_std.iter()) {
                let n: f64 = StandardNormal.sample(rng);
                *v = *v + ls.exp() * F::lit(n);
            }
        }
        Ok(a)
    }

    /// Samples an action and returns it with its log-density.
    pub fn sample(&self, state: &[F], rng: &mut SimRng) -> Result<(Vec<F>, F)> {
        let mean = self.mean_one(state)?;
        let mut a = mean.clone();
        for (v, &ls) in a.iter_mut().zip(self.log_std.iter()) {
            let n: f64 = StandardNormal.sample(rng);
            *v = *v + ls.exp() * F::lit(n);
        }
        let lp = self.log_prob(&a, &mean)?;
        Ok((a, lp))
    }

    pub fn log_prob(&self, action: &[F], mean: &[F]) -> Result<F> {
        if action.len() != self.action_dim() || mean.len() != self.action_dim() {
            return Err(Error::Dimension {
                expected: self.action_dim(),
                got: action.len().min(mean.len()),
            });
        }
        Ok(gaussian_log_prob(action, mean, self.log_std.as_slice().expect("contiguous")))
    }

    pub fn entropy(&self) -> F {
        self.log_std.iter().fold(F::zero(), |s, &ls| s + ls + F::lit(0.5 + HALF_LN_2PI))
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.log_std.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn gaussian_log_prob<F: Real>(action: &[F], mean: &[F], log_std: &[F]) -> F {
    let half = F::lit(0.5);
    let c = F::lit(HALF_LN_2PI);
    action
        .iter()
        .zip(mean)
        .zip(log_std)
        .fold(F::zero(), |s, ((&a, &m), &ls)| {
            let z = (a - m) / ls.exp();
            s - half * z * z - ls - c
        })
}

/// State-value estimator with a scalar linear head.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet<F> {
    pub net: Mlp<F>,
}

impl<F: Real> ValueNet<F> {
    pub fn new(state_dim: usize, hidden: &[usize], rng: &mut SimRng) -> Self {
        Self {
            net: Mlp::init(&value_sizes(state_dim, hidden), 1.0, rng),
        }
    }

    pub fn predict_one(&self, state: &[F]) -> Result<F> {
        Ok(self.net.forward_one(state)?[0])
    }

    pub fn predict_batch(&self, states: ArrayView2<F>) -> Result<Array1<F>> {
        Ok(self.net.forward(states)?.column(0).to_owned())
    }
}

pub fn policy_sizes(state_dim: usize, hidden: &[usize], action_dim: usize) -> Vec<usize> {
    let mut s = vec![state_dim];
    s.extend_from_slice(hidden);
    s.push(action_dim);
    s
}

pub fn value_sizes(state_dim: usize, hidden: &[usize]) -> Vec<usize> {
    policy_sizes(state_dim, hidden, 1)
}

/// Policy and value networks trained together.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic<F> {
    pub policy: GaussianPolicy<F>,
    pub value: ValueNet<F>,
}

impl<F: Real> ActorCritic<F> {
    pub fn new(state_dim: usize, hidden: &[usize], action_dim: usize, rng: &mut SimRng) -> Self {
        let policy = GaussianPolicy::new(&policy_sizes(state_dim, hidden, action_dim), rng);
        let value = ValueNet::new(state_dim, hidden, rng);
        Self { policy, value }
    }

    pub fn hidden(&self) -> Vec<usize> {
        let s = self.policy.mean.sizes();
        s[1..s.len() - 1].to_vec()
    }

    /// Same shapes, all parameters zero. Used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        Self {
            policy: GaussianPolicy {
                mean: self.policy.mean.zeros_like(),
                log_std: Array1::zeros(self.policy.action_dim()),
            },
            value: ValueNet {
                net: self.value.net.zeros_like(),
            },
        }
    }

    /// Every parameter tensor: policy layers, log-std, value layers.
    pub fn tensors(&self) -> Vec<&[F]> {
        let mut t = self.policy.mean.tensors();
        t.push(self.policy.log_std.as_slice().expect("contiguous"));
        t.extend(self.value.net.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [F]> {
        let mut t = self.policy.mean.tensors_mut();
        t.push(self.policy.log_std.as_slice_mut().expect("contiguous"));
        t.extend(self.value.net.tensors_mut());
        t
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.policy.is_finite() && self.value.net.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_policy_means_half() {
        let p = GaussianPolicy::<f32>::zeros(&[6, 8, 8, 3]);
        let a = p.act(&[0.3; 6], true, &mut seeded(0)).unwrap();
        assert_eq!(a, vec![0.5; 3]);
    }

    #[test]
    fn deterministic_act_repeats() {
        let p = GaussianPolicy::<f32>::new(&[6, 8, 8, 3], &mut seeded(1));
        let s = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let a = p.act(&s, true, &mut seeded(2)).unwrap();
        let b = p.act(&s, true, &mut seeded(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn log_std_starts_at_init() {
        let p = GaussianPolicy::<f64>::new(&[4, 8, 2], &mut seeded(1));
        assert!(p.log_std.iter().all(|&v| v == LOG_STD_INIT));
        assert!(p.log_std.iter().all(|v| v.exp() > 0.0));
    }

    #[test]
    fn log_prob_at_mean() {
        let p = GaussianPolicy::<f64>::zeros(&[2, 2]);
        let lp = p.log_prob(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!((lp - 2.0 * (0.5 - HALF_LN_2PI)).abs() < 1e-12);
    }

    #[test]
    fn entropy_formula() {
        let p = GaussianPolicy::<f64>::zeros(&[2, 3]);
        assert!((p.entropy() - 3.0 * (-0.5 + 0.5 + HALF_LN_2PI)).abs() < 1e-12);
    }

    #[test]
    fn tensor_count() {
        let ac = ActorCritic::<f32>::new(120, &[256, 256], 10, &mut seeded(0));
        assert_eq!(ac.policy.mean.num_parameters(), 99_338);
        assert_eq!(ac.num_parameters(), 99_338 + 10 + 97_025);
    }
}
