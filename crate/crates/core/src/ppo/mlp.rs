use std::fmt::Debug;

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis, LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Floating point types the networks can be instantiated over. Training and
/// inference use `f32`; gradient checks use `f64`.
pub trait Real:
    LinalgScalar + Float + FromPrimitive + ScalarOperand + Debug + Default + Send + Sync + std::iter::Sum + 'static
{
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("representable constant")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Trainable parameters of a fully connected network with sizes `sizes`.
pub fn count_parameters(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Affine layer. `weight` is stored `out × in` so a single input row is a
/// sequence of contiguous dot products.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F> {
    pub weight: Array2<F>,
    pub bias: Array1<F>,
}

impl<F: Real> Dense<F> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }
}

/// Fully connected network: affine layers with ReLU between them and a linear
/// final layer. Output heads are applied by the owner.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<F> {
    layers: Vec<Dense<F>>,
}

/// Layer inputs saved by [`Mlp::forward_train`] for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache<F> {
    inputs: Vec<Array2<F>>,
}

impl<F: Real> Mlp<F> {
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "a network needs input and output sizes");
        assert!(sizes.iter().all(|&s| s > 0), "layer sizes must be positive");
        Self {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    /// He-uniform hidden layers, zero biases, final layer scaled by `head_gain`.
    pub fn init(sizes: &[usize], head_gain: f64, rng: &mut SimRng) -> Self {
        let mut net = Self::zeros(sizes);
        let last = net.layers.len() - 1;
        for (k, layer) in net.layers.iter_mut().enumerate() {
            let mut bound = (6.0 / layer.inputs() as f64).sqrt();
            if k == last {
                bound *= head_gain;
            }
            layer.weight.mapv_inplace(|_| F::lit(rng.random_range(-bound..=bound)));
        }
        net
    }

    pub fn from_layers(layers: Vec<Dense<F>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network has no layers".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.bias.len() != l.outputs() {
                return Err(Error::Dimension {
                    expected: l.outputs(),
                    got: l.bias.len(),
                });
            }
            if k > 0 && layers[k - 1].outputs() != l.inputs() {
                return Err(Error::Dimension {
                    expected: layers[k - 1].outputs(),
                    got: l.inputs(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense<F>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<F>] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(Dense::outputs));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn num_parameters(&self) -> usize {
        count_parameters(&self.sizes())
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.sizes())
    }

    /// Parameter tensors in declaration order: `w0, b0, w1, b1, ...`.
    pub fn tensors(&self) -> Vec<&[F]> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for l in &self.layers {
            out.push(l.weight.as_slice().expect("standard layout"));
            out.push(l.bias.as_slice().expect("standard layout"));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [F]> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for l in &mut self.layers {
            out.push(l.weight.as_slice_mut().expect("standard layout"));
            out.push(l.bias.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: cols,
            });
        }
        Ok(())
    }

    /// Batched forward pass, one sample per row.
    pub fn forward(&self, x: ArrayView2<F>) -> Result<Array2<F>> {
        Ok(self.forward_train(x)?.0)
    }

    pub fn forward_train(&self, x: ArrayView2<F>) -> Result<(Array2<F>, MlpCache<F>)> {
        self.check_input(x.ncols())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut y = Array2::zeros((h.nrows(), layer.outputs()));
            general_mat_mul(F::one(), &h, &layer.weight.t(), F::zero(), &mut y);
            for mut row in y.outer_iter_mut() {
                row.zip_mut_with(&layer.bias, |v, &b| *v = *v + b);
            }
            if k < last {
                y.mapv_inplace(relu);
            }
            inputs.push(h);
            h = y;
        }
        Ok((h, MlpCache { inputs }))
    }

    /// Gradients of `sum(d_out ∘ y)` with respect to every parameter, written
    /// into `grads` (same shape as `self`).
    pub fn backward(&self, cache: &MlpCache<F>, d_out: ArrayView2<F>, grads: &mut Mlp<F>) {
        let mut delta = d_out.to_owned();
        for k in (0..self.layers.len()).rev() {
            let input = &cache.inputs[k];
            let g = &mut grads.layers[k];
            general_mat_mul(F::one(), &delta.t(), input, F::zero(), &mut g.weight);
            g.bias = delta.sum_axis(Axis(0));
            if k > 0 {
                let mut d_in = delta.dot(&self.layers[k].weight);
                d_in.zip_mut_with(input, |d, &a| {
                    if a <= F::zero() {
                        *d = F::zero();
                    }
                });
                delta = d_in;
            }
        }
    }

    /// Single-sample forward pass without batching overhead.
    pub fn forward_one(&self, x: &[F]) -> Result<Vec<F>> {
        self.check_input(x.len())?;
        let mut h = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut y = Vec::with_capacity(layer.outputs());
            for (row, &b) in layer.weight.outer_iter().zip(layer.bias.iter()) {
                let v = dot(row.as_slice().expect("standard layout"), &h) + b;
                y.push(if k < last { relu(v) } else { v });
            }
            h = y;
        }
        Ok(h)
    }
}

fn relu<F: Real>(v: F) -> F {
    if v > F::zero() {
        v
    } else {
        F::zero()
    }
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    const LANES: usize = 16;
    let mut acc = [F::zero(); LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let tail: F = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .fold(F::zero(), |s, (&x, &y)| s + x * y);
    for (xa, xb) in ca.zip(cb) {
        for i in 0..LANES {
            acc[i] = acc[i] + xa[i] * xb[i];
        }
    }
    acc.iter().fold(F::zero(), |s, &v| s + v) + tail
}
