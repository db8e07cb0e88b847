use super::mlp::Real;

/// Adam over a fixed list of parameter tensors.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
}

impl<F: Real> Adam<F> {
    pub fn new(shapes: &[usize], lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-5,
            step: 0,
            m: shapes.iter().map(|&n| vec![F::zero(); n]).collect(),
            v: shapes.iter().map(|&n| vec![F::zero(); n]).collect(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn update(&mut self, params: Vec<&mut [F]>, grads: &[&[F]]) {
        assert_eq!(params.len(), self.m.len(), "parameter tensor count changed");
        self.step += 1;
        let t = self.step as i32;
        let b1 = F::lit(self.beta1);
        let b2 = F::lit(self.beta2);
        let one = F::one();
        let bias1 = F::lit(1.0 - self.beta1.powi(t));
        let bias2 = F::lit(1.0 - self.beta2.powi(t));
        let lr = F::lit(self.lr);
        let eps = F::lit(self.eps);
        for (k, p) in params.into_iter().enumerate() {
            let g = grads[k];
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

/// Scales `grads` so their joint L2 norm is at most `max_norm`. Returns the
/// norm before clipping.
pub fn clip_grad_norm<F: Real>(grads: Vec<&mut [F]>, max_norm: f64) -> f64 {
    let sq: f64 = grads
        .iter()
        .flat_map(|t| t.iter())
        .map(|&g| {
            let g = g.to_f64_lossy();
            g * g
        })
        .sum();
    let norm = sq.sqrt();
    if norm > max_norm {
        let scale = F::lit(max_norm / (norm + 1e-6));
        for t in grads {
            t.iter_mut().for_each(|g| *g = *g * scale);
        }
    }
    norm
}
