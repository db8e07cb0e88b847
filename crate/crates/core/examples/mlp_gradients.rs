//! Forward and backward passes of a small MLP, checked against central
//! differences.

use ndarray::Array2;
use rand::Rng;

use meshsched::ppo::Mlp;
use meshsched::rng::seeded;

fn main() -> meshsched::Result<()> {
    let mut rng = seeded(3);
    let net = Mlp::<f64>::init(&[3, 5, 2], 1.0, &mut rng);
    let x = Array2::from_shape_fn((4, 3), |_| rng.random_range(-1.0..1.0));

    // Loss = sum of outputs, so d_out is all ones.
    let (y, cache) = net.forward_train(x.view())?;
    let mut grads = net.zeros_like();
    net.backward(&cache, Array2::ones(y.raw_dim()).view(), &mut grads);

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let analytic: Vec<f64> = grads.tensors().iter().flat_map(|t| t.iter().copied()).collect();
    let mut idx = 0;
    for (ti, len) in net.tensors().iter().map(|t| t.len()).enumerate() {
        for k in 0..len {
            let mut up = net.clone();
            up.tensors_mut()[ti][k] += h;
            let mut down = net.clone();
            down.tensors_mut()[ti][k] -= h;
            let fd = (up.forward(x.view())?.sum() - down.forward(x.view())?.sum()) / (2.0 * h);
            worst = worst.max((fd - analytic[idx]).abs());
            idx += 1;
        }
    }
    println!("{} parameters, max |analytic - numeric| = {worst:.2e}", net.num_parameters());
    Ok(())
}
