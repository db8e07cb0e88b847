//! Saves a freshly initialized actor-critic, reloads it and compares outputs.

use rand::Rng;

use meshsched::env::{state_dim, EnvConfig};
use meshsched::ppo::{ActorCritic, Checkpoint, TrainConfig};
use meshsched::rng::seeded;

fn main() -> meshsched::Result<()> {
    let e = 10;
    let model = ActorCritic::<f32>::new(state_dim(e), &[256, 256], e, &mut seeded(4));
    println!("{} parameters", model.num_parameters());

    let path = std::env::temp_dir().join("meshsched-example.ckpt");
    Checkpoint::new(model.clone(), 0, TrainConfig::default(), EnvConfig::default()).save(&path)?;
    let loaded = Checkpoint::load(&path)?;
    println!(
        "{} bytes, header step {}, sizes {:?}",
        std::fs::metadata(&path)?.len(),
        loaded.header.step,
        loaded.header.policy_sizes
    );

    let mut rng = seeded(5);
    let x: Vec<f32> = (0..state_dim(e)).map(|_| rng.random_range(0.0..1.0)).collect();
    let a = model.policy.mean_one(&x)?;
    let b = loaded.model.policy.mean_one(&x)?;
    assert_eq!(a, b);
    println!("mean action {:?}", a.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    std::fs::remove_file(&path)?;
    Ok(())
}
