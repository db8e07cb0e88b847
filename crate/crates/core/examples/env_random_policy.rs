//! The reset/step loop with uniformly random actions.

use std::sync::Arc;

use rand::Rng;

use meshsched::env::{EnvConfig, MeshEnv};
use meshsched::rng::seeded;
use meshsched::topology::{Topology, TopologyKind};

fn main() -> meshsched::Result<()> {
    let t = Arc::new(Topology::generate(TopologyKind::Small10, &mut seeded(7))?);
    let mut env = MeshEnv::new(t, EnvConfig { seed: 9, ..EnvConfig::default() })?;
    let mut rng = seeded(1);
    println!("state dim {}", env.state_dim());

    for ep in 0..5 {
        let mut state = env.reset()?;
        let mut ret = 0.0;
        loop {
            assert_eq!(state.len(), env.state_dim());
            let action: Vec<f32> = (0..env.num_links()).map(|_| rng.random_range(-0.5..1.0)).collect();
            let step = env.step(&action)?;
            ret += step.reward;
            state = step.state;
            if step.done {
                let tot = env.episode().map(|e| e.totals()).unwrap_or_default();
                println!(
                    "episode {ep}: {} slots, return {ret:.2}, dropped {}, truncated {}",
                    tot.slots, tot.dropped, step.truncated
                );
                break;
            }
        }
    }
    Ok(())
}
