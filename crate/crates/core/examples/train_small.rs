//! Trains a policy on the 10-link topology and compares it with greedy.
//!
//! ```text
//! cargo run --release --example train_small -- [steps] [seed]
//! ```

use std::sync::Arc;

use meshsched::env::{EnvConfig, MeshEnv};
use meshsched::ppo::{train, Baseline, TrainConfig};
use meshsched::rng::seeded;
use meshsched::runner::{evaluate, held_out, mean_std, GreedyAgent, PolicyAgent, RunOptions};
use meshsched::topology::{Topology, TopologyKind};

fn main() -> meshsched::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let steps: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let topology = Arc::new(Topology::generate(TopologyKind::Small10, &mut seeded(7))?);
    let env_cfg = EnvConfig { seed, ..EnvConfig::default() };
    let mut env = MeshEnv::new(topology.clone(), env_cfg.clone())?;
    let eval_cfg = held_out(&env_cfg);
    let opts = RunOptions { lag: false, max_slots: env_cfg.max_episode_slots, continuous_rate: None };

    let greedy = evaluate(&mut GreedyAgent::default(), &topology, env.routes(), &eval_cfg, &opts, 0, 30)?;
    let (g_goodput, _) = mean_std(greedy.iter().map(|m| m.goodput));
    let baseline = Baseline {
        episodes: 30,
        mean_lost: mean_std(greedy.iter().map(|m| m.lost as f64)).0,
        mean_goodput: g_goodput,
        mean_slots: mean_std(greedy.iter().map(|m| m.slots as f64)).0,
    };
    println!("greedy: goodput {:.2}% slots {:.1}", g_goodput, baseline.mean_slots);

    let cfg = TrainConfig { total_steps: steps, seed, ..TrainConfig::for_topology(TopologyKind::Small10) };
    let dir = std::env::temp_dir().join(format!("meshsched-train-small-{seed}"));
    let out = train(&mut env, &cfg, &dir, Some(&baseline), |row, eval| {
        print!(
            "step {:>8}  reward {:>9.3}  len {:>6.1}  drop {:.4}",
            row.step, row.mean_reward, row.mean_episode_len, row.drop_rate
        );
        if let Some(e) = eval {
            print!("  eval goodput {:.2}% slots {:.1}", e.mean_goodput, e.mean_slots);
        }
        println!();
    })?;

    let routes = env.routes().clone();
    for sample in [true, false] {
        let mut agent = PolicyAgent::new(out.model.policy.clone()).sampling(sample);
        let policy = evaluate(&mut agent, &topology, &routes, &eval_cfg, &opts, 0, 30)?;
        let (p_goodput, _) = mean_std(policy.iter().map(|m| m.goodput));
        let p_slots = mean_std(policy.iter().map(|m| m.slots as f64)).0;
        println!(
            "{} policy after {} steps: goodput {:.2}% slots {:.1} ({:.1}% of greedy goodput)",
            if sample { "sampled" } else { "mean" },
            out.steps,
            p_goodput,
            p_slots,
            100.0 * p_goodput / g_goodput
        );
    }
    println!("checkpoints in {}", dir.display());
    Ok(())
}
