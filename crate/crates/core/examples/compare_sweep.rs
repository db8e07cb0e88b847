//! Greedy against a policy checkpoint across interference levels, through
//! the harness. Without a checkpoint argument an untrained policy is saved
//! first, which shows the plumbing rather than a trained result.
//!
//! ```text
//! cargo run --release --example compare_sweep -- [checkpoint]
//! ```

use meshsched::env::{state_dim, EnvConfig};
use meshsched::harness::{cmd_compare, RunConfig, SchedulerKind};
use meshsched::ppo::{ActorCritic, Checkpoint, TrainConfig};
use meshsched::rng::seeded;

fn main() -> meshsched::Result<()> {
    let out = std::env::temp_dir().join("meshsched-compare");
    let ckpt = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            std::fs::create_dir_all(&out)?;
            let p = out.join("untrained.ckpt");
            let m = ActorCritic::<f32>::new(state_dim(10), &[256, 256], 10, &mut seeded(1));
            Checkpoint::new(m, 0, TrainConfig::default(), EnvConfig::default()).save(&p)?;
            p
        }
    };

    let mut cfg = RunConfig::default();
    cfg.scheduler.kind = SchedulerKind::Policy;
    cfg.scheduler.checkpoint = Some(ckpt);
    cfg.run.episodes = 5;
    cfg.run.out = out.clone();
    cfg.sweep.levels = vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    cfg.validate()?;

    println!("level  greedy%  policy%  normalized%");
    for r in cmd_compare(&cfg)? {
        println!("{:>5.1}  {:>7.2}  {:>7.2}  {:>11.1}", r.level, r.greedy_goodput, r.aarl_goodput, r.normalized);
    }
    println!("rows written to {}", out.join("compare.csv").display());
    Ok(())
}
