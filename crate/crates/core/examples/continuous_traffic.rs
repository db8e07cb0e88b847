//! Greedy under continuous arrivals, with and without the one-slot decision
//! lag.

use std::sync::Arc;

use meshsched::env::EnvConfig;
use meshsched::rng::seeded;
use meshsched::runner::{evaluate, GreedyAgent, RunOptions};
use meshsched::topology::{RoutingTable, Topology, TopologyKind};

fn main() -> meshsched::Result<()> {
    let t = Arc::new(Topology::generate(TopologyKind::Small10, &mut seeded(7))?);
    let routes = Arc::new(RoutingTable::compute(&t)?);
    let cfg = EnvConfig { seed: 2, ..EnvConfig::default() };
    for rate in [20, 60, 120] {
        for lag in [false, true] {
            let opts = RunOptions { lag, max_slots: 300, continuous_rate: Some(rate) };
            let m = evaluate(&mut GreedyAgent::default(), &t, &routes, &cfg, &opts, 0, 3)?;
            let injected: u64 = m.iter().map(|x| x.injected).sum();
            let dropped: u64 = m.iter().map(|x| x.dropped).sum();
            let queued: u64 = m.iter().map(|x| x.queued).sum();
            println!(
                "rate {rate:>3}/slot lag {lag:<5}  injected {injected:>6}  dropped {dropped:>6}  still queued {queued:>5}"
            );
        }
    }
    Ok(())
}
