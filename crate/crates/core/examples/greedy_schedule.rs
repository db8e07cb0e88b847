//! One greedy decision with its construction trace, then full greedy
//! episodes on the 48-link mesh.

use std::sync::Arc;

use meshsched::env::{build_episode, EnvConfig};
use meshsched::greedy::GreedyScheduler;
use meshsched::rng::seeded;
use meshsched::runner::{evaluate, mean_std, GreedyAgent, RunOptions};
use meshsched::topology::{RoutingTable, Topology, TopologyKind};

fn main() -> meshsched::Result<()> {
    let t = Arc::new(Topology::generate(TopologyKind::Medium48, &mut seeded(7))?);
    let routes = Arc::new(RoutingTable::compute(&t)?);
    let cfg = EnvConfig { total_packets: 11_000, seed: 5, ..EnvConfig::default() };
    let st = build_episode(&t, &routes, &cfg, 0)?;

    let g = GreedyScheduler::default();
    let (d, trace) = g.schedule_traced(&st.occupancies(), st.budget(), st.interference(), &mut seeded(1));
    for (s, agg) in trace.selections.iter().zip(&trace.estimated_aggregate) {
        println!(
            "link {:>2} at {:.1}: gain {:>5.1} loss {:>5.1}  aggregate {:>6.1}",
            s.link, s.power, s.gain, s.loss, agg
        );
    }
    println!("{} of {} links active", d.active_links().count(), d.len());

    let opts = RunOptions { lag: false, max_slots: 1000, continuous_rate: None };
    let m = evaluate(&mut GreedyAgent::new(g), &t, &routes, &cfg, &opts, 0, 5)?;
    let (goodput, _) = mean_std(m.iter().map(|x| x.goodput));
    let (slots, _) = mean_std(m.iter().map(|x| x.slots as f64));
    println!("5 episodes: goodput {goodput:.2}%  slots {slots:.1}");
    Ok(())
}
