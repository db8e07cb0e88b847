//! Decision latency of greedy and the policy network on the 10- and 48-link
//! meshes.

use meshsched::harness::{cmd_bench_timing, RunConfig};
use meshsched::topology::TopologyKind;

fn main() -> meshsched::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.bench.topologies = vec![TopologyKind::Small10, TopologyKind::Medium48];
    cfg.bench.decisions = 100;
    cfg.run.out = std::env::temp_dir().join("meshsched-timing");
    for r in cmd_bench_timing(&cfg)? {
        println!(
            "{:<10} {:<12} {:<7} p50 {:>8.4} ms  p90 {:>8.4} ms",
            r.topology, r.workload, r.scheduler, r.p50_ms, r.p90_ms
        );
    }
    Ok(())
}
