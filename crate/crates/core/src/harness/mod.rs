//! Experiment front end: configs, runs, comparisons, timing and training.

mod commands;
mod config;
mod metrics;

pub use commands::{
    bench_packets, cmd_bench_timing, cmd_compare, cmd_gen_topology, cmd_gen_traffic, cmd_run, cmd_train,
    greedy_baseline, run_episodes, CompareRow, Overrides, RunResult, SchedulerSpec, TimingRow,
};
pub use config::{
    BenchSection, RunConfig, RunSection, SchedulerKind, SchedulerSection, SweepSection, TopologySection, TrafficSection,
};
pub use metrics::{normalized_goodput, Aggregate, MetricsReport};
