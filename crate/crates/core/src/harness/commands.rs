use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, SchedulerKind};
use super::metrics::{normalized_goodput, MetricsReport};
use crate::env::{build_episode, EnvConfig, InterferenceMode, MeshEnv};
use crate::error::{Error, Result};
use crate::greedy::GreedyScheduler;
use crate::ppo::{self, policy_sizes, Baseline, Checkpoint, GaussianPolicy, TrainConfig, TrainOutcome};
use crate::radio::{InterferenceMatrix, LinkBudget};
use crate::rng::{derive_seed, seeded, stream};
use crate::runner::{evaluate, held_out, mean_std, EpisodeMetrics, GreedyAgent, PolicyAgent, RunOptions, Scheduler, SlotView};
use crate::sim::gen_traffic;
use crate::topology::{RoutingTable, Topology, TopologyKind};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.run.seed = s;
        }
        if let Some(p) = &o.out {
            self.run.out = p.clone();
        }
        if let Some(t) = o.threads {
            if t == 0 {
                return Err(Error::Config("--threads must be positive".into()));
            }
            self.run.threads = t;
        }
        self.validate()
    }
}

/// Something that can produce fresh scheduler instances, one per worker.
#[derive(Clone)]
pub enum SchedulerSpec {
    Greedy(GreedyScheduler),
    /// A trained policy; `sample` draws actions instead of using the mean.
    Policy { policy: Arc<GaussianPolicy<f32>>, sample: bool },
}

impl SchedulerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Greedy(_) => "greedy",
            Self::Policy { .. } => "aarl",
        }
    }

    pub fn build(&self) -> Box<dyn Scheduler> {
        match self {
            Self::Greedy(g) => Box::new(GreedyAgent::new(g.clone())),
            Self::Policy { policy, sample } => Box::new(PolicyAgent::new(policy.clone()).sampling(*sample)),
        }
    }

    /// The configured scheduler, checked against the topology.
    pub fn from_config(cfg: &RunConfig, topology: &Topology) -> Result<Self> {
        match cfg.scheduler.kind {
            SchedulerKind::Greedy => Ok(Self::Greedy(cfg.scheduler.greedy())),
            SchedulerKind::Policy => {
                let path = cfg
                    .scheduler
                    .checkpoint
                    .as_ref()
                    .ok_or_else(|| Error::Config("policy scheduler needs a checkpoint".into()))?;
                let ck = Checkpoint::load(path)?;
                let agent = PolicyAgent::new(ck.model.policy);
                agent.check_links(topology.num_links())?;
                Ok(Self::Policy {
                    policy: Arc::new(agent.policy().clone()),
                    sample: cfg.scheduler.sample_actions,
                })
            }
        }
    }
}

/// Runs `count` episodes, in parallel when `threads > 1`. Results are in
/// episode order either way.
pub fn run_episodes(
    spec: &SchedulerSpec,
    topology: &Arc<Topology>,
    routes: &Arc<RoutingTable>,
    env: &EnvConfig,
    opts: &RunOptions,
    count: u64,
    threads: usize,
) -> Result<Vec<EpisodeMetrics>> {
    if threads <= 1 {
        let mut s = spec.build();
        return evaluate(s.as_mut(), topology, routes, env, opts, 0, count);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut s = spec.build();
                Ok(evaluate(s.as_mut(), topology, routes, env, opts, i, 1)?.remove(0))
            })
            .collect()
    })
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.run.out.clone();
    fs::create_dir_all(&out)?;
    fs::write(out.join("config.toml"), cfg.to_toml())?;
    Ok(out)
}

fn routes_for(t: &Topology) -> Result<Arc<RoutingTable>> {
    Ok(Arc::new(RoutingTable::compute(t)?))
}

/// Writes the configured topology to `<out>/topology.topo`.
pub fn cmd_gen_topology(cfg: &RunConfig) -> Result<PathBuf> {
    let out = prepare_out(cfg)?;
    let t = cfg.load_topology()?;
    let path = out.join("topology.topo");
    t.save(&path)?;
    Ok(path)
}

/// Writes the traffic and interference matrices of the first episode.
pub fn cmd_gen_traffic(cfg: &RunConfig) -> Result<(PathBuf, PathBuf)> {
    let out = prepare_out(cfg)?;
    let t = cfg.load_topology()?;
    let routes = routes_for(&t)?;
    let env = cfg.env_config();
    let episode_seed = derive_seed(env.seed, 0);
    let traffic = gen_traffic(
        &t,
        env.workload,
        env.total_packets,
        &mut seeded(derive_seed(episode_seed, stream::TRAFFIC)),
    )?;
    let traffic_path = out.join("traffic.csv");
    traffic.write_csv(fs::File::create(&traffic_path)?)?;
    let st = build_episode(&t, &routes, &env, 0)?;
    let interference_path = out.join("interference.csv");
    st.interference().write_csv(fs::File::create(&interference_path)?)?;
    Ok((traffic_path, interference_path))
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub report: MetricsReport,
    pub greedy: Option<MetricsReport>,
}

/// Runs the configured scheduler and writes `episodes.csv`, `summary.csv`
/// and `latency.csv`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunResult> {
    let out = prepare_out(cfg)?;
    let t = cfg.load_topology()?;
    let routes = routes_for(&t)?;
    let spec = SchedulerSpec::from_config(cfg, &t)?;
    let env = cfg.env_config();
    let opts = cfg.run_options();
    let episodes = run_episodes(&spec, &t, &routes, &env, &opts, cfg.run.episodes, cfg.run.threads)?;
    let mut report = MetricsReport::new(spec.name(), episodes);

    let greedy = if cfg.run.normalize {
        let g = SchedulerSpec::Greedy(cfg.scheduler.greedy());
        let m = run_episodes(&g, &t, &routes, &env, &opts, cfg.run.episodes, cfg.run.threads)?;
        let g = MetricsReport::new("greedy", m);
        report.normalize_against(&g);
        Some(g)
    } else {
        None
    };

    let mut w = csv::Writer::from_path(out.join("episodes.csv"))?;
    report.write_episodes_csv(&mut w)?;
    if let Some(g) = &greedy {
        g.write_episodes_csv(&mut w)?;
    }
    w.flush()?;

    let mut s = csv::Writer::from_path(out.join("summary.csv"))?;
    s.write_record(MetricsReport::summary_header())?;
    s.write_record(report.summary_record())?;
    if let Some(g) = &greedy {
        s.write_record(g.summary_record())?;
    }
    s.flush()?;

    let mut l = csv::Writer::from_path(out.join("latency.csv"))?;
    l.write_record(["scheduler", "episode", "mean_decision_ms"])?;
    for r in std::iter::once(&report).chain(greedy.as_ref()) {
        for m in &r.episodes {
            l.write_record([r.scheduler.clone(), m.episode.to_string(), m.mean_decision_ms.to_string()])?;
        }
    }
    l.flush()?;
    Ok(RunResult { report, greedy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub topology: String,
    pub workload: String,
    pub scheduler: String,
    pub decisions: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub max_ms: f64,
}

struct Snapshot {
    occupancies: Vec<usize>,
    capacity: usize,
    budget: Arc<LinkBudget>,
    interference: Arc<InterferenceMatrix>,
}

impl Snapshot {
    fn view(&self) -> SlotView<'_> {
        SlotView {
            occupancies: &self.occupancies,
            capacity: self.capacity,
            budget: &self.budget,
            interference: &self.interference,
        }
    }
}

/// Buffer states met along greedy-scheduled episodes, used as timing inputs.
fn collect_snapshots(t: &Arc<Topology>, routes: &Arc<RoutingTable>, env: &EnvConfig, count: usize) -> Result<Vec<Snapshot>> {
    let mut snaps = Vec::with_capacity(count);
    let mut greedy = GreedyAgent::default();
    let mut episode = 0;
    while snaps.len() < count {
        let mut st = build_episode(t, routes, env, episode)?;
        greedy.reset(derive_seed(env.seed, episode));
        let budget = Arc::new(st.budget().clone());
        let interference = Arc::new(st.interference().clone());
        while !st.is_terminal() && st.slot() < env.max_episode_slots && snaps.len() < count {
            let snap = Snapshot {
                occupancies: st.occupancies(),
                capacity: t.buffer_capacity(),
                budget: budget.clone(),
                interference: interference.clone(),
            };
            let d = greedy.decide(&snap.view())?;
            st.apply_schedule(&d)?;
            snaps.push(snap);
        }
        episode += 1;
        if episode > 10_000 {
            return Err(Error::Config("could not collect timing snapshots; episodes are empty".into()));
        }
    }
    Ok(snaps)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Times `sched` alone on each snapshot after `warmup` untimed decisions.
fn time_decisions(sched: &mut dyn Scheduler, snaps: &[Snapshot], warmup: usize) -> Result<Vec<f64>> {
    for s in snaps.iter().cycle().take(warmup) {
        std::hint::black_box(sched.decide(&s.view())?);
    }
    let mut times = Vec::with_capacity(snaps.len());
    for s in snaps {
        let v = s.view();
        let t0 = Instant::now();
        let d = sched.decide(&v)?;
        times.push(t0.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(d);
    }
    Ok(times)
}

/// Packets per episode used for timing runs on `kind`: the configured count
/// scaled by link count relative to the 10-link mesh.
pub fn bench_packets(base: u64, kind: TopologyKind) -> u64 {
    base * kind.num_links() as u64 / 10
}

/// Decision latency of greedy and the policy per topology and workload.
/// Always single-threaded. Writes `timing.csv`.
pub fn cmd_bench_timing(cfg: &RunConfig) -> Result<Vec<TimingRow>> {
    let out = prepare_out(cfg)?;
    let mut rows = Vec::new();
    for (ti, &kind) in cfg.bench.topologies.iter().enumerate() {
        let t = Arc::new(Topology::generate(kind, &mut seeded(cfg.topology.seed))?);
        let routes = routes_for(&t)?;
        let policy = match cfg.bench.checkpoints.get(ti) {
            Some(p) => {
                let ck = Checkpoint::load(p)?;
                let agent = PolicyAgent::new(ck.model.policy);
                agent.check_links(t.num_links())?;
                agent.policy().clone()
            }
            None => {
                let hidden = TrainConfig::for_topology(kind).hidden;
                let sizes = policy_sizes(crate::env::state_dim(t.num_links()), &hidden, t.num_links());
                GaussianPolicy::new(&sizes, &mut seeded(derive_seed(cfg.run.seed, stream::POLICY)))
            }
        };
        let policy = Arc::new(policy);
        for &workload in &cfg.bench.workloads {
            let env = EnvConfig {
                workload,
                total_packets: bench_packets(cfg.traffic.total_packets, kind),
                ..cfg.env_config()
            };
            let snaps = collect_snapshots(&t, &routes, &env, cfg.bench.decisions)?;
            let specs = [
                SchedulerSpec::Greedy(cfg.scheduler.greedy()),
                SchedulerSpec::Policy {
                    policy: policy.clone(),
                    sample: cfg.scheduler.sample_actions,
                },
            ];
            for spec in &specs {
                let mut s = spec.build();
                s.reset(derive_seed(cfg.run.seed, 0));
                let mut times = time_decisions(s.as_mut(), &snaps, cfg.bench.warmup)?;
                times.sort_by(f64::total_cmp);
                rows.push(TimingRow {
                    topology: kind.name().into(),
                    workload: workload.name().into(),
                    scheduler: spec.name().into(),
                    decisions: times.len(),
                    mean_ms: mean_std(times.iter().copied()).0,
                    p50_ms: percentile(&times, 0.5),
                    p90_ms: percentile(&times, 0.9),
                    max_ms: *times.last().expect("at least one decision"),
                });
            }
        }
    }
    let mut w = csv::Writer::from_path(out.join("timing.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub level: f64,
    pub greedy_goodput: f64,
    pub aarl_goodput: f64,
    pub normalized: f64,
}

/// Goodput of the configured scheduler relative to greedy at every sweep
/// level. Writes `compare.csv`.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<CompareRow>> {
    let out = prepare_out(cfg)?;
    let t = cfg.load_topology()?;
    let routes = routes_for(&t)?;
    let spec = SchedulerSpec::from_config(cfg, &t)?;
    let greedy = SchedulerSpec::Greedy(cfg.scheduler.greedy());
    let opts = cfg.run_options();
    let mut rows = Vec::new();
    for &level in &cfg.sweep.levels {
        let env = EnvConfig {
            interference: InterferenceMode::Synthetic { level },
            ..cfg.env_config()
        };
        let g = run_episodes(&greedy, &t, &routes, &env, &opts, cfg.run.episodes, cfg.run.threads)?;
        let a = run_episodes(&spec, &t, &routes, &env, &opts, cfg.run.episodes, cfg.run.threads)?;
        let gm = mean_std(g.iter().map(|m| m.goodput)).0;
        let am = mean_std(a.iter().map(|m| m.goodput)).0;
        rows.push(CompareRow {
            level,
            greedy_goodput: gm,
            aarl_goodput: am,
            normalized: normalized_goodput(am, gm),
        });
    }
    let mut w = csv::Writer::from_path(out.join("compare.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Greedy statistics on the held-out evaluation episodes.
pub fn greedy_baseline(
    cfg: &RunConfig,
    topology: &Arc<Topology>,
    routes: &Arc<RoutingTable>,
    episodes: u64,
) -> Result<Baseline> {
    let env = held_out(&cfg.env_config());
    let opts = RunOptions {
        lag: false,
        max_slots: cfg.run.max_slots,
        continuous_rate: None,
    };
    let spec = SchedulerSpec::Greedy(cfg.scheduler.greedy());
    let m = run_episodes(&spec, topology, routes, &env, &opts, episodes, cfg.run.threads)?;
    Ok(Baseline {
        episodes,
        mean_lost: mean_std(m.iter().map(|x| x.lost as f64)).0,
        mean_goodput: mean_std(m.iter().map(|x| x.goodput)).0,
        mean_slots: mean_std(m.iter().map(|x| x.slots as f64)).0,
    })
}

/// Greedy statistics pass, then PPO training. Checkpoints, the reward curve
/// and `greedy_baseline.csv` land in the output directory.
pub fn cmd_train(
    cfg: &RunConfig,
    on_checkpoint: impl FnMut(&ppo::CurveRow, Option<&ppo::EvalSummary>),
) -> Result<(Baseline, TrainOutcome)> {
    if cfg.traffic.continuous_rate.is_some() {
        return Err(Error::Config("training uses drained episodes; unset continuous_rate".into()));
    }
    let out = prepare_out(cfg)?;
    let t = cfg.load_topology()?;
    let routes = routes_for(&t)?;
    let tc = cfg.train_config()?;
    let baseline = greedy_baseline(cfg, &t, &routes, tc.eval_episodes.max(1))?;
    write_baseline(&out.join("greedy_baseline.csv"), &baseline)?;
    let mut env = MeshEnv::with_routes(t, routes, cfg.env_config())?;
    let outcome = ppo::train(&mut env, &tc, &out, Some(&baseline), on_checkpoint)?;
    Ok((baseline, outcome))
}

fn write_baseline(path: &Path, b: &Baseline) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.serialize(b)?;
    w.flush()?;
    Ok(())
}
