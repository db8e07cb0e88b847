use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use meshsched::harness::{self, Overrides, RunConfig};
use meshsched::Error;

#[derive(Parser)]
#[command(name = "meshsched", version, about = "mmWave mesh backhaul scheduling experiments")]
struct Cli {
    /// TOML scenario file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for episodes and training.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for episode sweeps. Timing always runs on one.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured topology file.
    GenTopology,
    /// Write the first episode's traffic and interference matrices.
    GenTraffic,
    /// Run the configured scheduler over the configured episodes.
    Run,
    /// Run the greedy statistics pass, then train a policy.
    Train,
    /// Time scheduling decisions per topology, workload and scheduler.
    BenchTiming,
    /// Goodput of the configured scheduler relative to greedy per level.
    Compare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        threads: cli.threads,
    })?;

    match cli.command {
        Command::GenTopology => {
            let p = harness::cmd_gen_topology(&cfg)?;
            println!("topology written to {}", p.display());
        }
        Command::GenTraffic => {
            let (t, i) = harness::cmd_gen_traffic(&cfg)?;
            println!("traffic written to {}", t.display());
            println!("interference written to {}", i.display());
        }
        Command::Run => {
            let r = harness::cmd_run(&cfg)?;
            println!("{}", r.report.describe());
            if let Some(g) = &r.greedy {
                println!("{}", g.describe());
            }
            println!("results in {}", cfg.run.out.display());
        }
        Command::Train => {
            let (baseline, out) = harness::cmd_train(&cfg, |row, eval| {
                print!(
                    "step {:>9}  reward {:>10.4}  episode len {:>7.1}  drop rate {:.4}",
                    row.step, row.mean_reward, row.mean_episode_len, row.drop_rate
                );
                if let Some(e) = eval {
                    print!("  eval goodput {:.2}%", e.mean_goodput);
                }
                println!();
            })?;
            println!(
                "greedy baseline: goodput {:.2}%  lost {:.1}  slots {:.1}",
                baseline.mean_goodput, baseline.mean_lost, baseline.mean_slots
            );
            println!(
                "trained {} steps in {} updates{}; {} checkpoints in {}",
                out.steps,
                out.updates,
                if out.early_stopped { " (early stop)" } else { "" },
                out.checkpoints.len(),
                cfg.run.out.display()
            );
        }
        Command::BenchTiming => {
            let rows = harness::cmd_bench_timing(&cfg)?;
            println!("{:<10} {:<12} {:<7} {:>10} {:>10} {:>10}", "topology", "workload", "sched", "mean ms", "p50 ms", "p90 ms");
            for r in rows {
                println!(
                    "{:<10} {:<12} {:<7} {:>10.4} {:>10.4} {:>10.4}",
                    r.topology, r.workload, r.scheduler, r.mean_ms, r.p50_ms, r.p90_ms
                );
            }
        }
        Command::Compare => {
            let rows = harness::cmd_compare(&cfg)?;
            println!("{:>6} {:>10} {:>10} {:>11}", "level", "greedy %", "aarl %", "normalized");
            for r in rows {
                println!(
                    "{:>6.1} {:>10.3} {:>10.3} {:>11.2}",
                    r.level, r.greedy_goodput, r.aarl_goodput, r.normalized
                );
            }
        }
    }
    Ok(())
}
