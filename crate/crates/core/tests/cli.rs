use std::path::Path;
use std::process::{Command, Output};

fn meshsched(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshsched"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn run_writes_results_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[run]\nepisodes = 3\n");
    let out = meshsched(dir.path(), &["run", "--config", &cfg, "--out", "o", "--seed", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["episodes.csv", "summary.csv", "latency.csv", "config.toml"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("greedy"));
}

#[test]
fn seeded_runs_write_identical_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[run]\nepisodes = 4\nnormalize = true\n");
    for (out, threads) in [("a", "1"), ("b", "2")] {
        let o = meshsched(dir.path(), &["run", "--config", &cfg, "--out", out, "--seed", "11", "--threads", threads]);
        assert!(o.status.success());
    }
    for f in ["episodes.csv", "summary.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn generators_write_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(meshsched(dir.path(), &["gen-topology", "--out", "t"]).status.success());
    assert!(dir.path().join("t/topology.topo").exists());
    assert!(meshsched(dir.path(), &["gen-traffic", "--out", "t"]).status.success());
    assert!(dir.path().join("t/traffic.csv").exists());
    assert!(dir.path().join("t/interference.csv").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = meshsched(dir.path(), &["run", "--config", "nope.toml"]);
    assert_eq!(missing.status.code(), Some(2));

    let unknown = write(dir.path(), "u.toml", "[run]\nepisodez = 3\n");
    assert_eq!(meshsched(dir.path(), &["run", "--config", &unknown]).status.code(), Some(2));

    let no_ckpt = write(dir.path(), "p.toml", "[scheduler]\nkind = \"policy\"\n");
    let o = meshsched(dir.path(), &["run", "--config", &no_ckpt]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("checkpoint"));

    let bad_level = write(dir.path(), "l.toml", "[sweep]\nlevels = [0.25]\n");
    assert_eq!(meshsched(dir.path(), &["compare", "--config", &bad_level]).status.code(), Some(2));

    // Unknown subcommands are rejected by the argument parser.
    assert_eq!(meshsched(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn corrupt_checkpoint_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.ckpt"), b"MESHPPO 1\n{}\n").unwrap();
    let cfg = write(dir.path(), "c.toml", "[scheduler]\nkind = \"policy\"\ncheckpoint = \"bad.ckpt\"\n");
    assert_eq!(meshsched(dir.path(), &["run", "--config", &cfg]).status.code(), Some(2));
}
