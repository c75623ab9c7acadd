//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

use arhgof::io;
use arhgof::mc::parse_table;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arhgof"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_tiny_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tiny.conf");
    std::fs::write(&path, "m = 7\nburn_in = 5\nseed = 3\n").unwrap();
    path
}

#[test]
fn simulate_emits_readable_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("series.csv");
    run_ok(bin()
        .args(["simulate", "--n", "25", "--seed", "11"])
        .arg("--config")
        .arg(write_tiny_config(dir.path()))
        .arg("--out")
        .arg(&out));
    let series = io::read_series(&out).unwrap();
    assert_eq!(series.len(), 25);
    assert_eq!(series.grid().len(), 7);
}

#[test]
fn simulate_is_seed_deterministic_on_stdout() {
    let run = || {
        let out = run_ok(bin().args(["simulate", "--n", "10", "--seed", "4"]).arg("--config").arg("/dev/null"));
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn test_subcommand_reports_summary_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let series = dir.path().join("series.csv");
    run_ok(bin()
        .args(["simulate", "--n", "30", "--seed", "11"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&series));
    let out = run_ok(bin()
        .arg("test")
        .arg(&series)
        .args(["--np", "3", "--boot", "50", "--seed", "2"])
        .arg("--config")
        .arg(&config));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5); // header + 3 projections + summary
    assert!(lines[0].starts_with("projection_index,"));
    assert!(lines[4].starts_with("summary,"));
}

#[test]
fn estimate_round_trips_through_kernel_reader() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let series_path = dir.path().join("series.csv");
    run_ok(bin()
        .args(["simulate", "--n", "40", "--seed", "9"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&series_path));
    let kernel_path = dir.path().join("gamma.csv");
    run_ok(bin()
        .arg("estimate")
        .arg(&series_path)
        .arg("--out")
        .arg(&kernel_path));
    let series = io::read_series(&series_path).unwrap();
    let kernel = io::read_kernel(&kernel_path, Some(series.grid().clone())).unwrap();
    assert_eq!(kernel.grid().len(), 7);
}

#[test]
fn study_output_is_worker_invariant_and_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let run_with = |workers: &str, out: &Path| {
        run_ok(bin()
            .args(["mc-size", "--n", "8,12", "--np", "1,2", "--reps", "5"])
            .args(["--boot", "8", "--workers", workers])
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(out));
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_with("1", &a);
    run_with("3", &b);
    let ta = std::fs::read(&a).unwrap();
    let tb = std::fs::read(&b).unwrap();
    assert_eq!(ta, tb);
    let parsed = parse_table(&String::from_utf8(ta).unwrap()).unwrap();
    assert_eq!(parsed.sample_sizes, vec![8, 12]);
    assert_eq!(parsed.np_list, vec![1, 2]);
    // Checkpoint state was cleaned up after a completed run.
    assert!(!dir.path().join("a.csv.state.json").exists());
}

#[test]
fn exit_codes_distinguish_config_and_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad_conf = dir.path().join("bad.conf");
    std::fs::write(&bad_conf, "no_such_key = 1\n").unwrap();
    let status = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&bad_conf)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));

    // A constant series has a rank-one covariance: an explicit
    // truncation beyond the rank is a numerical failure.
    let const_series = dir.path().join("const.csv");
    std::fs::write(
        &const_series,
        "t,node_0,node_1\n1,1.0,2.0\n2,1.0,2.0\n3,1.0,2.0\n4,1.0,2.0\n",
    )
    .unwrap();
    let status = bin()
        .arg("estimate")
        .arg(&const_series)
        .args(["--k", "2"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));

    let status = bin().arg("test").arg(dir.path().join("nope.csv")).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}
