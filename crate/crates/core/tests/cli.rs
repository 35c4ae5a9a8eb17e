use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn swme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swme-dg")).args(args).output().expect("binary runs")
}

fn short_run(out: &Path) -> Output {
    let out = out.to_str().unwrap();
    swme(&["run", "--scenario", "example1", "--elements", "16", "--t-end", "0.1", "--snapshots", "3", "--output", out])
}

#[test]
fn run_writes_identical_output_twice() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = short_run(&a);
    let rb = short_run(&b);
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    assert!(rb.status.success());
    assert_eq!(ra.stdout, rb.stdout);
    for name in ["snapshot_000.csv", "snapshot_001.csv", "snapshot_002.csv", "timeseries.csv"] {
        let fa = fs::read(a.join(name)).unwrap();
        assert_eq!(fa, fs::read(b.join(name)).unwrap(), "{name} differs");
        assert!(!fa.is_empty());
    }
    assert!(!a.join("snapshot_003.csv").exists());
    let snap = fs::read_to_string(a.join("snapshot_002.csv")).unwrap();
    assert_eq!(snap.lines().next().unwrap(), "x,h,u_m,alpha_1,alpha_2,b");
    // 16 elements × 3 nodes plus header
    assert_eq!(snap.lines().count(), 49);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "scenario = \"example1\"\nseed = 3\n\n[overrides]\nelements = 8\nt_end = 0.05\nsnapshot_count = 4\noutput_dir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let r = swme(&["run", "--config", cfg.to_str().unwrap(), "--snapshots", "2"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.join("snapshot_001.csv").exists());
    assert!(!out.join("snapshot_002.csv").exists());
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("t = 0.05"), "{stdout}");
}

#[test]
fn exit_codes() {
    assert_eq!(swme(&["run", "--scenario", "nonexistent"]).status.code(), Some(1));
    assert_eq!(swme(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(swme(&["run", "--scenario", "example3", "--elements", "0"]).status.code(), Some(1));
    assert_eq!(swme(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // a huge fixed step drives the solution out of the admissible set
    let r = swme(&["run", "--scenario", "example1", "--elements", "16", "--dt", "5", "--t-end", "50", "--output", out]);
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn verify_passes() {
    let r = swme(&["verify", "--seed", "5", "--samples", "50"]);
    assert_eq!(r.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{stdout}");
}

#[test]
fn converge_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = swme(&["converge", "--ladder", "4,8", "--t-end", "0.001", "--output", out]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let table = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("K,e_h,rate_h,"));
    assert_eq!(lines.count(), 2);
    assert_eq!(swme(&["converge", "--ladder", "4,6", "--output", out]).status.code(), Some(1));
}
