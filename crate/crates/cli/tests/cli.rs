use std::path::Path;
use std::process::{Command, Output};

fn fracdiff(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracdiff"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(o: &Output, column: &str) -> f64 {
    let text = stdout(o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == column).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let sim = fracdiff(
        dir.path(),
        &["simulate", "--model", "fou", "--hurst", "0.7", "--delta", "0.05", "--horizon", "40", "--seed", "9", "--out", "x.csv"],
    );
    assert!(sim.status.success(), "{sim:?}");

    let mle = fracdiff(dir.path(), &["mle", "x.csv", "--hurst", "0.7"]);
    assert!(mle.status.success());
    assert!((value(&mle, "sigma") - 1.0).abs() < 0.1);
    assert!(value(&mle, "theta") > 0.2 && value(&mle, "theta") < 3.0);

    let sigma = fracdiff(dir.path(), &["estimate-sigma", "x.csv", "--hurst", "0.7"]);
    assert!((value(&sigma, "sigma2") - 1.0).abs() < 0.2);

    let cal = fracdiff(dir.path(), &["calibrate", "x.csv", "--hurst", "0.7", "--theta", "1", "--sigma", "1"]);
    assert_eq!(stdout(&cal).lines().count(), 1 + 800);
}

#[test]
fn simulation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--hurst", "0.3", "--replicates", "3", "--seed", "4"];
    let a = fracdiff(dir.path(), &args);
    let b = fracdiff(dir.path(), &args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 3 * 101);
}

#[test]
fn hurst_and_tfe_estimates() {
    let dir = tempfile::tempdir().unwrap();
    fracdiff(dir.path(), &["simulate", "--hurst", "0.3", "--delta", "0.001", "--horizon", "4", "--out", "b.csv"]);
    let h = fracdiff(dir.path(), &["estimate-hurst", "b.csv"]);
    assert!((value(&h, "hurst") - 0.3).abs() < 0.05);

    fracdiff(
        dir.path(),
        &["simulate", "--model", "tfe", "--theta", "1.5", "--eta", "1e-6", "--epsilon", "1e-5", "--out", "s.csv"],
    );
    let t = fracdiff(dir.path(), &["tfe", "s.csv"]);
    assert!((value(&t, "theta") - 1.5).abs() < 0.05, "{}", stdout(&t));
}

#[test]
fn experiment_writes_outputs_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "experiment = \"signature-check\"\nseed = 1\n").unwrap();
    let run = |out: &str, threads: &str| {
        let o = fracdiff(dir.path(), &["experiment", "run.toml", "--replicates", "4", "--threads", threads, "--out", out]);
        assert!(o.status.success(), "{o:?}");
        std::fs::read(dir.path().join(out).join("results.csv")).unwrap()
    };
    assert_eq!(run("one", "1"), run("two", "2"));
    let summary = std::fs::read_to_string(dir.path().join("one/summary.json")).unwrap();
    assert!(summary.contains("\"replicates\": 4"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "experiment = \"bias-sweep\"\n[bias-sweep]\nsigma = -1.0\n").unwrap();
    let bad = fracdiff(dir.path(), &["experiment", "bad.toml"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("bias-sweep.sigma"));

    std::fs::write(dir.path().join("typo.toml"), "experiment = \"clt\"\nreplicats = 3\n").unwrap();
    assert_eq!(fracdiff(dir.path(), &["experiment", "typo.toml"]).status.code(), Some(2));
    assert_eq!(fracdiff(dir.path(), &["experiment", "missing.toml"]).status.code(), Some(2));
    assert_eq!(fracdiff(dir.path(), &["simulate", "--hurst", "1.2"]).status.code(), Some(2));
    assert_eq!(fracdiff(dir.path(), &["no-such-command"]).status.code(), Some(2));

    std::fs::write(dir.path().join("line.csv"), "t,x\n0,0\n1,1\n2,2\n3,3\n4,4\n").unwrap();
    assert_eq!(fracdiff(dir.path(), &["estimate-hurst", "line.csv"]).status.code(), Some(3));
}
