use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn crossbandit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossbandit"))
        .args(args)
        .current_dir(dir)
        .env_remove("CROSSBANDIT_WORKERS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) {
    fs::write(dir.join("exp.cfg"), body).unwrap();
}

const SMALL: &str = "env = bernoulli\nalgorithm = ucb1-cl\narms = 3\ncontexts = 5\nhorizon = 120\nreplications = 4\nseed = 11\n";

#[test]
fn run_writes_trajectory_and_finals() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    let out = crossbandit(&["run", "--config", "exp.cfg", "--output", "a"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trajectory = fs::read_to_string(dir.path().join("a/trajectory.csv")).unwrap();
    let mut lines = trajectory.lines();
    assert_eq!(lines.next(), Some("t,mean_regret,ci_half_width"));
    assert_eq!(lines.count(), 120);
    let finals = fs::read_to_string(dir.path().join("a/finals.csv")).unwrap();
    assert_eq!(finals.lines().next(), Some("replication,final_regret"));
    assert_eq!(finals.lines().count(), 1 + 4);
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    assert!(crossbandit(&["run", "--config", "exp.cfg", "--output", "a"], dir.path()).status.success());
    assert!(crossbandit(&["run", "--config", "exp.cfg", "--output", "b", "--sequential"], dir.path()).status.success());
    let threaded = Command::new(env!("CARGO_BIN_EXE_crossbandit"))
        .args(["run", "--config", "exp.cfg", "--output", "c"])
        .current_dir(dir.path())
        .env("CROSSBANDIT_WORKERS", "3")
        .output()
        .unwrap();
    assert!(threaded.status.success());
    for file in ["trajectory.csv", "finals.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(file)).unwrap(), "{file}");
        assert_eq!(a, fs::read(dir.path().join("c").join(file)).unwrap(), "{file}");
    }
}

#[test]
fn incompatible_pairing_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), &format!("{SMALL}algorithm = ucb1-pcl\n"));
    let out = crossbandit(&["run", "--config", "exp.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ucb1-pcl"));
}

#[test]
fn malformed_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "horizon = lots\n");
    let out = crossbandit(&["run", "--config", "exp.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn bad_worker_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_crossbandit"))
        .args(["run", "--config", "exp.cfg"])
        .current_dir(dir.path())
        .env("CROSSBANDIT_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invariants_of_two_cliques() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "4\n0 1\n1 0\n2 3\n3 2\n").unwrap();
    let out = crossbandit(&["invariants", "--graph", "g.txt"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("C,kappa,kappa_method,iota,lambda,nu2,nu2_gap"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..5], &["4", "2", "exact", "2", "2"]);
    assert!((row[5].parse::<f64>().unwrap() - 2.0).abs() < 0.04);
}

#[test]
fn malformed_graph_exits_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "3\n0 7\n").unwrap();
    let out = crossbandit(&["invariants", "--graph", "g.txt"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn replay_defaults_horizon_to_log_length() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("log.csv"),
        "t,value,highest_other_bid\n1,0.5,0.2\n2,0.9,0.4\n3,0.3,0.1\n4,0.7,0.6\n",
    )
    .unwrap();
    let out = crossbandit(&["replay", "--log", "log.csv", "--algo", "ucb1-cl", "--replications", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,mean_regret,ci_half_width"));
    assert_eq!(text.lines().count(), 1 + 4);
}

#[test]
fn replay_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "t,value,highest_other_bid\n1,0.5,0.2\n2,0.9\n").unwrap();
    let out = crossbandit(&["replay", "--log", "bad.csv", "--algo", "ucb1-cl"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    fs::write(dir.path().join("empty.csv"), "").unwrap();
    let out = crossbandit(&["replay", "--log", "empty.csv", "--algo", "ucb1-cl"], dir.path());
    assert_eq!(out.status.code(), Some(3));

    fs::write(dir.path().join("wide.csv"), "t,value,highest_other_bid\n1,0.5,3.0\n").unwrap();
    let out = crossbandit(&["replay", "--log", "wide.csv", "--algo", "ucb1-cl"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let out = crossbandit(
        &["replay", "--log", "wide.csv", "--algo", "ucb1-cl", "--trim-quantile", "1.0", "--replications", "1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn scaling_and_sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    let out = crossbandit(&["scaling", "--config", "exp.cfg", "--t-grid", "50,100,200,400", "--output", "s"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let scaling = fs::read_to_string(dir.path().join("s/scaling.csv")).unwrap();
    assert_eq!(scaling.lines().next(), Some("T,mean_final_regret,ci_half_width,included"));
    assert_eq!(scaling.lines().count(), 1 + 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("exponent"));

    let out = crossbandit(&["scaling", "--config", "exp.cfg", "--t-grid", "50,100,300,400"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = crossbandit(
        &["sweep", "--config", "exp.cfg", "--param", "algorithm", "--grid", "ucb1-cl,s-ucb1,exp3-cl"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("value,mean_final_regret,ci_half_width,best"));
    assert_eq!(text.lines().count(), 1 + 3);
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 1);

    let out = crossbandit(&["sweep", "--config", "exp.cfg", "--param", "nonsense", "--grid", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
