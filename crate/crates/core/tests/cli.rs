use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_jumppath");

const CONFIG: &str = "\
[kernel]
dimension = 2
alpha = 1.0
kappa1 = 1.0
kappa2 = 1.0
modulation = isotropic

[sim]
eps_min = 0.01
t_max = T_MAX
seed = 77

[estimate]
estimator = exit
n = 400
domain = cube
domain_size = 1.0
";

fn write_config(dir: &Path, t_max: &str, drop_key: Option<&str>) -> PathBuf {
    let mut text = CONFIG.replace("T_MAX", t_max);
    if let Some(key) = drop_key {
        text = text
            .lines()
            .filter(|l| !l.starts_with(&format!("{key} =")))
            .map(|l| format!("{l}\n"))
            .collect();
    }
    let path = dir.join("run.ini");
    fs::write(&path, text).unwrap();
    path
}

fn jumppath(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("JUMPPATH_SEED").output().unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn zero_horizon_dump_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "0", None);
    let out = dir.path().join("path.csv");
    let run = jumppath(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert!(csv.lines().nth(1).unwrap() == "t,x1,x2");
    assert_eq!(data_rows(&csv), vec!["0,0,0"]);
}

#[test]
fn missing_alpha_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "1", Some("alpha"));
    let run = jumppath(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("'alpha'"));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "2", None);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let run = jumppath(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(0));
    }
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());
    assert!(data_rows(&String::from_utf8(first).unwrap()).len() > 10);
}

#[test]
fn seed_env_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "1", None);
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(BIN);
        cmd.args(["simulate", "--config", cfg.to_str().unwrap()]).env_remove("JUMPPATH_SEED");
        if let Some(s) = seed {
            cmd.env("JUMPPATH_SEED", s);
        }
        String::from_utf8(cmd.output().unwrap().stdout).unwrap()
    };
    let base = run(None);
    let env = run(Some("5"));
    assert!(base.lines().next().unwrap().ends_with("seed=77"));
    assert!(env.lines().next().unwrap().ends_with("seed=5"));
    assert_ne!(data_rows(&base), data_rows(&env));
}

#[test]
fn multiple_paths_go_to_numbered_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "0.5", None);
    let out = dir.path().join("p.csv");
    let run = jumppath(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--paths", "3"]);
    assert_eq!(run.status.code(), Some(0));
    for i in 0..3 {
        assert!(dir.path().join(format!("p.{i}.csv")).exists());
    }
}

#[test]
fn estimate_emits_one_row_and_validates_n() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "1", None);
    let cfg = cfg.to_str().unwrap();
    let run = jumppath(&["estimate", "--config", cfg]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = String::from_utf8(run.stdout).unwrap();
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "scenario,estimator,params_hash,mean,std_error,n,ci_lo,ci_hi,censored_frac,elapsed"
    );
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("run,exit,"));

    assert_eq!(jumppath(&["estimate", "--config", cfg, "--n", "1"]).status.code(), Some(2));
    assert_eq!(jumppath(&["estimate", "--config", cfg, "--estimator", "nope"]).status.code(), Some(2));
}

#[test]
fn occupation_of_whole_cube_matches_exit_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "1", None);
    let cfg = cfg.to_str().unwrap();
    let mean = |estimator: &str| {
        let run = jumppath(&["estimate", "--config", cfg, "--estimator", estimator, "--seed", "3"]);
        assert_eq!(run.status.code(), Some(0));
        let csv = String::from_utf8(run.stdout).unwrap();
        data_rows(&csv)[0].split(',').nth(3).unwrap().to_string()
    };
    assert_eq!(mean("exit"), mean("occupation"));
}

#[test]
fn verify_lists_and_rejects_unknown_scenarios() {
    let run = jumppath(&["verify", "--list"]);
    assert_eq!(run.status.code(), Some(0));
    let names: Vec<String> = String::from_utf8(run.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(
        names,
        [
            "density-decay",
            "exit-scaling",
            "hitting-linearity",
            "occupation-theorem",
            "support-theorem",
            "meyer-equivalence"
        ]
    );
    assert_eq!(jumppath(&["verify", "--scenario", "nope"]).status.code(), Some(2));
    assert_eq!(jumppath(&["verify", "--suite", "other"]).status.code(), Some(2));
    assert_eq!(jumppath(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_scenario_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(format!("r{threads}.csv"));
        let run = jumppath(&[
            "verify",
            "--scenario",
            "support-theorem",
            "--seed",
            "11",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stdout));
        reports.push(fs::read_to_string(out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert!(reports[0].starts_with("# config_hash=none seed=11\nscenario,criterion,check,value,target,passed\n"));
    assert_eq!(data_rows(&reports[0]).len(), 2);
}
