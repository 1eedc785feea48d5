//! Command-line contract: help text, exit codes, seed precedence, and the
//! stderr diagnostics scripts depend on.

use std::path::Path;
use std::process::{Command, Output};

fn efln(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_efln"));
    cmd.args(args).env_remove("EFLN_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    efln(args).output().unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_output_matches_golden() {
    let cases = [
        (vec!["--help"], include_str!("golden/help-main.txt")),
        (vec!["case1", "--help"], include_str!("golden/help-case1.txt")),
        (vec!["case2", "--help"], include_str!("golden/help-case2.txt")),
        (
            vec!["identify", "--help"],
            include_str!("golden/help-identify.txt"),
        ),
        (
            vec!["costcurves", "--help"],
            include_str!("golden/help-costcurves.txt"),
        ),
    ];
    for (args, golden) in cases {
        let out = run(&args);
        assert!(out.status.success(), "{args:?} failed");
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text, golden, "help text drifted for {args:?}");
    }
}

#[test]
fn version_flag_reports_success() {
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("efln"));
}

#[test]
fn missing_subcommand_is_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn unknown_sweep_value_is_usage_error() {
    let out = run(&["case1", "--sweep", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_algorithm_is_usage_error_naming_the_choices() {
    let out = run(&["case2", "--algos", "efln-isr,bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("bogus"), "stderr was: {err}");
    assert!(err.contains("efln-isr"), "stderr was: {err}");
}

#[test]
fn missing_data_file_is_runtime_error() {
    let out = run(&["identify", "--data", "/nonexistent/record.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_scenario_mismatch_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("other.toml");
    std::fs::write(&config, "scenario = \"costcurves\"\n").unwrap();
    let out = run(&["case1", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("costcurves"));
}

#[test]
fn too_few_gridpoints_is_usage_error() {
    let out = run(&["costcurves", "--gridpoints", "1", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn iterations_below_tail_window_is_usage_error() {
    let out = run(&["case2", "--trials", "1", "--iterations", "1200"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_env_seed_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("x.csv");
    let out = efln(&[
        "case2",
        "--trials",
        "1",
        "--iterations",
        "6000",
        "--no-calibrate",
        "--algos",
        "efln-isr",
        "--out",
        out_file.to_str().unwrap(),
    ])
    .env("EFLN_SEED", "not-a-number")
    .output()
    .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("EFLN_SEED"));
}

fn tiny_case2(out_file: &Path, seed_flag: Option<&str>, env_seed: Option<&str>) -> Vec<u8> {
    let mut args = vec![
        "case2",
        "--trials",
        "1",
        "--iterations",
        "6000",
        "--no-calibrate",
        "--algos",
        "efln-isr",
        "--jobs",
        "1",
        "--out",
    ];
    let out_str = out_file.to_str().unwrap();
    args.push(out_str);
    if let Some(seed) = seed_flag {
        args.push("--seed");
        args.push(seed);
    }
    let mut cmd = efln(&args);
    if let Some(seed) = env_seed {
        cmd.env("EFLN_SEED", seed);
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    std::fs::read(out_file).unwrap()
}

#[test]
fn env_seed_matches_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let via_env = tiny_case2(&dir.path().join("env.csv"), None, Some("7"));
    let via_flag = tiny_case2(&dir.path().join("flag.csv"), Some("7"), None);
    assert_eq!(via_env, via_flag);
    assert!(String::from_utf8_lossy(&via_env).contains("base_seed = 7"));
}

#[test]
fn seed_flag_overrides_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let flag_wins = tiny_case2(&dir.path().join("both.csv"), Some("7"), Some("8"));
    let via_flag = tiny_case2(&dir.path().join("flag.csv"), Some("7"), None);
    assert_eq!(flag_wins, via_flag);
}

#[test]
fn config_seed_wins_over_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
scenario = "case2"
calibrate = false
algorithms = ["efln-isr"]

[protocol]
n_trials = 1
n_iterations = 6000
tail_window = 600
base_seed = 9
jobs = 1
"#,
    )
    .unwrap();
    let mut with_env = efln(&["case2", "--config", config.to_str().unwrap(), "--out"]);
    let a = dir.path().join("a.csv");
    with_env.arg(&a).env("EFLN_SEED", "7");
    assert!(with_env.output().unwrap().status.success());

    let b = dir.path().join("b.csv");
    let plain = run(&[
        "case2",
        "--config",
        config.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(plain.status.success());
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());
    assert!(String::from_utf8_lossy(&bytes_a).contains("base_seed = 9"));
}

#[test]
fn reduced_trials_are_flagged_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("x.csv");
    let out = run(&[
        "case2",
        "--trials",
        "2",
        "--iterations",
        "6000",
        "--no-calibrate",
        "--algos",
        "efln-isr",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let err = stderr_of(&out);
    assert!(
        err.contains("warning: running 2 trials; the reference protocol is 50"),
        "stderr was: {err}"
    );
}

#[test]
fn calibration_reports_adjusted_steps_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("x.csv");
    let out = run(&[
        "case2",
        "--trials",
        "1",
        "--iterations",
        "6000",
        "--algos",
        "efln-isr,efln-lms",
        "--jobs",
        "1",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(
        err.contains("calibrated: efln-lms mu_w="),
        "stderr was: {err}"
    );
}

#[test]
fn default_out_path_is_scenario_and_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = efln(&["costcurves"]).current_dir(dir.path()).output().unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("costcurves.csv").is_file());

    let out = efln(&["costcurves", "--format", "json"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("costcurves.json").is_file());
}

#[test]
fn output_file_answers_as_config_for_other_formats() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("run.json");
    let csv = dir.path().join("run.csv");
    let first = run(&[
        "identify",
        "--synthetic",
        "--samples",
        "1500",
        "--format",
        "json",
        "--out",
        json.to_str().unwrap(),
    ]);
    assert!(first.status.success());
    let second = run(&[
        "identify",
        "--config",
        json.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(second.status.success(), "stderr: {}", stderr_of(&second));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("samples = 1500"), "csv was: {text}");
}
