use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const LINEAR: &str = "mode = linear\nT = 2\nmu = 0.2\nsigma = 0.6\np = 0.5\nx0 = 5\nz0 = 1\ndelta = 0.1\nn_steps = 200\n";

fn habitmfg(args: &[&str], threads_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_habitmfg"));
    cmd.args(args).env_remove("HABITMFG_THREADS");
    if let Some(v) = threads_env {
        cmd.env("HABITMFG_THREADS", v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn solve_succeeds_and_honours_out() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "a.conf", LINEAR);
    let out_dir = dir.path().join("results");
    let out = habitmfg(&["solve", "--config", &conf, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("mfe.csv").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("mfe_meta.txt"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.conf", &LINEAR.replace("x0 = 5", "x0 = 1"));
    let out = habitmfg(&["solve", "--config", &bad], None);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("x0 > z0*T"));

    let missing = dir.path().join("nope.conf");
    assert_eq!(code(&habitmfg(&["solve", "--config", missing.to_str().unwrap()], None)), 2);

    let conf = write_config(dir.path(), "a.conf", LINEAR);
    assert_eq!(code(&habitmfg(&["solve", "--config", &conf, "--threads", "0"], None)), 2);
    assert_eq!(code(&habitmfg(&["solve", "--config", &conf], Some("many"))), 2);
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("figure = fig3\nsolver.max_iter = 1\nsolver.tol = 1e-15\noutput_dir = {}\n", dir.path().display());
    let conf = write_config(dir.path(), "nc.conf", &text);
    let out = habitmfg(&["solve", "--config", &conf], None);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn infeasible_replications_exit_4() {
    // volatile market, near-binding budget and a fast habit: most candidate
    // paths end below zero wealth
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "mode = linear\nT = 2\nmu = 0.5\nsigma = 1.5\np = 0.5\nx0 = 2.05\nz0 = 1\ndelta = 20\nn_steps = 200\n\
         sim.n_list = 2\nsim.gap_M = 3\nsim.n_steps = 50\noutput_dir = {}\n",
        dir.path().display()
    );
    let conf = write_config(dir.path(), "inf.conf", &text);
    let out = habitmfg(&["nashgap", "--config", &conf, "--seed", "5"], None);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn output_identical_across_thread_counts_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let text = "figure = fig1_top\nsim.n_list = 4, 8, 16\nsim.M = 40\nsim.n_steps = 40\n";
    let conf = write_config(dir.path(), "c.conf", text);
    let run = |sub: &str, threads: &str, env: Option<&str>| {
        let out_dir = dir.path().join(format!("{sub}-{threads}-{}", env.unwrap_or("none")));
        let out = habitmfg(&["converge", "--config", &conf, "--out", out_dir.to_str().unwrap(), "--threads", threads], env);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(out_dir.join("convergence.csv")).unwrap()
    };
    let one = run("a", "1", None);
    assert_eq!(one, run("b", "4", None));
    // the environment wins over an invalid flag value
    assert_eq!(one, run("c", "0", Some("2")));
}

#[test]
fn seed_flag_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "c.conf", "figure = fig3\nsim.n_list = 4, 8, 16\nsim.M = 40\nsim.n_steps = 40\n");
    let run = |seed: &str| {
        let out_dir = dir.path().join(format!("s{seed}"));
        let out = habitmfg(&["converge", "--config", &conf, "--out", out_dir.to_str().unwrap(), "--seed", seed], None);
        assert_eq!(code(&out), 0);
        fs::read_to_string(out_dir.join("convergence.csv")).unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    assert_ne!(a, b);
    assert!(a.contains("seed=1") || a.contains("seed = 1"), "{a}");
}
