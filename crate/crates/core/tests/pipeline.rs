use habitmfg_core::config::{parse_config, parse_config_file};
use habitmfg_core::harness::{cmd_figures, cmd_solve, convergence_report, figure_panels, run_command};
use habitmfg_core::table::CurveTable;
use habitmfg_core::{Error, Mode};
use std::fs;
use std::path::Path;

const MINIMAL: &str = "mode = linear\nT = 2\nmu = 0.2\nsigma = 0.6\np = 0.5\nx0 = 5\nz0 = 1\ndelta = 0.1\n";

fn with_out(text: &str, dir: &Path) -> String {
    format!("{text}output_dir = {}\n", dir.display())
}

fn read_table(path: &Path) -> CurveTable {
    CurveTable::from_csv(&fs::read_to_string(path).unwrap()).unwrap()
}

fn meta_value(path: &Path, key: &str) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).or_else(|| l.strip_prefix(&format!("{key} = "))).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing from {}", path.display()))
}

#[test]
fn minimal_config_gets_defaults() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.mode, Mode::Linear);
    assert_eq!(cfg.n_steps, 2000);
    assert_eq!(cfg.sim.seed, 42);
}

#[test]
fn config_errors_name_the_problem() {
    let err = parse_config(&MINIMAL.replace("x0 = 5", "x0 = 1")).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("x0 > z0*T"), "{err}");

    let text = MINIMAL.replace("mode = linear", "mode = multiplicative") + "alpha = 1.5\n";
    let err = parse_config(&text).unwrap_err();
    assert!(err.to_string().contains("alpha"), "{err}");

    let err = parse_config(&MINIMAL.replace("sigma = 0.6", "sigma = 0.6x")).unwrap_err();
    assert!(err.to_string().contains("sigma"), "{err}");

    let err = parse_config(&MINIMAL.replace("mu = 0.2\n", "")).unwrap_err();
    assert!(err.to_string().contains("mu"), "{err}");

    assert_eq!(parse_config_file(Path::new("/nonexistent/x.conf")).unwrap_err().exit_code(), 2);
}

#[test]
fn solve_writes_feasible_linear_meta_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&with_out(MINIMAL, dir.path())).unwrap();
    let files = cmd_solve(&cfg).unwrap();
    let first: Vec<Vec<u8>> = files.iter().map(|f| fs::read(f).unwrap()).collect();
    let k: f64 = meta_value(&dir.path().join("mfe_meta.txt"), "K_surplus").parse().unwrap();
    assert!(k > 0.0);
    let again = cmd_solve(&cfg).unwrap();
    for (f, bytes) in again.iter().zip(&first) {
        assert_eq!(&fs::read(f).unwrap(), bytes, "{}", f.display());
    }
    let csv = fs::read_to_string(&files[0]).unwrap();
    assert!(csv.contains(&cfg.hash));
    assert!(csv.contains("seed"));
}

#[test]
fn fig3_habit_non_decreasing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&with_out("figure = fig3\n", dir.path())).unwrap();
    let files = cmd_figures(&cfg).unwrap();
    let habit = files.iter().find(|f| f.to_string_lossy().ends_with("habit.csv")).unwrap();
    let table = read_table(habit);
    for name in table.columns.iter().skip(1) {
        let z = table.column(name).unwrap();
        assert!(z.windows(2).all(|w| w[1] >= w[0]), "{name}");
    }
}

#[test]
fn fig1_bottom_portfolio_flat_and_increasing_in_p() {
    let cfg = parse_config("figure = fig1_bottom\n").unwrap();
    let panels = figure_panels(&cfg).unwrap();
    let cols: Vec<Vec<f64>> = panels.portfolio.columns.iter().skip(1).map(|c| panels.portfolio.column(c).unwrap()).collect();
    for c in &cols {
        assert!(c.iter().all(|v| *v == c[0]));
    }
    assert!(cols.windows(2).all(|w| w[1][0] > w[0][0]));
}

#[test]
fn fig2_bottom_habit_decreasing_in_delta() {
    let cfg = parse_config("figure = fig2_bottom\n").unwrap();
    let panels = figure_panels(&cfg).unwrap();
    let cols: Vec<Vec<f64>> = panels.habit.columns.iter().skip(1).map(|c| panels.habit.column(c).unwrap()).collect();
    assert_eq!(cols.len(), 3);
    for w in cols.windows(2) {
        assert!(w[0].iter().zip(&w[1]).skip(1).all(|(a, b)| b < a));
    }
}

#[test]
fn converge_needs_three_sizes() {
    let cfg = parse_config("figure = fig3\nsim.n_list = 8\n").unwrap();
    let err = convergence_report(&cfg).unwrap_err();
    assert!(err.to_string().contains("need >= 3 points for slope"), "{err}");
}

#[test]
fn nashgap_outputs_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let text = with_out("figure = fig3\nsim.n_list = 2, 8\nsim.gap_M = 200\nsim.n_steps = 50\n", dir.path());
    let cfg = parse_config(&text).unwrap();
    let files = run_command("nashgap", &cfg).unwrap();
    let table = read_table(&files[0]);
    assert_eq!(table.column("n").unwrap(), vec![2.0, 8.0]);
    let se = table.column("std_error").unwrap();
    let ind = table.column("std_error_independent").unwrap();
    assert!(se.iter().zip(&ind).all(|(a, b)| a < b));
    let bytes = fs::read(&files[0]).unwrap();
    run_command("nashgap", &cfg).unwrap();
    assert_eq!(fs::read(&files[0]).unwrap(), bytes);
    assert!(matches!(run_command("bogus", &cfg), Err(Error::Config(_))));
}
