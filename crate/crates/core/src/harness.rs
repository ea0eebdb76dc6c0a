//! The four experiment commands: each reads an [`ExperimentConfig`] and writes
//! CSV tables plus a `*_meta.txt` summary into the output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::game::{
    habit_deviation_metric, nash_gap_estimate, ConvergenceReport, GameConfig, LinearGame, MultGame, NashGapEstimate,
};
use crate::grid::{HabitCurve, TimeGrid};
use crate::linear::{solve_zbar_linear, LinearMfe};
use crate::multiplicative::{solve_zbar_mult, MultMfe, SolverOptions};
use crate::params::{HabitSpec, Mode, TypeVector};
use crate::population::sample_population;
use crate::table::{write_atomic, CurveTable};

/// Theoretical log-log slope of the squared habit deviation.
pub const TARGET_ORDER: f64 = -1.0;
pub const SLOPE_BAND: (f64, f64) = (-1.3, -0.7);

/// A solved equilibrium of either habit family.
#[derive(Debug, Clone)]
pub enum Equilibrium {
    Linear(LinearMfe),
    Multiplicative(MultMfe),
}

impl Equilibrium {
    pub fn solve(mode: Mode, grid: &TimeGrid, o: &TypeVector, habit: &HabitSpec, opts: &SolverOptions) -> Result<Self> {
        Ok(match mode {
            Mode::Linear => Equilibrium::Linear(solve_zbar_linear(grid, o, habit)?),
            Mode::Multiplicative => Equilibrium::Multiplicative(solve_zbar_mult(grid, o, habit, opts)?),
        })
    }

    pub fn zbar(&self) -> &HabitCurve {
        match self {
            Equilibrium::Linear(m) => &m.zbar,
            Equilibrium::Multiplicative(m) => &m.zbar,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        self.zbar().grid()
    }

    /// Portfolio fraction and consumption rate `C(t, x)` at every node.
    pub fn controls_at(&self, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut pi = Vec::with_capacity(self.grid().len());
        let mut c = Vec::with_capacity(self.grid().len());
        for &t in self.grid().nodes() {
            let (p, cc) = match self {
                Equilibrium::Linear(m) => (m.feedback(t, x)?.0, m.consumption(t, x)?),
                Equilibrium::Multiplicative(m) => (m.pi_star, m.consumption(t, x)),
            };
            pi.push(p);
            c.push(cc);
        }
        Ok((pi, c))
    }

    /// The `mfe.csv` table.
    pub fn table(&self) -> Result<CurveTable> {
        let t = self.grid().nodes();
        match self {
            Equilibrium::Linear(m) => CurveTable::from_columns(
                "t",
                t,
                &[
                    ("zbar".into(), m.zbar.values().to_vec()),
                    ("g_l".into(), m.g_l.clone()),
                    ("phi".into(), m.phi.clone()),
                ],
            ),
            Equilibrium::Multiplicative(m) => CurveTable::from_columns(
                "t",
                t,
                &[
                    ("zbar".into(), m.zbar.values().to_vec()),
                    ("g".into(), m.g_m.clone()),
                    ("c_star_rate".into(), m.c_star.clone()),
                ],
            ),
        }
    }

    /// Diagnostics as `(key, value)` pairs.
    pub fn diagnostics(&self) -> Vec<(String, String)> {
        let mut d = Vec::new();
        let mut put = |k: &str, v: String| d.push((k.to_string(), v));
        match self {
            Equilibrium::Linear(m) => {
                put("K_surplus", format!("{:.16e}", m.k_surplus));
                put("fixed_point_residual", format!("{:e}", m.fixed_point_residual));
                put("consistency_residual", format!("{:e}", m.consistency_residual()));
                put("merton_rate", format!("{:.16e}", m.merton_rate()));
                put("habit_integral", format!("{:.16e}", m.zbar.total_integral()));
            }
            Equilibrium::Multiplicative(m) => {
                put("pi_star", format!("{:.16e}", m.pi_star));
                put("iterations", m.iterations.to_string());
                put("residual", format!("{:e}", m.residual));
                put("solver_mode", format!("{:?}", m.mode));
                put("consistency_residual", format!("{:e}", m.consistency_residual()));
                put("transform_residual", format!("{:e}", m.transform_residual()));
                put("beta", format!("{:e}", m.beta));
                put("control_bound", format!("{:.16e}", m.control_bound()));
            }
        }
        d
    }
}

fn header(cfg: &ExperimentConfig, command: &str) -> Vec<(String, String)> {
    let mut h = vec![
        ("command".to_string(), command.to_string()),
        ("config_hash".to_string(), cfg.hash.clone()),
        ("seed".to_string(), cfg.sim.seed.to_string()),
        ("mode".to_string(), cfg.mode.name().to_string()),
    ];
    if let Some(f) = &cfg.figure {
        h.push(("figure".to_string(), f.clone()));
    }
    h
}

fn tagged(mut table: CurveTable, meta: &[(String, String)]) -> CurveTable {
    let mut all = meta.to_vec();
    all.append(&mut table.metadata);
    table.metadata = all;
    table
}

fn write_meta(path: &Path, meta: &[(String, String)]) -> Result<()> {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "{k}={v}");
    }
    write_atomic(path, s.as_bytes())
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

/// Solve the equilibrium at the base parameters and write `mfe.csv` and
/// `mfe_meta.txt`.
pub fn cmd_solve(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let eq = Equilibrium::solve(cfg.mode, &grid, &cfg.o, &cfg.habit, &cfg.solver)?;
    let head = header(cfg, "solve");
    let table = tagged(eq.table()?, &head);
    let csv = out_path(cfg, "mfe.csv");
    table.write(&csv)?;
    let mut meta = head;
    meta.extend(eq.diagnostics());
    let meta_path = out_path(cfg, "mfe_meta.txt");
    write_meta(&meta_path, &meta)?;
    Ok(vec![csv, meta_path])
}

/// The three figure panels for one sweep: consumption `C(t, x_eval)`,
/// portfolio `π(t, x_eval)` and habit `Z̄_t`, one column per sweep value.
#[derive(Debug, Clone)]
pub struct FigurePanels {
    pub consumption: CurveTable,
    pub portfolio: CurveTable,
    pub habit: CurveTable,
}

pub fn figure_panels(cfg: &ExperimentConfig) -> Result<FigurePanels> {
    let grid = cfg.grid()?;
    let mut cons = Vec::new();
    let mut port = Vec::new();
    let mut hab = Vec::new();
    for (v, o, habit) in cfg.sweep_points() {
        let eq = Equilibrium::solve(cfg.mode, &grid, &o, &habit, &cfg.solver)?;
        let (pi, c) = eq.controls_at(cfg.x_eval)?;
        let name = if v.is_nan() { "base".to_string() } else { format!("{}={v}", cfg.sweep_name()) };
        cons.push((name.clone(), c));
        port.push((name.clone(), pi));
        hab.push((name, eq.zbar().values().to_vec()));
    }
    let t = grid.nodes();
    Ok(FigurePanels {
        consumption: CurveTable::from_columns("t", t, &cons)?,
        portfolio: CurveTable::from_columns("t", t, &port)?,
        habit: CurveTable::from_columns("t", t, &hab)?,
    })
}

pub fn cmd_figures(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let panels = figure_panels(cfg)?;
    let stem = cfg.figure.clone().unwrap_or_else(|| format!("{}_{}", cfg.mode.name(), cfg.sweep_name()));
    let mut head = header(cfg, "figures");
    head.push(("x_eval".into(), format!("{:?}", cfg.x_eval)));
    head.push(("sweep".into(), cfg.sweep_name().into()));
    head.push((
        "parameters".into(),
        format!(
            "T={} mu={} sigma={} p={} x0={} z0={} delta={} alpha={}",
            cfg.habit.horizon, cfg.o.mu, cfg.o.sigma, cfg.o.p, cfg.habit.x0, cfg.habit.z0, cfg.habit.delta, cfg.habit.alpha
        ),
    ));
    if cfg.figure.as_deref() == Some("fig1_top") {
        head.push(("figure1_plist_source".into(), "body_text".into()));
    }
    let mut written = Vec::new();
    for (suffix, table) in [
        ("consumption", panels.consumption),
        ("portfolio", panels.portfolio),
        ("habit", panels.habit),
    ] {
        let path = out_path(cfg, &format!("{stem}_{suffix}.csv"));
        tagged(table, &head).write(&path)?;
        written.push(path);
    }
    let meta_path = out_path(cfg, "figures_meta.txt");
    write_meta(&meta_path, &head)?;
    written.push(meta_path);
    Ok(written)
}

fn game_config(cfg: &ExperimentConfig, grid: &TimeGrid, n: usize, n_paths: usize) -> Result<GameConfig> {
    Ok(GameConfig {
        population: sample_population(cfg.o, n, cfg.sim.scheme, cfg.sim.seed)?,
        habit: cfg.habit,
        mode: cfg.mode,
        grid: grid.clone(),
        n_paths,
        seed: cfg.sim.seed,
    })
}

/// Habit-deviation convergence study over `sim.n_list`.
pub fn convergence_report(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let grid = cfg.sim_grid()?;
    let m = cfg.sim.m;
    match Equilibrium::solve(cfg.mode, &grid, &cfg.o, &cfg.habit, &cfg.solver)? {
        Equilibrium::Linear(mfe) => habit_deviation_metric(&cfg.sim.n_list, m, |n| {
            LinearGame::new(game_config(cfg, &grid, n, m)?, &mfe)
        }),
        Equilibrium::Multiplicative(mfe) => habit_deviation_metric(&cfg.sim.n_list, m, |n| {
            MultGame::new(game_config(cfg, &grid, n, m)?, &mfe)
        }),
    }
}

pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let report = convergence_report(cfg)?;
    let head = header(cfg, "converge");
    let mut table = CurveTable::new(["n", "metric", "std_error"]);
    for ((n, m), se) in report.n_values.iter().zip(&report.metric).zip(&report.std_error) {
        table.push_row(vec![*n as f64, *m, *se])?;
    }
    let csv = out_path(cfg, "convergence.csv");
    tagged(table, &head).write(&csv)?;
    let pass = report.slope >= SLOPE_BAND.0 && report.slope <= SLOPE_BAND.1;
    let mut meta = head;
    meta.extend([
        ("metric".to_string(), "sup_t E|Zbar^n_t - Zbar_t|^2".to_string()),
        ("M".to_string(), cfg.sim.m.to_string()),
        ("sim_n_steps".to_string(), cfg.sim.n_steps.to_string()),
        ("scheme".to_string(), cfg.sim.scheme.name().to_string()),
        ("slope".to_string(), format!("{:.6}", report.slope)),
        ("intercept".to_string(), format!("{:.6}", report.intercept)),
        ("r_squared".to_string(), format!("{:.6}", report.r_squared)),
        ("target_order".to_string(), format!("{TARGET_ORDER}")),
        ("band".to_string(), format!("[{}, {}]", SLOPE_BAND.0, SLOPE_BAND.1)),
        ("verdict".to_string(), if pass { "PASS" } else { "FAIL" }.to_string()),
    ]);
    let meta_path = out_path(cfg, "convergence_meta.txt");
    write_meta(&meta_path, &meta)?;
    Ok(vec![csv, meta_path])
}

/// Nash-gap estimates for every `n` in `sim.n_list`.
pub fn nash_gaps(cfg: &ExperimentConfig) -> Result<Vec<NashGapEstimate>> {
    let grid = cfg.sim_grid()?;
    let m = cfg.sim.gap_m;
    let agent = cfg.sim.agent;
    let eq = Equilibrium::solve(cfg.mode, &grid, &cfg.o, &cfg.habit, &cfg.solver)?;
    cfg.sim
        .n_list
        .iter()
        .map(|&n| {
            let gc = game_config(cfg, &grid, n, m)?;
            match &eq {
                Equilibrium::Linear(mfe) => nash_gap_estimate(&LinearGame::new(gc, mfe)?, agent, m),
                Equilibrium::Multiplicative(mfe) => nash_gap_estimate(&MultGame::new(gc, mfe)?, agent, m),
            }
        })
        .collect()
}

/// `gap(n_last) < gap(n_first) + 2·SE`, with the standard error of the
/// difference of the two independent estimates.
pub fn gap_non_increasing(gaps: &[NashGapEstimate]) -> bool {
    match (gaps.first(), gaps.last()) {
        (Some(a), Some(b)) => b.gap < a.gap + 2.0 * a.std_error.hypot(b.std_error),
        _ => false,
    }
}

pub fn cmd_nashgap(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let gaps = nash_gaps(cfg)?;
    let head = header(cfg, "nashgap");
    let mut table = CurveTable::new([
        "n",
        "gap",
        "std_error",
        "gap_independent",
        "std_error_independent",
        "infeasible",
        "used",
    ]);
    for g in &gaps {
        table.push_row(vec![
            g.n as f64,
            g.gap,
            g.std_error,
            g.gap_independent,
            g.std_error_independent,
            g.infeasible as f64,
            g.used as f64,
        ])?;
    }
    let csv = out_path(cfg, "nashgap.csv");
    tagged(table, &head).write(&csv)?;
    let mut meta = head;
    meta.extend([
        ("agent".to_string(), cfg.sim.agent.to_string()),
        ("M".to_string(), cfg.sim.gap_m.to_string()),
        ("sim_n_steps".to_string(), cfg.sim.n_steps.to_string()),
        (
            "deviation".to_string(),
            match cfg.mode {
                Mode::Linear => "best response to the frozen mean-field habit",
                Mode::Multiplicative => "candidate strategy judged against the mean-field habit",
            }
            .to_string(),
        ),
        ("non_increasing".to_string(), if gap_non_increasing(&gaps) { "PASS" } else { "FAIL" }.to_string()),
        (
            "crn_reduces_se".to_string(),
            gaps.iter().all(|g| g.std_error < g.std_error_independent).to_string(),
        ),
        ("infeasible_total".to_string(), gaps.iter().map(|g| g.infeasible).sum::<usize>().to_string()),
    ]);
    let meta_path = out_path(cfg, "nashgap_meta.txt");
    write_meta(&meta_path, &meta)?;
    Ok(vec![csv, meta_path])
}

/// Dispatch by command name.
pub fn run_command(name: &str, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    match name {
        "solve" => cmd_solve(cfg),
        "figures" => cmd_figures(cfg),
        "converge" => cmd_converge(cfg),
        "nashgap" => cmd_nashgap(cfg),
        other => Err(Error::config(format!("unknown command {other:?}"))),
    }
}
