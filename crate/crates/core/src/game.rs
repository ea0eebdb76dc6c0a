//! Monte Carlo simulation of the `n`-player game under the candidate
//! strategies built from a mean field equilibrium.
//!
//! Every state variable that has a lognormal law (the linear-habit surplus
//! `Y^i`, the multiplicative-habit wealth `X^i`) is sampled exactly at the
//! grid nodes; only habit and utility integrals are discretised, by the
//! trapezoid rule on the same grid.
//!
//! Agent `i` on replication `m` draws from the stream `(seed, i, m)`, so
//! changing `n` or the number of replications never reshuffles the shocks
//! of existing agents.

use crate::error::{Error, Result};
use crate::grid::{cumtrapz, HabitCurve, TimeGrid};
use crate::linear::{u_linear, LinearMfe};
use crate::multiplicative::{h_mult, habit_exponent, MultMfe};
use crate::params::{HabitSpec, Mode, TypeVector};
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub population: Population,
    pub habit: HabitSpec,
    pub mode: Mode,
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub seed: u64,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population.is_empty() {
            return Err(Error::config("population must contain at least one agent"));
        }
        if self.n_paths == 0 {
            return Err(Error::config("number of paths M must be at least 1"));
        }
        if self.population.len() > u32::MAX as usize || self.n_paths > u32::MAX as usize / 2 {
            return Err(Error::config("population or path count too large for the stream index"));
        }
        for o in &self.population.agents {
            o.validate()?;
        }
        match self.mode {
            Mode::Linear => self.habit.validate_linear().map_err(|e| match e {
                Error::Infeasible(m) => Error::Config(m),
                e => e,
            }),
            Mode::Multiplicative => self.habit.validate_mult(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.population.len()
    }
}

/// One replication of the whole `n`-agent system. Per-agent arrays are
/// stored agent-major: entry `i * len + k` is agent `i` at node `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPath {
    pub path_id: u32,
    pub n_agents: usize,
    pub len: usize,
    pub wealth: Vec<f64>,
    pub habit: Vec<f64>,
    pub consumption: Vec<f64>,
    /// Linear mode: the surplus `Y^i`; multiplicative mode: empty.
    pub surplus: Vec<f64>,
    pub zbar_n: Vec<f64>,
    pub cbar_n: Vec<f64>,
}

impl SystemPath {
    fn slice<'a>(&self, v: &'a [f64], agent: usize) -> &'a [f64] {
        &v[agent * self.len..(agent + 1) * self.len]
    }

    pub fn wealth_of(&self, agent: usize) -> &[f64] {
        self.slice(&self.wealth, agent)
    }

    pub fn habit_of(&self, agent: usize) -> &[f64] {
        self.slice(&self.habit, agent)
    }

    pub fn consumption_of(&self, agent: usize) -> &[f64] {
        self.slice(&self.consumption, agent)
    }

    pub fn surplus_of(&self, agent: usize) -> &[f64] {
        self.slice(&self.surplus, agent)
    }
}

/// Brownian path on the grid from `n_steps` standard normals.
fn brownian(seed: u64, agent: usize, path: u32, grid: &TimeGrid, out: &mut [f64]) {
    let mut rng = RngStream::for_agent_path(seed, agent as u32, path);
    let sq = grid.dt().sqrt();
    out[0] = 0.0;
    let mut w = 0.0;
    for v in out[1..].iter_mut() {
        w += sq * rng.normal();
        *v = w;
    }
}

fn power_utility(x: f64, p: f64) -> f64 {
    x.powf(p) / p
}

/// Common interface of the two candidate-profile simulators.
pub trait GameSimulator: Sync {
    fn config(&self) -> &GameConfig;

    /// Mean field habit curve the candidate strategies are built from.
    fn mean_field_habit(&self) -> &HabitCurve;

    fn replicate(&self, path: u32) -> SystemPath;

    /// Realised objective of `agent` on one replication.
    fn objective_sample(&self, path: &SystemPath, agent: usize) -> Result<f64>;

    /// `J_i(deviation) − J_i(candidate)` on one replication with common
    /// shocks; `None` when the deviation leaves the utility's domain.
    fn gap_sample(&self, path: &SystemPath, agent: usize) -> Option<f64>;

    /// Deviation and candidate objectives on separate replications.
    fn deviation_objective(&self, path: &SystemPath, agent: usize) -> Option<f64>;
}

/// Candidate profile under linear habits.
#[derive(Debug, Clone)]
pub struct LinearGame {
    cfg: GameConfig,
    mfe: LinearMfe,
    /// Per agent: `∫_0^t (r_i − 1/u_i) − θ̃_i² t / 2` at the nodes.
    log_drift: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    vol: Vec<f64>,
    tail: Vec<f64>,
}

impl LinearGame {
    pub fn new(cfg: GameConfig, mfe: &LinearMfe) -> Result<Self> {
        cfg.validate()?;
        if cfg.mode != Mode::Linear {
            return Err(Error::config("linear simulator needs mode = linear"));
        }
        check_same_grid(&cfg, &mfe.grid)?;
        check_same_habit(&cfg.habit, &mfe.habit)?;
        let horizon = cfg.grid.horizon();
        let mut log_drift = Vec::new();
        let mut u = Vec::new();
        let mut vol = Vec::new();
        for o in &cfg.population.agents {
            let a = o.merton_rate();
            let ui: Vec<f64> = cfg.grid.nodes().iter().map(|&t| u_linear(a, horizon - t)).collect();
            let theta = o.surplus_vol();
            let drift = o.excess_growth() - 0.5 * theta * theta;
            let ld = cfg
                .grid
                .nodes()
                .iter()
                .zip(&ui)
                .map(|(&t, uu)| drift * t - ((u_linear(a, horizon) / uu).ln() - a * t))
                .collect();
            log_drift.push(ld);
            u.push(ui);
            vol.push(theta);
        }
        let tail = mfe.zbar.tail_integrals();
        Ok(Self { cfg, mfe: mfe.clone(), log_drift, u, vol, tail })
    }

    pub fn mfe(&self) -> &LinearMfe {
        &self.mfe
    }
}

impl GameSimulator for LinearGame {
    fn config(&self) -> &GameConfig {
        &self.cfg
    }

    fn mean_field_habit(&self) -> &HabitCurve {
        &self.mfe.zbar
    }

    fn replicate(&self, path: u32) -> SystemPath {
        let grid = &self.cfg.grid;
        let n = self.cfg.n_agents();
        let len = grid.len();
        let dt = grid.dt();
        let d = self.cfg.habit.delta;
        let k = self.mfe.k_surplus;
        let mut w = vec![0.0; len];
        let mut surplus = vec![0.0; n * len];
        let mut premium = vec![0.0; n * len];
        let mut mean_premium = vec![0.0; len];
        for i in 0..n {
            brownian(self.cfg.seed, i, path, grid, &mut w);
            for j in 0..len {
                let y = k * (self.log_drift[i][j] + self.vol[i] * w[j]).exp();
                surplus[i * len + j] = y;
                premium[i * len + j] = y / self.u[i][j];
            }
        }
        for i in 0..n {
            for j in 0..len {
                mean_premium[j] += premium[i * len + j];
            }
        }
        for v in mean_premium.iter_mut() {
            *v /= n as f64;
        }
        // dZ̄ⁿ = δ · mean_i(Y^i / u_i) dt
        let zbar_n: Vec<f64> = cumtrapz(&mean_premium, dt).iter().map(|c| self.cfg.habit.z0 + d * c).collect();
        let gap: Vec<f64> = zbar_n.iter().zip(self.mfe.zbar.values()).map(|(a, b)| a - b).collect();
        let drain = cumtrapz(&gap, dt);
        let discount: Vec<f64> = grid.nodes().iter().map(|&t| (d * t).exp()).collect();

        let mut wealth = vec![0.0; n * len];
        let mut habit = vec![0.0; n * len];
        let mut consumption = vec![0.0; n * len];
        let mut spread = vec![0.0; len];
        for i in 0..n {
            for j in 0..len {
                let idx = i * len + j;
                consumption[idx] = zbar_n[j] + premium[idx];
                wealth[idx] = surplus[idx] + self.tail[j] - drain[j];
                spread[j] = d * discount[j] * (premium[idx] - mean_premium[j]);
            }
            let dev = cumtrapz(&spread, dt);
            for j in 0..len {
                habit[i * len + j] = zbar_n[j] + dev[j] / discount[j];
            }
        }
        let cbar_n = zbar_n.iter().zip(&mean_premium).map(|(z, m)| z + m).collect();
        SystemPath { path_id: path, n_agents: n, len, wealth, habit, consumption, surplus, zbar_n, cbar_n }
    }

    fn objective_sample(&self, path: &SystemPath, agent: usize) -> Result<f64> {
        let p = self.cfg.population.agents[agent].p;
        let c = path.consumption_of(agent);
        let mut running = Vec::with_capacity(path.len);
        for (j, (ci, z)) in c.iter().zip(&path.zbar_n).enumerate() {
            let s = ci - z;
            if !(s > 0.0) {
                return Err(Error::Infeasible(format!(
                    "agent {agent} consumes {ci} below the average habit {z} at node {j} of path {}",
                    path.path_id
                )));
            }
            running.push(power_utility(s, p));
        }
        let x_t = *path.wealth_of(agent).last().expect("non-empty path");
        if !(x_t > 0.0) {
            return Err(Error::Infeasible(format!(
                "agent {agent} ends path {} with non-positive wealth {x_t}",
                path.path_id
            )));
        }
        Ok(*cumtrapz(&running, self.cfg.grid.dt()).last().unwrap() + power_utility(x_t, p))
    }

    fn gap_sample(&self, path: &SystemPath, agent: usize) -> Option<f64> {
        let dev = self.deviation_objective(path, agent)?;
        let cand = self.objective_sample(path, agent).ok()?;
        Some(dev - cand)
    }

    /// Agent `agent` follows the best response to the frozen `Z̄ˡ`,
    /// `C = Z̄ˡ + Y/u`, while everybody else keeps the candidate rule
    /// `C = Z̄ⁿ + Y/u` relative to the realised average habit. The average
    /// then obeys `dZ̄ = δ[(Z̄ˡ − Z̄)/n + mean(Y/u)] dt`, integrated by the
    /// trapezoid rule (exactly solvable since it is linear in `Z̄`).
    fn deviation_objective(&self, path: &SystemPath, agent: usize) -> Option<f64> {
        let grid = &self.cfg.grid;
        let n = path.n_agents as f64;
        let d = self.cfg.habit.delta;
        let dt = grid.dt();
        let p = self.cfg.population.agents[agent].p;
        let zl = self.mfe.zbar.values();
        // mean premium is C̄ⁿ − Z̄ⁿ on the candidate path
        let mean_premium: Vec<f64> = path.cbar_n.iter().zip(&path.zbar_n).map(|(c, z)| c - z).collect();
        let mut zdev = vec![self.cfg.habit.z0; path.len];
        let shrink = d / n;
        for j in 0..path.len - 1 {
            let f0 = shrink * (zl[j] - zdev[j]) + d * mean_premium[j];
            let forced = shrink * zl[j + 1] + d * mean_premium[j + 1];
            zdev[j + 1] = (zdev[j] + 0.5 * dt * (f0 + forced)) / (1.0 + 0.5 * dt * shrink);
        }
        let y = path.surplus_of(agent);
        let u = &self.u[agent];
        let mut running = Vec::with_capacity(path.len);
        for j in 0..path.len {
            let s = zl[j] + y[j] / u[j] - zdev[j];
            if !(s > 0.0) {
                return None;
            }
            running.push(power_utility(s, p));
        }
        // own wealth under the frozen-benchmark rule is Y_T plus an empty tail
        let y_t = *y.last().unwrap();
        Some(*cumtrapz(&running, dt).last().unwrap() + power_utility(y_t, p))
    }
}

/// Candidate profile under multiplicative habits.
#[derive(Debug, Clone)]
pub struct MultGame {
    cfg: GameConfig,
    mfe: MultMfe,
    /// Per agent: `∫_0^t (π_i μ_i − c_i) − σ_i²π_i² t / 2`.
    log_drift: Vec<Vec<f64>>,
    rate: Vec<Vec<f64>>,
    vol: Vec<f64>,
}

impl MultGame {
    pub fn new(cfg: GameConfig, mfe: &MultMfe) -> Result<Self> {
        cfg.validate()?;
        if cfg.mode != Mode::Multiplicative {
            return Err(Error::config("multiplicative simulator needs mode = multiplicative"));
        }
        check_same_grid(&cfg, &mfe.grid)?;
        check_same_habit(&cfg.habit, &mfe.habit)?;
        let mut log_drift = Vec::new();
        let mut rate = Vec::new();
        let mut vol = Vec::new();
        for o in &cfg.population.agents {
            let c = agent_rate(&cfg.grid, o, cfg.habit.alpha, &mfe.zbar)?;
            let theta = o.surplus_vol();
            let drift: Vec<f64> = c.iter().map(|c| o.excess_growth() - c).collect();
            let ld = cumtrapz(&drift, cfg.grid.dt())
                .iter()
                .zip(cfg.grid.nodes())
                .map(|(l, &t)| l - 0.5 * theta * theta * t)
                .collect();
            log_drift.push(ld);
            rate.push(c);
            vol.push(theta);
        }
        Ok(Self { cfg, mfe: mfe.clone(), log_drift, rate, vol })
    }

    pub fn mfe(&self) -> &MultMfe {
        &self.mfe
    }

    /// Deterministic consumption-to-wealth rate of `agent`.
    pub fn rate_of(&self, agent: usize) -> &[f64] {
        &self.rate[agent]
    }
}

/// `c_i = (Z̄ᵐ)^{α p_i/(p_i−1)} / h_i` with `h_i` built from the agent's own
/// type and the mean field benchmark.
fn agent_rate(grid: &TimeGrid, o: &TypeVector, alpha: f64, zbar: &HabitCurve) -> Result<Vec<f64>> {
    let k = habit_exponent(o, alpha);
    let h = h_mult(grid, o, alpha, zbar)?;
    Ok(zbar.values().iter().zip(&h).map(|(z, h)| z.powf(k) / h).collect())
}

impl GameSimulator for MultGame {
    fn config(&self) -> &GameConfig {
        &self.cfg
    }

    fn mean_field_habit(&self) -> &HabitCurve {
        &self.mfe.zbar
    }

    fn replicate(&self, path: u32) -> SystemPath {
        let grid = &self.cfg.grid;
        let n = self.cfg.n_agents();
        let len = grid.len();
        let dt = grid.dt();
        let d = self.cfg.habit.delta;
        let x0 = self.cfg.habit.x0;
        let z0 = self.cfg.habit.z0;
        let discount: Vec<f64> = grid.nodes().iter().map(|&t| (d * t).exp()).collect();
        let mut w = vec![0.0; len];
        let mut weighted = vec![0.0; len];
        let mut wealth = vec![0.0; n * len];
        let mut habit = vec![0.0; n * len];
        let mut consumption = vec![0.0; n * len];
        let mut zbar_n = vec![0.0; len];
        let mut cbar_n = vec![0.0; len];
        for i in 0..n {
            brownian(self.cfg.seed, i, path, grid, &mut w);
            for j in 0..len {
                let idx = i * len + j;
                let x = x0 * (self.log_drift[i][j] + self.vol[i] * w[j]).exp();
                wealth[idx] = x;
                consumption[idx] = self.rate[i][j] * x;
                weighted[j] = d * discount[j] * consumption[idx];
            }
            let cum = cumtrapz(&weighted, dt);
            for j in 0..len {
                habit[i * len + j] = (z0 + cum[j]) / discount[j];
            }
        }
        for i in 0..n {
            for j in 0..len {
                zbar_n[j] += habit[i * len + j];
                cbar_n[j] += consumption[i * len + j];
            }
        }
        for j in 0..len {
            zbar_n[j] /= n as f64;
            cbar_n[j] /= n as f64;
        }
        SystemPath { path_id: path, n_agents: n, len, wealth, habit, consumption, surplus: Vec::new(), zbar_n, cbar_n }
    }

    fn objective_sample(&self, path: &SystemPath, agent: usize) -> Result<f64> {
        Ok(self.mult_objective(path, agent, &path.zbar_n))
    }

    /// The candidate is already the best response to `Z̄ᵐ`; the measured gap
    /// is the error of replacing `Z̄ⁿ` by `Z̄ᵐ` in the agent's criterion.
    fn gap_sample(&self, path: &SystemPath, agent: usize) -> Option<f64> {
        let p = self.cfg.population.agents[agent].p;
        let alpha = self.cfg.habit.alpha;
        let c = path.consumption_of(agent);
        let diff: Vec<f64> = c
            .iter()
            .zip(self.mfe.zbar.values().iter().zip(&path.zbar_n))
            .map(|(c, (zm, zn))| power_utility(c / zm.powf(alpha), p) - power_utility(c / zn.powf(alpha), p))
            .collect();
        Some(*cumtrapz(&diff, self.cfg.grid.dt()).last().unwrap())
    }

    fn deviation_objective(&self, path: &SystemPath, agent: usize) -> Option<f64> {
        Some(self.mult_objective(path, agent, self.mfe.zbar.values()))
    }
}

impl MultGame {
    fn mult_objective(&self, path: &SystemPath, agent: usize, benchmark: &[f64]) -> f64 {
        let p = self.cfg.population.agents[agent].p;
        let alpha = self.cfg.habit.alpha;
        let running: Vec<f64> = path
            .consumption_of(agent)
            .iter()
            .zip(benchmark)
            .map(|(c, z)| power_utility(c / z.powf(alpha), p))
            .collect();
        let x_t = *path.wealth_of(agent).last().unwrap();
        *cumtrapz(&running, self.cfg.grid.dt()).last().unwrap() + power_utility(x_t, p)
    }
}

fn check_same_grid(cfg: &GameConfig, grid: &TimeGrid) -> Result<()> {
    if cfg.grid != *grid {
        return Err(Error::config(format!(
            "simulation grid ({} steps on [0,{}]) differs from the equilibrium grid ({} steps on [0,{}])",
            cfg.grid.n_steps(),
            cfg.grid.horizon(),
            grid.n_steps(),
            grid.horizon()
        )));
    }
    Ok(())
}

fn check_same_habit(a: &HabitSpec, b: &HabitSpec) -> Result<()> {
    if a != b {
        return Err(Error::config("game habit parameters differ from those of the equilibrium"));
    }
    Ok(())
}

/// Evaluate `f` on replications `range`, in parallel when enabled, returning
/// results in path order so that any later reduction is deterministic.
pub fn map_paths<T, F>(range: std::ops::Range<u32>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        range.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).collect()
    }
}

/// Stored replications with their random-stream provenance.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub mode: Mode,
    pub seed: u64,
    pub grid: TimeGrid,
    pub population: Population,
    pub paths: Vec<SystemPath>,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    /// Pathwise mean of the average habit `Z̄ⁿ`.
    pub fn mean_zbar(&self) -> Vec<f64> {
        self.mean_of(|p| &p.zbar_n)
    }

    /// Pathwise mean of the average consumption `C̄ⁿ`.
    pub fn mean_cbar(&self) -> Vec<f64> {
        self.mean_of(|p| &p.cbar_n)
    }

    fn mean_of(&self, f: impl Fn(&SystemPath) -> &Vec<f64>) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.len()];
        for path in &self.paths {
            for (a, v) in acc.iter_mut().zip(f(path)) {
                *a += v;
            }
        }
        let m = self.paths.len() as f64;
        acc.iter().map(|a| a / m).collect()
    }
}

pub fn simulate<S: GameSimulator>(sim: &S) -> PathEnsemble {
    let cfg = sim.config();
    PathEnsemble {
        mode: cfg.mode,
        seed: cfg.seed,
        grid: cfg.grid.clone(),
        population: cfg.population.clone(),
        paths: map_paths(0..cfg.n_paths as u32, |m| sim.replicate(m)),
    }
}

pub fn simulate_linear_game(cfg: &GameConfig, mfe: &LinearMfe) -> Result<PathEnsemble> {
    Ok(simulate(&LinearGame::new(cfg.clone(), mfe)?))
}

pub fn simulate_mult_game(cfg: &GameConfig, mfe: &MultMfe) -> Result<PathEnsemble> {
    Ok(simulate(&MultGame::new(cfg.clone(), mfe)?))
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Monte Carlo objective of `agent` over a stored ensemble.
pub fn estimate_objective<S: GameSimulator>(sim: &S, ensemble: &PathEnsemble, agent: usize) -> Result<(f64, f64)> {
    check_agent(sim.config(), agent)?;
    let samples = ensemble
        .paths
        .iter()
        .map(|p| sim.objective_sample(p, agent))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_and_se(&samples))
}

/// Streaming variant of [`estimate_objective`] over `n_paths` replications.
pub fn objective_stream<S: GameSimulator>(sim: &S, agent: usize, n_paths: usize) -> Result<(f64, f64)> {
    check_agent(sim.config(), agent)?;
    let samples = map_paths(0..n_paths as u32, |m| sim.objective_sample(&sim.replicate(m), agent))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_and_se(&samples))
}

fn check_agent(cfg: &GameConfig, agent: usize) -> Result<()> {
    if agent >= cfg.n_agents() {
        return Err(Error::config(format!("agent {agent} out of range for n = {}", cfg.n_agents())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashGapEstimate {
    pub n: usize,
    /// Mean gap under common random numbers.
    pub gap: f64,
    pub std_error: f64,
    /// Replications on which the deviation left the utility's domain;
    /// excluded from the estimate.
    pub infeasible: usize,
    pub used: usize,
    /// The same gap with deviation and candidate on disjoint replications.
    pub gap_independent: f64,
    pub std_error_independent: f64,
}

/// Gap between the auxiliary best response and the candidate profile for
/// `agent`, from `n_paths` replications.
pub fn nash_gap_estimate<S: GameSimulator>(sim: &S, agent: usize, n_paths: usize) -> Result<NashGapEstimate> {
    check_agent(sim.config(), agent)?;
    let m = n_paths as u32;
    let crn: Vec<Option<f64>> = map_paths(0..m, |k| sim.gap_sample(&sim.replicate(k), agent));
    let infeasible = crn.iter().filter(|g| g.is_none()).count();
    let used: Vec<f64> = crn.into_iter().flatten().collect();
    if used.len() < 2 {
        return Err(Error::Infeasible(format!("only {} of {n_paths} replications were feasible", used.len())));
    }
    let (gap, std_error) = mean_and_se(&used);

    let dev: Vec<f64> = map_paths(m..2 * m, |k| sim.deviation_objective(&sim.replicate(k), agent))
        .into_iter()
        .flatten()
        .collect();
    let cand: Vec<f64> = map_paths(0..m, |k| sim.objective_sample(&sim.replicate(k), agent).ok())
        .into_iter()
        .flatten()
        .collect();
    let (md, sd) = mean_and_se(&dev);
    let (mc, sc) = mean_and_se(&cand);
    Ok(NashGapEstimate {
        n: sim.config().n_agents(),
        gap,
        std_error,
        infeasible,
        used: used.len(),
        gap_independent: md - mc,
        std_error_independent: (sd * sd + sc * sc).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub n_values: Vec<usize>,
    pub metric: Vec<f64>,
    pub std_error: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// `sup_t Ê|Z̄ⁿ_t − Z̄_t|²` with the standard error at the maximising node.
pub fn habit_deviation<S: GameSimulator>(sim: &S, n_paths: usize) -> (f64, f64) {
    let target = sim.mean_field_habit().values().to_vec();
    let sq: Vec<Vec<f64>> = map_paths(0..n_paths as u32, |m| {
        sim.replicate(m).zbar_n.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).collect()
    });
    let len = target.len();
    let m = n_paths as f64;
    let mut best = (0.0, 0.0, 0usize);
    for j in 0..len {
        let mean = sq.iter().map(|v| v[j]).sum::<f64>() / m;
        if j == 0 || mean > best.0 {
            best = (mean, 0.0, j);
        }
    }
    let column: Vec<f64> = sq.iter().map(|v| v[best.2]).collect();
    let (mean, se) = mean_and_se(&column);
    (mean, se)
}

/// Habit-deviation metric over a list of population sizes. `build` returns
/// the simulator for a given `n`.
pub fn habit_deviation_metric<S, F>(n_list: &[usize], n_paths: usize, build: F) -> Result<ConvergenceReport>
where
    S: GameSimulator,
    F: Fn(usize) -> Result<S>,
{
    if n_list.len() < 3 {
        return Err(Error::config("need >= 3 points for slope"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("n_list must be strictly increasing"));
    }
    let mut metric = Vec::new();
    let mut std_error = Vec::new();
    for &n in n_list {
        let sim = build(n)?;
        let (m, se) = habit_deviation(&sim, n_paths);
        metric.push(m);
        std_error.push(se);
    }
    let points: Vec<(f64, f64)> = n_list.iter().map(|&n| n as f64).zip(metric.iter().copied()).collect();
    let (slope, intercept, r_squared) = fit_loglog_slope(&points)?;
    Ok(ConvergenceReport { n_values: n_list.to_vec(), metric, std_error, slope, intercept, r_squared })
}

/// Least squares on `(ln n, ln value)`: returns slope, intercept and R².
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::config("need >= 3 points for slope"));
    }
    if let Some((n, v)) = points.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0)) {
        return Err(Error::domain(format!("log-log fit needs positive data, got ({n}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("log-log fit needs at least two distinct n"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, intercept, r_squared))
}
