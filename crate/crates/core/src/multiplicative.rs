//! Mean field equilibrium under multiplicative (non-addictive) external
//! habits.
//!
//! For a deterministic benchmark `Z̄` the value is `V(t,x) = x^p g(t) / p`
//! with `g = h^{1−p}` and
//!
//! ```text
//! h' = −a h − Z̄^k,  h(T) = 1,  k = αp/(p−1),
//! h(t) = e^{a(T−t)} + ∫_t^T e^{a(s−t)} Z̄_s^k ds.
//! ```
//!
//! Optimal consumption `c* = Z̄^k / h` is deterministic, so the consistency
//! condition is a functional ODE for `Z̄` alone, solved here by damped
//! Picard iteration.

use crate::error::{Error, Result};
use crate::grid::{cumtrapz, sup_distance, HabitCurve, TimeGrid};
use crate::linear::check_horizon;
use crate::params::{HabitSpec, TypeVector};

/// Exponent `αp/(p−1)` applied to the benchmark.
pub fn habit_exponent(o: &TypeVector, alpha: f64) -> f64 {
    alpha * o.p / (o.p - 1.0)
}

/// `h = g^{1/(1−p)}` at every node, by backward trapezoid recursion of the
/// tail integral.
pub fn h_mult(grid: &TimeGrid, o: &TypeVector, alpha: f64, zbar: &HabitCurve) -> Result<Vec<f64>> {
    grid.check_len(zbar.values())?;
    let k = habit_exponent(o, alpha);
    let forcing: Vec<f64> = zbar.values().iter().map(|z| z.powf(k)).collect();
    Ok(h_from_forcing(grid, o.merton_rate(), &forcing))
}

fn h_from_forcing(grid: &TimeGrid, a: f64, forcing: &[f64]) -> Vec<f64> {
    let n = grid.n_steps();
    let dt = grid.dt();
    let growth = (a * dt).exp();
    let mut h = vec![0.0; n + 1];
    h[n] = 1.0;
    for j in (0..n).rev() {
        h[j] = growth * h[j + 1] + 0.5 * dt * (forcing[j] + growth * forcing[j + 1]);
    }
    h
}

pub fn g_mult(grid: &TimeGrid, o: &TypeVector, alpha: f64, zbar: &HabitCurve) -> Result<Vec<f64>> {
    Ok(h_mult(grid, o, alpha, zbar)?.iter().map(|h| h.powf(1.0 - o.p)).collect())
}

/// Equilibrium consumption-to-wealth rate `c* = Z̄^k g^{1/(p−1)}`.
pub fn consumption_mult(grid: &TimeGrid, o: &TypeVector, alpha: f64, zbar: &HabitCurve) -> Result<Vec<f64>> {
    let k = habit_exponent(o, alpha);
    let h = h_mult(grid, o, alpha, zbar)?;
    Ok(zbar.values().iter().zip(&h).map(|(z, h)| z.powf(k) / h).collect())
}

/// `f(t) = E[X*_t] = x0 exp ∫_0^t (μ²/((1−p)σ²) − Z̄^k g^{1/(p−1)})`.
pub fn expected_wealth_mult(
    grid: &TimeGrid,
    o: &TypeVector,
    alpha: f64,
    zbar: &HabitCurve,
    g_m: &[f64],
    x0: f64,
) -> Result<Vec<f64>> {
    grid.check_len(zbar.values())?;
    grid.check_len(g_m)?;
    let k = habit_exponent(o, alpha);
    let c: Vec<f64> = zbar
        .values()
        .iter()
        .zip(g_m)
        .map(|(z, g)| z.powf(k) * g.powf(o.inv_pm1()))
        .collect();
    Ok(wealth_from_rate(grid, o, &c, x0))
}

fn wealth_from_rate(grid: &TimeGrid, o: &TypeVector, c: &[f64], x0: f64) -> Vec<f64> {
    let r = o.excess_growth();
    let drift: Vec<f64> = c.iter().map(|c| r - c).collect();
    cumtrapz(&drift, grid.dt()).iter().map(|l| x0 * l.exp()).collect()
}

/// One application of the consistency map
/// `Z ↦ e^{−δt}(z0 + ∫_0^t δ e^{δs} c*(s) f(s) ds)`.
pub fn picard_step(zbar: &HabitCurve, o: &TypeVector, habit: &HabitSpec, grid: &TimeGrid) -> Result<HabitCurve> {
    let values = step_values(zbar, o, habit, grid)?;
    HabitCurve::new(grid.clone(), values)
}

fn step_values(zbar: &HabitCurve, o: &TypeVector, habit: &HabitSpec, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.check_len(zbar.values())?;
    let beta = habit.beta(o.p);
    if let Some(z) = zbar.values().iter().find(|&&z| z < beta) {
        return Err(Error::domain(format!("habit iterate {z} below the lower bound beta = {beta}")));
    }
    let c = consumption_mult(grid, o, habit.alpha, zbar)?;
    let f = wealth_from_rate(grid, o, &c, habit.x0);
    Ok(rebuild_habit(grid, habit, &c, &f))
}

fn rebuild_habit(grid: &TimeGrid, habit: &HabitSpec, c: &[f64], f: &[f64]) -> Vec<f64> {
    let d = habit.delta;
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(c.iter().zip(f))
        .map(|(&s, (c, f))| d * (d * s).exp() * c * f)
        .collect();
    let cum = cumtrapz(&integrand, grid.dt());
    grid.nodes()
        .iter()
        .zip(&cum)
        .map(|(&t, i)| (-d * t).exp() * (habit.z0 + i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverMode {
    /// Damped Picard on the whole horizon.
    Picard,
    /// Block Gauss–Seidel: Picard sweeps restricted to consecutive time
    /// blocks, repeated until the global residual meets the tolerance.
    Stitched { blocks: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub damping_floor: f64,
    pub mode: SolverMode,
    /// Blocks for the stitched fallback after a failed plain run; 0 disables
    /// the fallback.
    pub stitch_blocks: usize,
    /// Initial iterate; `z0 e^{−δt}` when absent.
    pub init: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            damping: 1.0,
            damping_floor: 0.125,
            mode: SolverMode::Picard,
            stitch_blocks: 8,
            init: None,
        }
    }
}

impl SolverOptions {
    pub fn with_init(mut self, init: Vec<f64>) -> Self {
        self.init = Some(init);
        self
    }
}

/// Solved multiplicative-habit equilibrium.
#[derive(Debug, Clone)]
pub struct MultMfe {
    pub grid: TimeGrid,
    pub o: TypeVector,
    pub habit: HabitSpec,
    pub zbar: HabitCurve,
    pub h: Vec<f64>,
    pub g_m: Vec<f64>,
    pub c_star: Vec<f64>,
    pub f_wealth: Vec<f64>,
    pub pi_star: f64,
    pub beta: f64,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub mode: SolverMode,
}

pub fn solve_zbar_mult(grid: &TimeGrid, o: &TypeVector, habit: &HabitSpec, opts: &SolverOptions) -> Result<MultMfe> {
    o.validate()?;
    habit.validate_mult()?;
    check_horizon(grid, habit)?;
    if !(opts.tol > 0.0) || opts.max_iter == 0 || !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::config("solver needs tol > 0, max_iter >= 1 and damping in (0,1]"));
    }
    let init = match &opts.init {
        Some(v) => {
            grid.check_len(v)?;
            v.clone()
        }
        None => grid.nodes().iter().map(|&t| habit.z0 * (-habit.delta * t).exp()).collect(),
    };
    let outcome = match opts.mode {
        SolverMode::Picard => match picard(grid, o, habit, opts, init.clone()) {
            Err(Error::NonConvergence { .. }) if opts.stitch_blocks > 1 => {
                let mode = SolverMode::Stitched { blocks: opts.stitch_blocks };
                stitched(grid, o, habit, opts, init, opts.stitch_blocks).map(|r| (r, mode))
            }
            other => other.map(|r| (r, SolverMode::Picard)),
        },
        SolverMode::Stitched { blocks } => stitched(grid, o, habit, opts, init, blocks).map(|r| (r, opts.mode)),
    };
    let ((z, iterations, history), mode) = outcome?;
    let residual = *history.last().expect("at least one iteration");
    let zbar = HabitCurve::new(grid.clone(), z)?;
    let h = h_mult(grid, o, habit.alpha, &zbar)?;
    let g_m: Vec<f64> = h.iter().map(|h| h.powf(1.0 - o.p)).collect();
    let k = habit_exponent(o, habit.alpha);
    let c_star: Vec<f64> = zbar.values().iter().zip(&h).map(|(z, h)| z.powf(k) / h).collect();
    let f_wealth = wealth_from_rate(grid, o, &c_star, habit.x0);
    Ok(MultMfe {
        grid: grid.clone(),
        o: *o,
        habit: *habit,
        zbar,
        h,
        g_m,
        c_star,
        f_wealth,
        pi_star: o.merton_fraction(),
        beta: habit.beta(o.p),
        iterations,
        residual,
        residual_history: history,
        mode,
    })
}

type Iterate = (Vec<f64>, usize, Vec<f64>);

fn picard(grid: &TimeGrid, o: &TypeVector, habit: &HabitSpec, opts: &SolverOptions, mut z: Vec<f64>) -> Result<Iterate> {
    let mut lambda = opts.damping;
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let image = step_values(&HabitCurve::new(grid.clone(), z.clone())?, o, habit, grid)?;
        let res = sup_distance(&image, &z);
        if history.last().is_some_and(|&prev| res > prev) {
            lambda = (0.5 * lambda).max(opts.damping_floor.min(opts.damping));
        }
        history.push(res);
        if res <= opts.tol {
            return Ok((z, it, history));
        }
        for (zi, ni) in z.iter_mut().zip(&image) {
            *zi = (1.0 - lambda) * *zi + lambda * ni;
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, residual: *history.last().unwrap() })
}

fn stitched(
    grid: &TimeGrid,
    o: &TypeVector,
    habit: &HabitSpec,
    opts: &SolverOptions,
    mut z: Vec<f64>,
    blocks: usize,
) -> Result<Iterate> {
    let n = grid.len();
    let blocks = blocks.clamp(1, n);
    let edges: Vec<usize> = (0..=blocks).map(|b| b * n / blocks).collect();
    let mut history = Vec::new();
    let mut evaluations = 0usize;
    let max_evals = opts.max_iter * blocks;
    loop {
        let image = step_values(&HabitCurve::new(grid.clone(), z.clone())?, o, habit, grid)?;
        evaluations += 1;
        let res = sup_distance(&image, &z);
        history.push(res);
        if res <= opts.tol {
            return Ok((z, evaluations, history));
        }
        if evaluations >= max_evals {
            return Err(Error::NonConvergence { iterations: evaluations, residual: res });
        }
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut lambda = opts.damping;
            let mut prev = f64::INFINITY;
            for _ in 0..opts.max_iter {
                let image = step_values(&HabitCurve::new(grid.clone(), z.clone())?, o, habit, grid)?;
                evaluations += 1;
                let block_res = sup_distance(&image[lo..hi], &z[lo..hi]);
                if block_res > prev {
                    lambda = (0.5 * lambda).max(opts.damping_floor.min(opts.damping));
                }
                prev = block_res;
                if block_res <= 0.1 * opts.tol {
                    break;
                }
                for j in lo..hi {
                    z[j] = (1.0 - lambda) * z[j] + lambda * image[j];
                }
            }
        }
    }
}

impl MultMfe {
    pub fn habit_exponent(&self) -> f64 {
        habit_exponent(&self.o, self.habit.alpha)
    }

    /// `h(t)` between nodes, continuing the backward recursion from the next
    /// node with the interpolated benchmark. Agrees with `self.h` at nodes.
    pub fn h_at(&self, t: f64) -> f64 {
        let grid = &self.grid;
        let (j, s) = grid.locate(t);
        if s == 0.0 {
            return self.h[j];
        }
        let a = self.o.merton_rate();
        let k = self.habit_exponent();
        let tau = grid.dt() - s;
        let growth = (a * tau).exp();
        let f_t = self.zbar.at(t).powf(k);
        let f_next = self.zbar.values()[j + 1].powf(k);
        growth * self.h[j + 1] + 0.5 * tau * (f_t + growth * f_next)
    }

    pub fn g_at(&self, t: f64) -> f64 {
        self.h_at(t).powf(1.0 - self.o.p)
    }

    /// `(π*, c*)`, both independent of wealth.
    pub fn feedback(&self, t: f64) -> (f64, f64) {
        (self.pi_star, self.zbar.at(t).powf(self.habit_exponent()) / self.h_at(t))
    }

    /// Consumption rate `C = c* x`.
    pub fn consumption(&self, t: f64, x: f64) -> f64 {
        self.feedback(t).1 * x
    }

    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("wealth must be positive, got {x}")));
        }
        Ok(x.powf(self.o.p) * self.g_at(t) / self.o.p)
    }

    /// `max(|π*|, max c*)`: the uniform control bound realised by the
    /// equilibrium.
    pub fn control_bound(&self) -> f64 {
        self.c_star.iter().copied().fold(self.pi_star.abs(), f64::max)
    }

    /// Sup-distance between `Z̄` and the integrated consistency equation.
    pub fn consistency_residual(&self) -> f64 {
        sup_distance(&rebuild_habit(&self.grid, &self.habit, &self.c_star, &self.f_wealth), self.zbar.values())
    }

    /// Relative sup-error of the power transform `Ẑ = e^{δt/(1−p)} Z̄^{1/(1−p)}`
    /// against its integrated dynamics
    /// `dẐ = δ/(1−p) e^{δt/(1−p)} Z̄^{p(1−α)/(1−p)} g^{1/(p−1)} f dt`.
    pub fn transform_residual(&self) -> f64 {
        let q = 1.0 - self.o.p;
        let d = self.habit.delta;
        let alpha = self.habit.alpha;
        let nodes = self.grid.nodes();
        let hat: Vec<f64> = nodes
            .iter()
            .zip(self.zbar.values())
            .map(|(&t, z)| (d * t / q).exp() * z.powf(1.0 / q))
            .collect();
        let integrand: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let z = self.zbar.values()[j];
                d / q * (d * t / q).exp() * z.powf(self.o.p * (1.0 - alpha) / q) / self.h[j] * self.f_wealth[j]
            })
            .collect();
        let cum = cumtrapz(&integrand, self.grid.dt());
        hat.iter()
            .zip(&cum)
            .map(|(h, c)| ((hat[0] + c) - h).abs() / h)
            .fold(0.0, f64::max)
    }
}

pub fn value_mult(t: f64, x: f64, mfe: &MultMfe) -> Result<f64> {
    mfe.value(t, x)
}
