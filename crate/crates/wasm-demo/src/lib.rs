//! Browser bindings: equilibrium curves for both habit families and a small
//! `n`-player habit simulation. Every function returns one flat
//! `Float64Array` made of consecutive blocks of `n_steps + 1` values.

use habitmfg_core::game::{GameConfig, GameSimulator, LinearGame, MultGame};
use habitmfg_core::linear::solve_zbar_linear;
use habitmfg_core::multiplicative::{solve_zbar_mult, SolverOptions};
use habitmfg_core::{make_grid, HabitSpec, Mode, Population, TypeVector};
use wasm_bindgen::prelude::*;

type Out = Result<Vec<f64>, String>;

fn setup(mu: f64, sigma: f64, p: f64, x0: f64, z0: f64, delta: f64, horizon: f64) -> Result<(TypeVector, HabitSpec), String> {
    let o = TypeVector::new(mu, sigma, p).map_err(|e| e.to_string())?;
    Ok((o, HabitSpec::new(x0, z0, delta, horizon)))
}

/// Blocks: `t`, `Z̄`, `C(t, x)`, `π(t, x)`.
pub fn linear_curves_impl(
    mu: f64,
    sigma: f64,
    p: f64,
    x0: f64,
    z0: f64,
    delta: f64,
    horizon: f64,
    x: f64,
    n_steps: usize,
) -> Out {
    let (o, habit) = setup(mu, sigma, p, x0, z0, delta, horizon)?;
    let grid = make_grid(horizon, n_steps).map_err(|e| e.to_string())?;
    let mfe = solve_zbar_linear(&grid, &o, &habit).map_err(|e| e.to_string())?;
    let mut c = Vec::new();
    let mut pi = Vec::new();
    for &t in grid.nodes() {
        // past the wealth needed to fund the remaining habit the feedback is undefined
        pi.push(mfe.feedback(t, x).map_or(f64::NAN, |f| f.0));
        c.push(mfe.consumption(t, x).unwrap_or(f64::NAN));
    }
    let mut out = grid.nodes().to_vec();
    out.extend_from_slice(mfe.zbar.values());
    out.extend(c);
    out.extend(pi);
    Ok(out)
}

/// Blocks: `t`, `Z̄`, `C(t, x)`, `π`, then one trailing value with the
/// number of fixed-point iterations.
pub fn mult_curves_impl(
    mu: f64,
    sigma: f64,
    p: f64,
    x0: f64,
    z0: f64,
    delta: f64,
    alpha: f64,
    horizon: f64,
    x: f64,
    n_steps: usize,
) -> Out {
    let (o, habit) = setup(mu, sigma, p, x0, z0, delta, horizon)?;
    let habit = habit.with_alpha(alpha);
    let grid = make_grid(horizon, n_steps).map_err(|e| e.to_string())?;
    let mfe = solve_zbar_mult(&grid, &o, &habit, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let mut out = grid.nodes().to_vec();
    out.extend_from_slice(mfe.zbar.values());
    out.extend(mfe.c_star.iter().map(|c| c * x));
    out.extend(std::iter::repeat(mfe.pi_star).take(grid.len()));
    out.push(mfe.iterations as f64);
    Ok(out)
}

/// Blocks: `t`, mean field `Z̄`, then the average habit `Z̄ⁿ` of an
/// `n`-agent homogeneous population on each of `n_paths` replications.
pub fn habit_paths_impl(
    linear: bool,
    mu: f64,
    sigma: f64,
    p: f64,
    x0: f64,
    z0: f64,
    delta: f64,
    n: usize,
    n_paths: usize,
    seed: u64,
) -> Out {
    const HORIZON: f64 = 2.0;
    const STEPS: usize = 200;
    if n == 0 || n > 4096 || n_paths == 0 || n_paths > 64 {
        return Err("need 1 <= n <= 4096 and 1 <= paths <= 64".into());
    }
    let (o, habit) = setup(mu, sigma, p, x0, z0, delta, HORIZON)?;
    let grid = make_grid(HORIZON, STEPS).map_err(|e| e.to_string())?;
    let cfg = GameConfig {
        population: Population::homogeneous(o, n).map_err(|e| e.to_string())?,
        habit,
        mode: if linear { Mode::Linear } else { Mode::Multiplicative },
        grid: grid.clone(),
        n_paths,
        seed,
    };
    let mut out = grid.nodes().to_vec();
    let paths: Vec<Vec<f64>> = if linear {
        let mfe = solve_zbar_linear(&grid, &o, &habit).map_err(|e| e.to_string())?;
        let sim = LinearGame::new(cfg, &mfe).map_err(|e| e.to_string())?;
        out.extend_from_slice(mfe.zbar.values());
        (0..n_paths as u32).map(|m| sim.replicate(m).zbar_n).collect()
    } else {
        let mfe = solve_zbar_mult(&grid, &o, &habit, &SolverOptions::default()).map_err(|e| e.to_string())?;
        let sim = MultGame::new(cfg, &mfe).map_err(|e| e.to_string())?;
        out.extend_from_slice(mfe.zbar.values());
        (0..n_paths as u32).map(|m| sim.replicate(m).zbar_n).collect()
    };
    for path in paths {
        out.extend(path);
    }
    Ok(out)
}

fn js(r: Out) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn linear_curves(mu: f64, sigma: f64, p: f64, x0: f64, z0: f64, delta: f64, horizon: f64, x: f64, n_steps: usize) -> Result<Vec<f64>, JsError> {
    js(linear_curves_impl(mu, sigma, p, x0, z0, delta, horizon, x, n_steps))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn mult_curves(
    mu: f64,
    sigma: f64,
    p: f64,
    x0: f64,
    z0: f64,
    delta: f64,
    alpha: f64,
    horizon: f64,
    x: f64,
    n_steps: usize,
) -> Result<Vec<f64>, JsError> {
    js(mult_curves_impl(mu, sigma, p, x0, z0, delta, alpha, horizon, x, n_steps))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn habit_paths(
    linear: bool,
    mu: f64,
    sigma: f64,
    p: f64,
    x0: f64,
    z0: f64,
    delta: f64,
    n: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    js(habit_paths_impl(linear, mu, sigma, p, x0, z0, delta, n, n_paths, seed))
}
