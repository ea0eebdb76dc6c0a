//! Uniform time grids, cumulative trapezoid quadrature and grid functions.

use crate::error::{Error, Result};

/// Uniform grid `0 = t_0 < t_1 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::config(format!("horizon T must be positive, got {horizon}")));
        }
        if n_steps < 2 {
            return Err(Error::config(format!("n_steps must be at least 2, got {n_steps}")));
        }
        let dt = horizon / n_steps as f64;
        let mut nodes: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();
        nodes[n_steps] = horizon;
        Ok(Self { horizon, n_steps, nodes })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn t(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// Index of the cell `[t_k, t_{k+1}]` containing `t` and the offset
    /// `t - t_k`. Times outside `[0, T]` are clamped.
    pub(crate) fn locate(&self, t: f64) -> (usize, f64) {
        let t = t.clamp(0.0, self.horizon);
        let k = ((t / self.dt()).floor() as usize).min(self.n_steps - 1);
        (k, t - self.nodes[k])
    }

    /// Linear interpolation of node values at time `t`.
    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let (k, s) = self.locate(t);
        let w = s / self.dt();
        values[k] + w * (values[k + 1] - values[k])
    }

    pub(crate) fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Shape { expected: self.len(), actual: values.len() });
        }
        Ok(())
    }
}

pub fn make_grid(horizon: f64, n_steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(horizon, n_steps)
}

/// Cumulative trapezoid integral `F[k] ≈ ∫_0^{t_k} values`, with `F[0] = 0`.
///
/// Tail integrals `∫_{t_k}^T` are `F[last] - F[k]`.
pub fn trapezoid_cumulative(values: &[f64], grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.check_len(values)?;
    Ok(cumtrapz(values, grid.dt()))
}

pub(crate) fn cumtrapz(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Composite Simpson over node values; an odd number of steps closes with
/// the 3/8 rule on the last three, a single step falls back to a trapezoid.
pub(crate) fn simpson(values: &[f64], dt: f64) -> f64 {
    let n = values.len() - 1;
    if n < 2 {
        return cumtrapz(values, dt).last().copied().unwrap_or(0.0);
    }
    let even = if n % 2 == 0 { n } else { n - 3 };
    let mut acc = 0.0;
    for k in (0..even).step_by(2) {
        acc += dt / 3.0 * (values[k] + 4.0 * values[k + 1] + values[k + 2]);
    }
    if even < n {
        let v = &values[n - 3..];
        acc += 3.0 * dt / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
    }
    acc
}

/// Tail integrals `∫_{t_k}^T` from a cumulative integral.
pub(crate) fn tails(cumulative: &[f64]) -> Vec<f64> {
    let total = *cumulative.last().expect("non-empty grid");
    cumulative.iter().map(|f| total - f).collect()
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Deterministic habit benchmark `Z̄` sampled on a grid, strictly positive and
/// linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct HabitCurve {
    grid: TimeGrid,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl HabitCurve {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(&values)?;
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(format!(
                "habit curve must be strictly positive, got {v} at t = {}",
                grid.t(k)
            )));
        }
        let cumulative = cumtrapz(&values, grid.dt());
        Ok(Self { grid, values, cumulative })
    }

    /// Constant curve `Z̄ ≡ level`.
    pub fn constant(grid: &TimeGrid, level: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![level; grid.len()])
    }

    /// Curve built by evaluating `f` at every node.
    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, t: f64) -> f64 {
        self.grid.interpolate(&self.values, t)
    }

    /// `∫_0^T Z̄ dt`.
    pub fn total_integral(&self) -> f64 {
        *self.cumulative.last().expect("non-empty grid")
    }

    /// `∫_0^{t_k} Z̄` at every node.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `∫_t^T Z̄ ds` at an arbitrary time, exact for the piecewise-linear
    /// interpolant.
    pub fn tail_integral(&self, t: f64) -> f64 {
        let (k, s) = self.grid.locate(t);
        let z_t = self.at(t);
        let head = self.cumulative[k] + 0.5 * s * (self.values[k] + z_t);
        self.total_integral() - head
    }

    /// `∫_{t_k}^T Z̄` at every node.
    pub fn tail_integrals(&self) -> Vec<f64> {
        tails(&self.cumulative)
    }
}
