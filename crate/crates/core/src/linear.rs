//! Mean field equilibrium under linear (addictive) external habits.
//!
//! For a deterministic benchmark `Z̄` the representative agent's value is
//! `V(t,x) = (x − ∫_t^T Z̄)^p g(t) / p` with `g = u^{1−p}` and
//! `u' + a u + 1 = 0, u(T) = 1`. The surplus `Y = X − ∫_t^T Z̄` is a
//! geometric Brownian motion, which makes the consistency condition an
//! affine equation in `Z̄` that is solved exactly.

use crate::error::{Error, Result};
use crate::grid::{cumtrapz, simpson, sup_distance, HabitCurve, TimeGrid};
use crate::params::{HabitSpec, TypeVector};

/// `u(t)` as a function of the time to maturity `τ = T − t`.
///
/// `u = e^{aτ} + (e^{aτ} − 1)/a`, whose `a → 0` limit `1 + τ` is reached
/// continuously through `expm1`.
pub fn u_linear(a: f64, tau: f64) -> f64 {
    if a == 0.0 {
        1.0 + tau
    } else {
        (a * tau).exp() + (a * tau).exp_m1() / a
    }
}

/// `∫_0^t 1/u(s) ds`. Since `(ln u)' = −a − 1/u`, the integral is
/// `ln(u(0)/u(t)) − a t`.
fn int_inv_u(a: f64, horizon: f64, t: f64) -> f64 {
    (u_linear(a, horizon) / u_linear(a, horizon - t)).ln() - a * t
}

/// `g^l` at every node.
pub fn g_linear(grid: &TimeGrid, o: &TypeVector) -> Vec<f64> {
    let a = o.merton_rate();
    let horizon = grid.horizon();
    grid.nodes()
        .iter()
        .map(|&t| u_linear(a, horizon - t).powf(1.0 - o.p))
        .collect()
}

/// Solved linear-habit equilibrium.
#[derive(Debug, Clone)]
pub struct LinearMfe {
    pub grid: TimeGrid,
    pub o: TypeVector,
    pub habit: HabitSpec,
    /// `u = (g^l)^{1/(1−p)}`; consumption out of surplus is `Y/u`.
    pub u: Vec<f64>,
    pub g_l: Vec<f64>,
    /// `∫_0^t (μ²/((1−p)σ²) − 1/u)`: log of the expected surplus growth.
    pub log_growth: Vec<f64>,
    pub phi: Vec<f64>,
    /// `∫_0^t φ`.
    pub phi_cumulative: Vec<f64>,
    pub zbar: HabitCurve,
    pub k_surplus: f64,
    /// `‖Φ(Z̄) − Z̄‖_∞` for the consistency map.
    pub fixed_point_residual: f64,
}

pub fn solve_zbar_linear(grid: &TimeGrid, o: &TypeVector, habit: &HabitSpec) -> Result<LinearMfe> {
    o.validate()?;
    habit.validate_linear()?;
    check_horizon(grid, habit)?;
    let a = o.merton_rate();
    let r = o.excess_growth();
    let horizon = grid.horizon();
    let u: Vec<f64> = grid.nodes().iter().map(|&t| u_linear(a, horizon - t)).collect();
    let g_l = u.iter().map(|v| v.powf(1.0 - o.p)).collect();
    let log_growth: Vec<f64> = grid.nodes().iter().map(|&t| r * t - int_inv_u(a, horizon, t)).collect();
    let phi: Vec<f64> = log_growth.iter().zip(&u).map(|(l, u)| l.exp() / u).collect();
    // φ is analytic, so Gauss–Legendre per step is exact to rounding;
    // ∬φ = ∫_0^T (T − s) φ(s) ds
    let phi_at = |t: f64| (r * t - int_inv_u(a, horizon, t)).exp() / u_linear(a, horizon - t);
    let mut phi_cumulative = Vec::with_capacity(grid.len());
    phi_cumulative.push(0.0);
    let mut double = 0.0;
    for w in grid.nodes().windows(2) {
        let (single, weighted) = gauss_legendre(w[0], w[1], |s| {
            let f = phi_at(s);
            (f, (horizon - s) * f)
        });
        phi_cumulative.push(phi_cumulative.last().unwrap() + single);
        double += weighted;
    }

    let k_surplus = (habit.x0 - habit.z0 * horizon) / (1.0 + habit.delta * double);
    let zbar_values = phi_cumulative.iter().map(|c| habit.z0 + habit.delta * k_surplus * c).collect();
    let zbar = HabitCurve::new(grid.clone(), zbar_values)?;

    let mut mfe = LinearMfe {
        grid: grid.clone(),
        o: *o,
        habit: *habit,
        u,
        g_l,
        log_growth,
        phi,
        phi_cumulative,
        zbar,
        k_surplus,
        fixed_point_residual: 0.0,
    };
    let image = mfe.phi_map(mfe.zbar.values());
    mfe.fixed_point_residual = sup_distance(&image, mfe.zbar.values());
    Ok(mfe)
}

/// Five-point Gauss–Legendre rule on `[lo, hi]` for a pair of integrands.
fn gauss_legendre(lo: f64, hi: f64, f: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    const NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut acc = (0.0, 0.0);
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        let v = f(mid + half * x);
        acc.0 += w * v.0;
        acc.1 += w * v.1;
    }
    (half * acc.0, half * acc.1)
}

pub(crate) fn check_horizon(grid: &TimeGrid, habit: &HabitSpec) -> Result<()> {
    if (grid.horizon() - habit.horizon).abs() > 1e-12 * habit.horizon {
        return Err(Error::config(format!(
            "grid horizon {} does not match habit horizon {}",
            grid.horizon(),
            habit.horizon
        )));
    }
    Ok(())
}

impl LinearMfe {
    pub fn merton_rate(&self) -> f64 {
        self.o.merton_rate()
    }

    /// `u(t)` at an arbitrary time.
    pub fn u_at(&self, t: f64) -> f64 {
        u_linear(self.merton_rate(), self.grid.horizon() - t)
    }

    pub fn g_at(&self, t: f64) -> f64 {
        self.u_at(t).powf(1.0 - self.o.p)
    }

    /// The consistency map `Φ(Z)_t = z0 + δ(x0 − ∫_0^T Z)∫_0^t φ` on node
    /// values.
    pub fn phi_map(&self, z: &[f64]) -> Vec<f64> {
        let total = simpson(z, self.grid.dt());
        let scale = self.habit.delta * (self.habit.x0 - total);
        self.phi_cumulative.iter().map(|c| self.habit.z0 + scale * c).collect()
    }

    /// Surplus `x − ∫_t^T Z̄`, or a domain error outside the effective domain.
    pub fn surplus(&self, t: f64, x: f64) -> Result<f64> {
        let tail = self.zbar.tail_integral(t);
        let y = x - tail;
        if !(y > 0.0) {
            return Err(Error::domain(format!(
                "wealth {x} at t = {t} does not exceed the habit floor cost {tail}"
            )));
        }
        Ok(y)
    }

    /// `(π, c)`: risky fraction of wealth and consumption-to-wealth rate.
    pub fn feedback(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        let y = self.surplus(t, x)?;
        let pi = self.o.merton_fraction() * y / x;
        let c = (self.zbar.at(t) + y / self.u_at(t)) / x;
        Ok((pi, c))
    }

    /// Consumption rate `C = c x = Z̄_t + (x − ∫_t^T Z̄)/u(t)`.
    pub fn consumption(&self, t: f64, x: f64) -> Result<f64> {
        let y = self.surplus(t, x)?;
        Ok(self.zbar.at(t) + y / self.u_at(t))
    }

    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        let y = self.surplus(t, x)?;
        Ok(y.powf(self.o.p) * self.g_at(t) / self.o.p)
    }

    /// `E[Y_t]` at every node.
    pub fn expected_surplus(&self) -> Vec<f64> {
        self.log_growth.iter().map(|l| self.k_surplus * l.exp()).collect()
    }

    /// Sup-distance between `Z̄` and the habit rebuilt from the population's
    /// expected consumption, `z0 e^{−δt} + ∫_0^t δ e^{δ(s−t)} E[C_s] ds`.
    pub fn consistency_residual(&self) -> f64 {
        let d = self.habit.delta;
        let ey = self.expected_surplus();
        let weighted: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .zip(self.zbar.values().iter().zip(ey.iter().zip(&self.u)))
            .map(|(&s, (z, (y, u)))| d * (d * s).exp() * (z + y / u))
            .collect();
        let cum = cumtrapz(&weighted, self.grid.dt());
        let rebuilt: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .zip(&cum)
            .map(|(&t, c)| (-d * t).exp() * (self.habit.z0 + c))
            .collect();
        sup_distance(&rebuilt, self.zbar.values())
    }
}

pub fn feedback_linear(t: f64, x: f64, mfe: &LinearMfe) -> Result<(f64, f64)> {
    mfe.feedback(t, x)
}

pub fn value_linear(t: f64, x: f64, mfe: &LinearMfe) -> Result<f64> {
    mfe.value(t, x)
}

pub fn expected_surplus_linear(mfe: &LinearMfe) -> Vec<f64> {
    mfe.expected_surplus()
}

/// Damped Picard iteration of the consistency map starting from `init`.
/// Only used as a cross-check: the closed form is authoritative.
pub fn picard_linear(mfe: &LinearMfe, init: &[f64], damping: f64, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    mfe.grid.check_len(init)?;
    let mut z = init.to_vec();
    for k in 1..=max_iter {
        let image = mfe.phi_map(&z);
        let step = sup_distance(&image, &z);
        for (zi, ni) in z.iter_mut().zip(&image) {
            *zi += damping * (ni - *zi);
        }
        if step < tol {
            return Ok((z, k));
        }
    }
    let residual = sup_distance(&mfe.phi_map(&z), &z);
    Err(Error::NonConvergence { iterations: max_iter, residual })
}
