//! Reference computations written independently of the library: RK4 for the
//! value-function ODEs, Simpson quadrature, a plain damped Picard iteration
//! and lognormal moments.
#![allow(dead_code)]

use habitmfg_core::TypeVector;

pub fn merton_a(o: &TypeVector) -> f64 {
    o.mu * o.mu * o.p / (2.0 * o.sigma * o.sigma * (1.0 - o.p).powi(2))
}

pub fn growth_r(o: &TypeVector) -> f64 {
    o.mu * o.mu / ((1.0 - o.p) * o.sigma * o.sigma)
}

pub fn theta_tilde(o: &TypeVector) -> f64 {
    o.mu / ((1.0 - o.p) * o.sigma)
}

/// Right-hand side of `(1/p) g' − μ² g/(2σ²(p−1)) + ((1−p)/p) g^{p/(p−1)} = 0`.
pub fn bernoulli_rhs(o: &TypeVector, g: f64) -> f64 {
    let p = o.p;
    p * (o.mu * o.mu * g / (2.0 * o.sigma * o.sigma * (p - 1.0)) - (1.0 - p) / p * g.powf(p / (p - 1.0)))
}

/// `g^l` at `n + 1` uniform nodes on `[0, T]`, by backward RK4 from `g(T) = 1`.
pub fn g_linear_rk4(o: &TypeVector, horizon: f64, n: usize) -> Vec<f64> {
    let sub = 8;
    let h = horizon / (n * sub) as f64;
    let mut g = vec![0.0; n + 1];
    g[n] = 1.0;
    let mut y = 1.0;
    let f = |y: f64| bernoulli_rhs(o, y);
    for k in (0..n).rev() {
        for _ in 0..sub {
            // integrate backwards: dy/ds = −f(y) with s = T − t
            let k1 = -f(y);
            let k2 = -f(y + 0.5 * h * k1);
            let k3 = -f(y + 0.5 * h * k2);
            let k4 = -f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        g[k] = y;
    }
    g
}

/// `h' = −a h − Z̄^k`, `h(T) = 1`, with `Z̄` linearly interpolated between
/// the given nodes.
pub fn h_mult_rk4(o: &TypeVector, alpha: f64, zbar: &[f64], horizon: f64) -> Vec<f64> {
    let n = zbar.len() - 1;
    let dt = horizon / n as f64;
    let a = merton_a(o);
    let k = alpha * o.p / (o.p - 1.0);
    let mut h = vec![0.0; n + 1];
    h[n] = 1.0;
    for j in (0..n).rev() {
        let forcing = |s: f64| {
            // s in [0, dt] measured backwards from node j + 1
            let z = zbar[j + 1] + (zbar[j] - zbar[j + 1]) * s / dt;
            z.powf(k)
        };
        let f = |s: f64, y: f64| a * y + forcing(s);
        let y = h[j + 1];
        let k1 = f(0.0, y);
        let k2 = f(0.5 * dt, y + 0.5 * dt * k1);
        let k3 = f(0.5 * dt, y + 0.5 * dt * k2);
        let k4 = f(dt, y + dt * k3);
        h[j] = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    h
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

pub fn u_closed(a: f64, tau: f64) -> f64 {
    if a == 0.0 {
        1.0 + tau
    } else {
        ((1.0 + a) * (a * tau).exp() - 1.0) / a
    }
}

/// `∫_0^t 1/u(T − s) ds` by Simpson.
pub fn int_inv_u(a: f64, horizon: f64, t: f64) -> f64 {
    simpson(|s| 1.0 / u_closed(a, horizon - s), 0.0, t, 400)
}

pub fn trapz(v: &[f64], dt: f64) -> f64 {
    v.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum()
}

pub fn cumtrapz(v: &[f64], dt: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for w in v.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Simpson's rule on each block of `sub` (even) fine intervals, accumulated
/// onto the coarse nodes.
pub fn cum_simpson_blocks(v: &[f64], h: f64, sub: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for block in v.windows(sub + 1).step_by(sub) {
        let mut s = block[0] + block[sub];
        for (k, x) in block.iter().enumerate().take(sub).skip(1) {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * x;
        }
        acc += s * h / 3.0;
        out.push(acc);
    }
    out
}

/// Damped Picard iteration of
/// `Φ(Z)(t) = z0 + δ (x0 − ∫_0^T Z) ∫_0^t φ` with `φ` built from the RK4 `g`.
/// All integrals use Simpson on a refined grid.
#[allow(clippy::too_many_arguments)]
pub fn picard_linear_oracle(
    o: &TypeVector,
    x0: f64,
    z0: f64,
    delta: f64,
    horizon: f64,
    n: usize,
    damping: f64,
    init: f64,
) -> Vec<f64> {
    const SUB: usize = 8;
    let fine = n * SUB;
    let h = horizon / fine as f64;
    // g on a grid twice as fine again, so every fine step has a midpoint
    let g = g_linear_rk4(o, horizon, 2 * fine);
    let r = growth_r(o);
    let rate_half: Vec<f64> = g.iter().map(|g| g.powf(1.0 / (o.p - 1.0))).collect();
    let mut logs = vec![0.0; fine + 1];
    for k in 1..=fine {
        let d = |j: usize| r - rate_half[j];
        logs[k] = logs[k - 1] + h / 6.0 * (d(2 * k - 2) + 4.0 * d(2 * k - 1) + d(2 * k));
    }
    let rate: Vec<f64> = rate_half.iter().step_by(2).copied().collect();
    let phi: Vec<f64> = logs.iter().zip(&rate).map(|(l, c)| l.exp() * c).collect();
    let phi_cum = cum_simpson_blocks(&phi, h, SUB);
    let coarse_dt = horizon / n as f64;
    let mut z = vec![init; n + 1];
    for _ in 0..10_000 {
        let k = x0 - simpson_nodes(&z, coarse_dt);
        let next: Vec<f64> = phi_cum.iter().map(|c| z0 + delta * k * c).collect();
        let mut change: f64 = 0.0;
        for (zi, ni) in z.iter_mut().zip(&next) {
            let upd = (1.0 - damping) * *zi + damping * ni;
            change = change.max((upd - *zi).abs());
            *zi = upd;
        }
        if change < 1e-14 {
            break;
        }
    }
    z
}

/// Composite Simpson over sampled nodes (even number of intervals).
pub fn simpson_nodes(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    assert!(n % 2 == 0, "Simpson needs an even number of intervals");
    *cum_simpson_blocks(v, h, n).last().unwrap()
}

/// `E[Y^q]` for `ln Y ~ N(m, v)`.
pub fn lognormal_moment(m: f64, v: f64, q: f64) -> f64 {
    (q * m + 0.5 * q * q * v).exp()
}

pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
