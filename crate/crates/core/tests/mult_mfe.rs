mod common;

use approx::assert_abs_diff_eq;
use common::*;
use habitmfg_core::multiplicative::{h_mult, picard_step, solve_zbar_mult, SolverMode, SolverOptions};
use habitmfg_core::presets;
use habitmfg_core::{make_grid, HabitCurve, HabitSpec, TypeVector};
use proptest::prelude::*;

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn h_for_unit_forcing_by_hand() {
    let o = TypeVector::new(0.2, 0.2, 0.5).unwrap();
    let a = merton_a(&o);
    assert_abs_diff_eq!(a, 1.0, epsilon = 1e-14);
    let grid = make_grid(2.0, 2000).unwrap();
    let h = h_mult(&grid, &o, 1.0, &HabitCurve::constant(&grid, 1.0).unwrap()).unwrap();
    for (k, &t) in grid.nodes().iter().enumerate() {
        let e = (a * (t - 2.0)).exp();
        let hand = 1.0 / e + (1.0 / e - 1.0) / a;
        assert_abs_diff_eq!(h[k], hand, epsilon = 1e-6 * hand);
    }
}

#[test]
fn h_second_order_against_rk4() {
    let o = TypeVector::new(0.1, 0.8, 0.5).unwrap();
    let errs: Vec<f64> = [200usize, 400, 800]
        .iter()
        .map(|&n| {
            let grid = make_grid(2.0, n).unwrap();
            let z = HabitCurve::from_fn(&grid, |t| 0.2 + 0.1 * t + 0.05 * (3.0 * t).sin()).unwrap();
            let h = h_mult(&grid, &o, 0.7, &z).unwrap();
            // reference on a 16× finer grid, sampled back onto the coarse nodes
            let fine = make_grid(2.0, 16 * n).unwrap();
            let zf = HabitCurve::from_fn(&fine, |t| 0.2 + 0.1 * t + 0.05 * (3.0 * t).sin()).unwrap();
            let reference: Vec<f64> =
                h_mult_rk4(&o, 0.7, zf.values(), 2.0).into_iter().step_by(16).collect();
            sup(&h, &reference)
        })
        .collect();
    assert!(errs[0] < 1e-4, "{errs:?}");
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn fig1_bottom_consumption_finite_and_positive() {
    let p = presets::fig1_bottom();
    for &v in &p.sweep_values {
        let (o, h) = p.at(v);
        let grid = make_grid(2.0, 2000).unwrap();
        let mfe = solve_zbar_mult(&grid, &o, &h, &SolverOptions::default()).unwrap();
        assert!(mfe.c_star.iter().all(|c| c.is_finite() && *c > 0.0), "p = {v}");
        let z_t = *mfe.zbar.values().last().unwrap();
        assert_abs_diff_eq!(*mfe.c_star.last().unwrap(), z_t.powf(h.alpha * o.p / (o.p - 1.0)), epsilon = 1e-12);
    }
}

#[test]
fn fig2_bottom_habit_dips_then_recovers() {
    let p = presets::fig2_bottom();
    let (o, h) = p.at(0.1);
    let grid = make_grid(2.0, 2000).unwrap();
    let z = solve_zbar_mult(&grid, &o, &h, &SolverOptions::default()).unwrap().zbar.into_values();
    let low = z.iter().enumerate().fold((0, f64::INFINITY), |m, (k, &v)| if v < m.1 { (k, v) } else { m }).0;
    assert!(low > 0 && low < z.len() - 1, "minimum at node {low}");
    assert!(z[..=low].windows(2).all(|w| w[1] <= w[0]));
    assert!(z[low..].windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn starts_converge_to_one_point() {
    let p = presets::fig3();
    let (o, h) = p.at(1.0);
    let grid = make_grid(2.0, 1000).unwrap();
    let opts = SolverOptions::default();
    let a = solve_zbar_mult(&grid, &o, &h, &opts).unwrap();
    let b = solve_zbar_mult(&grid, &o, &h, &opts.clone().with_init(vec![h.z0; grid.len()])).unwrap();
    assert!(sup(a.zbar.values(), b.zbar.values()) < 10.0 * opts.tol);
    let c = solve_zbar_mult(&grid, &o, &h, &SolverOptions { mode: SolverMode::Stitched { blocks: 4 }, ..opts.clone() }).unwrap();
    assert!(sup(a.zbar.values(), c.zbar.values()) < 10.0 * opts.tol);
}

#[test]
fn no_intensity_single_iteration() {
    let o = TypeVector::new(0.1, 0.8, 0.5).unwrap();
    let h = HabitSpec::new(3.0, 0.2, 0.0, 2.0).with_alpha(1.0);
    let grid = make_grid(2.0, 200).unwrap();
    let mfe = solve_zbar_mult(&grid, &o, &h, &SolverOptions::default()).unwrap();
    assert_eq!(mfe.iterations, 1);
    assert!(mfe.zbar.values().iter().all(|&z| z == 0.2));
}

fn inputs() -> impl Strategy<Value = (TypeVector, HabitSpec)> {
    (0.0f64..0.3, 0.2f64..1.0, 0.1f64..0.8, 0.5f64..3.0, 0.5f64..5.0, 0.1f64..5.0, 0.0f64..0.4, 0.05f64..1.0)
        .prop_map(|(mu, sigma, p, horizon, x0, z0, delta, alpha)| {
            (TypeVector::new(mu, sigma, p).unwrap(), HabitSpec::new(x0, z0, delta, horizon).with_alpha(alpha))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equilibrium_invariants((o, h) in inputs()) {
        let grid = make_grid(h.horizon, 400).unwrap();
        let opts = SolverOptions { max_iter: 2000, ..SolverOptions::default() };
        let mfe = solve_zbar_mult(&grid, &o, &h, &opts).unwrap();
        let z = mfe.zbar.values();
        for (k, &t) in grid.nodes().iter().enumerate() {
            prop_assert!(z[k] >= h.z0 * (-h.delta * t).exp() * (1.0 - 1e-12));
        }
        let image = picard_step(&mfe.zbar, &o, &h, &grid).unwrap();
        prop_assert!(sup(image.values(), z) <= opts.tol);
        prop_assert!(mfe.c_star.iter().all(|c| *c > 0.0 && c.is_finite()));
        prop_assert!(mfe.consistency_residual() < 1e-6);
        let v = mfe.value(0.3 * h.horizon, 1.7).unwrap();
        let scaled = mfe.value(0.3 * h.horizon, 1.7 * 2.5).unwrap();
        prop_assert!((scaled - 2.5f64.powf(o.p) * v).abs() <= 1e-12 * scaled.abs());
    }
}
