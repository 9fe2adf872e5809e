//! Estimates compared against brute-force values computed from closed-form
//! distance formulas on dense grids.

mod common;

use common::*;
use std::f64::consts::PI;
use transversality::altproj::{fit_rate, fit_rate_or_terminated, run_ap, verify_rate_bounds};
use transversality::constants::*;
use transversality::Vector;

/// `inf max{d_A, d_B}/d_{A∩B}` over `x̄ + r(cos φ, sin φ)` for a fine grid
/// of angles and a few radii.
fn grid_str(da: impl Fn(f64, f64) -> f64, db: impl Fn(f64, f64) -> f64, dab: impl Fn(f64, f64) -> f64, c: (f64, f64)) -> f64 {
    let mut best = f64::INFINITY;
    for &r in &[1e-4, 1e-3, 3e-3] {
        for k in 0..200_000 {
            let phi = 2.0 * PI * k as f64 / 200_000.0;
            let (x, y) = (c.0 + r * phi.cos(), c.1 + r * phi.sin());
            let d = dab(x, y);
            if d > 1e-14 {
                best = best.min(da(x, y).max(db(x, y)) / d);
            }
        }
    }
    best
}

fn line_dist(deg: f64) -> impl Fn(f64, f64) -> f64 {
    let t = deg.to_radians();
    move |x, y| (x * t.sin() - y * t.cos()).abs()
}

fn norm(x: f64, y: f64) -> f64 {
    x.hypot(y)
}

#[test]
fn str_of_lines_matches_grid() {
    let c = cfg(1000);
    for deg in [90.0, 45.0, 30.0] {
        let oracle = grid_str(line_dist(0.0), line_dist(deg), norm, (0.0, 0.0));
        let b = line_at(deg);
        let est = estimate_str(&xaxis(), &b, &origin(2), &c).unwrap();
        assert!((est.value - oracle).abs() < 0.01, "{deg}: {} vs {oracle}", est.value);
        // an infimum over admissible samples never drops below the exact sin(θ/2)
        assert!(est.value >= (deg / 2.0f64).to_radians().sin() - 1e-9);
        let tr = estimate_tr(&xaxis(), &b, &origin(2), &c).unwrap();
        assert!((tr.value - oracle).abs() < 0.01, "tr {deg}: {} vs {oracle}", tr.value);
        let sp = estimate_str_prime(&xaxis(), &b, &origin(2), &c).unwrap();
        let sp_oracle = (0..=1000)
            .map(|k| {
                let x = 1e-3 * (k as f64 - 500.0);
                if x == 0.0 { f64::INFINITY } else { line_dist(deg)(x, 0.0) / x.abs() }
            })
            .fold(f64::INFINITY, f64::min);
        assert!((sp.value - sp_oracle).abs() < 1e-6, "str' {deg}: {} vs {sp_oracle}", sp.value);
    }
}

#[test]
fn tr_dual_of_lines_matches_normal_enumeration() {
    let c = cfg(400);
    for deg in [90.0f64, 45.0] {
        let t = deg.to_radians();
        let na = [0.0, 1.0];
        let nb = [-t.sin(), t.cos()];
        let mut oracle = f64::INFINITY;
        for sa in [-1.0, 1.0] {
            for sb in [-1.0, 1.0] {
                for k in 0..=1000 {
                    let w = k as f64 / 1000.0;
                    let x = w * sa * na[0] + (1.0 - w) * sb * nb[0];
                    let y = w * sa * na[1] + (1.0 - w) * sb * nb[1];
                    oracle = oracle.min(norm(x, y));
                }
            }
        }
        let est = estimate_tr_dual(&xaxis(), &line_at(deg), &origin(2), &c).unwrap();
        assert!((est.value - oracle).abs() < 0.01, "{deg}: {} vs {oracle}", est.value);
    }
}

#[test]
fn cap_matches_grid() {
    let s = 0.75f64.sqrt();
    let da = |x: f64, y: f64| (norm(x, y) - 1.0).max(0.0);
    let db = |x: f64, _y: f64| (0.5 - x).max(0.0);
    // A∩B is bounded by the arc |θ| ≤ 60° and the chord x = 1/2
    let dab = |x: f64, y: f64| {
        if da(x, y) == 0.0 && db(x, y) == 0.0 {
            return 0.0;
        }
        let chord = norm(x - 0.5, y - y.clamp(-s, s));
        let theta = y.atan2(x);
        let arc = if theta.abs() <= PI / 3.0 {
            (norm(x, y) - 1.0).abs()
        } else {
            norm(x - 0.5, y - s).min(norm(x - 0.5, y + s))
        };
        chord.min(arc)
    };
    let oracle = grid_str(da, db, dab, (0.5, s));
    assert!((oracle - 0.5).abs() < 1e-3, "{oracle}");
    let case = &convex_cases()[4];
    let est = estimate_str(&case.a, &case.b, &case.xbar, &cfg(1000)).unwrap();
    assert!((est.value - oracle).abs() < 0.01, "{} vs {oracle}", est.value);
}

#[test]
fn tangent_balls_match_grid() {
    let da = |x: f64, y: f64| (norm(x + 1.0, y) - 1.0).max(0.0);
    let db = |x: f64, y: f64| (norm(x - 1.0, y) - 1.0).max(0.0);
    let oracle = grid_str(da, db, norm, (0.0, 0.0));
    assert!(oracle < 1e-3);
    let case = &convex_cases()[3];
    let est = estimate_str(&case.a, &case.b, &case.xbar, &cfg(1000)).unwrap();
    assert!(est.value < 0.01, "{}", est.value);
}

#[test]
fn cross_against_line_matches_grid() {
    let cross = |x: f64, y: f64| x.abs().min(y.abs());
    let oracle = grid_str(cross, line_dist(60.0), norm, (0.0, 0.0));
    assert!((oracle - (15.0f64).to_radians().sin()).abs() < 1e-4);
    let case = cross_vs_60();
    let est = estimate_str(&case.a, &case.b, &case.xbar, &cfg(1000)).unwrap();
    assert!((est.value - oracle).abs() < 0.01, "{} vs {oracle}", est.value);
}

#[test]
fn orthogonal_lines_dual_family() {
    let c = cfg(1000);
    let r = 0.5f64.sqrt();
    for name in [ConstantName::Itr, ConstantName::ItrC, ConstantName::Str1] {
        let pair = ScenarioPair::new("orthogonal", xaxis(), yaxis(), origin(2), c.clone()).unwrap();
        let e = pair.estimate(name).unwrap();
        assert!((e.value - r).abs() < 0.02, "{name}: {}", e.value);
    }
}

/// Two lines through 0 at angle θ: `x_{k+1} = cos²θ · x_k` for `x_0` on the first.
#[test]
fn ap_on_lines_matches_iteration() {
    for deg in [30.0f64, 45.0, 60.0] {
        let t = deg.to_radians();
        let trace = run_ap(&xaxis(), &line_at(deg), &v(&[1.0, 0.0]), 500, 1e-12).unwrap();
        let mut x = 1.0f64;
        for xk in &trace.x_seq {
            assert!((xk[0] - x).abs() < 1e-12 && xk[1].abs() < 1e-12);
            x *= t.cos().powi(2);
        }
        let fit = fit_rate(&trace).unwrap();
        assert!((fit.c - t.cos().powi(2)).abs() < 1e-6, "{deg}: {}", fit.c);
    }
}

#[test]
fn rate_bound_holds_across_convex_battery() {
    let c = cfg(400);
    for case in convex_cases() {
        let s = estimate_str(&case.a, &case.b, &case.xbar, &c).unwrap();
        if s.value <= 0.05 {
            continue;
        }
        let shift: Vec<f64> = (0..case.xbar.dim()).map(|i| 0.05 * (i as f64 + 1.0)).collect();
        let x0 = &case.xbar + &Vector::from_slice(&shift);
        let trace = run_ap(&case.a, &case.b, &x0, 2000, 1e-12).unwrap();
        let fit = fit_rate_or_terminated(&trace).unwrap();
        let report = verify_rate_bounds(&s, &trace, &fit, true, c.slack);
        assert!(report.passed(), "{}: {report:?}", case.name);
    }
}

#[test]
fn dual_transversality_below_str_on_convex_pairs() {
    let c = cfg(400);
    for case in convex_cases() {
        let tr = estimate_tr_dual(&case.a, &case.b, &case.xbar, &c).unwrap();
        let s = estimate_str(&case.a, &case.b, &case.xbar, &c).unwrap();
        assert!(tr.value <= s.value + c.slack, "{}: tr_dual {} > str {}", case.name, tr.value, s.value);
    }
}

#[test]
fn itr_c_equals_str_on_convex_pairs() {
    let c = cfg(400);
    for case in convex_cases() {
        let ic = estimate_itr_c(&case.a, &case.b, &case.xbar, &c).unwrap();
        let s = estimate_str(&case.a, &case.b, &case.xbar, &c).unwrap();
        assert!((ic.value - s.value).abs() <= c.slack, "{}: itr_c {} str {}", case.name, ic.value, s.value);
    }
}

/// The aligned pair behind each `itr_c` sample gives a subgradient
/// `(−x₁*, −x₂*, x₁*+x₂*)` of `max{‖x₁−x‖, ‖x₂−x‖}` at `(a, b, x)`.
#[test]
fn itr_c_witnesses_are_subgradients() {
    let c = cfg(400);
    let mut checked = 0;
    for case in convex_cases() {
        for seed in 0..20u64 {
            let cfg = EstimatorConfig { seed, samples_per_radius: 100, ..c.clone() };
            let e = estimate_itr_c(&case.a, &case.b, &case.xbar, &cfg).unwrap();
            let Some(w) = e.argmin_witness else { continue };
            let (a, b, x, x1s, x2s) = (&w[0], &w[1], &w[2], &w[3], &w[4]);
            let t = SubgradientTriple::new(-x1s, -x2s, x1s + x2s).unwrap();
            assert!(subdiff_f_membership(&t, a, b, x, 1e-6).unwrap(), "{} seed {seed}", case.name);
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn three_dimensional_plane_and_line() {
    let case = &convex_cases()[6];
    let c = cfg(1000);
    let s = estimate_str(&case.a, &case.b, &case.xbar, &c).unwrap();
    // the line makes 45° with the plane; the worst direction lies in their common normal plane
    let want = (22.5f64).to_radians().sin();
    assert!((s.value - want).abs() < 0.02, "{}", s.value);
    let trace = run_ap(&case.a, &case.b, &Vector::from_slice(&[0.0, 1.0, 0.0]), 500, 1e-12).unwrap();
    assert!((fit_rate(&trace).unwrap().c - 0.5).abs() < 1e-6);
}
