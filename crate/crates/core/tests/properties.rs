mod common;

use common::v;
use proptest::prelude::*;
use transversality::altproj::{fit_sequence, run_ap};
use transversality::geometry::{dual_norm_rho_triple, norm_rho_triple};
use transversality::normalcones::{convex_normal_cone, ConeRep};
use transversality::{intersect, RhoNorm, SetRep, Vector};

const TOL: f64 = 1e-7;

fn vec_in(n: usize, r: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-r..r, n).prop_map(|c| Vector::from_slice(&c))
}

fn unit(n: usize) -> impl Strategy<Value = Vector> {
    vec_in(n, 1.0).prop_filter_map("nonzero", |x| x.normalized())
}

/// Convex sets in ℝⁿ that contain the origin's neighbourhood or pass near it.
fn convex_set(n: usize) -> impl Strategy<Value = SetRep> {
    prop_oneof![
        (vec_in(n, 1.0), 0.1f64..2.0).prop_map(|(c, r)| SetRep::ball(c, r).unwrap()),
        (vec_in(n, 1.0), prop::collection::vec(unit(n), 1..n)).prop_map(|(b, d)| SetRep::affine(b, &d).unwrap()),
        prop::collection::vec((unit(n), 0.0f64..1.0), 1..6)
            .prop_map(|rows| SetRep::polyhedron(rows).unwrap()),
        prop::collection::vec(vec_in(n, 1.0), 1..7).prop_map(|vs| SetRep::polytope(vs).unwrap()),
    ]
}

fn any_set(n: usize) -> impl Strategy<Value = SetRep> {
    prop_oneof![
        3 => convex_set(n),
        1 => prop::collection::vec(convex_set(n), 2..4).prop_map(|p| SetRep::union(p).unwrap()),
    ]
}

fn dim() -> impl Strategy<Value = usize> {
    2usize..=4
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_idempotent((s, x) in dim().prop_flat_map(|n| (any_set(n), vec_in(n, 3.0)))) {
        let p = s.project(&x).unwrap();
        for q in &p.nearest {
            prop_assert!(s.contains(q, 1e-8).unwrap());
            prop_assert!((x.dist(q) - p.dist).abs() <= 1e-8);
            let again = s.project(q).unwrap();
            prop_assert!(again.dist <= 1e-8, "{}", again.dist);
        }
    }

    #[test]
    fn projection_is_optimal((s, x, probes) in dim().prop_flat_map(|n| {
        (convex_set(n), vec_in(n, 3.0), prop::collection::vec(vec_in(n, 3.0), 8))
    })) {
        let p = &s.project(&x).unwrap().nearest[0];
        let r = &x - p;
        for y in probes {
            let q = &s.project(&y).unwrap().nearest[0];
            // variational inequality for convex sets
            prop_assert!(r.dot(&(q - p)) <= TOL * (1.0 + r.norm()), "{}", r.dot(&(q - p)));
            prop_assert!(x.dist(q) >= x.dist(p) - TOL);
        }
    }

    #[test]
    fn projection_is_nonexpansive((s, x, y) in dim().prop_flat_map(|n| (convex_set(n), vec_in(n, 3.0), vec_in(n, 3.0)))) {
        let px = &s.project(&x).unwrap().nearest[0];
        let py = &s.project(&y).unwrap().nearest[0];
        prop_assert!(px.dist(py) <= x.dist(&y) + TOL);
    }

    #[test]
    fn union_distance_is_min_over_pieces((s, x) in dim().prop_flat_map(|n| {
        (prop::collection::vec(convex_set(n), 2..4), vec_in(n, 3.0))
    })) {
        let want = s.iter().map(|p| p.distance(&x).unwrap()).fold(f64::INFINITY, f64::min);
        let u = SetRep::union(s).unwrap();
        prop_assert!((u.distance(&x).unwrap() - want).abs() <= 1e-12);
    }

    #[test]
    fn intersection_matches_definition((a, b, x) in dim().prop_flat_map(|n| (convex_set(n), convex_set(n), vec_in(n, 2.0)))) {
        let Ok(inter) = intersect(&a, &b) else { return Ok(()) };
        let p = inter.project(&x).unwrap();
        prop_assert!(a.distance(&p.point).unwrap() <= 1e-6 && b.distance(&p.point).unwrap() <= 1e-6);
        // the intersection lies in both sets, so it is no closer than either
        prop_assert!(p.dist >= a.distance(&x).unwrap().max(b.distance(&x).unwrap()) - 1e-6);
    }

    #[test]
    fn rho_norms_are_dual((x1, x2, x, y1, y2, y, rho) in dim().prop_flat_map(|n| {
        (vec_in(n, 2.0), vec_in(n, 2.0), vec_in(n, 2.0), vec_in(n, 2.0), vec_in(n, 2.0), vec_in(n, 2.0), 0.01f64..10.0)
    })) {
        let r = RhoNorm::new(rho).unwrap();
        let primal = norm_rho_triple(&x1, &x2, &x, r).unwrap();
        let dual = dual_norm_rho_triple(&y1, &y2, &y, r).unwrap();
        let pairing = x1.dot(&y1) + x2.dot(&y2) + x.dot(&y);
        prop_assert!(pairing.abs() <= primal * dual * (1.0 + 1e-12) + 1e-12);
        let sum = norm_rho_triple(&(&x1 + &y1), &(&x2 + &y2), &(&x + &y), r).unwrap();
        prop_assert!(sum <= primal + norm_rho_triple(&y1, &y2, &y, r).unwrap() + 1e-12);
        let scaled = norm_rho_triple(&x1.scale(-2.5), &x2.scale(-2.5), &x.scale(-2.5), r).unwrap();
        prop_assert!((scaled - 2.5 * primal).abs() <= 1e-12 * (1.0 + primal));
    }

    #[test]
    fn cone_projection_moreau((gens, lin, w) in dim().prop_flat_map(|n| {
        (prop::collection::vec(unit(n), 0..4), prop::collection::vec(unit(n), 0..2), vec_in(n, 3.0))
    })) {
        let n = w.dim();
        let k = ConeRep::new(gens, lin, true, n);
        let p = k.project(&w);
        prop_assert!(k.contains(&p, 1e-8));
        prop_assert!(k.project(&p).dist(&p) <= 1e-8);
        let r = &w - &p;
        prop_assert!(r.dot(&p).abs() <= 1e-7 * (1.0 + w.norm_squared()));
        for d in k.extreme_directions() {
            prop_assert!(r.dot(&d) <= 1e-7 * (1.0 + w.norm()));
        }
    }

    #[test]
    fn convex_normals_support_the_set((s, y, probes) in (2usize..=3).prop_flat_map(|n| {
        (convex_set(n), vec_in(n, 3.0), prop::collection::vec(vec_in(n, 3.0), 8))
    })) {
        let a = s.project(&y).unwrap().nearest[0].clone();
        let k = convex_normal_cone(&s, &a).unwrap();
        // y − a is a normal, and every normal supports the set at a
        prop_assert!(k.distance(&(&y - &a)) <= 1e-6 * (1.0 + y.dist(&a)));
        for d in k.extreme_directions() {
            for q in &probes {
                let sq = &s.project(q).unwrap().nearest[0];
                prop_assert!(d.dot(&(sq - &a)) <= 1e-6, "{}", d.dot(&(sq - &a)));
            }
        }
    }

    #[test]
    fn ap_is_fejer_on_convex_pairs((c, r, h, x0) in (vec_in(2, 0.5), 0.5f64..1.5, -0.3f64..0.3, vec_in(2, 2.0))) {
        let a = SetRep::ball(c.clone(), r).unwrap();
        let b = SetRep::halfspace(v(&[0.0, 1.0]), h).unwrap();
        let Ok(t) = run_ap(&a, &b, &x0, 60, 1e-12) else { return Ok(()) };
        for w in t.d_int.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10);
        }
        // replaying the projections reproduces the trace bit for bit
        for k in 0..t.b_seq.len() {
            prop_assert_eq!(&b.project(&t.x_seq[k]).unwrap().nearest[0], &t.b_seq[k]);
            prop_assert_eq!(&a.project(&t.b_seq[k]).unwrap().nearest[0], &t.x_seq[k + 1]);
        }
    }

    #[test]
    fn geometric_fit_recovers_rate((c, alpha, len) in (0.05f64..0.95, 0.01f64..100.0, 8usize..40)) {
        let d: Vec<f64> = (0..len).map(|k| alpha * c.powi(k as i32)).filter(|x| *x >= 1e-12).collect();
        prop_assume!(d.len() >= 4);
        let f = fit_sequence(&d).unwrap();
        prop_assert!((f.c - c).abs() <= 1e-9);
        prop_assert!((f.alpha / alpha - 1.0).abs() <= 1e-6);
    }
}
