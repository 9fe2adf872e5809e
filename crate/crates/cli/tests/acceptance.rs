//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Bounds are recomputed here from the report values
//! rather than read from the check rows.

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use transv_cli::{load_scenarios, render, run_battery, Format, Report, Scenario};
use transversality::constants::{
    itr_c_dual_samples, subdiff_f_membership, ConstantName, EstimatorConfig, ScenarioPair, SubgradientTriple,
};
use transversality::sampling::{sample_rng, uniform_ball, unit_sphere};
use transversality::{SetRep, Vector};

const SLACK: f64 = 0.05;
const ORTH: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn scenarios(file: &str) -> Vec<Scenario> {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(file);
    load_scenarios(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

struct Outcome {
    ok: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.ok = false;
            self.notes.push(what.into());
        }
    }
}

fn value(r: &Report, scenario: &str, q: &str) -> Option<f64> {
    r.row(scenario, q).filter(|row| row.error.is_none()).map(|row| row.value)
}

/// `v/(v+2)`, i.e. `1/(2/v+1)`, equal to 1 at `v = ∞`.
fn lower(v: f64) -> f64 {
    if v.is_infinite() {
        1.0
    } else if v <= 0.0 {
        0.0
    } else {
        v / (v + 2.0)
    }
}

fn graph_upper(v: f64) -> f64 {
    (v / 2.0).min(1.0)
}

fn difference_upper(v: f64) -> f64 {
    if v * v >= 2.0 - 1e-9 {
        f64::INFINITY
    } else {
        (v * v / (2.0 - v * v)).sqrt()
    }
}

fn within(o: &mut Outcome, r: &Report, scenario: &str, q: &str, want: f64, tol: f64) {
    match value(r, scenario, q) {
        Some(v) => o.require((v - want).abs() <= tol, format!("{scenario} {q} = {v}, want {want} ± {tol}")),
        None => o.require(false, format!("{scenario} {q} missing")),
    }
}

fn criterion1(examples: &Report) -> Outcome {
    let mut o = Outcome::new();
    within(&mut o, examples, "example1_same_line_str", "str", 1.0, 1e-6);
    o
}

fn criterion2(examples: &Report) -> Outcome {
    let mut o = Outcome::new();
    match value(examples, "example2_same_line_tr", "tr") {
        Some(v) => o.require(v <= 0.05, format!("tr = {v}")),
        None => o.require(false, "tr missing"),
    }
    o
}

fn criterion3(r: &Report) -> Outcome {
    let mut o = Outcome::new();
    for q in ["str", "tr", "tr_dual", "itr", "itr_c"] {
        within(&mut o, r, "orthogonal_lines", q, ORTH, 0.02);
    }
    o
}

fn criterion4(r: &Report, battery: &[Scenario]) -> Outcome {
    let mut o = Outcome::new();
    for s in battery.iter().filter(|s| s.is_convex()) {
        let (Some(st), Some(sp)) = (value(r, &s.name, "str"), value(r, &s.name, "str_prime")) else {
            o.require(false, format!("{}: str or str_prime missing", s.name));
            continue;
        };
        o.require(lower(sp) - SLACK <= st && st <= sp + SLACK, format!("{}: str {st}, str' {sp}", s.name));
    }
    o
}

fn criterion5(r: &Report) -> Outcome {
    let mut o = Outcome::new();
    for name in ["orthogonal_lines", "lines_45", "tangent_balls", "same_line"] {
        let get = |q| value(r, name, q).unwrap_or(f64::NAN);
        // the set constants never exceed 1; larger moduli compare as 1
        let (tr, st, rg, srg) = (get("tr"), get("str"), get("rg").min(1.0), get("srg").min(1.0));
        o.require((tr - rg).abs() <= SLACK, format!("{name}: tr {tr} vs rg {rg}"));
        o.require((st - srg).abs() <= SLACK, format!("{name}: str {st} vs srg {srg}"));
    }
    o
}

fn sandwich(o: &mut Outcome, label: &str, moduli: [f64; 2], constants: [f64; 2], upper: fn(f64) -> f64) {
    for (m, c) in moduli.into_iter().zip(constants) {
        o.require(lower(m) - SLACK <= c, format!("{label}: lower({m}) > {c}"));
        o.require(c <= upper(m) + SLACK, format!("{label}: {c} > upper({m})"));
    }
}

fn criterion6(r: &Report) -> Outcome {
    let mut o = Outcome::new();
    let get = |s: &str, q: &str| value(r, s, q).unwrap_or(f64::NAN);
    let g = "graph_identity";
    let constants = [get(g, "tr"), get(g, "str")];
    sandwich(&mut o, "graph map", [get(g, "rg"), get(g, "srg")], constants, graph_upper);
    sandwich(&mut o, "graph difference", [get(g, "rg_diff"), get(g, "srg_diff")], constants, difference_upper);
    let l = "orthogonal_lines";
    sandwich(&mut o, "lines difference", [get(l, "rg_diff"), get(l, "srg_diff")], [get(l, "tr"), get(l, "str")], difference_upper);
    o
}

fn criterion7(r: &Report) -> Outcome {
    let mut o = Outcome::new();
    within(&mut o, r, "lines_45", "ap_rate", 0.5, 0.02);
    let c = value(r, "lines_45", "ap_rate").unwrap_or(f64::NAN);
    let st = value(r, "lines_45", "str").unwrap_or(f64::NAN);
    o.require(c <= 1.0 - st * st + SLACK, format!("c {c} > 1 - str^2, str {st}"));
    o.require(st >= (1.0 - c) / (3.0 - c) - SLACK, format!("str {st} < (1-c)/(3-c), c {c}"));

    let n = "cross_vs_line_60";
    let joined = r.row(n, "joining").and_then(|row| row.pass) == Some(true);
    o.require(joined, "nonconvex scenario fails the joining conditions");
    let cj = value(r, n, "joining").unwrap_or(f64::NAN);
    let st = value(r, n, "str").unwrap_or(f64::NAN);
    o.require(st >= (1.0 - cj) / (5.0 - cj) - SLACK, format!("{n}: str {st} < (1-c)/(5-c), c {cj}"));
    o
}

fn criterion8(r: &Report, battery: &[Scenario]) -> Outcome {
    let mut o = Outcome::new();
    for s in battery {
        let get = |q| value(r, &s.name, q);
        let (Some(itr), Some(itr_w)) = (get("itr"), get("itr_w")) else {
            o.require(false, format!("{}: itr or itr_w missing", s.name));
            continue;
        };
        o.require(itr <= itr_w + SLACK, format!("{}: itr {itr} > itr_w {itr_w}", s.name));
        if !s.is_convex() {
            continue;
        }
        let (Some(itr_c), Some(st)) = (get("itr_c"), get("str")) else {
            o.require(false, format!("{}: itr_c or str missing", s.name));
            continue;
        };
        o.require(itr_w + SLACK <= itr_c + 2.0 * SLACK, format!("{}: itr_w {itr_w} > itr_c {itr_c}", s.name));
        o.require((itr_c - st).abs() <= SLACK, format!("{}: itr_c {itr_c} vs str {st}", s.name));
    }
    o
}

fn random_convex_set(rng: &mut impl Rng, n: usize) -> SetRep {
    let point = |rng: &mut _| uniform_ball(rng, &Vector::zeros(n), 1.0);
    match rng.random_range(0..4) {
        0 => SetRep::ball(point(rng), rng.random_range(0.1..2.0)).unwrap(),
        1 => {
            let k = rng.random_range(1..n);
            let dirs: Vec<Vector> = (0..k).map(|_| unit_sphere(rng, n)).collect();
            SetRep::affine(point(rng), &dirs).unwrap()
        }
        2 => {
            let rows = (0..rng.random_range(1..6)).map(|_| (unit_sphere(rng, n), rng.random_range(0.0..1.0))).collect();
            SetRep::polyhedron(rows).unwrap()
        }
        _ => SetRep::polytope((0..rng.random_range(1..7)).map(|_| point(rng)).collect()).unwrap(),
    }
}

/// 10 000 projection queries on random convex sets in dimensions 2..4.
fn projection_properties(o: &mut Outcome) {
    const TOL: f64 = 1e-7;
    let mut queries = 0;
    for set_index in 0..1000 {
        let mut rng = sample_rng(2024, 900, 0, set_index);
        let n = rng.random_range(2..=4);
        let s = random_convex_set(&mut rng, n);
        for _ in 0..10 {
            let x = uniform_ball(&mut rng, &Vector::zeros(n), 3.0);
            let y = uniform_ball(&mut rng, &Vector::zeros(n), 3.0);
            let p = s.project(&x).unwrap().nearest.remove(0);
            let q = s.project(&y).unwrap().nearest.remove(0);
            queries += 1;
            let again = s.project(&p).unwrap().nearest.remove(0);
            o.require(again.dist(&p) <= TOL, format!("set {set_index}: projection not idempotent"));
            let r = &x - &p;
            o.require(r.dot(&(&q - &p)) <= TOL * (1.0 + r.norm()), format!("set {set_index}: projection not optimal"));
            o.require(p.dist(&q) <= x.dist(&y) + TOL, format!("set {set_index}: projection expands"));
        }
    }
    o.require(queries == 10_000, format!("{queries} queries"));
}

fn determinism(o: &mut Outcome, battery: &[Scenario], first: &Report) {
    let again = run_battery(battery, 1);
    o.require(render(first, Format::Csv) == render(&again, Format::Csv), "battery CSV differs between runs");
}

fn refinement(o: &mut Outcome, battery: &[Scenario]) {
    for s in battery.iter().filter(|s| ["lines_45", "disk_cap", "cross_vs_line_60", "tangent_balls"].contains(&s.name.as_str())) {
        let cfg = |n| EstimatorConfig { samples_per_radius: n, ..s.base_config.clone() };
        let small = ScenarioPair::new(&s.name, s.a.clone(), s.b.clone(), s.xbar.clone(), cfg(100)).unwrap();
        let large = ScenarioPair { cfg: cfg(400), ..small.clone() };
        for name in ConstantName::ALL {
            let (Ok(a), Ok(b)) = (small.estimate(name), large.estimate(name)) else { continue };
            for (ra, rb) in a.per_radius.iter().zip(&b.per_radius) {
                o.require(rb.inf_value <= ra.inf_value, format!("{} {name} at {}: {} > {}", s.name, ra.radius, rb.inf_value, ra.inf_value));
            }
        }
    }
}

fn dual_samples(o: &mut Outcome, battery: &[Scenario]) {
    let mut checked = 0usize;
    for s in battery.iter().filter(|s| s.is_convex()) {
        let cfg = EstimatorConfig { samples_per_radius: 200, ..s.base_config.clone() };
        let samples = itr_c_dual_samples(&s.a, &s.b, &s.xbar, &cfg).unwrap();
        for d in samples {
            let t = SubgradientTriple::new(-&d.x1s, -&d.x2s, &d.x1s + &d.x2s).unwrap();
            let ok = subdiff_f_membership(&t, &d.a, &d.b, &d.x, 1e-6).unwrap();
            o.require(ok, format!("{}: dual sample at radius {} is not a subgradient", s.name, d.radius));
            checked += 1;
        }
    }
    o.require(checked > 1000, format!("only {checked} dual samples"));
}

fn criterion9(r: &Report, battery: &[Scenario]) -> Outcome {
    let mut o = Outcome::new();
    projection_properties(&mut o);
    determinism(&mut o, battery, r);
    refinement(&mut o, battery);
    dual_samples(&mut o, battery);
    o.require(value(r, "same_line", "c00") == Some(0.0), "c00 does not report a violation for A = B");
    o.require(value(r, "orthogonal_lines", "c00") == Some(1.0), "c00 reports a violation for orthogonal lines");
    o
}

fn main() {
    let start = Instant::now();
    let examples = run_battery(&scenarios("worked_examples.toml"), 0);
    let battery = scenarios("battery.toml");
    let report = run_battery(&battery, 0);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("str = 1 for a line against itself", Box::new(|| criterion1(&examples))),
        ("tr <= 0.05 for a line against itself", Box::new(|| criterion2(&examples))),
        ("orthogonal lines: str, tr, tr_dual, itr, itr_c near 1/sqrt 2", Box::new(|| criterion3(&report))),
        ("primal sandwich on convex scenarios", Box::new(|| criterion4(&report, &battery))),
        ("tr = rg and str = srg for the pair mapping", Box::new(|| criterion5(&report))),
        ("graph and difference mapping sandwiches", Box::new(|| criterion6(&report))),
        ("alternating projection rate bounds", Box::new(|| criterion7(&report))),
        ("intrinsic transversality chain", Box::new(|| criterion8(&report, &battery))),
        ("property suites", Box::new(|| criterion9(&report, &battery))),
    ];
    let mut failed = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        let out = f();
        println!("criterion {}: {} ({label})", i + 1, if out.ok { "PASS" } else { "FAIL" });
        for n in out.notes.iter().take(10) {
            println!("    {n}");
        }
        failed += usize::from(!out.ok);
    }
    println!("battery rows: {}, failed rows: {}", report.summary.rows, report.summary.failed);
    println!("{} of {} criteria passed in {:.1?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed > 0 || report.summary.failed > 0 || examples.summary.failed > 0 {
        std::process::exit(1);
    }
}
