//! Executes scenarios and collects report rows.

use std::collections::HashMap;
use std::time::Instant;

use log::{debug, warn};
use rayon::prelude::*;
use transversality::altproj::{
    check_joining_conditions, empirical_joining_constant, fit_rate_or_terminated, run_ap, verify_rate_bounds, APTrace,
    RateFit,
};
use transversality::constants::{
    check_C00, check_P1_sandwich, check_chain, CheckLink, CheckReport, C00Verdict, ConstantEstimate, ConstantName,
};
use transversality::regmap::{
    difference_sandwich, estimate_rg, estimate_srg, graph_sandwich, mapping_equalities, MappingRep,
};
use transversality::Vector;

use crate::scenario::Scenario;

/// One line of the report.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub scenario: String,
    pub quantity: String,
    pub value: f64,
    pub bias: String,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    /// `None` when nothing was asserted about the quantity.
    pub pass: Option<bool>,
    pub margin: Option<f64>,
    pub runtime_ms: Option<f64>,
    /// Individual inequalities behind a check row.
    pub links: Vec<CheckLink>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub scenarios: usize,
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub unchecked: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    pub summary: Summary,
    /// AP traces by scenario name, kept when requested.
    pub traces: Vec<(String, APTrace)>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// 0 when every asserted row passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn row(&self, scenario: &str, quantity: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.scenario == scenario && r.quantity == quantity)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads for scenarios; 0 lets rayon decide.
    pub parallelism: usize,
    pub timings: bool,
    pub keep_traces: bool,
}

pub fn run_battery(scenarios: &[Scenario], parallelism: usize) -> Report {
    run_battery_with(scenarios, RunOptions { parallelism, ..RunOptions::default() })
}

pub fn run_battery_with(scenarios: &[Scenario], opts: RunOptions) -> Report {
    let run = || scenarios.par_iter().map(|s| run_scenario(s, opts)).collect::<Vec<_>>();
    let outcomes = match rayon::ThreadPoolBuilder::new().num_threads(opts.parallelism).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            warn!("thread pool unavailable ({e}); running on the global pool");
            run()
        }
    };
    let mut report = Report::default();
    for (rows, trace) in outcomes {
        report.rows.extend(rows);
        if let Some(t) = trace {
            report.traces.push(t);
        }
    }
    let s = &mut report.summary;
    s.scenarios = scenarios.len();
    s.rows = report.rows.len();
    for r in &report.rows {
        match r.pass {
            Some(true) => s.passed += 1,
            Some(false) => s.failed += 1,
            None => s.unchecked += 1,
        }
    }
    report
}

#[derive(Clone)]
enum Value {
    Constant(ConstantEstimate),
    Modulus(f64),
    Rate(f64),
}

impl Value {
    fn value(&self) -> f64 {
        match self {
            Value::Constant(e) => e.value,
            Value::Modulus(v) | Value::Rate(v) => *v,
        }
    }

    fn bias(&self) -> &'static str {
        match self {
            Value::Constant(e) => e.bias.as_str(),
            Value::Modulus(_) => "upper-bound",
            Value::Rate(_) => "fitted",
        }
    }
}

/// Lazily computed quantities of one scenario.
struct Context<'a> {
    s: &'a Scenario,
    cache: HashMap<&'static str, Result<Value, String>>,
    ap: Option<Result<(APTrace, RateFit), String>>,
}

fn static_name(name: &str) -> &'static str {
    crate::scenario::ESTIMATORS.iter().map(|(n, _)| *n).find(|n| *n == name).expect("validated estimator name")
}

impl<'a> Context<'a> {
    fn get(&mut self, name: &str) -> Result<Value, String> {
        let key = static_name(name);
        if let Some(v) = self.cache.get(key) {
            return v.clone();
        }
        let v = self.compute(key);
        self.cache.insert(key, v.clone());
        v
    }

    fn value(&mut self, name: &str) -> Result<f64, String> {
        self.get(name).map(|v| v.value())
    }

    fn compute(&mut self, name: &'static str) -> Result<Value, String> {
        let s = self.s;
        let cfg = s.config_for(name);
        if let Some(c) = ConstantName::parse(name) {
            let e = transversality::constants::ScenarioPair::new(&s.name, s.a.clone(), s.b.clone(), s.xbar.clone(), cfg.clone())
                .and_then(|p| p.estimate(c))
                .map_err(|e| e.to_string())?;
            return Ok(Value::Constant(e));
        }
        let (map, point): (MappingRep, Vector) = match name {
            "rg" | "srg" => match &s.mapping {
                Some((m, x)) => (m.clone(), x.clone()),
                None => (MappingRep::pair_product(s.a.clone(), s.b.clone()).map_err(|e| e.to_string())?, s.xbar.clone()),
            },
            "rg_diff" | "srg_diff" => (
                MappingRep::difference(s.a.clone(), s.b.clone()).map_err(|e| e.to_string())?,
                Vector::concat(&[&s.xbar, &s.xbar]),
            ),
            "ap_rate" => return self.ap().map(|(_, f)| Value::Rate(f.c)),
            _ => unreachable!("validated estimator name"),
        };
        let r = if name.starts_with("rg") { estimate_rg(&map, &point, cfg) } else { estimate_srg(&map, &point, cfg) };
        r.map(|e| Value::Modulus(e.value)).map_err(|e| e.to_string())
    }

    fn ap(&mut self) -> Result<(APTrace, RateFit), String> {
        if self.ap.is_none() {
            let s = self.s;
            let ap = s.ap.as_ref().ok_or("scenario has no ap block")?;
            let r = Vector::new(ap.x0.clone())
                .and_then(|x0| run_ap(&s.a, &s.b, &x0, ap.max_iter, ap.stop_tol))
                .and_then(|t| fit_rate_or_terminated(&t).map(|f| (t, f)))
                .map_err(|e| e.to_string());
            self.ap = Some(r);
        }
        self.ap.clone().expect("just set")
    }

    fn check(&mut self, name: &str) -> Result<CheckReport, String> {
        let s = self.s;
        let slack = s.base_config.slack;
        let convex = s.is_convex();
        Ok(match name {
            "sandwich" => check_P1_sandwich(self.value("str")?, self.value("str_prime")?, slack),
            "chain" => {
                let itr_c = if convex { Some(self.value("itr_c")?) } else { None };
                check_chain(
                    self.value("itr")?,
                    self.value("itr_w")?,
                    itr_c,
                    self.value("str")?,
                    self.value("str1")?,
                    convex,
                    slack,
                )
            }
            "mapping_equalities" => {
                mapping_equalities(self.value("tr")?, self.value("str")?, self.value("rg")?, self.value("srg")?, slack)
            }
            "graph_sandwich" => {
                graph_sandwich(self.value("tr")?, self.value("str")?, self.value("rg")?, self.value("srg")?, slack)
            }
            "difference_sandwich" => difference_sandwich(
                self.value("tr")?,
                self.value("str")?,
                self.value("rg_diff")?,
                self.value("srg_diff")?,
                slack,
            ),
            "rate_bounds" => {
                let Value::Constant(st) = self.get("str")? else { unreachable!() };
                let (trace, fit) = self.ap()?;
                verify_rate_bounds(&st, &trace, &fit, convex, slack)
            }
            "joining" => {
                let (trace, _) = self.ap()?;
                let c = empirical_joining_constant(&trace);
                let ok = c < 1.0 && check_joining_conditions(&trace, c);
                let margin = 1.0 - c;
                let link = CheckLink { name: "joining constant < 1".into(), lhs: c, rhs: 1.0, margin, pass: ok, applicable: true };
                CheckReport { name: "joining".into(), links: vec![link] }
            }
            _ => unreachable!("c00 and unknown names handled by the caller"),
        })
    }
}

fn timed<T>(on: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let t = Instant::now();
    let v = f();
    (v, on.then(|| t.elapsed().as_secs_f64() * 1e3))
}

fn run_scenario(s: &Scenario, opts: RunOptions) -> (Vec<Row>, Option<(String, APTrace)>) {
    debug!("scenario {}", s.name);
    let mut ctx = Context { s, cache: HashMap::new(), ap: None };
    let mut rows = Vec::new();
    let blank = |quantity: &str| Row {
        scenario: s.name.clone(),
        quantity: quantity.into(),
        value: f64::NAN,
        bias: String::new(),
        expected: None,
        tolerance: None,
        pass: None,
        margin: None,
        runtime_ms: None,
        links: Vec::new(),
        error: None,
    };
    let judge = |row: &mut Row| {
        if let Some(e) = s.expected.get(&row.quantity) {
            let margin = e.tolerance - (row.value - e.value).abs();
            row.expected = Some(e.value);
            row.tolerance = Some(e.tolerance);
            row.margin = Some(margin);
            row.pass = Some(margin >= 0.0);
        }
    };

    for name in &s.estimators {
        let (r, ms) = timed(opts.timings, || ctx.get(name));
        let mut row = Row { runtime_ms: ms, ..blank(name) };
        match r {
            Ok(v) => {
                row.value = v.value();
                row.bias = v.bias().into();
                judge(&mut row);
            }
            Err(e) => {
                warn!("{}: {name}: {e}", s.name);
                row.bias = "error".into();
                row.pass = Some(false);
                row.error = Some(e);
            }
        }
        rows.push(row);
    }

    for name in &s.checks {
        let mut row = blank(name);
        if name == "c00" {
            let (r, ms) = timed(opts.timings, || check_C00(&s.a, &s.b, &s.xbar, &s.base_config));
            row.runtime_ms = ms;
            match r {
                Ok(v) => {
                    row.value = if matches!(v, C00Verdict::TransversalCertifiedHeuristically) { 1.0 } else { 0.0 };
                    row.bias = "heuristic".into();
                    judge(&mut row);
                }
                Err(e) => {
                    row.bias = "error".into();
                    row.pass = Some(false);
                    row.error = Some(e.to_string());
                }
            }
            rows.push(row);
            continue;
        }
        let (r, ms) = timed(opts.timings, || ctx.check(name));
        row.runtime_ms = ms;
        match r {
            Ok(rep) => {
                row.tolerance = Some(s.base_config.slack);
                if let Some(w) = rep.worst() {
                    row.value = w.lhs;
                    row.expected = Some(w.rhs);
                    row.margin = Some(w.margin);
                }
                // a check whose links are all inapplicable asserts nothing
                row.pass = rep.worst().map(|_| rep.passed());
                for l in rep.failures() {
                    warn!("{}: {name}: {} failed ({} vs {})", s.name, l.name, l.lhs, l.rhs);
                }
                row.links = rep.links;
            }
            Err(e) => {
                warn!("{}: {name}: {e}", s.name);
                row.bias = "error".into();
                row.pass = Some(false);
                row.error = Some(e);
            }
        }
        rows.push(row);
    }

    let trace = match (&ctx.ap, opts.keep_traces) {
        (Some(Ok((t, _))), true) => Some((s.name.clone(), t.clone())),
        (None, true) if s.ap.is_some() => ctx.ap().ok().map(|(t, _)| (s.name.clone(), t)),
        _ => None,
    };
    (rows, trace)
}
