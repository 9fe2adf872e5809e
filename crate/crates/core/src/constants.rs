//! Sampling estimators for the (sub)transversality and intrinsic
//! transversality constants, and checkers for the relations between them.
//!
//! Every estimator follows the same pattern: for each radius of a decreasing
//! schedule it evaluates a ratio on seeded random samples near the reference
//! point and records the infimum over admissible samples. The value reported
//! is the infimum at the finest radius; if no sample there is admissible the
//! value is 1.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dims, Vector};
use crate::normalcones::{limiting_normals, normal_cone_at, ConeRep};
use crate::projections::{intersect, Intersection, SetRep};
use crate::sampling::{map_samples, radial_ball, sample_rng, uniform_ball, unit_sphere};

/// Ties within this distance of the running infimum keep the earlier sample.
const ARGMIN_TIE: f64 = 1e-12;
const BISECTION_STEPS: usize = 60;
/// Inner perturbations per outer sample for the two-scale estimators.
const INNER_SAMPLES: usize = 8;
const SLOPE_STEP: f64 = 1e-7;
const WEIGHT_GRID: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Strictly decreasing radii ρ₀ > ρ₁ > …; the last one is reported.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
    pub membership_tol: f64,
    /// A point counts as outside `A∩B` when its distance exceeds this.
    pub exclusion_tol: f64,
    /// Tolerance of the inequality checks.
    pub slack: f64,
    /// Optional extra filter `‖x−a‖ = ‖x−b‖ < α‖x−x̄‖` on the dual samples.
    pub strengthen_alpha: Option<f64>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            radii: geometric_radii(0.5, 8),
            samples_per_radius: 1000,
            seed: 0,
            membership_tol: 1e-9,
            exclusion_tol: 1e-7,
            slack: 0.05,
            strengthen_alpha: None,
        }
    }
}

/// `ρ₀·2^(−k)` for `k = 0..scales`.
pub fn geometric_radii(rho0: f64, scales: usize) -> Vec<f64> {
    (0..scales).map(|k| rho0 * 0.5f64.powi(k as i32)).collect()
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::Config("radius schedule is empty".into()));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config("radii must be positive and finite".into()));
        }
        if self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("radii must be strictly decreasing".into()));
        }
        if *self.radii.last().expect("nonempty") < 1e-6 {
            return Err(Error::Config("finest radius must be at least 1e-6".into()));
        }
        if self.samples_per_radius < 100 {
            return Err(Error::Config("samples_per_radius must be at least 100".into()));
        }
        for (name, v) in [
            ("membership_tol", self.membership_tol),
            ("exclusion_tol", self.exclusion_tol),
            ("slack", self.slack),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and nonnegative")));
            }
        }
        if let Some(a) = self.strengthen_alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Config("strengthen_alpha must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn finest_radius(&self) -> f64 {
        *self.radii.last().expect("validated schedule")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantName {
    Str,
    StrPrime,
    Tr,
    TrDual,
    Str1,
    Itr,
    ItrW,
    ItrC,
}

impl ConstantName {
    pub const ALL: [ConstantName; 8] = [
        ConstantName::Str,
        ConstantName::StrPrime,
        ConstantName::Tr,
        ConstantName::TrDual,
        ConstantName::Str1,
        ConstantName::Itr,
        ConstantName::ItrW,
        ConstantName::ItrC,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstantName::Str => "str",
            ConstantName::StrPrime => "str_prime",
            ConstantName::Tr => "tr",
            ConstantName::TrDual => "tr_dual",
            ConstantName::Str1 => "str1",
            ConstantName::Itr => "itr",
            ConstantName::ItrW => "itr_w",
            ConstantName::ItrC => "itr_c",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ConstantName::ALL.into_iter().find(|n| n.as_str() == s)
    }

    fn stream(self) -> u64 {
        match self {
            ConstantName::Str => 1,
            ConstantName::StrPrime => 2,
            ConstantName::Tr => 3,
            ConstantName::TrDual => 4,
            ConstantName::Str1 => 5,
            // the three intrinsic constants share outer samples
            ConstantName::Itr | ConstantName::ItrW | ConstantName::ItrC => 6,
        }
    }
}

impl std::fmt::Display for ConstantName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bias {
    /// An infimum over a subset of the admissible set: never below the true
    /// value at that radius.
    UpperBound,
    /// Nested limits approximated at fixed scales.
    Heuristic,
}

impl Bias {
    pub fn as_str(self) -> &'static str {
        match self {
            Bias::UpperBound => "upper-bound",
            Bias::Heuristic => "heuristic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusRecord {
    pub radius: f64,
    pub inf_value: f64,
    pub n_admissible: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub name: ConstantName,
    pub value: f64,
    pub bias: Bias,
    pub per_radius: Vec<RadiusRecord>,
    /// Points of the sample achieving the final infimum.
    pub argmin_witness: Option<Vec<Vector>>,
    /// Largest residual reported by an iterative intersection oracle.
    pub oracle_residual: f64,
}

impl ConstantEstimate {
    pub fn n_admissible(&self) -> usize {
        self.per_radius.last().map_or(0, |r| r.n_admissible)
    }
}

/// A pair of sets with a common reference point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioPair {
    pub name: String,
    pub a: SetRep,
    pub b: SetRep,
    pub xbar: Vector,
    pub cfg: EstimatorConfig,
}

impl ScenarioPair {
    pub fn new(name: impl Into<String>, a: SetRep, b: SetRep, xbar: Vector, cfg: EstimatorConfig) -> Result<Self> {
        check_pair(&a, &b, &xbar, &cfg)?;
        Ok(ScenarioPair { name: name.into(), a, b, xbar, cfg })
    }

    pub fn is_convex(&self) -> bool {
        self.a.is_convex() && self.b.is_convex()
    }

    pub fn estimate(&self, name: ConstantName) -> Result<ConstantEstimate> {
        let (a, b, x, c) = (&self.a, &self.b, &self.xbar, &self.cfg);
        match name {
            ConstantName::Str => estimate_str(a, b, x, c),
            ConstantName::StrPrime => estimate_str_prime(a, b, x, c),
            ConstantName::Tr => estimate_tr(a, b, x, c),
            ConstantName::TrDual => estimate_tr_dual(a, b, x, c),
            ConstantName::Str1 => estimate_str1(a, b, x, c),
            ConstantName::Itr => estimate_itr(a, b, x, c),
            ConstantName::ItrW => estimate_itr_w(a, b, x, c),
            ConstantName::ItrC => estimate_itr_c(a, b, x, c),
        }
    }
}

fn check_pair(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<()> {
    cfg.validate()?;
    check_dims(a.dim(), &[xbar])?;
    if b.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let d = a.distance(xbar)?.max(b.distance(xbar)?);
    if d > cfg.membership_tol {
        return Err(Error::Membership { distance: d });
    }
    Ok(())
}

struct Hit {
    value: f64,
    witness: Vec<Vector>,
    residual: f64,
}

impl Hit {
    fn new(value: f64, witness: Vec<Vector>) -> Self {
        Hit { value, witness, residual: 0.0 }
    }
}

fn run_samples<F>(cfg: &EstimatorConfig, stream: u64, k: usize, radius: f64, f: &F) -> Vec<Option<Hit>>
where
    F: Fn(f64, usize, &mut ChaCha8Rng) -> Option<Hit> + Sync,
{
    map_samples(cfg.samples_per_radius, cfg.seed, stream, k, |i, rng| f(radius, i, rng))
}

fn scan<F>(name: ConstantName, bias: Bias, cfg: &EstimatorConfig, f: F) -> ConstantEstimate
where
    F: Fn(f64, usize, &mut ChaCha8Rng) -> Option<Hit> + Sync,
{
    let mut per_radius = Vec::with_capacity(cfg.radii.len());
    let mut witness = None;
    let mut residual = 0.0f64;
    for (k, &radius) in cfg.radii.iter().enumerate() {
        let hits = run_samples(cfg, name.stream(), k, radius, &f);
        let mut best: Option<&Hit> = None;
        let mut count = 0;
        for h in hits.iter().flatten() {
            count += 1;
            residual = residual.max(h.residual);
            if best.is_none_or(|b| h.value < b.value - ARGMIN_TIE) {
                best = Some(h);
            }
        }
        let inf_value = best.map_or(1.0, |b| b.value.clamp(0.0, 1.0));
        per_radius.push(RadiusRecord { radius, inf_value, n_admissible: count });
        witness = best.map(|b| b.witness.clone());
    }
    let value = per_radius.last().map_or(1.0, |r| r.inf_value);
    ConstantEstimate { name, value, bias, per_radius, argmin_witness: witness, oracle_residual: residual }
}

/// A point on the segment `[P_A(y), P_B(y)]` equidistant from both sets.
fn equidistant_point(a: &SetRep, b: &SetRep, y: &Vector) -> Vector {
    let a0 = a.nearest(y).0;
    let b0 = b.nearest(y).0;
    let at = |t: f64| &a0 + &(&b0 - &a0).scale(t);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let x = at(mid);
        if a.nearest(&x).1 < b.nearest(&x).1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Sample point for the primal ratios: every other sample is an equidistant
/// point, where `max{d_A, d_B}` is smallest along its segment.
fn primal_point<R: Rng + ?Sized>(a: &SetRep, b: &SetRep, xbar: &Vector, radius: f64, i: usize, rng: &mut R) -> Vector {
    if i % 2 == 0 {
        uniform_ball(rng, xbar, radius)
    } else {
        equidistant_point(a, b, &radial_ball(rng, xbar, 0.25 * radius))
    }
}

fn intersection_of(a: &SetRep, b: &SetRep) -> Result<Intersection> {
    intersect(a, b)
}

/// Subtransversality constant: `inf max{d(x,A), d(x,B)} / d(x,A∩B)` near x̄.
pub fn estimate_str(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<ConstantEstimate> {
    check_pair(a, b, xbar, cfg)?;
    let inter = intersection_of(a, b)?;
    Ok(scan(ConstantName::Str, Bias::UpperBound, cfg, |radius, i, rng| {
        let x = primal_point(a, b, xbar, radius, i, rng);
        if x.dist(xbar) > radius {
            return None;
        }
        let proj = inter.project(&x).ok()?;
        if proj.dist <= cfg.exclusion_tol {
            return None;
        }
        let num = a.nearest(&x).1.max(b.nearest(&x).1);
        Some(Hit { value: num / proj.dist, witness: vec![x], residual: proj.residual })
    }))
}

/// One-sided variant: `inf d(x,B) / d(x,A∩B)` over `x ∈ A` near x̄.
pub fn estimate_str_prime(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<ConstantEstimate> {
    check_pair(a, b, xbar, cfg)?;
    let inter = intersection_of(a, b)?;
    Ok(scan(ConstantName::StrPrime, Bias::UpperBound, cfg, |radius, _, rng| {
        let y = radial_ball(rng, xbar, 0.5 * radius);
        let x = a.nearest(&y).0;
        if x.dist(xbar) > radius {
            return None;
        }
        let proj = inter.project(&x).ok()?;
        if proj.dist <= cfg.exclusion_tol {
            return None;
        }
        Some(Hit { value: b.nearest(&x).1 / proj.dist, witness: vec![x], residual: proj.residual })
    }))
}

/// Transversality constant: the subtransversality ratio of the translated
/// pair `(A−x₁, B−x₂)` with `x₁, x₂ ∈ δB`. A translated pair that does not
/// meet gives ratio 0.
pub fn estimate_tr(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<ConstantEstimate> {
    check_pair(a, b, xbar, cfg)?;
    let zero = Vector::zeros(xbar.dim());
    Ok(scan(ConstantName::Tr, Bias::UpperBound, cfg, |radius, i, rng| {
        let x1 = uniform_ball(rng, &zero, radius);
        let x2 = uniform_ball(rng, &zero, radius);
        let at = a.translate(&-&x1).ok()?;
        let bt = b.translate(&-&x2).ok()?;
        let x = primal_point(&at, &bt, xbar, radius, i, rng);
        if x.dist(xbar) > radius {
            return None;
        }
        let inter = match intersect(&at, &bt) {
            Ok(inter) => inter,
            Err(Error::EmptyIntersection) => return Some(Hit::new(0.0, vec![x, x1, x2])),
            Err(_) => return None,
        };
        let proj = inter.project(&x).ok()?;
        if proj.dist <= cfg.exclusion_tol {
            return None;
        }
        let num = at.nearest(&x).1.max(bt.nearest(&x).1);
        Some(Hit { value: num / proj.dist, witness: vec![x, x1, x2], residual: proj.residual })
    }))
}

/// Smallest `‖u₁+u₂‖/2` with `u₂` ranging over unit vectors of `kb`, for
/// each candidate `u₁`.
fn best_response(cands: &[Vector], kb: &ConeRep) -> Option<(f64, Vector, Vector)> {
    let mut best: Option<(f64, Vector, Vector)> = None;
    let dirs = kb.extreme_directions();
    for u1 in cands {
        let p = kb.project(&-u1);
        // when −u₁ is polar to the cone, ⟨u₁,·⟩ ≥ 0 on it and the best unit
        // element is an extreme direction
        let u2 = if p.norm() > 1e-12 {
            p.normalized()
        } else {
            dirs.iter().min_by(|x, y| u1.dot(x).total_cmp(&u1.dot(y))).cloned()
        };
        let Some(u2) = u2 else { continue };
        let v = (u1 + &u2).norm() / 2.0;
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, u1.clone(), u2));
        }
    }
    best
}

/// Dual transversality constant: `inf ‖x₁*+x₂*‖` over normals at nearby
/// points of each set with `‖x₁*‖+‖x₂*‖ = 1`.
pub fn estimate_tr_dual(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<ConstantEstimate> {
    check_pair(a, b, xbar, cfg)?;
    Ok(scan(ConstantName::TrDual, Bias::UpperBound, cfg, |radius, i, rng| {
        let ya = radial_ball(rng, xbar, 0.5 * radius);
        let yb = radial_ball(rng, xbar, 0.5 * radius);
        let pa = if i % 4 == 0 { xbar.clone() } else { a.nearest(&ya).0 };
        let pb = if i % 4 == 1 { xbar.clone() } else { b.nearest(&yb).0 };
        let ka = normal_cone_at(a, &pa).ok()?;
        let kb = normal_cone_at(b, &pb).ok()?;
        if ka.is_zero() || kb.is_zero() {
            return None;
        }
        let mut ca = ka.extreme_directions();
        ca.extend(ka.sample_unit(rng));
        ca.extend((&ya - &pa).normalized().filter(|u| ka.contains(u, 1e-9)));
        let mut cb = kb.extreme_directions();
        cb.extend(kb.sample_unit(rng));
        let fwd = best_response(&ca, &kb);
        let bwd = best_response(&cb, &ka).map(|(v, u2, u1)| (v, u1, u2));
        let (v, u1, u2) = match (fwd, bwd) {
            (Some(f), Some(g)) => {
                if g.0 < f.0 {
                    g
                } else {
                    f
                }
            }
            (f, g) => f.or(g)?,
        };
        Some(Hit::new(v, vec![pa, pb, u1.scale(0.5), u2.scale(0.5)]))
    }))
}

/// An admissible configuration `a ∈ A∖B`, `b ∈ B∖A`, `‖x−a‖ = ‖x−b‖`.
struct Outer {
    a: Vector,
    b: Vector,
    x: Vector,
    /// `a ∈ P_A(x)` and `b ∈ P_B(x)`, so `x−a` and `x−b` are normals.
    projected: bool,
}

/// Even samples take `x` equidistant from the sets and `a`, `b` its
/// projections. Odd samples take `a`, `b` from projected ambient samples and
/// `x` on the bisector hyperplane of `[a, b]`.
fn outer_sample<R: Rng + ?Sized>(
    a_set: &SetRep,
    b_set: &SetRep,
    xbar: &Vector,
    cfg: &EstimatorConfig,
    radius: f64,
    i: usize,
    rng: &mut R,
) -> Option<Outer> {
    let (a, b, x, projected) = if i % 2 == 0 {
        let x = equidistant_point(a_set, b_set, &radial_ball(rng, xbar, 0.25 * radius));
        let (a, da) = a_set.nearest(&x);
        let (b, db) = b_set.nearest(&x);
        if (da - db).abs() > 1e-9 * (1.0 + da) {
            return None;
        }
        (a, b, x, true)
    } else {
        let a = a_set.nearest(&radial_ball(rng, xbar, 0.25 * radius)).0;
        let b = b_set.nearest(&radial_ball(rng, xbar, 0.25 * radius)).0;
        let n = (&b - &a).normalized()?;
        let mid = (&a + &b).scale(0.5);
        let z = radial_ball(rng, &Vector::zeros(xbar.dim()), 0.25 * radius);
        let z = &z - &n.scale(z.dot(&n));
        (a, b, &mid + &z, false)
    };
    let t = x.dist(&a);
    if t <= cfg.exclusion_tol || x.dist(&b) <= cfg.exclusion_tol {
        return None;
    }
    if b_set.nearest(&a).1 <= cfg.exclusion_tol || a_set.nearest(&b).1 <= cfg.exclusion_tol {
        return None;
    }
    if a.dist(xbar) > radius || b.dist(xbar) > radius || x.dist(xbar) > radius {
        return None;
    }
    if let Some(alpha) = cfg.strengthen_alpha {
        if t >= alpha * x.dist(xbar) {
            return None;
        }
    }
    Some(Outer { a, b, x, projected })
}

/// `min ‖w·u₁ + (1−w)·u₂‖` over a grid of weights with `w·d₁ < δ` and
/// `(1−w)·d₂ < δ`, where `dᵢ` are the distances of `uᵢ` to the cones.
fn best_weight(u1: &Vector, d1: f64, u2: &Vector, d2: f64, delta: f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for k in 1..WEIGHT_GRID {
        let w = k as f64 / WEIGHT_GRID as f64;
        if w * d1 >= delta || (1.0 - w) * d2 >= delta {
            continue;
        }
        let v = (u1.scale(w) + u2.scale(1.0 - w)).norm();
        if best.is_none_or(|b| v < b.0) {
            best = Some((v, w));
        }
    }
    best
}

/// Intrinsic transversality constant: Fréchet normals at `a ∈ A∖B` and
/// `b ∈ B∖A` nearly aligned with `x−a` and `x−b`, where `‖x−a‖ ≈ ‖x−b‖`.
pub fn estimate_itr(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<ConstantEstimate> {
    check_pair(a, b, xbar, cfg)?;
    Ok(scan(ConstantName::Itr, Bias::UpperBound, cfg, |radius, i, rng| {
        let o = outer_sample(a, b, xbar, cfg, radius, i, rng)?;
        let r1 = &o.x - &o.a;
        let r2 = &o.x - &o.b;
        let (u1, u2) = if o.projected {
            (r1.normalized()?, r2.normalized()?)
        } else {
            // the cone element closest in angle to x−a
            let v1 = normal_cone_at(a, &o.a).ok()?.project(&r1);
            let v2 = normal_cone_at(b, &o.b).ok()?.project(&r2);
            if v1.norm() <= (1.0 - radius) * r1.norm() || v2.norm() <= (1.0 - radius) * r2.norm() {
                return None;
            }
            (v1.normalized()?, v2.normalized()?)
        };
        let v = (&u1 + &u2).norm() / 2.0;
        Some(Hit::new(v, vec![o.a, o.b, o.x, u1.scale(0.5), u2.scale(0.5)]))
    }))
}

/// Convex dual constant: `x₁*, x₂*` exactly aligned with `x−a`, `x−b` and
/// within δ of the normal cones.
pub fn estimate_itr_c(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<ConstantEstimate> {
    check_convex_pair(a, b, xbar, cfg)?;
    Ok(scan(ConstantName::ItrC, Bias::UpperBound, cfg, |radius, i, rng| {
        itr_c_sample(a, b, xbar, cfg, radius, i, rng).map(|s| Hit::new(s.value, s.into_witness()))
    }))
}

/// One admissible configuration of [`estimate_itr_c`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualSample {
    pub radius: f64,
    pub value: f64,
    pub a: Vector,
    pub b: Vector,
    pub x: Vector,
    /// `w·(x−a)/‖x−a‖`
    pub x1s: Vector,
    /// `(1−w)·(x−b)/‖x−b‖`
    pub x2s: Vector,
}

impl DualSample {
    fn into_witness(self) -> Vec<Vector> {
        vec![self.a, self.b, self.x, self.x1s, self.x2s]
    }
}

/// Every admissible sample [`estimate_itr_c`] evaluates, over all radii.
pub fn itr_c_dual_samples(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<Vec<DualSample>> {
    check_convex_pair(a, b, xbar, cfg)?;
    let mut out = Vec::new();
    for (k, &radius) in cfg.radii.iter().enumerate() {
        let batch = map_samples(cfg.samples_per_radius, cfg.seed, ConstantName::ItrC.stream(), k, |i, rng| {
            itr_c_sample(a, b, xbar, cfg, radius, i, rng)
        });
        out.extend(batch.into_iter().flatten());
    }
    Ok(out)
}

fn check_convex_pair(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<()> {
    check_pair(a, b, xbar, cfg)?;
    if !(a.is_convex() && b.is_convex()) {
        return Err(Error::NonConvexInput);
    }
    Ok(())
}

fn itr_c_sample(
    a: &SetRep,
    b: &SetRep,
    xbar: &Vector,
    cfg: &EstimatorConfig,
    radius: f64,
    i: usize,
    rng: &mut ChaCha8Rng,
) -> Option<DualSample> {
    let o = outer_sample(a, b, xbar, cfg, radius, i, rng)?;
    let (v, w, u1, u2) = aligned_pair(a, b, &o.a, &o.b, &o.x, o.projected, radius)?;
    Some(DualSample { radius, value: v, a: o.a, b: o.b, x: o.x, x1s: u1.scale(w), x2s: u2.scale(1.0 - w) })
}

/// Best weighted pair aligned with `x−a'`-type offsets. Returns the value,
/// the weight and the two unit directions.
fn aligned_pair(
    a_set: &SetRep,
    b_set: &SetRep,
    cone_a_at: &Vector,
    cone_b_at: &Vector,
    x: &Vector,
    exact: bool,
    delta: f64,
) -> Option<(f64, f64, Vector, Vector)> {
    aligned_pair_from(a_set, b_set, cone_a_at, cone_b_at, cone_a_at, cone_b_at, x, exact, delta)
}

#[allow(clippy::too_many_arguments)]
fn aligned_pair_from(
    a_set: &SetRep,
    b_set: &SetRep,
    cone_a_at: &Vector,
    cone_b_at: &Vector,
    x1: &Vector,
    x2: &Vector,
    x: &Vector,
    exact: bool,
    delta: f64,
) -> Option<(f64, f64, Vector, Vector)> {
    let u1 = (x - x1).normalized()?;
    let u2 = (x - x2).normalized()?;
    let (d1, d2) = if exact {
        (0.0, 0.0)
    } else {
        (normal_cone_at(a_set, cone_a_at).ok()?.distance(&u1), normal_cone_at(b_set, cone_b_at).ok()?.distance(&u2))
    };
    let (v, w) = best_weight(&u1, d1, &u2, d2, delta)?;
    Some((v, w, u1, u2))
}

/// Two-scale dual constant. Each outer configuration is perturbed at an
/// inner scale `ε = ρ·m`, where `m ≤ ρ` is the smallest separation in the
/// configuration, and the best inner value is kept.
pub fn estimate_itr_w(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<ConstantEstimate> {
    check_pair(a, b, xbar, cfg)?;
    let n = xbar.dim();
    Ok(scan(ConstantName::ItrW, Bias::Heuristic, cfg, |radius, i, rng| {
        let o = outer_sample(a, b, xbar, cfg, radius, i, rng)?;
        let m = o.x.dist(&o.a).min(o.x.dist(&o.b)).min(b.nearest(&o.a).1).min(a.nearest(&o.b).1);
        let eps = radius * m.min(radius);
        let mut best = aligned_pair(a, b, &o.a, &o.b, &o.x, o.projected, radius)
            .map(|(v, w, u1, u2)| (v, vec![o.a.clone(), o.b.clone(), o.x.clone(), u1.scale(w), u2.scale(1.0 - w)]));
        for _ in 0..INNER_SAMPLES {
            let ap = a.nearest(&(&o.a + &unit_sphere(rng, n).scale(eps * rng.random::<f64>()))).0;
            let bp = b.nearest(&(&o.b + &unit_sphere(rng, n).scale(eps * rng.random::<f64>()))).0;
            let x1 = &o.a + &unit_sphere(rng, n).scale(eps * rng.random::<f64>());
            let x2 = &o.b + &unit_sphere(rng, n).scale(eps * rng.random::<f64>());
            let xp = &o.x + &unit_sphere(rng, n).scale(eps * rng.random::<f64>());
            // move x' onto the bisector of [x₁', x₂']
            let Some(nrm) = (&x2 - &x1).normalized() else { continue };
            let mid = (&x1 + &x2).scale(0.5);
            let xp = &xp - &nrm.scale((&xp - &mid).dot(&nrm));
            if let Some((v, w, u1, u2)) = aligned_pair_from(a, b, &ap, &bp, &x1, &x2, &xp, false, radius) {
                if best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, vec![ap, bp, xp, u1.scale(w), u2.scale(1.0 - w)]));
                }
            }
        }
        best.map(|(v, w)| Hit::new(v, w))
    }))
}

/// `max{‖a−x‖, ‖b−x‖}`.
fn fmax(a: &Vector, b: &Vector, x: &Vector) -> f64 {
    a.dist(x).max(b.dist(x))
}

/// Sampled ρ-slope of `(a', b', u) ↦ f(a', b', u)` on `A×B×X` at `(a, b, x)`.
fn rho_slope<R: Rng + ?Sized>(
    a_set: &SetRep,
    b_set: &SetRep,
    a: &Vector,
    b: &Vector,
    x: &Vector,
    rho: f64,
    rng: &mut R,
) -> Option<f64> {
    let f0 = fmax(a, b, x);
    if f0 <= 0.0 {
        return None;
    }
    let h = SLOPE_STEP * f0;
    let t1 = a.dist(x);
    let t2 = b.dist(x);
    let e1 = (x - a).scale(1.0 / t1.max(f64::MIN_POSITIVE));
    let e2 = (x - b).scale(1.0 / t2.max(f64::MIN_POSITIVE));
    // minimum-norm element of conv{e1, e2}; every move below is scored on
    // the actual f, so using both gradients even when one is inactive is safe
    let d = &e1 - &e2;
    let dd = d.norm_squared();
    let w = if dd > 0.0 { (-e2.dot(&d) / dd).clamp(0.0, 1.0) } else { 0.5 };
    let g = e1.scale(w) + e2.scale(1.0 - w);
    let ratio = |ap: &Vector, bp: &Vector, u: &Vector| {
        let denom = u.dist(x).max(rho * ap.dist(a)).max(rho * bp.dist(b));
        if denom <= 0.0 {
            0.0
        } else {
            (f0 - fmax(ap, bp, u)).max(0.0) / denom
        }
    };
    let step = h / rho;
    let ap = a_set.nearest(&(a + &e1.scale(step))).0;
    let bp = b_set.nearest(&(b + &e2.scale(step))).0;
    // u moves against each gradient and their minimum-norm combination,
    // paired with the set points moving toward x
    let mut moves = vec![x.clone(), x - &e1.scale(h), x - &e2.scale(h)];
    if let Some(dir) = g.normalized() {
        moves.push(x - &dir.scale(h));
    }
    let pairs = [(a, b), (&ap, b), (a, &bp), (&ap, &bp)];
    let mut best = 0.0f64;
    for u in &moves {
        for (pa, pb) in pairs {
            best = best.max(ratio(pa, pb, u));
        }
    }
    let n = x.dim();
    for _ in 0..INNER_SAMPLES {
        let u = x + &unit_sphere(rng, n).scale(h);
        let ap = a_set.nearest(&(a + &unit_sphere(rng, n).scale(step))).0;
        let bp = b_set.nearest(&(b + &unit_sphere(rng, n).scale(step))).0;
        best = best.max(ratio(&ap, &bp, &u));
    }
    Some(best)
}

/// Localized subtransversality constant: infimum of the ρ-slope of `f` over
/// `a ∈ A∖B`, `b ∈ B∖A` and equidistant `x` near x̄.
pub fn estimate_str1(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<ConstantEstimate> {
    check_pair(a, b, xbar, cfg)?;
    Ok(scan(ConstantName::Str1, Bias::Heuristic, cfg, |radius, i, rng| {
        let o = outer_sample(a, b, xbar, cfg, radius, i, rng)?;
        let s = rho_slope(a, b, &o.a, &o.b, &o.x, radius, rng)?;
        Some(Hit::new(s, vec![o.a, o.b, o.x]))
    }))
}

/// A triple `(x₁*, x₂*, x*)` with `x* = −(x₁*+x₂*)` and `‖x₁*‖+‖x₂*‖ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgradientTriple {
    pub x1s: Vector,
    pub x2s: Vector,
    pub xs: Vector,
}

impl SubgradientTriple {
    pub fn new(x1s: Vector, x2s: Vector, xs: Vector) -> Result<Self> {
        check_dims(xs.dim(), &[&x1s, &x2s])?;
        if (&(&x1s + &x2s) + &xs).norm() > 1e-10 {
            return Err(Error::Argument("x* must equal −(x₁* + x₂*)".into()));
        }
        if (x1s.norm() + x2s.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::Argument("‖x₁*‖ + ‖x₂*‖ must equal 1".into()));
        }
        Ok(SubgradientTriple { x1s, x2s, xs })
    }

    /// Completes `(x₁*, x₂*)` with `x* = −(x₁*+x₂*)`.
    pub fn from_pair(x1s: Vector, x2s: Vector) -> Result<Self> {
        let xs = -(&x1s + &x2s);
        SubgradientTriple::new(x1s, x2s, xs)
    }
}

/// Whether `t` is a subgradient of `f(x₁,x₂,x) = max{‖x₁−x‖, ‖x₂−x‖}` at
/// `(x1, x2, x)` in the Euclidean setting.
pub fn subdiff_f_membership(t: &SubgradientTriple, x1: &Vector, x2: &Vector, x: &Vector, tol: f64) -> Result<bool> {
    check_dims(x.dim(), &[x1, x2, &t.x1s, &t.x2s, &t.xs])?;
    let r1 = x1 - x;
    let r2 = x2 - x;
    let n1 = r1.norm();
    let n2 = r2.norm();
    if n1 == 0.0 && n2 == 0.0 {
        return Err(Error::Argument("x1 = x2 = x".into()));
    }
    let s1 = t.x1s.norm();
    let s2 = t.x2s.norm();
    let ok = (&(&t.x1s + &t.x2s) + &t.xs).norm() <= tol
        && (s1 + s2 - 1.0).abs() <= tol
        && (t.x1s.dot(&r1) - s1 * n1).abs() <= tol * (1.0 + n1)
        && (t.x2s.dot(&r2) - s2 * n2).abs() <= tol * (1.0 + n2)
        && !(n1 < n2 - tol && s1 > tol)
        && !(n2 < n1 - tol && s2 > tol);
    Ok(ok)
}

/// One inequality of a check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs + slack − lhs`; negative means the link failed.
    pub margin: f64,
    pub pass: bool,
    /// False when the link does not apply to this pair.
    pub applicable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub links: Vec<CheckLink>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.links.iter().all(|l| l.pass || !l.applicable)
    }

    /// The applicable link with the smallest margin.
    pub fn worst(&self) -> Option<&CheckLink> {
        self.links.iter().filter(|l| l.applicable).min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn failures(&self) -> Vec<&CheckLink> {
        self.links.iter().filter(|l| l.applicable && !l.pass).collect()
    }
}

/// Link `lhs ≤ rhs + slack`.
pub fn link(name: &str, lhs: f64, rhs: f64, slack: f64) -> CheckLink {
    let margin = rhs + slack - lhs;
    CheckLink { name: name.into(), lhs, rhs, margin, pass: margin >= 0.0, applicable: true }
}

fn na_link(name: &str) -> CheckLink {
    CheckLink { name: name.into(), lhs: f64::NAN, rhs: f64::NAN, margin: f64::NAN, pass: true, applicable: false }
}

/// `1/(2/str′+1) ≤ str ≤ str′`.
pub fn sandwich_lower(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        1.0 / (2.0 / v + 1.0)
    }
}

#[allow(non_snake_case)]
pub fn check_P1_sandwich(str_value: f64, str_prime_value: f64, slack: f64) -> CheckReport {
    CheckReport {
        name: "str_sandwich".into(),
        links: vec![
            link("lower: 1/(2/str'+1) <= str", sandwich_lower(str_prime_value), str_value, slack),
            link("upper: str <= str'", str_value, str_prime_value, slack),
        ],
    }
}

/// The ordering `0 ≤ itr ≤ itr_w ≤ itr_c ≤ 1` and `str₁ ≤ str`, plus the
/// equalities `itr_w = itr_c = str` when both sets are convex. Pass `None`
/// for `itr_c` when it does not apply.
pub fn check_chain(
    itr: f64,
    itr_w: f64,
    itr_c: Option<f64>,
    str_value: f64,
    str1: f64,
    convex: bool,
    slack: f64,
) -> CheckReport {
    let mut links = vec![link("0 <= itr", 0.0, itr, 0.0), link("itr <= itr_w", itr, itr_w, slack)];
    match itr_c {
        Some(c) => {
            links.push(link("itr_w <= itr_c", itr_w, c, slack));
            links.push(link("itr_c <= 1", c, 1.0, slack));
        }
        None => {
            links.push(na_link("itr_w <= itr_c"));
            links.push(na_link("itr_c <= 1"));
        }
    }
    links.push(link("str1 <= str", str1, str_value, slack));
    if convex {
        match itr_c {
            Some(c) => {
                links.push(equality_link("itr_w = itr_c", itr_w, c, slack));
                links.push(equality_link("itr_c = str", c, str_value, slack));
            }
            None => links.push(na_link("itr_c = str")),
        }
    }
    CheckReport { name: "chain".into(), links }
}

fn equality_link(name: &str, lhs: f64, rhs: f64, slack: f64) -> CheckLink {
    let margin = slack - (lhs - rhs).abs();
    CheckLink { name: name.into(), lhs, rhs, margin, pass: margin >= 0.0, applicable: true }
}

#[derive(Clone, Debug, PartialEq)]
pub enum C00Verdict {
    TransversalCertifiedHeuristically,
    Violated { u: Vector },
}

/// Angular tolerance (radians) for opposite limiting normals.
pub const C00_ANGLE_TOL: f64 = 0.02;

/// Searches for `u ≠ 0` with `u` a limiting normal to `A` at x̄ and `−u`
/// one to `B`, using sampled normals from the two finest scales plus the
/// exact cones at x̄ of convex sets.
#[allow(non_snake_case)]
pub fn check_C00(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<C00Verdict> {
    check_pair(a, b, xbar, cfg)?;
    let k = cfg.radii.len();
    let fine = &cfg.radii[k.saturating_sub(2)..];
    let collect = |s: &SetRep, stream: u64| -> Result<(Vec<Vector>, Option<ConeRep>)> {
        let mut rng = sample_rng(cfg.seed, 100 + stream, 0, 0);
        let mut dirs: Vec<Vector> =
            limiting_normals(s, xbar, fine, cfg.samples_per_radius, &mut rng)?.into_iter().map(|n| n.direction).collect();
        let cone = if s.is_convex() { Some(normal_cone_at(s, xbar)?) } else { None };
        if let Some(c) = &cone {
            dirs.extend(c.extreme_directions());
        }
        Ok((dirs, cone))
    };
    let (da, ca) = collect(a, 0)?;
    let (db, cb) = collect(b, 1)?;
    let cos_tol = C00_ANGLE_TOL.cos();
    let sin_tol = C00_ANGLE_TOL.sin();
    for u in &da {
        if db.iter().any(|v| -u.dot(v) >= cos_tol) {
            return Ok(C00Verdict::Violated { u: u.clone() });
        }
        if let Some(c) = &cb {
            if c.distance(&-u) <= sin_tol {
                return Ok(C00Verdict::Violated { u: u.clone() });
            }
        }
    }
    if let Some(c) = &ca {
        for v in &db {
            if c.distance(&-v) <= sin_tol {
                return Ok(C00Verdict::Violated { u: -v });
            }
        }
    }
    Ok(C00Verdict::TransversalCertifiedHeuristically)
}
