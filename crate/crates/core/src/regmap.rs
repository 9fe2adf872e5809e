//! Set-valued mappings built from a pair of sets and back, with sampling
//! estimators of their (sub)regularity moduli.
//!
//! Three constructions are supported: the product mapping
//! `F(x) = (A−x)×(B−x)` with the max norm on X², the difference mapping
//! `G(x₁,x₂) = {x₁−x₂}` on `A×B` with the Euclidean norm on X², and a
//! mapping given by its graph together with the set pair `gph F`,
//! `X×{ȳ}`.

use rand::Rng;
use serde::Serialize;

use crate::constants::{
    estimate_str, estimate_tr, link, sandwich_lower, CheckLink, CheckReport, EstimatorConfig, RadiusRecord,
};
use crate::error::{Error, Result};
use crate::geometry::{check_dims, Vector};
use crate::projections::{intersect, SetRep, MEMBERSHIP_TOL};
use crate::sampling::{map_samples, radial_ball, uniform_ball};

const STREAM_SRG: u64 = 101;
const STREAM_RG: u64 = 102;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductNorm {
    Max,
    Euclid,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MappingRep {
    /// `x ↦ (A−x)×(B−x)` at `(x̄, 0)`.
    PairProduct { a: SetRep, b: SetRep },
    /// `(x₁,x₂) ↦ {x₁−x₂}` if `x₁ ∈ A`, `x₂ ∈ B`, else `∅`, at `((x̄,x̄), 0)`.
    Difference { a: SetRep, b: SetRep },
    /// The mapping whose graph is `gph ⊂ X×Y`, with `dim X = x_dim`.
    GraphPair { gph: SetRep, ybar: Vector, x_dim: usize },
}

impl MappingRep {
    pub fn pair_product(a: SetRep, b: SetRep) -> Result<Self> {
        same_dim(&a, &b)?;
        Ok(MappingRep::PairProduct { a, b })
    }

    pub fn difference(a: SetRep, b: SetRep) -> Result<Self> {
        same_dim(&a, &b)?;
        Ok(MappingRep::Difference { a, b })
    }

    pub fn graph_pair(gph: SetRep, ybar: Vector) -> Result<Self> {
        let m = ybar.dim();
        if m == 0 || m >= gph.dim() {
            return Err(Error::Argument(format!("range dimension {m} must lie in 1..{}", gph.dim())));
        }
        Ok(MappingRep::GraphPair { x_dim: gph.dim() - m, gph, ybar })
    }

    /// Graph pair of the linear map `x ↦ Mx` (rows of `M` given), at
    /// `ȳ = M x̄` for the given x̄.
    pub fn linear_map(rows: &[Vec<f64>], xbar: &Vector) -> Result<Self> {
        let n = xbar.dim();
        if rows.is_empty() || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Argument(format!("matrix rows must be nonempty with {n} columns")));
        }
        let m = rows.len();
        let apply = |x: &[f64]| -> Vec<f64> { rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect() };
        let spanning: Vec<Vector> = (0..n)
            .map(|j| {
                let mut c = vec![0.0; n + m];
                c[j] = 1.0;
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                c[n..].copy_from_slice(&apply(&e));
                Vector::from_slice(&c)
            })
            .collect();
        let gph = SetRep::affine(Vector::zeros(n + m), &spanning)?;
        MappingRep::graph_pair(gph, Vector::new(apply(xbar.coords()))?)
    }

    pub fn product_norm(&self) -> ProductNorm {
        match self {
            MappingRep::Difference { .. } => ProductNorm::Euclid,
            _ => ProductNorm::Max,
        }
    }

    pub fn domain_dim(&self) -> usize {
        match self {
            MappingRep::PairProduct { a, .. } => a.dim(),
            MappingRep::Difference { a, .. } => 2 * a.dim(),
            MappingRep::GraphPair { x_dim, .. } => *x_dim,
        }
    }

    pub fn range_dim(&self) -> usize {
        match self {
            MappingRep::PairProduct { a, .. } => 2 * a.dim(),
            MappingRep::Difference { a, .. } => a.dim(),
            MappingRep::GraphPair { ybar, .. } => ybar.dim(),
        }
    }

    /// The reference value ȳ (zero for the two pair constructions).
    pub fn ybar(&self) -> Vector {
        match self {
            MappingRep::GraphPair { ybar, .. } => ybar.clone(),
            _ => Vector::zeros(self.range_dim()),
        }
    }

    /// The sets `gph F` and `X×{ȳ}` of a graph pair.
    pub fn graph_sets(&self) -> Result<(SetRep, SetRep)> {
        let MappingRep::GraphPair { gph, ybar, x_dim } = self else {
            return Err(Error::Argument("graph sets exist only for graph pairs".into()));
        };
        let base = Vector::concat(&[&Vector::zeros(*x_dim), ybar]);
        let spanning: Vec<Vector> = (0..*x_dim).map(|j| Vector::basis(gph.dim(), j)).collect();
        Ok((gph.clone(), SetRep::affine(base, &spanning)?))
    }

    /// `d(y, F(x))`, `+∞` when `F(x)` is empty.
    pub fn value_distance(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dims(self.domain_dim(), &[x])?;
        check_dims(self.range_dim(), &[y])?;
        match self {
            MappingRep::PairProduct { a, b } => {
                let n = a.dim();
                let da = a.distance(&(x + &y.segment(0, n)))?;
                let db = b.distance(&(x + &y.segment(n, n)))?;
                Ok(da.max(db))
            }
            MappingRep::Difference { a, b } => {
                let n = a.dim();
                let (x1, x2) = (x.segment(0, n), x.segment(n, n));
                if !a.contains(&x1, MEMBERSHIP_TOL)? || !b.contains(&x2, MEMBERSHIP_TOL)? {
                    return Ok(f64::INFINITY);
                }
                Ok(y.dist(&(&x1 - &x2)))
            }
            MappingRep::GraphPair { gph, x_dim, .. } => {
                let m = y.dim();
                let base = Vector::concat(&[x, &Vector::zeros(m)]);
                let spanning: Vec<Vector> = (0..m).map(|j| Vector::basis(x_dim + m, x_dim + j)).collect();
                let fiber = SetRep::affine(base, &spanning)?;
                distance_to_meet(gph, &fiber, &Vector::concat(&[x, y]))
            }
        }
    }

    /// `d(x, F⁻¹(y))`, `+∞` when `F⁻¹(y)` is empty.
    pub fn inverse_distance(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dims(self.domain_dim(), &[x])?;
        check_dims(self.range_dim(), &[y])?;
        match self {
            MappingRep::PairProduct { a, b } => {
                let n = a.dim();
                let at = a.translate(&-&y.segment(0, n))?;
                let bt = b.translate(&-&y.segment(n, n))?;
                distance_to_meet(&at, &bt, x)
            }
            MappingRep::Difference { a, b } => {
                // F⁻¹(y) = {(c+y, c) : c ∈ B∩(A−y)}, and
                // ‖x₁−c−y‖² + ‖x₂−c‖² = 2‖c−m‖² + ‖x₁−x₂−y‖²/2.
                let n = a.dim();
                let (x1, x2) = (x.segment(0, n), x.segment(n, n));
                let at = a.translate(&-y)?;
                let mid = (&(&x1 - y) + &x2).scale(0.5);
                let dm = distance_to_meet(b, &at, &mid)?;
                if dm.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                let gap = (&(&x1 - &x2) - y).norm();
                Ok((2.0 * dm * dm + 0.5 * gap * gap).sqrt())
            }
            MappingRep::GraphPair { gph, x_dim, .. } => {
                let m = y.dim();
                let base = Vector::concat(&[&Vector::zeros(*x_dim), y]);
                let spanning: Vec<Vector> = (0..*x_dim).map(|j| Vector::basis(x_dim + m, j)).collect();
                let level = SetRep::affine(base, &spanning)?;
                distance_to_meet(gph, &level, &Vector::concat(&[x, y]))
            }
        }
    }

    /// Checks `(point, ȳ) ∈ gph F`.
    fn check_point(&self, point: &Vector, tol: f64) -> Result<()> {
        check_dims(self.domain_dim(), &[point])?;
        let d = self.value_distance(point, &self.ybar())?;
        if d > tol {
            return Err(Error::Membership { distance: d });
        }
        Ok(())
    }

    /// A domain point within `radius` of `point`. Difference mappings only
    /// sample `A×B`, where `G` is nonempty; every other such sample
    /// projects one point onto both sets.
    fn sample_domain<R: Rng + ?Sized>(&self, rng: &mut R, point: &Vector, radius: f64, i: usize) -> Vector {
        match self {
            MappingRep::Difference { a, b } => {
                let n = a.dim();
                let (p1, p2) = (point.segment(0, n), point.segment(n, n));
                let u1 = radial_ball(rng, &p1, radius / 2.0);
                let u2 = if i % 2 == 1 { &(&u1 - &p1) + &p2 } else { radial_ball(rng, &p2, radius / 2.0) };
                Vector::concat(&[&a.nearest(&u1).0, &b.nearest(&u2).0])
            }
            _ if i % 2 == 1 => radial_ball(rng, point, radius),
            _ => uniform_ball(rng, point, radius),
        }
    }

    /// A range point within `radius` of ȳ in the product norm.
    fn sample_range<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> Vector {
        match self {
            MappingRep::PairProduct { a, .. } => {
                let z = Vector::zeros(a.dim());
                Vector::concat(&[&uniform_ball(rng, &z, radius), &uniform_ball(rng, &z, radius)])
            }
            _ => uniform_ball(rng, &self.ybar(), radius),
        }
    }

    fn domain_norm(&self, v: &Vector) -> f64 {
        match self {
            MappingRep::PairProduct { .. } | MappingRep::GraphPair { .. } => v.norm(),
            MappingRep::Difference { a, .. } => {
                let n = a.dim();
                v.segment(0, n).norm().hypot(v.segment(n, n).norm())
            }
        }
    }
}

fn same_dim(a: &SetRep, b: &SetRep) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

fn distance_to_meet(a: &SetRep, b: &SetRep, x: &Vector) -> Result<f64> {
    match intersect(a, b) {
        Ok(inter) => inter.distance(x),
        Err(Error::EmptyIntersection) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityKind {
    Rg,
    Srg,
}

impl RegularityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegularityKind::Rg => "rg",
            RegularityKind::Srg => "srg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityEstimate {
    pub kind: RegularityKind,
    /// `+∞` when no sample at the finest radius was admissible.
    pub value: f64,
    pub per_radius: Vec<RadiusRecord>,
    /// True when `value` comes from the empty-infimum convention.
    pub convention: bool,
}

/// `d(y,F(x)) / d(x,F⁻¹(y))`, or `None` where the inequality is vacuous.
fn regularity_ratio(num: f64, den: f64, excl: f64) -> Option<f64> {
    if den <= excl || num.is_infinite() {
        None
    } else if den.is_infinite() {
        Some(0.0)
    } else {
        Some(num / den)
    }
}

fn scan_regularity<F>(kind: RegularityKind, stream: u64, cfg: &EstimatorConfig, f: F) -> RegularityEstimate
where
    F: Fn(f64, usize, &mut rand_chacha::ChaCha8Rng) -> Option<f64> + Sync,
{
    let per_radius: Vec<RadiusRecord> = cfg
        .radii
        .iter()
        .enumerate()
        .map(|(k, &radius)| {
            let vals = map_samples(cfg.samples_per_radius, cfg.seed, stream, k, |i, rng| f(radius, i, rng));
            let admissible: Vec<f64> = vals.into_iter().flatten().collect();
            RadiusRecord {
                radius,
                inf_value: admissible.iter().copied().fold(f64::INFINITY, f64::min),
                n_admissible: admissible.len(),
            }
        })
        .collect();
    let last = per_radius.last().expect("validated config has radii");
    let convention = last.n_admissible == 0;
    RegularityEstimate { kind, value: last.inf_value, per_radius, convention }
}

/// Subregularity modulus at `(point, ȳ)`: `inf d(ȳ,F(x)) / d(x,F⁻¹(ȳ))`
/// over samples near `point`.
pub fn estimate_srg(m: &MappingRep, point: &Vector, cfg: &EstimatorConfig) -> Result<RegularityEstimate> {
    cfg.validate()?;
    m.check_point(point, cfg.membership_tol)?;
    let ybar = m.ybar();
    Ok(scan_regularity(RegularityKind::Srg, STREAM_SRG, cfg, |radius, i, rng| {
        let x = m.sample_domain(rng, point, radius, i);
        if m.domain_norm(&(&x - point)) > radius {
            return None;
        }
        let num = m.value_distance(&x, &ybar).ok()?;
        let den = m.inverse_distance(&x, &ybar).ok()?;
        regularity_ratio(num, den, cfg.exclusion_tol)
    }))
}

/// Regularity modulus at `(point, ȳ)`: as [`estimate_srg`] with `y` also
/// perturbed on the same radius schedule. Every fourth sample keeps `y = ȳ`.
pub fn estimate_rg(m: &MappingRep, point: &Vector, cfg: &EstimatorConfig) -> Result<RegularityEstimate> {
    cfg.validate()?;
    m.check_point(point, cfg.membership_tol)?;
    let ybar = m.ybar();
    Ok(scan_regularity(RegularityKind::Rg, STREAM_RG, cfg, |radius, i, rng| {
        let x = m.sample_domain(rng, point, radius, i);
        if m.domain_norm(&(&x - point)) > radius {
            return None;
        }
        let y = if i % 4 == 0 { ybar.clone() } else { m.sample_range(rng, radius) };
        let num = m.value_distance(&x, &y).ok()?;
        let den = m.inverse_distance(&x, &y).ok()?;
        regularity_ratio(num, den, cfg.exclusion_tol)
    }))
}

fn capped(v: f64) -> f64 {
    v.min(1.0)
}

fn equality(name: &str, lhs: f64, rhs: f64, slack: f64) -> CheckLink {
    let margin = slack - (lhs - rhs).abs();
    CheckLink { name: name.into(), lhs, rhs, margin, pass: margin >= 0.0, applicable: true }
}

/// `tr = rg[F]` and `str = srg[F]` for the product mapping. Moduli above 1
/// (including the empty-infimum `+∞`) are compared as 1, the largest value
/// the set constants take.
#[allow(non_snake_case)]
pub fn check_P2(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<CheckReport> {
    let m = MappingRep::pair_product(a.clone(), b.clone())?;
    let tr = estimate_tr(a, b, xbar, cfg)?.value;
    let st = estimate_str(a, b, xbar, cfg)?.value;
    let rg = estimate_rg(&m, xbar, cfg)?.value;
    let srg = estimate_srg(&m, xbar, cfg)?.value;
    Ok(mapping_equalities(tr, st, rg, srg, cfg.slack))
}

/// The report of [`check_P2`] from precomputed values.
pub fn mapping_equalities(tr: f64, str_value: f64, rg: f64, srg: f64, slack: f64) -> CheckReport {
    CheckReport {
        name: "mapping_equalities".into(),
        links: vec![
            equality("tr = rg[F]", tr, capped(rg), slack),
            equality("str = srg[F]", str_value, capped(srg), slack),
        ],
    }
}

/// `min{v/2, 1}`
fn graph_upper(v: f64) -> f64 {
    (v / 2.0).min(1.0)
}

/// `1/√(2v⁻²−1)`, infinite when `v ≥ √2` up to round-off.
fn difference_upper(v: f64) -> f64 {
    let t = 2.0 / (v * v) - 1.0;
    if t <= 1e-12 {
        f64::INFINITY
    } else {
        1.0 / t.sqrt()
    }
}

fn sandwich_links(tag: &str, moduli: [f64; 2], values: [f64; 2], upper: fn(f64) -> f64, slack: f64) -> Vec<CheckLink> {
    let mut out = Vec::new();
    for ((m, c), (mname, cname)) in moduli.into_iter().zip(values).zip([("rg", "tr"), ("srg", "str")]) {
        out.push(link(&format!("{tag} lower: 1/(2/{mname}+1) <= {cname}"), sandwich_lower(m), c, slack));
        out.push(link(&format!("{tag} upper: {cname} <= bound({mname})"), c, upper(m), slack));
    }
    out
}

/// Sandwich bounds between the moduli of a mapping and the constants of
/// its graph pair `gph F`, `X×{ȳ}` at `(x̄, ȳ)`.
#[allow(non_snake_case)]
pub fn check_P3(m: &MappingRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<CheckReport> {
    let (ga, gb) = m.graph_sets()?;
    let z = Vector::concat(&[xbar, &m.ybar()]);
    let tr = estimate_tr(&ga, &gb, &z, cfg)?.value;
    let st = estimate_str(&ga, &gb, &z, cfg)?.value;
    let rg = estimate_rg(m, xbar, cfg)?.value;
    let srg = estimate_srg(m, xbar, cfg)?.value;
    Ok(graph_sandwich(tr, st, rg, srg, cfg.slack))
}

/// The report of [`check_P3`] from precomputed values.
pub fn graph_sandwich(tr: f64, str_value: f64, rg: f64, srg: f64, slack: f64) -> CheckReport {
    CheckReport { name: "graph_sandwich".into(), links: sandwich_links("graph", [rg, srg], [tr, str_value], graph_upper, slack) }
}

/// Sandwich bounds between the moduli of the difference mapping at
/// `((x̄,x̄), 0)` and `tr`, `str` at x̄.
#[allow(non_snake_case)]
pub fn check_P2plus(a: &SetRep, b: &SetRep, xbar: &Vector, cfg: &EstimatorConfig) -> Result<CheckReport> {
    let m = MappingRep::difference(a.clone(), b.clone())?;
    let p = Vector::concat(&[xbar, xbar]);
    let tr = estimate_tr(a, b, xbar, cfg)?.value;
    let st = estimate_str(a, b, xbar, cfg)?.value;
    let rg = estimate_rg(&m, &p, cfg)?.value;
    let srg = estimate_srg(&m, &p, cfg)?.value;
    Ok(difference_sandwich(tr, st, rg, srg, cfg.slack))
}

/// The report of [`check_P2plus`] from precomputed values.
pub fn difference_sandwich(tr: f64, str_value: f64, rg: f64, srg: f64, slack: f64) -> CheckReport {
    CheckReport {
        name: "difference_sandwich".into(),
        links: sandwich_links("difference", [rg, srg], [tr, str_value], difference_upper, slack),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::geometric_radii;
    use crate::sampling::sample_rng;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    fn line(d: &[f64]) -> SetRep {
        SetRep::line(Vector::zeros(d.len()), v(d)).unwrap()
    }

    fn cfg() -> EstimatorConfig {
        EstimatorConfig { radii: geometric_radii(0.5, 8), samples_per_radius: 400, ..Default::default() }
    }

    #[test]
    fn pair_product_identity() {
        let (a, b) = (line(&[1.0, 0.0]), SetRep::ball(v(&[1.0, 1.0]), 1.0).unwrap());
        let m = MappingRep::pair_product(a.clone(), b.clone()).unwrap();
        let mut rng = sample_rng(3, 0, 0, 0);
        for _ in 0..200 {
            let x = uniform_ball(&mut rng, &v(&[0.0, 0.0]), 3.0);
            let want = a.distance(&x).unwrap().max(b.distance(&x).unwrap());
            let got = m.value_distance(&x, &Vector::zeros(4)).unwrap();
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn difference_identity() {
        let (a, b) = (line(&[1.0, 0.0]), line(&[0.0, 1.0]));
        let m = MappingRep::difference(a, b).unwrap();
        let x = v(&[2.0, 0.0, 0.0, -1.0]);
        assert!((m.value_distance(&x, &v(&[0.0, 0.0])).unwrap() - 5f64.sqrt()).abs() < 1e-12);
        let off = v(&[2.0, 1.0, 0.0, -1.0]);
        assert_eq!(m.value_distance(&off, &v(&[0.0, 0.0])).unwrap(), f64::INFINITY);
        // G⁻¹(0) is {(0,0)}: the distance is the full Euclidean norm.
        assert!((m.inverse_distance(&x, &v(&[0.0, 0.0])).unwrap() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_lines_product() {
        let (a, b) = (line(&[1.0, 0.0]), line(&[0.0, 1.0]));
        let m = MappingRep::pair_product(a.clone(), b.clone()).unwrap();
        let c = cfg();
        let srg = estimate_srg(&m, &v(&[0.0, 0.0]), &c).unwrap();
        let rg = estimate_rg(&m, &v(&[0.0, 0.0]), &c).unwrap();
        assert!((srg.value - 0.5f64.sqrt()).abs() < 0.02, "{srg:?}");
        assert!((rg.value - 0.5f64.sqrt()).abs() < 0.02, "{rg:?}");
        assert!(check_P2(&a, &b, &v(&[0.0, 0.0]), &c).unwrap().passed());
    }

    #[test]
    fn equal_lines_product() {
        let a = line(&[1.0, 0.0]);
        let m = MappingRep::pair_product(a.clone(), a.clone()).unwrap();
        let c = cfg();
        let srg = estimate_srg(&m, &v(&[0.0, 0.0]), &c).unwrap();
        assert!((srg.value - 1.0).abs() < 1e-9);
        let rg = estimate_rg(&m, &v(&[0.0, 0.0]), &c).unwrap();
        assert!(rg.value <= 0.05);
        let r = check_P2(&a, &a, &v(&[0.0, 0.0]), &c).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn linear_graphs() {
        let c = cfg();
        let x0 = v(&[0.0]);
        let id = MappingRep::linear_map(&[vec![1.0]], &x0).unwrap();
        assert!((estimate_rg(&id, &x0, &c).unwrap().value - 1.0).abs() < 1e-9);
        let r = check_P3(&id, &x0, &c).unwrap();
        assert!(r.passed(), "{r:?}");
        let (ga, gb) = id.graph_sets().unwrap();
        let tr = estimate_tr(&ga, &gb, &v(&[0.0, 0.0]), &c).unwrap().value;
        assert!((1.0 / 3.0..=0.5).contains(&tr), "{tr}");

        let twice = MappingRep::linear_map(&[vec![2.0]], &x0).unwrap();
        assert!((estimate_rg(&twice, &x0, &c).unwrap().value - 2.0).abs() < 1e-9);
        assert!(check_P3(&twice, &x0, &c).unwrap().passed());

        let zero = MappingRep::linear_map(&[vec![0.0]], &x0).unwrap();
        let srg = estimate_srg(&zero, &x0, &c).unwrap();
        assert!(srg.convention && srg.value.is_infinite());
        assert_eq!(estimate_rg(&zero, &x0, &c).unwrap().value, 0.0);
        let r = check_P3(&zero, &x0, &c).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn difference_sandwiches() {
        let c = cfg();
        let o = v(&[0.0, 0.0]);
        let (x, y) = (line(&[1.0, 0.0]), line(&[0.0, 1.0]));
        let r = check_P2plus(&x, &y, &o, &c).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = check_P2plus(&x, &x, &o, &c).unwrap();
        assert!(r.passed(), "{r:?}");
        let m = MappingRep::difference(x.clone(), x.clone()).unwrap();
        let srg = estimate_srg(&m, &v(&[0.0; 4]), &c).unwrap();
        assert!((srg.value - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn point_must_lie_on_graph() {
        let m = MappingRep::pair_product(line(&[1.0, 0.0]), line(&[0.0, 1.0])).unwrap();
        assert!(matches!(estimate_srg(&m, &v(&[1.0, 0.0]), &cfg()), Err(Error::Membership { .. })));
    }

    #[test]
    fn bounds() {
        assert_eq!(difference_upper(2f64.sqrt()), f64::INFINITY);
        assert!((difference_upper(1.0) - 1.0).abs() < 1e-12);
        assert_eq!(difference_upper(0.0), 0.0);
        assert_eq!(graph_upper(f64::INFINITY), 1.0);
        assert_eq!(sandwich_lower(f64::INFINITY), 1.0);
    }
}
