//! Metric projections onto the supported closed sets and onto pairwise
//! intersections.

use itertools::Itertools;
use log::trace;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{check_dims, null_space, orthogonal_complement, orthonormalize, Vector, MAX_DIM};

pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Minimizers of a union within this distance of the best one are all reported.
pub const TIE_TOL: f64 = 1e-9;
pub const MAX_POLYHEDRON_ROWS: usize = 12;
pub const DYKSTRA_MAX_ITER: usize = 10_000;
pub const DYKSTRA_TOL: f64 = 1e-10;

const KKT_TOL: f64 = 1e-10;
const EMPTY_GAP: f64 = 1e-6;

/// `⟨normal, x⟩ ≤ offset` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    /// Normalizes the row. Returns `None` for a zero normal.
    pub fn new(normal: Vector, offset: f64) -> Option<Self> {
        let len = normal.norm();
        if len <= 1e-14 || !offset.is_finite() {
            return None;
        }
        Some(Halfspace { normal: normal.scale(1.0 / len), offset: offset / len })
    }

    /// Signed violation `⟨normal, x⟩ − offset`.
    pub fn violation(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// A closed subset of ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub enum SetRep {
    /// `base + span(basis)`, basis orthonormal. An empty basis is a singleton.
    AffineSubspace { base: Vector, basis: Vec<Vector> },
    /// Intersection of halfspaces, with a point certifying nonemptiness.
    Polyhedron { rows: Vec<Halfspace>, witness: Vector },
    Ball { center: Vector, radius: f64 },
    /// Convex hull of the vertices.
    Polytope { vertices: Vec<Vector> },
    /// Union of convex pieces.
    FiniteUnion { pieces: Vec<SetRep> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub nearest: Vec<Vector>,
    pub dist: f64,
}

fn check_ambient(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidSet(format!("ambient dimension {n} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

impl SetRep {
    /// `base + span(spanning)`; the spanning vectors are orthonormalized.
    pub fn affine(base: Vector, spanning: &[Vector]) -> Result<Self> {
        check_ambient(base.dim())?;
        check_dims(base.dim(), &spanning.iter().collect::<Vec<_>>())?;
        if !base.is_finite() || spanning.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SetRep::AffineSubspace { base, basis: orthonormalize(spanning, 1e-10) })
    }

    pub fn point(p: Vector) -> Result<Self> {
        SetRep::affine(p, &[])
    }

    /// The line through `point` with the given direction.
    pub fn line(point: Vector, direction: Vector) -> Result<Self> {
        if direction.norm() <= 1e-14 {
            return Err(Error::InvalidSet("line direction is zero".into()));
        }
        SetRep::affine(point, &[direction])
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        SetRep::polyhedron(vec![(normal, offset)])
    }

    /// `{x : ⟨nᵢ, x⟩ ≤ bᵢ}`. Fails with `EmptyPolyhedron` if infeasible.
    pub fn polyhedron(rows: Vec<(Vector, f64)>) -> Result<Self> {
        let n = match rows.first() {
            Some((v, _)) => v.dim(),
            None => return Err(Error::InvalidSet("polyhedron needs at least one row".into())),
        };
        check_ambient(n)?;
        let mut out = Vec::with_capacity(rows.len());
        for (normal, offset) in rows {
            check_dims(n, &[&normal])?;
            if !normal.is_finite() || !offset.is_finite() {
                return Err(Error::NonFinite);
            }
            match Halfspace::new(normal, offset) {
                Some(h) => out.push(h),
                None if offset >= 0.0 => {}
                None => return Err(Error::EmptyPolyhedron),
            }
        }
        polyhedron_from_rows(out, n)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        check_ambient(center.dim())?;
        if !center.is_finite() || !radius.is_finite() {
            return Err(Error::NonFinite);
        }
        if radius <= 0.0 {
            return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
        }
        Ok(SetRep::Ball { center, radius })
    }

    pub fn polytope(vertices: Vec<Vector>) -> Result<Self> {
        let n = match vertices.first() {
            Some(v) => v.dim(),
            None => return Err(Error::InvalidSet("polytope needs at least one vertex".into())),
        };
        check_ambient(n)?;
        check_dims(n, &vertices.iter().collect::<Vec<_>>())?;
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SetRep::Polytope { vertices })
    }

    /// Union of convex pieces. Nested unions are flattened.
    pub fn union(pieces: Vec<SetRep>) -> Result<Self> {
        let mut flat = Vec::new();
        for p in pieces {
            match p {
                SetRep::FiniteUnion { pieces } => flat.extend(pieces),
                other => flat.push(other),
            }
        }
        let n = match flat.first() {
            Some(p) => p.dim(),
            None => return Err(Error::InvalidSet("union needs at least one piece".into())),
        };
        for p in &flat {
            if p.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
            }
        }
        Ok(SetRep::FiniteUnion { pieces: flat })
    }

    /// Checks the representation invariants of a directly built value.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        check_ambient(n)?;
        match self {
            SetRep::AffineSubspace { base, basis } => {
                check_dims(n, &basis.iter().collect::<Vec<_>>())?;
                if !base.is_finite() || basis.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite);
                }
                for (i, u) in basis.iter().enumerate() {
                    for (j, v) in basis.iter().enumerate() {
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (u.dot(v) - target).abs() > 1e-10 {
                            return Err(Error::InvalidSet("affine basis is not orthonormal".into()));
                        }
                    }
                }
            }
            SetRep::Polyhedron { rows, witness } => {
                if rows.is_empty() || rows.len() > MAX_POLYHEDRON_ROWS {
                    return Err(Error::InvalidSet(format!("polyhedron must have 1..={MAX_POLYHEDRON_ROWS} rows")));
                }
                check_dims(n, &rows.iter().map(|r| &r.normal).collect::<Vec<_>>())?;
                if rows.iter().any(|r| (r.normal.norm() - 1.0).abs() > 1e-10) {
                    return Err(Error::InvalidSet("polyhedron normals must be unit".into()));
                }
                if rows.iter().any(|r| r.violation(witness) > MEMBERSHIP_TOL) {
                    return Err(Error::EmptyPolyhedron);
                }
            }
            SetRep::Ball { center, radius } => {
                if !center.is_finite() || !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidSet("ball needs finite center and positive radius".into()));
                }
            }
            SetRep::Polytope { vertices } => {
                if vertices.is_empty() {
                    return Err(Error::InvalidSet("polytope needs at least one vertex".into()));
                }
                check_dims(n, &vertices.iter().collect::<Vec<_>>())?;
            }
            SetRep::FiniteUnion { pieces } => {
                if pieces.is_empty() {
                    return Err(Error::InvalidSet("union needs at least one piece".into()));
                }
                for p in pieces {
                    if !p.is_convex() {
                        return Err(Error::InvalidSet("union pieces must be convex".into()));
                    }
                    if p.dim() != n {
                        return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
                    }
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            SetRep::AffineSubspace { base, .. } => base.dim(),
            SetRep::Polyhedron { witness, .. } => witness.dim(),
            SetRep::Ball { center, .. } => center.dim(),
            SetRep::Polytope { vertices } => vertices[0].dim(),
            SetRep::FiniteUnion { pieces } => pieces[0].dim(),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            SetRep::FiniteUnion { pieces } => pieces.len() == 1,
            _ => true,
        }
    }

    /// Convex pieces: the set itself unless it is a union.
    pub fn pieces(&self) -> &[SetRep] {
        match self {
            SetRep::FiniteUnion { pieces } => pieces,
            other => std::slice::from_ref(other),
        }
    }

    /// Some point of the set.
    pub fn anchor(&self) -> Vector {
        match self {
            SetRep::AffineSubspace { base, .. } => base.clone(),
            SetRep::Polyhedron { witness, .. } => witness.clone(),
            SetRep::Ball { center, .. } => center.clone(),
            SetRep::Polytope { vertices } => vertices[0].clone(),
            SetRep::FiniteUnion { pieces } => pieces[0].anchor(),
        }
    }

    pub fn project(&self, x: &Vector) -> Result<ProjectionResult> {
        check_dims(self.dim(), &[x])?;
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(match self {
            SetRep::FiniteUnion { pieces } => {
                let cands: Vec<(Vector, f64)> = pieces.iter().map(|p| p.nearest(x)).collect();
                let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
                let mut nearest: Vec<Vector> = Vec::new();
                for (p, d) in cands {
                    if d <= best + TIE_TOL && !nearest.iter().any(|q| q.dist(&p) <= 1e-12) {
                        nearest.push(p);
                    }
                }
                ProjectionResult { nearest, dist: best }
            }
            convex => {
                let (p, d) = convex.nearest(x);
                ProjectionResult { nearest: vec![p], dist: d }
            }
        })
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        check_dims(self.dim(), &[x])?;
        Ok(self.nearest(x).1)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// First nearest point and the distance, without dimension checks.
    pub(crate) fn nearest(&self, x: &Vector) -> (Vector, f64) {
        let p = match self {
            SetRep::AffineSubspace { base, basis } => {
                let rel = x - base;
                let mut p = base.clone();
                for q in basis {
                    p += &(q * rel.dot(q));
                }
                p
            }
            SetRep::Polyhedron { rows, .. } => match polyhedron_projection(rows, x) {
                Some(p) => p,
                // unreachable for a validated polyhedron; fall back to the best effort point
                None => dykstra_polyhedron(rows, x),
            },
            SetRep::Ball { center, radius } => {
                let rel = x - center;
                let r = rel.norm();
                if r <= *radius {
                    x.clone()
                } else {
                    center + &rel.scale(radius / r)
                }
            }
            SetRep::Polytope { vertices } => polytope_projection(vertices, x),
            SetRep::FiniteUnion { pieces } => {
                let mut best: Option<(Vector, f64)> = None;
                for piece in pieces {
                    let (p, d) = piece.nearest(x);
                    if best.as_ref().is_none_or(|b| d < b.1) {
                        best = Some((p, d));
                    }
                }
                return best.expect("nonempty union");
            }
        };
        let d = x.dist(&p);
        (p, d)
    }

    /// The set `{s + shift : s ∈ S}`.
    pub fn translate(&self, shift: &Vector) -> Result<SetRep> {
        check_dims(self.dim(), &[shift])?;
        Ok(match self {
            SetRep::AffineSubspace { base, basis } => {
                SetRep::AffineSubspace { base: base + shift, basis: basis.clone() }
            }
            SetRep::Polyhedron { rows, witness } => SetRep::Polyhedron {
                rows: rows
                    .iter()
                    .map(|r| Halfspace { normal: r.normal.clone(), offset: r.offset + r.normal.dot(shift) })
                    .collect(),
                witness: witness + shift,
            },
            SetRep::Ball { center, radius } => SetRep::Ball { center: center + shift, radius: *radius },
            SetRep::Polytope { vertices } => {
                SetRep::Polytope { vertices: vertices.iter().map(|v| v + shift).collect() }
            }
            SetRep::FiniteUnion { pieces } => SetRep::FiniteUnion {
                pieces: pieces.iter().map(|p| p.translate(shift)).collect::<Result<_>>()?,
            },
        })
    }

    /// Halfspace description of a convex piece, when one is cheap to get.
    pub fn halfspaces(&self) -> Option<Vec<Halfspace>> {
        match self {
            SetRep::AffineSubspace { base, basis } => {
                let comp = orthogonal_complement(basis, base.dim());
                let mut rows = Vec::with_capacity(2 * comp.len());
                for w in comp {
                    let off = w.dot(base);
                    rows.push(Halfspace { normal: w.clone(), offset: off });
                    rows.push(Halfspace { normal: -w, offset: -off });
                }
                Some(rows)
            }
            SetRep::Polyhedron { rows, .. } => Some(rows.clone()),
            SetRep::Polytope { vertices } => {
                let hull = polytope_hull(vertices);
                let mut rows = hull.facets?;
                for w in hull.complement {
                    let off = w.dot(&hull.base);
                    rows.push(Halfspace { normal: w.clone(), offset: off });
                    rows.push(Halfspace { normal: -w, offset: -off });
                }
                Some(rows)
            }
            SetRep::Ball { .. } | SetRep::FiniteUnion { .. } => None,
        }
    }

    /// Index of a convex piece containing `a`, if any.
    pub fn piece_containing(&self, a: &Vector, tol: f64) -> Option<usize> {
        self.pieces().iter().position(|p| p.nearest(a).1 <= tol)
    }
}

fn polyhedron_from_rows(rows: Vec<Halfspace>, n: usize) -> Result<SetRep> {
    if rows.len() > MAX_POLYHEDRON_ROWS {
        return Err(Error::InvalidSet(format!(
            "polyhedron has {} rows, at most {MAX_POLYHEDRON_ROWS} supported",
            rows.len()
        )));
    }
    if rows.is_empty() {
        // the whole space
        return SetRep::affine(Vector::zeros(n), &(0..n).map(|i| Vector::basis(n, i)).collect::<Vec<_>>());
    }
    match polyhedron_projection(&rows, &Vector::zeros(n)) {
        Some(witness) => Ok(SetRep::Polyhedron { rows, witness }),
        None => Err(Error::EmptyPolyhedron),
    }
}

pub fn project(s: &SetRep, x: &Vector) -> Result<ProjectionResult> {
    s.project(x)
}

pub fn distance(s: &SetRep, x: &Vector) -> Result<f64> {
    s.distance(x)
}

/// Projection onto a polyhedron by enumerating active-row subsets.
pub fn project_polyhedron_exact(p: &SetRep, x: &Vector) -> Result<ProjectionResult> {
    match p {
        SetRep::Polyhedron { rows, .. } => {
            check_dims(p.dim(), &[x])?;
            let q = polyhedron_projection(rows, x).ok_or(Error::EmptyPolyhedron)?;
            let d = x.dist(&q);
            Ok(ProjectionResult { nearest: vec![q], dist: d })
        }
        _ => Err(Error::Argument("project_polyhedron_exact needs a polyhedron".into())),
    }
}

/// Exact projection onto `{⟨nᵢ,y⟩ ≤ bᵢ}` (unit normals). `None` when no
/// KKT point exists, which means the rows are infeasible.
pub(crate) fn polyhedron_projection(rows: &[Halfspace], x: &Vector) -> Option<Vector> {
    let feasible = |p: &Vector| rows.iter().all(|r| r.violation(p) <= MEMBERSHIP_TOL);
    if feasible(x) {
        return Some(x.clone());
    }
    // single violated row
    for r in rows {
        let v = r.violation(x);
        if v > 0.0 {
            let p = x - &r.normal.scale(v);
            if feasible(&p) {
                return Some(p);
            }
        }
    }
    let n = x.dim();
    let m = rows.len();
    for k in 2..=m.min(n) {
        let mut best: Option<(Vector, f64)> = None;
        for subset in (0..m).combinations(k) {
            let a = DMatrix::from_fn(k, n, |i, j| rows[subset[i]].normal[j]);
            let r = DVector::from_fn(k, |i, _| rows[subset[i]].violation(x));
            let g = &a * a.transpose();
            let chol = match g.cholesky() {
                Some(c) => c,
                None => {
                    trace!("skipping singular active set {subset:?}");
                    continue;
                }
            };
            if chol.l_dirty().diagonal().min() <= 1e-7 {
                trace!("skipping ill-conditioned active set {subset:?}");
                continue;
            }
            let lambda = chol.solve(&r);
            if lambda.iter().any(|&l| l < -KKT_TOL) {
                continue;
            }
            let p = Vector::from_dvector(x.as_dvector() - a.transpose() * lambda);
            if !feasible(&p) {
                continue;
            }
            let d = x.dist(&p);
            if best.as_ref().is_none_or(|b| d < b.1) {
                best = Some((p, d));
            }
        }
        if let Some((p, _)) = best {
            return Some(p);
        }
    }
    None
}

fn dykstra_polyhedron(rows: &[Halfspace], x: &Vector) -> Vector {
    let mut y = x.clone();
    let mut incr: Vec<Vector> = vec![Vector::zeros(x.dim()); rows.len()];
    for _ in 0..DYKSTRA_MAX_ITER {
        let prev = y.clone();
        for (r, e) in rows.iter().zip(incr.iter_mut()) {
            let z = &y + e;
            let v = r.violation(&z);
            let p = if v > 0.0 { &z - &r.normal.scale(v) } else { z.clone() };
            *e = &z - &p;
            y = p;
        }
        if y.dist(&prev) <= DYKSTRA_TOL {
            break;
        }
    }
    y
}

/// Nearest point of `conv(vertices)` to `x` via Wolfe's minimum-norm-point
/// method applied to the shifted vertices.
pub(crate) fn polytope_projection(vertices: &[Vector], x: &Vector) -> Vector {
    let pts: Vec<DVector<f64>> = vertices.iter().map(|v| v.as_dvector() - x.as_dvector()).collect();
    let w = wolfe_min_norm(&pts);
    Vector::from_dvector(x.as_dvector() + w)
}

fn affine_min_norm(s: &[usize], pts: &[DVector<f64>]) -> Option<Vec<f64>> {
    let k = s.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = pts[s[i]].dot(&pts[s[j]]);
        }
        m[(i, k)] = 1.0;
        m[(k, i)] = 1.0;
    }
    rhs[k] = 1.0;
    let sol = match m.clone().lu().solve(&rhs) {
        Some(sol) if sol.iter().all(|v| v.is_finite()) => sol,
        _ => m.svd(true, true).solve(&rhs, 1e-14).ok()?,
    };
    Some(sol.iter().take(k).copied().collect())
}

fn wolfe_min_norm(pts: &[DVector<f64>]) -> DVector<f64> {
    let m = pts.len();
    let scale = pts.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-13 * scale;
    let start = (0..m)
        .min_by(|&i, &j| pts[i].norm_squared().total_cmp(&pts[j].norm_squared()))
        .expect("nonempty");
    let mut s = vec![start];
    let mut lam = vec![1.0];
    let mut w = pts[start].clone();
    for _ in 0..(20 * m + 50) {
        let (j, wj) = (0..m)
            .map(|j| (j, w.dot(&pts[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if w.norm_squared() - wj <= tol || s.contains(&j) {
            break;
        }
        s.push(j);
        lam.push(0.0);
        loop {
            let alpha = match affine_min_norm(&s, pts) {
                Some(a) => a,
                None => break,
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                lam = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for i in 0..s.len() {
                if alpha[i] <= 1e-14 {
                    let d = lam[i] - alpha[i];
                    if d > 0.0 {
                        theta = theta.min(lam[i] / d);
                    }
                }
            }
            for i in 0..s.len() {
                lam[i] = theta * alpha[i] + (1.0 - theta) * lam[i];
            }
            let mut i = 0;
            while i < s.len() {
                if lam[i] <= 1e-14 {
                    s.remove(i);
                    lam.remove(i);
                } else {
                    i += 1;
                }
            }
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= total);
            if s.len() == 1 {
                break;
            }
        }
        w = s.iter().zip(&lam).fold(DVector::zeros(pts[0].len()), |acc, (&i, &l)| acc + &pts[i] * l);
    }
    w
}

/// Affine hull and, for hulls of dimension ≤ 3, facet rows of a polytope.
pub(crate) struct PolytopeHull {
    pub base: Vector,
    pub complement: Vec<Vector>,
    /// Facets within the affine hull, as ambient halfspaces whose normals
    /// are orthogonal to the complement.
    pub facets: Option<Vec<Halfspace>>,
}

pub(crate) fn polytope_hull(vertices: &[Vector]) -> PolytopeHull {
    let n = vertices[0].dim();
    let base = vertices[0].clone();
    let diffs: Vec<Vector> = vertices.iter().skip(1).map(|v| v - &base).collect();
    let scale = diffs.iter().map(|d| d.norm()).fold(1.0, f64::max);
    let directions = orthonormalize(&diffs, 1e-9 * scale);
    let complement = orthogonal_complement(&directions, n);
    let k = directions.len();
    let facets = if k > 3 {
        None
    } else if k == 0 {
        Some(Vec::new())
    } else {
        let coords: Vec<DVector<f64>> = vertices
            .iter()
            .map(|v| {
                let rel = v - &base;
                DVector::from_iterator(k, directions.iter().map(|q| rel.dot(q)))
            })
            .collect();
        let mut out: Vec<Halfspace> = Vec::new();
        for subset in (0..vertices.len()).combinations(k) {
            let d = DMatrix::from_fn(k - 1, k, |i, j| coords[subset[i + 1]][j] - coords[subset[0]][j]);
            let ns = null_space(&d, 1e-9);
            if ns.len() != 1 {
                continue;
            }
            let nu = ns[0].as_dvector().clone();
            let off = nu.dot(&coords[subset[0]]);
            let vals: Vec<f64> = coords.iter().map(|c| nu.dot(c) - off).collect();
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let tol = 1e-9 * scale;
            let local = if hi <= tol {
                nu
            } else if lo >= -tol {
                -nu
            } else {
                continue;
            };
            let normal = directions.iter().zip(local.iter()).fold(Vector::zeros(n), |acc, (q, c)| acc + q.scale(*c));
            let offset = normal.dot(&vertices[subset[0]]);
            if out.iter().any(|h| h.normal.dot(&normal) > 1.0 - 1e-9 && (h.offset - offset).abs() <= 1e-9 * scale) {
                continue;
            }
            out.push(Halfspace { normal, offset });
        }
        Some(out)
    };
    PolytopeHull { base, complement, facets }
}

/// Result of a projection onto an intersection.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleProjection {
    pub point: Vector,
    pub dist: f64,
    /// Distance between the final iterates in the two sets; zero for
    /// closed-form pieces.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum OraclePiece {
    Exact(SetRep),
    /// Two balls meeting in a lens with nonempty interior.
    Lens { c1: Vector, r1: f64, c2: Vector, r2: f64 },
    Dykstra { a: SetRep, b: SetRep },
}

/// Evaluates projections onto `A∩B` when no closed representation exists.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionOracle {
    pieces: Vec<OraclePiece>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Intersection {
    Exact(SetRep),
    Oracle(IntersectionOracle),
}

impl IntersectionOracle {
    pub fn project(&self, x: &Vector) -> OracleProjection {
        let mut best: Option<OracleProjection> = None;
        for piece in &self.pieces {
            let r = match piece {
                OraclePiece::Exact(s) => {
                    let (p, d) = s.nearest(x);
                    OracleProjection { point: p, dist: d, residual: 0.0 }
                }
                OraclePiece::Lens { c1, r1, c2, r2 } => {
                    let p = lens_projection(c1, *r1, c2, *r2, x);
                    let d = x.dist(&p);
                    OracleProjection { point: p, dist: d, residual: 0.0 }
                }
                OraclePiece::Dykstra { a, b } => dykstra(a, b, x),
            };
            if best.as_ref().is_none_or(|b| r.dist < b.dist) {
                best = Some(r);
            }
        }
        best.expect("oracle has pieces")
    }
}

impl Intersection {
    pub fn project(&self, x: &Vector) -> Result<OracleProjection> {
        match self {
            Intersection::Exact(s) => {
                check_dims(s.dim(), &[x])?;
                let (p, d) = s.nearest(x);
                Ok(OracleProjection { point: p, dist: d, residual: 0.0 })
            }
            Intersection::Oracle(o) => Ok(o.project(x)),
        }
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok(self.project(x)?.dist)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Intersection::Exact(_))
    }
}

/// `A∩B` as an exact set when the classes are closed under intersection,
/// otherwise as an iterative oracle.
pub fn intersect(a: &SetRep, b: &SetRep) -> Result<Intersection> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let mut pieces = Vec::new();
    for pa in a.pieces() {
        for pb in b.pieces() {
            match intersect_convex(pa, pb) {
                Ok(p) => pieces.push(p),
                Err(Error::EmptyIntersection) => {}
                Err(e) => return Err(e),
            }
        }
    }
    if pieces.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    if pieces.iter().all(|p| matches!(p, OraclePiece::Exact(_))) {
        let mut sets: Vec<SetRep> = pieces
            .into_iter()
            .map(|p| match p {
                OraclePiece::Exact(s) => s,
                _ => unreachable!(),
            })
            .collect();
        if sets.len() == 1 {
            return Ok(Intersection::Exact(sets.pop().expect("one set")));
        }
        return Ok(Intersection::Exact(SetRep::union(sets)?));
    }
    Ok(Intersection::Oracle(IntersectionOracle { pieces }))
}

fn intersect_convex(a: &SetRep, b: &SetRep) -> Result<OraclePiece> {
    use SetRep::*;
    let n = a.dim();
    for (s, t) in [(a, b), (b, a)] {
        if let AffineSubspace { base, basis } = s {
            if basis.is_empty() {
                return if t.nearest(base).1 <= MEMBERSHIP_TOL {
                    Ok(OraclePiece::Exact(s.clone()))
                } else {
                    Err(Error::EmptyIntersection)
                };
            }
        }
    }
    match (a, b) {
        (AffineSubspace { .. }, AffineSubspace { .. }) => affine_intersection(a, b).map(OraclePiece::Exact),
        (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => ball_pair(c1, *r1, c2, *r2),
        _ => {
            if let (Some(ra), Some(rb)) = (a.halfspaces(), b.halfspaces()) {
                if ra.len() + rb.len() <= MAX_POLYHEDRON_ROWS {
                    let rows: Vec<Halfspace> = ra.into_iter().chain(rb).collect();
                    return match polyhedron_from_rows(rows, n) {
                        Ok(s) => Ok(OraclePiece::Exact(s)),
                        Err(Error::EmptyPolyhedron) => Err(Error::EmptyIntersection),
                        Err(e) => Err(e),
                    };
                }
            }
            if feasibility_gap(a, b) > EMPTY_GAP {
                return Err(Error::EmptyIntersection);
            }
            Ok(OraclePiece::Dykstra { a: a.clone(), b: b.clone() })
        }
    }
}

fn affine_intersection(a: &SetRep, b: &SetRep) -> Result<SetRep> {
    let (SetRep::AffineSubspace { base: ba, basis: qa }, SetRep::AffineSubspace { base: bb, basis: qb }) = (a, b)
    else {
        unreachable!("affine pair expected")
    };
    let n = ba.dim();
    let wa = orthogonal_complement(qa, n);
    let wb = orthogonal_complement(qb, n);
    let k = wa.len() + wb.len();
    if k == 0 {
        return Ok(a.clone());
    }
    let rows: Vec<(&Vector, f64)> =
        wa.iter().map(|w| (w, w.dot(ba))).chain(wb.iter().map(|w| (w, w.dot(bb)))).collect();
    let c = DMatrix::from_fn(k, n, |i, j| rows[i].0[j]);
    let d = DVector::from_fn(k, |i, _| rows[i].1);
    let xp = c.clone().svd(true, true).solve(&d, 1e-12).map_err(|e| Error::Argument(e.to_string()))?;
    let res = (&c * &xp - &d).norm();
    if res > 1e-9 * (1.0 + d.norm()) {
        return Err(Error::EmptyIntersection);
    }
    let basis = null_space(&c, 1e-10);
    Ok(SetRep::AffineSubspace { base: Vector::from_dvector(xp), basis })
}

fn ball_pair(c1: &Vector, r1: f64, c2: &Vector, r2: f64) -> Result<OraclePiece> {
    let d = c1.dist(c2);
    let scale = 1.0 + r1 + r2;
    if d > r1 + r2 + 1e-12 * scale {
        return Err(Error::EmptyIntersection);
    }
    if d + r1 <= r2 {
        return Ok(OraclePiece::Exact(SetRep::Ball { center: c1.clone(), radius: r1 }));
    }
    if d + r2 <= r1 {
        return Ok(OraclePiece::Exact(SetRep::Ball { center: c2.clone(), radius: r2 }));
    }
    if d >= r1 + r2 - 1e-12 * scale {
        let u = (c2 - c1).scale(1.0 / d);
        return Ok(OraclePiece::Exact(SetRep::AffineSubspace { base: c1 + &u.scale(r1), basis: vec![] }));
    }
    Ok(OraclePiece::Lens { c1: c1.clone(), r1, c2: c2.clone(), r2 })
}

fn lens_projection(c1: &Vector, r1: f64, c2: &Vector, r2: f64, x: &Vector) -> Vector {
    let in1 = x.dist(c1) <= r1;
    let in2 = x.dist(c2) <= r2;
    if in1 && in2 {
        return x.clone();
    }
    let p1 = SetRep::Ball { center: c1.clone(), radius: r1 }.nearest(x).0;
    if p1.dist(c2) <= r2 + 1e-12 {
        return p1;
    }
    let p2 = SetRep::Ball { center: c2.clone(), radius: r2 }.nearest(x).0;
    if p2.dist(c1) <= r1 + 1e-12 {
        return p2;
    }
    // the nearest point lies on the rim sphere
    let d = c1.dist(c2);
    let u = (c2 - c1).scale(1.0 / d);
    let h = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let rho = (r1 * r1 - h * h).max(0.0).sqrt();
    let m = c1 + &u.scale(h);
    let rel = x - &m;
    let flat = &rel - &u.scale(rel.dot(&u));
    let len = flat.norm();
    if len <= 1e-15 {
        // every rim point is nearest; pick one deterministically
        let other = orthogonal_complement(std::slice::from_ref(&u), x.dim());
        return &m + &other[0].scale(rho);
    }
    &m + &flat.scale(rho / len)
}

/// Gap left by plain alternating projections between two convex sets.
fn feasibility_gap(a: &SetRep, b: &SetRep) -> f64 {
    let mut pa = a.anchor();
    let mut pb = b.nearest(&pa).0;
    let mut gap = pa.dist(&pb);
    for _ in 0..DYKSTRA_MAX_ITER {
        if gap <= DYKSTRA_TOL {
            return gap;
        }
        pa = a.nearest(&pb).0;
        let next = b.nearest(&pa).0;
        let moved = next.dist(&pb);
        pb = next;
        gap = pa.dist(&pb);
        if moved <= 1e-14 * (1.0 + gap) {
            break;
        }
    }
    gap
}

fn dykstra(a: &SetRep, b: &SetRep, x: &Vector) -> OracleProjection {
    let n = x.dim();
    let mut y = x.clone();
    let mut p = Vector::zeros(n);
    let mut q = Vector::zeros(n);
    let mut ya = x.clone();
    for _ in 0..DYKSTRA_MAX_ITER {
        let z = &y + &p;
        ya = a.nearest(&z).0;
        p = &z - &ya;
        let w = &ya + &q;
        let yb = b.nearest(&w).0;
        q = &w - &yb;
        let moved = yb.dist(&y);
        y = yb;
        if moved <= DYKSTRA_TOL && ya.dist(&y) <= DYKSTRA_TOL {
            break;
        }
    }
    let residual = ya.dist(&y);
    let dist = x.dist(&y);
    OracleProjection { point: y, dist, residual }
}
