//! Normal cones: exact cones of convex pieces, sampled proximal and limiting
//! normals, and a falsification test for Fréchet normality.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{check_dims, orthogonal_complement, orthonormalize, Vector};
use crate::projections::{polytope_hull, SetRep, MEMBERSHIP_TOL, TIE_TOL};
use crate::sampling::{radial_ball, unit_sphere};

const ACTIVE_TOL: f64 = 1e-9;

/// `cone(generators) + span(lineality)`. The zero cone has no generators and
/// no lineality.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeRep {
    pub generators: Vec<Vector>,
    pub lineality: Vec<Vector>,
    /// False when the cone comes from sampling.
    pub exact: bool,
    dim: usize,
}

impl ConeRep {
    pub fn zero(n: usize) -> Self {
        ConeRep { generators: vec![], lineality: vec![], exact: true, dim: n }
    }

    /// Normalizes the inputs, drops zero vectors and orthonormalizes the
    /// lineality directions.
    pub fn new(generators: Vec<Vector>, lineality: Vec<Vector>, exact: bool, n: usize) -> Self {
        let lineality = orthonormalize(&lineality, 1e-10);
        let generators = generators.iter().filter_map(|g| g.normalized()).collect();
        ConeRep { generators, lineality, exact, dim: n }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty() && self.lineality.is_empty()
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, v: &Vector) -> Vector {
        let mut lin = Vector::zeros(self.dim);
        for q in &self.lineality {
            lin += &(q * v.dot(q));
        }
        let rest = v - &lin;
        if self.generators.is_empty() {
            return lin;
        }
        // generators reduced modulo the lineality space
        let cols: Vec<Vector> = self
            .generators
            .iter()
            .map(|g| {
                let mut r = g.clone();
                for q in &self.lineality {
                    r -= &(q * g.dot(q));
                }
                r
            })
            .collect();
        let a = DMatrix::from_fn(self.dim, cols.len(), |i, j| cols[j][i]);
        let lambda = nnls(&a, rest.as_dvector());
        Vector::from_dvector(&a * lambda) + lin
    }

    pub fn distance(&self, v: &Vector) -> f64 {
        v.dist(&self.project(v))
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        self.distance(v) <= tol
    }

    /// A random unit element, or `None` for the zero cone.
    pub fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vector> {
        if self.is_zero() {
            return None;
        }
        for _ in 0..32 {
            let mut v = Vector::zeros(self.dim);
            for g in &self.generators {
                let w: f64 = rng.sample(Exp1);
                v += &g.scale(w);
            }
            for q in &self.lineality {
                let w: f64 = rng.sample(StandardNormal);
                v += &q.scale(w);
            }
            if let Some(u) = v.normalized() {
                return Some(u);
            }
        }
        None
    }

    /// Unit vectors spanning the cone: generators plus both signs of each
    /// lineality direction.
    pub fn extreme_directions(&self) -> Vec<Vector> {
        let mut out = self.generators.clone();
        for q in &self.lineality {
            out.push(q.clone());
            out.push(-q);
        }
        out
    }
}

/// Lawson–Hanson nonnegative least squares `min ‖Aλ − b‖, λ ≥ 0`.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    let tol = 1e-12 * (1.0 + b.norm()) * (1.0 + a.norm());
    let mut x = DVector::zeros(k);
    let mut passive = vec![false; k];
    for _ in 0..(3 * k + 10) {
        let w = a.transpose() * (b - a * &x);
        let j = (0..k).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let j = match j {
            Some(j) if w[j] > tol => j,
            _ => break,
        };
        passive[j] = true;
        for _ in 0..(3 * k + 10) {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let s_sub = match sub.svd(true, true).solve(b, 1e-12) {
                Ok(s) => s,
                Err(_) => break,
            };
            let mut s = DVector::zeros(k);
            for (c, &i) in idx.iter().enumerate() {
                s[i] = s_sub[c];
            }
            if idx.iter().all(|&i| s[i] > 0.0) {
                x = s;
                break;
            }
            let mut alpha = 1.0f64;
            for &i in &idx {
                if s[i] <= 0.0 {
                    let d = x[i] - s[i];
                    if d > 0.0 {
                        alpha = alpha.min(x[i] / d);
                    }
                }
            }
            x += (&s - &x) * alpha;
            for &i in &idx {
                if x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalKind {
    ConvexExact,
    Proximal,
    Limiting,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalSample {
    pub base: Vector,
    pub direction: Vector,
    pub kind: NormalKind,
    /// Radius of the sampling scale for limiting normals.
    pub scale: Option<f64>,
}

fn check_member(s: &SetRep, a: &Vector) -> Result<()> {
    check_dims(s.dim(), &[a])?;
    let d = s.distance(a)?;
    if d > MEMBERSHIP_TOL {
        return Err(Error::Membership { distance: d });
    }
    Ok(())
}

/// Normal cone of a convex set at `a ∈ S`.
pub fn convex_normal_cone(s: &SetRep, a: &Vector) -> Result<ConeRep> {
    check_member(s, a)?;
    convex_cone_unchecked(s, a)
}

fn convex_cone_unchecked(s: &SetRep, a: &Vector) -> Result<ConeRep> {
    let n = s.dim();
    Ok(match s {
        SetRep::AffineSubspace { basis, .. } => ConeRep::new(vec![], orthogonal_complement(basis, n), true, n),
        SetRep::Polyhedron { rows, .. } => {
            let active = rows.iter().filter(|r| r.violation(a) >= -ACTIVE_TOL).map(|r| r.normal.clone()).collect();
            ConeRep::new(active, vec![], true, n)
        }
        SetRep::Ball { center, radius } => {
            let rel = a - center;
            if rel.norm() >= radius - ACTIVE_TOL {
                ConeRep::new(vec![rel], vec![], true, n)
            } else {
                ConeRep::zero(n)
            }
        }
        SetRep::Polytope { vertices } => {
            let hull = polytope_hull(vertices);
            let facets = hull.facets.ok_or_else(|| {
                Error::InvalidSet("normal cones of polytopes need an affine hull of dimension at most 3".into())
            })?;
            let active = facets.iter().filter(|f| f.violation(a) >= -ACTIVE_TOL).map(|f| f.normal.clone()).collect();
            ConeRep::new(active, hull.complement, true, n)
        }
        SetRep::FiniteUnion { pieces } if pieces.len() == 1 => convex_cone_unchecked(&pieces[0], a)?,
        SetRep::FiniteUnion { .. } => return Err(Error::NonConvexInput),
    })
}

/// Fréchet normal cone at `a ∈ S`. For a union this is the intersection of
/// the cones of the pieces containing `a`; when that intersection is not a
/// subspace it is approximated from alternating projections between cones.
pub fn normal_cone_at(s: &SetRep, a: &Vector) -> Result<ConeRep> {
    check_member(s, a)?;
    let n = s.dim();
    let cones: Vec<ConeRep> = s
        .pieces()
        .iter()
        .filter(|p| p.nearest(a).1 <= MEMBERSHIP_TOL)
        .map(|p| convex_cone_unchecked(p, a))
        .collect::<Result<_>>()?;
    if cones.len() == 1 {
        return Ok(cones.into_iter().next().expect("one cone"));
    }
    if cones.iter().any(|c| c.is_zero()) {
        return Ok(ConeRep::zero(n));
    }
    if cones.iter().all(|c| c.generators.is_empty()) {
        // intersection of subspaces
        let mut basis = cones[0].lineality.clone();
        for c in &cones[1..] {
            let comp = orthogonal_complement(&c.lineality, n);
            let m = DMatrix::from_fn(comp.len(), basis.len(), |i, j| comp[i].dot(&basis[j]));
            let coeffs = crate::geometry::null_space(&m, 1e-9);
            basis = coeffs
                .iter()
                .map(|cf| basis.iter().zip(cf.iter()).fold(Vector::zeros(n), |acc, (b, w)| acc + b.scale(*w)))
                .collect();
            if basis.is_empty() {
                break;
            }
        }
        return Ok(ConeRep::new(vec![], basis, true, n));
    }
    // general case: directions reached by projecting cyclically between cones
    let mut gens = Vec::new();
    let seeds: Vec<Vector> = cones.iter().flat_map(|c| c.extreme_directions()).collect();
    for seed in seeds {
        let mut v = seed;
        for _ in 0..500 {
            for c in &cones {
                v = c.project(&v);
            }
        }
        if let Some(u) = v.normalized() {
            if cones.iter().all(|c| c.distance(&u) <= 1e-6) && !gens.iter().any(|g: &Vector| g.dist(&u) < 1e-6) {
                gens.push(u);
            }
        }
    }
    Ok(ConeRep::new(gens, vec![], false, n))
}

/// True when `a` is a nearest point of `S` to `x` up to the tie tolerance.
fn projects_onto(s: &SetRep, x: &Vector, a: &Vector) -> bool {
    x.dist(a) <= s.nearest(x).1 + TIE_TOL
}

/// Sampled proximal normals at `a ∈ S`: directions `x − a` with `a ∈ P_S(x)`.
///
/// Candidates come from uniform samples around `a`, from normals found at
/// nearby projected points and moved to `a`, and from the exact cones of the
/// convex pieces through `a`. Every candidate is checked by projection.
pub fn proximal_normals<R: Rng + ?Sized>(
    s: &SetRep,
    a: &Vector,
    n_samples: usize,
    radius: f64,
    rng: &mut R,
) -> Result<Vec<NormalSample>> {
    check_member(s, a)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Argument(format!("radius must be positive, got {radius}")));
    }
    let mut out = Vec::new();
    let push = |x: &Vector, out: &mut Vec<NormalSample>| {
        let rel = x - a;
        if rel.norm() <= 1e-12 * radius.max(1.0) {
            return;
        }
        if projects_onto(s, x, a) {
            out.push(NormalSample {
                base: a.clone(),
                direction: rel.normalized().expect("nonzero"),
                kind: NormalKind::Proximal,
                scale: None,
            });
        }
    };
    let cones: Vec<ConeRep> = s
        .pieces()
        .iter()
        .filter(|p| p.nearest(a).1 <= MEMBERSHIP_TOL)
        .filter_map(|p| convex_cone_unchecked(p, a).ok())
        .collect();
    for _ in 0..n_samples {
        let x = radial_ball(rng, a, radius);
        push(&x, &mut out);
        // normal found at the projection of x, tried at a
        let (p, d) = s.nearest(&x);
        if d > 1e-12 {
            let moved = a + &(&x - &p).scale(radius * rng.random::<f64>() / d);
            push(&moved, &mut out);
        }
        for c in &cones {
            if let Some(u) = c.sample_unit(rng) {
                let x = a + &u.scale(radius * rng.random::<f64>());
                push(&x, &mut out);
            }
        }
    }
    Ok(out)
}

/// Proximal normals collected at points of `S` near `xbar`, one batch per
/// radius of the decreasing schedule.
///
/// Base points are projections of ambient samples from `B_{r/2}(xbar)`, so they
/// lie in `B_r(xbar)` and concentrate on the boundary.
pub fn limiting_normals<R: Rng + ?Sized>(
    s: &SetRep,
    xbar: &Vector,
    schedule: &[f64],
    samples_per_radius: usize,
    rng: &mut R,
) -> Result<Vec<NormalSample>> {
    check_member(s, xbar)?;
    let mut out = Vec::new();
    for &r in schedule {
        for _ in 0..samples_per_radius {
            let y = radial_ball(rng, xbar, 0.5 * r);
            let proj = s.project(&y)?;
            if proj.dist <= 1e-12 * r {
                continue;
            }
            for a in proj.nearest {
                if let Some(u) = (&y - &a).normalized() {
                    out.push(NormalSample { base: a, direction: u, kind: NormalKind::Limiting, scale: Some(r) });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrechetVerdict {
    Plausible,
    Refuted { witness: Vector },
}

/// Tries to refute `v ∈ N̂_S(a)` by finding points `s ∈ S` near `a` with
/// `cos∠(v, s − a) > tol` at all sampled scales.
pub fn frechet_normal_check<R: Rng + ?Sized>(
    s: &SetRep,
    a: &Vector,
    v: &Vector,
    radii: &[f64],
    tol: f64,
    samples_per_radius: usize,
    rng: &mut R,
) -> Result<FrechetVerdict> {
    check_member(s, a)?;
    check_dims(s.dim(), &[v])?;
    let vn = v.norm();
    if vn == 0.0 {
        return Err(Error::Argument("zero vector is trivially normal".into()));
    }
    if radii.is_empty() {
        return Err(Error::Argument("radius schedule is empty".into()));
    }
    let mut hits = 0usize;
    let mut finest = None;
    for (k, &r) in radii.iter().enumerate() {
        let mut best: Option<(f64, Vector)> = None;
        for i in 0..samples_per_radius {
            // half the probes are pushed toward v so tangent directions are found
            let y = if i % 2 == 0 {
                radial_ball(rng, a, r)
            } else {
                a + &(v.scale(r * rng.random::<f64>() / vn) + unit_sphere(rng, a.dim()).scale(0.25 * r))
            };
            let (p, _) = s.nearest(&y);
            let rel = &p - a;
            let len = rel.norm();
            if len <= 1e-12 * r || len > r {
                continue;
            }
            let c = v.dot(&rel) / (vn * len);
            if best.as_ref().is_none_or(|b| c > b.0) {
                best = Some((c, p));
            }
        }
        if let Some((c, p)) = best {
            if c > tol {
                hits += 1;
                if k + 1 == radii.len() {
                    finest = Some(p);
                }
            }
        }
    }
    // persistent: seen at the finest scale and at half of all scales
    Ok(match finest {
        Some(witness) if 2 * hits >= radii.len() => FrechetVerdict::Refuted { witness },
        _ => FrechetVerdict::Plausible,
    })
}
