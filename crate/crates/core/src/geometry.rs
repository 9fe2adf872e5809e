//! Vectors in ℝⁿ, the parametrised product norms on triples, and the
//! distance-maximum function shared by the estimators.

use std::fmt;
use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension the estimators are meant for.
pub const MAX_DIM: usize = 8;

/// A point of ℝⁿ with the Euclidean inner product.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(DVector<f64>);

impl Vector {
    /// Builds a vector, rejecting non-finite coordinates and empty input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Argument("vector must have at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Vector(DVector::from_vec(coords)))
    }

    /// Unchecked constructor for internal arithmetic results.
    pub(crate) fn from_dvector(v: DVector<f64>) -> Self {
        Vector(v)
    }

    pub fn zeros(n: usize) -> Self {
        Vector(DVector::zeros(n))
    }

    /// The `i`-th standard basis vector of ℝⁿ.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        Vector(v)
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Vector(DVector::from_column_slice(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Unit vector in the same direction, or `None` for (near) zero input.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.0.norm();
        (n > 1e-300).then(|| Vector(&self.0 / n))
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(&self.0 * s)
    }

    /// Concatenates several vectors into one point of a product space.
    pub fn concat(parts: &[&Vector]) -> Vector {
        let coords: Vec<f64> = parts.iter().flat_map(|p| p.coords().iter().copied()).collect();
        Vector::from_slice(&coords)
    }

    /// Coordinates `start..start+len` as a new vector.
    pub fn segment(&self, start: usize, len: usize) -> Vector {
        Vector::from_slice(&self.coords()[start..start + len])
    }
}

impl Deref for Vector {
    type Target = DVector<f64>;
    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Vec<f64> {
        v.0.as_slice().to_vec()
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(&self.0 + &rhs.0)
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        Vector(self.0 + rhs.0)
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(&self.0 - &rhs.0)
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        Vector(self.0 - rhs.0)
    }
}

impl AddAssign<&Vector> for Vector {
    fn add_assign(&mut self, rhs: &Vector) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Vector> for Vector {
    fn sub_assign(&mut self, rhs: &Vector) {
        self.0 -= &rhs.0;
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        Vector(&self.0 * s)
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        Vector(self.0 * s)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(-&self.0)
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(-self.0)
    }
}

/// The parameter ρ of the weighted maximum norm on triples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoNorm(f64);

impl RhoNorm {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Argument(format!("rho must be positive, got {rho}")));
        }
        Ok(RhoNorm(rho))
    }

    pub fn rho(self) -> f64 {
        self.0
    }
}

pub(crate) fn check_dims(expected: usize, vs: &[&Vector]) -> Result<()> {
    for v in vs {
        if v.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: v.dim() });
        }
    }
    Ok(())
}

pub fn norm_euclid(x: &Vector) -> f64 {
    x.norm()
}

/// `max{‖x‖, ρ‖x1‖, ρ‖x2‖}`.
pub fn norm_rho_triple(x1: &Vector, x2: &Vector, x: &Vector, rho: RhoNorm) -> Result<f64> {
    check_dims(x.dim(), &[x1, x2])?;
    let r = rho.rho();
    Ok(x.norm().max(r * x1.norm()).max(r * x2.norm()))
}

/// Dual of [`norm_rho_triple`]: `‖x*‖ + ρ⁻¹(‖x1*‖ + ‖x2*‖)`.
pub fn dual_norm_rho_triple(x1s: &Vector, x2s: &Vector, xs: &Vector, rho: RhoNorm) -> Result<f64> {
    check_dims(xs.dim(), &[x1s, x2s])?;
    Ok(xs.norm() + (x1s.norm() + x2s.norm()) / rho.rho())
}

/// `f(x1, x2, x) = max{‖x1 − x‖, ‖x2 − x‖}`.
pub fn f_max(x1: &Vector, x2: &Vector, x: &Vector) -> Result<f64> {
    check_dims(x.dim(), &[x1, x2])?;
    Ok(x1.dist(x).max(x2.dist(x)))
}

/// Gram–Schmidt on `vs`, dropping vectors that are dependent within `tol`.
pub fn orthonormalize(vs: &[Vector], tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        // two passes for numerical stability
        for _ in 0..2 {
            for q in &out {
                let c = w.dot(q);
                w -= &(q * c);
            }
        }
        if w.norm() > tol {
            out.push(w.normalized().expect("nonzero"));
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in ℝⁿ.
pub fn orthogonal_complement(basis: &[Vector], n: usize) -> Vec<Vector> {
    let mut all: Vec<Vector> = basis.to_vec();
    all.extend((0..n).map(|i| Vector::basis(n, i)));
    let q = orthonormalize(&all, 1e-8);
    let k = orthonormalize(basis, 1e-8).len();
    q[k..].to_vec()
}

/// Orthonormal basis of the null space of `m` (columns = ambient dimension).
pub(crate) fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<Vector> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return (0..n).map(|i| Vector::basis(n, i)).collect();
    }
    // pad with zero rows so the SVD yields a full set of right singular vectors
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let scale = svd.singular_values.max().max(1.0);
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol * scale {
            out.push(Vector::from_dvector(v_t.row(i).transpose()));
        }
    }
    orthonormalize(&out, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    #[test]
    fn euclid_norm_examples() {
        assert_eq!(norm_euclid(&v(&[3.0, 4.0])), 5.0);
        assert_eq!(norm_euclid(&v(&[0.0, 0.0])), 0.0);
        assert!((norm_euclid(&v(&[1.0, 1.0])) - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rho_triple_examples() {
        let one = RhoNorm::new(1.0).unwrap();
        let half = RhoNorm::new(0.5).unwrap();
        let n = norm_rho_triple(&v(&[1.0, 0.0]), &v(&[0.0, 2.0]), &v(&[0.0, 0.0]), one).unwrap();
        assert_eq!(n, 2.0);
        let n = norm_rho_triple(&v(&[4.0, 0.0]), &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), half).unwrap();
        assert_eq!(n, 2.0);
        let z = v(&[0.0, 0.0]);
        assert_eq!(norm_rho_triple(&z, &z, &z, half).unwrap(), 0.0);
    }

    #[test]
    fn dual_triple_examples() {
        let half = RhoNorm::new(0.5).unwrap();
        let d = dual_norm_rho_triple(&v(&[0.0, 1.0]), &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), half).unwrap();
        assert_eq!(d, 3.0);
        let one = RhoNorm::new(1.0).unwrap();
        let e = v(&[1.0, 0.0]);
        assert_eq!(dual_norm_rho_triple(&e, &e, &e, one).unwrap(), 3.0);
        let z = v(&[0.0, 0.0]);
        assert_eq!(dual_norm_rho_triple(&z, &z, &z, one).unwrap(), 0.0);
    }

    #[test]
    fn f_max_examples() {
        let z = v(&[0.0, 0.0]);
        assert_eq!(f_max(&v(&[1.0, 0.0]), &z, &z).unwrap(), 1.0);
        assert_eq!(f_max(&z, &z, &z).unwrap(), 0.0);
        assert_eq!(f_max(&v(&[2.0, 0.0]), &v(&[0.0, 3.0]), &z).unwrap(), 3.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = f_max(&v(&[1.0]), &v(&[1.0, 2.0]), &v(&[0.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, found: 2 }));
        assert!(RhoNorm::new(0.0).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(Vector::new(vec![1.0, f64::NAN]), Err(Error::NonFinite)));
        assert!(Vector::new(vec![]).is_err());
    }

    #[test]
    fn complement_is_orthonormal() {
        let b = orthonormalize(&[v(&[1.0, 1.0, 0.0])], 1e-12);
        let c = orthogonal_complement(&b, 3);
        assert_eq!(c.len(), 2);
        for w in &c {
            assert!((w.norm() - 1.0).abs() < 1e-12);
            assert!(w.dot(&b[0]).abs() < 1e-12);
        }
        assert!(c[0].dot(&c[1]).abs() < 1e-12);
    }
}
