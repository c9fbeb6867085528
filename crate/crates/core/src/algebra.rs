//! 2×2 matrices over complex scalars, the sl(2,ℝ) basis and its two scalar products.
//!
//! Everything is complex-capable because the square roots of the discriminant and
//! of `u + λ` leave the real line in the trigonometric regime; real-valued results
//! are checked with [`ScalarExt::is_effectively_real`] where they leave the crate.

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Scalar = Complex64;

/// Tolerance for the traceless check at construction, relative to the entry scale.
pub const TRACE_TOL: f64 = 1e-12;

pub trait ScalarExt {
    /// `|Im| ≤ tol · max(1, |Re|)`.
    fn is_effectively_real(&self, tol: f64) -> bool;
}

impl ScalarExt for Scalar {
    fn is_effectively_real(&self, tol: f64) -> bool {
        self.im.abs() <= tol * self.re.abs().max(1.0)
    }
}

#[inline]
pub fn re(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

/// A general 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m11: Scalar,
    pub m12: Scalar,
    pub m21: Scalar,
    pub m22: Scalar,
}

impl Mat2 {
    pub const fn new(m11: Scalar, m12: Scalar, m21: Scalar, m22: Scalar) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self::new(re(m11), re(m12), re(m21), re(m22))
    }

    pub fn zero() -> Self {
        Self::real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn trace(&self) -> Scalar {
        self.m11 + self.m22
    }

    pub fn det(&self) -> Scalar {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn scale(&self, s: Scalar) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(re(s))
    }

    /// Inverse, or `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let inv = d.inv();
        Some(Self::new(self.m22 * inv, -self.m12 * inv, -self.m21 * inv, self.m11 * inv))
    }

    pub fn entries(&self) -> [Scalar; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    /// Largest imaginary part among the entries.
    pub fn max_imag(&self) -> f64 {
        self.entries().iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Removes the trace, `X - (tr X / 2)·I`.
    pub fn traceless_part(&self) -> Self {
        let half = self.trace() * 0.5;
        Self::new(self.m11 - half, self.m12, self.m21, self.m22 - half)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.m11, -self.m12, -self.m21, -self.m22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale_re(s)
    }
}

impl Mul<Scalar> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Scalar) -> Mat2 {
        self.scale(s)
    }
}

/// Traceless 2×2 matrix: an element of the (complexified) Lie algebra sl(2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl2Matrix(Mat2);

impl Sl2Matrix {
    /// Accepts `mat` if its trace vanishes to [`TRACE_TOL`] relative to its entries.
    pub fn new(mat: Mat2) -> Result<Self> {
        let tr = mat.trace().norm();
        if !(tr <= TRACE_TOL * (1.0 + mat.max_abs())) {
            return Err(Error::NotTraceless { trace: tr });
        }
        Ok(Self(mat))
    }

    /// Projects onto the traceless part without checking.
    pub fn project(mat: Mat2) -> Self {
        Self(mat.traceless_part())
    }

    pub fn from_entries(m11: Scalar, m12: Scalar, m21: Scalar) -> Self {
        Self(Mat2::new(m11, m12, m21, -m11))
    }

    pub fn real(m11: f64, m12: f64, m21: f64) -> Self {
        Self::from_entries(re(m11), re(m12), re(m21))
    }

    pub fn zero() -> Self {
        Self(Mat2::zero())
    }

    /// `diag(1, -1)`
    pub fn e1() -> Self {
        Self::real(1.0, 0.0, 0.0)
    }

    /// `offdiag(1, 1)`
    pub fn e2() -> Self {
        Self::real(0.0, 1.0, 1.0)
    }

    /// `[[0, -1], [1, 0]]`
    pub fn e3() -> Self {
        Self::real(0.0, -1.0, 1.0)
    }

    pub fn basis() -> [Self; 3] {
        [Self::e1(), Self::e2(), Self::e3()]
    }

    pub fn mat(&self) -> &Mat2 {
        &self.0
    }

    pub fn into_mat(self) -> Mat2 {
        self.0
    }

    pub fn coeffs(&self) -> [Scalar; 3] {
        decompose(self)
    }

    pub fn from_coeffs(c: [Scalar; 3]) -> Self {
        compose(c)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_re(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }
}

impl Add for Sl2Matrix {
    type Output = Sl2Matrix;
    fn add(self, o: Sl2Matrix) -> Sl2Matrix {
        Sl2Matrix(self.0 + o.0)
    }
}

impl Sub for Sl2Matrix {
    type Output = Sl2Matrix;
    fn sub(self, o: Sl2Matrix) -> Sl2Matrix {
        Sl2Matrix(self.0 - o.0)
    }
}

impl Mul<f64> for Sl2Matrix {
    type Output = Sl2Matrix;
    fn mul(self, s: f64) -> Sl2Matrix {
        self.scale(s)
    }
}

/// Coefficients `(X¹, X², X³)` of `X = Xⁱ eᵢ`.
pub fn decompose(x: &Sl2Matrix) -> [Scalar; 3] {
    let m = x.mat();
    [m.m11, (m.m12 + m.m21) * 0.5, (m.m21 - m.m12) * 0.5]
}

pub fn compose(c: [Scalar; 3]) -> Sl2Matrix {
    Sl2Matrix::from_entries(c[0], c[1] - c[2], c[1] + c[2])
}

/// `⟨X, Y⟩ = XⁱYⁱ` in the basis coefficients (bilinear, no conjugation).
pub fn euclidean_inner(x: &Sl2Matrix, y: &Sl2Matrix) -> Scalar {
    let (a, b) = (decompose(x), decompose(y));
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn euclidean_norm(x: &Sl2Matrix) -> f64 {
    decompose(x).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `B(X, Y) = ½ tr(XY)`; in the basis this is `diag(1, 1, -1)`.
pub fn killing_form(x: &Sl2Matrix, y: &Sl2Matrix) -> Scalar {
    let (a, b) = (x.mat(), y.mat());
    (a.m11 * b.m11 + a.m12 * b.m21 + a.m21 * b.m12 + a.m22 * b.m22) * 0.5
}

/// Magnitude `√|B(V,V)|` and sign of `B(V,V)` for the indefinite Killing form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KillingNorm {
    pub magnitude: f64,
    pub sign: f64,
}

pub fn killing_norm(v: &Sl2Matrix) -> KillingNorm {
    let q = killing_form(v, v).re;
    KillingNorm { magnitude: q.abs().sqrt(), sign: if q < 0.0 { -1.0 } else { 1.0 } }
}

pub fn commutator(x: &Sl2Matrix, y: &Sl2Matrix) -> Sl2Matrix {
    Sl2Matrix(x.mat().commutator(y.mat()))
}

/// Invertible 2×2 matrix with its determinant cached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    mat: Mat2,
    inv: Mat2,
    det: Scalar,
}

impl GroupElement {
    pub fn new(mat: Mat2) -> Result<Self> {
        let det = mat.det();
        let inv = mat.inverse().ok_or(Error::SingularFrame { det: det.norm() })?;
        if !(det.norm() > f64::EPSILON * mat.max_abs().powi(2)) {
            return Err(Error::SingularFrame { det: det.norm() });
        }
        Ok(Self { mat, inv, det })
    }

    pub fn identity() -> Self {
        Self { mat: Mat2::identity(), inv: Mat2::identity(), det: re(1.0) }
    }

    pub fn mat(&self) -> &Mat2 {
        &self.mat
    }

    pub fn inverse(&self) -> &Mat2 {
        &self.inv
    }

    pub fn det(&self) -> Scalar {
        self.det
    }

    /// Rescales to unit determinant.
    pub fn normalized(&self) -> Self {
        let s = self.det.sqrt().inv();
        let mat = self.mat.scale(s);
        Self { inv: self.inv.scale(s.inv()), mat, det: mat.det() }
    }
}

/// `Φ⁻¹ X Φ`
pub fn conjugate(phi: &GroupElement, x: &Sl2Matrix) -> Sl2Matrix {
    Sl2Matrix::project(*phi.inverse() * *x.mat() * *phi.mat())
}
