//! Biquaternion algebra, reflector matrices and Lorentz transforms.
//!
//! Basis convention: `i1 * i2 = i3` (cyclic), `i1² = i2² = i3² = -1`.
//! Coefficients are complex; the complex unit `i` commutes with every
//! quaternion unit.
//!
//! Two conjugations are used throughout:
//!
//! * `‡` ([`Biquaternion::quat_conj`]) negates the vector part.
//! * `†` ([`Biquaternion::dagger`]) complex-conjugates every coefficient and
//!   then applies `‡`.
//!
//! A four-vector `(x0, x1, x2, x3)` is embedded as `x0 + i(x1 i1 + x2 i2 + x3 i3)`,
//! which is `†`-hermitian and has quadratic form `q q‡ = x0² - |x|²`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };
/// The complex unit.
pub const CI: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Quaternion with complex coefficients `w + x i1 + y i2 + z i3`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Biquaternion {
    pub w: Complex64,
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl Biquaternion {
    pub const ZERO: Self = Self::new(C0, C0, C0, C0);
    pub const ONE: Self = Self::new(C1, C0, C0, C0);
    pub const I1: Self = Self::new(C0, C1, C0, C0);
    pub const I2: Self = Self::new(C0, C0, C1, C0);
    pub const I3: Self = Self::new(C0, C0, C0, C1);

    #[inline]
    pub const fn new(w: Complex64, x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self { w, x, y, z }
    }

    /// Real-coefficient quaternion.
    #[inline]
    pub fn real(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self::new(w.into(), x.into(), y.into(), z.into())
    }

    #[inline]
    pub fn scalar(w: Complex64) -> Self {
        Self::new(w, C0, C0, C0)
    }

    /// Pure vector quaternion `x i1 + y i2 + z i3` with complex coefficients.
    #[inline]
    pub fn vector(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self::new(C0, x, y, z)
    }

    /// Unit quaternion `i_s` for spatial axis `s` in `1..=3`.
    pub fn unit(axis: usize) -> Self {
        match axis {
            1 => Self::I1,
            2 => Self::I2,
            3 => Self::I3,
            _ => panic!("spatial axis must be 1, 2 or 3, got {axis}"),
        }
    }

    /// `x0 + i (x1 i1 + x2 i2 + x3 i3)`.
    pub fn from_four_vector(v: [f64; 4]) -> Self {
        Self::new(
            v[0].into(),
            Complex64::new(0.0, v[1]),
            Complex64::new(0.0, v[2]),
            Complex64::new(0.0, v[3]),
        )
    }

    /// Inverse of [`Biquaternion::from_four_vector`]; discards the parts that a
    /// hermitian four-vector does not carry.
    pub fn to_four_vector(&self) -> [f64; 4] {
        [self.w.re, self.x.im, self.y.im, self.z.im]
    }

    #[inline]
    pub fn coeffs(&self) -> [Complex64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_coeffs(c: [Complex64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    /// The `‡` conjugation: `w - x i1 - y i2 - z i3`.
    #[inline]
    pub fn quat_conj(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Coefficient-wise complex conjugation, quaternion units untouched.
    #[inline]
    pub fn complex_conj(&self) -> Self {
        Self::new(self.w.conj(), self.x.conj(), self.y.conj(), self.z.conj())
    }

    /// The `†` conjugation: complex conjugation composed with `‡`.
    #[inline]
    pub fn dagger(&self) -> Self {
        self.complex_conj().quat_conj()
    }

    /// Quadratic form `q q‡ = w² + x² + y² + z²` (complex, not a modulus).
    #[inline]
    pub fn norm_form(&self) -> Complex64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Euclidean modulus of the eight real components.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.w.norm_sqr() + self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()
    }

    /// Multiplicative inverse `q‡ / (q q‡)`; `None` when the quadratic form
    /// vanishes (null biquaternions have no inverse).
    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm_form();
        if n.norm() == 0.0 {
            return None;
        }
        Some(self.quat_conj().scale(n.inv()))
    }

    #[inline]
    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.w * k, self.x * k, self.y * k, self.z * k)
    }

    #[inline]
    pub fn scale_real(&self, k: f64) -> Self {
        Self::new(self.w * k, self.x * k, self.y * k, self.z * k)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest absolute difference over the eight real components.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs()
            .iter()
            .zip(other.coeffs().iter())
            .map(|(a, b)| (a.re - b.re).abs().max((a.im - b.im).abs()))
            .fold(0.0, f64::max)
    }
}

impl Default for Biquaternion {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Display for Biquaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})i1 + ({})i2 + ({})i3", self.w, self.x, self.y, self.z)
    }
}

/// Hamilton product under the `i1 i2 = i3` convention.
#[inline]
pub fn bq_mul(a: &Biquaternion, b: &Biquaternion) -> Biquaternion {
    Biquaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

impl Mul for Biquaternion {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        bq_mul(&self, &rhs)
    }
}

impl Mul<Complex64> for Biquaternion {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Complex64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for Biquaternion {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.scale_real(rhs)
    }
}

impl Add for Biquaternion {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Biquaternion {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for Biquaternion {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Biquaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Anti-diagonal reflector `X(a, b) = [[0, a], [b, 0]]`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VersatileMatrix {
    pub upper: Biquaternion,
    pub lower: Biquaternion,
}

/// Diagonal 2×2 quaternion matrix `diag(first, second)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DiagonalMatrix {
    pub first: Biquaternion,
    pub second: Biquaternion,
}

impl VersatileMatrix {
    pub const ZERO: Self = Self {
        upper: Biquaternion::ZERO,
        lower: Biquaternion::ZERO,
    };

    pub fn new(upper: Biquaternion, lower: Biquaternion) -> Self {
        Self { upper, lower }
    }

    /// `X(q, q‡)`, the layout of the operator, potential and current terms.
    pub fn with_quat_conj(q: Biquaternion) -> Self {
        Self::new(q, q.quat_conj())
    }

    /// `X(q, -q‡)`, the layout of the mass term.
    pub fn mass(q: Biquaternion) -> Self {
        Self::new(q, -q.quat_conj())
    }

    pub fn norm(&self) -> f64 {
        (self.upper.norm_sqr() + self.lower.norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.upper.is_finite() && self.lower.is_finite()
    }

    /// `X(a1, b1) X(a2, b2) = diag(a1 b2, b1 a2)`.
    pub fn mul_reflector(&self, rhs: &VersatileMatrix) -> DiagonalMatrix {
        reflector_mul(self, rhs)
    }

    /// `X(a, b) diag(p, q) = X(a q, b p)`.
    pub fn mul_diagonal(&self, rhs: &DiagonalMatrix) -> VersatileMatrix {
        VersatileMatrix::new(self.upper * rhs.second, self.lower * rhs.first)
    }
}

impl Add for VersatileMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.upper + rhs.upper, self.lower + rhs.lower)
    }
}

impl Sub for VersatileMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.upper - rhs.upper, self.lower - rhs.lower)
    }
}

impl DiagonalMatrix {
    pub fn new(first: Biquaternion, second: Biquaternion) -> Self {
        Self { first, second }
    }

    /// `diag(p, q) X(a, b) = X(p a, q b)`.
    pub fn mul_reflector(&self, rhs: &VersatileMatrix) -> VersatileMatrix {
        VersatileMatrix::new(self.first * rhs.upper, self.second * rhs.lower)
    }

    pub fn norm(&self) -> f64 {
        (self.first.norm_sqr() + self.second.norm_sqr()).sqrt()
    }
}

impl Sub for DiagonalMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.first - rhs.first, self.second - rhs.second)
    }
}

/// Product of two reflectors; diagonal by construction.
pub fn reflector_mul(a: &VersatileMatrix, b: &VersatileMatrix) -> DiagonalMatrix {
    DiagonalMatrix::new(a.upper * b.lower, a.lower * b.upper)
}

/// `conj_quat` under its operation name.
#[inline]
pub fn conj_quat(q: &Biquaternion) -> Biquaternion {
    q.quat_conj()
}

/// `conj_dagger` under its operation name.
#[inline]
pub fn conj_dagger(q: &Biquaternion) -> Biquaternion {
    q.dagger()
}

/// Order in which [`LorentzTransform::from_parts`] composes its pieces.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompositionOrder {
    /// Rotate first, then boost: `Z = B ∘ R`.
    RotateThenBoost,
    /// Boost first, then rotate: `Z = R ∘ B`.
    BoostThenRotate,
}

/// Restricted Lorentz transformation held as a unit biquaternion `L`
/// (`L L‡ = 1`).
///
/// Components and four-vectors transform by the sandwich `q ↦ L q L†`;
/// operator bases (the `i_μ` of a Dirac operator) transform by the
/// similarity `q ↦ L q L‡`. Both preserve the quadratic form `q q‡`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzTransform {
    spinor: Biquaternion,
}

impl Default for LorentzTransform {
    fn default() -> Self {
        Self::identity()
    }
}

fn unit_axis(axis: [f64; 3]) -> [f64; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    assert!(n > 0.0 && n.is_finite(), "transform axis must be a non-zero finite vector");
    [axis[0] / n, axis[1] / n, axis[2] / n]
}

impl LorentzTransform {
    pub fn identity() -> Self {
        Self {
            spinor: Biquaternion::ONE,
        }
    }

    /// Right-handed rotation by `angle` radians about `axis`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let n = unit_axis(axis);
        let (s, c) = (0.5 * angle).sin_cos();
        Self {
            spinor: Biquaternion::real(c, s * n[0], s * n[1], s * n[2]),
        }
    }

    /// Pure boost along `axis` with the given rapidity.
    pub fn boost(axis: [f64; 3], rapidity: f64) -> Self {
        let n = unit_axis(axis);
        let (c, s) = ((0.5 * rapidity).cosh(), (0.5 * rapidity).sinh());
        Self {
            spinor: Biquaternion::new(
                c.into(),
                Complex64::new(0.0, s * n[0]),
                Complex64::new(0.0, s * n[1]),
                Complex64::new(0.0, s * n[2]),
            ),
        }
    }

    /// Rotation and boost combined in the requested order.
    pub fn from_parts(
        rotation_axis: [f64; 3],
        angle: f64,
        boost_axis: [f64; 3],
        rapidity: f64,
        order: CompositionOrder,
    ) -> Self {
        let r = Self::rotation(rotation_axis, angle);
        let b = Self::boost(boost_axis, rapidity);
        match order {
            CompositionOrder::RotateThenBoost => b.compose(&r),
            CompositionOrder::BoostThenRotate => r.compose(&b),
        }
    }

    /// Builds a transform from a spinor, renormalising so that `L L‡ = 1`.
    /// Returns `None` for null or non-finite input.
    pub fn from_spinor(spinor: Biquaternion) -> Option<Self> {
        let n = spinor.norm_form();
        if !spinor.is_finite() || n.norm() < 1e-300 {
            return None;
        }
        Some(Self {
            spinor: spinor.scale(n.sqrt().inv()),
        })
    }

    /// Accepts a spinor that is already unit (`|L L‡ − 1| ≤ 1e-12`) without
    /// renormalising it, so stored transforms read back bit for bit.
    pub fn from_unit_spinor(spinor: Biquaternion) -> Option<Self> {
        if !spinor.is_finite() || (spinor.norm_form() - C1).norm() > 1e-12 {
            return None;
        }
        Some(Self { spinor })
    }

    #[inline]
    pub fn spinor(&self) -> Biquaternion {
        self.spinor
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &LorentzTransform) -> LorentzTransform {
        LorentzTransform {
            spinor: self.spinor * first.spinor,
        }
    }

    pub fn inverse(&self) -> LorentzTransform {
        LorentzTransform {
            spinor: self.spinor.quat_conj(),
        }
    }

    /// Sandwich action `L q L†` on components and four-vectors.
    #[inline]
    pub fn apply(&self, q: &Biquaternion) -> Biquaternion {
        self.spinor * *q * self.spinor.dagger()
    }

    /// Similarity action `L q L‡` on operator bases.
    #[inline]
    pub fn apply_similarity(&self, q: &Biquaternion) -> Biquaternion {
        self.spinor * *q * self.spinor.quat_conj()
    }

    /// Transforms a real four-vector `(x0, x1, x2, x3)`.
    pub fn apply_four_vector(&self, v: [f64; 4]) -> [f64; 4] {
        self.apply(&Biquaternion::from_four_vector(v)).to_four_vector()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.spinor.max_abs_diff(&Biquaternion::ONE) <= tol
            || self.spinor.max_abs_diff(&(-Biquaternion::ONE)) <= tol
    }
}

/// `apply_Z` under its operation name: the sandwich action.
#[inline]
pub fn apply_z(z: &LorentzTransform, q: &Biquaternion) -> Biquaternion {
    z.apply(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_products() {
        let one = Biquaternion::ONE;
        let (i1, i2, i3) = (Biquaternion::I1, Biquaternion::I2, Biquaternion::I3);
        assert_eq!(i1 * i2, i3);
        assert_eq!(i2 * i3, i1);
        assert_eq!(i3 * i1, i2);
        assert_eq!(i2 * i1, -i3);
        assert_eq!(i1 * i1, -one);
        let q = Biquaternion::new(c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(4.0, -4.0));
        assert_eq!(one * q, q);
        assert_eq!(q * one, q);
    }

    #[test]
    fn quat_conj_product_is_scalar() {
        let q = Biquaternion::new(c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(4.0, -4.0));
        let p = q * q.quat_conj();
        assert_eq!(p.x, C0);
        assert_eq!(p.y, C0);
        assert_eq!(p.z, C0);
        assert!((p.w - q.norm_form()).norm() < 1e-12);
    }

    #[test]
    fn dagger_examples() {
        let w = Biquaternion::real(2.5, 0.0, 0.0, 0.0);
        assert_eq!(w.dagger(), w);
        let q = Biquaternion::vector(CI, C0, C0);
        assert_eq!(q.dagger(), q);
        let r = Biquaternion::new(c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(4.0, -4.0));
        assert_eq!(r.dagger().dagger(), r);
    }

    #[test]
    fn reflector_examples() {
        let x = VersatileMatrix::new(Biquaternion::ONE, Biquaternion::ONE);
        let d = reflector_mul(&x, &x);
        assert_eq!(d, DiagonalMatrix::new(Biquaternion::ONE, Biquaternion::ONE));
        let y = VersatileMatrix::new(Biquaternion::I1, Biquaternion::I1);
        let d = reflector_mul(&y, &y);
        assert_eq!(d, DiagonalMatrix::new(-Biquaternion::ONE, -Biquaternion::ONE));
        let back = d.mul_reflector(&y);
        assert_eq!(back, VersatileMatrix::new(-Biquaternion::I1, -Biquaternion::I1));
    }

    #[test]
    fn inverse_of_unit_and_null() {
        let q = Biquaternion::real(1.0, 2.0, -1.0, 0.5);
        let inv = q.inverse().unwrap();
        assert!((q * inv).max_abs_diff(&Biquaternion::ONE) < 1e-15);
        // 1 + i i1 is null: (1)² + (i)² = 0
        let null = Biquaternion::new(C1, CI, C0, C0);
        assert!(null.inverse().is_none());
    }

    #[test]
    fn rotation_by_pi_about_axis_three() {
        let z = LorentzTransform::rotation([0.0, 0.0, 1.0], PI);
        let out = z.apply(&Biquaternion::I1);
        assert!(out.max_abs_diff(&(-Biquaternion::I1)) < 1e-15);
    }

    #[test]
    fn quarter_turn_rotates_four_vector() {
        let z = LorentzTransform::rotation([0.0, 0.0, 1.0], PI / 2.0);
        let v = z.apply_four_vector([0.3, 1.0, 0.0, 0.0]);
        let expect = [0.3, 0.0, 1.0, 0.0];
        for k in 0..4 {
            assert!((v[k] - expect[k]).abs() < 1e-15, "{v:?}");
        }
    }

    #[test]
    fn boost_mixes_time_and_axis() {
        let phi = 0.7_f64;
        let z = LorentzTransform::boost([1.0, 0.0, 0.0], phi);
        let v = z.apply_four_vector([1.0, 0.0, 0.0, 0.0]);
        assert!((v[0] - phi.cosh()).abs() < 1e-14);
        assert!((v[1] - phi.sinh()).abs() < 1e-14);
        assert!(v[2].abs() < 1e-15 && v[3].abs() < 1e-15);
    }

    #[test]
    fn identity_and_round_trip() {
        let q = Biquaternion::new(c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(4.0, -4.0));
        assert_eq!(LorentzTransform::identity().apply(&q), q);
        let z = LorentzTransform::from_parts(
            [1.0, 2.0, 3.0],
            1.1,
            [0.0, 1.0, -1.0],
            1.3,
            CompositionOrder::BoostThenRotate,
        );
        let back = z.inverse().apply(&z.apply(&q));
        assert!(back.max_abs_diff(&q) < 1e-12);
    }

    #[test]
    fn composition_order_matters() {
        let a = LorentzTransform::from_parts(
            [0.0, 0.0, 1.0],
            0.9,
            [1.0, 0.0, 0.0],
            0.8,
            CompositionOrder::RotateThenBoost,
        );
        let b = LorentzTransform::from_parts(
            [0.0, 0.0, 1.0],
            0.9,
            [1.0, 0.0, 0.0],
            0.8,
            CompositionOrder::BoostThenRotate,
        );
        assert!(a.spinor().max_abs_diff(&b.spinor()) > 1e-3);
    }

    #[test]
    fn from_spinor_normalises() {
        let z = LorentzTransform::from_spinor(Biquaternion::real(2.0, 0.0, 0.0, 2.0)).unwrap();
        assert!((z.spinor().norm_form() - C1).norm() < 1e-15);
        assert!(LorentzTransform::from_spinor(Biquaternion::ZERO).is_none());
    }
}
