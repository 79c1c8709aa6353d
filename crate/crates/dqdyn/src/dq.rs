//! Quaternion and dual quaternion arithmetic.
//!
//! Everything downstream (chain recursions, subsystem composition, control)
//! is written in this algebra. Three families of values appear:
//!
//! * [`Quaternion`]: plain Hamilton quaternions, `w + x î + y ĵ + z k̂`.
//! * [`DualQuaternion`]: `primary + ε dual` with `ε² = 0`. Twists and
//!   wrenches are *pure* dual quaternions (both real parts zero); the crate
//!   exposes the [`Twist`] and [`Wrench`] aliases for readability.
//! * [`Pose`]: unit dual quaternions representing rigid transformations,
//!   with the frame-change [`Pose::adjoint`] and the logarithm used by the
//!   pose controller.
//!
//! Coefficient layout is fixed everywhere: eight reals ordered
//! `(primary w,x,y,z, dual w,x,y,z)`; [`DualQuaternion::vec6`] drops the two
//! real slots and keeps `(primary x,y,z, dual x,y,z)`.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Largest acceptable real part for a value that must be pure.
pub const PURITY_TOL: f64 = 1e-9;
/// Largest acceptable unit-norm defect when accepting a pose.
pub const UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    /// The norm decomposition needs a nonzero primary part.
    #[error("dual quaternion has (near-)zero primary part; dual norm undefined")]
    ZeroPrimary,
    /// A pose was expected but the unit-norm defect exceeds the tolerance.
    #[error("dual quaternion is not unit (defect {defect:.3e})")]
    NotUnit { defect: f64 },
    /// A pure dual quaternion was expected but a real part is too large.
    #[error("dual quaternion is not pure (real parts {primary:.3e}, {dual:.3e})")]
    NotPure { primary: f64, dual: f64 },
    /// `adjoint_n` over an empty pose vector.
    #[error("empty pose vector")]
    EmptyVector,
}

// ---------------------------------------------------------------------------
// Quaternion
// ---------------------------------------------------------------------------

/// Hamilton quaternion `w + x î + y ĵ + z k̂` with `î² = ĵ² = k̂² = îĵk̂ = −1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Pure quaternion `x î + y ĵ + z k̂` (zero real part).
    pub const fn pure(x: f64, y: f64, z: f64) -> Self {
        Self::new(0.0, x, y, z)
    }

    pub fn re(&self) -> f64 {
        self.w
    }

    pub fn imag(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn conj(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Self {
        *self * (1.0 / self.norm())
    }

    /// Commutator cross product `(ab − ba)/2`; equals the 3-vector cross
    /// product on pure quaternions.
    pub fn cross(&self, other: &Self) -> Self {
        (*self * *other - *other * *self) * 0.5
    }

    /// Rotates a (pure) quaternion by this rotation: `r v r*`.
    pub fn rotate(&self, v: &Self) -> Self {
        *self * *v * self.conj()
    }

    /// Rotation quaternion for angle `angle` about the unit axis `(x, y, z)`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let [x, y, z] = axis;
        let n = (x * x + y * y + z * z).sqrt();
        if n < 1e-300 {
            return Self::ONE;
        }
        let (s, c) = ((angle / 2.0).sin(), (angle / 2.0).cos());
        Self::new(c, s * x / n, s * y / n, s * z / n)
    }

    /// Rotation from a rotation vector (axis scaled by angle).
    pub fn from_rotation_vector(v: [f64; 3]) -> Self {
        let angle = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        Self::from_axis_angle(v, angle)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Self::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

// ---------------------------------------------------------------------------
// Dual quaternion
// ---------------------------------------------------------------------------

/// Dual quaternion `primary + ε dual` with `ε ≠ 0`, `ε² = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DualQuaternion {
    pub primary: Quaternion,
    pub dual: Quaternion,
}

/// Velocity screw: angular velocity in the primary part, linear velocity in
/// the dual part. Pure by convention.
pub type Twist = DualQuaternion;

/// Force screw: force in the primary part, moment in the dual part. Pure by
/// convention.
pub type Wrench = DualQuaternion;

/// Dual number `real + ε dual`, the value of a dual quaternion norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualNumber {
    pub real: f64,
    pub dual: f64,
}

impl DualQuaternion {
    pub const ZERO: Self = Self::new(Quaternion::ZERO, Quaternion::ZERO);
    pub const ONE: Self = Self::new(Quaternion::ONE, Quaternion::ZERO);

    pub const fn new(primary: Quaternion, dual: Quaternion) -> Self {
        Self { primary, dual }
    }

    /// Pure dual quaternion from two imaginary 3-vectors.
    pub fn from_imag(primary: [f64; 3], dual: [f64; 3]) -> Self {
        Self::new(
            Quaternion::pure(primary[0], primary[1], primary[2]),
            Quaternion::pure(dual[0], dual[1], dual[2]),
        )
    }

    /// `𝒫(h)`, the primary part.
    pub fn primary(&self) -> Quaternion {
        self.primary
    }

    /// `𝒟(h)`, the dual part.
    pub fn dual(&self) -> Quaternion {
        self.dual
    }

    /// Quaternion conjugation of both parts.
    pub fn conj(&self) -> Self {
        Self::new(self.primary.conj(), self.dual.conj())
    }

    /// Exchanges primary and dual parts.
    pub fn swap(&self) -> Self {
        Self::new(self.dual, self.primary)
    }

    /// Largest real-part magnitude; zero for exactly pure values.
    pub fn purity_defect(&self) -> f64 {
        self.primary.w.abs().max(self.dual.w.abs())
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.purity_defect() <= tol
    }

    /// Dual norm `‖h‖ = a + εb` with `a = |h_P|`, `b = ⟨h_P, h_D⟩ / |h_P|`.
    pub fn norm(&self) -> Result<DualNumber, AlgebraError> {
        let a = self.primary.norm();
        if a < 1e-14 {
            return Err(AlgebraError::ZeroPrimary);
        }
        Ok(DualNumber {
            real: a,
            dual: self.primary.dot(&self.dual) / a,
        })
    }

    /// Commutator cross product `(ab − ba)/2`.
    pub fn cross(&self, other: &Self) -> Self {
        (*self * *other - *other * *self) * 0.5
    }

    /// Maps a pure dual quaternion to ℝ⁶: primary imaginary parts first,
    /// then dual imaginary parts.
    pub fn vec6(&self) -> Result<[f64; 6], AlgebraError> {
        if !self.is_pure(PURITY_TOL) {
            return Err(AlgebraError::NotPure {
                primary: self.primary.w,
                dual: self.dual.w,
            });
        }
        Ok([
            self.primary.x,
            self.primary.y,
            self.primary.z,
            self.dual.x,
            self.dual.y,
            self.dual.z,
        ])
    }

    /// Inverse of [`vec6`](Self::vec6).
    pub fn from_vec6(v: [f64; 6]) -> Self {
        Self::from_imag([v[0], v[1], v[2]], [v[3], v[4], v[5]])
    }

    pub fn coeffs(&self) -> [f64; 8] {
        [
            self.primary.w,
            self.primary.x,
            self.primary.y,
            self.primary.z,
            self.dual.w,
            self.dual.x,
            self.dual.y,
            self.dual.z,
        ]
    }

    pub fn from_coeffs(c: [f64; 8]) -> Self {
        Self::new(
            Quaternion::new(c[0], c[1], c[2], c[3]),
            Quaternion::new(c[4], c[5], c[6], c[7]),
        )
    }
}

impl From<Quaternion> for DualQuaternion {
    fn from(q: Quaternion) -> Self {
        Self::new(q, Quaternion::ZERO)
    }
}

impl Add for DualQuaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.primary + rhs.primary, self.dual + rhs.dual)
    }
}

impl Sub for DualQuaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.primary - rhs.primary, self.dual - rhs.dual)
    }
}

impl Neg for DualQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.primary, -self.dual)
    }
}

impl Mul for DualQuaternion {
    type Output = Self;
    /// Product respecting `ε² = 0`: the dual part is
    /// `a_P b_D + a_D b_P`.
    fn mul(self, r: Self) -> Self {
        Self::new(
            self.primary * r.primary,
            self.primary * r.dual + self.dual * r.primary,
        )
    }
}

impl Mul<f64> for DualQuaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.primary * s, self.dual * s)
    }
}

// ---------------------------------------------------------------------------
// Pose (unit dual quaternion)
// ---------------------------------------------------------------------------

/// Unit dual quaternion `x = r + ε (1/2) p r` encoding a rotation `r` and a
/// translation `p`; element of Spin(3)⋉ℝ³.
///
/// Construction goes through checked or by-parts constructors so that a
/// `Pose` value always satisfies the unit-norm invariant (within
/// [`UNIT_TOL`]). Long products drift; [`Pose::renormalized`] projects back.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    dq: DualQuaternion,
}

impl Pose {
    pub const IDENTITY: Self = Self {
        dq: DualQuaternion::ONE,
    };

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    /// Accepts a dual quaternion as a pose if its unit defect is within
    /// [`UNIT_TOL`].
    pub fn new(dq: DualQuaternion) -> Result<Self, AlgebraError> {
        let defect = unit_defect(&dq);
        if defect > UNIT_TOL {
            return Err(AlgebraError::NotUnit { defect });
        }
        Ok(Self { dq })
    }

    /// Builds `r + ε (1/2) p r` from a unit rotation quaternion and a pure
    /// translation quaternion.
    pub fn from_rotation_translation(r: Quaternion, p: Quaternion) -> Self {
        let r = r.normalized();
        let p = Quaternion::pure(p.x, p.y, p.z);
        Self {
            dq: DualQuaternion::new(r, p * r * 0.5),
        }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::from_rotation_translation(Quaternion::ONE, Quaternion::pure(x, y, z))
    }

    pub fn from_rotation_x(angle: f64) -> Self {
        Self::from_rotation_translation(
            Quaternion::from_axis_angle([1.0, 0.0, 0.0], angle),
            Quaternion::ZERO,
        )
    }

    pub fn from_rotation_y(angle: f64) -> Self {
        Self::from_rotation_translation(
            Quaternion::from_axis_angle([0.0, 1.0, 0.0], angle),
            Quaternion::ZERO,
        )
    }

    pub fn from_rotation_z(angle: f64) -> Self {
        Self::from_rotation_translation(
            Quaternion::from_axis_angle([0.0, 0.0, 1.0], angle),
            Quaternion::ZERO,
        )
    }

    /// Inverse of [`Pose::log`]: rotation by `2|h_P|` about `h_P`, translation
    /// `2 h_D`.
    pub fn from_log(h: DualQuaternion) -> Self {
        let r = Quaternion::from_rotation_vector([
            2.0 * h.primary.x,
            2.0 * h.primary.y,
            2.0 * h.primary.z,
        ]);
        let p = Quaternion::pure(2.0 * h.dual.x, 2.0 * h.dual.y, 2.0 * h.dual.z);
        Self::from_rotation_translation(r, p)
    }

    pub fn as_dual_quaternion(&self) -> DualQuaternion {
        self.dq
    }

    pub fn coeffs(&self) -> [f64; 8] {
        self.dq.coeffs()
    }

    pub fn from_coeffs(c: [f64; 8]) -> Result<Self, AlgebraError> {
        Self::new(DualQuaternion::from_coeffs(c))
    }

    /// Rotation part `r`.
    pub fn rotation(&self) -> Quaternion {
        self.dq.primary
    }

    /// Translation part `p = 2 h_D h_P*` as a pure quaternion.
    pub fn translation(&self) -> Quaternion {
        let p = self.dq.dual * 2.0 * self.dq.primary.conj();
        Quaternion::pure(p.x, p.y, p.z)
    }

    pub fn conj(&self) -> Self {
        Self {
            dq: self.dq.conj(),
        }
    }

    /// Frame change `x a x*` of a pure dual quaternion; preserves purity and
    /// the primary-part norm.
    pub fn adjoint(&self, a: &DualQuaternion) -> DualQuaternion {
        self.dq * *a * self.dq.conj()
    }

    /// Unit-norm defect `max(| |h_P| − 1 |, |⟨h_P, h_D⟩|)`.
    pub fn unit_defect(&self) -> f64 {
        unit_defect(&self.dq)
    }

    /// Projects back onto the unit dual quaternions, keeping the encoded
    /// rotation and translation.
    pub fn renormalized(&self) -> Self {
        let r = self.dq.primary.normalized();
        let scale = 1.0 / self.dq.primary.norm();
        let p = self.dq.dual * 2.0 * scale * r.conj();
        Self::from_rotation_translation(r, Quaternion::pure(p.x, p.y, p.z))
    }

    /// Logarithm `(φ n + ε p) / 2` with `r = cos(φ/2) + n sin(φ/2)` and `p`
    /// the translation. `φ` is taken in `[0, 2π)` via `atan2`; at `φ = 0` the
    /// undefined axis is replaced by the zero vector so `φ n = 0`.
    pub fn log(&self) -> DualQuaternion {
        let r = self.dq.primary;
        let im_norm = (r.x * r.x + r.y * r.y + r.z * r.z).sqrt();
        let phi = 2.0 * im_norm.atan2(r.w);
        let rot = if im_norm < 1e-12 {
            Quaternion::ZERO
        } else {
            Quaternion::pure(r.x / im_norm, r.y / im_norm, r.z / im_norm) * phi
        };
        DualQuaternion::new(rot * 0.5, self.translation() * 0.5)
    }
}

impl Mul for Pose {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self {
            dq: self.dq * rhs.dq,
        }
    }
}

fn unit_defect(dq: &DualQuaternion) -> f64 {
    let n = dq.primary.norm();
    let ortho = dq.primary.dot(&dq.dual);
    (n - 1.0).abs().max(ortho.abs())
}

/// Element-wise adjoint `[Ad(x₁)a, …, Ad(xₙ)a]`.
pub fn adjoint_n(poses: &[Pose], a: &DualQuaternion) -> Result<Vec<DualQuaternion>, AlgebraError> {
    if poses.is_empty() {
        return Err(AlgebraError::EmptyVector);
    }
    Ok(poses.iter().map(|x| x.adjoint(a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn dq_close(a: &DualQuaternion, b: &DualQuaternion, tol: f64) -> bool {
        a.coeffs()
            .iter()
            .zip(b.coeffs().iter())
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn quaternion_basis_products() {
        assert_eq!(Quaternion::I * Quaternion::I, -Quaternion::ONE);
        assert_eq!(Quaternion::J * Quaternion::J, -Quaternion::ONE);
        assert_eq!(Quaternion::K * Quaternion::K, -Quaternion::ONE);
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::K, Quaternion::I);
        assert_eq!(Quaternion::I * Quaternion::J * Quaternion::K, -Quaternion::ONE);
    }

    #[test]
    fn quaternion_norm_is_multiplicative() {
        let a = Quaternion::new(0.3, -1.2, 0.7, 2.0);
        let b = Quaternion::new(-0.5, 0.4, 1.1, -0.2);
        assert!(((a * b).norm() - a.norm() * b.norm()).abs() < EPS);
    }

    #[test]
    fn dual_unit_kills_cross_term() {
        // (1 + ε î)(1 + ε ĵ) = 1 + ε(î + ĵ)
        let a = DualQuaternion::new(Quaternion::ONE, Quaternion::I);
        let b = DualQuaternion::new(Quaternion::ONE, Quaternion::J);
        let expect = DualQuaternion::new(Quaternion::ONE, Quaternion::I + Quaternion::J);
        assert_eq!(a * b, expect);
    }

    #[test]
    fn dual_product_matches_coefficient_expansion() {
        let a = DualQuaternion::new(
            Quaternion::new(0.1, 0.2, -0.3, 0.4),
            Quaternion::new(-1.0, 0.5, 0.6, -0.7),
        );
        let b = DualQuaternion::new(
            Quaternion::new(1.1, -0.2, 0.9, 0.3),
            Quaternion::new(0.4, 0.8, -0.6, 0.2),
        );
        let ab = a * b;
        assert_eq!(ab.primary, a.primary * b.primary);
        assert_eq!(ab.dual, a.primary * b.dual + a.dual * b.primary);
    }

    #[test]
    fn identity_is_neutral() {
        let h = DualQuaternion::new(
            Quaternion::new(0.3, 1.0, -2.0, 0.5),
            Quaternion::new(-0.1, 0.2, 0.3, 0.4),
        );
        assert_eq!(DualQuaternion::ONE * h, h);
        assert_eq!(h * DualQuaternion::ONE, h);
    }

    #[test]
    fn conj_examples() {
        assert_eq!(DualQuaternion::ONE.conj(), DualQuaternion::ONE);
        let h = DualQuaternion::new(Quaternion::I, Quaternion::J);
        assert_eq!(h.conj(), DualQuaternion::new(-Quaternion::I, -Quaternion::J));
    }

    #[test]
    fn pose_times_conj_is_one() {
        let x = Pose::from_rotation_translation(
            Quaternion::from_axis_angle([0.3, -0.5, 0.8], 1.1),
            Quaternion::pure(0.4, -1.2, 2.0),
        );
        let prod = x.as_dual_quaternion() * x.conj().as_dual_quaternion();
        assert!(dq_close(&prod, &DualQuaternion::ONE, 1e-10));
    }

    #[test]
    fn norm_examples() {
        let pose = Pose::from_rotation_translation(
            Quaternion::from_axis_angle([0.0, 0.0, 1.0], 0.7),
            Quaternion::pure(1.0, 2.0, 3.0),
        );
        let n = pose.as_dual_quaternion().norm().unwrap();
        assert!((n.real - 1.0).abs() < EPS && n.dual.abs() < EPS);

        let two = DualQuaternion::from(Quaternion::ONE * 2.0);
        let n = two.norm().unwrap();
        assert!((n.real - 2.0).abs() < EPS && n.dual.abs() < EPS);

        // r = 1, p = 3î: translation dual quaternions are unit.
        let t = Pose::from_translation(3.0, 0.0, 0.0);
        let n = t.as_dual_quaternion().norm().unwrap();
        assert!((n.real - 1.0).abs() < EPS && n.dual.abs() < EPS);

        assert_eq!(
            DualQuaternion::new(Quaternion::ZERO, Quaternion::I).norm(),
            Err(AlgebraError::ZeroPrimary)
        );
    }

    #[test]
    fn swap_examples() {
        let h = DualQuaternion::new(Quaternion::I, Quaternion::J);
        assert_eq!(h.swap(), DualQuaternion::new(Quaternion::J, Quaternion::I));
        assert_eq!(h.swap().swap(), h);
        assert_eq!(DualQuaternion::ZERO.swap(), DualQuaternion::ZERO);
    }

    #[test]
    fn log_identity_is_zero() {
        assert_eq!(Pose::identity().log(), DualQuaternion::ZERO);
    }

    #[test]
    fn log_pure_translation() {
        // x = 1 + ε(1/2)(2k̂) → log = ε k̂
        let x = Pose::from_translation(0.0, 0.0, 2.0);
        let expect = DualQuaternion::new(Quaternion::ZERO, Quaternion::K);
        assert!(dq_close(&x.log(), &expect, EPS));
    }

    #[test]
    fn log_pure_rotation_about_z() {
        // r = cos(π/4) + k̂ sin(π/4): φ = π/2 about z, log = (π/4) k̂.
        let x = Pose::from_rotation_z(std::f64::consts::FRAC_PI_2);
        let expect = DualQuaternion::new(Quaternion::K * std::f64::consts::FRAC_PI_4, Quaternion::ZERO);
        assert!(dq_close(&x.log(), &expect, EPS));
        // Cross-check the angle against the rotation-matrix trace formula.
        let r = x.rotation();
        let trace = 3.0 - 4.0 * (r.x * r.x + r.y * r.y + r.z * r.z);
        let phi = ((trace - 1.0) / 2.0).acos();
        assert!((phi - std::f64::consts::FRAC_PI_2).abs() < EPS);
    }

    #[test]
    fn log_recovers_parameters() {
        let phi = 1.234;
        let axis = [0.48, -0.6, 0.64]; // unit
        let p = Quaternion::pure(0.3, -0.2, 0.9);
        let x = Pose::from_rotation_translation(Quaternion::from_axis_angle(axis, phi), p);
        let l = x.log();
        let rot = l.primary * 2.0;
        assert!((rot.norm() - phi).abs() < 1e-9);
        for (a, b) in rot.imag().iter().zip(axis.iter().map(|c| c * phi)) {
            assert!((a - b).abs() < 1e-9);
        }
        let trans = l.dual * 2.0;
        for (a, b) in trans.imag().iter().zip(p.imag().iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn adjoint_rotates_axes() {
        // 90° about z maps î to ĵ.
        let x = Pose::from_rotation_z(std::f64::consts::FRAC_PI_2);
        let a = DualQuaternion::from(Quaternion::I);
        let out = x.adjoint(&a);
        assert!(dq_close(&out, &DualQuaternion::from(Quaternion::J), 1e-12));
        // 3×3 rotation-matrix oracle for the same map.
        let r = x.rotation();
        let m = quat_to_matrix(&r);
        let v = [1.0, 0.0, 0.0];
        let rv = [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ];
        assert!((rv[0] - out.primary.x).abs() < EPS);
        assert!((rv[1] - out.primary.y).abs() < EPS);
        assert!((rv[2] - out.primary.z).abs() < EPS);
    }

    #[test]
    fn adjoint_identity_leaves_input() {
        let a = DualQuaternion::from_imag([0.1, 0.2, 0.3], [0.4, 0.5, 0.6]);
        assert_eq!(Pose::identity().adjoint(&a), a);
    }

    #[test]
    fn adjoint_n_examples() {
        let a = DualQuaternion::from_imag([1.0, 0.0, 0.0], [0.0, 0.0, 2.0]);
        let ids = [Pose::identity(), Pose::identity(), Pose::identity()];
        let out = adjoint_n(&ids, &a).unwrap();
        assert_eq!(out, vec![a, a, a]);

        let x = Pose::from_rotation_x(0.4);
        let out = adjoint_n(&[x], &a).unwrap();
        assert_eq!(out, vec![x.adjoint(&a)]);

        let zeros = adjoint_n(&[x], &DualQuaternion::ZERO).unwrap();
        assert_eq!(zeros, vec![DualQuaternion::ZERO]);

        assert_eq!(adjoint_n(&[], &a), Err(AlgebraError::EmptyVector));
    }

    #[test]
    fn cross_examples() {
        let i = DualQuaternion::from(Quaternion::I);
        let j = DualQuaternion::from(Quaternion::J);
        let k = DualQuaternion::from(Quaternion::K);
        assert_eq!(i.cross(&j), k);
        let a = DualQuaternion::from_imag([0.3, -0.7, 0.2], [1.0, 0.5, -0.4]);
        assert_eq!(a.cross(&a), DualQuaternion::ZERO);
        let b = DualQuaternion::from_imag([-0.2, 0.6, 0.9], [0.1, -0.3, 0.8]);
        assert!(dq_close(&a.cross(&b), &-(b.cross(&a)), EPS));
    }

    #[test]
    fn vec6_examples() {
        let h = DualQuaternion::new(Quaternion::I, Quaternion::K);
        assert_eq!(h.vec6().unwrap(), [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(DualQuaternion::ZERO.vec6().unwrap(), [0.0; 6]);
        assert_eq!(
            DualQuaternion::from(Quaternion::J * 2.0).vec6().unwrap(),
            [0.0, 2.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert!(DualQuaternion::ONE.vec6().is_err());
    }

    #[test]
    fn get_parts() {
        let h = DualQuaternion::new(Quaternion::I, Quaternion::J);
        assert_eq!(h.primary(), Quaternion::I);
        assert_eq!(h.dual(), Quaternion::J);
        assert_eq!(DualQuaternion::ZERO.primary(), Quaternion::ZERO);
    }

    #[test]
    fn renormalized_recovers_unit() {
        let x = Pose::from_rotation_translation(
            Quaternion::from_axis_angle([0.0, 1.0, 0.0], 0.8),
            Quaternion::pure(1.0, 2.0, -0.5),
        );
        let drifted = DualQuaternion::new(x.as_dual_quaternion().primary * (1.0 + 3e-7),
                                          x.as_dual_quaternion().dual);
        let fixed = Pose::new(drifted).unwrap().renormalized();
        assert!(fixed.unit_defect() < 1e-14);
        // The encoded transformation is preserved.
        assert!((fixed.translation() - x.translation()).norm() < 1e-6);
    }

    #[test]
    fn pose_rejects_non_unit() {
        let bad = DualQuaternion::new(Quaternion::ONE * 1.1, Quaternion::ZERO);
        assert!(matches!(Pose::new(bad), Err(AlgebraError::NotUnit { .. })));
    }

    fn quat_to_matrix(r: &Quaternion) -> [[f64; 3]; 3] {
        let (w, x, y, z) = (r.w, r.x, r.y, r.z);
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }
}
