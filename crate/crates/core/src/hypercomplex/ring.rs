use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CMatrix;

/// Tag naming a concrete star-ring; used by the JSON file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingKind {
    Quaternion,
    Clifford,
}

impl std::fmt::Display for RingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RingKind::Quaternion => f.write_str("quaternion"),
            RingKind::Clifford => f.write_str("clifford"),
        }
    }
}

/// An associative unital algebra over the reals with a conjugate-linear
/// anti-multiplicative involution (`tilde`), a scalar-part functional and a
/// faithful `REP_DIM`-dimensional complex matrix representation.
///
/// The representation intertwines the involution with the matrix adjoint:
/// `rep(tilde(a)) = g · rep(a)ᴴ · g` where `g = Self::metric()` is a
/// Hermitian involutory matrix (`g² = 1`).
pub trait StarRing:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<Output = Self>
    + Serialize
    + DeserializeOwned
    + 'static
{
    const KIND: RingKind;
    /// Dimension of the complex matrix representation.
    const REP_DIM: usize;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn scale(&self, s: f64) -> Self;

    /// The involution `a ↦ ã`.
    fn tilde(&self) -> Self;

    /// Coefficient of the unit element (real for quaternions).
    fn scalar_part(&self) -> Complex64;

    fn rep(&self) -> CMatrix;

    /// Orthogonal projection of a `REP_DIM × REP_DIM` matrix onto the image of
    /// `rep`, pulled back to the ring. Exact inverse of `rep` on its image.
    fn from_rep(m: &CMatrix) -> Self;

    /// The matrix `g` with `rep(ã) = g rep(a)ᴴ g`.
    fn metric() -> CMatrix;

    /// Euclidean norm of the coefficient vector.
    fn coeff_norm(&self) -> f64;

    /// Two-sided inverse, if the element is invertible.
    fn inverse(&self) -> Option<Self>;

    /// Invertibility judged by the relative smallest singular value of `rep`.
    fn is_invertible(&self, rel_tol: f64) -> bool {
        let r = self.rep();
        let sv = r.singular_values();
        let max = sv.max();
        max > 0.0 && sv.min() > rel_tol * max
    }

    /// Finds `c` with `c̃ · s · c = ε` for a self-involutive `s`, where
    /// `ε = sign(scalar_part(s))`. Returns `None` when `s` is not invertible,
    /// has vanishing scalar part, or cannot be brought to `±1`.
    fn normalizer(s: &Self, tol: f64) -> Option<(Self, f64)>;

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (*self - *other).coeff_norm() <= tol
    }

    fn is_real(&self, tol: f64) -> bool {
        let s = self.scalar_part();
        (*self - Self::from_real(s.re)).coeff_norm() <= tol * (1.0 + s.re.abs())
    }
}
