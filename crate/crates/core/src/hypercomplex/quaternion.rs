use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ring::{RingKind, StarRing};
use super::CMatrix;
use crate::error::{Error, Result};

/// Real quaternion `re + i·i + j·j + k·k` with `i² = j² = k² = ijk = −1`.
///
/// Serialized as the JSON array `[re, i, j, k]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub re: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(re: f64, i: f64, j: f64, k: f64) -> Self {
        Quaternion { re, i, j, k }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.re, self.i, self.j, self.k]
    }

    /// `ã`: negates the imaginary components.
    pub fn conj(self) -> Self {
        Quaternion::new(self.re, -self.i, -self.j, -self.k)
    }

    /// `ãa = aã = re² + i² + j² + k²`.
    pub fn norm_sq(self) -> f64 {
        self.re * self.re + self.i * self.i + self.j * self.j + self.k * self.k
    }

    pub fn try_inv(self) -> Result<Self> {
        let n = self.norm_sq();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroDivision);
        }
        Ok(self.conj().scale(1.0 / n))
    }
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.to_array()
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Self) -> Self {
        Quaternion::new(self.re + o.re, self.i + o.i, self.j + o.j, self.k + o.k)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Self) -> Self {
        Quaternion::new(self.re - o.re, self.i - o.i, self.j - o.j, self.k - o.k)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Self {
        Quaternion::new(-self.re, -self.i, -self.j, -self.k)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self, o);
        Quaternion::new(
            a.re * b.re - a.i * b.i - a.j * b.j - a.k * b.k,
            a.re * b.i + a.i * b.re + a.j * b.k - a.k * b.j,
            a.re * b.j - a.i * b.k + a.j * b.re + a.k * b.i,
            a.re * b.k + a.i * b.j - a.j * b.i + a.k * b.re,
        )
    }
}

impl StarRing for Quaternion {
    const KIND: RingKind = RingKind::Quaternion;
    const REP_DIM: usize = 2;

    fn zero() -> Self {
        Quaternion::default()
    }

    fn one() -> Self {
        Quaternion::ONE
    }

    fn from_real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }

    fn scale(&self, s: f64) -> Self {
        Quaternion::new(self.re * s, self.i * s, self.j * s, self.k * s)
    }

    fn tilde(&self) -> Self {
        self.conj()
    }

    fn scalar_part(&self) -> Complex64 {
        Complex64::new(self.re, 0.0)
    }

    // 1 ↦ I, i ↦ diag(i, −i), j ↦ [[0, 1], [−1, 0]], k ↦ [[0, i], [i, 0]]
    fn rep(&self) -> CMatrix {
        let alpha = Complex64::new(self.re, self.i);
        let beta = Complex64::new(self.j, self.k);
        CMatrix::from_row_slice(2, 2, &[alpha, beta, -beta.conj(), alpha.conj()])
    }

    fn from_rep(m: &CMatrix) -> Self {
        let alpha = (m[(0, 0)] + m[(1, 1)].conj()) * 0.5;
        let beta = (m[(0, 1)] - m[(1, 0)].conj()) * 0.5;
        Quaternion::new(alpha.re, alpha.im, beta.re, beta.im)
    }

    fn metric() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    fn coeff_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn inverse(&self) -> Option<Self> {
        self.try_inv().ok()
    }

    fn is_invertible(&self, _rel_tol: f64) -> bool {
        self.norm_sq() > 0.0
    }

    fn normalizer(s: &Self, tol: f64) -> Option<(Self, f64)> {
        if !s.is_real(tol) || s.re.abs() <= tol {
            return None;
        }
        Some((Quaternion::from_real(1.0 / s.re.abs().sqrt()), s.re.signum()))
    }
}
