//! The complexified spacetime Clifford algebra Cl(1,3) ≅ M₄(ℂ).
//!
//! Elements are stored as 16 complex coefficients against the blade basis
//!
//! ```text
//! 1; γ0, γ1, γ2, γ3; γ0γ1, γ0γ2, γ0γ3, γ1γ2, γ1γ3, γ2γ3;
//! γ0γ1γ2, γ0γ1γ3, γ0γ2γ3, γ1γ2γ3; γ5 = γ0γ1γ2γ3
//! ```
//!
//! with `γμγν + γνγμ = 2ημν`, `η = diag(+1, −1, −1, −1)`. Products are
//! computed from the blade table; the Dirac representation is used only for
//! `rep`/`from_rep` and the normalizer.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ring::{RingKind, StarRing};
use super::CMatrix;

pub const BLADE_COUNT: usize = 16;

/// Generator bitmask of each blade, in canonical order (bit μ ↔ γμ).
const BLADE_MASKS: [u8; BLADE_COUNT] = [
    0b0000, 0b0001, 0b0010, 0b0100, 0b1000, 0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100,
    0b0111, 0b1011, 0b1101, 0b1110, 0b1111,
];

pub const BLADE_LABELS: [&str; BLADE_COUNT] = [
    "1", "g0", "g1", "g2", "g3", "g0g1", "g0g2", "g0g3", "g1g2", "g1g3", "g2g3", "g0g1g2",
    "g0g1g3", "g0g2g3", "g1g2g3", "g5",
];

const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

fn index_of_mask(mask: u8) -> usize {
    BLADE_MASKS
        .iter()
        .position(|&m| m == mask)
        .expect("every 4-bit mask is a blade")
}

pub fn blade_grade(index: usize) -> u32 {
    BLADE_MASKS[index].count_ones()
}

fn mask_product(a: u8, b: u8) -> (f64, u8) {
    // reorder sign: one transposition per pair (x in a, y in b) with x > y
    let mut swaps = 0;
    for x in 0..4 {
        if a & (1 << x) != 0 {
            swaps += (b & ((1u8 << x) - 1)).count_ones();
        }
    }
    let mut sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
    for (g, eta) in METRIC.iter().enumerate() {
        if a & b & (1 << g) != 0 {
            sign *= eta;
        }
    }
    (sign, a ^ b)
}

fn table() -> &'static [[(f64, usize); BLADE_COUNT]; BLADE_COUNT] {
    static TABLE: OnceLock<[[(f64, usize); BLADE_COUNT]; BLADE_COUNT]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[(0.0, 0); BLADE_COUNT]; BLADE_COUNT];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let (s, m) = mask_product(BLADE_MASKS[i], BLADE_MASKS[j]);
                *cell = (s, index_of_mask(m));
            }
        }
        t
    })
}

/// Product of two basis blades: `(sign, index)` with `e_a e_b = sign · e_index`.
pub fn blade_product(a: usize, b: usize) -> (f64, usize) {
    table()[a][b]
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gamma_matrix(mu: usize) -> CMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let rows: [Complex64; 16] = match mu {
        0 => [one, z, z, z, z, one, z, z, z, z, -one, z, z, z, z, -one],
        // [[0, σk], [−σk, 0]]
        1 => [z, z, z, one, z, z, one, z, z, -one, z, z, -one, z, z, z],
        2 => [z, z, z, -i, z, z, i, z, z, i, z, z, -i, z, z, z],
        3 => [z, z, one, z, z, z, z, -one, -one, z, z, z, z, one, z, z],
        _ => unreachable!("gamma index out of range"),
    };
    CMatrix::from_row_slice(4, 4, &rows)
}

fn blade_reps() -> &'static [CMatrix] {
    static REPS: OnceLock<Vec<CMatrix>> = OnceLock::new();
    REPS.get_or_init(|| {
        BLADE_MASKS
            .iter()
            .map(|&mask| {
                let mut m = CMatrix::identity(4, 4);
                for mu in 0..4 {
                    if mask & (1 << mu) != 0 {
                        m *= gamma_matrix(mu);
                    }
                }
                m
            })
            .collect()
    })
}

/// Element of the complexified Clifford algebra Cl(1,3).
///
/// Serialized as 16 `[re, im]` pairs in canonical blade order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct CliffordElement {
    pub coeffs: [Complex64; BLADE_COUNT],
}

impl Default for CliffordElement {
    fn default() -> Self {
        CliffordElement {
            coeffs: [Complex64::new(0.0, 0.0); BLADE_COUNT],
        }
    }
}

impl CliffordElement {
    pub fn new(coeffs: [Complex64; BLADE_COUNT]) -> Self {
        CliffordElement { coeffs }
    }

    /// `value · e_index`.
    pub fn blade(index: usize, value: Complex64) -> Self {
        let mut out = Self::default();
        out.coeffs[index] = value;
        out
    }

    /// The generator γμ, μ ∈ 0..4.
    pub fn gamma(mu: usize) -> Self {
        assert!(mu < 4, "gamma index {mu} out of range");
        Self::blade(1 + mu, c(1.0, 0.0))
    }

    pub fn gamma5() -> Self {
        Self::blade(15, c(1.0, 0.0))
    }

    pub fn complex(z: Complex64) -> Self {
        Self::blade(0, z)
    }

    pub fn scale_complex(&self, z: Complex64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|x| *x *= z);
        out
    }

    /// Complex conjugation of every coefficient, keeping the blades.
    pub fn conj_coeffs(&self) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|x| *x = x.conj());
        out
    }
}

impl TryFrom<Vec<[f64; 2]>> for CliffordElement {
    type Error = String;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        if v.len() != BLADE_COUNT {
            return Err(format!(
                "clifford element needs {BLADE_COUNT} [re, im] pairs, got {}",
                v.len()
            ));
        }
        let mut out = Self::default();
        for (dst, [re, im]) in out.coeffs.iter_mut().zip(v) {
            *dst = c(re, im);
        }
        Ok(out)
    }
}

impl From<CliffordElement> for Vec<[f64; 2]> {
    fn from(a: CliffordElement) -> Self {
        a.coeffs.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl Add for CliffordElement {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.coeffs.iter_mut().zip(o.coeffs).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for CliffordElement {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self.coeffs.iter_mut().zip(o.coeffs).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for CliffordElement {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.coeffs.iter_mut().for_each(|a| *a = -*a);
        self
    }
}

impl Mul for CliffordElement {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let t = table();
        let mut out = Self::default();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                let (sign, k) = t[i][j];
                out.coeffs[k] += a * b * sign;
            }
        }
        out
    }
}

impl StarRing for CliffordElement {
    const KIND: RingKind = RingKind::Clifford;
    const REP_DIM: usize = 4;

    fn zero() -> Self {
        Self::default()
    }

    fn one() -> Self {
        Self::from_real(1.0)
    }

    fn from_real(x: f64) -> Self {
        Self::blade(0, c(x, 0.0))
    }

    fn scale(&self, s: f64) -> Self {
        self.scale_complex(c(s, 0.0))
    }

    /// Conjugate-linear anti-automorphism fixing every γμ: reversion sign
    /// `(−1)^{k(k−1)/2}` on grade-k blades times complex conjugation.
    fn tilde(&self) -> Self {
        let mut out = *self;
        for (idx, z) in out.coeffs.iter_mut().enumerate() {
            let k = blade_grade(idx);
            let sign = if (k * k.saturating_sub(1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            *z = z.conj() * sign;
        }
        out
    }

    fn scalar_part(&self) -> Complex64 {
        self.coeffs[0]
    }

    fn rep(&self) -> CMatrix {
        let reps = blade_reps();
        let mut m = CMatrix::zeros(4, 4);
        for (z, r) in self.coeffs.iter().zip(reps) {
            if z.re != 0.0 || z.im != 0.0 {
                m += r * *z;
            }
        }
        m
    }

    // coefficient_k = tr(rep(e_k)⁻¹ M) / 4 and e_k⁻¹ = e_k · (e_k²)
    fn from_rep(m: &CMatrix) -> Self {
        let reps = blade_reps();
        let mut out = Self::default();
        for (k, r) in reps.iter().enumerate() {
            let (sq, _) = blade_product(k, k);
            out.coeffs[k] = (r * m).trace() * (sq / 4.0);
        }
        out
    }

    fn metric() -> CMatrix {
        gamma_matrix(0)
    }

    fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn inverse(&self) -> Option<Self> {
        if !self.is_invertible(1e-12) {
            return None;
        }
        self.rep().try_inverse().map(|m| Self::from_rep(&m))
    }

    fn normalizer(s: &Self, tol: f64) -> Option<(Self, f64)> {
        let scalar = s.scalar_part().re;
        if scalar.abs() <= tol {
            return None;
        }
        let eps = scalar.signum();
        if s.is_real(tol) {
            return Some((Self::from_real(1.0 / scalar.abs().sqrt()), eps));
        }
        // c̃ s c = ε  ⇔  Cᴴ (g S) C = ε g with g S Hermitian; needs a
        // nondegenerate split signature (2, 2).
        let g = Self::metric();
        let h = &g * s.rep();
        let h = (&h + h.adjoint()) * c(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::new(h);
        let scale = eig.eigenvalues.amax();
        if scale == 0.0 {
            return None;
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, &d) in eig.eigenvalues.iter().enumerate() {
            if d.abs() <= tol * scale {
                return None;
            }
            let col = eig.eigenvectors.column(i) * c(1.0 / d.abs().sqrt(), 0.0);
            if d > 0.0 {
                pos.push(col);
            } else {
                neg.push(col);
            }
        }
        if pos.len() != 2 || neg.len() != 2 {
            return None;
        }
        let cols = if eps > 0.0 {
            [&pos[0], &pos[1], &neg[0], &neg[1]]
        } else {
            [&neg[0], &neg[1], &pos[0], &pos[1]]
        };
        let mut cm = CMatrix::zeros(4, 4);
        for (j, col) in cols.iter().enumerate() {
            cm.set_column(j, col);
        }
        Some((Self::from_rep(&cm), eps))
    }
}
