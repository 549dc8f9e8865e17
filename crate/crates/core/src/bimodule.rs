//! Free finite-rank bimodules over a star-ring, with the ring-valued
//! scalar product `⟨v|w⟩ = Σ r̃_α s_α` referred to a distinguished
//! orthonormal left basis `e_α`, and operators acting by left
//! multiplication of coefficient columns.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hypercomplex::{CMatrix, StarRing};

/// `v = Σ_α e_α r_α`, stored as the right coefficients `r_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleVector<R> {
    coeffs: Vec<R>,
}

impl<R: StarRing> ModuleVector<R> {
    pub fn new(coeffs: Vec<R>) -> Self {
        ModuleVector { coeffs }
    }

    pub fn zero(rank: usize) -> Self {
        ModuleVector::new(vec![R::zero(); rank])
    }

    /// The distinguished basis vector `e_index`.
    pub fn basis(rank: usize, index: usize) -> Self {
        let mut v = Self::zero(rank);
        v.coeffs[index] = R::one();
        v
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<R> {
        self.coeffs
    }

    /// `v · q`.
    pub fn right_mul(&self, q: R) -> Self {
        ModuleVector::new(self.coeffs.iter().map(|&r| r * q).collect())
    }

    /// `q · v`, acting on every coefficient from the left.
    pub fn left_mul(&self, q: R) -> Self {
        ModuleVector::new(self.coeffs.iter().map(|&r| q * r).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        ModuleVector::new(self.coeffs.iter().map(|r| r.scale(s)).collect())
    }

    fn check_rank(&self, other: &Self) -> Result<()> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                found: other.rank(),
            });
        }
        Ok(())
    }

    /// `⟨self|other⟩ = Σ_α (r_α)~ s_α`.
    pub fn inner(&self, other: &Self) -> Result<R> {
        self.check_rank(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(R::zero(), |acc, (r, s)| acc + r.tilde() * *s))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_rank(other)?;
        Ok(ModuleVector::new(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect(),
        ))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_rank(other)?;
        Ok(ModuleVector::new(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a - *b).collect(),
        ))
    }

    /// Euclidean norm of all coefficients (not the indefinite norm).
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|r| r.coeff_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rank() == other.rank()
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Stacked `(n·d) × d` complex representation.
    pub fn rep(&self) -> CMatrix {
        let d = R::REP_DIM;
        let mut m = CMatrix::zeros(self.rank() * d, d);
        for (a, r) in self.coeffs.iter().enumerate() {
            m.view_mut((a * d, 0), (d, d)).copy_from(&r.rep());
        }
        m
    }

    /// Inverse of [`ModuleVector::rep`], projecting each block onto the ring.
    pub fn from_rep(m: &CMatrix) -> Self {
        let d = R::REP_DIM;
        assert_eq!(m.ncols(), d);
        assert_eq!(m.nrows() % d, 0);
        let n = m.nrows() / d;
        ModuleVector::new(
            (0..n)
                .map(|a| R::from_rep(&m.view((a * d, 0), (d, d)).into_owned()))
                .collect(),
        )
    }
}

impl<R: StarRing> Add for &ModuleVector<R> {
    type Output = ModuleVector<R>;
    fn add(self, o: Self) -> ModuleVector<R> {
        self.try_add(o).expect("rank mismatch in vector addition")
    }
}

impl<R: StarRing> Sub for &ModuleVector<R> {
    type Output = ModuleVector<R>;
    fn sub(self, o: Self) -> ModuleVector<R> {
        self.try_sub(o).expect("rank mismatch in vector subtraction")
    }
}

impl<R: StarRing> Neg for &ModuleVector<R> {
    type Output = ModuleVector<R>;
    fn neg(self) -> ModuleVector<R> {
        ModuleVector::new(self.coeffs.iter().map(|&r| -r).collect())
    }
}

/// `n × n` matrix of ring elements acting as `A e_α = Σ_β e_β A_{βα}`,
/// extended right-linearly. Entries are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RingOperator<R> {
    rank: usize,
    entries: Vec<R>,
}

impl<R: StarRing> RingOperator<R> {
    pub fn from_entries(rank: usize, entries: Vec<R>) -> Result<Self> {
        if entries.len() != rank * rank {
            return Err(Error::RankMismatch {
                expected: rank * rank,
                found: entries.len(),
            });
        }
        Ok(RingOperator { rank, entries })
    }

    pub fn from_fn(rank: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut entries = Vec::with_capacity(rank * rank);
        for r in 0..rank {
            for c in 0..rank {
                entries.push(f(r, c));
            }
        }
        RingOperator { rank, entries }
    }

    pub fn zero(rank: usize) -> Self {
        Self::from_fn(rank, |_, _| R::zero())
    }

    pub fn identity(rank: usize) -> Self {
        Self::from_fn(rank, |r, c| if r == c { R::one() } else { R::zero() })
    }

    pub fn diagonal(diag: &[R]) -> Self {
        Self::from_fn(diag.len(), |r, c| if r == c { diag[r] } else { R::zero() })
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<R> = diag.iter().map(|&x| R::from_real(x)).collect();
        Self::diagonal(&d)
    }

    /// Operator whose `α`-th column holds the coefficients of `columns[α]`,
    /// i.e. the map `e_α ↦ columns[α]`.
    pub fn from_columns(columns: &[ModuleVector<R>]) -> Result<Self> {
        let n = columns.len();
        if let Some(bad) = columns.iter().find(|v| v.rank() != n) {
            return Err(Error::RankMismatch {
                expected: n,
                found: bad.rank(),
            });
        }
        Ok(Self::from_fn(n, |r, c| columns[c].coeffs[r]))
    }

    /// `|ψ⟩⟨φ|`, with entries `ψ_α φ̃_β`.
    pub fn ket_bra(psi: &ModuleVector<R>, phi: &ModuleVector<R>) -> Result<Self> {
        psi.check_rank(phi)?;
        Ok(Self::from_fn(psi.rank(), |r, c| psi.coeffs[r] * phi.coeffs[c].tilde()))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entries(&self) -> &[R] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> R {
        self.entries[row * self.rank + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: R) {
        self.entries[row * self.rank + col] = value;
    }

    pub fn column(&self, col: usize) -> ModuleVector<R> {
        ModuleVector::new((0..self.rank).map(|r| self.get(r, col)).collect())
    }

    fn check_rank(&self, other: usize) -> Result<()> {
        if self.rank != other {
            return Err(Error::RankMismatch {
                expected: self.rank,
                found: other,
            });
        }
        Ok(())
    }

    /// `(Av)_β = Σ_α A_{βα} r_α`.
    pub fn apply(&self, v: &ModuleVector<R>) -> Result<ModuleVector<R>> {
        self.check_rank(v.rank())?;
        Ok(ModuleVector::new(
            (0..self.rank)
                .map(|b| {
                    (0..self.rank).fold(R::zero(), |acc, a| acc + self.get(b, a) * v.coeffs[a])
                })
                .collect(),
        ))
    }

    /// `(A†)_{αβ} = (A_{βα})~`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.rank, |r, c| self.get(c, r).tilde())
    }

    pub fn try_compose(&self, other: &Self) -> Result<Self> {
        self.check_rank(other.rank)?;
        Ok(Self::from_fn(self.rank, |r, c| {
            (0..self.rank).fold(R::zero(), |acc, k| acc + self.get(r, k) * other.get(k, c))
        }))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(R, R) -> R) -> Result<Self> {
        self.check_rank(other.rank)?;
        Ok(RingOperator {
            rank: self.rank,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        RingOperator {
            rank: self.rank,
            entries: self.entries.iter().map(|r| r.scale(s)).collect(),
        }
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_compose(other)?.try_sub(&other.try_compose(self)?)
    }

    /// Largest coefficient norm over all entries.
    pub fn max_entry_norm(&self) -> f64 {
        self.entries.iter().map(|r| r.coeff_norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rank == other.rank
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// `(n·d) × (n·d)` block representation; acts on stacked vector reps.
    pub fn rep(&self) -> CMatrix {
        let d = R::REP_DIM;
        let n = self.rank;
        let mut m = CMatrix::zeros(n * d, n * d);
        for r in 0..n {
            for c in 0..n {
                m.view_mut((r * d, c * d), (d, d)).copy_from(&self.get(r, c).rep());
            }
        }
        m
    }

    pub fn from_rep(m: &CMatrix) -> Self {
        let d = R::REP_DIM;
        assert!(m.is_square() && m.nrows().is_multiple_of(d));
        let n = m.nrows() / d;
        Self::from_fn(n, |r, c| R::from_rep(&m.view((r * d, c * d), (d, d)).into_owned()))
    }
}

impl<R: StarRing> Mul for &RingOperator<R> {
    type Output = RingOperator<R>;
    fn mul(self, o: Self) -> RingOperator<R> {
        self.try_compose(o).expect("rank mismatch in operator product")
    }
}

/// Gram matrix `G_{αβ} = ⟨v_α|v_β⟩` of a family of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GramData<R> {
    pub gram: RingOperator<R>,
}

impl<R: StarRing> GramData<R> {
    pub fn new(vs: &[ModuleVector<R>]) -> Result<Self> {
        let n = vs.len();
        let mut entries = Vec::with_capacity(n * n);
        for a in vs {
            for b in vs {
                entries.push(a.inner(b)?);
            }
        }
        Ok(GramData {
            gram: RingOperator::from_entries(n, entries)?,
        })
    }

    /// Max deviation from `G_{αβ} = (G_{βα})~`.
    pub fn hermiticity_residual(&self) -> f64 {
        let g = &self.gram;
        let mut worst: f64 = 0.0;
        for r in 0..g.rank() {
            for c in 0..g.rank() {
                worst = worst.max((g.get(r, c) - g.get(c, r).tilde()).coeff_norm());
            }
        }
        worst
    }

    /// Max deviation from `diag(signs)`.
    pub fn diag_residual(&self, signs: &[f64]) -> f64 {
        let target = RingOperator::<R>::real_diagonal(signs);
        self.gram
            .try_sub(&target)
            .map(|d| d.max_entry_norm())
            .unwrap_or(f64::INFINITY)
    }
}

/// True iff `vs` is a left basis: the coefficient matrix over the ring is
/// invertible, decided by the relative smallest singular value of its
/// complex representation.
pub fn is_left_basis<R: StarRing>(vs: &[ModuleVector<R>], rel_tol: f64) -> Result<bool> {
    let n = vs.len();
    if n == 0 {
        return Ok(false);
    }
    let coeff = RingOperator::from_columns(vs)?;
    Ok(crate::linalg::is_well_conditioned(&coeff.rep(), rel_tol))
}

/// `⟨v|w⟩` computed in the matrix picture: `g · V† · G · W` summed over
/// blocks, where `rep(ã) = g rep(a)† g`.
pub fn inner_via_rep<R: StarRing>(v: &ModuleVector<R>, w: &ModuleVector<R>) -> Result<R> {
    v.check_rank(w)?;
    let d = R::REP_DIM;
    let g = R::metric();
    let mut acc = CMatrix::zeros(d, d);
    for (a, b) in v.coeffs().iter().zip(w.coeffs()) {
        acc += &g * a.rep().adjoint() * &g * b.rep();
    }
    Ok(R::from_rep(&acc))
}

/// Scalar part of `⟨v|w⟩`.
pub fn inner_scalar<R: StarRing>(v: &ModuleVector<R>, w: &ModuleVector<R>) -> Result<Complex64> {
    Ok(v.inner(w)?.scalar_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercomplex::{CliffordElement, Quaternion};

    type C = CliffordElement;

    fn g(mu: usize) -> C {
        C::gamma(mu)
    }

    #[test]
    fn basis_is_orthonormal() {
        for i in 0..3 {
            for j in 0..3 {
                let ip = ModuleVector::<C>::basis(3, i).inner(&ModuleVector::basis(3, j)).unwrap();
                let want = if i == j { C::one() } else { C::zero() };
                assert_eq!(ip, want);
            }
        }
    }

    #[test]
    fn isotropic_vector() {
        let w = ModuleVector::<C>::basis(2, 0);
        assert_eq!(w.inner(&w).unwrap(), C::one());
        let v = w.right_mul(g(0) + g(1));
        assert!(v.coeff_norm() > 0.0);
        assert_eq!(v.inner(&v).unwrap(), C::zero());
    }

    #[test]
    fn quaternion_norm_is_positive_scalar() {
        let v = ModuleVector::new(vec![Quaternion::new(1.0, 2.0, -1.0, 0.5), Quaternion::new(0.0, 0.0, 3.0, 0.0)]);
        let n = v.inner(&v).unwrap();
        assert_eq!((n.i, n.j, n.k), (0.0, 0.0, 0.0));
        assert!((n.re - 15.25).abs() < 1e-12);
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let a = ModuleVector::<Quaternion>::zero(2);
        let b = ModuleVector::<Quaternion>::zero(3);
        assert_eq!(a.inner(&b), Err(Error::RankMismatch { expected: 2, found: 3 }));
        let op = RingOperator::<Quaternion>::identity(2);
        assert!(op.apply(&b).is_err());
        assert!(RingOperator::<Quaternion>::from_entries(2, vec![Quaternion::ONE; 3]).is_err());
    }

    #[test]
    fn left_basis_checks() {
        let e0 = ModuleVector::<C>::basis(2, 0);
        let e1 = ModuleVector::<C>::basis(2, 1);
        assert!(is_left_basis(&[e0.clone(), e1.clone()], 1e-8).unwrap());
        let one = C::one();
        let three = (&e0.right_mul(one + g(0)) + &e1.right_mul(one - g(0))).scale(0.5);
        let four = (&e0.right_mul(one - g(0)) + &e1.right_mul(one + g(0))).scale(0.5);
        assert!(is_left_basis(&[three, four], 1e-8).unwrap());
        // second vector is a right multiple of the first
        assert!(!is_left_basis(&[e0.clone(), e0.right_mul(g(0))], 1e-8).unwrap());
    }

    #[test]
    fn adjoint_sign_rule() {
        let mut a = RingOperator::<C>::zero(2);
        a.set(0, 1, g(0) * g(1));
        let adj = a.adjoint();
        assert_eq!(adj.get(1, 0), -(g(0) * g(1)));
        assert_eq!(adj.get(0, 1), C::zero());
        let d = RingOperator::<C>::real_diagonal(&[1.5, -2.0]);
        assert_eq!(d.adjoint(), d);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn apply_counterexample_b() {
        let b = RingOperator::diagonal(&[g(0), -g(0)]);
        let e0 = ModuleVector::<C>::basis(2, 0);
        assert_eq!(b.apply(&e0).unwrap(), e0.right_mul(g(0)));
        let id = RingOperator::<C>::identity(2);
        let v = ModuleVector::new(vec![g(2) + C::one(), g(5 - 4)]);
        assert_eq!(id.apply(&v).unwrap(), v);
    }

    #[test]
    fn rep_round_trips() {
        let v = ModuleVector::new(vec![Quaternion::new(1.0, 2.0, 3.0, 4.0), Quaternion::K]);
        assert!(ModuleVector::<Quaternion>::from_rep(&v.rep()).approx_eq(&v, 1e-14));
        let op = RingOperator::from_fn(2, |r, c| g(r + c) + C::from_real(r as f64));
        assert!(RingOperator::<C>::from_rep(&op.rep()).approx_eq(&op, 1e-13));
        // operator rep acts on vector rep
        let w = ModuleVector::new(vec![g(3), C::one() + g(1)]);
        let lhs = op.apply(&w).unwrap().rep();
        assert!((lhs - op.rep() * w.rep()).norm() < 1e-13);
    }
}
