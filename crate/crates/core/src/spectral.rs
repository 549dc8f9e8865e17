//! Real left eigenbases, physical observables, signed projections and
//! compatibility of commuting observables.
//!
//! A vector `v` is a left eigenvector of `A` when `Av = vq` for a ring
//! scalar `q`. An operator is *physical* when it has a left basis of
//! eigenvectors `ψ_α` with real eigenvalues and `⟨ψ_α|ψ_β⟩ = ε_α δ_αβ`,
//! `ε_α = ±1`.
//!
//! The solver works in the complex representation: `Av = vλ` with real `λ`
//! holds iff every column of `rep(v)` is an eigenvector of `rep(A)` for `λ`.
//! Each real eigenspace is split into `±1` directions of the Hermitian form
//! `vᴴ·G·w` (`G` the block metric), the directions are grouped into
//! candidate ring vectors and a ring-valued Gram–Schmidt pass picks pivots
//! with invertible self-products. Every result is re-verified at ring level
//! before it is returned.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bimodule::{is_left_basis, GramData, ModuleVector, RingOperator};
use crate::error::{Error, Result};
use crate::hypercomplex::{CMatrix, CVector, CliffordElement, Quaternion, StarRing};
use crate::linalg::{real_eigenspaces, split_by_form};
use crate::random::random_generalized_unitary;
use crate::tolerance::Tolerances;

/// Rings for which real eigenspaces can be assembled into ring vectors.
pub trait SpectralRing: StarRing {
    /// Groups form-orthonormal directions (`+1` in `pos`, `−1` in `neg`)
    /// of an invariant subspace into `(n·d) × d` candidate blocks, each the
    /// representation of one ring vector.
    fn pivot_blocks(pos: Vec<CVector>, neg: Vec<CVector>) -> std::result::Result<Vec<CMatrix>, String>;
}

impl SpectralRing for Quaternion {
    fn pivot_blocks(pos: Vec<CVector>, neg: Vec<CVector>) -> std::result::Result<Vec<CMatrix>, String> {
        if !neg.is_empty() {
            return Err("quaternion scalar product cannot have negative directions".into());
        }
        // each column x pairs with its quaternionic partner (−x̄₂, x̄₁) per block
        Ok(pos
            .into_iter()
            .map(|x| {
                let mut block = CMatrix::zeros(x.len(), 2);
                for b in 0..x.len() / 2 {
                    let (x1, x2) = (x[2 * b], x[2 * b + 1]);
                    block[(2 * b, 0)] = x1;
                    block[(2 * b + 1, 0)] = x2;
                    block[(2 * b, 1)] = -x2.conj();
                    block[(2 * b + 1, 1)] = x1.conj();
                }
                block
            })
            .collect())
    }
}

impl SpectralRing for CliffordElement {
    fn pivot_blocks(pos: Vec<CVector>, neg: Vec<CVector>) -> std::result::Result<Vec<CMatrix>, String> {
        // rep⟨v|v⟩ = γ0 · Vᴴ G V, so a unit vector needs columns of form
        // signature (+, +, −, −)
        if pos.len() != neg.len() || !pos.len().is_multiple_of(2) {
            return Err(format!(
                "eigenspace form signature ({}, {}) is not split (2k, 2k); no orthonormal ring basis exists",
                pos.len(),
                neg.len()
            ));
        }
        Ok((0..pos.len() / 2)
            .map(|t| {
                let cols = [&pos[2 * t], &pos[2 * t + 1], &neg[2 * t], &neg[2 * t + 1]];
                let mut block = CMatrix::zeros(cols[0].len(), 4);
                for (j, c) in cols.iter().enumerate() {
                    block.set_column(j, c);
                }
                block
            })
            .collect())
    }
}

/// Indices of eigenvectors sharing one eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenGroup {
    pub value: f64,
    pub members: Vec<usize>,
}

/// A left orthonormal eigenbasis with real eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralResult<R> {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<ModuleVector<R>>,
    pub signs: Vec<f64>,
    pub groups: Vec<EigenGroup>,
}

/// Residuals of a spectral decomposition checked against its operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralCheck {
    pub eigen_residual: f64,
    pub gram_residual: f64,
    pub left_basis: bool,
}

impl SpectralCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.left_basis && self.eigen_residual <= tol && self.gram_residual <= tol
    }
}

/// `P_λ = Σ_β ε_β |ψ_β⟩⟨ψ_β|` over the eigenvectors of one group.
#[derive(Debug, Clone)]
pub struct Projection<R> {
    pub operator: RingOperator<R>,
    pub eigenvalue: f64,
    pub signs: Vec<f64>,
}

impl<R: StarRing> SpectralResult<R> {
    pub fn rank(&self) -> usize {
        self.eigenvectors.len()
    }

    fn build(eigenvalues: Vec<f64>, eigenvectors: Vec<ModuleVector<R>>, signs: Vec<f64>, grouping: f64) -> Self {
        let mut groups: Vec<EigenGroup> = Vec::new();
        for (i, &v) in eigenvalues.iter().enumerate() {
            match groups
                .iter_mut()
                .find(|g| (g.value - v).abs() <= grouping * v.abs().max(1.0))
            {
                Some(g) => g.members.push(i),
                None => groups.push(EigenGroup {
                    value: v,
                    members: vec![i],
                }),
            }
        }
        SpectralResult {
            eigenvalues,
            eigenvectors,
            signs,
            groups,
        }
    }

    /// Checks `Aψ_α = ψ_α λ_α`, `Gram(ψ) = diag(ε)` and the left-basis
    /// property; residuals are absolute coefficient norms.
    pub fn check(&self, a: &RingOperator<R>, singular_tol: f64) -> Result<SpectralCheck> {
        let mut eigen_residual: f64 = 0.0;
        for (v, &l) in self.eigenvectors.iter().zip(&self.eigenvalues) {
            let lhs = a.apply(v)?;
            let rhs = v.scale(l);
            eigen_residual = eigen_residual.max(lhs.try_sub(&rhs)?.coeff_norm());
        }
        let gram = GramData::new(&self.eigenvectors)?;
        Ok(SpectralCheck {
            eigen_residual,
            gram_residual: gram.diag_residual(&self.signs),
            left_basis: is_left_basis(&self.eigenvectors, singular_tol)?,
        })
    }

    fn group_projection(&self, group: &EigenGroup) -> Result<Projection<R>> {
        let n = self.eigenvectors.first().map_or(0, |v| v.rank());
        let mut op = RingOperator::zero(n);
        for &m in &group.members {
            let kb = RingOperator::ket_bra(&self.eigenvectors[m], &self.eigenvectors[m])?;
            op = op.try_add(&kb.scale(self.signs[m]))?;
        }
        Ok(Projection {
            operator: op,
            eigenvalue: group.value,
            signs: group.members.iter().map(|&m| self.signs[m]).collect(),
        })
    }

    /// Projection onto the eigenspace of `lambda`.
    pub fn projection(&self, lambda: f64, grouping: f64) -> Result<Projection<R>> {
        let group = self
            .groups
            .iter()
            .find(|g| (g.value - lambda).abs() <= grouping * lambda.abs().max(1.0))
            .ok_or(Error::UnknownEigenvalue(lambda))?;
        self.group_projection(group)
    }

    /// One projection per eigenvalue group, in group order.
    pub fn projections(&self) -> Result<Vec<Projection<R>>> {
        self.groups.iter().map(|g| self.group_projection(g)).collect()
    }

    /// `Σ_α ε_α ψ_α λ_α ⟨ψ_α|`.
    pub fn reconstruct(&self) -> Result<RingOperator<R>> {
        let n = self.eigenvectors.first().map_or(0, |v| v.rank());
        let mut op = RingOperator::zero(n);
        for ((v, &l), &e) in self.eigenvectors.iter().zip(&self.eigenvalues).zip(&self.signs) {
            op = op.try_add(&RingOperator::ket_bra(v, v)?.scale(l * e))?;
        }
        Ok(op)
    }
}

pub fn is_hermitian<R: StarRing>(a: &RingOperator<R>, tol: f64) -> bool {
    let diff = a.try_sub(&a.adjoint()).expect("same rank");
    diff.max_entry_norm() <= tol * a.max_entry_norm().max(1.0)
}

/// True iff `AB − BA` vanishes entrywise within `tol` (relative to the
/// operator scale).
pub fn commute<R: StarRing>(a: &RingOperator<R>, b: &RingOperator<R>, tol: f64) -> Result<bool> {
    Ok(commutator_residual(a, b)? <= tol * (a.max_entry_norm() * b.max_entry_norm()).max(1.0))
}

pub fn commutator_residual<R: StarRing>(a: &RingOperator<R>, b: &RingOperator<R>) -> Result<f64> {
    Ok(a.commutator(b)?.max_entry_norm())
}

fn block_metric<R: StarRing>(rank: usize) -> CMatrix {
    let d = R::REP_DIM;
    let g = R::metric();
    let mut m = CMatrix::zeros(rank * d, rank * d);
    for a in 0..rank {
        m.view_mut((a * d, a * d), (d, d)).copy_from(&g);
    }
    m
}

/// Ring-valued Gram–Schmidt over candidate vectors: repeatedly projects the
/// remaining candidates against accepted vectors and accepts the one whose
/// self-product is invertible, normalizable and has the largest
/// `|scalar part|`.
fn ring_gram_schmidt<R: StarRing>(
    candidates: Vec<ModuleVector<R>>,
    count: usize,
    tol: &Tolerances,
) -> std::result::Result<Vec<(ModuleVector<R>, f64)>, String> {
    let mut remaining = candidates;
    let mut accepted: Vec<(ModuleVector<R>, f64)> = Vec::with_capacity(count);
    while accepted.len() < count {
        let mut best: Option<(usize, ModuleVector<R>, R, f64, f64)> = None;
        for (idx, c) in remaining.iter().enumerate() {
            let mut v = c.clone();
            for (psi, eps) in &accepted {
                let coeff = psi.inner(c).map_err(|e| e.to_string())?;
                v = &v - &psi.right_mul(coeff.scale(*eps));
            }
            let s = v.inner(&v).map_err(|e| e.to_string())?;
            let mag = s.scalar_part().re.abs();
            if !s.is_invertible(tol.singular) {
                continue;
            }
            let Some((norm, eps)) = R::normalizer(&s, tol.singular) else {
                continue;
            };
            if best.as_ref().is_none_or(|b| mag > b.4) {
                best = Some((idx, v, norm, eps, mag));
            }
        }
        let Some((idx, v, norm, eps, _)) = best else {
            return Err(format!(
                "no ring-invertible pivot after {} of {count} vectors (isotropic obstruction)",
                accepted.len()
            ));
        };
        remaining.swap_remove(idx);
        accepted.push((v.right_mul(norm), eps));
    }
    Ok(accepted)
}

/// Orthonormal ring basis of the ring vectors whose columns lie in the
/// complex subspace spanned by `basis`.
fn ring_basis_of_subspace<R: SpectralRing>(
    basis: &CMatrix,
    metric: &CMatrix,
    tol: &Tolerances,
) -> std::result::Result<Vec<(ModuleVector<R>, f64)>, String> {
    let d = R::REP_DIM;
    let m = basis.ncols();
    if !m.is_multiple_of(d) {
        return Err(format!(
            "eigenspace has complex dimension {m}, not a multiple of {d}; it contains no left basis"
        ));
    }
    let (pos, neg) = split_by_form(basis, metric, tol.singular)?;
    let blocks = R::pivot_blocks(pos, neg)?;
    let candidates = blocks.iter().map(ModuleVector::from_rep).collect();
    ring_gram_schmidt(candidates, m / d, tol)
}

/// Solves for a real left orthonormal eigenbasis of `a`.
///
/// Eigenvalues are returned in descending order.
pub fn left_eigen_real<R: SpectralRing>(a: &RingOperator<R>, tol: &Tolerances) -> Result<SpectralResult<R>> {
    if !is_hermitian(a, tol.residual) {
        return Err(Error::not_physical("operator is not hermitian"));
    }
    let metric = block_metric::<R>(a.rank());
    let spaces = real_eigenspaces(&a.rep(), tol).map_err(Error::not_physical)?;
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    let mut signs = Vec::new();
    for space in &spaces {
        let found = ring_basis_of_subspace::<R>(&space.basis, &metric, tol)
            .map_err(|r| Error::not_physical(format!("eigenvalue {:.6e}: {r}", space.value)))?;
        for (v, eps) in found {
            values.push(space.value);
            vectors.push(v);
            signs.push(eps);
        }
    }
    let result = SpectralResult::build(values, vectors, signs, tol.grouping);
    let check = result.check(a, tol.singular)?;
    let scale = a.max_entry_norm().max(1.0);
    if !check.passes(tol.residual * scale) {
        return Err(Error::not_physical(format!(
            "basis verification failed (eigen residual {:.3e}, gram residual {:.3e}, left basis {})",
            check.eigen_residual, check.gram_residual, check.left_basis
        )));
    }
    Ok(result)
}

/// Outcome of [`is_physical`]: the witness basis on success, the solver's
/// rejection reason otherwise.
#[derive(Debug, Clone)]
pub struct PhysicalReport<R> {
    pub physical: bool,
    pub hermitian: bool,
    pub spectrum: Option<SpectralResult<R>>,
    pub reason: Option<String>,
}

pub fn is_physical<R: SpectralRing>(a: &RingOperator<R>, tol: &Tolerances) -> PhysicalReport<R> {
    let hermitian = is_hermitian(a, tol.residual);
    match left_eigen_real(a, tol) {
        Ok(spec) => {
            debug_assert!(hermitian, "physical observables are hermitian");
            PhysicalReport {
                physical: true,
                hermitian,
                spectrum: Some(spec),
                reason: None,
            }
        }
        Err(e) => PhysicalReport {
            physical: false,
            hermitian,
            spectrum: None,
            reason: Some(e.to_string()),
        },
    }
}

/// A mutual left orthonormal eigenbasis of two observables.
#[derive(Debug, Clone)]
pub struct JointBasis<R> {
    pub vectors: Vec<ModuleVector<R>>,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub signs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Compatibility<R> {
    pub compatible: bool,
    pub witness: Option<JointBasis<R>>,
    pub reason: Option<String>,
}

/// Searches for a mutual real left orthonormal eigenbasis of two commuting
/// physical observables: each eigenspace of `a` is invariant under `b`, and
/// `b` restricted to it must itself admit a real orthonormal ring basis.
pub fn are_compatible<R: SpectralRing>(
    a: &RingOperator<R>,
    b: &RingOperator<R>,
    tol: &Tolerances,
) -> Result<Compatibility<R>> {
    if a.rank() != b.rank() {
        return Err(Error::RankMismatch {
            expected: a.rank(),
            found: b.rank(),
        });
    }
    for (name, op) in [("A", a), ("B", b)] {
        if let Err(e) = left_eigen_real(op, tol) {
            return Err(Error::NotPhysicalInput {
                which: name.into(),
                reason: e.to_string(),
            });
        }
    }
    if !commute(a, b, tol.residual)? {
        return Err(Error::NotCommuting {
            residual: commutator_residual(a, b)?,
        });
    }
    let metric = block_metric::<R>(a.rank());
    let lb = b.rep();
    let spaces = real_eigenspaces(&a.rep(), tol).map_err(|r| Error::NotPhysicalInput {
        which: "A".into(),
        reason: r,
    })?;
    let mut joint = JointBasis {
        vectors: Vec::new(),
        a_values: Vec::new(),
        b_values: Vec::new(),
        signs: Vec::new(),
    };
    let incompatible = |reason: String| Compatibility {
        compatible: false,
        witness: None,
        reason: Some(reason),
    };
    for space in &spaces {
        let x = &space.basis;
        let restricted = x.adjoint() * &lb * x;
        let inner = match real_eigenspaces(&restricted, tol) {
            Ok(s) => s,
            Err(r) => return Ok(incompatible(format!("B on A-eigenspace {:.6e}: {r}", space.value))),
        };
        for sub in inner {
            let z = x * &sub.basis;
            match ring_basis_of_subspace::<R>(&z, &metric, tol) {
                Ok(found) => {
                    for (v, eps) in found {
                        joint.vectors.push(v);
                        joint.a_values.push(space.value);
                        joint.b_values.push(sub.value);
                        joint.signs.push(eps);
                    }
                }
                Err(r) => {
                    return Ok(incompatible(format!(
                        "joint eigenspace (A = {:.6e}, B = {:.6e}): {r}",
                        space.value, sub.value
                    )))
                }
            }
        }
    }
    // verify the witness against both operators
    let scale = a.max_entry_norm().max(b.max_entry_norm()).max(1.0);
    for (values, op) in [(&joint.a_values, a), (&joint.b_values, b)] {
        let spec = SpectralResult::build(values.clone(), joint.vectors.clone(), joint.signs.clone(), tol.grouping);
        let check = spec.check(op, tol.singular)?;
        if !check.passes(tol.residual * scale) {
            return Ok(incompatible(format!(
                "joint basis verification failed (eigen residual {:.3e}, gram residual {:.3e})",
                check.eigen_residual, check.gram_residual
            )));
        }
    }
    Ok(Compatibility {
        compatible: true,
        witness: Some(joint),
        reason: None,
    })
}

/// Summary of a randomized search over commuting Clifford observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub samples: usize,
    pub both_physical: usize,
    pub commuting: usize,
    pub compatible: usize,
    pub incompatible: usize,
    pub incompatible_seeds: Vec<u64>,
}

/// Randomized experiment on pairs `A = U D_A U†`, `B = U D_B U†` with
/// `D_A, D_B` diagonal over the commutative subalgebra spanned by `1, γ0`
/// (the family containing the textbook incompatible pair). Counts how
/// often commuting physical pairs are compatible.
pub fn conjecture_scan(samples: usize, seed: u64, tol: &Tolerances) -> ConjectureReport {
    let mut report = ConjectureReport {
        samples,
        both_physical: 0,
        commuting: 0,
        compatible: 0,
        incompatible: 0,
        incompatible_seeds: Vec::new(),
    };
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let sample_seed: u64 = seeder.random();
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let rank = rng.random_range(2..=3);
        let g0 = CliffordElement::gamma(0);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<CliffordElement> {
            (0..rank)
                .map(|_| {
                    let x = rng.random_range(-1i32..=1) as f64;
                    let y = rng.random_range(-1i32..=1) as f64;
                    CliffordElement::from_real(x) + g0.scale(y)
                })
                .collect()
        };
        let da = draw(&mut rng);
        let db = draw(&mut rng);
        let u = random_generalized_unitary::<CliffordElement, _>(rank, &mut rng);
        let ud = u.adjoint();
        let a = &(&u * &RingOperator::diagonal(&da)) * &ud;
        let b = &(&u * &RingOperator::diagonal(&db)) * &ud;
        if left_eigen_real(&a, tol).is_err() || left_eigen_real(&b, tol).is_err() {
            continue;
        }
        report.both_physical += 1;
        if !commute(&a, &b, tol.residual).unwrap_or(false) {
            continue;
        }
        report.commuting += 1;
        match are_compatible(&a, &b, tol) {
            Ok(c) if c.compatible => report.compatible += 1,
            Ok(_) => {
                report.incompatible += 1;
                report.incompatible_seeds.push(sample_seed);
            }
            Err(_) => {}
        }
    }
    report
}

/// Scalar part of `⟨v|A|v⟩`, convenient for diagnostics.
pub fn expectation<R: StarRing>(v: &ModuleVector<R>, a: &RingOperator<R>) -> Result<Complex64> {
    Ok(v.inner(&a.apply(v)?)?.scalar_part())
}
