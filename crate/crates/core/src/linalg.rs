//! Complex dense linear algebra used behind the ring-level routines.

use nalgebra::{Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::hypercomplex::{CMatrix, CVector};
use crate::tolerance::Tolerances;

pub(crate) fn cplx(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Smallest singular value relative to the largest exceeds `rel_tol`.
pub fn is_well_conditioned(m: &CMatrix, rel_tol: f64) -> bool {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return false;
    }
    let sv = m.singular_values();
    let max = sv.max();
    max > 0.0 && sv.min() > rel_tol * max
}

/// An eigenspace of a complex matrix: eigenvalue and an orthonormal basis
/// (columns).
#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub value: f64,
    pub basis: CMatrix,
}

/// Complex eigenvalues via the Schur form. The QR iteration can stall on
/// matrices that are a multiple of the identity up to rounding, so those are
/// answered directly, the iteration count is capped, and a stalled run is
/// retried on a fixed unitary similarity of the traceless part.
fn eigenvalues(m: &CMatrix, tol: &Tolerances) -> Option<nalgebra::DVector<Complex64>> {
    let n = m.nrows();
    let shift = m.trace() / n as f64;
    let traceless = m - CMatrix::identity(n, n) * shift;
    if traceless.norm() <= tol.algebra * m.norm().max(1.0) {
        return Some(nalgebra::DVector::from_element(n, shift));
    }
    if (m - m.adjoint()).norm() <= tol.algebra * m.norm().max(1.0) {
        let herm = (m + m.adjoint()) * cplx(0.5);
        return Some(herm.symmetric_eigenvalues().map(cplx));
    }
    let max_iter = 200 * n.max(4);
    if let Some(v) = Schur::try_new(m.clone(), f64::EPSILON, max_iter).and_then(|s| s.eigenvalues()) {
        return Some(v);
    }
    for salt in 0..3 {
        let q = fixed_unitary(n, salt);
        let rotated = q.adjoint() * &traceless * &q;
        if let Some(v) = Schur::try_new(rotated, f64::EPSILON, 4 * max_iter).and_then(|s| s.eigenvalues()) {
            return Some(v.map(|z| z + shift));
        }
    }
    None
}

/// Deterministic dense unitary: the Q factor of a fixed complex matrix.
fn fixed_unitary(n: usize, salt: usize) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |r, c| {
        let t = (r * n + c + salt * n * n) as f64 + 1.0;
        Complex64::new((t * 0.7548776662).fract() - 0.5, (t * 0.5698402910).fract() - 0.5)
    });
    m.qr().q()
}

/// Splits `m` into real eigenspaces. Fails with a reason when an eigenvalue
/// is not real or when the eigenvectors do not span (defective matrix).
pub fn real_eigenspaces(m: &CMatrix, tol: &Tolerances) -> Result<Vec<Eigenspace>, String> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = m.norm().max(1.0);
    let eigs = eigenvalues(m, tol).ok_or_else(|| "Schur decomposition did not converge".to_string())?;
    let mut values = Vec::with_capacity(n);
    for z in eigs.iter() {
        if z.im.abs() > tol.real_eigenvalue * scale.max(z.re.abs()) {
            return Err(format!("non-real eigenvalue {:.6e}{:+.6e}i", z.re, z.im));
        }
        values.push(z.re);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for v in values {
        match clusters.last_mut() {
            Some(c) if (v - c[c.len() - 1]).abs() <= tol.grouping * v.abs().max(1.0) => c.push(v),
            _ => clusters.push(vec![v]),
        }
    }

    let threshold = 10.0 * tol.singular.max(tol.grouping) * scale;
    let mut spaces = Vec::with_capacity(clusters.len());
    for c in clusters.iter().rev() {
        let value = c.iter().sum::<f64>() / c.len() as f64;
        let shifted = m - CMatrix::identity(n, n) * cplx(value);
        let basis = null_space(&shifted, c.len(), threshold).ok_or_else(|| {
            format!(
                "eigenvalue {value:.6e} has algebraic multiplicity {} but a smaller eigenspace (defective)",
                c.len()
            )
        })?;
        spaces.push(Eigenspace { value, basis });
    }
    Ok(spaces)
}

/// Orthonormal basis of the `dim` right-singular directions with the
/// smallest singular values, provided all of them are below `threshold`.
pub fn null_space(m: &CMatrix, dim: usize, threshold: f64) -> Option<CMatrix> {
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.as_ref()?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .expect("finite singular values")
    });
    // a square matrix may report fewer singular values than columns only
    // when it is empty
    if order.len() < dim {
        return None;
    }
    if order[..dim].iter().any(|&i| svd.singular_values[i] > threshold) {
        return None;
    }
    let mut basis = CMatrix::zeros(m.ncols(), dim);
    for (j, &i) in order[..dim].iter().enumerate() {
        let row = v_t.row(i).adjoint();
        basis.set_column(j, &row);
    }
    Some(basis)
}

/// Eigen-decomposition of a Hermitian matrix (input is symmetrized first).
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * cplx(0.5);
    let eig = SymmetricEigen::new(h);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Splits the column span of `basis` (assumed nondegenerate for the
/// Hermitian form `metric`) into vectors with `vᴴ·metric·v = +1` and `−1`,
/// mutually orthogonal for the form. Fails if the form restricted to the
/// span is degenerate.
pub fn split_by_form(
    basis: &CMatrix,
    metric: &CMatrix,
    rel_tol: f64,
) -> Result<(Vec<CVector>, Vec<CVector>), String> {
    let k = basis.adjoint() * metric * basis;
    let (vals, vecs) = hermitian_eigen(&k);
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, &val) in vals.iter().enumerate() {
        if val.abs() <= rel_tol * scale.max(f64::MIN_POSITIVE) || scale == 0.0 {
            return Err(format!(
                "scalar product restricted to the eigenspace is degenerate (isotropic direction, |κ| = {:.3e})",
                val.abs()
            ));
        }
        let v: CVector = basis * vecs.column(i) * cplx(1.0 / val.abs().sqrt());
        if val > 0.0 {
            pos.push(v);
        } else {
            neg.push(v);
        }
    }
    Ok((pos, neg))
}
