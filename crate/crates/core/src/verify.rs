//! Self-checks run by `extprob verify-algebra` and `extprob counterexample`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bimodule::{inner_via_rep, is_left_basis, ModuleVector, RingOperator};
use crate::hypercomplex::{blade_product, CMatrix, CliffordElement, Quaternion, StarRing, BLADE_COUNT};
use crate::random::{random_operator, random_vector, RandomRing};
use crate::spectral::{are_compatible, commutator_residual, is_hermitian, left_eigen_real};
use crate::tolerance::Tolerances;

pub const QUATERNION_SAMPLES: usize = 1000;
pub const CLIFFORD_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub tolerance: f64,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl AlgebraReport {
    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

fn eta(mu: usize) -> f64 {
    if mu == 0 {
        1.0
    } else {
        -1.0
    }
}

fn mat_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

struct Suite {
    tol: f64,
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: &str, residual: f64) {
        let passed = residual.is_finite() && residual <= self.tol;
        self.checks.push(Check {
            name: name.to_string(),
            residual,
            passed,
        });
    }
}

/// Relative residual of `lhs = rhs`, scaled by `scale`.
fn rel<R: StarRing>(lhs: R, rhs: R, scale: f64) -> f64 {
    (lhs - rhs).coeff_norm() / scale.max(1.0)
}

fn ring_checks<R: RandomRing>(suite: &mut Suite, label: &str, samples: usize, rng: &mut ChaCha8Rng) {
    let mut anti = 0.0f64;
    let mut invol = 0.0f64;
    let mut hom = 0.0f64;
    let mut star = 0.0f64;
    let mut scalar = 0.0f64;
    let g = R::metric();
    for _ in 0..samples {
        let a = R::random(rng);
        let b = R::random(rng);
        let s = a.coeff_norm() * b.coeff_norm();
        anti = anti.max(rel((a * b).tilde(), b.tilde() * a.tilde(), s));
        invol = invol.max(rel(a.tilde().tilde(), a, a.coeff_norm()));
        hom = hom.max(mat_diff(&(a * b).rep(), &(a.rep() * b.rep())) / s.max(1.0));
        star = star.max(mat_diff(&a.tilde().rep(), &(&g * a.rep().adjoint() * &g)) / a.coeff_norm().max(1.0));
        let tr = a.rep().trace() / R::REP_DIM as f64;
        scalar = scalar.max((a.scalar_part() - tr).norm() / a.coeff_norm().max(1.0));
    }
    suite.record(&format!("{label}: tilde reverses products"), anti);
    suite.record(&format!("{label}: tilde is an involution"), invol);
    suite.record(&format!("{label}: rep is multiplicative"), hom);
    suite.record(&format!("{label}: rep intertwines tilde with adjoint"), star);
    suite.record(&format!("{label}: scalar part is normalized trace"), scalar);
}

fn module_checks<R: RandomRing>(suite: &mut Suite, label: &str, rng: &mut ChaCha8Rng) {
    let mut herm = 0.0f64;
    let mut right = 0.0f64;
    let mut left = 0.0f64;
    let mut via_rep = 0.0f64;
    let mut adjoint = 0.0f64;
    for rank in 1..=4 {
        for _ in 0..25 {
            let v = random_vector::<R, _>(rank, rng);
            let w = random_vector::<R, _>(rank, rng);
            let q = R::random(rng);
            let a = random_operator::<R, _>(rank, rng);
            let s = v.coeff_norm() * w.coeff_norm();
            let vw = v.inner(&w).expect("same rank");
            let wv = w.inner(&v).expect("same rank");
            herm = herm.max(rel(vw, wv.tilde(), s));
            right = right.max(rel(v.inner(&w.right_mul(q)).unwrap(), vw * q, s * q.coeff_norm()));
            left = left.max(rel(
                v.inner(&w.left_mul(q)).unwrap(),
                v.left_mul(q.tilde()).inner(&w).unwrap(),
                s * q.coeff_norm(),
            ));
            via_rep = via_rep.max(rel(inner_via_rep(&v, &w).unwrap(), vw, s));
            let lhs = a.adjoint().apply(&v).unwrap().inner(&w).unwrap();
            let rhs = v.inner(&a.apply(&w).unwrap()).unwrap();
            adjoint = adjoint.max(rel(lhs, rhs, s * a.max_entry_norm()));
        }
    }
    suite.record(&format!("{label} module: inner product is hermitian"), herm);
    suite.record(&format!("{label} module: inner product is right linear"), right);
    suite.record(&format!("{label} module: left scalars move across as tilde"), left);
    suite.record(&format!("{label} module: inner product matches matrix form"), via_rep);
    suite.record(&format!("{label} module: adjoint satisfies <A†v|w> = <v|Aw>"), adjoint);
}

/// Runs every algebraic identity and records the largest residual of each.
///
/// `inject_fault` flips the sign of `η^00` in the anticommutation check; it
/// exists so that tests can confirm failures are reported.
pub fn algebra_suite(tol: f64, seed: u64, inject_fault: bool) -> AlgebraReport {
    type C = CliffordElement;
    let mut suite = Suite {
        tol,
        checks: Vec::new(),
    };
    let g = C::gamma;

    let mut anti = 0.0f64;
    for mu in 0..4 {
        for nu in 0..4 {
            let mut expected = if mu == nu { 2.0 * eta(mu) } else { 0.0 };
            if inject_fault && mu == 0 && nu == 0 {
                expected = -expected;
            }
            let lhs = g(mu) * g(nu) + g(nu) * g(mu);
            anti = anti.max((lhs - C::from_real(expected)).coeff_norm());
        }
    }
    suite.record("clifford: {γμ, γν} = 2ημν", anti);
    suite.record("clifford: (γ1)² = -1", (g(1) * g(1) + C::one()).coeff_norm());
    let g5 = g(0) * g(1) * g(2) * g(3);
    let mut g5_res = (g5 - C::gamma5()).coeff_norm();
    g5_res = g5_res.max((g5 * g5 + C::one()).coeff_norm());
    for mu in 0..4 {
        g5_res = g5_res.max((g5 * g(mu) + g(mu) * g5).coeff_norm());
    }
    suite.record("clifford: γ5 = γ0γ1γ2γ3, (γ5)² = -1, {γ5, γμ} = 0", g5_res);
    let mut gtilde = 0.0f64;
    for mu in 0..4 {
        gtilde = gtilde.max((g(mu).tilde() - g(mu)).coeff_norm());
    }
    let i = Complex64::new(0.0, 1.0);
    gtilde = gtilde.max((C::complex(i).tilde() - C::complex(-i)).coeff_norm());
    suite.record("clifford: γμ~ = γμ, i~ = -i", gtilde);

    let mut table = 0.0f64;
    for a in 0..BLADE_COUNT {
        for b in 0..BLADE_COUNT {
            let (s, ab) = blade_product(a, b);
            if ab >= BLADE_COUNT || s.abs() != 1.0 {
                table = f64::INFINITY;
                continue;
            }
            for c in 0..BLADE_COUNT {
                let (s1, abc1) = blade_product(ab, c);
                let (s2, bc) = blade_product(b, c);
                let (s3, abc2) = blade_product(a, bc);
                if abc1 != abc2 || s * s1 != s2 * s3 {
                    table = table.max(2.0);
                }
            }
        }
    }
    suite.record("clifford: blade table closed and associative", table);

    type Q = Quaternion;
    let units = [Q::I, Q::J, Q::K];
    let mut qid = 0.0f64;
    for u in units {
        qid = qid.max((u * u + Q::ONE).coeff_norm());
    }
    qid = qid.max((Q::I * Q::J * Q::K + Q::ONE).coeff_norm());
    qid = qid.max((Q::I * Q::J - Q::K).coeff_norm());
    qid = qid.max((Q::J * Q::I + Q::K).coeff_norm());
    suite.record("quaternion: i² = j² = k² = ijk = -1", qid);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inv = 0.0f64;
    let mut norm = 0.0f64;
    for _ in 0..QUATERNION_SAMPLES {
        let p = Q::random(&mut rng);
        let q = Q::random(&mut rng);
        if let Some(pi) = p.inverse() {
            inv = inv.max((p * pi - Q::ONE).coeff_norm()).max((pi * p - Q::ONE).coeff_norm());
        }
        let np = p.norm_sq() * q.norm_sq();
        norm = norm.max(((p * q).norm_sq() - np).abs() / np.max(1.0));
    }
    suite.record("quaternion: q q⁻¹ = q⁻¹ q = 1", inv);
    suite.record("quaternion: |pq|² = |p|²|q|²", norm);

    ring_checks::<Q>(&mut suite, "quaternion", QUATERNION_SAMPLES, &mut rng);
    ring_checks::<C>(&mut suite, "clifford", CLIFFORD_SAMPLES, &mut rng);

    let mut pos = 0.0f64;
    for rank in 1..=4 {
        for _ in 0..25 {
            let v = random_vector::<Q, _>(rank, &mut rng);
            let vv = v.inner(&v).unwrap();
            let n = v.coeff_norm().powi(2);
            pos = pos.max((vv - Q::from_real(n)).coeff_norm() / n.max(1.0));
        }
    }
    suite.record("quaternion module: <v|v> = |v|² > 0", pos);
    module_checks::<Q>(&mut suite, "quaternion", &mut rng);
    module_checks::<C>(&mut suite, "clifford", &mut rng);

    let passed = suite.checks.iter().all(|c| c.passed);
    AlgebraReport {
        tolerance: tol,
        seed,
        checks: suite.checks,
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub lambda: f64,
    pub mu: f64,
    pub facts: Vec<Fact>,
    pub compatible: bool,
    pub compatibility_reason: Option<String>,
    pub expected_compatible: bool,
    pub passed: bool,
}

/// `B|0⟩ = |0⟩γ0`, `B|1⟩ = -|1⟩γ0` on a rank-2 Clifford module.
pub fn counterexample_b() -> RingOperator<CliffordElement> {
    let g0 = CliffordElement::gamma(0);
    RingOperator::diagonal(&[g0, -g0])
}

/// The eigenbasis `|3⟩, |4⟩` of [`counterexample_b`].
pub fn counterexample_kets() -> (ModuleVector<CliffordElement>, ModuleVector<CliffordElement>) {
    type C = CliffordElement;
    let (one, g0) = (C::one(), C::gamma(0));
    let e0 = ModuleVector::<C>::basis(2, 0);
    let e1 = ModuleVector::<C>::basis(2, 1);
    let k3 = (&e0.right_mul(one + g0) + &e1.right_mul(one - g0)).scale(0.5);
    let k4 = (&e0.right_mul(one - g0) + &e1.right_mul(one + g0)).scale(0.5);
    (k3, k4)
}

/// Rebuilds the commuting-but-incompatible pair `A = diag(λ, μ)`, `B` and
/// checks each claimed property. Compatibility is expected iff `λ = μ`.
pub fn counterexample(lambda: f64, mu: f64, tol: &Tolerances) -> CounterexampleReport {
    type C = CliffordElement;
    let (one, g0) = (C::one(), C::gamma(0));
    let a = RingOperator::<C>::real_diagonal(&[lambda, mu]);
    let b = counterexample_b();
    let (k3, k4) = counterexample_kets();
    let mut facts = Vec::new();
    let mut fact = |name: &str, holds: bool, detail: String| {
        facts.push(Fact {
            name: name.to_string(),
            holds,
            detail,
        })
    };

    let sq_p = (one + g0) * (one + g0) - (C::from_real(2.0) + g0.scale(2.0));
    let sq_m = (one - g0) * (one - g0) - (C::from_real(2.0) - g0.scale(2.0));
    let cross = (one - g0) * (one + g0);
    let exact = sq_p == C::zero() && sq_m == C::zero() && cross == C::zero();
    fact(
        "(1 ± γ0)² = 2 ± 2γ0 and (1 - γ0)(1 + γ0) = 0",
        exact,
        "exact in floating point".into(),
    );

    let e0 = ModuleVector::<C>::basis(2, 0);
    let b0 = b.apply(&e0).unwrap();
    fact(
        "B|0> = |0>γ0 (non-real eigenvalue)",
        b0 == e0.right_mul(g0) && !g0.is_real(tol.algebra),
        "right multiplication by γ0".into(),
    );

    fact("B is hermitian", is_hermitian(&b, tol.algebra), String::new());

    let g33 = k3.inner(&k3).unwrap();
    let g44 = k4.inner(&k4).unwrap();
    let g34 = k3.inner(&k4).unwrap();
    let ortho = g33 == one && g44 == one && g34 == C::zero();
    let basis = is_left_basis(&[k3.clone(), k4.clone()], tol.singular).unwrap_or(false);
    fact(
        "|3>, |4> form an orthonormal left basis",
        ortho && basis,
        format!("<3|3> = 1: {}, <4|4> = 1: {}, <3|4> = 0: {}", g33 == one, g44 == one, g34 == C::zero()),
    );
    let b3 = b.apply(&k3).unwrap();
    let b4 = b.apply(&k4).unwrap();
    fact(
        "B|3> = |3>, B|4> = -|4>",
        b3 == k3 && b4 == k4.scale(-1.0),
        "exact in floating point".into(),
    );

    match left_eigen_real(&b, tol) {
        Ok(spec) => {
            let values_ok = spec.eigenvalues.len() == 2
                && (spec.eigenvalues[0] - 1.0).abs() <= tol.residual
                && (spec.eigenvalues[1] + 1.0).abs() <= tol.residual;
            // solver vectors agree with |3⟩, |4⟩ up to a right unit
            let span_ok = spec.eigenvectors.iter().zip([&k3, &k4]).all(|(psi, k)| {
                k.inner(psi)
                    .map(|u| k.right_mul(u).approx_eq(psi, tol.residual.sqrt()))
                    .unwrap_or(false)
            });
            fact(
                "B is physical with eigenvalues (+1, -1) on |3>, |4>",
                values_ok && span_ok,
                format!("solver eigenvalues {:?}", spec.eigenvalues),
            );
        }
        Err(e) => fact("B is physical with eigenvalues (+1, -1) on |3>, |4>", false, e.to_string()),
    }

    let comm = commutator_residual(&a, &b).unwrap_or(f64::INFINITY);
    fact("[A, B] = 0", comm == 0.0, format!("residual {comm:e}"));

    let expected = lambda == mu;
    let (compatible, reason) = match are_compatible(&a, &b, tol) {
        Ok(c) => (c.compatible, c.reason),
        Err(e) => (false, Some(e.to_string())),
    };
    fact(
        "compatibility decided as expected",
        compatible == expected,
        format!("compatible = {compatible}, expected {expected}"),
    );

    let passed = facts.iter().all(|f| f.holds);
    CounterexampleReport {
        lambda,
        mu,
        facts,
        compatible,
        compatibility_reason: reason,
        expected_compatible: expected,
        passed,
    }
}
