use extprob::extmeasure::{
    chsh_scan, chsh_signed_lhv, first_marginal_invariance, joint_table, local_left, local_right, measure,
    product_state, raw_weights, singlet_chsh, spin_observable, symmetrized_table, LhvMode, SignedLhvModel,
    SINGLET_SETTINGS,
};
use extprob::random::{random_generalized_unitary, random_physical, random_vector, RandomRing};
use extprob::spectral::left_eigen_real;
use extprob::{CliffordElement, ModuleVector, Quaternion, RingOperator, StarRing, Tolerances};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = CliffordElement;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Textbook Born rule on the complex representation: `Φᴴ Π Φ` traced, where
/// `Π` projects onto the eigenvalue cluster of the Hermitian rep matrix.
fn born_oracle(phi: &ModuleVector<Quaternion>, a: &RingOperator<Quaternion>) -> Vec<(f64, f64)> {
    let m: DMatrix<Complex64> = a.rep();
    let eig = SymmetricEigen::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0));
    let f = phi.rep();
    let norm = (f.adjoint() * &f).trace().re;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for k in order {
        let lambda = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        let w = (v.adjoint() * &f).norm_squared() / norm;
        match out.last_mut() {
            Some((l, p)) if (*l - lambda).abs() < 1e-6 => *p += w,
            _ => out.push((lambda, w)),
        }
    }
    out
}

#[test]
fn distributions_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..50 {
        let n = 1 + k % 3;
        let eigs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (a, _) = random_physical::<C, _>(&eigs, &mut rng);
        let spec = left_eigen_real(&a, &tol()).unwrap();
        let phi = random_vector::<C, _>(n, &mut rng);
        let d = measure(&phi, &spec).unwrap();
        assert!((d.total() - 1.0).abs() <= 1e-12);
        assert!(d.entries.iter().all(|e| (0.0..=1.0).contains(&e.probability)));
    }
}

#[test]
fn born_rule_coincidence_on_positive_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..100 {
        let n = 1 + k % 5;
        let eigs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0f64..2.0).round()).collect();
        let (a, _) = random_physical::<Quaternion, _>(&eigs, &mut rng);
        let spec = left_eigen_real(&a, &tol()).unwrap();
        let phi = random_vector::<Quaternion, _>(n, &mut rng);
        let d = measure(&phi, &spec).unwrap();
        let oracle = born_oracle(&phi, &a);
        assert_eq!(d.entries.len(), oracle.len(), "operator {k}");
        for (e, (lambda, p)) in d.entries.iter().zip(&oracle) {
            assert!(e.raw >= 0.0);
            assert!((e.eigenvalue - lambda).abs() < 1e-8);
            assert!((e.probability - p).abs() <= 1e-12, "operator {k}: {} vs {p}", e.probability);
        }
    }
}

#[test]
fn indefinite_weights_can_leave_the_unit_interval() {
    // φ = |0⟩γ1 has ⟨φ|φ⟩ = γ1γ1 = -1
    let a = RingOperator::<C>::real_diagonal(&[1.0, -1.0]);
    let spec = left_eigen_real(&a, &tol()).unwrap();
    let e0 = ModuleVector::<C>::basis(2, 0);
    let e1 = ModuleVector::<C>::basis(2, 1);
    let phi = &e0.right_mul(C::gamma(1).scale(2.0)) + &e1;
    let raw = raw_weights(&phi, &spec).unwrap();
    assert_eq!(raw[0].scalar, -4.0);
    assert_eq!(raw[1].scalar, 1.0);
    let d = measure(&phi, &spec).unwrap();
    assert_eq!(d.probabilities(), vec![0.8, 0.2]);
}

#[test]
fn frame_changes_leave_probabilities_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eigs = [1.5, -0.5, 0.25];
    let (a, _) = random_physical::<C, _>(&eigs, &mut rng);
    let phi = random_vector::<C, _>(3, &mut rng);
    let base = measure(&phi, &left_eigen_real(&a, &tol()).unwrap()).unwrap();
    let base_raw = raw_weights(&phi, &left_eigen_real(&a, &tol()).unwrap()).unwrap();
    for k in 0..100 {
        let u = random_generalized_unitary::<C, _>(3, &mut rng);
        let au = u.try_compose(&a).unwrap().try_compose(&u.adjoint()).unwrap();
        let phiu = u.apply(&phi).unwrap();
        let spec = left_eigen_real(&au, &tol()).unwrap();
        let d = measure(&phiu, &spec).unwrap();
        let raw = raw_weights(&phiu, &spec).unwrap();
        for ((x, y), (rx, ry)) in d.entries.iter().zip(&base.entries).zip(raw.iter().zip(&base_raw)) {
            assert!((x.probability - y.probability).abs() <= 1e-9, "frame {k}: {} vs {}", x.probability, y.probability);
            assert!((rx.scalar - ry.scalar).abs() <= 1e-9 * ry.scalar.abs().max(1.0), "frame {k}");
        }
    }
}

fn two_party_observables() -> (RingOperator<C>, RingOperator<C>) {
    let a = local_left(&spin_observable::<C>(0.3), 2);
    let b = local_right(2, &spin_observable::<C>(1.1));
    (a, b)
}

#[test]
fn first_measured_marginal_matches_solo() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (a, b) = two_party_observables();
    let sa = left_eigen_real(&a, &tol()).unwrap();
    let sb = left_eigen_real(&b, &tol()).unwrap();
    for _ in 0..50 {
        let psi = random_vector::<C, _>(4, &mut rng);
        let r = first_marginal_invariance(&psi, &sa, &sb, &tol()).unwrap();
        assert!(r.a_gap <= 1e-10, "{r:?}");
        let t = joint_table(&psi, &sa, &sb, &tol()).unwrap();
        let total: f64 = t.probabilities.iter().flatten().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        let sym = symmetrized_table(&psi, &sa, &sb, &tol()).unwrap();
        let total: f64 = sym.probabilities.iter().flatten().sum();
        assert!((total - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn product_states_are_order_independent() {
    // general Clifford state for the first party; complex (central)
    // coefficients and a real-entry observable for the second
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let (a1, _) = random_physical::<C, _>(&[1.0, -1.0], &mut rng);
        let b2 = spin_observable::<C>(rng.random_range(0.0..3.0));
        let psi = random_vector::<C, _>(2, &mut rng);
        let phi = ModuleVector::new(
            (0..2)
                .map(|_| C::complex(Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
                .collect(),
        );
        let state = product_state(&psi, &phi);
        let a = local_left(&a1, 2);
        let b = local_right(2, &b2);
        let sa = left_eigen_real(&a, &tol()).unwrap();
        let sb = left_eigen_real(&b, &tol()).unwrap();
        let ab = joint_table(&state, &sa, &sb, &tol()).unwrap();
        let ba = joint_table(&state, &sb, &sa, &tol()).unwrap().transpose();
        let pa = measure(&psi, &left_eigen_real(&a1, &tol()).unwrap()).unwrap().probabilities();
        let pb = measure(&phi, &left_eigen_real(&b2, &tol()).unwrap()).unwrap().probabilities();
        for i in 0..2 {
            for j in 0..2 {
                assert!((ab.probabilities[i][j] - ba.probabilities[i][j]).abs() <= 1e-10);
                assert!((ab.probabilities[i][j] - pa[i] * pb[j]).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn order_dependence_occurs_for_indefinite_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (a, b) = two_party_observables();
    let sa = left_eigen_real(&a, &tol()).unwrap();
    let sb = left_eigen_real(&b, &tol()).unwrap();
    let mut largest = 0.0f64;
    for _ in 0..20 {
        let psi = ModuleVector::new((0..4).map(|_| C::random(&mut rng)).collect());
        let ab = joint_table(&psi, &sa, &sb, &tol()).unwrap();
        let ba = joint_table(&psi, &sb, &sa, &tol()).unwrap().transpose();
        for i in 0..2 {
            for j in 0..2 {
                largest = largest.max((ab.probabilities[i][j] - ba.probabilities[i][j]).abs());
            }
        }
    }
    assert!(largest > 1e-3);
}

#[test]
fn chsh_witness_and_scans() {
    let w = SignedLhvModel::witness();
    assert_eq!(chsh_signed_lhv(&w, LhvMode::Raw).unwrap(), 6.0);
    assert_eq!(chsh_signed_lhv(&w, LhvMode::Renormalized).unwrap(), 2.0 / 3.0);
    let values = chsh_scan(10_000, 7, LhvMode::Renormalized).unwrap();
    assert!(values.iter().all(|s| s.abs() <= 2.0 + 1e-9));
    assert_eq!(values, chsh_scan(10_000, 7, LhvMode::Renormalized).unwrap());
    let raw = chsh_scan(2_000, 7, LhvMode::Raw).unwrap();
    assert!(raw.iter().any(|s| s.abs() > 2.0));
}

#[test]
fn singlet_reaches_two_root_two() {
    let (a, b) = SINGLET_SETTINGS;
    let s = singlet_chsh::<Quaternion>(a, b, &tol()).unwrap();
    assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() <= 1e-6);
    let s = singlet_chsh::<C>(a, b, &tol()).unwrap();
    assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() <= 1e-6);
}

#[test]
fn weights_are_ring_scalars_for_quaternions() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (a, _) = random_physical::<Quaternion, _>(&[1.0, 2.0, 3.0], &mut rng);
    let phi = random_vector::<Quaternion, _>(3, &mut rng);
    for w in raw_weights(&phi, &left_eigen_real(&a, &tol()).unwrap()).unwrap() {
        assert!(w.remainder <= 1e-10 * w.magnitude.max(1.0));
        assert!(w.value.is_real(1e-10));
    }
}
