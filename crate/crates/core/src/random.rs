//! Random ring elements, operators and generalized unitaries (`U†U = 1`)
//! for property tests, scans and the CLI.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bimodule::{ModuleVector, RingOperator};
use crate::hypercomplex::{CliffordElement, Quaternion, StarRing, BLADE_COUNT};

pub trait RandomRing: StarRing {
    /// Element with independent standard-normal coefficients.
    fn random<G: Rng + ?Sized>(rng: &mut G) -> Self;

    /// Random `u` with `ũu = uũ = 1`.
    fn random_unit<G: Rng + ?Sized>(rng: &mut G) -> Self;
}

fn normal<G: Rng + ?Sized>(rng: &mut G) -> f64 {
    rng.sample(StandardNormal)
}

impl RandomRing for Quaternion {
    fn random<G: Rng + ?Sized>(rng: &mut G) -> Self {
        Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng))
    }

    fn random_unit<G: Rng + ?Sized>(rng: &mut G) -> Self {
        loop {
            let q = Self::random(rng);
            let n = q.norm_sq();
            if n > 1e-6 {
                return q.scale(1.0 / n.sqrt());
            }
        }
    }
}

impl RandomRing for CliffordElement {
    fn random<G: Rng + ?Sized>(rng: &mut G) -> Self {
        let mut out = CliffordElement::default();
        for k in 0..BLADE_COUNT {
            out.coeffs[k] = Complex64::new(normal(rng), normal(rng));
        }
        out
    }

    /// Product of a phase, a boost `cosh t + sinh t·γ0γk` and a rotation
    /// `cos θ + sin θ·γiγj`, each satisfying `ũu = 1`.
    fn random_unit<G: Rng + ?Sized>(rng: &mut G) -> Self {
        let g = CliffordElement::gamma;
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let mut u = CliffordElement::complex(Complex64::from_polar(1.0, phase));
        let k = rng.random_range(1..4);
        let t: f64 = 0.4 * normal(rng);
        u = u * (CliffordElement::from_real(t.cosh()) + (g(0) * g(k)).scale(t.sinh()));
        let (i, j) = [(1, 2), (1, 3), (2, 3)][rng.random_range(0..3)];
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        u * (CliffordElement::from_real(theta.cos()) + (g(i) * g(j)).scale(theta.sin()))
    }
}

pub fn random_vector<R: RandomRing, G: Rng + ?Sized>(rank: usize, rng: &mut G) -> ModuleVector<R> {
    ModuleVector::new((0..rank).map(|_| R::random(rng)).collect())
}

pub fn random_operator<R: RandomRing, G: Rng + ?Sized>(rank: usize, rng: &mut G) -> RingOperator<R> {
    RingOperator::from_fn(rank, |_, _| R::random(rng))
}

/// `M + M†` for a random `M`.
pub fn random_hermitian<R: RandomRing, G: Rng + ?Sized>(rank: usize, rng: &mut G) -> RingOperator<R> {
    let m = random_operator::<R, G>(rank, rng);
    m.try_add(&m.adjoint()).expect("same rank")
}

/// Product of unit diagonals and real plane rotations; satisfies
/// `U†U = UU† = 1`.
pub fn random_generalized_unitary<R: RandomRing, G: Rng + ?Sized>(
    rank: usize,
    rng: &mut G,
) -> RingOperator<R> {
    let diag: Vec<R> = (0..rank).map(|_| R::random_unit(rng)).collect();
    let mut u = RingOperator::diagonal(&diag);
    for _ in 0..rank * rank {
        if rank < 2 {
            break;
        }
        let a = rng.random_range(0..rank);
        let mut b = rng.random_range(0..rank - 1);
        if b >= a {
            b += 1;
        }
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let mut rot = RingOperator::<R>::identity(rank);
        rot.set(a, a, R::from_real(theta.cos()));
        rot.set(b, b, R::from_real(theta.cos()));
        rot.set(a, b, R::from_real(-theta.sin()));
        rot.set(b, a, R::from_real(theta.sin()));
        let d: Vec<R> = (0..rank).map(|_| R::random_unit(rng)).collect();
        u = &(&rot * &u) * &RingOperator::diagonal(&d);
    }
    u
}

/// `U diag(λ) U†` for a random generalized unitary `U`: a physical
/// observable with the given real spectrum.
pub fn random_physical<R: RandomRing, G: Rng + ?Sized>(
    eigenvalues: &[f64],
    rng: &mut G,
) -> (RingOperator<R>, RingOperator<R>) {
    let u = random_generalized_unitary::<R, G>(eigenvalues.len(), rng);
    let a = &(&u * &RingOperator::real_diagonal(eigenvalues)) * &u.adjoint();
    (a, u)
}
