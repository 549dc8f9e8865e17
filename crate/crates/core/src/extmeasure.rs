//! Renormalized extended-probability measurement rule.
//!
//! Raw weights `φ_λ = ⟨φ|P_λ|φ⟩` may have scalar parts outside `[0, 1]`.
//! They are turned into a distribution by `P(φ, λ) = |φ_λ| / Σ_μ |φ_μ|`,
//! where `|φ_λ|` is the absolute value of the scalar part. Sequential
//! measurements of commuting projection families use the same rule at every
//! stage, which makes joint statistics depend on the measurement order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bimodule::{ModuleVector, RingOperator};
use crate::error::{Error, Result};
use crate::hypercomplex::{CliffordElement, StarRing};
use crate::random::RandomRing;
use crate::spectral::{commute, Projection, SpectralResult, SpectralRing};
use crate::tolerance::Tolerances;

/// Weights below this fraction of the total are treated as exact zeros.
const NEGLIGIBLE: f64 = 1e-13;

/// `φ_λ = ⟨φ|P_λ|φ⟩` for one eigenvalue group.
#[derive(Debug, Clone, PartialEq)]
pub struct RawWeight<R> {
    pub eigenvalue: f64,
    pub value: R,
    /// Real scalar part of `value`.
    pub scalar: f64,
    /// `|scalar|`.
    pub magnitude: f64,
    /// Coefficient norm of everything except the real scalar part.
    pub remainder: f64,
}

impl<R: StarRing> RawWeight<R> {
    pub fn new(eigenvalue: f64, value: R) -> Self {
        let scalar = value.scalar_part().re;
        RawWeight {
            eigenvalue,
            value,
            scalar,
            magnitude: scalar.abs(),
            remainder: (value - R::from_real(scalar)).coeff_norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtEntry {
    pub eigenvalue: f64,
    pub probability: f64,
    pub raw: f64,
}

/// Renormalized distribution over eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtDistribution {
    pub entries: Vec<ExtEntry>,
    pub denominator: f64,
}

impl ExtDistribution {
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }
}

/// One raw weight per eigenvalue group of `spec`.
pub fn raw_weights<R: StarRing>(phi: &ModuleVector<R>, spec: &SpectralResult<R>) -> Result<Vec<RawWeight<R>>> {
    spec.projections()?
        .iter()
        .map(|p| Ok(RawWeight::new(p.eigenvalue, phi.inner(&p.operator.apply(phi)?)?)))
        .collect()
}

/// Renormalizes `(eigenvalue, raw scalar)` pairs.
pub fn renormalize(pairs: &[(f64, f64)]) -> Result<ExtDistribution> {
    let denominator: f64 = pairs.iter().map(|(_, s)| s.abs()).sum();
    if !(denominator > 0.0) || !denominator.is_finite() {
        return Err(Error::DegenerateState(format!(
            "sum of |raw weights| is {denominator}; no distribution can be formed"
        )));
    }
    Ok(ExtDistribution {
        entries: pairs
            .iter()
            .map(|&(eigenvalue, raw)| ExtEntry {
                eigenvalue,
                probability: raw.abs() / denominator,
                raw,
            })
            .collect(),
        denominator,
    })
}

/// `P(φ, λ) = |φ_λ| / Σ_μ |φ_μ|`.
pub fn ext_probabilities<R: StarRing>(weights: &[RawWeight<R>]) -> Result<ExtDistribution> {
    let pairs: Vec<(f64, f64)> = weights.iter().map(|w| (w.eigenvalue, w.scalar)).collect();
    renormalize(&pairs)
}

/// Solo distribution of an observable in state `phi`.
pub fn measure<R: StarRing>(phi: &ModuleVector<R>, spec: &SpectralResult<R>) -> Result<ExtDistribution> {
    ext_probabilities(&raw_weights(phi, spec)?)
}

/// Post-measurement state `Pφ`, left unnormalized.
pub fn collapse<R: StarRing>(phi: &ModuleVector<R>, p: &Projection<R>) -> Result<ModuleVector<R>> {
    p.operator.apply(phi)
}

/// Joint statistics of measuring the first observable, then the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub first_values: Vec<f64>,
    pub second_values: Vec<f64>,
    /// `probabilities[i][j]`: first observable gives group `i`, second gives `j`.
    pub probabilities: Vec<Vec<f64>>,
}

impl JointTable {
    /// Marginal of the first-measured observable.
    pub fn first_marginal(&self) -> Vec<f64> {
        self.probabilities.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn second_marginal(&self) -> Vec<f64> {
        (0..self.second_values.len())
            .map(|j| self.probabilities.iter().map(|row| row[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> JointTable {
        JointTable {
            first_values: self.second_values.clone(),
            second_values: self.first_values.clone(),
            probabilities: (0..self.second_values.len())
                .map(|j| self.probabilities.iter().map(|row| row[j]).collect())
                .collect(),
        }
    }
}

fn check_commuting<R: StarRing>(ps: &[Projection<R>], qs: &[Projection<R>], tol: f64) -> Result<()> {
    for p in ps {
        for q in qs {
            if !commute(&p.operator, &q.operator, tol)? {
                return Err(Error::NotCommuting {
                    residual: p.operator.commutator(&q.operator)?.max_entry_norm(),
                });
            }
        }
    }
    Ok(())
}

/// Ordered joint statistics with `first` measured before `second`:
///
/// `|⟨ψ|P_i Q_j P_i|ψ⟩| / Σ_k |⟨ψ|P_i Q_k P_i|ψ⟩| · |⟨ψ|P_i|ψ⟩| / Σ_k |⟨ψ|P_k|ψ⟩|`
///
/// A first-stage outcome with vanishing weight contributes zero joint
/// probability; its conditional factor is not evaluated.
pub fn joint_table<R: StarRing>(
    psi: &ModuleVector<R>,
    first: &SpectralResult<R>,
    second: &SpectralResult<R>,
    tol: &Tolerances,
) -> Result<JointTable> {
    let ps = first.projections()?;
    let qs = second.projections()?;
    check_commuting(&ps, &qs, tol.residual)?;
    let scalar = |v: &ModuleVector<R>, w: &ModuleVector<R>| -> Result<f64> { Ok(v.inner(w)?.scalar_part().re.abs()) };

    let mut first_w = Vec::with_capacity(ps.len());
    for p in &ps {
        first_w.push(scalar(psi, &p.operator.apply(psi)?)?);
    }
    let denom: f64 = first_w.iter().sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateState(
            "all first-stage weights vanish".into(),
        ));
    }
    let mut probabilities = Vec::with_capacity(ps.len());
    for (p, &w) in ps.iter().zip(&first_w) {
        if w <= NEGLIGIBLE * denom {
            probabilities.push(vec![0.0; qs.len()]);
            continue;
        }
        let collapsed = p.operator.apply(psi)?;
        let mut cond = Vec::with_capacity(qs.len());
        for q in &qs {
            // ⟨ψ|P Q P|ψ⟩ = ⟨Pψ|Q Pψ⟩ since P is self-adjoint
            cond.push(scalar(&collapsed, &q.operator.apply(&collapsed)?)?);
        }
        let cden: f64 = cond.iter().sum();
        if !(cden > 0.0) {
            return Err(Error::DegenerateState(format!(
                "conditional weights vanish after first outcome {:.6e}",
                p.eigenvalue
            )));
        }
        probabilities.push(cond.iter().map(|c| c / cden * (w / denom)).collect());
    }
    Ok(JointTable {
        first_values: ps.iter().map(|p| p.eigenvalue).collect(),
        second_values: qs.iter().map(|q| q.eigenvalue).collect(),
        probabilities,
    })
}

/// Probability that `a` yields group `i` and then `b` yields group `j`.
pub fn ordered_joint<R: StarRing>(
    psi: &ModuleVector<R>,
    a: &SpectralResult<R>,
    b: &SpectralResult<R>,
    i: usize,
    j: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let t = joint_table(psi, a, b, tol)?;
    t.probabilities
        .get(i)
        .and_then(|row| row.get(j))
        .copied()
        .ok_or_else(|| Error::InvalidInput(format!("outcome indices ({i}, {j}) out of range")))
}

/// Both orders averaged with weight ½; indexed `[i][j]` with `i` from `a`.
pub fn symmetrized_table<R: StarRing>(
    psi: &ModuleVector<R>,
    a: &SpectralResult<R>,
    b: &SpectralResult<R>,
    tol: &Tolerances,
) -> Result<JointTable> {
    let ab = joint_table(psi, a, b, tol)?;
    let ba = joint_table(psi, b, a, tol)?.transpose();
    Ok(JointTable {
        first_values: ab.first_values.clone(),
        second_values: ab.second_values.clone(),
        probabilities: ab
            .probabilities
            .iter()
            .zip(&ba.probabilities)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| 0.5 * x + 0.5 * y).collect())
            .collect(),
    })
}

pub fn symmetrized_joint<R: StarRing>(
    psi: &ModuleVector<R>,
    a: &SpectralResult<R>,
    b: &SpectralResult<R>,
    i: usize,
    j: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let t = symmetrized_table(psi, a, b, tol)?;
    t.probabilities
        .get(i)
        .and_then(|row| row.get(j))
        .copied()
        .ok_or_else(|| Error::InvalidInput(format!("outcome indices ({i}, {j}) out of range")))
}

/// Marginals of the `a`-first joint table against the solo distributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalReport {
    pub a_marginal: Vec<f64>,
    pub a_solo: Vec<f64>,
    pub a_gap: f64,
    pub b_marginal: Vec<f64>,
    pub b_solo: Vec<f64>,
    pub b_gap: f64,
}

pub fn first_marginal_invariance<R: StarRing>(
    psi: &ModuleVector<R>,
    a: &SpectralResult<R>,
    b: &SpectralResult<R>,
    tol: &Tolerances,
) -> Result<MarginalReport> {
    let t = joint_table(psi, a, b, tol)?;
    let a_solo = measure(psi, a)?.probabilities();
    let b_solo = measure(psi, b)?.probabilities();
    let a_marginal = t.first_marginal();
    let b_marginal = t.second_marginal();
    let gap = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    Ok(MarginalReport {
        a_gap: gap(&a_marginal, &a_solo),
        b_gap: gap(&b_marginal, &b_solo),
        a_marginal,
        a_solo,
        b_marginal,
        b_solo,
    })
}

/// `A ⊗ 1` on a composite module with basis `e_{(a, b)}`, index `a·n₂ + b`.
///
/// Local operators of the two parties commute only when their entries
/// commute; callers check this with [`commute`].
pub fn local_left<R: StarRing>(a: &RingOperator<R>, n2: usize) -> RingOperator<R> {
    let n1 = a.rank();
    RingOperator::from_fn(n1 * n2, |r, c| {
        if r % n2 == c % n2 {
            a.get(r / n2, c / n2)
        } else {
            R::zero()
        }
    })
}

/// `1 ⊗ B` on a composite module with basis `e_{(a, b)}`, index `a·n₂ + b`.
pub fn local_right<R: StarRing>(n1: usize, b: &RingOperator<R>) -> RingOperator<R> {
    let n2 = b.rank();
    RingOperator::from_fn(n1 * n2, |r, c| {
        if r / n2 == c / n2 {
            b.get(r % n2, c % n2)
        } else {
            R::zero()
        }
    })
}

/// Product state with coefficients `ψ_a φ_b`.
pub fn product_state<R: StarRing>(psi: &ModuleVector<R>, phi: &ModuleVector<R>) -> ModuleVector<R> {
    let mut out = Vec::with_capacity(psi.rank() * phi.rank());
    for &a in psi.coeffs() {
        for &b in phi.coeffs() {
            out.push(a * b);
        }
    }
    ModuleVector::new(out)
}

/// Signed local hidden-variable model with two settings per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedLhvModel {
    /// Signed weights of the hidden states; must sum to 1.
    pub weights: Vec<f64>,
    /// `a_outcomes[λ][setting] ∈ {+1, −1}`.
    pub a_outcomes: Vec<[i8; 2]>,
    pub b_outcomes: Vec<[i8; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LhvMode {
    /// Signed weights used as they are.
    Raw,
    /// Weights replaced by `|w| / Σ|w|`.
    Renormalized,
}

impl SignedLhvModel {
    /// The two-state witness: weights `(2, −1)`; state 1 answers `+1`
    /// everywhere, state 2 answers `+1` for A and `−1` for B.
    pub fn witness() -> Self {
        SignedLhvModel {
            weights: vec![2.0, -1.0],
            a_outcomes: vec![[1, 1], [1, 1]],
            b_outcomes: vec![[1, 1], [-1, -1]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 || self.a_outcomes.len() != n || self.b_outcomes.len() != n {
            return Err(Error::InvalidInput(
                "hidden-variable model needs one outcome pair per party and state".into(),
            ));
        }
        if self
            .a_outcomes
            .iter()
            .chain(&self.b_outcomes)
            .flatten()
            .any(|&o| o != 1 && o != -1)
        {
            return Err(Error::InvalidInput("outcomes must be +1 or -1".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        let scale: f64 = self.weights.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
        if !sum.is_finite() || (sum - 1.0).abs() > 1e-12 * scale {
            return Err(Error::WeightSumInvalid(sum));
        }
        Ok(())
    }

    /// Random model with 2–8 hidden states and signed weights summing to 1.
    pub fn random<G: Rng + ?Sized>(rng: &mut G) -> Self {
        let n = rng.random_range(2..=8);
        let mut weights: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let shift = (weights.iter().sum::<f64>() - 1.0) / n as f64;
        weights.iter_mut().for_each(|w| *w -= shift);
        let outcome = |rng: &mut G| if rng.random::<bool>() { 1i8 } else { -1 };
        let a_outcomes = (0..n).map(|_| [outcome(rng), outcome(rng)]).collect();
        let b_outcomes = (0..n).map(|_| [outcome(rng), outcome(rng)]).collect();
        SignedLhvModel {
            weights,
            a_outcomes,
            b_outcomes,
        }
    }
}

/// `S = E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`, with `E` indexed
/// `[a setting][b setting]`.
pub fn chsh_value(e: [[f64; 2]; 2]) -> f64 {
    e[0][0] + e[0][1] + e[1][0] - e[1][1]
}

pub fn chsh_signed_lhv(model: &SignedLhvModel, mode: LhvMode) -> Result<f64> {
    model.validate()?;
    // renormalizing is linear, so divide once at the end
    let (weights, total): (Vec<f64>, f64) = match mode {
        LhvMode::Raw => (model.weights.clone(), 1.0),
        LhvMode::Renormalized => (
            model.weights.iter().map(|w| w.abs()).collect(),
            model.weights.iter().map(|w| w.abs()).sum(),
        ),
    };
    let mut e = [[0.0; 2]; 2];
    for (x, row) in e.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            *cell = weights
                .iter()
                .zip(model.a_outcomes.iter().zip(&model.b_outcomes))
                .map(|(w, (a, b))| w * f64::from(a[x]) * f64::from(b[y]))
                .sum();
        }
    }
    Ok(chsh_value(e) / total)
}

/// CHSH values of `count` random signed models. Model `k` is drawn from
/// its own generator seeded by the `k`-th output of a master generator, so
/// the result does not depend on thread scheduling.
pub fn chsh_scan(count: usize, seed: u64, mode: LhvMode) -> Result<Vec<f64>> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..count).map(|_| master.random()).collect();
    seeds
        .par_iter()
        .map(|&s| chsh_signed_lhv(&SignedLhvModel::random(&mut ChaCha8Rng::seed_from_u64(s)), mode))
        .collect()
}

/// Correlator `E = Σ_ij λ_i μ_j p(i, j)` of a joint table.
pub fn correlator(t: &JointTable) -> f64 {
    let mut e = 0.0;
    for (i, row) in t.probabilities.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            e += t.first_values[i] * t.second_values[j] * p;
        }
    }
    e
}

/// CHSH value from symmetrized joint statistics of two settings per party.
pub fn chsh_quantum<R: StarRing>(
    psi: &ModuleVector<R>,
    a: [&SpectralResult<R>; 2],
    b: [&SpectralResult<R>; 2],
    tol: &Tolerances,
) -> Result<f64> {
    let mut e = [[0.0; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            e[x][y] = correlator(&symmetrized_table(psi, a[x], b[y], tol)?);
        }
    }
    Ok(chsh_value(e))
}

/// `cos θ σ_z + sin θ σ_x` as a real-entry rank-2 operator.
pub fn spin_observable<R: StarRing>(theta: f64) -> RingOperator<R> {
    let (s, c) = theta.sin_cos();
    RingOperator::from_fn(2, |r, col| {
        R::from_real(match (r, col) {
            (0, 0) => c,
            (1, 1) => -c,
            _ => s,
        })
    })
}

/// Angles `[a, a′]` and `[b, b′]` maximizing the singlet CHSH value.
pub const SINGLET_SETTINGS: ([f64; 2], [f64; 2]) = (
    [0.0, std::f64::consts::FRAC_PI_2],
    [5.0 * std::f64::consts::FRAC_PI_4, 3.0 * std::f64::consts::FRAC_PI_4],
);

/// `(|01⟩ − |10⟩)/√2` on the rank-4 two-party module.
pub fn singlet<R: StarRing>() -> ModuleVector<R> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ModuleVector::new(vec![R::zero(), R::from_real(h), R::from_real(-h), R::zero()])
}

/// CHSH value of the singlet with local spin observables at the given
/// angles.
pub fn singlet_chsh<R: SpectralRing>(alice: [f64; 2], bob: [f64; 2], tol: &Tolerances) -> Result<f64> {
    two_party_chsh(&singlet::<R>(), alice, bob, tol)
}

/// CHSH value of a rank-4 two-party state with `A = spin(a) ⊗ 1` and
/// `B = 1 ⊗ spin(b)`, using order-symmetrized joint statistics.
pub fn two_party_chsh<R: SpectralRing>(
    psi: &ModuleVector<R>,
    alice: [f64; 2],
    bob: [f64; 2],
    tol: &Tolerances,
) -> Result<f64> {
    if psi.rank() != 4 {
        return Err(Error::RankMismatch {
            expected: 4,
            found: psi.rank(),
        });
    }
    let spectrum = |op: RingOperator<R>| crate::spectral::left_eigen_real(&op, tol);
    let a = [
        spectrum(local_left(&spin_observable::<R>(alice[0]), 2))?,
        spectrum(local_left(&spin_observable::<R>(alice[1]), 2))?,
    ];
    let b = [
        spectrum(local_right(2, &spin_observable::<R>(bob[0])))?,
        spectrum(local_right(2, &spin_observable::<R>(bob[1])))?,
    ];
    chsh_quantum(psi, [&a[0], &a[1]], [&b[0], &b[1]], tol)
}

/// A state and two commuting observables exhibiting order-dependent joint
/// statistics.
#[derive(Debug, Clone)]
pub struct AsymmetricInstance {
    pub state: ModuleVector<CliffordElement>,
    pub a: RingOperator<CliffordElement>,
    pub b: RingOperator<CliffordElement>,
    pub i: usize,
    pub j: usize,
    pub a_first: f64,
    pub b_first: f64,
    pub gap: f64,
    pub seed: u64,
}

/// Seeded search over random Clifford states on a two-party rank-4 module
/// (`A = σ_z ⊗ 1`, `B = 1 ⊗ σ_x`) for an outcome pair whose ordered joint
/// probabilities differ by at least `min_gap`.
pub fn find_order_asymmetry(seed: u64, min_gap: f64, max_tries: usize, tol: &Tolerances) -> Option<AsymmetricInstance> {
    use crate::spectral::left_eigen_real;
    let a = local_left(&spin_observable::<CliffordElement>(0.0), 2);
    let b = local_right(2, &spin_observable::<CliffordElement>(std::f64::consts::FRAC_PI_2));
    let sa = left_eigen_real(&a, tol).ok()?;
    let sb = left_eigen_real(&b, tol).ok()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_tries {
        let s: u64 = master.random();
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let state = ModuleVector::new((0..4).map(|_| CliffordElement::random(&mut rng).scale(0.5)).collect());
        let (Ok(ab), Ok(ba)) = (joint_table(&state, &sa, &sb, tol), joint_table(&state, &sb, &sa, tol)) else {
            continue;
        };
        let ba = ba.transpose();
        let mut best = (0, 0, 0.0);
        for i in 0..ab.first_values.len() {
            for j in 0..ab.second_values.len() {
                let gap = (ab.probabilities[i][j] - ba.probabilities[i][j]).abs();
                if gap > best.2 {
                    best = (i, j, gap);
                }
            }
        }
        if best.2 >= min_gap {
            let (i, j, gap) = best;
            return Some(AsymmetricInstance {
                state,
                a,
                b,
                i,
                j,
                a_first: ab.probabilities[i][j],
                b_first: ba.probabilities[i][j],
                gap,
                seed: s,
            });
        }
    }
    None
}
