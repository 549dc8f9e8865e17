//! JSON file formats.
//!
//! * ring element: quaternion `[re, i, j, k]`; Clifford 16 `[re, im]` pairs
//! * vector: `{"ring": "quaternion" | "clifford", "rank": n, "coeffs": [elem; n]}`
//! * operator: `{"ring", "rank": n, "entries": [elem; n·n]}` row-major
//!
//! Parse failures carry a JSON pointer to the offending value.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bimodule::{ModuleVector, RingOperator};
use crate::error::{Error, Result};
use crate::hypercomplex::{CliffordElement, Quaternion, RingKind, StarRing};
use crate::spectral::{PhysicalReport, SpectralRing};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDoc<R> {
    pub ring: RingKind,
    pub rank: usize,
    pub coeffs: Vec<R>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc<R> {
    pub ring: RingKind,
    pub rank: usize,
    pub entries: Vec<R>,
}

impl<R: StarRing> From<&ModuleVector<R>> for VectorDoc<R> {
    fn from(v: &ModuleVector<R>) -> Self {
        VectorDoc {
            ring: R::KIND,
            rank: v.rank(),
            coeffs: v.coeffs().to_vec(),
        }
    }
}

impl<R: StarRing> From<&RingOperator<R>> for OperatorDoc<R> {
    fn from(a: &RingOperator<R>) -> Self {
        OperatorDoc {
            ring: R::KIND,
            rank: a.rank(),
            entries: a.entries().to_vec(),
        }
    }
}

impl<R: StarRing> VectorDoc<R> {
    pub fn into_vector(self) -> Result<ModuleVector<R>> {
        check_ring::<R>(self.ring)?;
        if self.coeffs.len() != self.rank {
            return Err(Error::InvalidInput(format!(
                "/coeffs: rank is {} but {} coefficients given",
                self.rank,
                self.coeffs.len()
            )));
        }
        Ok(ModuleVector::new(self.coeffs))
    }
}

impl<R: StarRing> OperatorDoc<R> {
    pub fn into_operator(self) -> Result<RingOperator<R>> {
        check_ring::<R>(self.ring)?;
        if self.entries.len() != self.rank * self.rank {
            return Err(Error::InvalidInput(format!(
                "/entries: rank {} needs {} entries, {} given",
                self.rank,
                self.rank * self.rank,
                self.entries.len()
            )));
        }
        RingOperator::from_entries(self.rank, self.entries)
    }
}

fn check_ring<R: StarRing>(tag: RingKind) -> Result<()> {
    if tag != R::KIND {
        return Err(Error::RingMismatch {
            left: R::KIND.to_string(),
            right: tag.to_string(),
        });
    }
    Ok(())
}

/// Deserializes with a JSON-pointer path in the error message.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        use serde_path_to_error::Segment;
        let mut pointer = String::new();
        for seg in e.path().iter() {
            pointer.push('/');
            match seg {
                Segment::Seq { index } => pointer.push_str(&index.to_string()),
                Segment::Map { key } => pointer.push_str(&key.replace('~', "~0").replace('/', "~1")),
                Segment::Enum { variant } => pointer.push_str(variant),
                Segment::Unknown => pointer.push('?'),
            }
        }
        if pointer.is_empty() {
            pointer.push('/');
        }
        Error::InvalidInput(format!("{pointer}: {}", e.into_inner()))
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}

#[derive(Deserialize)]
struct RingProbe {
    ring: RingKind,
}

fn ring_of(text: &str) -> Result<RingKind> {
    let probe: RingProbe = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("/ring: {e}")))?;
    Ok(probe.ring)
}

/// A vector over either ring.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyVector {
    Quaternion(ModuleVector<Quaternion>),
    Clifford(ModuleVector<CliffordElement>),
}

/// An operator over either ring.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyOperator {
    Quaternion(RingOperator<Quaternion>),
    Clifford(RingOperator<CliffordElement>),
}

impl AnyVector {
    pub fn parse(text: &str) -> Result<Self> {
        match ring_of(text)? {
            RingKind::Quaternion => Ok(AnyVector::Quaternion(from_json::<VectorDoc<Quaternion>>(text)?.into_vector()?)),
            RingKind::Clifford => Ok(AnyVector::Clifford(from_json::<VectorDoc<CliffordElement>>(text)?.into_vector()?)),
        }
    }

    pub fn ring(&self) -> RingKind {
        match self {
            AnyVector::Quaternion(_) => RingKind::Quaternion,
            AnyVector::Clifford(_) => RingKind::Clifford,
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyVector::Quaternion(v) => to_json(&VectorDoc::from(v)),
            AnyVector::Clifford(v) => to_json(&VectorDoc::from(v)),
        }
    }
}

impl AnyOperator {
    pub fn parse(text: &str) -> Result<Self> {
        match ring_of(text)? {
            RingKind::Quaternion => Ok(AnyOperator::Quaternion(
                from_json::<OperatorDoc<Quaternion>>(text)?.into_operator()?,
            )),
            RingKind::Clifford => Ok(AnyOperator::Clifford(
                from_json::<OperatorDoc<CliffordElement>>(text)?.into_operator()?,
            )),
        }
    }

    pub fn ring(&self) -> RingKind {
        match self {
            AnyOperator::Quaternion(_) => RingKind::Quaternion,
            AnyOperator::Clifford(_) => RingKind::Clifford,
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyOperator::Quaternion(a) => to_json(&OperatorDoc::from(a)),
            AnyOperator::Clifford(a) => to_json(&OperatorDoc::from(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    pub hermitian: bool,
    pub reason: Option<String>,
    pub eigen_residual: Option<f64>,
    pub gram_residual: Option<f64>,
}

/// Output of the `spectral` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDoc<R> {
    pub physical: bool,
    pub eigenvalues: Vec<f64>,
    pub signs: Vec<f64>,
    pub basis: Vec<VectorDoc<R>>,
    pub diagnostics: SpectralDiagnostics,
}

pub fn spectral_doc<R: SpectralRing>(a: &RingOperator<R>, tol: &Tolerances) -> Result<SpectralDoc<R>> {
    let PhysicalReport {
        physical,
        hermitian,
        spectrum,
        reason,
    } = crate::spectral::is_physical(a, tol);
    let mut doc = SpectralDoc {
        physical,
        eigenvalues: Vec::new(),
        signs: Vec::new(),
        basis: Vec::new(),
        diagnostics: SpectralDiagnostics {
            hermitian,
            reason,
            eigen_residual: None,
            gram_residual: None,
        },
    };
    if let Some(spec) = spectrum {
        let check = spec.check(a, tol.singular)?;
        doc.diagnostics.eigen_residual = Some(check.eigen_residual);
        doc.diagnostics.gram_residual = Some(check.gram_residual);
        doc.basis = spec.eigenvectors.iter().map(VectorDoc::from).collect();
        doc.eigenvalues = spec.eigenvalues;
        doc.signs = spec.signs;
    }
    Ok(doc)
}

/// Frozen order-asymmetry instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryDoc {
    pub seed: u64,
    pub state: VectorDoc<CliffordElement>,
    pub a: OperatorDoc<CliffordElement>,
    pub b: OperatorDoc<CliffordElement>,
    pub i: usize,
    pub j: usize,
    pub a_first: f64,
    pub b_first: f64,
    pub gap: f64,
}

impl From<&crate::extmeasure::AsymmetricInstance> for AsymmetryDoc {
    fn from(x: &crate::extmeasure::AsymmetricInstance) -> Self {
        AsymmetryDoc {
            seed: x.seed,
            state: VectorDoc::from(&x.state),
            a: OperatorDoc::from(&x.a),
            b: OperatorDoc::from(&x.b),
            i: x.i,
            j: x.j,
            a_first: x.a_first,
            b_first: x.b_first,
            gap: x.gap,
        }
    }
}

/// Output of the `measure` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub ring: RingKind,
    pub distribution: crate::extmeasure::ExtDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// `a` first, then `b`.
    Ab,
    Ba,
    /// Both orders averaged with weight ½.
    Sym,
}

/// Output of the `joint` subcommand. Rows follow the eigenvalues of `a`
/// whatever the measurement order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDoc {
    pub ring: RingKind,
    pub order: Order,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
    pub a_marginal: Vec<f64>,
    pub b_marginal: Vec<f64>,
}

/// Output of the `chsh` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshDoc {
    pub mode: String,
    pub seed: Option<u64>,
    pub values: Vec<f64>,
    pub max_abs: f64,
}
