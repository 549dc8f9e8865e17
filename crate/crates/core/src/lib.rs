//! Quantum mechanics over quaternion and Clifford bimodules with
//! indefinite scalar products, and two readings of extended
//! (negative or greater-than-one) probabilities:
//!
//! * [`extmeasure`]: raw weights `φ_λ = ⟨φ|P_λ|φ⟩` renormalized to
//!   `|φ_λ| / Σ_μ |φ_μ|`, ordered joint statistics and CHSH harnesses;
//! * [`detector`]: integer detector colors, the extended absorption
//!   probability and the coarse-grained observer.

pub mod bimodule;
pub mod detector;
pub mod error;
pub mod extmeasure;
pub mod hypercomplex;
pub mod io;
pub mod linalg;
pub mod random;
pub mod spectral;
pub mod tolerance;
pub mod verify;

pub use bimodule::{is_left_basis, GramData, ModuleVector, RingOperator};
pub use error::{Error, Result};
pub use hypercomplex::{CliffordElement, Quaternion, RingKind, StarRing};
pub use spectral::{are_compatible, commute, is_hermitian, is_physical, left_eigen_real, SpectralResult};
pub use tolerance::Tolerances;
