//! The two star-rings: real quaternions and the complexified spacetime
//! Clifford algebra Cl(1,3), with their involutions, scalar parts and
//! faithful complex matrix representations.

mod clifford;
mod quaternion;
mod ring;

pub use clifford::{blade_grade, blade_product, CliffordElement, BLADE_COUNT, BLADE_LABELS};
pub use quaternion::Quaternion;
pub use ring::{RingKind, StarRing};

/// Dense complex matrix used for ring representations.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
