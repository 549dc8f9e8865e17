/// Numerical thresholds shared by the spectral and measurement routines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Residual bound for algebra identities.
    pub algebra: f64,
    /// Eigenvalues within this relative distance form one eigenspace.
    pub grouping: f64,
    /// Relative singular-value threshold for invertibility and rank decisions.
    pub singular: f64,
    /// Largest imaginary part accepted for a "real" eigenvalue (relative).
    pub real_eigenvalue: f64,
    /// Residual bound for eigen-equations, orthonormality and commutators.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebra: 1e-10,
            grouping: 1e-7,
            singular: 1e-8,
            real_eigenvalue: 1e-7,
            residual: 1e-8,
        }
    }
}

impl Tolerances {
    /// Overrides every residual-style threshold with `tol`, keeping the
    /// rank and grouping thresholds.
    pub fn with_residual(mut self, tol: f64) -> Self {
        self.algebra = tol;
        self.residual = tol;
        self
    }
}
