//! Numerical tolerances shared by state validation and divergence evaluation.

use serde::{Deserialize, Serialize};

/// Tolerances used when validating states and cross-checking dual computation
/// routes. All quantities handled by this crate are O(1), so absolute
/// tolerances are meaningful throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Max allowed entry of |A - A†| before a matrix is rejected as non-Hermitian.
    pub hermiticity: f64,
    /// Max allowed |Tr - 1| before a matrix is rejected; within it the trace
    /// is renormalized to exactly 1.
    pub trace: f64,
    /// Eigenvalues above -psd are treated as numerically nonnegative.
    pub psd: f64,
    /// Max allowed ‖V Λ V† - A‖_max after an eigendecomposition.
    pub reconstruction: f64,
    /// Agreement required between two algebraic routes to the same quantity.
    pub cross_check: f64,
    /// POVM completeness residual allowed for measurement ensembles.
    pub completeness: f64,
    /// Absolute support threshold override. `None` uses the spectral cutoff
    /// dim · ε_machine · λ_max.
    pub support_override: Option<f64>,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            hermiticity: 1e-9,
            trace: 1e-9,
            psd: 1e-9,
            reconstruction: 1e-8,
            cross_check: 1e-9,
            completeness: 1e-9,
            support_override: None,
        }
    }
}

impl ToleranceConfig {
    /// Threshold below which an eigenvalue counts as outside the support.
    pub fn support_threshold(&self, dim: usize, lambda_max: f64) -> f64 {
        match self.support_override {
            Some(t) => t,
            None => dim as f64 * f64::EPSILON * lambda_max.abs().max(1.0),
        }
    }
}

/// Cap on the Hilbert-space dimension of materialized states. Tensor powers
/// grow exponentially; anything beyond the cap is handled analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionCap(pub usize);

impl Default for DimensionCap {
    fn default() -> Self {
        DimensionCap(4096)
    }
}

/// One-sided inequality check `lhs <= rhs` with slack scaled to the larger
/// operand (absolute slack for values below 1).
pub fn one_sided_ok(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs <= rhs + slack * lhs.abs().max(rhs.abs()).max(1.0)
}
