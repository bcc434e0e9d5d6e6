use thiserror::Error;

/// Errors raised across state construction, divergence evaluation, and the
/// reduction/polarization procedures. Each variant names the violated
/// invariant together with the measured violation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A†| = {violation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { violation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.6e} below -{tolerance:.3e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("trace deviates from 1: |Tr - 1| = {violation:.3e} exceeds {tolerance:.3e}")]
    BadTrace { violation: f64, tolerance: f64 },

    #[error("Bloch vector lies outside the unit ball: norm = {norm}")]
    BlochOutOfBall { norm: f64 },

    #[error("negative probability entry: p[{index}] = {value}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("probability vector sums to {sum}, expected 1")]
    BadNormalization { sum: f64 },

    #[error("rank {rank} invalid for dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("factor dimensions {factors:?} do not multiply to {dim}")]
    BadFactorization { factors: Vec<usize>, dim: usize },

    #[error("invalid keep set {keep:?} for {nfactors} tensor factors")]
    BadIndexSet { keep: Vec<usize>, nfactors: usize },

    #[error("scalar function undefined at eigenvalue {eigenvalue:.6e} (support threshold {threshold:.3e})")]
    SingularOnSupport { eigenvalue: f64, threshold: f64 },

    #[error("blocks have mismatched dimensions: {dims:?}")]
    MismatchedBlocks { dims: Vec<usize> },

    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: String },

    #[error("eigenvalue {eigenvalue:.6e} below -{tolerance:.3e}; entropy undefined")]
    NegativeEigenvalue { eigenvalue: f64, tolerance: f64 },

    #[error("support violation: Tr(ρ P_ker(σ)) = {mass:.6e}; relative entropy diverges")]
    SupportViolation { mass: f64 },

    #[error("difference has weight {off_support_mass:.6e} outside the support of the average state")]
    SupportInconsistency { off_support_mass: f64 },

    #[error("{quantity} = {value} outside the valid range {range}")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("states coincide within tolerance (max |ρ0 - ρ1| = {max_diff:.3e}); equality conditions undefined")]
    DegeneratePair { max_diff: f64 },

    #[error("parameter regime violated: {inequality} (lhs = {lhs}, rhs = {rhs})")]
    RegimeViolation {
        inequality: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("invalid promise thresholds: alpha = {alpha}, beta = {beta}")]
    BadPromise { alpha: f64, beta: f64 },

    #[error("bisection failed to bracket H2(p) = {target} (residual {residual:.3e})")]
    BisectionFailure { target: f64, residual: f64 },

    #[error("fixture `{name}` violated `{relation}`: {values}")]
    FixtureFailure {
        name: String,
        relation: String,
        values: String,
    },

    #[error("unsupported report format `{format}`")]
    UnsupportedFormat { format: String },

    #[error("reconstruction residual {residual:.3e} exceeds {tolerance:.3e}; eigendecomposition unreliable")]
    BadReconstruction { residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
