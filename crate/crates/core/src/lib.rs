//! Numerical toolkit for quantum state distinguishability: classical and
//! quantum distances and divergences, triangular-discrimination variants,
//! polarization-style error reduction, entropy-difference reductions, and
//! SWAP-test acceptance probabilities, verified by exact commuting-case
//! oracles and seeded Monte-Carlo inequality suites.

pub mod algorithms;
pub mod divergences;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod polarization;
pub mod reductions;
pub mod states;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::{DimensionCap, ToleranceConfig};
