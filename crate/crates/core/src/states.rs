//! Construction, validation, random generation, and composition of density
//! matrices.
//!
//! A [`DensityMatrix`] is the universal state representation: a d×d complex
//! matrix that is Hermitian, positive semidefinite, and of unit trace, each
//! within the configured tolerance. Every constructor goes through
//! [`make_density`] so the invariants hold for all values of the type.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, complex_ginibre, cr, kron, seeded_rng, symmetrize, trace, CMatrix, Spectrum,
};
use crate::tolerance::ToleranceConfig;

pub use crate::linalg::spectral_fn;

/// Validated d×d Hermitian PSD unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: CMatrix,
    /// n with 2^n = dim, when dim is a power of two.
    qubits: Option<u32>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qubits(&self) -> Option<u32> {
        self.qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    /// Eigendecomposition of the state (always succeeds for a valid state).
    pub fn spectrum(&self, tol: &ToleranceConfig) -> Result<Spectrum> {
        Spectrum::new(&self.entries, tol)
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.entries, &self.entries).re
    }

    /// Numerical rank at the spectral support threshold.
    pub fn rank(&self, tol: &ToleranceConfig) -> Result<usize> {
        Ok(self.spectrum(tol)?.rank())
    }
}

/// Two states of equal dimension; the input to every divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub rho0: DensityMatrix,
    pub rho1: DensityMatrix,
}

impl StatePair {
    pub fn new(rho0: DensityMatrix, rho1: DensityMatrix) -> Result<StatePair> {
        if rho0.dim() != rho1.dim() {
            return Err(Error::MismatchedBlocks {
                dims: vec![rho0.dim(), rho1.dim()],
            });
        }
        Ok(StatePair { rho0, rho1 })
    }

    pub fn dim(&self) -> usize {
        self.rho0.dim()
    }

    /// ρ0 - ρ1.
    pub fn difference(&self) -> CMatrix {
        self.rho0.matrix() - self.rho1.matrix()
    }

    /// ρ0 + ρ1.
    pub fn sum(&self) -> CMatrix {
        self.rho0.matrix() + self.rho1.matrix()
    }

    pub fn swapped(&self) -> StatePair {
        StatePair {
            rho0: self.rho1.clone(),
            rho1: self.rho0.clone(),
        }
    }
}

/// Validate an arbitrary square complex matrix as a density matrix.
///
/// Entries are symmetrized to (A + A†)/2 once hermiticity passes, and the
/// trace is renormalized to exactly 1 when it lies within the trace
/// tolerance.
pub fn make_density(matrix: &CMatrix, tol: &ToleranceConfig) -> Result<DensityMatrix> {
    let dim = matrix.nrows();
    assert_eq!(dim, matrix.ncols(), "density matrix must be square");
    let herm = linalg::hermiticity_violation(matrix);
    if herm > tol.hermiticity {
        return Err(Error::NotHermitian {
            violation: herm,
            tolerance: tol.hermiticity,
        });
    }
    let mut entries = symmetrize(matrix);
    let tr = trace(&entries).re;
    let violation = (tr - 1.0).abs();
    if violation > tol.trace {
        return Err(Error::BadTrace {
            violation,
            tolerance: tol.trace,
        });
    }
    if violation > 0.0 {
        entries /= cr(tr);
    }
    let spec = Spectrum::new(&entries, tol)?;
    let min_eig = spec.eigenvalues.last().copied().unwrap_or(0.0);
    if min_eig < -tol.psd {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eig,
            tolerance: tol.psd,
        });
    }
    let qubits = if dim.is_power_of_two() {
        Some(dim.trailing_zeros())
    } else {
        None
    };
    Ok(DensityMatrix {
        dim,
        entries,
        qubits,
    })
}

/// Single-qubit state ½(I + aₓσ_X + a_yσ_Y + a_zσ_Z). Pure iff ‖a‖₂ = 1.
pub fn from_bloch(a: [f64; 3], tol: &ToleranceConfig) -> Result<DensityMatrix> {
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if norm > 1.0 + tol.psd {
        return Err(Error::BlochOutOfBall { norm });
    }
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 * (1.0 + a[2]), 0.0),
            Complex64::new(0.5 * a[0], -0.5 * a[1]),
            Complex64::new(0.5 * a[0], 0.5 * a[1]),
            Complex64::new(0.5 * (1.0 - a[2]), 0.0),
        ],
    );
    make_density(&m, tol)
}

/// Embed a classical distribution as the diagonal state diag(p).
pub fn from_distribution(p: &[f64], tol: &ToleranceConfig) -> Result<DensityMatrix> {
    for (index, &value) in p.iter().enumerate() {
        if value < 0.0 {
            return Err(Error::NegativeProbability { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol.trace {
        return Err(Error::BadNormalization { sum });
    }
    let diag = DVector::from_iterator(p.len(), p.iter().map(|&x| cr(x)));
    make_density(&CMatrix::from_diagonal(&diag), tol)
}

/// Seeded random state ρ = GG†/Tr(GG†) with G a dim×rank complex Ginibre
/// matrix. At rank = dim this samples the Hilbert-Schmidt measure; rank 1
/// gives Haar-random pure states.
pub fn random_mixed(
    dim: usize,
    rank: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let mut rng = seeded_rng(seed);
    let g = complex_ginibre(dim, rank, &mut rng);
    let gg = &g * g.adjoint();
    let t = trace(&gg).re;
    make_density(&(gg / cr(t)), tol)
}

/// Kronecker product of two states.
pub fn tensor(
    a: &DensityMatrix,
    b: &DensityMatrix,
    cap: usize,
    tol: &ToleranceConfig,
) -> Result<DensityMatrix> {
    let dim = a.dim() * b.dim();
    if dim > cap {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    make_density(&kron(a.matrix(), b.matrix()), tol)
}

/// Reduced state on the kept tensor factors; trace preserving.
pub fn partial_trace(
    rho: &DensityMatrix,
    factor_dims: &[usize],
    keep: &[usize],
    tol: &ToleranceConfig,
) -> Result<DensityMatrix> {
    let reduced = linalg::partial_trace(rho.matrix(), factor_dims, keep)?;
    make_density(&reduced, tol)
}

/// Classical-quantum state Σᵢ wᵢ |i⟩⟨i| ⊗ ρᵢ, block diagonal in the flag.
pub fn cq_state(
    weights: &[f64],
    blocks: &[DensityMatrix],
    tol: &ToleranceConfig,
) -> Result<DensityMatrix> {
    if weights.len() != blocks.len() || blocks.is_empty() {
        return Err(Error::MismatchedBlocks {
            dims: blocks.iter().map(|b| b.dim()).collect(),
        });
    }
    let d = blocks[0].dim();
    if blocks.iter().any(|b| b.dim() != d) {
        return Err(Error::MismatchedBlocks {
            dims: blocks.iter().map(|b| b.dim()).collect(),
        });
    }
    for (index, &value) in weights.iter().enumerate() {
        if value < 0.0 {
            return Err(Error::NegativeProbability { index, value });
        }
    }
    let wsum: f64 = weights.iter().sum();
    if (wsum - 1.0).abs() > tol.trace {
        return Err(Error::BadNormalization { sum: wsum });
    }
    let k = weights.len();
    let mut out = CMatrix::zeros(k * d, k * d);
    for (i, (&w, block)) in weights.iter().zip(blocks.iter()).enumerate() {
        let base = i * d;
        for r in 0..d {
            for c in 0..d {
                out[(base + r, base + c)] = cr(w) * block.matrix()[(r, c)];
            }
        }
    }
    make_density(&out, tol)
}

/// On-disk state representation: an explicit matrix, a Bloch vector, or a
/// diagonal distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Matrix {
        dim: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
    Bloch {
        bloch: [f64; 3],
    },
    Diag {
        diag: Vec<f64>,
    },
}

impl StateFile {
    /// Validate into a density matrix with the same error taxonomy as
    /// [`make_density`].
    pub fn load(&self, tol: &ToleranceConfig) -> Result<DensityMatrix> {
        match self {
            StateFile::Matrix { dim, re, im } => {
                let d = *dim;
                let shape_ok = re.len() == d
                    && im.len() == d
                    && re.iter().all(|row| row.len() == d)
                    && im.iter().all(|row| row.len() == d);
                if !shape_ok {
                    return Err(Error::BadFactorization {
                        factors: vec![re.len(), im.len()],
                        dim: d,
                    });
                }
                let m = CMatrix::from_fn(d, d, |i, j| Complex64::new(re[i][j], im[i][j]));
                make_density(&m, tol)
            }
            StateFile::Bloch { bloch } => from_bloch(*bloch, tol),
            StateFile::Diag { diag } => from_distribution(diag, tol),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> StateFile {
        let d = rho.dim();
        let re = (0..d)
            .map(|i| (0..d).map(|j| rho.matrix()[(i, j)].re).collect())
            .collect();
        let im = (0..d)
            .map(|i| (0..d).map(|j| rho.matrix()[(i, j)].im).collect())
            .collect();
        StateFile::Matrix { dim: d, re, im }
    }
}

/// Convenience: |i⟩⟨i| in dimension d.
pub fn basis_state(dim: usize, i: usize, tol: &ToleranceConfig) -> Result<DensityMatrix> {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, i)] = cr(1.0);
    make_density(&m, tol)
}

/// Maximally mixed state I/d.
pub fn maximally_mixed(dim: usize, tol: &ToleranceConfig) -> Result<DensityMatrix> {
    make_density(&(CMatrix::identity(dim, dim) / cr(dim as f64)), tol)
}

/// Pure state |ψ⟩⟨ψ| from a (normalized) state vector.
pub fn pure_state(psi: &[Complex64], tol: &ToleranceConfig) -> Result<DensityMatrix> {
    let d = psi.len();
    let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / cr(norm_sq));
    make_density(&m, tol)
}

/// Joint conjugation ρ ↦ UρU† (used by the invariance suites).
pub fn conjugate(rho: &DensityMatrix, u: &CMatrix, tol: &ToleranceConfig) -> Result<DensityMatrix> {
    make_density(&(u * rho.matrix() * u.adjoint()), tol)
}
