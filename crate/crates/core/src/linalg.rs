//! Complex Hermitian linear algebra: spectra, matrix functions on the
//! support, Kronecker products, partial traces, and seeded random matrices.
//!
//! Every matrix function here goes through a single eigendecomposition path
//! so that support thresholds and reconstruction checks are applied
//! uniformly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest |entry| of `a`.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Largest |entry| of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Deviation from Hermitian symmetry, max |A - A†|.
pub fn hermiticity_violation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Hermitian part (A + A†)/2. Applied after every matrix product chain so
/// floating-point drift cannot break the Hermitian eigensolver's contract.
pub fn symmetrize(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * cr(0.5))
}

pub fn trace(a: &CMatrix) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// Tr(A B) without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut t = C_ZERO;
    for i in 0..n {
        for j in 0..n {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    t
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order and a support mask over the spectral cutoff.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, in eigenvalue order.
    pub eigenvectors: CMatrix,
    /// True where |eigenvalue| exceeds the support threshold.
    pub support_mask: Vec<bool>,
    pub support_threshold: f64,
}

impl Spectrum {
    /// Decompose `a`, which must already be Hermitian to working precision.
    ///
    /// The QL-based solver occasionally loses orthogonality on highly
    /// degenerate spectra (tensor powers produce those); a cyclic Jacobi
    /// pass takes over whenever the reconstruction residual is out of
    /// tolerance.
    pub fn new(a: &CMatrix, tol: &ToleranceConfig) -> Result<Spectrum> {
        let herm = hermiticity_violation(a);
        if herm > tol.hermiticity.max(1e-12) {
            return Err(Error::NotHermitian {
                violation: herm,
                tolerance: tol.hermiticity,
            });
        }
        let symmetric = symmetrize(a);
        let se = symmetric.clone().symmetric_eigen();
        let spec = Self::assemble(se.eigenvalues.as_slice(), &se.eigenvectors, a, tol);
        if Self::residual(&spec, a) <= tol.reconstruction {
            return Ok(spec);
        }
        let (values, vectors) = jacobi_hermitian(&symmetric);
        let spec = Self::assemble(&values, &vectors, a, tol);
        let residual = Self::residual(&spec, a);
        if residual > tol.reconstruction {
            return Err(Error::BadReconstruction {
                residual,
                tolerance: tol.reconstruction,
            });
        }
        Ok(spec)
    }

    fn assemble(
        values: &[f64],
        vectors: &CMatrix,
        a: &CMatrix,
        tol: &ToleranceConfig,
    ) -> Spectrum {
        let dim = a.nrows();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let mut eigenvectors = CMatrix::zeros(dim, dim);
        for (col, &src) in order.iter().enumerate() {
            eigenvectors.set_column(col, &vectors.column(src));
        }
        let lambda_max = eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let threshold = tol.support_threshold(dim, lambda_max);
        let support_mask = eigenvalues.iter().map(|&l| l.abs() > threshold).collect();
        Spectrum {
            eigenvalues,
            eigenvectors,
            support_mask,
            support_threshold: threshold,
        }
    }
    /// Entrywise reconstruction residual up to moderate size; beyond that
    /// a probe-vector residual (O(d²)) still catches a broken
    /// decomposition without re-forming V Λ V†.
    fn residual(spec: &Spectrum, a: &CMatrix) -> f64 {
        let dim = a.nrows();
        if dim <= 64 {
            max_abs_diff(&spec.reconstruct(), a)
        } else {
            let probe = CVector::from_fn(dim, |i, _| {
                Complex64::new(1.0, 0.0) / cr(((i + 1) as f64).sqrt())
            });
            let coeffs = spec.eigenvectors.adjoint() * &probe;
            let scaled = CVector::from_fn(dim, |i, _| coeffs[i] * cr(spec.eigenvalues[i]));
            let back = &spec.eigenvectors * scaled;
            let direct = a * &probe;
            let norm = probe.norm();
            (back - direct).norm() / norm.max(1.0)
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn rank(&self) -> usize {
        self.support_mask.iter().filter(|&&m| m).count()
    }

    /// V Λ V†.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_unchecked(|l| l)
    }

    /// V f(Λ) V† with `f` applied to every eigenvalue; the caller is
    /// responsible for `f` being defined on the whole spectrum.
    pub fn apply_unchecked(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.apply_values(&values)
    }

    /// V f(Λ) V† with per-eigenvalue function values supplied explicitly.
    fn apply_values(&self, values: &[f64]) -> CMatrix {
        let dim = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (col, &fl) in values.iter().enumerate() {
            for row in 0..dim {
                scaled[(row, col)] *= cr(fl);
            }
        }
        symmetrize(&(scaled * self.eigenvectors.adjoint()))
    }

    /// Matrix function on the spectrum. With `support_only`, eigenvalues
    /// below the support threshold map to 0 (pseudo-function); without it,
    /// `f` must be finite on the whole spectrum or `SingularOnSupport` is
    /// returned.
    pub fn apply(&self, f: impl Fn(f64) -> f64, support_only: bool) -> Result<CMatrix> {
        let mut values = Vec::with_capacity(self.dim());
        for (idx, &l) in self.eigenvalues.iter().enumerate() {
            if support_only && !self.support_mask[idx] {
                values.push(0.0);
                continue;
            }
            let v = f(l);
            if !v.is_finite() {
                return Err(Error::SingularOnSupport {
                    eigenvalue: l,
                    threshold: self.support_threshold,
                });
            }
            values.push(v);
        }
        Ok(self.apply_values(&values))
    }

    /// Projector onto the span of the support eigenvectors.
    pub fn support_projector(&self) -> CMatrix {
        let values: Vec<f64> = self
            .support_mask
            .iter()
            .map(|&m| if m { 1.0 } else { 0.0 })
            .collect();
        self.apply_values(&values)
    }

    /// Jordan absolute value V |Λ| V†.
    pub fn abs(&self) -> CMatrix {
        self.apply_unchecked(f64::abs)
    }

    /// Positive part of the Jordan decomposition, (A + |A|)/2.
    pub fn positive_part(&self) -> CMatrix {
        self.apply_unchecked(|l| l.max(0.0))
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices. Slower than the QL
/// path but unconditionally convergent, including on the highly degenerate
/// spectra of tensor-power states.
fn jacobi_hermitian(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n, n);
    let scale = max_abs(a).max(1e-300);
    let stop = (n * n) as f64 * f64::EPSILON * scale;

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = m[(p, q)];
                let r = z.norm();
                if r <= stop * 1e-2 {
                    continue;
                }
                // Phase-align the pivot, then rotate the real 2x2 problem:
                // J[p,p] = c, J[p,q] = -s, J[q,p] = e^{-iφ}s, J[q,q] = e^{-iφ}c
                // zeroes the (p, q) entry of J† M J.
                let phase = z / cr(r);
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (app - aqq) / (2.0 * r);
                let tan = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + tan * tan).sqrt();
                let s = tan * c;
                let jqp = phase.conj() * cr(s);
                let jqq = phase.conj() * cr(c);
                // Column update M ← M·J and V ← V·J.
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * cr(c) + mkq * jqp;
                    m[(k, q)] = -mkp * cr(s) + mkq * jqq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cr(c) + vkq * jqp;
                    v[(k, q)] = -vkp * cr(s) + vkq * jqq;
                }
                // Row update M ← J†·M.
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * cr(c) + mqk * jqp.conj();
                    m[(q, k)] = -mpk * cr(s) + mqk * jqq.conj();
                }
            }
        }
    }
    let values = (0..n).map(|i| m[(i, i)].re).collect();
    (values, v)
}

/// V f(Λ) V† for a Hermitian `a`; the single entry point for x^{-1/2},
/// x^{-α}, √x, ln x and friends.
pub fn spectral_fn(
    a: &CMatrix,
    f: impl Fn(f64) -> f64,
    support_only: bool,
    tol: &ToleranceConfig,
) -> Result<CMatrix> {
    Spectrum::new(a, tol)?.apply(f, support_only)
}

/// Kronecker product, factor `a` major.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace of `mat` over the tensor factors not listed in `keep`.
/// `factor_dims` gives the dimension of each factor in major-to-minor order
/// (matching [`kron`]); `keep` must be strictly increasing.
pub fn partial_trace(mat: &CMatrix, factor_dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let dim = mat.nrows();
    let prod: usize = factor_dims.iter().product();
    if prod != dim || factor_dims.contains(&0) {
        return Err(Error::BadFactorization {
            factors: factor_dims.to_vec(),
            dim,
        });
    }
    let nf = factor_dims.len();
    let valid = !keep.is_empty()
        && keep.iter().all(|&k| k < nf)
        && keep.windows(2).all(|w| w[0] < w[1]);
    if !valid {
        return Err(Error::BadIndexSet {
            keep: keep.to_vec(),
            nfactors: nf,
        });
    }

    let traced: Vec<usize> = (0..nf).filter(|f| !keep.contains(f)).collect();
    let kept_dim: usize = keep.iter().map(|&f| factor_dims[f]).product();
    let traced_dim: usize = traced.iter().map(|&f| factor_dims[f]).product();

    // Strides of each factor within the full index (major-to-minor).
    let mut strides = vec![1usize; nf];
    for f in (0..nf.saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * factor_dims[f + 1];
    }
    let compose = |indices: &[usize], factors: &[usize]| -> usize {
        factors
            .iter()
            .zip(indices.iter())
            .map(|(&f, &i)| i * strides[f])
            .sum()
    };
    let decode = |mut flat: usize, factors: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize; factors.len()];
        for (slot, &f) in factors.iter().enumerate().rev() {
            out[slot] = flat % factor_dims[f];
            flat /= factor_dims[f];
        }
        out
    };

    // Precompute flat offsets of every kept and traced multi-index.
    let kept_offsets: Vec<usize> = (0..kept_dim).map(|i| compose(&decode(i, keep), keep)).collect();
    let traced_offsets: Vec<usize> =
        (0..traced_dim).map(|t| compose(&decode(t, &traced), &traced)).collect();

    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for (i, &ibase) in kept_offsets.iter().enumerate() {
        for (j, &jbase) in kept_offsets.iter().enumerate() {
            let mut acc = C_ZERO;
            for &toff in &traced_offsets {
                acc += mat[(ibase + toff, jbase + toff)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// dim × rank matrix of i.i.d. standard complex Gaussians from a seeded
/// generator. Same seed, same matrix, bit for bit.
pub fn complex_ginibre(rows: usize, cols: usize, rng: &mut StdRng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase convention
/// fixed by the signs of R's diagonal.
pub fn haar_unitary(dim: usize, rng: &mut StdRng) -> CMatrix {
    let g = complex_ginibre(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for col in 0..dim {
        let d = r[(col, col)];
        let phase = if d.norm() > 0.0 { d / cr(d.norm()) } else { C_ONE };
        for row in 0..dim {
            q[(row, col)] *= phase;
        }
    }
    q
}

pub fn seeded_rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// SplitMix64 step; used to derive independent per-trial seeds from a master
/// seed so that results are order- and schedule-independent.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    for &p in parts {
        state = state.wrapping_add(p).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        state ^= state >> 30;
        state = state.wrapping_mul(0x94d0_49bb_1331_11eb);
        state ^= state >> 31;
    }
    state
}
