//! Classical and quantum distances and divergences.
//!
//! Quantum quantities reduce to their classical counterparts on commuting
//! (diagonal) pairs, which the tests use as exact oracles. Conventions:
//!
//! - td(ρ0,ρ1) = ½ Tr|ρ0-ρ1|
//! - F = Tr|√ρ0 √ρ1|,  B² = 2(1-F)
//! - Q_{1/2} = Tr(√ρ0 √ρ1),  QH² = 1 - Q_{1/2}
//! - QJS = S((ρ0+ρ1)/2) - (S(ρ0)+S(ρ1))/2, QJS₂ = QJS/ln 2
//! - QTD = ½ Tr((ρ0-ρ1)(ρ0+ρ1)^{-1/2}(ρ0-ρ1)(ρ0+ρ1)^{-1/2}), inverse on
//!   the support; the α = ½ member of the χ²_α family at the midpoint state.
//! - QTD^meas is evaluated in the eigenbasis of (ρ0+ρ1)/2 by solving the
//!   symmetrized product equation Ω⁻¹(X) = (ρX + Xρ)/2 entrywise.
//!
//! Measured QJS has no closed form; [`measured_qjs2_lower_bound`] reports a
//! certified lower bound from a candidate set of projective measurements.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, haar_unitary, kron, max_abs, seeded_rng, symmetrize, trace_of_product, CMatrix,
    Spectrum,
};
use crate::states::{make_density, DensityMatrix, StatePair};
use crate::tolerance::ToleranceConfig;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Binary entropy H₂(p) in bits, with 0 log 0 := 0.
pub fn binary_entropy_bits(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

fn shannon_entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .map(|&x| if x > 0.0 { -x * x.log2() } else { 0.0 })
        .sum()
}

/// Classical distances between two distributions over the same universe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalDivergences {
    /// Statistical distance ½‖p0-p1‖₁.
    pub sd: f64,
    /// Triangular discrimination ½ Σ (p0-p1)²/(p0+p1), 0/0 terms dropped.
    pub tdc: f64,
    /// Jensen-Shannon divergence in bits.
    pub js2_bits: f64,
    /// Squared Hellinger distance ½ Σ (√p0-√p1)².
    pub hellinger_sq: f64,
}

pub fn classical_divergences(p0: &[f64], p1: &[f64]) -> Result<ClassicalDivergences> {
    if p0.len() != p1.len() {
        return Err(Error::InvalidDistribution {
            reason: format!("length mismatch: {} vs {}", p0.len(), p1.len()),
        });
    }
    for p in [p0, p1] {
        if let Some(&bad) = p.iter().find(|&&x| x < -1e-12) {
            return Err(Error::InvalidDistribution {
                reason: format!("negative entry {bad}"),
            });
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution {
                reason: format!("sums to {sum}"),
            });
        }
    }
    Ok(classical_divergences_unchecked(p0, p1))
}

/// Same arithmetic without the validation; used on induced distributions
/// whose entries may carry ±1e-15 rounding.
pub fn classical_divergences_unchecked(p0: &[f64], p1: &[f64]) -> ClassicalDivergences {
    let p0: Vec<f64> = p0.iter().map(|&x| x.max(0.0)).collect();
    let p1: Vec<f64> = p1.iter().map(|&x| x.max(0.0)).collect();
    let mut sd = 0.0;
    let mut tdc = 0.0;
    let mut hellinger_sq = 0.0;
    for (&a, &b) in p0.iter().zip(p1.iter()) {
        let diff = a - b;
        sd += 0.5 * diff.abs();
        if a + b > 0.0 {
            tdc += 0.5 * diff * diff / (a + b);
        }
        let ds = a.sqrt() - b.sqrt();
        hellinger_sq += 0.5 * ds * ds;
    }
    let mix: Vec<f64> = p0.iter().zip(p1.iter()).map(|(&a, &b)| 0.5 * (a + b)).collect();
    let js2_bits = shannon_entropy_bits(&mix)
        - 0.5 * (shannon_entropy_bits(&p0) + shannon_entropy_bits(&p1));
    ClassicalDivergences {
        sd,
        tdc,
        js2_bits,
        hellinger_sq,
    }
}

/// ½ Σ |λᵢ(ρ0-ρ1)|.
pub fn trace_distance(pair: &StatePair, tol: &ToleranceConfig) -> Result<f64> {
    let spec = Spectrum::new(&pair.difference(), tol)?;
    Ok(0.5 * spec.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityBures {
    pub fidelity: f64,
    pub bures_sq: f64,
}

/// F = Tr|√ρ0 √ρ1| via the singular values of M = √ρ0 √ρ1, which avoids
/// the nested square root of a near-singular product; B² = 2(1-F).
///
/// The singular values come from the Hermitian dilation [[0, M], [M†, 0]],
/// whose spectrum is ±σᵢ. Unlike the Gram matrix M†M this never squares M,
/// so small singular values keep full absolute precision.
pub fn fidelity_bures(pair: &StatePair, tol: &ToleranceConfig) -> Result<FidelityBures> {
    let s0 = pair.rho0.spectrum(tol)?.apply(sqrt_clipped, true)?;
    let s1 = pair.rho1.spectrum(tol)?.apply(sqrt_clipped, true)?;
    let m = &s0 * &s1;
    let d = m.nrows();
    let mut dilation = CMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            dilation[(i, d + j)] = m[(i, j)];
            dilation[(d + j, i)] = m[(i, j)].conj();
        }
    }
    let spec = Spectrum::new(&dilation, tol)?;
    let fidelity: f64 = 0.5 * spec.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    Ok(FidelityBures {
        fidelity,
        bures_sq: 2.0 * (1.0 - fidelity),
    })
}

fn sqrt_clipped(l: f64) -> f64 {
    l.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumHellinger {
    /// Affinity Q_{1/2} = Tr(√ρ0 √ρ1).
    pub q_half_affinity: f64,
    /// QH² = 1 - Q_{1/2}.
    pub qh_sq: f64,
}

pub fn quantum_hellinger(pair: &StatePair, tol: &ToleranceConfig) -> Result<QuantumHellinger> {
    let s0 = pair.rho0.spectrum(tol)?.apply(sqrt_clipped, true)?;
    let s1 = pair.rho1.spectrum(tol)?.apply(sqrt_clipped, true)?;
    let q_half_affinity = trace_of_product(&s0, &s1).re;
    Ok(QuantumHellinger {
        q_half_affinity,
        qh_sq: 1.0 - q_half_affinity,
    })
}

/// Entropy in both units; the base-2 value is S₂(ρ) = S(ρ)/ln 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub nats: f64,
    pub bits: f64,
}

impl EntropyValue {
    fn from_nats(nats: f64) -> EntropyValue {
        EntropyValue {
            nats,
            bits: nats / LN_2,
        }
    }
}

/// -Σ λ ln λ over the spectrum. Eigenvalues in [-psd, 0] are treated as 0;
/// anything below -psd is an error.
pub fn entropy_of_eigenvalues(eigenvalues: &[f64], tol: &ToleranceConfig) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -tol.psd {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: l,
                tolerance: tol.psd,
            });
        }
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s)
}

pub fn von_neumann_entropy(rho: &DensityMatrix, tol: &ToleranceConfig) -> Result<EntropyValue> {
    let spec = rho.spectrum(tol)?;
    Ok(EntropyValue::from_nats(entropy_of_eigenvalues(
        &spec.eigenvalues,
        tol,
    )?))
}

/// Quantum relative entropy D(ρ‖σ) = Tr ρ(ln ρ - ln σ) in nats, with
/// support-restricted logarithms. Requires supp(ρ) ⊆ supp(σ); otherwise the
/// divergence is +∞ and `SupportViolation` is returned.
pub fn relative_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: &ToleranceConfig,
) -> Result<f64> {
    let sig_spec = sigma.spectrum(tol)?;
    let proj = sig_spec.support_projector();
    let mass = (trace_of_product(rho.matrix(), &(CMatrix::identity(rho.dim(), rho.dim()) - &proj)))
        .re;
    if mass > tol.psd {
        return Err(Error::SupportViolation { mass });
    }
    let rho_spec = rho.spectrum(tol)?;
    let tr_rho_ln_rho = -entropy_of_eigenvalues(&rho_spec.eigenvalues, tol)?;
    let ln_sigma = sig_spec.apply(f64::ln, true)?;
    let tr_rho_ln_sigma = trace_of_product(rho.matrix(), &ln_sigma).re;
    Ok(tr_rho_ln_rho - tr_rho_ln_sigma)
}

/// Midpoint state (ρ0+ρ1)/2.
pub fn midpoint(pair: &StatePair, tol: &ToleranceConfig) -> Result<DensityMatrix> {
    make_density(&(pair.sum() * cr(0.5)), tol)
}

/// Quantum Jensen-Shannon divergence, computed from the entropy form and
/// cross-checked against the symmetrized relative-entropy form.
pub fn qjs(pair: &StatePair, tol: &ToleranceConfig) -> Result<EntropyValue> {
    let mu = midpoint(pair, tol)?;
    let s_mu = von_neumann_entropy(&mu, tol)?.nats;
    let s0 = von_neumann_entropy(&pair.rho0, tol)?.nats;
    let s1 = von_neumann_entropy(&pair.rho1, tol)?.nats;
    let nats = s_mu - 0.5 * (s0 + s1);
    debug_assert!(
        {
            let alt = 0.5
                * (relative_entropy(&pair.rho0, &mu, tol)?
                    + relative_entropy(&pair.rho1, &mu, tol)?);
            (alt - nats).abs() <= tol.cross_check
        },
        "entropy and relative-entropy forms of QJS disagree"
    );
    Ok(EntropyValue::from_nats(nats))
}

/// Quantum triangular discrimination,
/// ½ Tr((ρ0-ρ1)(ρ0+ρ1)^{-1/2}(ρ0-ρ1)(ρ0+ρ1)^{-1/2}) with the inverse taken
/// on the support.
pub fn qtd(pair: &StatePair, tol: &ToleranceConfig) -> Result<f64> {
    let delta = pair.difference();
    let sum_spec = Spectrum::new(&pair.sum(), tol)?;
    let inv_sqrt = sum_spec.apply(|l| l.max(0.0).powf(-0.5), true)?;
    let sandwich = symmetrize(&(&inv_sqrt * &delta * &inv_sqrt));
    Ok(0.5 * trace_of_product(&delta, &sandwich).re)
}

/// General family member QTD_α = Tr(Δ μ^{-α} Δ μ^{α-1}) with Δ = (ρ0-ρ1)/2
/// and μ = (ρ0+ρ1)/2, all powers support-restricted. At α = ½ this agrees
/// with [`qtd`] exactly.
pub fn qtd_alpha(pair: &StatePair, alpha: f64, tol: &ToleranceConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            quantity: "alpha",
            value: alpha,
            range: "[0, 1]",
        });
    }
    let delta = pair.difference() * cr(0.5);
    let mu_spec = Spectrum::new(&(pair.sum() * cr(0.5)), tol)?;
    let left = mu_spec.apply(|l| l.max(0.0).powf(-alpha), true)?;
    let right = mu_spec.apply(|l| l.max(0.0).powf(alpha - 1.0), true)?;
    let value = trace_of_product(&(&delta * &left), &(&delta * &right)).re;
    debug_assert!(
        alpha != 0.5 || (value - qtd(pair, tol)?).abs() <= tol.cross_check,
        "family member at alpha = 1/2 must match the direct form"
    );
    Ok(value)
}

/// Measured quantum triangular discrimination, evaluated in the eigenbasis
/// of ρ₊ = (ρ0+ρ1)/2 with eigenvalues βᵢ as Σ 2|(ρ₋)ᵢⱼ|²/(βᵢ+βⱼ) over the
/// support, where ρ₋ = (ρ0-ρ1)/2 expressed in that basis. Terms with
/// βᵢ+βⱼ below the support threshold must carry no weight of ρ₋, else the
/// input pair is inconsistent.
pub fn qtd_meas(pair: &StatePair, tol: &ToleranceConfig) -> Result<f64> {
    let mu_spec = Spectrum::new(&(pair.sum() * cr(0.5)), tol)?;
    let delta = pair.difference() * cr(0.5);
    let in_basis = mu_spec.eigenvectors.adjoint() * &delta * &mu_spec.eigenvectors;
    let d = pair.dim();
    let threshold = mu_spec.support_threshold;
    let mut total = 0.0;
    let mut off_support_mass = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let denom = mu_spec.eigenvalues[i].max(0.0) + mu_spec.eigenvalues[j].max(0.0);
            let w = in_basis[(i, j)].norm();
            if denom <= threshold {
                off_support_mass = off_support_mass.max(w);
            } else {
                total += 2.0 * w * w / denom;
            }
        }
    }
    if off_support_mass > tol.psd {
        return Err(Error::SupportInconsistency { off_support_mass });
    }
    Ok(total)
}

/// Tr(ρ0-ρ1)², cross-checked against Tr ρ0² + Tr ρ1² - 2 Tr(ρ0 ρ1).
pub fn hs_distance_sq(pair: &StatePair, tol: &ToleranceConfig) -> Result<f64> {
    let delta = pair.difference();
    let direct = trace_of_product(&delta, &delta).re;
    let via_overlaps = pair.rho0.purity() + pair.rho1.purity()
        - 2.0 * trace_of_product(pair.rho0.matrix(), pair.rho1.matrix()).re;
    debug_assert!((direct - via_overlaps).abs() <= 1e-12 * direct.abs().max(1.0));
    let _ = tol;
    Ok(direct)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryEntropyBound {
    /// 1 - H₂((1-td)/2) in bits.
    pub h2_bound: f64,
    /// Truncation Σ_{v=1..terms} td^{2v}/(ln2 · 2v(2v-1)); monotone
    /// nondecreasing in `terms` and converging to `h2_bound`.
    pub series_bound: f64,
}

pub fn binary_entropy_bound(td_value: f64, terms: usize) -> Result<BinaryEntropyBound> {
    if !(0.0..=1.0).contains(&td_value) {
        return Err(Error::OutOfRange {
            quantity: "td",
            value: td_value,
            range: "[0, 1]",
        });
    }
    let h2_bound = 1.0 - binary_entropy_bits((1.0 - td_value) / 2.0);
    let mut series_bound = 0.0;
    let mut power = 1.0;
    let sq = td_value * td_value;
    for v in 1..=terms {
        power *= sq;
        series_bound += power / (LN_2 * (2 * v) as f64 * (2 * v - 1) as f64);
    }
    Ok(BinaryEntropyBound {
        h2_bound,
        series_bound,
    })
}

/// POVM with validated elements; Σ E_x = I within the completeness
/// tolerance.
#[derive(Debug, Clone)]
pub struct MeasurementEnsemble {
    pub elements: Vec<CMatrix>,
    pub completeness_residual: f64,
}

impl MeasurementEnsemble {
    pub fn new(elements: Vec<CMatrix>, tol: &ToleranceConfig) -> Result<MeasurementEnsemble> {
        assert!(!elements.is_empty());
        let dim = elements[0].nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &elements {
            let spec = Spectrum::new(e, tol)?;
            let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
            if min < -tol.psd {
                return Err(Error::NotPsd {
                    min_eigenvalue: min,
                    tolerance: tol.psd,
                });
            }
            sum += e;
        }
        let completeness_residual = max_abs(&(sum - CMatrix::identity(dim, dim)));
        if completeness_residual > tol.completeness {
            return Err(Error::BadNormalization {
                sum: 1.0 + completeness_residual,
            });
        }
        Ok(MeasurementEnsemble {
            elements,
            completeness_residual,
        })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &CMatrix, tol: &ToleranceConfig) -> Result<MeasurementEnsemble> {
        let d = basis.nrows();
        let elements = (0..d)
            .map(|i| {
                let col = basis.column(i);
                CMatrix::from_fn(d, d, |r, c| col[r] * col[c].conj())
            })
            .collect();
        MeasurementEnsemble::new(elements, tol)
    }

    /// Outcome distribution p_x = Tr(ρ E_x).
    pub fn induced(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| trace_of_product(rho.matrix(), e).re.max(0.0))
            .collect()
    }
}

/// Search budget for the measured-QJS lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Seeded random orthonormal bases tried beyond the two spectral ones.
    pub restarts: usize,
    /// Hill-climbing proposals applied to each random basis (0 disables).
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 8,
            refine_steps: 0,
            seed: 0x51ee,
        }
    }
}

fn induced_js2(basis: &CMatrix, pair: &StatePair) -> f64 {
    let d = basis.nrows();
    let induce = |rho: &DensityMatrix| -> Vec<f64> {
        (0..d)
            .map(|i| {
                let col = basis.column(i);
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..d {
                    for s in 0..d {
                        acc += col[r].conj() * rho.matrix()[(r, s)] * col[s];
                    }
                }
                acc.re.max(0.0)
            })
            .collect()
    };
    classical_divergences_unchecked(&induce(&pair.rho0), &induce(&pair.rho1)).js2_bits
}

/// Certified lower bound on the measured QJS₂ (bits): the best classical
/// JS₂ over a candidate set of projective measurements — the eigenbasis of
/// ρ0-ρ1 (the Helstrom measurement, which attains SD = td), the eigenbasis
/// of (ρ0+ρ1)/2, and seeded random bases with optional local refinement.
/// Never claimed exact.
pub fn measured_qjs2_lower_bound(
    pair: &StatePair,
    search: &SearchConfig,
    tol: &ToleranceConfig,
) -> Result<f64> {
    let diff_spec = Spectrum::new(&pair.difference(), tol)?;
    let mu_spec = Spectrum::new(&(pair.sum() * cr(0.5)), tol)?;
    let mut best = induced_js2(&diff_spec.eigenvectors, pair);
    best = best.max(induced_js2(&mu_spec.eigenvectors, pair));
    let d = pair.dim();
    for restart in 0..search.restarts {
        let mut rng = seeded_rng(linalg::mix_seed(&[search.seed, restart as u64]));
        // Random bases are drawn relative to the midpoint eigenbasis so the
        // candidate set transforms covariantly under joint conjugation.
        let mut basis = &mu_spec.eigenvectors * haar_unitary(d, &mut rng);
        let mut value = induced_js2(&basis, pair);
        for _ in 0..search.refine_steps {
            let i = rng.gen_range(0..d);
            let j = (i + rng.gen_range(1..d)) % d;
            let theta: f64 = rng.sample::<f64, _>(StandardNormal) * 0.2;
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let mut candidate = basis.clone();
            let (c, s) = (theta.cos(), theta.sin());
            let eip = Complex64::from_polar(1.0, phase);
            for row in 0..d {
                let bi = basis[(row, i)];
                let bj = basis[(row, j)];
                candidate[(row, i)] = bi * cr(c) - bj * eip * cr(s);
                candidate[(row, j)] = bi * eip.conj() * cr(s) + bj * cr(c);
            }
            let cand_value = induced_js2(&candidate, pair);
            if cand_value > value {
                value = cand_value;
                basis = candidate;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

/// Residuals of the three conditions under which QTD saturates the trace
/// distance: (1) (ρ0-ρ1)(ρ0+ρ1)⁻¹(ρ0-ρ1) = ρ0+ρ1 on the joint support,
/// (2) (ρ0-ρ1)² proportional to the identity on supp(ρ0-ρ1), (3) matching
/// eigenvalue signs of the difference and the sandwiched difference, paired
/// in sorted order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualityConditionReport {
    pub cond1_residual: f64,
    pub cond2_residual: f64,
    pub cond3_ok: bool,
    pub overall: bool,
}

pub fn qtd_equality_conditions(
    pair: &StatePair,
    eq_tol: f64,
    tol: &ToleranceConfig,
) -> Result<EqualityConditionReport> {
    let delta = pair.difference();
    let max_diff = max_abs(&delta);
    if max_diff <= eq_tol {
        return Err(Error::DegeneratePair { max_diff });
    }
    let sum = pair.sum();
    let sum_spec = Spectrum::new(&sum, tol)?;
    let proj = sum_spec.support_projector();
    let inv = sum_spec.apply(|l| l.max(0.0).recip(), true)?;
    let lhs1 = symmetrize(&(&delta * &inv * &delta));
    let resid1 = &proj * (lhs1 - &sum) * &proj;
    let cond1_residual = max_abs(&resid1);

    let delta_spec = Spectrum::new(&delta, tol)?;
    let support_size = delta_spec.rank();
    let dsq = symmetrize(&(&delta * &delta));
    let scale = trace_of_product(&delta, &delta).re / support_size.max(1) as f64;
    let dproj = delta_spec.support_projector();
    let resid2 =
        &dproj * (dsq - CMatrix::identity(pair.dim(), pair.dim()) * cr(scale)) * &dproj;
    let cond2_residual = max_abs(&resid2);

    let inv_sqrt = sum_spec.apply(|l| l.max(0.0).powf(-0.5), true)?;
    let sandwich = symmetrize(&(&inv_sqrt * &delta * &inv_sqrt));
    let sandwich_spec = Spectrum::new(&sandwich, tol)?;
    let signs = |spec: &Spectrum| -> Vec<bool> {
        spec.eigenvalues
            .iter()
            .zip(spec.support_mask.iter())
            .filter(|(_, &m)| m)
            .map(|(&l, _)| l > 0.0)
            .collect()
    };
    let s_delta = signs(&delta_spec);
    let s_sandwich = signs(&sandwich_spec);
    let cond3_ok = s_delta == s_sandwich;

    Ok(EqualityConditionReport {
        cond1_residual,
        cond2_residual,
        cond3_ok,
        overall: cond1_residual <= eq_tol && cond2_residual <= eq_tol && cond3_ok,
    })
}

/// Qutrit-flag embedding: split ρ0-ρ1 through its Jordan decomposition into
/// σ0 = (ρ0-ρ1+|ρ0-ρ1|)/2, σ1 = (ρ1-ρ0+|ρ0-ρ1|)/2, and the shared part
/// σ2 = (ρ0+ρ1-|ρ0-ρ1|)/2, then attach an orthogonal flag:
/// ρ̃k = σ2⊗|2⟩⟨2| + σk⊗|k⟩⟨k|. Tracing out the flag recovers ρk, and
/// Tr σ0 = Tr σ1 = td(ρ0,ρ1).
///
/// σ2 is only positive semidefinite when |ρ0-ρ1| ⪯ ρ0+ρ1 (always true for
/// commuting pairs and for pairs close to the maximally mixed state); when
/// it is not, the embedded matrices fail state validation and the error
/// propagates.
pub fn qutrit_flag_embedding(pair: &StatePair, tol: &ToleranceConfig) -> Result<StatePair> {
    let delta = pair.difference();
    let abs_delta = Spectrum::new(&delta, tol)?.abs();
    let sigma0 = (&delta + &abs_delta) * cr(0.5);
    let sigma1 = (&abs_delta - &delta) * cr(0.5);
    let sigma2 = (pair.sum() - &abs_delta) * cr(0.5);
    let flag = |i: usize| -> CMatrix {
        let mut p = CMatrix::zeros(3, 3);
        p[(i, i)] = cr(1.0);
        p
    };
    let embedded0 = kron(&sigma2, &flag(2)) + kron(&sigma0, &flag(0));
    let embedded1 = kron(&sigma2, &flag(2)) + kron(&sigma1, &flag(1));
    StatePair::new(make_density(&embedded0, tol)?, make_density(&embedded1, tol)?)
}

/// All divergences for one pair, with the tolerances used to compute them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub td: f64,
    pub fidelity: f64,
    pub bures_sq: f64,
    pub q_half_affinity: f64,
    pub qh_sq: f64,
    pub hs_sq: f64,
    pub qjs_nats: f64,
    pub qjs2_bits: f64,
    pub qtd: f64,
    pub qtd_meas: f64,
    pub measured_qjs2_lower_bound: f64,
    pub tolerances: ToleranceConfig,
}

pub fn compute_report(
    pair: &StatePair,
    search: &SearchConfig,
    tol: &ToleranceConfig,
) -> Result<DivergenceReport> {
    let fb = fidelity_bures(pair, tol)?;
    let qh = quantum_hellinger(pair, tol)?;
    let js = qjs(pair, tol)?;
    let report = DivergenceReport {
        td: trace_distance(pair, tol)?,
        fidelity: fb.fidelity,
        bures_sq: fb.bures_sq,
        q_half_affinity: qh.q_half_affinity,
        qh_sq: qh.qh_sq,
        hs_sq: hs_distance_sq(pair, tol)?,
        qjs_nats: js.nats,
        qjs2_bits: js.bits,
        qtd: qtd(pair, tol)?,
        qtd_meas: qtd_meas(pair, tol)?,
        measured_qjs2_lower_bound: measured_qjs2_lower_bound(pair, search, tol)?,
        tolerances: *tol,
    };
    report.validate_ranges(tol.cross_check)?;
    Ok(report)
}

impl DivergenceReport {
    /// Range invariants: everything finite, the bounded quantities inside
    /// [-tol, 1+tol] (B² inside [-tol, 2+tol]).
    pub fn validate_ranges(&self, slack: f64) -> Result<()> {
        let unit_bounded = [
            ("td", self.td),
            ("fidelity", self.fidelity),
            ("qtd", self.qtd),
            ("qtd_meas", self.qtd_meas),
            ("qjs2_bits", self.qjs2_bits),
            ("measured_qjs2_lower_bound", self.measured_qjs2_lower_bound),
        ];
        for (name, v) in unit_bounded {
            if !v.is_finite() || !(-slack..=1.0 + slack).contains(&v) {
                return Err(Error::OutOfRange {
                    quantity: match name {
                        "td" => "td",
                        "fidelity" => "fidelity",
                        "qtd" => "qtd",
                        "qtd_meas" => "qtd_meas",
                        "qjs2_bits" => "qjs2_bits",
                        _ => "measured_qjs2_lower_bound",
                    },
                    value: v,
                    range: "[0, 1]",
                });
            }
        }
        if !self.bures_sq.is_finite() || !(-slack..=2.0 + slack).contains(&self.bures_sq) {
            return Err(Error::OutOfRange {
                quantity: "bures_sq",
                value: self.bures_sq,
                range: "[0, 2]",
            });
        }
        for v in [self.qh_sq, self.hs_sq, self.qjs_nats, self.q_half_affinity] {
            if !v.is_finite() {
                return Err(Error::OutOfRange {
                    quantity: "divergence",
                    value: v,
                    range: "finite",
                });
            }
        }
        Ok(())
    }

    /// The proven inequality grid relating the report's quantities.
    pub fn inequality_verdicts(&self, slack: f64) -> Vec<InequalityVerdict> {
        let bures = self.bures_sq.max(0.0).sqrt();
        let js2_floor = 1.0 - binary_entropy_bits((1.0 - self.td.clamp(0.0, 1.0)) / 2.0);
        let pairs: [(&'static str, f64, f64); 15] = [
            ("td_sq <= qtd_meas", self.td * self.td, self.qtd_meas),
            ("qtd_meas <= qtd", self.qtd_meas, self.qtd),
            ("qtd <= td", self.qtd, self.td),
            ("half_qtd_sq <= qjs", 0.5 * self.qtd * self.qtd, self.qjs_nats),
            ("qjs <= qtd", self.qjs_nats, self.qtd),
            ("half_bures_sq <= qtd_meas", 0.5 * self.bures_sq, self.qtd_meas),
            ("qtd_meas <= bures_sq", self.qtd_meas, self.bures_sq),
            ("half_bures_sq <= qtd", 0.5 * self.bures_sq, self.qtd),
            ("qtd <= bures", self.qtd, bures),
            ("half_bures_sq <= td", 0.5 * self.bures_sq, self.td),
            ("td <= bures", self.td, bures),
            ("qjs <= ln2_td", self.qjs_nats, LN_2 * self.td),
            ("js2_floor <= qjs2", js2_floor, self.qjs2_bits),
            (
                "measured_qjs2_lb <= qjs2",
                self.measured_qjs2_lower_bound,
                self.qjs2_bits,
            ),
            ("q_half <= fidelity", self.q_half_affinity, self.fidelity),
        ];
        pairs
            .into_iter()
            .map(|(name, lhs, rhs)| InequalityVerdict::new(name, lhs, rhs, slack))
            .collect()
    }
}

/// One-sided inequality lhs ≤ rhs with its measured margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub ok: bool,
}

impl InequalityVerdict {
    pub fn new(name: &str, lhs: f64, rhs: f64, slack: f64) -> InequalityVerdict {
        InequalityVerdict {
            name: name.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            ok: crate::tolerance::one_sided_ok(lhs, rhs, slack),
        }
    }
}
