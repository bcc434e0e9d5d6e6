//! Decision procedures built on the SWAP test.
//!
//! The SWAP test on (possibly mixed) states accepts outcome 0 with
//! probability ½(1 + Tr(ρ0ρ1)). One exact amplitude-amplification step
//! turns the mixed-state overlap test into a one-sided procedure: with
//! sin²θ = p/2, a single Grover iteration leaves the all-zero outcome with
//! probability sin²(3θ) = 2p³ - 6p² + (9/2)p, which hits 1 exactly at
//! p = ½ — the orthogonal-support case — so disjoint states are rejected
//! with certainty. A coin-flip hybrid of SWAP tests measures the
//! Hilbert-Schmidt distance instead: its acceptance is ½ - HS²/8.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divergences::hs_distance_sq;
use crate::error::{Error, Result};
use crate::linalg::{cr, trace_of_product, CMatrix};
use crate::states::{DensityMatrix, StatePair};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapTestProb {
    /// Tr(ρ0 ρ1).
    pub overlap: f64,
    /// Probability of control outcome 0: ½(1 + overlap).
    pub p0_outcome: f64,
}

pub fn swap_test_prob(pair: &StatePair) -> SwapTestProb {
    let overlap = trace_of_product(pair.rho0.matrix(), pair.rho1.matrix()).re;
    SwapTestProb {
        overlap,
        p0_outcome: 0.5 * (1.0 + overlap),
    }
}

/// Unit vector on system ⊗ environment purifying a mixed state.
#[derive(Debug, Clone)]
pub struct Purification {
    /// Components indexed system-major: vector[s · env_dim + e].
    pub vector: Vec<Complex64>,
    pub system_dim: usize,
    pub env_dim: usize,
}

impl Purification {
    pub fn dim(&self) -> usize {
        self.system_dim * self.env_dim
    }

    /// Reduced state on the system register.
    pub fn reduced_system(&self) -> CMatrix {
        let (d, e) = (self.system_dim, self.env_dim);
        CMatrix::from_fn(d, d, |r, c| {
            (0..e)
                .map(|k| self.vector[r * e + k] * self.vector[c * e + k].conj())
                .sum()
        })
    }
}

/// Canonical purification Σᵢ √λᵢ |vᵢ⟩⊗|i⟩ with env_dim = rank. Eigenvector
/// phases are fixed so the same state always purifies to the same vector.
pub fn purify(rho: &DensityMatrix, tol: &ToleranceConfig) -> Result<Purification> {
    let spec = rho.spectrum(tol)?;
    let d = rho.dim();
    let kept: Vec<usize> = (0..d).filter(|&i| spec.support_mask[i]).collect();
    let env_dim = kept.len().max(1);
    let mut vector = vec![Complex64::new(0.0, 0.0); d * env_dim];
    for (e, &idx) in kept.iter().enumerate() {
        let weight = spec.eigenvalues[idx].max(0.0).sqrt();
        let col = spec.eigenvectors.column(idx);
        // Rotate the dominant component onto the positive real axis.
        let anchor = (0..d)
            .max_by(|&a, &b| col[a].norm().partial_cmp(&col[b].norm()).unwrap())
            .unwrap();
        let phase = if col[anchor].norm() > 0.0 {
            col[anchor].conj() / cr(col[anchor].norm())
        } else {
            cr(1.0)
        };
        for s in 0..d {
            vector[s * env_dim + e] = cr(weight) * phase * col[s];
        }
    }
    Ok(Purification {
        vector,
        system_dim: d,
        env_dim,
    })
}

/// Simulate H · controlled-SWAP · H on control ⊗ pur0 ⊗ pur1 as an explicit
/// state vector and return both the probability of control outcome 0 and
/// the final (unmeasured) state. The controlled SWAP exchanges the two
/// system registers and leaves the environments alone.
fn swap_test_vector(
    pur0: &Purification,
    pur1: &Purification,
    cap: usize,
) -> Result<(f64, Vec<Complex64>)> {
    if pur0.system_dim != pur1.system_dim {
        return Err(Error::MismatchedBlocks {
            dims: vec![pur0.system_dim, pur1.system_dim],
        });
    }
    let (d0, d1) = (pur0.dim(), pur1.dim());
    let total = 2 * d0 * d1;
    if total > cap {
        return Err(Error::DimensionOverflow { dim: total, cap });
    }
    let (sd, e0, e1) = (pur0.system_dim, pur0.env_dim, pur1.env_dim);
    let idx = |c: usize, i0: usize, i1: usize| (c * d0 + i0) * d1 + i1;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    // After the first Hadamard: (|0⟩ + |1⟩)/√2 ⊗ ψ0 ⊗ ψ1.
    let mut state = vec![Complex64::new(0.0, 0.0); total];
    for i0 in 0..d0 {
        for i1 in 0..d1 {
            let amp = pur0.vector[i0] * pur1.vector[i1] * cr(inv_sqrt2);
            state[idx(0, i0, i1)] = amp;
            state[idx(1, i0, i1)] = amp;
        }
    }
    // Controlled SWAP of the system registers on the c = 1 branch.
    let mut swapped = state.clone();
    for s0 in 0..sd {
        for k0 in 0..e0 {
            for s1 in 0..sd {
                for k1 in 0..e1 {
                    let from = idx(1, s0 * e0 + k0, s1 * e1 + k1);
                    let to = idx(1, s1 * e0 + k0, s0 * e1 + k1);
                    swapped[to] = state[from];
                }
            }
        }
    }
    // Second Hadamard on the control.
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    let mut p0 = 0.0;
    for i0 in 0..d0 {
        for i1 in 0..d1 {
            let a = swapped[idx(0, i0, i1)];
            let b = swapped[idx(1, i0, i1)];
            let plus = (a + b) * cr(inv_sqrt2);
            let minus = (a - b) * cr(inv_sqrt2);
            out[idx(0, i0, i1)] = plus;
            out[idx(1, i0, i1)] = minus;
            p0 += plus.norm_sqr();
        }
    }
    Ok((p0, out))
}

/// Probability of control outcome 0 from the explicit circuit simulation;
/// agrees with ½(1 + Tr(ρ0 ρ1)) for the purified states.
pub fn swap_test_statevector(
    pur0: &Purification,
    pur1: &Purification,
    cap: usize,
) -> Result<f64> {
    swap_test_vector(pur0, pur1, cap).map(|(p0, _)| p0)
}

/// Success probability after one exact amplitude-amplification step applied
/// to a procedure that succeeds (all-zero outcome) with probability p/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationState {
    /// Pre-amplification SWAP-test probability p = ½(1 + Tr(ρ0ρ1)).
    pub p: f64,
    /// θ ∈ [0, π/4] with sin²θ = p/2.
    pub theta: f64,
    /// 1 - sin²(3θ) = 1 - (2p³ - 6p² + (9/2)p).
    pub p_acc: f64,
}

pub fn grover_single_iteration(p: f64) -> Result<AmplificationState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            quantity: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    let theta = (p / 2.0).sqrt().asin();
    let zero_prob = 2.0 * p.powi(3) - 6.0 * p * p + 4.5 * p;
    debug_assert!(((3.0 * theta).sin().powi(2) - zero_prob).abs() <= 1e-12);
    Ok(AmplificationState {
        p,
        theta,
        p_acc: 1.0 - zero_prob,
    })
}

/// End-to-end validation of the amplification step: apply the two Grover
/// reflections to the explicit SWAP-test output vector (with the extra
/// Hadamard flag qubit) and return the measured all-zero probability, which
/// must equal sin²(3θ).
pub fn grover_statevector_zero_prob(
    pur0: &Purification,
    pur1: &Purification,
    cap: usize,
) -> Result<f64> {
    let (_, swap_out) = swap_test_vector(pur0, pur1, cap / 2)?;
    let block = swap_out.len();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    // Φ = |+⟩_flag ⊗ (swap-test output); flag-major indexing.
    let mut phi = vec![Complex64::new(0.0, 0.0); 2 * block];
    for (i, &a) in swap_out.iter().enumerate() {
        phi[i] = a * cr(inv_sqrt2);
        phi[block + i] = a * cr(inv_sqrt2);
    }
    // The good subspace is flag = 0 ∧ control = 0; within a flag block the
    // control is the major index.
    let good = |i: usize| i < block / 2;
    // t = (I - 2Π0) Φ
    let mut t = phi.clone();
    for (i, v) in t.iter_mut().enumerate().take(block) {
        if good(i) {
            *v = -*v;
        }
    }
    // G Φ = -(I - 2|Φ⟩⟨Φ|) t = 2⟨Φ|t⟩Φ - t ... negated.
    let inner: Complex64 = phi.iter().zip(t.iter()).map(|(a, b)| a.conj() * b).sum();
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * block];
    for i in 0..2 * block {
        out[i] = -(t[i] - phi[i] * inner * cr(2.0));
    }
    Ok(out
        .iter()
        .enumerate()
        .filter(|(i, _)| *i < block && good(*i))
        .map(|(_, v)| v.norm_sqr())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NqpVerdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NqpDecision {
    pub p: f64,
    pub p_acc: f64,
    /// (p - ½)², the guaranteed acceptance floor when the states coincide.
    pub lower_bound_yes: f64,
    pub verdict: NqpVerdict,
}

/// One-sided overlap decision: p_acc is an exact polynomial in Tr(ρ0ρ1)
/// and vanishes identically on orthogonal supports, so "accept" means
/// p_acc clears an arithmetic-noise threshold of 1e-12.
pub fn nqp_decide(pair: &StatePair) -> Result<NqpDecision> {
    let p = swap_test_prob(pair).p0_outcome;
    let amp = grover_single_iteration(p.clamp(0.0, 1.0))?;
    let lower_bound_yes = (p - 0.5) * (p - 0.5);
    Ok(NqpDecision {
        p,
        p_acc: amp.p_acc,
        lower_bound_yes,
        verdict: if amp.p_acc > 1e-12 {
            NqpVerdict::Accept
        } else {
            NqpVerdict::Reject
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpAcceptance {
    /// ½ - HS²(ρ0,ρ1)/8.
    pub acceptance: f64,
    /// The same value assembled from the coin-flip mixture of SWAP tests:
    /// ½·p⁰(ρ0,ρ1) + Σᵢ (1 - Tr ρᵢ²)/8.
    pub mixture_form: f64,
    /// ½ - 2^{-n-4}: acceptance floor when td ≤ 2^{-n/2-1}.
    pub yes_floor: f64,
    /// ½ - 2^{-n-2}(1 - 2^{-n/2-1})²: acceptance ceiling when
    /// td ≥ 1 - 2^{-n/2-1}.
    pub no_ceiling: f64,
    /// 2^{-2n-4} ≤ yes_floor - no_ceiling.
    pub gap_floor: f64,
}

/// Acceptance probability of the hybrid SWAP-test procedure, evaluated both
/// through the Hilbert-Schmidt identity and through the raw mixture of
/// SWAP-test outcomes. The floors use d = 2^n from the pair's dimension.
pub fn pp_hybrid_accept(pair: &StatePair, tol: &ToleranceConfig) -> Result<PpAcceptance> {
    let d = pair.dim() as f64;
    let hs_sq = hs_distance_sq(pair, tol)?;
    let acceptance = 0.5 - hs_sq / 8.0;
    let p0 = swap_test_prob(pair).p0_outcome;
    let mixture_form = 0.5 * p0
        + (1.0 - pair.rho0.purity()) / 8.0
        + (1.0 - pair.rho1.purity()) / 8.0;
    // 2^{-n} = 1/d, 2^{-n/2} = 1/√d.
    let yes_floor = 0.5 - 1.0 / (16.0 * d);
    let root = 1.0 - 1.0 / (2.0 * d.sqrt());
    let no_ceiling = 0.5 - root * root / (4.0 * d);
    Ok(PpAcceptance {
        acceptance,
        mixture_form,
        yes_floor,
        no_ceiling,
        gap_floor: 1.0 / (16.0 * d * d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsTdBounds {
    pub td: f64,
    /// HS/√2 ≤ td.
    pub lower: f64,
    /// √(r0·r1/(r0+r1))·HS ≥ td with rᵢ the numerical ranks.
    pub rank_aware_upper: f64,
    /// √(dim/2)·HS, the rank-free relaxation.
    pub dim_upper: f64,
}

/// The two-sided trace-distance vs Hilbert-Schmidt bounds with the
/// rank-aware middle term.
pub fn hs_td_bounds(pair: &StatePair, tol: &ToleranceConfig) -> Result<HsTdBounds> {
    let hs = hs_distance_sq(pair, tol)?.max(0.0).sqrt();
    let td = crate::divergences::trace_distance(pair, tol)?;
    let r0 = pair.rho0.rank(tol)? as f64;
    let r1 = pair.rho1.rank(tol)? as f64;
    Ok(HsTdBounds {
        td,
        lower: hs / 2f64.sqrt(),
        rank_aware_upper: (r0 * r1 / (r0 + r1)).sqrt() * hs,
        dim_upper: (pair.dim() as f64 / 2.0).sqrt() * hs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, mix_seed};
    use crate::states::{basis_state, maximally_mixed, pure_state, random_mixed, StatePair};
    use approx::assert_relative_eq;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn random_pair(dim: usize, rank: usize, seed: u64) -> StatePair {
        StatePair::new(
            random_mixed(dim, rank, mix_seed(&[seed, 0]), &tol()).unwrap(),
            random_mixed(dim, rank, mix_seed(&[seed, 1]), &tol()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn swap_test_reference_points() {
        let t = tol();
        let psi = pure_state(&[cr(1.0), cr(0.0)], &t).unwrap();
        let same = StatePair::new(psi.clone(), psi).unwrap();
        let st = swap_test_prob(&same);
        assert_relative_eq!(st.overlap, 1.0, epsilon = 1e-12);
        assert_relative_eq!(st.p0_outcome, 1.0, epsilon = 1e-12);

        let orth = StatePair::new(
            basis_state(2, 0, &t).unwrap(),
            basis_state(2, 1, &t).unwrap(),
        )
        .unwrap();
        let st = swap_test_prob(&orth);
        assert!(st.overlap.abs() < 1e-15);
        assert_relative_eq!(st.p0_outcome, 0.5);

        // Maximally mixed n-qubit states: overlap 2^{-n}.
        for n in 1..=3u32 {
            let d = 1usize << n;
            let mm = maximally_mixed(d, &t).unwrap();
            let st = swap_test_prob(&StatePair::new(mm.clone(), mm).unwrap());
            assert_relative_eq!(st.overlap, (d as f64).recip(), epsilon = 1e-12);
            assert_relative_eq!(
                st.p0_outcome,
                0.5 + 0.5 / d as f64,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn purification_round_trips() {
        let t = tol();
        // Pure state: trivial environment.
        let psi = pure_state(&[cr(0.6), Complex64::new(0.0, 0.8)], &t).unwrap();
        let pur = purify(&psi, &t).unwrap();
        assert_eq!(pur.env_dim, 1);
        assert!(max_abs_diff(&pur.reduced_system(), psi.matrix()) < 1e-10);
        // Maximally mixed qubit: Bell-type vector.
        let mm = maximally_mixed(2, &t).unwrap();
        let pur = purify(&mm, &t).unwrap();
        assert_eq!(pur.env_dim, 2);
        assert!(max_abs_diff(&pur.reduced_system(), mm.matrix()) < 1e-10);
        // Random rank-2 state in dimension 4.
        let rho = random_mixed(4, 2, 17, &t).unwrap();
        let pur = purify(&rho, &t).unwrap();
        assert_eq!(pur.env_dim, 2);
        assert!(max_abs_diff(&pur.reduced_system(), rho.matrix()) < 1e-10);
        let norm: f64 = pur.vector.iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn statevector_swap_test_matches_analytic() {
        let t = tol();
        let psi = pure_state(&[cr(1.0), cr(0.0)], &t).unwrap();
        let pur = purify(&psi, &t).unwrap();
        assert_relative_eq!(
            swap_test_statevector(&pur, &pur, 4096).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let one = purify(&basis_state(2, 1, &t).unwrap(), &t).unwrap();
        assert_relative_eq!(
            swap_test_statevector(&pur, &one, 4096).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        for dim in [2usize, 3] {
            for seed in 0..20u64 {
                let pair = random_pair(dim, dim, 1000 + seed);
                let pur0 = purify(&pair.rho0, &t).unwrap();
                let pur1 = purify(&pair.rho1, &t).unwrap();
                let simulated = swap_test_statevector(&pur0, &pur1, 4096).unwrap();
                let analytic = swap_test_prob(&pair).p0_outcome;
                assert!(
                    (simulated - analytic).abs() < 1e-10,
                    "dim {dim} seed {seed}: {simulated} vs {analytic}"
                );
            }
        }
    }

    #[test]
    fn amplification_reference_points() {
        // p = 1/2: rejection with certainty.
        let amp = grover_single_iteration(0.5).unwrap();
        assert_relative_eq!(amp.theta, std::f64::consts::FRAC_PI_6, epsilon = 1e-12);
        assert!(amp.p_acc.abs() < 1e-12);
        // p = 0: the all-zero outcome never fires.
        let amp = grover_single_iteration(0.0).unwrap();
        assert_relative_eq!(amp.p_acc, 1.0);
        // p = 1: sin²(3π/4) = 1/2.
        let amp = grover_single_iteration(1.0).unwrap();
        assert_relative_eq!(amp.theta, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
        assert_relative_eq!(amp.p_acc, 0.5, epsilon = 1e-12);
        assert!(grover_single_iteration(1.2).is_err());
    }

    #[test]
    fn polynomial_and_trig_forms_agree_on_grid() {
        for i in 0..=10_000u32 {
            let p = f64::from(i) / 10_000.0;
            let theta = (p / 2.0).sqrt().asin();
            let trig = (3.0 * theta).sin().powi(2);
            let poly = 2.0 * p.powi(3) - 6.0 * p * p + 4.5 * p;
            assert!((trig - poly).abs() <= 1e-12, "p = {p}");
        }
    }

    #[test]
    fn grover_reflections_reproduce_the_amplified_probability() {
        let t = tol();
        for seed in 0..10u64 {
            let pair = random_pair(2, 2, 2000 + seed);
            let pur0 = purify(&pair.rho0, &t).unwrap();
            let pur1 = purify(&pair.rho1, &t).unwrap();
            let p = swap_test_prob(&pair).p0_outcome;
            let expected = (3.0 * (p / 2.0).sqrt().asin()).sin().powi(2);
            let simulated = grover_statevector_zero_prob(&pur0, &pur1, 4096).unwrap();
            assert!(
                (simulated - expected).abs() < 1e-10,
                "seed {seed}: {simulated} vs {expected}"
            );
        }
    }

    #[test]
    fn nqp_reference_points() {
        let t = tol();
        // Identical maximally mixed qubits: p_acc >= 2^{-4}.
        let mm = maximally_mixed(2, &t).unwrap();
        let d = nqp_decide(&StatePair::new(mm.clone(), mm).unwrap()).unwrap();
        assert!(d.p_acc >= 1.0 / 16.0 - 1e-12);
        assert!(d.p_acc >= d.lower_bound_yes - 1e-12);
        assert_eq!(d.verdict, NqpVerdict::Accept);
        // Orthogonal pure states: exact rejection.
        let orth = StatePair::new(
            basis_state(2, 0, &t).unwrap(),
            basis_state(2, 1, &t).unwrap(),
        )
        .unwrap();
        let d = nqp_decide(&orth).unwrap();
        assert!(d.p_acc.abs() <= 1e-12);
        assert_eq!(d.verdict, NqpVerdict::Reject);
        // Identical pure states: p = 1, p_acc = 1/2.
        let psi = pure_state(&[cr(0.8), cr(0.6)], &t).unwrap();
        let d = nqp_decide(&StatePair::new(psi.clone(), psi).unwrap()).unwrap();
        assert_relative_eq!(d.p_acc, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn nqp_completeness_floor_for_identical_states() {
        let t = tol();
        for seed in 0..20u64 {
            let dim = 2usize << (seed % 2); // 2 or 4
            let rho = random_mixed(dim, dim, 3000 + seed, &t).unwrap();
            let d = nqp_decide(&StatePair::new(rho.clone(), rho).unwrap()).unwrap();
            let n = (dim as f64).log2();
            assert!(d.p >= 0.5 + 2f64.powf(-n - 1.0) - 1e-12);
            assert!(d.p_acc >= d.lower_bound_yes - 1e-12);
            assert!(d.p_acc >= 2f64.powf(-2.0 * n - 2.0) - 1e-12);
        }
    }

    #[test]
    fn pp_acceptance_two_routes() {
        let t = tol();
        // Identical pure states: acceptance 1/2.
        let psi = pure_state(&[cr(0.6), cr(0.8)], &t).unwrap();
        let out = pp_hybrid_accept(&StatePair::new(psi.clone(), psi).unwrap(), &t).unwrap();
        assert_relative_eq!(out.acceptance, 0.5, epsilon = 1e-12);
        // Orthogonal pure states: HS² = 2, acceptance 1/4.
        let orth = StatePair::new(
            basis_state(2, 0, &t).unwrap(),
            basis_state(2, 1, &t).unwrap(),
        )
        .unwrap();
        let out = pp_hybrid_accept(&orth, &t).unwrap();
        assert_relative_eq!(out.acceptance, 0.25, epsilon = 1e-12);
        for seed in 0..20u64 {
            let pair = random_pair(4, 4, 4000 + seed);
            let out = pp_hybrid_accept(&pair, &t).unwrap();
            assert!(
                (out.acceptance - out.mixture_form).abs() <= 1e-12,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn pp_floors_bracket_the_promise_regimes() {
        let t = tol();
        // td = 0 (identical states) sits above the yes floor.
        let rho = random_mixed(2, 2, 4100, &t).unwrap();
        let close = pp_hybrid_accept(&StatePair::new(rho.clone(), rho).unwrap(), &t).unwrap();
        assert!(close.acceptance >= close.yes_floor - 1e-12);
        // td = 1 (orthogonal pure states) sits below the no ceiling.
        let far = StatePair::new(
            basis_state(2, 0, &t).unwrap(),
            basis_state(2, 1, &t).unwrap(),
        )
        .unwrap();
        let far = pp_hybrid_accept(&far, &t).unwrap();
        assert!(far.acceptance <= far.no_ceiling + 1e-12);
        assert!(far.no_ceiling + far.gap_floor <= far.yes_floor + 1e-15);
    }

    #[test]
    fn pp_gap_identity_across_qubit_counts() {
        for n in 1..=20u32 {
            let nf = f64::from(n);
            let d = 2f64.powf(nf);
            let yes_floor = 0.5 - 1.0 / (16.0 * d);
            let root = 1.0 - 1.0 / (2.0 * d.sqrt());
            let no_ceiling = 0.5 - root * root / (4.0 * d);
            let gap = yes_floor - no_ceiling;
            let closed_form =
                2f64.powf(-2.0 * nf - 4.0) + 2f64.powf(-nf - 2.0) * (0.75 - 2f64.powf(-nf / 2.0));
            assert!((gap - closed_form).abs() < 1e-15, "n = {n}");
            assert!(gap >= 2f64.powf(-2.0 * nf - 4.0) - 1e-18, "n = {n}");
        }
    }

    #[test]
    fn hs_td_bound_chain() {
        let t = tol();
        // Orthogonal pure qubits saturate the lower bound: td = HS/√2.
        let orth = StatePair::new(
            basis_state(2, 0, &t).unwrap(),
            basis_state(2, 1, &t).unwrap(),
        )
        .unwrap();
        let b = hs_td_bounds(&orth, &t).unwrap();
        assert_relative_eq!(b.td, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.lower, 1.0, epsilon = 1e-12);
        for seed in 0..30u64 {
            let dim = 2 + (seed % 3) as usize;
            let pair = random_pair(dim, dim, 5000 + seed);
            let b = hs_td_bounds(&pair, &t).unwrap();
            assert!(b.lower <= b.td + 1e-9, "seed {seed}");
            assert!(b.td <= b.rank_aware_upper + 1e-9, "seed {seed}");
            assert!(b.rank_aware_upper <= b.dim_upper + 1e-9, "seed {seed}");
        }
    }
}
