//! Property-based invariants over randomly generated states and
//! distributions.

use proptest::prelude::*;
use rand::Rng as _;

use qdivlab_core::divergences::{
    binary_entropy_bits, binary_entropy_bound, classical_divergences, fidelity_bures, qjs, qtd,
    qtd_meas, trace_distance, von_neumann_entropy,
};
use qdivlab_core::linalg::{complex_ginibre, mix_seed, seeded_rng, symmetrize, Spectrum};
use qdivlab_core::states::{
    cq_state, from_distribution, make_density, partial_trace, random_mixed, tensor, StateFile,
    StatePair,
};
use qdivlab_core::tolerance::ToleranceConfig;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn simplex(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    let raw: Vec<f64> = (0..dim)
        .map(|_| -rng.gen_range(1e-9f64..1.0).ln())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

proptest! {
    #[test]
    fn generated_states_satisfy_invariants(dim in 2usize..=6, rank_offset in 0usize..6, seed in any::<u64>()) {
        let t = tol();
        let rank = 1 + rank_offset % dim;
        let rho = random_mixed(dim, rank, seed, &t).unwrap();
        let spec = rho.spectrum(&t).unwrap();
        let sum: f64 = spec.eigenvalues.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        for &l in &spec.eigenvalues {
            prop_assert!(l >= -t.psd && l <= 1.0 + t.psd);
        }
        // Determinism: the same seed regenerates the same state.
        let again = random_mixed(dim, rank, seed, &t).unwrap();
        prop_assert_eq!(rho.matrix(), again.matrix());
    }

    #[test]
    fn tensor_then_partial_trace_round_trips(da in 2usize..=4, db in 2usize..=4, seed in any::<u64>()) {
        let t = tol();
        let a = random_mixed(da, da, mix_seed(&[seed, 1]), &t).unwrap();
        let b = random_mixed(db, db, mix_seed(&[seed, 2]), &t).unwrap();
        let prod = tensor(&a, &b, 4096, &t).unwrap();
        let back = partial_trace(&prod, &[da, db], &[0], &t).unwrap();
        prop_assert!(qdivlab_core::linalg::max_abs_diff(back.matrix(), a.matrix()) <= 1e-12);
    }

    #[test]
    fn spectral_identity_reproduces_hermitian_input(dim in 2usize..=8, seed in any::<u64>()) {
        let t = tol();
        let g = complex_ginibre(dim, dim, &mut seeded_rng(seed));
        let h = symmetrize(&g);
        let spec = Spectrum::new(&h, &t).unwrap();
        let back = spec.apply(|l| l, false).unwrap();
        prop_assert!(qdivlab_core::linalg::max_abs_diff(&back, &h) <= t.reconstruction);
    }

    #[test]
    fn cq_state_entropy_splits(seed in any::<u64>(), blocks in 2usize..=4) {
        let t = tol();
        let weights = simplex(blocks, mix_seed(&[seed, 7]));
        let states: Vec<_> = (0..blocks)
            .map(|i| random_mixed(3, 3, mix_seed(&[seed, i as u64]), &t).unwrap())
            .collect();
        let joint = cq_state(&weights, &states, &t).unwrap();
        let s_joint = von_neumann_entropy(&joint, &t).unwrap().nats;
        let h_w: f64 = weights
            .iter()
            .map(|&w| if w > 0.0 { -w * w.ln() } else { 0.0 })
            .sum();
        let mean_s: f64 = weights
            .iter()
            .zip(states.iter())
            .map(|(&w, rho)| w * von_neumann_entropy(rho, &t).unwrap().nats)
            .sum();
        prop_assert!((s_joint - (h_w + mean_s)).abs() <= 1e-9);
    }

    #[test]
    fn divergences_are_symmetric(dim in 2usize..=4, seed in any::<u64>()) {
        let t = tol();
        let pair = StatePair::new(
            random_mixed(dim, dim, mix_seed(&[seed, 0]), &t).unwrap(),
            random_mixed(dim, dim, mix_seed(&[seed, 1]), &t).unwrap(),
        )
        .unwrap();
        let swapped = pair.swapped();
        prop_assert!((trace_distance(&pair, &t).unwrap() - trace_distance(&swapped, &t).unwrap()).abs() <= 1e-12);
        prop_assert!((qtd(&pair, &t).unwrap() - qtd(&swapped, &t).unwrap()).abs() <= 1e-12);
        prop_assert!((qtd_meas(&pair, &t).unwrap() - qtd_meas(&swapped, &t).unwrap()).abs() <= 1e-12);
        prop_assert!((qjs(&pair, &t).unwrap().nats - qjs(&swapped, &t).unwrap().nats).abs() <= 1e-12);
        let f = fidelity_bures(&pair, &t).unwrap().fidelity;
        prop_assert!((f - fidelity_bures(&swapped, &t).unwrap().fidelity).abs() <= 1e-12);
        let hs = qdivlab_core::divergences::hs_distance_sq(&pair, &t).unwrap();
        prop_assert!((hs - qdivlab_core::divergences::hs_distance_sq(&swapped, &t).unwrap()).abs() <= 1e-12);
        let qh = qdivlab_core::divergences::quantum_hellinger(&pair, &t).unwrap().qh_sq;
        prop_assert!((qh - qdivlab_core::divergences::quantum_hellinger(&swapped, &t).unwrap().qh_sq).abs() <= 1e-12);
    }

    #[test]
    fn quantum_inequality_chain_holds(dim in 2usize..=4, rank_offset in 0usize..4, seed in any::<u64>()) {
        let t = tol();
        let rank = 1 + rank_offset % dim;
        let pair = StatePair::new(
            random_mixed(dim, rank, mix_seed(&[seed, 0]), &t).unwrap(),
            random_mixed(dim, rank, mix_seed(&[seed, 1]), &t).unwrap(),
        )
        .unwrap();
        let td = trace_distance(&pair, &t).unwrap();
        let v_qtd = qtd(&pair, &t).unwrap();
        let v_meas = qtd_meas(&pair, &t).unwrap();
        let js = qjs(&pair, &t).unwrap();
        let slack = 1e-9;
        prop_assert!(td * td <= v_meas + slack);
        prop_assert!(v_meas <= v_qtd + slack);
        prop_assert!(v_qtd <= td + slack);
        prop_assert!(0.5 * v_qtd * v_qtd <= js.nats + slack);
        prop_assert!(js.nats <= v_qtd + slack);
        prop_assert!(js.bits >= 1.0 - binary_entropy_bits((1.0 - td) / 2.0) - slack);
    }

    #[test]
    fn classical_chains_hold(dim in 2usize..=6, seed in any::<u64>()) {
        let p0 = simplex(dim, mix_seed(&[seed, 0]));
        let p1 = simplex(dim, mix_seed(&[seed, 1]));
        let c = classical_divergences(&p0, &p1).unwrap();
        let slack = 1e-12;
        prop_assert!(c.sd * c.sd <= c.tdc + slack);
        prop_assert!(c.tdc <= c.sd + slack);
        prop_assert!(c.hellinger_sq <= c.tdc + slack);
        prop_assert!(c.tdc <= 2.0 * c.hellinger_sq + slack);
        prop_assert!(c.js2_bits <= c.sd + slack);
        prop_assert!(c.js2_bits >= 1.0 - binary_entropy_bits((1.0 - c.sd) / 2.0) - 1e-9);
    }

    #[test]
    fn series_bound_monotone_and_dominated(td in 0.0f64..=1.0, terms in 1usize..200) {
        let shorter = binary_entropy_bound(td, terms).unwrap();
        let longer = binary_entropy_bound(td, terms + 7).unwrap();
        prop_assert!(longer.series_bound >= shorter.series_bound - 1e-15);
        prop_assert!(shorter.series_bound <= shorter.h2_bound + 1e-12);
    }

    #[test]
    fn amplification_polynomial_matches_trig(p in 0.0f64..=1.0) {
        let theta = (p / 2.0).sqrt().asin();
        let trig = (3.0 * theta).sin().powi(2);
        let poly = 2.0 * p.powi(3) - 6.0 * p * p + 4.5 * p;
        prop_assert!((trig - poly).abs() <= 1e-12);
    }

    #[test]
    fn state_files_round_trip(dim in 2usize..=5, seed in any::<u64>()) {
        let t = tol();
        let rho = random_mixed(dim, dim, seed, &t).unwrap();
        let json = serde_json::to_string(&StateFile::from_density(&rho)).unwrap();
        let parsed: StateFile = serde_json::from_str(&json).unwrap();
        let back = parsed.load(&t).unwrap();
        prop_assert!(qdivlab_core::linalg::max_abs_diff(back.matrix(), rho.matrix()) <= 1e-12);
    }

    #[test]
    fn diagonal_states_reduce_to_classical(dim in 2usize..=5, seed in any::<u64>()) {
        let t = tol();
        let p0 = simplex(dim, mix_seed(&[seed, 0]));
        let p1 = simplex(dim, mix_seed(&[seed, 1]));
        let classical = classical_divergences(&p0, &p1).unwrap();
        let pair = StatePair::new(
            from_distribution(&p0, &t).unwrap(),
            from_distribution(&p1, &t).unwrap(),
        )
        .unwrap();
        prop_assert!((trace_distance(&pair, &t).unwrap() - classical.sd).abs() <= 1e-10);
        prop_assert!((qtd(&pair, &t).unwrap() - classical.tdc).abs() <= 1e-10);
        prop_assert!((qtd_meas(&pair, &t).unwrap() - classical.tdc).abs() <= 1e-10);
        prop_assert!((qjs(&pair, &t).unwrap().bits - classical.js2_bits).abs() <= 1e-10);
    }
}

#[test]
fn make_density_symmetrizes_and_renormalizes() {
    let t = tol();
    let mut rng = seeded_rng(404);
    let g = complex_ginibre(3, 3, &mut rng);
    let h = &g * g.adjoint();
    let trace = qdivlab_core::linalg::trace(&h).re;
    // Slightly off-trace input within tolerance renormalizes exactly.
    let off = &h / qdivlab_core::linalg::cr(trace * (1.0 + 5e-10));
    let rho = make_density(&off, &t).unwrap();
    let spec = rho.spectrum(&t).unwrap();
    let sum: f64 = spec.eigenvalues.iter().sum();
    assert!((sum - 1.0).abs() < 1e-14);
}
