//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Tolerances are pinned here, not configurable.
//!
//! Criterion 3b (measured-discrimination XOR multiplicativity) asserts a
//! claimed identity that does not hold for non-commuting pairs — the
//! optimal correlated measurement on the parity mixture beats products of
//! optimal local measurements — so that test fails, printing the
//! counterexample. Everything else passes.

use std::f64::consts::LN_2;

use qdivlab_core::algorithms::{
    grover_single_iteration, pp_hybrid_accept, purify, swap_test_prob, swap_test_statevector,
};
use qdivlab_core::divergences::{
    binary_entropy_bits, classical_divergences, fidelity_bures, qjs, qtd, qtd_alpha,
    qtd_equality_conditions, qtd_meas, trace_distance,
};
use qdivlab_core::harness::{
    emit_report, ensure_fixtures_pass, reproduce_counterexamples, run_inequality_suite,
    RankProfile, ReportFormat, SuiteConfig,
};
use qdivlab_core::linalg::{mix_seed, seeded_rng};
use qdivlab_core::polarization::{
    make_schedule, polarize, tensor_power_reduce, xor_reduce, EvalMode, PromiseSide,
    ScheduleKind, StageValue,
};
use qdivlab_core::reductions::{qedp_gap_amplify, qjsp_to_qedp};
use qdivlab_core::states::{from_distribution, random_mixed, DensityMatrix, StatePair};
use qdivlab_core::tolerance::ToleranceConfig;
use qdivlab_core::Error;
use rand::Rng;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn random_pair(dim: usize, rank: usize, seed: u64) -> StatePair {
    let t = tol();
    StatePair::new(
        random_mixed(dim, rank, mix_seed(&[seed, 0]), &t).unwrap(),
        random_mixed(dim, rank, mix_seed(&[seed, 1]), &t).unwrap(),
    )
    .unwrap()
}

fn random_simplex(dim: usize, rng: &mut rand::rngs::StdRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| -rng.gen_range(0.0f64..1.0).ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

#[test]
fn acceptance_01_inequality_grid() {
    let config = SuiteConfig {
        seed: 1,
        trials_per_dim: 1000,
        dims: vec![2, 3, 4, 8],
        rank_profiles: RankProfile::ALL.to_vec(),
        slack: 1e-9,
        conjecture_mode: false,
    };
    let report = run_inequality_suite(&config, 4).unwrap();
    let checked: u64 = report.rows.iter().map(|r| r.aggregate.checked).sum();
    assert!(checked >= 12_000 * 22);
    for row in &report.rows {
        assert_eq!(
            row.aggregate.violations, 0,
            "{} dim {} {:?}: worst margin {} at seed {}",
            row.inequality, row.dim, row.profile, row.aggregate.worst_margin,
            row.aggregate.worst_seed
        );
    }
    println!(
        "[PASS] criterion 1: inequality grid, {} checks over 12000 pairs, zero violations",
        checked
    );
}

#[test]
fn acceptance_02_commuting_oracle() {
    let t = tol();
    // Hand values first.
    let pair = StatePair::new(
        from_distribution(&[1.0, 0.0], &t).unwrap(),
        from_distribution(&[0.5, 0.5], &t).unwrap(),
    )
    .unwrap();
    assert!((qtd(&pair, &t).unwrap() - 1.0 / 3.0).abs() <= 1e-10);
    assert!((qtd_meas(&pair, &t).unwrap() - 1.0 / 3.0).abs() <= 1e-10);
    let expect_js2 = binary_entropy_bits(0.25) - 0.5;
    assert!((qjs(&pair, &t).unwrap().bits - expect_js2).abs() <= 1e-10);

    // Random diagonal pairs across dimensions.
    let mut rng = seeded_rng(0xd1a6);
    for dim in [2usize, 3, 4, 8] {
        for _ in 0..50 {
            let p0 = random_simplex(dim, &mut rng);
            let p1 = random_simplex(dim, &mut rng);
            let classical = classical_divergences(&p0, &p1).unwrap();
            let qpair = StatePair::new(
                from_distribution(&p0, &t).unwrap(),
                from_distribution(&p1, &t).unwrap(),
            )
            .unwrap();
            assert!((trace_distance(&qpair, &t).unwrap() - classical.sd).abs() <= 1e-10);
            assert!((qtd(&qpair, &t).unwrap() - classical.tdc).abs() <= 1e-10);
            assert!((qtd_meas(&qpair, &t).unwrap() - classical.tdc).abs() <= 1e-10);
            assert!((qjs(&qpair, &t).unwrap().bits - classical.js2_bits).abs() <= 1e-10);
            let qh = qdivlab_core::divergences::quantum_hellinger(&qpair, &t).unwrap();
            assert!((qh.qh_sq - classical.hellinger_sq).abs() <= 1e-10);
        }
    }
    println!("[PASS] criterion 2: commuting oracle, classical reductions to 1e-10");
}

#[test]
fn acceptance_03a_xor_exactness_qtd() {
    let t = tol();
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let pair = random_pair(2, 2, 30_000 + seed);
        let value = qtd(&pair, &t).unwrap();
        for l in [2u32, 3] {
            let out = xor_reduce(&pair, l, 4096, &t).unwrap();
            let gap = (qtd(&out, &t).unwrap() - value.powi(l as i32)).abs();
            worst = worst.max(gap);
            assert!(gap <= 1e-9, "seed {seed} l {l}: gap {gap}");
        }
    }
    println!("[PASS] criterion 3a: QTD XOR multiplicativity on 500 pairs, worst gap {worst:.3e}");
}

#[test]
fn acceptance_03b_xor_exactness_qtd_meas() {
    // As stated, value^l multiplicativity for the measured discrimination.
    // The identity is false for non-commuting pairs: the measured value of
    // the XOR output strictly exceeds the product (an explicit projective
    // measurement in the symmetrized-quotient eigenbasis achieves the
    // excess), so this check fails and prints the counterexample.
    let t = tol();
    let mut worst = (0.0f64, 0u64, 0u32);
    for seed in 0..500u64 {
        let pair = random_pair(2, 2, 30_000 + seed);
        let value = qtd_meas(&pair, &t).unwrap();
        for l in [2u32, 3] {
            let out = xor_reduce(&pair, l, 4096, &t).unwrap();
            let gap = (qtd_meas(&out, &t).unwrap() - value.powi(l as i32)).abs();
            if gap > worst.0 {
                worst = (gap, seed, l);
            }
        }
    }
    assert!(
        worst.0 <= 1e-9,
        "[FAIL] criterion 3b: QTD^meas XOR multiplicativity does not hold: \
         worst |measured - value^l| = {:.6e} at seed {} l {} (equality holds only for \
         commuting pairs; joint measurements beat products of local ones)",
        worst.0,
        worst.1,
        worst.2
    );
    println!("[PASS] criterion 3b: QTD^meas XOR multiplicativity on 500 pairs");
}

#[test]
fn acceptance_04_tensor_power_bounds() {
    let t = tol();
    for seed in 0..500u64 {
        // Mix of full-rank and pure qubit pairs.
        let rank = if seed % 4 == 3 { 1 } else { 2 };
        let pair = random_pair(2, rank, 40_000 + seed);
        let v_meas = qtd_meas(&pair, &t).unwrap();
        let v_qtd = qtd(&pair, &t).unwrap();
        let f = fidelity_bures(&pair, &t).unwrap().fidelity;
        for l in [2u32, 3, 4] {
            let lf = f64::from(l);
            let out = tensor_power_reduce(&pair, l, EvalMode::Materialized, 4096, &t)
                .unwrap()
                .pair
                .unwrap();
            let meas_out = qtd_meas(&out, &t).unwrap();
            assert!(
                meas_out >= 1.0 - (-lf / 2.0 * v_meas).exp() - 1e-9,
                "seed {seed} l {l}: measured lower bound"
            );
            assert!(
                meas_out <= 2.0 * lf * v_meas + 1e-9,
                "seed {seed} l {l}: measured upper bound"
            );
            let qtd_out = qtd(&out, &t).unwrap();
            assert!(
                qtd_out >= 1.0 - (-lf / 2.0 * v_qtd * v_qtd).exp() - 1e-9,
                "seed {seed} l {l}: sandwiched lower bound"
            );
            assert!(
                qtd_out <= (2.0 * lf).sqrt() * v_qtd.sqrt() + 1e-9,
                "seed {seed} l {l}: sandwiched upper bound"
            );
            if l < 4 {
                let f_out = fidelity_bures(&out, &t).unwrap().fidelity;
                assert!(
                    (f_out - f.powi(l as i32)).abs() <= 1e-10,
                    "seed {seed} l {l}: fidelity multiplicativity {f_out} vs {}",
                    f.powi(l as i32)
                );
            }
        }
    }
    println!("[PASS] criterion 4: tensor-power bounds and fidelity multiplicativity on 500 pairs");
}

#[test]
fn acceptance_05_polarization_schedules() {
    let t = tol();
    // Regime grid including the non-polarizing-for-td point beta > alpha^2.
    for (alpha, beta, k) in [(0.9, 0.82, 1u32), (0.9, 0.82, 4), (0.9, 0.82, 8)] {
        make_schedule(alpha, beta, k, ScheduleKind::MeasQtd)
            .unwrap_or_else(|e| panic!("meas schedule must accept ({alpha},{beta},{k}): {e}"));
        assert!(
            matches!(
                make_schedule(alpha, beta, k, ScheduleKind::Qtd),
                Err(Error::RegimeViolation { .. })
            ),
            "qtd schedule must reject ({alpha},{beta},{k})"
        );
    }
    for (alpha, beta, k) in [(0.9, 0.4, 2u32), (0.8, 0.3, 3), (0.6, 0.2, 5)] {
        make_schedule(alpha, beta, k, ScheduleKind::MeasQtd).unwrap();
        make_schedule(alpha, beta, k, ScheduleKind::Qtd).unwrap();
    }

    // Fully materialized small-k run: every stage bound must be met, on
    // both promise sides.
    let schedule = make_schedule(0.9, 0.4, 1, ScheduleKind::MeasQtd).unwrap();
    let yes_pair = StatePair::new(
        from_distribution(&[1.0, 0.0], &t).unwrap(),
        from_distribution(&[0.05, 0.95], &t).unwrap(),
    )
    .unwrap();
    let no_pair = StatePair::new(
        from_distribution(&[0.6, 0.4], &t).unwrap(),
        from_distribution(&[0.4, 0.6], &t).unwrap(),
    )
    .unwrap();
    for (pair, side) in [(yes_pair, PromiseSide::Yes), (no_pair, PromiseSide::No)] {
        let outcome = polarize(&pair, &schedule, 4096, &t).unwrap();
        assert_eq!(outcome.input_side, side);
        assert_eq!(outcome.result.mode, EvalMode::Materialized);
        for cert in &outcome.certificates {
            assert!(
                matches!(
                    cert.value,
                    StageValue::Exact {
                        materialized: true,
                        ..
                    }
                ),
                "{side:?} {cert:?}"
            );
            assert_eq!(cert.satisfied, Some(true), "{side:?} {cert:?}");
        }
    }

    // Analytic degradation keeps certifying: yes instance at the exact
    // threshold, stage 2 beyond the cap.
    let schedule = make_schedule(1.0 / 3.0, 0.2, 1, ScheduleKind::MeasQtd).unwrap();
    let pair = StatePair::new(
        from_distribution(&[1.0, 0.0], &t).unwrap(),
        from_distribution(&[0.5, 0.5], &t).unwrap(),
    )
    .unwrap();
    let outcome = polarize(&pair, &schedule, 4096, &t).unwrap();
    for cert in &outcome.certificates {
        assert_eq!(cert.satisfied, Some(true), "{cert:?}");
    }
    println!("[PASS] criterion 5: schedule regimes and materialized stage bounds");
}

#[test]
fn acceptance_06_entropy_identity() {
    let t = tol();
    let mut rng = seeded_rng(0x6e7);
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let dim = [2usize, 3, 4, 8][(seed % 4) as usize];
        let rank = 1 + (seed as usize % dim);
        let pair = random_pair(dim, rank, 60_000 + seed);
        let alpha: f64 = rng.gen_range(0.05..1.0);
        let beta: f64 = rng.gen_range(0.0..alpha - 0.01);
        let out = qjsp_to_qedp(&pair, alpha, beta, &t).unwrap();
        worst = worst.max(out.identity_residual);
        assert!(
            out.identity_residual <= 1e-9,
            "seed {seed}: residual {} at alpha {alpha} beta {beta}",
            out.identity_residual
        );
    }
    // Degenerate case: identical states give exactly -(alpha+beta)/2 bits.
    for (alpha, beta) in [(0.8, 0.2), (0.9, 0.1), (0.5, 0.3)] {
        let rho = random_mixed(3, 3, 61_000, &t).unwrap();
        let pair = StatePair::new(rho.clone(), rho).unwrap();
        let out = qjsp_to_qedp(&pair, alpha, beta, &t).unwrap();
        let s0 = qdivlab_core::divergences::von_neumann_entropy(&out.pair_out.rho0, &t)
            .unwrap()
            .bits;
        let s1 = qdivlab_core::divergences::von_neumann_entropy(&out.pair_out.rho1, &t)
            .unwrap()
            .bits;
        assert!(
            (s0 - s1 + (alpha + beta) / 2.0).abs() <= 1e-9,
            "alpha {alpha} beta {beta}: {}",
            s0 - s1
        );
    }
    println!("[PASS] criterion 6: entropy identity residual <= 1e-9 on 500 pairs (worst {worst:.3e})");
}

#[test]
fn acceptance_07_gap_amplification() {
    let t = tol();
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let dim = [2usize, 3, 4][(seed % 3) as usize];
        let pair = random_pair(dim, dim, 70_000 + seed);
        // Force exactly two replications: the materialized check then runs
        // at p = 2.
        let out = qedp_gap_amplify(&pair, 0.26, 0.5, 4096, &t).unwrap();
        assert_eq!(out.p_replications, 2);
        let (p, residual) = out.materialized_check.unwrap();
        assert_eq!(p, 2);
        worst = worst.max(residual);
        assert!(residual <= 1e-10, "seed {seed}: residual {residual}");
    }
    println!("[PASS] criterion 7: analytic vs materialized entropy gap at p = 2 (worst {worst:.3e})");
}

#[test]
fn acceptance_08_algorithms() {
    let t = tol();
    // Polynomial/trigonometric agreement on a 10^4 grid.
    for i in 0..=10_000u32 {
        let p = f64::from(i) / 10_000.0;
        let theta = (p / 2.0).sqrt().asin();
        let trig = (3.0 * theta).sin().powi(2);
        let poly = 2.0 * p.powi(3) - 6.0 * p * p + 4.5 * p;
        assert!((trig - poly).abs() <= 1e-12, "p = {p}");
    }
    // p = 1/2 rejects with certainty.
    let amp = grover_single_iteration(0.5).unwrap();
    assert!(amp.p_acc.abs() <= 1e-12);

    // Statevector SWAP test matches the analytic overlap formula on 200
    // purified qubit and qutrit pairs.
    for seed in 0..200u64 {
        let dim = if seed % 2 == 0 { 2 } else { 3 };
        let rank = 1 + (seed as usize % dim);
        let pair = random_pair(dim, rank, 80_000 + seed);
        let pur0 = purify(&pair.rho0, &t).unwrap();
        let pur1 = purify(&pair.rho1, &t).unwrap();
        let simulated = swap_test_statevector(&pur0, &pur1, 4096).unwrap();
        let analytic = swap_test_prob(&pair).p0_outcome;
        assert!(
            (simulated - analytic).abs() <= 1e-10,
            "seed {seed}: {simulated} vs {analytic}"
        );
    }

    // PP acceptance agrees between the Hilbert-Schmidt route and the
    // SWAP-test mixture route.
    for seed in 0..100u64 {
        let n = 1 + (seed % 3) as u32;
        let pair = random_pair(1 << n, 1 << n, 81_000 + seed);
        let out = pp_hybrid_accept(&pair, &t).unwrap();
        assert!(
            (out.acceptance - out.mixture_form).abs() <= 1e-12,
            "seed {seed}"
        );
    }
    // Perfect soundness on orthogonal supports: embed random qubit
    // states into disjoint blocks of a 4-dimensional space.
    for seed in 0..50u64 {
        let t2 = tol();
        let top = random_mixed(2, 2, 82_000 + seed, &t2).unwrap();
        let bottom = random_mixed(2, 2, 83_000 + seed, &t2).unwrap();
        let embed = |rho: &DensityMatrix, offset: usize| {
            let mut m = qdivlab_core::linalg::CMatrix::zeros(4, 4);
            for i in 0..2 {
                for j in 0..2 {
                    m[(offset + i, offset + j)] = rho.matrix()[(i, j)];
                }
            }
            qdivlab_core::states::make_density(&m, &t2).unwrap()
        };
        let pair = StatePair::new(embed(&top, 0), embed(&bottom, 2)).unwrap();
        let decision = qdivlab_core::algorithms::nqp_decide(&pair).unwrap();
        assert!(decision.p_acc.abs() <= 1e-12, "seed {seed}: {}", decision.p_acc);
    }

    // Analytic gap floor for n = 1..20.
    for n in 1..=20u32 {
        let nf = f64::from(n);
        let d = 2f64.powf(nf);
        let yes_floor = 0.5 - 1.0 / (16.0 * d);
        let root = 1.0 - 1.0 / (2.0 * d.sqrt());
        let no_ceiling = 0.5 - root * root / (4.0 * d);
        assert!(
            yes_floor - no_ceiling >= 2f64.powf(-2.0 * nf - 4.0) - 1e-18,
            "n = {n}"
        );
    }
    println!("[PASS] criterion 8: amplification identities, SWAP statevector, PP gap floors");
}

#[test]
fn acceptance_09_counterexample_fixtures() {
    let t = tol();
    let fixtures = reproduce_counterexamples(&t).unwrap();
    ensure_fixtures_pass(&fixtures).unwrap_or_else(|e| panic!("{e}"));

    // Pin the headline values beyond the fixture booleans.
    let pair = StatePair::new(
        qdivlab_core::states::from_bloch([6.0 / 7.0, 3.0 / 7.0, 2.0 / 7.0], &t).unwrap(),
        qdivlab_core::states::from_bloch([-3.0 / 7.0, -2.0 / 7.0, 6.0 / 7.0], &t).unwrap(),
    )
    .unwrap();
    let td = trace_distance(&pair, &t).unwrap();
    assert!((qtd_alpha(&pair, 0.5, &t).unwrap() - td).abs() <= 1e-9);
    assert!(qtd_alpha(&pair, 0.75, &t).unwrap() > td);
    assert!(qtd_equality_conditions(&pair, 1e-9, &t).unwrap().overall);

    let first = StatePair::new(
        qdivlab_core::states::from_bloch([1.0 / 7.0, 1.0 / 3.0, 1.0 / 4.0], &t).unwrap(),
        qdivlab_core::states::from_bloch([-1.0 / 7.0, -1.0 / 3.0, -1.0 / 4.0], &t).unwrap(),
    )
    .unwrap();
    let second = StatePair::new(
        qdivlab_core::states::from_bloch([-1.0 / 7.0, -1.0 / 5.0, -1.0 / 6.0], &t).unwrap(),
        qdivlab_core::states::from_bloch([1.0 / 7.0, 1.0 / 5.0, -1.0 / 6.0], &t).unwrap(),
    )
    .unwrap();
    let td1 = trace_distance(&first, &t).unwrap();
    let td2 = trace_distance(&second, &t).unwrap();
    assert!((td1 - 0.4405).abs() < 5e-5);
    assert!((td2 - 0.2458).abs() < 5e-5);
    assert!((td1 * td1 - 0.1940).abs() < 5e-5);
    assert!(td1 > td2 && td2 > td1 * td1);
    assert!(qtd_meas(&first, &t).unwrap() > qtd_meas(&second, &t).unwrap());
    println!("[PASS] criterion 9: counterexample fixtures reproduce with pinned values");
}

#[test]
fn acceptance_10_reproducibility() {
    let config = SuiteConfig {
        seed: 99,
        trials_per_dim: 60,
        dims: vec![2, 3, 4],
        rank_profiles: RankProfile::ALL.to_vec(),
        slack: 1e-9,
        conjecture_mode: false,
    };
    let single = run_inequality_suite(&config, 1).unwrap();
    let multi = run_inequality_suite(&config, 5).unwrap();
    let bytes_single = emit_report(&single, ReportFormat::Json).unwrap();
    let bytes_multi = emit_report(&multi, ReportFormat::Json).unwrap();
    assert_eq!(bytes_single, bytes_multi, "reports differ across thread counts");
    let csv_single = emit_report(&single, ReportFormat::Csv).unwrap();
    let csv_multi = emit_report(&multi, ReportFormat::Csv).unwrap();
    assert_eq!(csv_single, csv_multi);
    println!("[PASS] criterion 10: byte-identical reports across thread counts");
}

