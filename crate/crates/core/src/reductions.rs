//! Reductions between the state-testing problems: the flagged-mixture
//! construction that turns a QJS₂ promise into an entropy-difference
//! promise, tensor-power gap amplification for entropy differences, and the
//! parameter maps behind the hardness regimes.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::divergences::{binary_entropy_bits, qjs, trace_distance, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::states::{cq_state, tensor, StatePair};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Qsdp,
    Qjsp,
    MeasQtdp,
    Qtdp,
    Qedp,
}

/// Promise thresholds: distance problems carry (α, β), the entropy
/// difference problem carries a gap g in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Promise {
    Distance { alpha: f64, beta: f64 },
    EntropyGap { g: f64 },
}

/// A constructed problem instance with its promise parameters.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub kind: ReductionKind,
    pub pair: StatePair,
    pub promise: Promise,
    /// Qubit count of the underlying states when the dimension is a power
    /// of two.
    pub n: Option<u32>,
}

impl ReductionInstance {
    pub fn new(kind: ReductionKind, pair: StatePair, promise: Promise) -> Result<ReductionInstance> {
        match (kind, promise) {
            (ReductionKind::Qedp, Promise::EntropyGap { g }) => {
                if g <= 0.0 {
                    return Err(Error::OutOfRange {
                        quantity: "g",
                        value: g,
                        range: "g > 0",
                    });
                }
            }
            (ReductionKind::Qedp, Promise::Distance { .. }) => {
                return Err(Error::BadPromise {
                    alpha: f64::NAN,
                    beta: f64::NAN,
                })
            }
            (_, Promise::EntropyGap { g }) => {
                return Err(Error::OutOfRange {
                    quantity: "g",
                    value: g,
                    range: "distance kinds take (alpha, beta)",
                })
            }
            (_, Promise::Distance { alpha, beta }) => {
                if !(0.0..=1.0).contains(&beta) || !(0.0..=1.0).contains(&alpha) || beta >= alpha {
                    return Err(Error::BadPromise { alpha, beta });
                }
            }
        }
        let n = pair.rho0.qubits();
        Ok(ReductionInstance {
            kind,
            pair,
            promise,
            n,
        })
    }
}

/// Solve H₂(p) = target on p ∈ [0, ½] by bisection. H₂ is 2-to-1 on [0,1];
/// the lower branch is fixed for determinism.
fn invert_binary_entropy(target: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::OutOfRange {
            quantity: "H2 target",
            value: target,
            range: "[0, 1]",
        });
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy_bits(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let p = 0.5 * (lo + hi);
    let residual = (binary_entropy_bits(p) - target).abs();
    // dH2/dp blows up at p = 0, so measure convergence in p, not in H2.
    if hi - lo > 1e-12 {
        return Err(Error::BisectionFailure { target, residual });
    }
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct QjspToQedp {
    pub pair_out: StatePair,
    /// Entropy gap g = (ln2/2)(α-β) in nats.
    pub g: f64,
    /// Flag bias p solving H₂(p) = 1 - (α+β)/2.
    pub p: f64,
    /// |S₂(ρ'0) - S₂(ρ'1) - (QJS₂(ρ0,ρ1) - (α+β)/2)| in bits.
    pub identity_residual: f64,
}

/// Build the entropy-difference instance from a QJS₂ promise: the flagged
/// mixture ρ'1 = ½|0⟩⟨0|⊗ρ0 + ½|1⟩⟨1|⊗ρ1 against the product
/// ρ'0 = (p|0⟩⟨0| + (1-p)|1⟩⟨1|) ⊗ (ρ0+ρ1)/2, so that
/// S₂(ρ'0) - S₂(ρ'1) = QJS₂(ρ0,ρ1) - (α+β)/2 by the joint entropy theorem.
pub fn qjsp_to_qedp(
    pair: &StatePair,
    alpha: f64,
    beta: f64,
    tol: &ToleranceConfig,
) -> Result<QjspToQedp> {
    if !(0.0..=1.0).contains(&beta) || !(0.0..=1.0).contains(&alpha) || beta >= alpha {
        return Err(Error::BadPromise { alpha, beta });
    }
    let mean = 0.5 * (alpha + beta);
    let p = invert_binary_entropy(1.0 - mean)?;
    let mu = crate::divergences::midpoint(pair, tol)?;
    let flagged = cq_state(&[0.5, 0.5], &[pair.rho0.clone(), pair.rho1.clone()], tol)?;
    let product = cq_state(&[p, 1.0 - p], &[mu.clone(), mu], tol)?;
    let s0 = von_neumann_entropy(&product, tol)?.bits;
    let s1 = von_neumann_entropy(&flagged, tol)?.bits;
    let qjs2 = qjs(pair, tol)?.bits;
    let identity_residual = ((s0 - s1) - (qjs2 - mean)).abs();
    Ok(QjspToQedp {
        pair_out: StatePair::new(product, flagged)?,
        g: 0.5 * LN_2 * (alpha - beta),
        p,
        identity_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapAmplification {
    pub p_replications: u64,
    /// p · (S(ρ0) - S(ρ1)) in nats, by entropy additivity; no tensor power
    /// is materialized for this value.
    pub analytic_gap: f64,
    /// (replications checked, |materialized - analytic| in nats) when a
    /// tensor power fits under the cap.
    pub materialized_check: Option<(u32, f64)>,
}

/// Amplify an entropy gap g to at least `target` by p = ⌈target/g⌉ tensor
/// copies. Entropy additivity makes the amplified gap exactly p·ΔS.
pub fn qedp_gap_amplify(
    pair: &StatePair,
    g: f64,
    target: f64,
    cap: usize,
    tol: &ToleranceConfig,
) -> Result<GapAmplification> {
    if g <= 0.0 {
        return Err(Error::OutOfRange {
            quantity: "g",
            value: g,
            range: "g > 0",
        });
    }
    let p_replications = (target / g).ceil().max(1.0) as u64;
    let delta_s =
        von_neumann_entropy(&pair.rho0, tol)?.nats - von_neumann_entropy(&pair.rho1, tol)?.nats;
    let analytic_gap = p_replications as f64 * delta_s;

    let d = pair.dim();
    let fits = |p: u32| -> bool {
        let mut dim: usize = 1;
        for _ in 0..p {
            match dim.checked_mul(d) {
                Some(v) if v <= cap => dim = v,
                _ => return false,
            }
        }
        true
    };
    let p_check = u32::try_from(p_replications)
        .ok()
        .filter(|&p| fits(p))
        .or(if fits(2) { Some(2) } else { None });
    let materialized_check = match p_check {
        Some(p) => {
            let mut r0 = pair.rho0.clone();
            let mut r1 = pair.rho1.clone();
            for _ in 1..p {
                r0 = tensor(&r0, &pair.rho0, cap, tol)?;
                r1 = tensor(&r1, &pair.rho1, cap, tol)?;
            }
            let measured =
                von_neumann_entropy(&r0, tol)?.nats - von_neumann_entropy(&r1, tol)?.nats;
            Some((p, (measured - p as f64 * delta_s).abs()))
        }
        None => None,
    };
    Ok(GapAmplification {
        p_replications,
        analytic_gap,
        materialized_check,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardnessTarget {
    Qjsp,
    MeasQtdp,
    Qedp,
}

/// One numerically evaluated inequality step of a hardness derivation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs ≤ rhs at 1e-12 slack.
    pub holds: bool,
}

impl ChainStep {
    fn leq(description: impl Into<String>, lhs: f64, rhs: f64) -> ChainStep {
        ChainStep {
            description: description.into(),
            lhs,
            rhs,
            holds: lhs <= rhs + 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessThresholds {
    pub target: HardnessTarget,
    pub n: u32,
    pub epsilon: f64,
    pub alpha_threshold: Option<f64>,
    pub beta_threshold: Option<f64>,
    /// Entropy-gap threshold in nats (qedp only).
    pub g_threshold: Option<f64>,
    pub derivation_chain: Vec<ChainStep>,
    /// True when every step verified at this n; small n can fail the
    /// tail steps (the regime only kicks in beyond a constant n(ε)).
    pub all_steps_hold: bool,
}

/// Threshold pair guaranteed hard for the target problem at (n, ε):
/// α ≤ 1-2^{-n^{1/2-ε}} and β ≥ 2^{-n^{1/2-ε}} for the distance problems,
/// g ≤ (ln2/2)(1 - 2^{-(n-3)^{1/2-ε}+1}) for the entropy difference. The
/// derivation chain evaluates each inequality of the underlying argument at
/// the source regime 2^{-n^{1/2-ε/2}}.
pub fn hardness_param_map(n: u32, epsilon: f64, target: HardnessTarget) -> Result<HardnessThresholds> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::OutOfRange {
            quantity: "epsilon",
            value: epsilon,
            range: "(0, 1/2)",
        });
    }
    if n == 0 {
        return Err(Error::OutOfRange {
            quantity: "n",
            value: 0.0,
            range: "n >= 1",
        });
    }
    let thresholds_at = |nn: f64| -> (f64, f64, f64) {
        let s_source = nn.powf(0.5 - epsilon / 2.0);
        let s_final = nn.powf(0.5 - epsilon);
        let delta = 2f64.powf(-s_source);
        (delta, 1.0 - 2f64.powf(-s_final), 2f64.powf(-s_final))
    };

    let qjsp_chain = |nn: f64| -> (Vec<ChainStep>, f64, f64) {
        let (delta, alpha_thr, beta_thr) = thresholds_at(nn);
        let s_source = nn.powf(0.5 - epsilon / 2.0);
        let h2 = binary_entropy_bits(delta / 2.0);
        let sqrt_bound = 2.0 * 2f64.powf(-(s_source + 1.0) / 2.0);
        let steps = vec![
            ChainStep::leq("H2(delta/2) <= 2*sqrt(delta/2)", h2, sqrt_bound),
            ChainStep::leq(
                "yes side: alpha_threshold <= 1 - 2*sqrt(delta/2)",
                alpha_thr,
                1.0 - sqrt_bound,
            ),
            ChainStep::leq("no side: delta <= beta_threshold", delta, beta_thr),
        ];
        (steps, alpha_thr, beta_thr)
    };

    let meas_chain = |nn: f64| -> (Vec<ChainStep>, f64, f64) {
        let (delta, alpha_thr, beta_thr) = thresholds_at(nn);
        let squared = (1.0 - delta) * (1.0 - delta);
        let linear = 1.0 - 2.0 * delta;
        let steps = vec![
            ChainStep::leq("(1-delta)^2 >= 1-2*delta", linear, squared),
            ChainStep::leq(
                "yes side: alpha_threshold <= 1 - 2*delta",
                alpha_thr,
                linear,
            ),
            ChainStep::leq("no side: delta <= beta_threshold", delta, beta_thr),
        ];
        (steps, alpha_thr, beta_thr)
    };

    let (alpha_threshold, beta_threshold, g_threshold, derivation_chain) = match target {
        HardnessTarget::Qjsp => {
            let (steps, a, b) = qjsp_chain(f64::from(n));
            (Some(a), Some(b), None, steps)
        }
        HardnessTarget::MeasQtdp => {
            let (steps, a, b) = meas_chain(f64::from(n));
            (Some(a), Some(b), None, steps)
        }
        HardnessTarget::Qedp => {
            if n < 4 {
                return Err(Error::OutOfRange {
                    quantity: "n",
                    value: f64::from(n),
                    range: "n >= 4 for the entropy-difference map",
                });
            }
            let m = f64::from(n - 3);
            let s_final = m.powf(0.5 - epsilon);
            let g = 0.5 * LN_2 * (1.0 - 2f64.powf(-s_final + 1.0));
            let (mut steps, a, b) = qjsp_chain(m);
            steps.push(ChainStep {
                description: "gap threshold positive".to_string(),
                lhs: 0.0,
                rhs: g,
                holds: g > 0.0,
            });
            let _ = (a, b);
            (None, None, Some(g), steps)
        }
    };
    let all_steps_hold = derivation_chain.iter().all(|s| s.holds);
    Ok(HardnessThresholds {
        target,
        n,
        epsilon,
        alpha_threshold,
        beta_threshold,
        g_threshold,
        derivation_chain,
        all_steps_hold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicationVerdict {
    NotTriggered,
    Satisfied,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsdpQjspVerdicts {
    pub qjs2_bits: f64,
    pub td: f64,
    /// QJS₂ ≥ α² ⇒ td ≥ α² (QJS₂ is dominated by td).
    pub forward: ImplicationVerdict,
    /// QJS₂ ≤ 2ln2·β² ⇒ td ≤ 2ln2·β, from the first-order series bound
    /// QJS₂ ≥ td²/(2ln2).
    pub backward: ImplicationVerdict,
}

/// Evaluate the two promise implications linking a trace-distance promise
/// to a QJS₂ promise on a concrete pair.
pub fn qsdp_to_qjsp_verdict(
    pair: &StatePair,
    alpha: f64,
    beta: f64,
    tol: &ToleranceConfig,
) -> Result<QsdpQjspVerdicts> {
    let qjs2_bits = qjs(pair, tol)?.bits;
    let td = trace_distance(pair, tol)?;
    let slack = 1e-9;
    let forward = if qjs2_bits >= alpha * alpha {
        if td >= alpha * alpha - slack {
            ImplicationVerdict::Satisfied
        } else {
            ImplicationVerdict::Violated
        }
    } else {
        ImplicationVerdict::NotTriggered
    };
    let backward = if qjs2_bits <= 2.0 * LN_2 * beta * beta {
        if td <= 2.0 * LN_2 * beta + slack {
            ImplicationVerdict::Satisfied
        } else {
            ImplicationVerdict::Violated
        }
    } else {
        ImplicationVerdict::NotTriggered
    };
    Ok(QsdpQjspVerdicts {
        qjs2_bits,
        td,
        forward,
        backward,
    })
}
