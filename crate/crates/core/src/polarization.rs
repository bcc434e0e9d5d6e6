//! Error reduction and polarization for the triangular-discrimination
//! divergences.
//!
//! Two one-sided reductions alternate:
//!
//! - the XOR construction ρ̃_b = 2^{-l+1} Σ_{b1⊕…⊕bl = b} ρ_{b1}⊗…⊗ρ_{bl},
//!   whose difference and sum factorize as ½(ρ'0-ρ'1)⊗(ρ0-ρ1) and
//!   ½(ρ'0+ρ'1)⊗(ρ0+ρ1); QTD (and the trace distance) are exactly
//!   multiplicative under it, while QTD^meas is only bounded between the
//!   product of the inputs' values and the sandwiched value, since joint
//!   measurements on the parity mixture can beat products of local ones;
//! - plain tensor powers, which drive yes-instances toward 1 at a rate
//!   controlled through the fidelity since F(ρ0^⊗l, ρ1^⊗l) = F(ρ0,ρ1)^l.
//!
//! A schedule (λ, l, m, k) chains XOR(l), tensor power(m), XOR(k). The
//! executor materializes stages while the dimension stays under budget and
//! falls back to fidelity-derived interval certificates beyond it.

use serde::{Deserialize, Serialize};

use crate::divergences::{fidelity_bures, qtd, qtd_meas};
use crate::error::{Error, Result};
use crate::states::{make_density, tensor, StatePair};
use crate::tolerance::ToleranceConfig;

/// Which divergence a schedule polarizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    MeasQtd,
    Qtd,
}

impl ScheduleKind {
    pub fn measure(&self, pair: &StatePair, tol: &ToleranceConfig) -> Result<f64> {
        match self {
            ScheduleKind::MeasQtd => qtd_meas(pair, tol),
            ScheduleKind::Qtd => qtd(pair, tol),
        }
    }
}

/// Per-stage (yes, no) guarantees carried by a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageBound {
    pub yes_bound: f64,
    pub no_bound: f64,
}

/// Deterministic polarization parameters. For `MeasQtd` the regime is
/// α > β with λ = min(α/β, 2), l = ⌈log_λ 8k⌉ and m near λ^l/(4α^l); for
/// `Qtd` the regime is α² > β with λ = min(α²/β, 2), l = ⌈log_λ 16k⌉ and m
/// near λ^l/(8α^{2l}). m is rounded into the integer window that keeps the
/// stage-2 yes requirement m·yes_rate ≥ 2k and the stage-2 no bound ≤ ½.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationSchedule {
    pub kind: ScheduleKind,
    pub alpha: f64,
    pub beta: f64,
    pub k: u32,
    pub lambda: f64,
    pub l: u32,
    pub m: u64,
    pub stage_bounds: [StageBound; 3],
    /// Whether k·e^{-k} ≤ 2^{-k} (or directly (1-e^{-k})^k ≥ 1-2^{-k})
    /// holds, i.e. the final yes bound is implied by the stage-2 bound
    /// alone. True for k = 1 and k ≥ 6.
    pub stage3_tail_ok: bool,
}

pub fn make_schedule(
    alpha: f64,
    beta: f64,
    k: u32,
    kind: ScheduleKind,
) -> Result<PolarizationSchedule> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange {
            quantity: "alpha",
            value: alpha,
            range: "(0, 1]",
        });
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::OutOfRange {
            quantity: "beta",
            value: beta,
            range: "(0, 1]",
        });
    }
    if k == 0 {
        return Err(Error::OutOfRange {
            quantity: "k",
            value: 0.0,
            range: "k >= 1",
        });
    }
    let (ratio, target, divisor) = match kind {
        ScheduleKind::MeasQtd => {
            if alpha <= beta {
                return Err(Error::RegimeViolation {
                    inequality: "alpha > beta",
                    lhs: alpha,
                    rhs: beta,
                });
            }
            (alpha / beta, 8.0 * f64::from(k), 4.0)
        }
        ScheduleKind::Qtd => {
            if alpha * alpha <= beta {
                return Err(Error::RegimeViolation {
                    inequality: "alpha^2 > beta",
                    lhs: alpha * alpha,
                    rhs: beta,
                });
            }
            (alpha * alpha / beta, 16.0 * f64::from(k), 8.0)
        }
    };
    let lambda = ratio.min(2.0);
    let l = (target.ln() / lambda.ln()).ceil() as u32;
    let yes_rate = match kind {
        ScheduleKind::MeasQtd => alpha.powi(l as i32),
        ScheduleKind::Qtd => alpha.powi(2 * l as i32),
    };
    let beta_l = beta.powi(l as i32);
    // The real-valued m = λ^l/(divisor·yes_rate) sits exactly on the
    // stage-2 no-side cap whenever λ = α/β, so blind ceiling would break
    // the cap. Round into the integer window that keeps both stage-2
    // requirements: m·yes_rate ≥ 2k (yes side) and m ≤ no-side cap.
    let m_real = lambda.powi(l as i32) / (divisor * yes_rate);
    let m_min = (2.0 * f64::from(k) / yes_rate).ceil();
    let m_max = match kind {
        ScheduleKind::MeasQtd => (0.25 / beta_l).floor(),
        ScheduleKind::Qtd => (0.125 / beta_l).floor(),
    };
    let m_candidate = m_real.ceil().clamp(m_min, m_max.max(m_min));
    if !(1.0..9.0e15).contains(&m_candidate) || m_min > m_max {
        return Err(Error::RegimeViolation {
            inequality: "integer m with m*yes_rate >= 2k and stage-2 no bound <= 1/2",
            lhs: m_min,
            rhs: m_max,
        });
    }
    let m = m_candidate as u64;

    let stage2_no = match kind {
        ScheduleKind::MeasQtd => 2.0 * m as f64 * beta_l,
        ScheduleKind::Qtd => (2.0 * m as f64).sqrt() * beta_l.sqrt(),
    };
    if stage2_no > 0.5 + 1e-12 {
        return Err(Error::RegimeViolation {
            inequality: "stage-2 no bound <= 1/2",
            lhs: stage2_no,
            rhs: 0.5,
        });
    }
    debug_assert!(m as f64 * yes_rate >= 2.0 * f64::from(k) - 1e-9);

    let kf = f64::from(k);
    let pow2k = 2f64.powf(-kf);
    let stage3_tail_ok =
        kf * (-kf).exp() <= pow2k || (1.0 - (-kf).exp()).powf(kf) >= 1.0 - pow2k;
    Ok(PolarizationSchedule {
        kind,
        alpha,
        beta,
        k,
        lambda,
        l,
        m,
        stage_bounds: [
            StageBound {
                yes_bound: alpha.powi(l as i32),
                no_bound: beta_l,
            },
            StageBound {
                yes_bound: 1.0 - (-kf).exp(),
                no_bound: 0.5,
            },
            StageBound {
                yes_bound: 1.0 - pow2k,
                no_bound: pow2k,
            },
        ],
        stage3_tail_ok,
    })
}

/// XOR (no-instance) reduction: builds the parity-averaged l-fold tensor
/// states through the two-fold rule ρ̃0 = ½(ρ'0⊗ρ0 + ρ'1⊗ρ1),
/// ρ̃1 = ½(ρ'0⊗ρ1 + ρ'1⊗ρ0).
pub fn xor_reduce(
    pair: &StatePair,
    l: u32,
    cap: usize,
    tol: &ToleranceConfig,
) -> Result<StatePair> {
    if l == 0 {
        return Err(Error::OutOfRange {
            quantity: "l",
            value: 0.0,
            range: "l >= 1",
        });
    }
    let d = pair.dim();
    let final_dim = checked_power(d, l)
        .filter(|&dim| dim <= cap)
        .ok_or(Error::DimensionOverflow {
            dim: saturating_power(d, l),
            cap,
        })?;
    if l == 1 {
        return Ok(pair.clone());
    }
    let mut acc0 = pair.rho0.matrix().clone();
    let mut acc1 = pair.rho1.matrix().clone();
    for _ in 1..l {
        let next0 = (crate::linalg::kron(&acc0, pair.rho0.matrix())
            + crate::linalg::kron(&acc1, pair.rho1.matrix()))
            * crate::linalg::cr(0.5);
        let next1 = (crate::linalg::kron(&acc0, pair.rho1.matrix())
            + crate::linalg::kron(&acc1, pair.rho0.matrix()))
            * crate::linalg::cr(0.5);
        acc0 = next0;
        acc1 = next1;
    }
    debug_assert_eq!(acc0.nrows(), final_dim);
    StatePair::new(make_density(&acc0, tol)?, make_density(&acc1, tol)?)
}

fn checked_power(base: usize, exp: u32) -> Option<usize> {
    let mut out: usize = 1;
    for _ in 0..exp {
        out = out.checked_mul(base)?;
    }
    Some(out)
}

fn saturating_power(base: usize, exp: u32) -> usize {
    checked_power(base, exp).unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Materialized,
    Analytic,
}

/// A pair either materialized in full or summarized by its fidelity-derived
/// metrics. Analytic evaluations of tensor powers are exact because the
/// fidelity is multiplicative.
#[derive(Debug, Clone)]
pub struct PairEvaluation {
    pub mode: EvalMode,
    pub pair: Option<StatePair>,
    pub fidelity: Option<f64>,
    pub bures_sq: Option<f64>,
}

/// Tensor-power (yes-instance) reduction. Materialized mode returns
/// (ρ0^⊗l, ρ1^⊗l) with its measured fidelity; analytic mode carries
/// F(ρ0,ρ1)^l and B² = 2(1-F^l) without materializing anything.
pub fn tensor_power_reduce(
    pair: &StatePair,
    l: u32,
    mode: EvalMode,
    cap: usize,
    tol: &ToleranceConfig,
) -> Result<PairEvaluation> {
    if l == 0 {
        return Err(Error::OutOfRange {
            quantity: "l",
            value: 0.0,
            range: "l >= 1",
        });
    }
    match mode {
        EvalMode::Materialized => {
            let d = pair.dim();
            checked_power(d, l)
                .filter(|&dim| dim <= cap)
                .ok_or(Error::DimensionOverflow {
                    dim: saturating_power(d, l),
                    cap,
                })?;
            let mut rho0 = pair.rho0.clone();
            let mut rho1 = pair.rho1.clone();
            for _ in 1..l {
                rho0 = tensor(&rho0, &pair.rho0, cap, tol)?;
                rho1 = tensor(&rho1, &pair.rho1, cap, tol)?;
            }
            let out = StatePair::new(rho0, rho1)?;
            let fb = fidelity_bures(&out, tol)?;
            Ok(PairEvaluation {
                mode,
                pair: Some(out),
                fidelity: Some(fb.fidelity),
                bures_sq: Some(fb.bures_sq),
            })
        }
        EvalMode::Analytic => {
            let f = fidelity_bures(pair, tol)?.fidelity;
            let fl = f.powi(l as i32);
            Ok(PairEvaluation {
                mode,
                pair: None,
                fidelity: Some(fl),
                bures_sq: Some(2.0 * (1.0 - fl)),
            })
        }
    }
}

/// Which side of the promise the input value lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromiseSide {
    Yes,
    No,
    OutsidePromise,
}

/// Value of the polarized divergence after a stage: measured on a
/// materialized pair, pinned exactly by multiplicativity, or bracketed by
/// analytic bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageValue {
    Exact { value: f64, materialized: bool },
    Bounds { lower: f64, upper: f64 },
}

/// Closed interval certificate for a divergence value in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    fn exact(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    /// x ↦ x^k maps [lo, hi] ⊆ [0, 1] monotonically.
    fn powi(self, k: i32) -> Interval {
        Interval {
            lo: self.lo.powi(k),
            hi: self.hi.powi(k),
        }
    }

    fn intersect(self, other: Interval) -> Interval {
        let lo = self.lo.max(other.lo);
        Interval {
            lo,
            hi: self.hi.min(other.hi).max(lo),
        }
    }

    fn to_stage_value(self, materialized: bool) -> StageValue {
        if materialized || self.hi - self.lo <= 1e-12 {
            StageValue::Exact {
                value: self.lo,
                materialized,
            }
        } else {
            StageValue::Bounds {
                lower: self.lo,
                upper: self.hi,
            }
        }
    }
}

/// Certified knowledge about a (possibly unmaterialized) pair along the
/// pipeline: intervals for both discriminations plus the fidelity when it
/// is still analytically tracked.
#[derive(Debug, Clone)]
struct StageState {
    pair: Option<StatePair>,
    meas: Interval,
    qtd: Interval,
    fidelity: Option<f64>,
}

impl StageState {
    /// Exact handles from a materialized pair. With `full_metrics` both
    /// discriminations and the fidelity are measured (needed when a later
    /// stage continues analytically); otherwise only the certificate's own
    /// divergence is computed, which matters at tensor-power dimensions
    /// where every extra eigendecomposition is expensive.
    fn measured(
        pair: StatePair,
        kind: ScheduleKind,
        full_metrics: bool,
        tol: &ToleranceConfig,
    ) -> Result<StageState> {
        let (meas, qtd_v, fidelity) = if full_metrics {
            (
                Interval::exact(qtd_meas(&pair, tol)?),
                Interval::exact(qtd(&pair, tol)?),
                Some(fidelity_bures(&pair, tol)?.fidelity),
            )
        } else {
            let wide = Interval { lo: 0.0, hi: 1.0 };
            match kind {
                ScheduleKind::MeasQtd => {
                    (Interval::exact(qtd_meas(&pair, tol)?), wide, None)
                }
                ScheduleKind::Qtd => (wide, Interval::exact(qtd(&pair, tol)?), None),
            }
        };
        Ok(StageState {
            pair: Some(pair),
            meas,
            qtd: qtd_v,
            fidelity,
        })
    }

    /// XOR with `l` copies without materializing. The sandwiched
    /// discrimination is exactly multiplicative; the measured variant is
    /// only bounded below by the product (optimal product measurements) and
    /// above by the sandwiched value.
    fn xor_analytic(&self, l: i32) -> StageState {
        let qtd_out = self.qtd.powi(l);
        StageState {
            pair: None,
            meas: Interval {
                lo: self.meas.lo.powi(l),
                hi: qtd_out.hi,
            },
            qtd: qtd_out,
            fidelity: if l == 1 { self.fidelity } else { None },
        }
    }

    /// Tensor power with `m` copies without materializing: fidelity
    /// multiplicativity gives two-sided Bures bounds, and the one-sided
    /// reduction lemmas tighten them from the current intervals.
    fn tensor_analytic(&self, m: f64) -> StageState {
        let mut meas = Interval { lo: 0.0, hi: 1.0 };
        let mut qtd_iv = Interval { lo: 0.0, hi: 1.0 };
        if let Some(f1) = self.fidelity {
            let half_b_sq = 1.0 - f1.powf(m);
            meas = meas.intersect(Interval {
                lo: half_b_sq,
                hi: (2.0 * half_b_sq).min(1.0),
            });
            qtd_iv = qtd_iv.intersect(Interval {
                lo: half_b_sq,
                hi: (2.0 * half_b_sq).sqrt().min(1.0),
            });
        }
        meas = meas.intersect(Interval {
            lo: 1.0 - (-m / 2.0 * self.meas.lo).exp(),
            hi: (2.0 * m * self.meas.hi).min(1.0),
        });
        qtd_iv = qtd_iv.intersect(Interval {
            lo: 1.0 - (-m / 2.0 * self.qtd.lo * self.qtd.lo).exp(),
            hi: ((2.0 * m).sqrt() * self.qtd.hi.sqrt()).min(1.0),
        });
        StageState {
            pair: None,
            meas,
            qtd: qtd_iv,
            fidelity: self.fidelity.map(|f| f.powf(m)),
        }
    }

    fn interval_for(&self, kind: ScheduleKind) -> Interval {
        match kind {
            ScheduleKind::MeasQtd => self.meas,
            ScheduleKind::Qtd => self.qtd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageCertificate {
    pub stage: &'static str,
    pub claimed: StageBound,
    pub value: StageValue,
    /// Whether the measured/derived value meets the claimed bound for the
    /// input's promise side; `None` when outside the promise or when the
    /// interval bounds are inconclusive.
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct PolarizationOutcome {
    pub schedule: PolarizationSchedule,
    pub input_value: f64,
    pub input_side: PromiseSide,
    pub certificates: [StageCertificate; 3],
    pub result: PairEvaluation,
}

fn check_side(side: PromiseSide, claimed: &StageBound, value: &StageValue) -> Option<bool> {
    let slack = 1e-9;
    match (side, value) {
        (PromiseSide::OutsidePromise, _) => None,
        (PromiseSide::Yes, StageValue::Exact { value, .. }) => {
            Some(*value >= claimed.yes_bound - slack)
        }
        (PromiseSide::No, StageValue::Exact { value, .. }) => {
            Some(*value <= claimed.no_bound + slack)
        }
        (PromiseSide::Yes, StageValue::Bounds { lower, upper }) => {
            if *lower >= claimed.yes_bound - slack {
                Some(true)
            } else if *upper < claimed.yes_bound - slack {
                Some(false)
            } else {
                None
            }
        }
        (PromiseSide::No, StageValue::Bounds { lower, upper }) => {
            if *upper <= claimed.no_bound + slack {
                Some(true)
            } else if *lower > claimed.no_bound + slack {
                Some(false)
            } else {
                None
            }
        }
    }
}

/// Run the three-stage schedule on a concrete pair, materializing while the
/// dimension stays within `cap` and degrading to analytic interval
/// certificates beyond it. The sandwiched discrimination propagates exactly
/// through unmaterialized XOR stages; the measured variant is carried as a
/// [product lower bound, sandwiched upper bound] interval, since optimal
/// correlated measurements on the parity mixture can beat products of
/// optimal local measurements.
pub fn polarize(
    pair: &StatePair,
    schedule: &PolarizationSchedule,
    cap: usize,
    tol: &ToleranceConfig,
) -> Result<PolarizationOutcome> {
    let kind = schedule.kind;
    let d = pair.dim();
    // Decide materialization for all stages up front so each materialized
    // stage knows whether its successor still needs full analytic handles.
    let fits = |exponent: Option<u128>| -> bool {
        match exponent {
            Some(e) if e <= 32 => checked_power(d, e as u32)
                .map(|dim| dim <= cap)
                .unwrap_or(false),
            _ => false,
        }
    };
    let e1 = Some(schedule.l as u128);
    let e2 = e1.and_then(|e| e.checked_mul(schedule.m as u128));
    let e3 = e2.and_then(|e| e.checked_mul(schedule.k as u128));
    let (mat1, mat2, mat3) = (fits(e1), fits(e2), fits(e3));

    let input_value = kind.measure(pair, tol)?;
    let input_side = if input_value >= schedule.alpha - 1e-9 {
        PromiseSide::Yes
    } else if input_value <= schedule.beta + 1e-9 {
        PromiseSide::No
    } else {
        PromiseSide::OutsidePromise
    };

    // Stage 1: XOR with l copies.
    let stage1 = if mat1 {
        StageState::measured(xor_reduce(pair, schedule.l, cap, tol)?, kind, !mat2, tol)?
    } else {
        StageState::measured(pair.clone(), kind, true, tol)?.xor_analytic(schedule.l as i32)
    };

    // Stage 2: tensor power with m copies.
    let stage2 = if mat2 {
        let mut rho0 = stage1.pair.as_ref().unwrap().rho0.clone();
        let mut rho1 = stage1.pair.as_ref().unwrap().rho1.clone();
        for _ in 1..schedule.m {
            rho0 = tensor(&rho0, &stage1.pair.as_ref().unwrap().rho0, cap, tol)?;
            rho1 = tensor(&rho1, &stage1.pair.as_ref().unwrap().rho1, cap, tol)?;
        }
        StageState::measured(StatePair::new(rho0, rho1)?, kind, !mat3, tol)?
    } else {
        stage1.tensor_analytic(schedule.m as f64)
    };

    // Stage 3: XOR with k copies.
    let stage3 = if mat3 {
        StageState::measured(
            xor_reduce(stage2.pair.as_ref().unwrap(), schedule.k, cap, tol)?,
            kind,
            false,
            tol,
        )?
    } else {
        stage2.xor_analytic(schedule.k as i32)
    };

    let certificate = |stage: &'static str, claimed: StageBound, state: &StageState| {
        let value = state.interval_for(kind).to_stage_value(state.pair.is_some());
        StageCertificate {
            stage,
            claimed,
            value,
            satisfied: check_side(input_side, &claimed, &value),
        }
    };
    let certificates = [
        certificate("xor_l", schedule.stage_bounds[0], &stage1),
        certificate("tensor_m", schedule.stage_bounds[1], &stage2),
        certificate("xor_k", schedule.stage_bounds[2], &stage3),
    ];

    let result = PairEvaluation {
        mode: if stage3.pair.is_some() {
            EvalMode::Materialized
        } else {
            EvalMode::Analytic
        },
        fidelity: stage3.fidelity,
        bures_sq: stage3.fidelity.map(|f| 2.0 * (1.0 - f)),
        pair: stage3.pair,
    };

    Ok(PolarizationOutcome {
        schedule: *schedule,
        input_value,
        input_side,
        certificates,
        result,
    })
}
