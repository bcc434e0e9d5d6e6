//! Seeded Monte-Carlo verification: the inequality grid over random state
//! pairs, reproduction of the reference counterexamples, and numerical
//! exploration of the open conjectures.
//!
//! Per-trial seeds derive from hash(seed, dim, profile, trial), and report
//! aggregation is associative and commutative with deterministic
//! tie-breaking, so identical configurations produce byte-identical reports
//! at any thread count.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::divergences::{
    self, classical_divergences_unchecked, compute_report, qtd_alpha, qtd_equality_conditions,
    qtd_meas, trace_distance, InequalityVerdict, SearchConfig,
};
use crate::error::{Error, Result};
use crate::linalg::{mix_seed, seeded_rng};
use crate::states::{from_bloch, random_mixed, StatePair};
use crate::tolerance::ToleranceConfig;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankProfile {
    Full,
    Deficient,
    Pure,
}

impl RankProfile {
    pub const ALL: [RankProfile; 3] = [RankProfile::Full, RankProfile::Deficient, RankProfile::Pure];

    fn rank(&self, dim: usize) -> usize {
        match self {
            RankProfile::Full => dim,
            RankProfile::Deficient => (dim - 1).max(1),
            RankProfile::Pure => 1,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            RankProfile::Full => "full",
            RankProfile::Deficient => "deficient",
            RankProfile::Pure => "pure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials_per_dim: usize,
    pub dims: Vec<usize>,
    pub rank_profiles: Vec<RankProfile>,
    pub slack: f64,
    pub conjecture_mode: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 1,
            trials_per_dim: 1000,
            dims: vec![2, 3, 4, 8],
            rank_profiles: RankProfile::ALL.to_vec(),
            slack: 1e-9,
            conjecture_mode: false,
        }
    }
}

impl SuiteConfig {
    fn validate(&self) -> Result<()> {
        if self.trials_per_dim == 0 {
            return Err(Error::OutOfRange {
                quantity: "trials_per_dim",
                value: 0.0,
                range: ">= 1",
            });
        }
        if self.slack < 0.0 {
            return Err(Error::OutOfRange {
                quantity: "slack",
                value: self.slack,
                range: ">= 0",
            });
        }
        Ok(())
    }
}

/// Random pair for one trial. Qubit pairs alternate between Ginibre draws
/// and Bloch-ball parameterizations so the boundary (pure) states exercise
/// the support-restricted formulas.
pub fn trial_pair(
    dim: usize,
    profile: RankProfile,
    trial_seed: u64,
    tol: &ToleranceConfig,
) -> Result<StatePair> {
    if dim == 2 && trial_seed % 2 == 1 {
        let mut rng = seeded_rng(trial_seed);
        let mut draw = |surface: bool| -> Result<crate::states::DensityMatrix> {
            let mut v = [0.0f64; 3];
            loop {
                for x in v.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if norm > 1e-12 {
                    let radius = if surface {
                        1.0
                    } else {
                        rng.gen_range(0.0f64..1.0).powf(1.0 / 3.0)
                    };
                    for x in v.iter_mut() {
                        *x *= radius / norm;
                    }
                    return from_bloch(v, tol);
                }
            }
        };
        let surface = profile != RankProfile::Full;
        return StatePair::new(draw(surface)?, draw(surface)?);
    }
    let rank = profile.rank(dim);
    StatePair::new(
        random_mixed(dim, rank, mix_seed(&[trial_seed, 0]), tol)?,
        random_mixed(dim, rank, mix_seed(&[trial_seed, 1]), tol)?,
    )
}

/// Aggregate over trials for one (inequality, dim, profile) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IneqAggregate {
    pub checked: u64,
    pub violations: u64,
    pub worst_margin: f64,
    pub worst_seed: u64,
}

impl IneqAggregate {
    fn absorb(&mut self, margin: f64, ok: bool, seed: u64) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
        }
        if margin < self.worst_margin || (margin == self.worst_margin && seed < self.worst_seed) {
            self.worst_margin = margin;
            self.worst_seed = seed;
        }
    }

    fn merge(&mut self, other: &IneqAggregate) {
        self.checked += other.checked;
        self.violations += other.violations;
        if other.worst_margin < self.worst_margin
            || (other.worst_margin == self.worst_margin && other.worst_seed < self.worst_seed)
        {
            self.worst_margin = other.worst_margin;
            self.worst_seed = other.worst_seed;
        }
    }

    fn empty() -> IneqAggregate {
        IneqAggregate {
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_seed: u64::MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub inequality: String,
    pub dim: usize,
    pub profile: RankProfile,
    #[serde(flatten)]
    pub aggregate: IneqAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureResult {
    pub name: String,
    pub relation: String,
    pub pass: bool,
    pub details: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedExtreme {
    pub value: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub trials: usize,
    /// min over trials of QJS₂ - QTD²; conjectured nonnegative, saturated
    /// (both sides 1) on orthogonal supports.
    pub qjs2_minus_qtd_sq_min: ObservedExtreme,
    /// min over random triples of √QTD(ρ0,ρ1) + √QTD(ρ1,ρ2) - √QTD(ρ0,ρ2);
    /// conjectured nonnegative (√QTD a metric).
    pub sqrt_qtd_triangle_min: ObservedExtreme,
    /// Never true: these are open conjectures, observed only.
    pub proven: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub config: SuiteConfig,
    pub rows: Vec<AggregateRow>,
    pub counterexample_fixtures: Vec<FixtureResult>,
    pub conjecture_observations: Option<ConjectureReport>,
}

impl SuiteReport {
    pub fn total_violations(&self) -> u64 {
        self.rows.iter().map(|r| r.aggregate.violations).sum()
    }
}

type CellKey = (String, usize, RankProfile);

fn trial_verdicts(
    pair: &StatePair,
    slack: f64,
    trial_seed: u64,
    tol: &ToleranceConfig,
) -> Result<Vec<InequalityVerdict>> {
    let search = SearchConfig {
        restarts: 2,
        refine_steps: 0,
        seed: mix_seed(&[trial_seed, 0x5ea2c4]),
    };
    let report = compute_report(pair, &search, tol)?;
    let mut verdicts = report.inequality_verdicts(slack);
    for alpha in [0.6, 0.75, 0.9] {
        let value = qtd_alpha(pair, alpha, tol)?;
        verdicts.push(InequalityVerdict::new(
            &format!("qtd_half <= qtd_alpha_{alpha}"),
            report.qtd,
            value,
            slack,
        ));
    }
    // Classical chains on the diagonal distributions induced by the
    // computational-basis measurement.
    let diag = |rho: &crate::states::DensityMatrix| -> Vec<f64> {
        (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect()
    };
    let classical = classical_divergences_unchecked(&diag(&pair.rho0), &diag(&pair.rho1));
    verdicts.push(InequalityVerdict::new(
        "classical sd_sq <= td",
        classical.sd * classical.sd,
        classical.tdc,
        slack,
    ));
    verdicts.push(InequalityVerdict::new(
        "classical td <= sd",
        classical.tdc,
        classical.sd,
        slack,
    ));
    verdicts.push(InequalityVerdict::new(
        "classical h_sq <= td",
        classical.hellinger_sq,
        classical.tdc,
        slack,
    ));
    verdicts.push(InequalityVerdict::new(
        "classical td <= 2 h_sq",
        classical.tdc,
        2.0 * classical.hellinger_sq,
        slack,
    ));
    Ok(verdicts)
}

fn run_cells(
    config: &SuiteConfig,
    jobs: &[(usize, RankProfile, usize)],
    tol: &ToleranceConfig,
) -> Result<BTreeMap<CellKey, IneqAggregate>> {
    let mut cells: BTreeMap<CellKey, IneqAggregate> = BTreeMap::new();
    for &(dim, profile, trial) in jobs {
        let trial_seed = mix_seed(&[
            config.seed,
            dim as u64,
            profile as u64,
            trial as u64,
        ]);
        let pair = trial_pair(dim, profile, trial_seed, tol)?;
        for verdict in trial_verdicts(&pair, config.slack, trial_seed, tol)? {
            cells
                .entry((verdict.name.clone(), dim, profile))
                .or_insert_with(IneqAggregate::empty)
                .absorb(verdict.margin, verdict.ok, trial_seed);
        }
    }
    Ok(cells)
}

/// Evaluate the proven inequality grid over seeded random pairs. Violations
/// are report content, not errors.
pub fn run_inequality_suite(config: &SuiteConfig, threads: usize) -> Result<SuiteReport> {
    run_inequality_suite_with(config, threads, &ToleranceConfig::default())
}

pub fn run_inequality_suite_with(
    config: &SuiteConfig,
    threads: usize,
    tol: &ToleranceConfig,
) -> Result<SuiteReport> {
    config.validate()?;
    let mut jobs = Vec::new();
    for &dim in &config.dims {
        for &profile in &config.rank_profiles {
            for trial in 0..config.trials_per_dim {
                jobs.push((dim, profile, trial));
            }
        }
    }

    let threads = threads.max(1).min(jobs.len().max(1));
    let chunk = jobs.len().div_ceil(threads);
    let partials: Vec<Result<BTreeMap<CellKey, IneqAggregate>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk.max(1))
            .map(|slice| scope.spawn(move || run_cells(config, slice, tol)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut cells: BTreeMap<CellKey, IneqAggregate> = BTreeMap::new();
    for partial in partials {
        for (key, agg) in partial? {
            cells
                .entry(key)
                .or_insert_with(IneqAggregate::empty)
                .merge(&agg);
        }
    }

    let rows = cells
        .into_iter()
        .map(|((inequality, dim, profile), aggregate)| AggregateRow {
            inequality,
            dim,
            profile,
            aggregate,
        })
        .collect();
    Ok(SuiteReport {
        schema_version: 1,
        config: config.clone(),
        rows,
        counterexample_fixtures: reproduce_counterexamples(tol)?,
        conjecture_observations: if config.conjecture_mode {
            Some(conjecture_search(config, tol)?)
        } else {
            None
        },
    })
}

fn fixture(name: &str, relation: &str, pass: bool, details: String) -> FixtureResult {
    FixtureResult {
        name: name.to_string(),
        relation: relation.to_string(),
        pass,
        details,
    }
}

/// Reproduce the reference counterexamples: the pure qubit pair on which
/// the α = ½ family member saturates the trace distance while larger α
/// overshoot it, the Bures-distance separation of the measured and
/// sandwiched discriminations on the same pair, and the antipodal Bloch
/// pairs whose trace distances interleave as td > td' > td².
pub fn reproduce_counterexamples(tol: &ToleranceConfig) -> Result<Vec<FixtureResult>> {
    let mut out = Vec::new();

    let saturating_pair = StatePair::new(
        from_bloch([6.0 / 7.0, 3.0 / 7.0, 2.0 / 7.0], tol)?,
        from_bloch([-3.0 / 7.0, -2.0 / 7.0, 6.0 / 7.0], tol)?,
    )?;
    let td = trace_distance(&saturating_pair, tol)?;
    let at_half = qtd_alpha(&saturating_pair, 0.5, tol)?;
    let at_three_quarters = qtd_alpha(&saturating_pair, 0.75, tol)?;
    let eq = qtd_equality_conditions(&saturating_pair, 1e-9, tol)?;
    out.push(fixture(
        "pure_pair_alpha_half_saturation",
        "qtd_alpha(1/2) = td, equality conditions hold, qtd_alpha(3/4) > td",
        (at_half - td).abs() <= 1e-9 && eq.overall && at_three_quarters > td,
        format!("td={td:.12} qtd_half={at_half:.12} qtd_0.75={at_three_quarters:.12} conds={eq:?}"),
    ));

    let fb = divergences::fidelity_bures(&saturating_pair, tol)?;
    let meas = qtd_meas(&saturating_pair, tol)?;
    let bures = fb.bures_sq.max(0.0).sqrt();
    out.push(fixture(
        "bures_separates_discriminations",
        "qtd_meas <= B^2 < qtd_alpha(1/2) = td < B",
        meas <= fb.bures_sq + 1e-9
            && fb.bures_sq < at_half - 1e-6
            && (at_half - td).abs() <= 1e-9
            && td < bures - 1e-6,
        format!("qtd_meas={meas:.12} B2={:.12} td={td:.12} B={bures:.12}", fb.bures_sq),
    ));

    let first = StatePair::new(
        from_bloch([1.0 / 7.0, 1.0 / 3.0, 1.0 / 4.0], tol)?,
        from_bloch([-1.0 / 7.0, -1.0 / 3.0, -1.0 / 4.0], tol)?,
    )?;
    let second = StatePair::new(
        from_bloch([-1.0 / 7.0, -1.0 / 5.0, -1.0 / 6.0], tol)?,
        from_bloch([1.0 / 7.0, 1.0 / 5.0, -1.0 / 6.0], tol)?,
    )?;
    let td1 = trace_distance(&first, tol)?;
    let td2 = trace_distance(&second, tol)?;
    let expect_td1 = 37.0 / 84.0;
    let expect_td2 = (1.0f64 / 49.0 + 1.0 / 25.0).sqrt();
    let ordering_ok = td1 > td2 && td2 > td1 * td1;
    let values_ok = (td1 - expect_td1).abs() <= 1e-12 && (td2 - expect_td2).abs() <= 1e-12;
    out.push(fixture(
        "antipodal_bloch_interleaving",
        "td > td' > td^2 with td=0.4405, td'=0.2458",
        ordering_ok && values_ok,
        format!("td={td1:.12} td'={td2:.12} td^2={:.12}", td1 * td1),
    ));

    let meas1 = qtd_meas(&first, tol)?;
    let meas2 = qtd_meas(&second, tol)?;
    out.push(fixture(
        "antipodal_bloch_measured_ordering",
        "qtd_meas > qtd_meas'",
        meas1 > meas2,
        format!("qtd_meas={meas1:.12} qtd_meas'={meas2:.12}"),
    ));

    // Regression witness: |A ⊗ B| = |A| ⊗ |B| forces td(ρ̃) = td^l for the
    // XOR construction, so the recorded gap must stay at rounding level.
    let mut worst_td_gap = 0.0f64;
    for seed in 0..20u64 {
        let pair = trial_pair(2, RankProfile::Full, mix_seed(&[0x7d, seed]), tol)?;
        let td = trace_distance(&pair, tol)?;
        let out_pair = crate::polarization::xor_reduce(&pair, 2, 4096, tol)?;
        worst_td_gap = worst_td_gap.max((trace_distance(&out_pair, tol)? - td * td).abs());
    }
    out.push(fixture(
        "xor_trace_distance_regression_witness",
        "td(xor output) = td^l to rounding",
        worst_td_gap <= 1e-12,
        format!("worst |td(out) - td^2| = {worst_td_gap:.3e} over 20 seeded pairs"),
    ));

    Ok(out)
}

/// Fail with `FixtureFailure` on the first fixture whose relation does not
/// hold.
pub fn ensure_fixtures_pass(fixtures: &[FixtureResult]) -> Result<()> {
    for f in fixtures {
        if !f.pass {
            return Err(Error::FixtureFailure {
                name: f.name.clone(),
                relation: f.relation.clone(),
                values: f.details.clone(),
            });
        }
    }
    Ok(())
}

/// Record the most violating candidates for the two open conjectures
/// (QTD² ≤ QJS₂ and the triangle inequality for √QTD) without asserting
/// either.
pub fn conjecture_search(config: &SuiteConfig, tol: &ToleranceConfig) -> Result<ConjectureReport> {
    config.validate()?;
    let mut gap_min = ObservedExtreme {
        value: f64::INFINITY,
        seed: 0,
    };
    let mut triangle_min = ObservedExtreme {
        value: f64::INFINITY,
        seed: 0,
    };
    for &dim in &config.dims {
        for trial in 0..config.trials_per_dim {
            let seed = mix_seed(&[config.seed, 0xc0, dim as u64, trial as u64]);
            let pair = trial_pair(dim, RankProfile::Full, seed, tol)?;
            let qjs2 = divergences::qjs(&pair, tol)?.bits;
            let qtd = divergences::qtd(&pair, tol)?;
            let gap = qjs2 - qtd * qtd;
            if gap < gap_min.value {
                gap_min = ObservedExtreme { value: gap, seed };
            }

            let third = random_mixed(dim, dim, mix_seed(&[seed, 2]), tol)?;
            let q01 = qtd.max(0.0).sqrt();
            let q12 = divergences::qtd(&StatePair::new(pair.rho1.clone(), third.clone())?, tol)?
                .max(0.0)
                .sqrt();
            let q02 = divergences::qtd(&StatePair::new(pair.rho0.clone(), third)?, tol)?
                .max(0.0)
                .sqrt();
            let slackness = q01 + q12 - q02;
            if slackness < triangle_min.value {
                triangle_min = ObservedExtreme {
                    value: slackness,
                    seed,
                };
            }
        }
    }
    Ok(ConjectureReport {
        trials: config.trials_per_dim * config.dims.len(),
        qjs2_minus_qtd_sq_min: gap_min,
        sqrt_qtd_triangle_min: triangle_min,
        proven: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::UnsupportedFormat {
                format: other.to_string(),
            }),
        }
    }
}

/// Deterministic serialization of a suite report.
pub fn emit_report(report: &SuiteReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).expect("report serializes");
            bytes.push(b'\n');
            Ok(bytes)
        }
        ReportFormat::Csv => {
            let mut out = String::from("inequality,dim,profile,checked,violations,worst_margin,worst_seed\n");
            for row in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    row.inequality.replace(',', ";"),
                    row.dim,
                    row.profile.label(),
                    row.aggregate.checked,
                    row.aggregate.violations,
                    row.aggregate.worst_margin,
                    row.aggregate.worst_seed,
                ));
            }
            Ok(out.into_bytes())
        }
        ReportFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "inequality suite: seed {} trials {} dims {:?} slack {}\n",
                report.config.seed,
                report.config.trials_per_dim,
                report.config.dims,
                report.config.slack
            ));
            let total: u64 = report.rows.iter().map(|r| r.aggregate.checked).sum();
            out.push_str(&format!(
                "checked {} inequality instances, {} violations\n",
                total,
                report.total_violations()
            ));
            for row in &report.rows {
                if row.aggregate.violations > 0 {
                    out.push_str(&format!(
                        "VIOLATION {} dim {} {}: {} of {} (worst margin {} at seed {})\n",
                        row.inequality,
                        row.dim,
                        row.profile.label(),
                        row.aggregate.violations,
                        row.aggregate.checked,
                        row.aggregate.worst_margin,
                        row.aggregate.worst_seed
                    ));
                }
            }
            for f in &report.counterexample_fixtures {
                out.push_str(&format!(
                    "fixture {}: {} ({})\n",
                    f.name,
                    if f.pass { "pass" } else { "FAIL" },
                    f.relation
                ));
            }
            if let Some(c) = &report.conjecture_observations {
                out.push_str(&format!(
                    "conjectures over {} trials: min(QJS2 - QTD^2) = {} (seed {}), min sqrt-QTD triangle slack = {} (seed {})\n",
                    c.trials,
                    c.qjs2_minus_qtd_sq_min.value,
                    c.qjs2_minus_qtd_sq_min.seed,
                    c.sqrt_qtd_triangle_min.value,
                    c.sqrt_qtd_triangle_min.seed
                ));
            }
            Ok(out.into_bytes())
        }
    }
}
