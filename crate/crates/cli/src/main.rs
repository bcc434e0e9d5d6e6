//! qdivlab: distances, divergences, polarization schedules, reductions, and
//! SWAP-test decision procedures for quantum states, with a seeded
//! Monte-Carlo verification suite.
//!
//! Exit codes: 0 success (verify: all proven inequalities hold), 1 verify
//! found a violation or a fixture failed, 2 input or invariant error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qdivlab_core::divergences::{
    compute_report, qtd_alpha, qtd_equality_conditions, SearchConfig,
};
use qdivlab_core::harness::{
    self, emit_report, ensure_fixtures_pass, RankProfile, ReportFormat, SuiteConfig,
};
use qdivlab_core::polarization::{make_schedule, polarize, ScheduleKind};
use qdivlab_core::reductions::{
    hardness_param_map, qedp_gap_amplify, qjsp_to_qedp, qsdp_to_qjsp_verdict, HardnessTarget,
};
use qdivlab_core::states::{DensityMatrix, StateFile, StatePair};
use qdivlab_core::tolerance::ToleranceConfig;
use qdivlab_core::{algorithms, Error};

#[derive(Parser)]
#[command(name = "qdivlab", version, about = "quantum state distinguishability lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PairArgs {
    /// First state file (JSON: matrix {dim, re, im}, {bloch: [x,y,z]}, or {diag: [...]}).
    #[arg(long = "a")]
    a: PathBuf,
    /// Second state file.
    #[arg(long = "b")]
    b: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// All divergences for one pair plus the inequality verdicts.
    Compute {
        #[command(flatten)]
        pair: PairArgs,
        /// Also evaluate the general family member at this alpha.
        #[arg(long)]
        alpha: Option<f64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a polarization schedule on a pair.
    Polarize {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Largest Hilbert-space dimension to materialize.
        #[arg(long, default_value_t = 4096)]
        cap: usize,
    },
    /// Problem reductions.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// SWAP-test decision procedures.
    #[command(subcommand)]
    Decide(DecideCommand),
    /// Seeded Monte-Carlo inequality suite.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Comma-separated Hilbert-space dimensions.
        #[arg(long, default_value = "2,3,4,8", value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1e-9)]
        slack: f64,
        /// Write a JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write a CSV report here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Reproduce the reference counterexample fixtures.
    Fixtures,
    /// Numerical exploration of the open conjectures (never asserts).
    Conjectures {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10000)]
        trials: usize,
        #[arg(long, default_value = "2", value_delimiter = ',')]
        dims: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Entropy-difference instance from a QJS₂ promise.
    QjspToQedp {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Hardness threshold map at (n, epsilon).
    Params {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum)]
        target: TargetArg,
    },
    /// Gap amplification for an entropy-difference instance.
    AmplifyGap {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        g: f64,
        #[arg(long, default_value_t = 0.5)]
        target: f64,
        #[arg(long, default_value_t = 4096)]
        cap: usize,
    },
    /// Promise implications between trace-distance and QJS₂ thresholds.
    QsdpVerdict {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
}

#[derive(Subcommand)]
enum DecideCommand {
    /// One-sided overlap decision via exact amplitude amplification.
    Nqp {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Hybrid SWAP-test acceptance with its floors.
    Pp {
        #[command(flatten)]
        pair: PairArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Meas,
    Qtd,
}

impl From<KindArg> for ScheduleKind {
    fn from(k: KindArg) -> ScheduleKind {
        match k {
            KindArg::Meas => ScheduleKind::MeasQtd,
            KindArg::Qtd => ScheduleKind::Qtd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Qjsp,
    MeasQtdp,
    Qedp,
}

impl From<TargetArg> for HardnessTarget {
    fn from(t: TargetArg) -> HardnessTarget {
        match t {
            TargetArg::Qjsp => HardnessTarget::Qjsp,
            TargetArg::MeasQtdp => HardnessTarget::MeasQtdp,
            TargetArg::Qedp => HardnessTarget::Qedp,
        }
    }
}

fn load_state(path: &Path, tol: &ToleranceConfig) -> Result<DensityMatrix, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file: StateFile = serde_json::from_slice(&bytes)
        .map_err(|e| format!("{}: invalid state file: {e}", path.display()))?;
    file.load(tol)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn load_pair(args: &PairArgs, tol: &ToleranceConfig) -> Result<StatePair, String> {
    let a = load_state(&args.a, tol)?;
    let b = load_state(&args.b, tol)?;
    StatePair::new(a, b).map_err(|e| e.to_string())
}

fn write_or_print(value: &serde_json::Value, path: Option<&PathBuf>) -> Result<(), String> {
    let bytes = serde_json::to_vec_pretty(value).expect("serializable");
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let tol = ToleranceConfig::default();
    match cli.command {
        Command::Compute { pair, alpha, json } => {
            let pair = load_pair(&pair, &tol)?;
            let report = compute_report(&pair, &SearchConfig::default(), &tol)
                .map_err(|e| e.to_string())?;
            let verdicts = report.inequality_verdicts(1e-9);
            let family = match alpha {
                Some(a) => Some(qtd_alpha(&pair, a, &tol).map_err(|e| e.to_string())?),
                None => None,
            };
            let equality = match qtd_equality_conditions(&pair, 1e-9, &tol) {
                Ok(rep) => json!(rep),
                Err(Error::DegeneratePair { .. }) => json!("degenerate pair"),
                Err(e) => return Err(e.to_string()),
            };
            let all_ok = verdicts.iter().all(|v| v.ok);
            write_or_print(
                &json!({
                    "report": report,
                    "inequalities": verdicts,
                    "qtd_alpha": family,
                    "equality_conditions": equality,
                }),
                json.as_ref(),
            )?;
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Polarize {
            pair,
            alpha,
            beta,
            k,
            kind,
            cap,
        } => {
            let pair = load_pair(&pair, &tol)?;
            let schedule =
                make_schedule(alpha, beta, k, kind.into()).map_err(|e| e.to_string())?;
            let outcome = polarize(&pair, &schedule, cap, &tol).map_err(|e| e.to_string())?;
            write_or_print(
                &json!({
                    "schedule": schedule,
                    "input_value": outcome.input_value,
                    "input_side": outcome.input_side,
                    "certificates": outcome.certificates,
                    "result_mode": outcome.result.mode,
                    "result_dim": outcome.result.pair.as_ref().map(|p| p.dim()),
                    "result_fidelity": outcome.result.fidelity,
                    "result_bures_sq": outcome.result.bures_sq,
                }),
                None,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce(cmd) => run_reduce(cmd, &tol),
        Command::Decide(cmd) => run_decide(cmd, &tol),
        Command::Verify {
            seed,
            trials,
            dims,
            slack,
            json,
            csv,
            threads,
        } => {
            let config = SuiteConfig {
                seed,
                trials_per_dim: trials,
                dims,
                rank_profiles: RankProfile::ALL.to_vec(),
                slack,
                conjecture_mode: false,
            };
            let report =
                harness::run_inequality_suite(&config, threads).map_err(|e| e.to_string())?;
            if let Some(p) = &json {
                fs::write(p, emit_report(&report, ReportFormat::Json).unwrap())
                    .map_err(|e| format!("{}: {e}", p.display()))?;
            }
            if let Some(p) = &csv {
                fs::write(p, emit_report(&report, ReportFormat::Csv).unwrap())
                    .map_err(|e| format!("{}: {e}", p.display()))?;
            }
            if json.is_none() && csv.is_none() {
                print!(
                    "{}",
                    String::from_utf8(emit_report(&report, ReportFormat::Text).unwrap()).unwrap()
                );
            }
            let fixtures_ok = ensure_fixtures_pass(&report.counterexample_fixtures).is_ok();
            Ok(if report.total_violations() == 0 && fixtures_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Fixtures => {
            let fixtures = harness::reproduce_counterexamples(&tol).map_err(|e| e.to_string())?;
            write_or_print(&json!(fixtures), None)?;
            Ok(if ensure_fixtures_pass(&fixtures).is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Conjectures { seed, trials, dims } => {
            let config = SuiteConfig {
                seed,
                trials_per_dim: trials,
                dims,
                rank_profiles: RankProfile::ALL.to_vec(),
                slack: 1e-9,
                conjecture_mode: true,
            };
            let report = harness::conjecture_search(&config, &tol).map_err(|e| e.to_string())?;
            write_or_print(&json!(report), None)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_reduce(cmd: ReduceCommand, tol: &ToleranceConfig) -> Result<ExitCode, String> {
    match cmd {
        ReduceCommand::QjspToQedp {
            pair,
            alpha,
            beta,
            json,
        } => {
            let pair = load_pair(&pair, tol)?;
            let out = qjsp_to_qedp(&pair, alpha, beta, tol).map_err(|e| e.to_string())?;
            write_or_print(
                &json!({
                    "g_nats": out.g,
                    "flag_bias_p": out.p,
                    "identity_residual_bits": out.identity_residual,
                    "output_dim": out.pair_out.dim(),
                    "rho0_out": StateFile::from_density(&out.pair_out.rho0),
                    "rho1_out": StateFile::from_density(&out.pair_out.rho1),
                }),
                json.as_ref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        ReduceCommand::Params { n, epsilon, target } => {
            let out = hardness_param_map(n, epsilon, target.into()).map_err(|e| e.to_string())?;
            write_or_print(&json!(out), None)?;
            Ok(ExitCode::SUCCESS)
        }
        ReduceCommand::AmplifyGap {
            pair,
            g,
            target,
            cap,
        } => {
            let pair = load_pair(&pair, tol)?;
            let out = qedp_gap_amplify(&pair, g, target, cap, tol).map_err(|e| e.to_string())?;
            write_or_print(&json!(out), None)?;
            Ok(ExitCode::SUCCESS)
        }
        ReduceCommand::QsdpVerdict { pair, alpha, beta } => {
            let pair = load_pair(&pair, tol)?;
            let out = qsdp_to_qjsp_verdict(&pair, alpha, beta, tol).map_err(|e| e.to_string())?;
            write_or_print(&json!(out), None)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_decide(cmd: DecideCommand, tol: &ToleranceConfig) -> Result<ExitCode, String> {
    match cmd {
        DecideCommand::Nqp { pair } => {
            let pair = load_pair(&pair, tol)?;
            let decision = algorithms::nqp_decide(&pair).map_err(|e| e.to_string())?;
            // "close" when the overlap is nonzero, "far" on exact rejection;
            // the promise-side naming is left to the caller.
            let label = match decision.verdict {
                algorithms::NqpVerdict::Accept => "close",
                algorithms::NqpVerdict::Reject => "far",
            };
            write_or_print(&json!({ "decision": decision, "label": label }), None)?;
            Ok(ExitCode::SUCCESS)
        }
        DecideCommand::Pp { pair } => {
            let pair = load_pair(&pair, tol)?;
            let out = algorithms::pp_hybrid_accept(&pair, tol).map_err(|e| e.to_string())?;
            let st = algorithms::swap_test_prob(&pair);
            write_or_print(&json!({ "acceptance": out, "swap_test": st }), None)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
