//! Command-line front end: parses circuit/state files, runs extraction,
//! analysis, cross-checks, and optimization, and emits JSON reports.
//!
//! Exit codes separate the failure classes so a CI job can tell
//! implementation bugs from bad inputs: 0 on success, 2 on schema or
//! validation errors in the inputs, 3 when a computed quantity violates an
//! invariant the theory guarantees (a completeness residual, the rank bound,
//! or the qubit success ceiling).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use linoptic::io::{
    AnalyzeReport, BellRunReport, CircuitFile, ComposeReport, CrosscheckReport, OptimizeFile,
    OptimizeReport, PovmReport, SingleQuditReport, StateFile, ToolInfo,
};
use linoptic::optimize::SUCCESS_CAP_TOL;
use linoptic::state::Statistics;
use linoptic::Error;

#[derive(Parser)]
#[command(
    name = "linoptic",
    version,
    about = "Two-qudit measurements from linear mode transformations and particle detectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Residual threshold for the invariant checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Compose a circuit file into its n-mode unitary.
    Compose { circuit: PathBuf },
    /// Extract the two-qudit measurement a circuit induces.
    Povm {
        circuit: PathBuf,
        /// Local dimension of each qudit.
        #[arg(long)]
        d: usize,
        #[arg(long)]
        statistics: StatisticsArg,
    },
    /// Classify each element's entanglement and sum the success weights.
    Analyze {
        circuit: PathBuf,
        /// Local dimension of each qudit.
        #[arg(long)]
        d: usize,
        #[arg(long)]
        statistics: StatisticsArg,
    },
    /// Tabulate which generalized Bell states a circuit identifies.
    Bell {
        circuit: PathBuf,
        /// Local dimension of each qudit.
        #[arg(long)]
        d: usize,
        #[arg(long)]
        statistics: StatisticsArg,
    },
    /// Compare click probabilities against the Fock-space oracle.
    Crosscheck {
        circuit: PathBuf,
        state: PathBuf,
        /// Must match the statistics recorded in the state file when given.
        #[arg(long)]
        statistics: Option<StatisticsArg>,
    },
    /// Search mode unitaries for the largest maximally entangled success.
    Optimize {
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Read a rank-one single-qudit measurement off a mode unitary.
    SingleQudit {
        circuit: PathBuf,
        /// Dimension of the measured qudit (first d input modes).
        #[arg(long)]
        d: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatisticsArg {
    Boson,
    Fermion,
}

impl From<StatisticsArg> for Statistics {
    fn from(arg: StatisticsArg) -> Self {
        match arg {
            StatisticsArg::Boson => Statistics::Bosonic,
            StatisticsArg::Fermion => Statistics::Fermionic,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn violation(message: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) | Error::NotAPovm { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn tool() -> ToolInfo {
    ToolInfo::new("linoptic", env!("CARGO_PKG_VERSION"))
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{what} file {}: {e}", path.display())))
}

fn write_report<T: Serialize>(report: &T, output: Option<&Path>) -> Result<(), Failure> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| input(format!("cannot serialize report: {e}")))?;
    json.push('\n');
    match output {
        Some(path) => fs::write(path, json)
            .map_err(|e| input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn check_completeness(residual: f64, tolerance: f64) -> Result<(), Failure> {
    if residual > tolerance {
        return Err(violation(format!(
            "completeness residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
        )));
    }
    Ok(())
}

/// Every nonzero element must have at most two significant singular values.
fn check_rank(
    singular_values: &[f64],
    pattern: (usize, usize),
    tolerance: f64,
) -> Result<(), Failure> {
    if singular_values.len() > 2 && singular_values[2] > tolerance * singular_values[0] {
        return Err(violation(format!(
            "element ({}, {}) has third singular value {:.3e}, above {tolerance:.1e} x sigma_1",
            pattern.0, pattern.1, singular_values[2]
        )));
    }
    Ok(())
}

fn check_qubit_ceiling(d: usize, success: f64) -> Result<(), Failure> {
    if d == 2 && success > 0.5 + SUCCESS_CAP_TOL {
        return Err(violation(format!(
            "qubit success probability {success:.12} exceeds the 1/2 ceiling"
        )));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let output = cli.output.as_deref();
    let tolerance = cli.tolerance;
    match &cli.command {
        Command::Compose { circuit } => {
            let file: CircuitFile = read_json(circuit, "circuit")?;
            let report = ComposeReport::build(tool(), &file)?;
            write_report(&report, output)
        }
        Command::Povm {
            circuit,
            d,
            statistics,
        } => {
            let file: CircuitFile = read_json(circuit, "circuit")?;
            let u = file.build()?;
            let report = PovmReport::build(tool(), &u, *d, (*statistics).into())?;
            check_completeness(report.completeness_residual, tolerance)?;
            for element in report.elements.iter().filter(|e| !e.is_null) {
                check_rank(&element.singular_values, element.pattern, tolerance)?;
            }
            write_report(&report, output)
        }
        Command::Analyze {
            circuit,
            d,
            statistics,
        } => {
            let file: CircuitFile = read_json(circuit, "circuit")?;
            let u = file.build()?;
            let report = AnalyzeReport::build(tool(), &u, *d, (*statistics).into())?;
            check_completeness(report.completeness_residual, tolerance)?;
            for element in report.elements.iter().filter(|e| !e.is_null) {
                if element.numerical_rank > 2 {
                    return Err(violation(format!(
                        "element ({}, {}) has numerical rank {}",
                        element.pattern.0, element.pattern.1, element.numerical_rank
                    )));
                }
            }
            check_qubit_ceiling(*d, report.me_success_probability)?;
            write_report(&report, output)
        }
        Command::Bell {
            circuit,
            d,
            statistics,
        } => {
            let file: CircuitFile = read_json(circuit, "circuit")?;
            let u = file.build()?;
            let report = BellRunReport::build(tool(), &u, *d, (*statistics).into())?;
            check_qubit_ceiling(*d, report.report.success_maximally_mixed)?;
            write_report(&report, output)
        }
        Command::Crosscheck {
            circuit,
            state,
            statistics,
        } => {
            let circuit_file: CircuitFile = read_json(circuit, "circuit")?;
            let state_file: StateFile = read_json(state, "state")?;
            if let Some(flag) = statistics {
                let flag: Statistics = (*flag).into();
                if flag != state_file.statistics {
                    return Err(input(format!(
                        "--statistics {flag} contradicts the state file's \"statistics\" field ({})",
                        state_file.statistics
                    )));
                }
            }
            let u = circuit_file.build()?;
            let st = state_file.build()?;
            let report = CrosscheckReport::build(tool(), &u, &st, tolerance)?;
            if !report.within_tolerance {
                return Err(violation(format!(
                    "oracle deviation {:.3e} exceeds tolerance {tolerance:.3e}",
                    report.max_deviation
                )));
            }
            write_report(&report, output)
        }
        Command::Optimize { config, seed } => {
            let file: OptimizeFile = read_json(config, "optimizer config")?;
            let resolved = file.resolve(*seed)?;
            let report = OptimizeReport::build(tool(), resolved)?;
            if report.qubit_bound_satisfied == Some(false) {
                return Err(violation(format!(
                    "qubit success probability {:.12} exceeds the 1/2 ceiling",
                    report.result.best_hard_success
                )));
            }
            write_report(&report, output)
        }
        Command::SingleQudit { circuit, d } => {
            let file: CircuitFile = read_json(circuit, "circuit")?;
            let u = file.build()?;
            let report = SingleQuditReport::build(tool(), &u, *d)?;
            check_completeness(report.completeness_residual, tolerance)?;
            write_report(&report, output)
        }
    }
}
