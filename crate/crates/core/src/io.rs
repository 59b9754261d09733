//! JSON schemas for the on-disk inputs (circuits, states, optimizer configs)
//! and the report types the command-line front end emits.
//!
//! Complex numbers serialize as `{"re": ..., "im": ...}` objects and matrices
//! as arrays of rows, so reports stay diff-able and parse trivially from any
//! language. Every report embeds the emitting tool's name and version plus
//! the fully resolved configuration, and every report re-parses under the
//! same types that wrote it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entangle::{
    bell_discrimination, detector_contributions, is_maximally_entangled, schmidt, BellReport,
    DetectorContribution, MEClassification, ME_REL_TOL, RANK_REL_TOL,
};
use crate::mode::{
    compose_circuit, max_abs, validate_unitary, CircuitElement, ModeUnitary, OpticalCircuit,
};
use crate::optimize::{optimize, OptimizationResult, OptimizerConfig, SUCCESS_CAP_TOL};
use crate::povm::{completeness_check, oracle_crosscheck, povm_elements, single_qudit_povm};
use crate::state::{bell_state, Statistics, TwoQuditState};
use crate::{CMat, Error};

/// One complex entry of a JSON matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexEntry {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexEntry> for Complex64 {
    fn from(e: ComplexEntry) -> Self {
        Self::new(e.re, e.im)
    }
}

/// Serializes a matrix as an array of rows.
pub fn matrix_to_rows(m: &CMat) -> Vec<Vec<ComplexEntry>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].into()).collect())
        .collect()
}

/// Parses an array of rows back into a matrix, requiring a nonempty
/// rectangular layout.
pub fn rows_to_matrix(rows: &[Vec<ComplexEntry>]) -> Result<CMat, Error> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if nrows == 0 || ncols == 0 {
        return Err(Error::Input("matrix must be nonempty".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Input("matrix rows have unequal lengths".into()));
    }
    Ok(CMat::from_fn(nrows, ncols, |r, c| rows[r][c].into()))
}

/// Identity of the binary that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn new(name: &str, version: &str) -> Self {
        Self {
            name: name.into(),
            version: version.into(),
        }
    }
}

/// On-disk interferometer description: either an element list to compose or
/// a raw unitary matrix, never both.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<CircuitElement>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<Vec<Vec<ComplexEntry>>>,
}

impl CircuitFile {
    pub fn from_circuit(circuit: &OpticalCircuit) -> Self {
        Self {
            n: circuit.n,
            elements: Some(circuit.elements.clone()),
            unitary: None,
        }
    }

    pub fn from_unitary(u: &ModeUnitary) -> Self {
        Self {
            n: u.n(),
            elements: None,
            unitary: Some(matrix_to_rows(u.matrix())),
        }
    }

    /// Validates and builds the mode unitary this file describes.
    pub fn build(&self) -> Result<ModeUnitary, Error> {
        match (&self.elements, &self.unitary) {
            (Some(_), Some(_)) => Err(Error::Input(
                "circuit file sets both \"elements\" and \"unitary\"; choose one".into(),
            )),
            (None, None) => Err(Error::Input(
                "circuit file needs either \"elements\" or \"unitary\"".into(),
            )),
            (Some(elements), None) => compose_circuit(&OpticalCircuit {
                n: self.n,
                elements: elements.clone(),
            }),
            (None, Some(rows)) => {
                let m = rows_to_matrix(rows)?;
                if m.nrows() != self.n || m.ncols() != self.n {
                    return Err(Error::Input(format!(
                        "\"unitary\" is {}x{} but \"n\" is {}",
                        m.nrows(),
                        m.ncols(),
                        self.n
                    )));
                }
                ModeUnitary::new(m)
            }
        }
    }
}

/// On-disk two-qudit state: either the full coefficient matrix `c` or a
/// generalized Bell-state shortcut `bell = [m, k]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub d: usize,
    pub statistics: Statistics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<ComplexEntry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell: Option<[usize; 2]>,
}

impl StateFile {
    pub fn from_state(state: &TwoQuditState) -> Self {
        Self {
            d: state.d(),
            statistics: state.statistics(),
            c: Some(matrix_to_rows(state.coefficients())),
            bell: None,
        }
    }

    /// Validates and builds the normalized state this file describes.
    pub fn build(&self) -> Result<TwoQuditState, Error> {
        match (&self.c, &self.bell) {
            (Some(_), Some(_)) => Err(Error::Input(
                "state file sets both \"c\" and \"bell\"; choose one".into(),
            )),
            (None, None) => Err(Error::Input(
                "state file needs either \"c\" or \"bell\"".into(),
            )),
            (Some(rows), None) => {
                let c = rows_to_matrix(rows)?;
                if c.nrows() != self.d || c.ncols() != self.d {
                    return Err(Error::Input(format!(
                        "\"c\" is {}x{} but \"d\" is {}",
                        c.nrows(),
                        c.ncols(),
                        self.d
                    )));
                }
                TwoQuditState::new(c, self.statistics)
            }
            (None, Some([m, k])) => bell_state(self.d, *m, *k, self.statistics),
        }
    }
}

fn default_simplex_tolerance() -> f64 {
    1e-16
}

/// On-disk optimizer settings. The seed may come from the file or from the
/// command line, but one of the two must be present: runs are reproducible
/// by construction, never wall-clock seeded.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeFile {
    pub n: usize,
    pub d: usize,
    pub statistics: Statistics,
    pub restarts: usize,
    pub max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_simplex_tolerance")]
    pub tolerance: f64,
}

impl OptimizeFile {
    /// Resolves the final configuration; an explicit command-line seed wins
    /// over the file.
    pub fn resolve(&self, seed_flag: Option<u64>) -> Result<OptimizerConfig, Error> {
        let seed = seed_flag.or(self.seed).ok_or_else(|| {
            Error::Input("\"seed\" missing: set it in the config file or pass --seed".into())
        })?;
        Ok(OptimizerConfig {
            n: self.n,
            d: self.d,
            statistics: self.statistics,
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            seed,
            tolerance: self.tolerance,
        })
    }
}

/// Report from `compose`: the circuit's composed unitary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComposeReport {
    pub tool: ToolInfo,
    pub n: usize,
    pub element_count: usize,
    pub unitary: Vec<Vec<ComplexEntry>>,
    /// `max |U U^dag - I|` of the composed matrix.
    pub unitarity_residual: f64,
}

impl ComposeReport {
    pub fn build(tool: ToolInfo, file: &CircuitFile) -> Result<Self, Error> {
        let u = file.build()?;
        let unitarity_residual = validate_unitary(u.matrix())?;
        Ok(Self {
            tool,
            n: u.n(),
            element_count: file.elements.as_ref().map_or(0, |e| e.len()),
            unitary: matrix_to_rows(u.matrix()),
            unitarity_residual,
        })
    }
}

/// One extracted element in a `povm` report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementReport {
    /// Click pattern, 1-based output modes `(i, j)` with `i <= j`.
    pub pattern: (usize, usize),
    /// `<P|P>`, the outcome weight.
    pub weight: f64,
    pub is_null: bool,
    pub singular_values: Vec<f64>,
    pub matrix: Vec<Vec<ComplexEntry>>,
}

/// Report from `povm`: every element plus the completeness residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmReport {
    pub tool: ToolInfo,
    pub n: usize,
    pub d: usize,
    pub statistics: Statistics,
    /// Max-entry residual of `sum |P><P| - I`.
    pub completeness_residual: f64,
    pub elements: Vec<ElementReport>,
}

impl PovmReport {
    pub fn build(
        tool: ToolInfo,
        u: &ModeUnitary,
        d: usize,
        statistics: Statistics,
    ) -> Result<Self, Error> {
        let elements = povm_elements(u, d, statistics)?;
        let completeness_residual = completeness_check(&elements, d);
        let rows = elements
            .iter()
            .map(|element| ElementReport {
                pattern: (element.pattern().i(), element.pattern().j()),
                weight: element.weight(),
                is_null: element.is_null(),
                singular_values: element.singular_values(),
                matrix: matrix_to_rows(element.matrix()),
            })
            .collect();
        Ok(Self {
            tool,
            n: u.n(),
            d,
            statistics,
            completeness_residual,
            elements: rows,
        })
    }
}

/// One classified element in an `analyze` report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzedElement {
    pub pattern: (usize, usize),
    pub weight: f64,
    pub is_null: bool,
    pub singular_values: Vec<f64>,
    /// Schmidt rank at the relative tolerance baked into the analyzer.
    pub numerical_rank: usize,
    pub me: MEClassification,
}

/// Report from `analyze`: per-element entanglement classification, the
/// overall maximally entangled success weight, and per-detector accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub tool: ToolInfo,
    pub n: usize,
    pub d: usize,
    pub statistics: Statistics,
    pub completeness_residual: f64,
    pub elements: Vec<AnalyzedElement>,
    pub me_success_probability: f64,
    pub detectors: Vec<DetectorContribution>,
}

impl AnalyzeReport {
    pub fn build(
        tool: ToolInfo,
        u: &ModeUnitary,
        d: usize,
        statistics: Statistics,
    ) -> Result<Self, Error> {
        let elements = povm_elements(u, d, statistics)?;
        let completeness_residual = completeness_check(&elements, d);
        let mut rows = Vec::with_capacity(elements.len());
        for element in &elements {
            let (numerical_rank, me) = if element.is_null() {
                (
                    0,
                    MEClassification {
                        is_me: false,
                        kappa: 0.0,
                    },
                )
            } else {
                (
                    schmidt(element.matrix(), RANK_REL_TOL)?.numerical_rank,
                    is_maximally_entangled(element.matrix(), ME_REL_TOL),
                )
            };
            rows.push(AnalyzedElement {
                pattern: (element.pattern().i(), element.pattern().j()),
                weight: element.weight(),
                is_null: element.is_null(),
                singular_values: element.singular_values(),
                numerical_rank,
                me,
            });
        }
        let me_success_probability =
            crate::entangle::me_success_probability(&elements, d, ME_REL_TOL);
        let detectors = detector_contributions(u, d, statistics, ME_REL_TOL)?;
        Ok(Self {
            tool,
            n: u.n(),
            d,
            statistics,
            completeness_residual,
            elements: rows,
            me_success_probability,
            detectors,
        })
    }
}

/// Report from `bell`: the discrimination table plus run identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BellRunReport {
    pub tool: ToolInfo,
    pub n: usize,
    #[serde(flatten)]
    pub report: BellReport,
}

impl BellRunReport {
    pub fn build(
        tool: ToolInfo,
        u: &ModeUnitary,
        d: usize,
        statistics: Statistics,
    ) -> Result<Self, Error> {
        Ok(Self {
            tool,
            n: u.n(),
            report: bell_discrimination(u, d, statistics)?,
        })
    }
}

/// Report from `crosscheck`: formula probabilities against the Fock oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub tool: ToolInfo,
    pub n: usize,
    pub d: usize,
    pub statistics: Statistics,
    /// Largest absolute probability difference over all click patterns.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

impl CrosscheckReport {
    pub fn build(
        tool: ToolInfo,
        u: &ModeUnitary,
        state: &TwoQuditState,
        tolerance: f64,
    ) -> Result<Self, Error> {
        let max_deviation = oracle_crosscheck(u, state)?;
        Ok(Self {
            tool,
            n: u.n(),
            d: state.d(),
            statistics: state.statistics(),
            max_deviation,
            tolerance,
            within_tolerance: max_deviation <= tolerance,
        })
    }
}

/// Report from `optimize`: the resolved configuration and the search result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub tool: ToolInfo,
    pub config: OptimizerConfig,
    pub result: OptimizationResult,
    /// For qubits, whether the best success honors the 1/2 ceiling; absent
    /// for larger local dimensions, which have no such cap to check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_bound_satisfied: Option<bool>,
}

impl OptimizeReport {
    pub fn build(tool: ToolInfo, config: OptimizerConfig) -> Result<Self, Error> {
        let result = optimize(&config)?;
        let qubit_bound_satisfied =
            (config.d == 2).then_some(result.best_hard_success <= 0.5 + SUCCESS_CAP_TOL);
        Ok(Self {
            tool,
            config,
            result,
            qubit_bound_satisfied,
        })
    }
}

/// Report from `single-qudit`: the rank-one measurement read off the first
/// `d` columns of a mode unitary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleQuditReport {
    pub tool: ToolInfo,
    pub n: usize,
    pub d: usize,
    /// Measurement vectors, one per output mode; `sum_i v_i v_i^dag = I_d`.
    pub vectors: Vec<Vec<ComplexEntry>>,
    /// `|v_i|^2`, the outcome probability on the maximally mixed input
    /// times `d`.
    pub weights: Vec<f64>,
    pub completeness_residual: f64,
}

impl SingleQuditReport {
    pub fn build(tool: ToolInfo, u: &ModeUnitary, d: usize) -> Result<Self, Error> {
        let povm = single_qudit_povm(u, d)?;
        let mut sum = CMat::zeros(d, d);
        for v in povm.vectors() {
            sum += v * v.adjoint();
        }
        let completeness_residual = max_abs(&(sum - CMat::identity(d, d)));
        Ok(Self {
            tool,
            n: u.n(),
            d,
            vectors: povm
                .vectors()
                .iter()
                .map(|v| v.iter().map(|z| (*z).into()).collect())
                .collect(),
            weights: povm.vectors().iter().map(|v| v.norm_squared()).collect(),
            completeness_residual,
        })
    }
}
