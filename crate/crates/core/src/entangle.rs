//! Entanglement structure of the measurement operators.
//!
//! A maximally entangled two-qudit state has both reductions proportional to
//! the identity, which in the matrix representation means `P` is proportional
//! to a unitary: all singular values equal. Since every click-pattern operator
//! is a sum of at most two outer products, its Schmidt rank never exceeds two,
//! so for `d > 2` no element can be maximally entangled at all. For `d = 2`
//! the total weight of maximally entangled elements is capped: a click in any
//! one output mode contributes at most `(|a_i|^2 + |b_i|^2)/8` to the success
//! probability of projecting the maximally mixed input onto a maximally
//! entangled state, and the contributions sum to `1/2` over all detectors.

use serde::{Deserialize, Serialize};

use crate::mode::{partition_blocks, ModeUnitary};
use crate::povm::{outcome_probability, povm_elements, PovmElement};
use crate::state::{bell_state, Statistics};
use crate::{CMat, Error};

/// Relative singular-value threshold below which directions do not count
/// toward the numerical rank.
pub const RANK_REL_TOL: f64 = 1e-9;
/// Relative spread `(sigma_1 - sigma_d)/sigma_1` below which an element
/// counts as maximally entangled.
pub const ME_REL_TOL: f64 = 1e-7;
/// Absolute probability below which a Bell input counts as impossible
/// for a pattern.
pub const UNAMBIGUOUS_TOL: f64 = 1e-10;

/// Singular-value profile of a state-matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchmidtData {
    /// Descending singular values; their squares sum to `<P|P>`.
    pub singular_values: Vec<f64>,
    /// Count of singular values above `rel_tol * sigma_1`.
    pub numerical_rank: usize,
}

/// Whether a state-matrix is proportional to a unitary, and the constant.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MEClassification {
    pub is_me: bool,
    /// The proportionality constant `|kappa|` when maximally entangled,
    /// zero otherwise.
    pub kappa: f64,
}

/// Descending singular values of a complex matrix.
pub fn sorted_singular_values(p: &CMat) -> Vec<f64> {
    let mut sv: Vec<f64> = p
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Schmidt decomposition data of a nonzero state-matrix.
pub fn schmidt(p: &CMat, rel_tol: f64) -> Result<SchmidtData, Error> {
    let singular_values = sorted_singular_values(p);
    let top = singular_values[0];
    if top == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let numerical_rank = singular_values
        .iter()
        .filter(|s| **s > rel_tol * top)
        .count();
    Ok(SchmidtData {
        singular_values,
        numerical_rank,
    })
}

/// Tests whether all singular values agree to within `rel_tol` of the largest,
/// the operational criterion for maximal entanglement.
pub fn is_maximally_entangled(p: &CMat, rel_tol: f64) -> MEClassification {
    let sv = sorted_singular_values(p);
    let top = sv[0];
    let bottom = *sv.last().unwrap();
    if top > 0.0 && (top - bottom) / top <= rel_tol {
        MEClassification {
            is_me: true,
            kappa: top,
        }
    } else {
        MEClassification {
            is_me: false,
            kappa: 0.0,
        }
    }
}

/// Probability that the maximally mixed input `I/d^2` ends up projected onto
/// a maximally entangled state: the summed weight `<P|P>/d^2` of elements
/// classified as maximally entangled at `rel_tol`.
pub fn me_success_probability(elements: &[PovmElement], d: usize, rel_tol: f64) -> f64 {
    // `+ 0.0` turns the empty sum's -0.0 into +0.0 for clean reports.
    (elements
        .iter()
        .filter(|e| !e.is_null() && is_maximally_entangled(e.matrix(), rel_tol).is_me)
        .map(|e| e.weight())
        .sum::<f64>()
        + 0.0)
        / (d * d) as f64
}

/// Success weight a single detector contributes, against its ceiling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DetectorContribution {
    /// Output mode index, 1-based.
    pub mode: usize,
    /// Summed maximally entangled weight assigned to this detector
    /// (two-detector patterns split evenly).
    pub achieved: f64,
    /// The per-detector cap `(|a_i|^2 + |b_i|^2)/(2 d^2)`.
    pub bound: f64,
}

/// Per-detector accounting of the maximally entangled weight. The bounds sum
/// to `1/d` over all modes regardless of `n`, which for qubits is the `1/2`
/// ceiling on the total success probability.
pub fn detector_contributions(
    u: &ModeUnitary,
    d: usize,
    statistics: Statistics,
    rel_tol: f64,
) -> Result<Vec<DetectorContribution>, Error> {
    let n = u.n();
    let blocks = partition_blocks(u, d)?;
    let elements = povm_elements(u, d, statistics)?;
    let mut achieved = vec![0.0_f64; n];
    for element in &elements {
        if element.is_null() || !is_maximally_entangled(element.matrix(), rel_tol).is_me {
            continue;
        }
        let share = element.weight() / (d * d) as f64;
        let (i, j) = (element.pattern().i() - 1, element.pattern().j() - 1);
        if i == j {
            achieved[i] += share;
        } else {
            achieved[i] += share / 2.0;
            achieved[j] += share / 2.0;
        }
    }
    Ok((0..n)
        .map(|col| {
            let a_norm: f64 = (0..d).map(|r| blocks.a[(r, col)].norm_sqr()).sum();
            let b_norm: f64 = (0..d).map(|r| blocks.b[(r, col)].norm_sqr()).sum();
            DetectorContribution {
                mode: col + 1,
                achieved: achieved[col],
                bound: (a_norm + b_norm) / (2.0 * (d * d) as f64),
            }
        })
        .collect())
}

/// Analysis of one click pattern against every generalized Bell input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BellPatternRow {
    /// Output-mode pair, 1-based.
    pub pattern: (usize, usize),
    /// Probability of this pattern for each Bell input, indexed `m*d + k`.
    pub probabilities: Vec<f64>,
    /// Set when exactly one Bell input can produce this pattern.
    pub identified: Option<(usize, usize)>,
    pub is_null: bool,
    pub me: MEClassification,
    /// `<P|P>` of the element behind this pattern.
    pub weight: f64,
    pub singular_values: Vec<f64>,
}

/// Full Bell-discrimination analysis of a mode unitary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BellReport {
    pub d: usize,
    pub statistics: Statistics,
    pub patterns: Vec<BellPatternRow>,
    /// Probability that a uniformly random Bell input fires a pattern that
    /// pins down a unique Bell state.
    pub success_uniform_bell: f64,
    /// Probability that the maximally mixed input is projected onto a
    /// maximally entangled state.
    pub success_maximally_mixed: f64,
}

/// Index labels `(m, k)` of the `d^2` generalized Bell states in report order.
pub fn bell_labels(d: usize) -> Vec<(usize, usize)> {
    let mut labels = Vec::with_capacity(d * d);
    for m in 0..d {
        for k in 0..d {
            labels.push((m, k));
        }
    }
    labels
}

/// Evaluates every click pattern of `u` against all `d^2` generalized Bell
/// inputs and reports which patterns identify a Bell state unambiguously.
pub fn bell_discrimination(
    u: &ModeUnitary,
    d: usize,
    statistics: Statistics,
) -> Result<BellReport, Error> {
    let elements = povm_elements(u, d, statistics)?;
    let labels = bell_labels(d);
    let inputs: Vec<_> = labels
        .iter()
        .map(|&(m, k)| bell_state(d, m, k, statistics))
        .collect::<Result<_, _>>()?;

    let mut patterns = Vec::with_capacity(elements.len());
    for element in &elements {
        let probabilities: Vec<f64> = inputs
            .iter()
            .map(|input| outcome_probability(element, input))
            .collect::<Result<_, _>>()?;
        let possible: Vec<usize> = probabilities
            .iter()
            .enumerate()
            .filter(|(_, p)| **p >= UNAMBIGUOUS_TOL)
            .map(|(idx, _)| idx)
            .collect();
        let identified = match possible.as_slice() {
            [single] => Some(labels[*single]),
            _ => None,
        };
        patterns.push(BellPatternRow {
            pattern: (element.pattern().i(), element.pattern().j()),
            probabilities,
            identified,
            is_null: element.is_null(),
            me: is_maximally_entangled(element.matrix(), ME_REL_TOL),
            weight: element.weight(),
            singular_values: element.singular_values(),
        });
    }

    let success_uniform_bell = (patterns
        .iter()
        .filter(|row| row.identified.is_some())
        .flat_map(|row| row.probabilities.iter())
        .sum::<f64>()
        + 0.0)
        / (d * d) as f64;
    let success_maximally_mixed = me_success_probability(&elements, d, ME_REL_TOL);

    Ok(BellReport {
        d,
        statistics,
        patterns,
        success_uniform_bell,
        success_maximally_mixed,
    })
}

/// The four-mode circuit that sorts two of the qubit Bell states: balanced
/// splitters across the rail pairs `(1,3)` and `(2,4)`.
pub fn bell_analyzer_circuit() -> crate::mode::OpticalCircuit {
    use crate::mode::CircuitElement;
    crate::mode::OpticalCircuit {
        n: 4,
        elements: vec![
            CircuitElement::BeamSplitter {
                modes: [1, 3],
                theta: std::f64::consts::FRAC_PI_4,
                phi: 0.0,
            },
            CircuitElement::BeamSplitter {
                modes: [2, 4],
                theta: std::f64::consts::FRAC_PI_4,
                phi: 0.0,
            },
        ],
    }
}
