//! Measurement operators induced on the encoded qudits by a mode unitary.
//!
//! A click pattern `(i, j)` on the output modes projects the two-qudit input
//! onto the state-matrix `P^{ij} = A^* Delta^{ij} B^dag`, where `A` and `B` are
//! the row blocks of the unitary covering the two rails and
//! `Delta^{ij} = |i><j| +- |j><i|` (upper sign for bosons, lower for
//! fermions). Bosonic double clicks `(i, i)` carry an extra `1/sqrt(2)`;
//! fermionic double clicks are forbidden outright. The resulting rank-one
//! operators `F^{ij} = |P^{ij}><P^{ij}|` resolve the identity on the `d^2`
//! dimensional two-qudit space, and each `P^{ij}` is a sum of two outer
//! products, so no element can exceed Schmidt rank two.

use num_complex::Complex64;

use crate::fock::{all_patterns, detection_probabilities, encode, evolve, ModePair};
use crate::mode::{max_abs, partition_blocks, ModeUnitary};
use crate::state::{vectorize, Statistics, TwoQuditState};
use crate::{CMat, CVec, Error};

/// Elements with Frobenius norm at or below this are zero-probability outcomes.
pub const NULL_TOL: f64 = 1e-10;
/// Upper bound on `<P|P>` for any single element, with numerical headroom.
pub const WEIGHT_BOUND: f64 = 2.0 + 1e-10;

/// One measurement operator, tagged by the click pattern that produces it.
#[derive(Debug, Clone)]
pub struct PovmElement {
    pattern: ModePair,
    p: CMat,
    statistics: Statistics,
}

impl PovmElement {
    fn build(pattern: ModePair, p: CMat, statistics: Statistics) -> Result<Self, Error> {
        let weight: f64 = p.iter().map(|z| z.norm_sqr()).sum();
        if weight > WEIGHT_BOUND {
            return Err(Error::Invariant(format!(
                "element ({}, {}) has weight {weight:.12} above the two-term bound",
                pattern.i(),
                pattern.j()
            )));
        }
        Ok(Self {
            pattern,
            p,
            statistics,
        })
    }

    pub fn pattern(&self) -> ModePair {
        self.pattern
    }

    /// The state-matrix `P` of the (unnormalized) state this element projects onto.
    pub fn matrix(&self) -> &CMat {
        &self.p
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn d(&self) -> usize {
        self.p.nrows()
    }

    /// `<P|P> = Tr(P^dag P)`, the success weight of this outcome.
    pub fn weight(&self) -> f64 {
        self.p.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Singular values of `P` in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self
            .p
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// `true` when the outcome never fires (`P = 0` up to rounding).
    pub fn is_null(&self) -> bool {
        self.weight().sqrt() <= NULL_TOL
    }
}

/// Extracts the full list of measurement operators for local dimension `d`,
/// one per click pattern, in lexicographic pattern order. Null elements are
/// retained so the list always covers every pattern.
pub fn povm_elements(
    u: &ModeUnitary,
    d: usize,
    statistics: Statistics,
) -> Result<Vec<PovmElement>, Error> {
    let blocks = partition_blocks(u, d)?;
    let a_conj = blocks.a.conjugate();
    let b_conj = blocks.b.conjugate();
    let sign = Complex64::from(statistics.sign());
    let mut elements = Vec::new();
    for pattern in all_patterns(u.n(), statistics) {
        let (i, j) = (pattern.i() - 1, pattern.j() - 1);
        let p = if pattern.is_double() {
            let outer = a_conj.column(i) * b_conj.column(i).transpose();
            outer * Complex64::from(std::f64::consts::SQRT_2)
        } else {
            a_conj.column(i) * b_conj.column(j).transpose()
                + (a_conj.column(j) * b_conj.column(i).transpose()) * sign
        };
        elements.push(PovmElement::build(pattern, p, statistics)?);
    }
    Ok(elements)
}

/// Probability that `element` fires on `state`: `|<P|C>|^2 = |Tr(P^dag C)|^2`.
pub fn outcome_probability(element: &PovmElement, state: &TwoQuditState) -> Result<f64, Error> {
    Ok(outcome_amplitude(element, state)?.norm_sqr())
}

/// The transition amplitude `<P|C> = Tr(P^dag C)`.
pub fn outcome_amplitude(element: &PovmElement, state: &TwoQuditState) -> Result<Complex64, Error> {
    if element.d() != state.d() {
        return Err(Error::Dimension(format!(
            "element acts on dimension {} but state has dimension {}",
            element.d(),
            state.d()
        )));
    }
    if element.statistics() != state.statistics() {
        return Err(Error::Dimension(
            "element and state carry different exchange statistics".into(),
        ));
    }
    Ok(element
        .matrix()
        .iter()
        .zip(state.coefficients().iter())
        .map(|(p, c)| p.conj() * c)
        .sum())
}

/// Max-entry norm of `sum_patterns |P><P| - I` over the `d^2` dimensional
/// two-qudit space; at most ~1e-12 for any genuine unitary.
pub fn completeness_check(elements: &[PovmElement], d: usize) -> f64 {
    let dim = d * d;
    let mut sum = CMat::zeros(dim, dim);
    for element in elements {
        let v: CVec = vectorize(element.matrix());
        sum += &v * v.adjoint();
    }
    max_abs(&(sum - CMat::identity(dim, dim)))
}

/// Compares formula probabilities against the brute-force mode simulation
/// for every click pattern; returns the largest absolute deviation.
pub fn oracle_crosscheck(u: &ModeUnitary, state: &TwoQuditState) -> Result<f64, Error> {
    let elements = povm_elements(u, state.d(), state.statistics())?;
    let expanded = evolve(&encode(state, u.n())?, u)?;
    let oracle = detection_probabilities(&expanded);
    let mut max_dev: f64 = 0.0;
    for element in &elements {
        let key = (element.pattern().i(), element.pattern().j());
        let reference = oracle.get(&key).copied().unwrap_or(0.0);
        let formula = outcome_probability(element, state)?;
        max_dev = max_dev.max((formula - reference).abs());
    }
    Ok(max_dev)
}

/// A rank-one measurement on a single qudit, one vector per output mode.
#[derive(Debug, Clone)]
pub struct SingleQuditPovm {
    vectors: Vec<CVec>,
}

impl SingleQuditPovm {
    /// Wraps the vectors, checking `sum_i v_i v_i^dag = I_d`.
    pub fn new(vectors: Vec<CVec>) -> Result<Self, Error> {
        let d = match vectors.first() {
            Some(v) => v.len(),
            None => return Err(Error::Dimension("no measurement vectors".into())),
        };
        let mut sum = CMat::zeros(d, d);
        for v in &vectors {
            if v.len() != d {
                return Err(Error::Dimension("mixed vector lengths".into()));
            }
            sum += v * v.adjoint();
        }
        let residual = max_abs(&(sum - CMat::identity(d, d)));
        if residual > 1e-10 {
            return Err(Error::NotAPovm {
                residual,
                tolerance: 1e-10,
            });
        }
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    pub fn d(&self) -> usize {
        self.vectors[0].len()
    }
}

/// Measurement induced on a single qudit in modes `1..d` by one click:
/// mode `i` clicks with probability `|<v_i|phi>|^2` where `(v_i)_k = conj(U_{ik})`.
pub fn single_qudit_povm(u: &ModeUnitary, d: usize) -> Result<SingleQuditPovm, Error> {
    if u.n() < d {
        return Err(Error::TooFewModes {
            d,
            n: u.n(),
            required: d,
        });
    }
    let m = u.matrix();
    let vectors: Vec<CVec> = (0..u.n())
        .map(|i| CVec::from_fn(d, |k, _| m[(i, k)].conj()))
        .collect();
    SingleQuditPovm::new(vectors)
}
