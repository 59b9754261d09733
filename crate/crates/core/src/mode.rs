//! Mode unitaries, optical circuits, and block partitioning.
//!
//! An `n`-mode linear transformation is an `n x n` unitary `U` acting on the
//! creation operators of the input modes. Circuits are ordered lists of beam
//! splitters, phase shifters, and mode swaps; composing a circuit multiplies the
//! element matrices in application order. For the dual-rail qudit layout the
//! rows of `U` split into blocks `A` (rows `1..d`), `B` (rows `d+1..2d`) and `D`
//! (the rest), with `A B^dag = 0` following from row orthonormality.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{CMat, Error};

/// Absolute tolerance on `max|U^dag U - I|` for accepting a matrix as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// An `n x n` mode transformation, checked to be unitary on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    entries: CMat,
}

impl ModeUnitary {
    /// Wraps a square complex matrix, rejecting it unless `U^dag U = I` holds
    /// to within [`UNITARITY_TOL`].
    pub fn new(entries: CMat) -> Result<Self, Error> {
        Self::with_tolerance(entries, UNITARITY_TOL)
    }

    /// Same as [`ModeUnitary::new`] but with a caller-chosen tolerance.
    pub fn with_tolerance(entries: CMat, tol: f64) -> Result<Self, Error> {
        let deviation = validate_unitary(&entries)?;
        if deviation > tol {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: tol,
            });
        }
        Ok(Self { entries })
    }

    /// Identity transformation on `n` modes.
    pub fn identity(n: usize) -> Self {
        Self {
            entries: CMat::identity(n, n),
        }
    }

    /// Number of modes.
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    /// Consumes the wrapper and returns the matrix.
    pub fn into_matrix(self) -> CMat {
        self.entries
    }
}

/// Returns the max-norm of `M^dag M - I`, the deviation from unitarity.
pub fn validate_unitary(m: &CMat) -> Result<f64, Error> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let gram = m.adjoint() * m;
    let identity = CMat::identity(m.nrows(), m.ncols());
    Ok(max_abs(&(gram - identity)))
}

/// Largest entrywise modulus of a complex matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One passive element of an optical circuit. Mode indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CircuitElement {
    /// Two-mode mixer acting as `[[cos th, e^{i phi} sin th], [-e^{-i phi} sin th, cos th]]`
    /// on `(mode_a, mode_b)`.
    #[serde(rename = "bs")]
    BeamSplitter {
        modes: [usize; 2],
        theta: f64,
        phi: f64,
    },
    /// Multiplies the amplitude of one mode by `e^{i phi}`.
    #[serde(rename = "ps")]
    PhaseShifter { mode: usize, phi: f64 },
    /// Exchanges two modes.
    #[serde(rename = "swap")]
    ModeSwap { modes: [usize; 2] },
}

impl CircuitElement {
    fn check(&self, n: usize) -> Result<(), Error> {
        let check_index = |index: usize| {
            if index == 0 || index > n {
                Err(Error::ModeIndex { index, n })
            } else {
                Ok(())
            }
        };
        match self {
            CircuitElement::BeamSplitter { modes, .. } | CircuitElement::ModeSwap { modes } => {
                check_index(modes[0])?;
                check_index(modes[1])?;
                if modes[0] == modes[1] {
                    return Err(Error::Dimension(format!(
                        "two-mode element needs distinct modes, got ({}, {})",
                        modes[0], modes[1]
                    )));
                }
                Ok(())
            }
            CircuitElement::PhaseShifter { mode, .. } => check_index(*mode),
        }
    }

    /// The `n x n` matrix of this element.
    fn matrix(&self, n: usize) -> CMat {
        let mut m = CMat::identity(n, n);
        match *self {
            CircuitElement::BeamSplitter {
                modes: [a, b],
                theta,
                phi,
            } => {
                let (a, b) = (a - 1, b - 1);
                let (s, c) = theta.sin_cos();
                let e = Complex64::from_polar(1.0, phi);
                m[(a, a)] = c.into();
                m[(a, b)] = e * s;
                m[(b, a)] = -e.conj() * s;
                m[(b, b)] = c.into();
            }
            CircuitElement::PhaseShifter { mode, phi } => {
                m[(mode - 1, mode - 1)] = Complex64::from_polar(1.0, phi);
            }
            CircuitElement::ModeSwap { modes: [a, b] } => {
                let (a, b) = (a - 1, b - 1);
                m[(a, a)] = 0.0.into();
                m[(b, b)] = 0.0.into();
                m[(a, b)] = 1.0.into();
                m[(b, a)] = 1.0.into();
            }
        }
        m
    }
}

/// An ordered list of circuit elements on `n` modes, applied left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalCircuit {
    pub n: usize,
    pub elements: Vec<CircuitElement>,
}

/// Multiplies the circuit elements in application order: the result is
/// `E_k ... E_2 E_1` for elements listed as `[E_1, E_2, ..., E_k]`.
pub fn compose_circuit(circuit: &OpticalCircuit) -> Result<ModeUnitary, Error> {
    let mut u = CMat::identity(circuit.n, circuit.n);
    for element in &circuit.elements {
        element.check(circuit.n)?;
        u = element.matrix(circuit.n) * u;
    }
    ModeUnitary::new(u)
}

/// Row blocks of a mode unitary for local dimension `d`: `a` holds rows `1..d`,
/// `b` rows `d+1..2d`, and `rest` whatever remains.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub a: CMat,
    pub b: CMat,
    pub rest: CMat,
}

/// Slices a mode unitary into the `A`, `B`, `D` row blocks for local dimension
/// `d` and checks the orthogonality relation `A B^dag = 0`.
pub fn partition_blocks(u: &ModeUnitary, d: usize) -> Result<BlockPartition, Error> {
    let n = u.n();
    if n < 2 * d {
        return Err(Error::TooFewModes {
            d,
            n,
            required: 2 * d,
        });
    }
    let m = u.matrix();
    let a = m.rows(0, d).into_owned();
    let b = m.rows(d, d).into_owned();
    let rest = m.rows(2 * d, n - 2 * d).into_owned();
    let cross = max_abs(&(&a * b.adjoint()));
    if cross > UNITARITY_TOL {
        return Err(Error::Invariant(format!(
            "row blocks are not orthogonal: max|A B^dag| = {cross:.3e}"
        )));
    }
    Ok(BlockPartition { a, b, rest })
}

/// Draws a Haar-distributed `n x n` unitary, deterministically for a fixed seed.
///
/// Uses the QR factorization of a complex Ginibre sample, with the phases of
/// the `R` diagonal absorbed into `Q` so the distribution is exactly Haar.
pub fn random_unitary(n: usize, seed: u64) -> ModeUnitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ginibre = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    haar_from_ginibre(ginibre)
}

fn haar_from_ginibre(g: CMat) -> ModeUnitary {
    let n = g.nrows();
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let diag = r[(k, k)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    ModeUnitary::new(q).expect("QR factor must be unitary")
}

/// Number of real parameters of [`parametrized_unitary`] for `n` modes.
pub fn parameter_count(n: usize) -> usize {
    n * n
}

/// Builds an `n`-mode unitary from `n^2` real parameters.
///
/// The first `n(n-1)` parameters are `(theta, phi)` pairs for a fixed sequence
/// of two-mode rotations (pairs `(a, b)` with `a < b` in lexicographic order,
/// same block convention as a beam splitter); the last `n` are output phases.
/// The all-zero vector maps to the identity, and the map covers all of `U(n)`.
pub fn parametrized_unitary(n: usize, params: &[f64]) -> Result<ModeUnitary, Error> {
    if params.len() != parameter_count(n) {
        return Err(Error::Dimension(format!(
            "expected {} parameters for {} modes, got {}",
            parameter_count(n),
            n,
            params.len()
        )));
    }
    // Same matrix as composing the equivalent circuit, but built by in-place
    // row rotations: the optimizer evaluates this in a tight loop.
    let mut u = CMat::identity(n, n);
    let mut next = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            let (s, c) = params[next].sin_cos();
            let e = Complex64::from_polar(1.0, params[next + 1]);
            next += 2;
            for col in 0..n {
                let ra = u[(a, col)];
                let rb = u[(b, col)];
                u[(a, col)] = c * ra + e * s * rb;
                u[(b, col)] = -e.conj() * s * ra + c * rb;
            }
        }
    }
    for mode in 0..n {
        let phase = Complex64::from_polar(1.0, params[next]);
        next += 1;
        for col in 0..n {
            u[(mode, col)] *= phase;
        }
    }
    ModeUnitary::new(u)
}

/// The circuit whose composition equals [`parametrized_unitary`] at `params`.
pub fn parametrized_circuit(n: usize, params: &[f64]) -> Result<OpticalCircuit, Error> {
    if params.len() != parameter_count(n) {
        return Err(Error::Dimension(format!(
            "expected {} parameters for {} modes, got {}",
            parameter_count(n),
            n,
            params.len()
        )));
    }
    let mut elements = Vec::with_capacity(n * (n + 1) / 2);
    let mut next = 0;
    for a in 1..=n {
        for b in (a + 1)..=n {
            elements.push(CircuitElement::BeamSplitter {
                modes: [a, b],
                theta: params[next],
                phi: params[next + 1],
            });
            next += 2;
        }
    }
    for mode in 1..=n {
        elements.push(CircuitElement::PhaseShifter {
            mode,
            phi: params[next],
        });
        next += 1;
    }
    Ok(OpticalCircuit { n, elements })
}

/// Builds the `n x n` unitary whose first `d` columns hold the conjugated
/// measurement vectors: `U_{ik} = conj((v_i)_k)` for `k <= d`.
///
/// The inputs must satisfy the rank-one completeness relation
/// `sum_i v_i v_i^dag = I_d`; the remaining `n - d` columns are completed by
/// Gram-Schmidt over canonical basis vectors. Extracting the single-system
/// measurement back out of the result recovers the inputs exactly.
pub fn neumark_unitary(vectors: &[crate::CVec]) -> Result<ModeUnitary, Error> {
    let n = vectors.len();
    let d = match vectors.first() {
        Some(v) => v.len(),
        None => return Err(Error::Dimension("no measurement vectors given".into())),
    };
    if n < d {
        return Err(Error::Dimension(format!(
            "need at least {d} vectors to resolve a {d}-dimensional identity, got {n}"
        )));
    }
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::Dimension(
            "measurement vectors have mixed lengths".into(),
        ));
    }
    let mut sum = CMat::zeros(d, d);
    for v in vectors {
        sum += v * v.adjoint();
    }
    let residual = max_abs(&(sum - CMat::identity(d, d)));
    if residual > UNITARITY_TOL {
        return Err(Error::NotAPovm {
            residual,
            tolerance: UNITARITY_TOL,
        });
    }

    let mut u = CMat::zeros(n, n);
    for (i, v) in vectors.iter().enumerate() {
        for k in 0..d {
            u[(i, k)] = v[k].conj();
        }
    }
    complete_columns(&mut u, d)?;
    ModeUnitary::new(u)
}

/// Fills columns `start..` of `u` with an orthonormal completion of the first
/// `start` columns, drawing candidates from the canonical basis.
fn complete_columns(u: &mut CMat, start: usize) -> Result<(), Error> {
    let n = u.nrows();
    let mut filled = start;
    for candidate in 0..n {
        if filled == n {
            break;
        }
        let mut col = crate::CVec::zeros(n);
        col[candidate] = Complex64::new(1.0, 0.0);
        // Two Gram-Schmidt passes keep the completion orthonormal to working
        // precision even when a candidate nearly lies in the current span.
        for _ in 0..2 {
            for k in 0..filled {
                let existing = u.column(k);
                let overlap: Complex64 = existing
                    .iter()
                    .zip(col.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for i in 0..n {
                    let sub = overlap * u[(i, k)];
                    col[i] -= sub;
                }
            }
        }
        let norm = col.norm();
        if norm > 1e-6 {
            col /= Complex64::from(norm);
            u.set_column(filled, &col);
            filled += 1;
        }
    }
    if filled < n {
        return Err(Error::Invariant(
            "failed to complete an orthonormal basis".into(),
        ));
    }
    Ok(())
}
