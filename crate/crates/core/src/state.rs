//! Two-qudit states as matrices and two-particle states as bilinear forms.
//!
//! A pure state of two `d`-level systems is written `|C> = sum_ij C_ij |i>|j>`
//! and identified with the `d x d` matrix `C` (row-major: `C_ij` multiplies
//! `|i>|j>`). Local operators act by `A (x) B |C> = |A C B^T>`, overlaps are
//! `<X|Y> = Tr(C_X^dag C_Y)`, and the reduced density matrices are `C C^dag`
//! and `C^T C^*`. Encoding the pair into two identical particles over `n`
//! modes produces the quadratic form `a^T N a |0>` whose coefficient matrix
//! `N` is symmetric for bosons and antisymmetric for fermions.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::mode::{max_abs, ModeUnitary};
use crate::{CMat, Error};

/// Absolute tolerance on `|Tr(C^dag C) - 1|` for normalized states.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Absolute tolerance on the (anti)symmetry defect of a bilinear form.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Exchange statistics of the particle pair carrying the qudits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    #[serde(rename = "boson")]
    Bosonic,
    #[serde(rename = "fermion")]
    Fermionic,
}

impl Statistics {
    /// `+1` for bosons, `-1` for fermions: the sign picked up under exchange.
    pub fn sign(self) -> f64 {
        match self {
            Statistics::Bosonic => 1.0,
            Statistics::Fermionic => -1.0,
        }
    }
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Statistics::Bosonic => write!(f, "boson"),
            Statistics::Fermionic => write!(f, "fermion"),
        }
    }
}

/// A two-qudit state in matrix form, tagged with the carrier statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQuditState {
    c: CMat,
    statistics: Statistics,
}

impl TwoQuditState {
    /// Wraps a `d x d` coefficient matrix, requiring unit norm `Tr(C^dag C) = 1`.
    pub fn new(c: CMat, statistics: Statistics) -> Result<Self, Error> {
        let state = Self::unnormalized(c, statistics)?;
        let defect = (state.norm_squared() - 1.0).abs();
        if defect > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { defect });
        }
        Ok(state)
    }

    /// Wraps a coefficient matrix without a norm check, for intermediate values.
    pub fn unnormalized(c: CMat, statistics: Statistics) -> Result<Self, Error> {
        if c.nrows() != c.ncols() || c.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "coefficient matrix must be square and nonempty, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(Self { c, statistics })
    }

    /// Scales the coefficient matrix to unit norm.
    pub fn normalize(mut self) -> Result<Self, Error> {
        let norm = self.norm_squared().sqrt();
        if norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        self.c /= Complex64::from(norm);
        Ok(self)
    }

    /// Draws a Haar-like random pure state (normalized complex Ginibre sample).
    pub fn random(d: usize, statistics: Statistics, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = CMat::from_fn(d, d, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        Self::unnormalized(c, statistics)
            .expect("square by construction")
            .normalize()
            .expect("Ginibre sample has positive norm")
    }

    /// Local dimension `d`.
    pub fn d(&self) -> usize {
        self.c.nrows()
    }

    /// The coefficient matrix `C`.
    pub fn coefficients(&self) -> &CMat {
        &self.c
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    /// `Tr(C^dag C)`, the squared norm of the state.
    pub fn norm_squared(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Row-major vectorization: entry `i*d + j` of the result is `C_ij`.
pub fn vectorize(c: &CMat) -> crate::CVec {
    let (rows, cols) = c.shape();
    crate::CVec::from_fn(rows * cols, |k, _| c[(k / cols, k % cols)])
}

/// Inverse of [`vectorize`] for square matrices.
pub fn unvectorize(v: &crate::CVec, d: usize) -> Result<CMat, Error> {
    if v.len() != d * d {
        return Err(Error::Dimension(format!(
            "expected a vector of length {}, got {}",
            d * d,
            v.len()
        )));
    }
    Ok(CMat::from_fn(d, d, |i, j| v[i * d + j]))
}

/// The quadratic-form coefficient matrix of a two-particle state,
/// `|Psi> = a^T N a |0>`, symmetric for bosons and antisymmetric for fermions.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    n_matrix: CMat,
    statistics: Statistics,
}

impl BilinearForm {
    /// Wraps a coefficient matrix, checking the symmetry class.
    pub fn new(n_matrix: CMat, statistics: Statistics) -> Result<Self, Error> {
        if n_matrix.nrows() != n_matrix.ncols() {
            return Err(Error::Dimension(format!(
                "bilinear form must be square, got {}x{}",
                n_matrix.nrows(),
                n_matrix.ncols()
            )));
        }
        let sign = Complex64::from(statistics.sign());
        let defect = max_abs(&(&n_matrix - n_matrix.transpose() * sign));
        if defect > SYMMETRY_TOL {
            return Err(Error::Invariant(format!(
                "bilinear form breaks its symmetry class by {defect:.3e}"
            )));
        }
        Ok(Self {
            n_matrix,
            statistics,
        })
    }

    /// Number of modes.
    pub fn n(&self) -> usize {
        self.n_matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.n_matrix
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }
}

/// Encodes a two-qudit state into the dual-rail mode layout on `n` modes:
/// qudit one occupies modes `1..d`, qudit two modes `d+1..2d`, and the
/// coefficient blocks are `C/2` and `+-C^T/2`.
pub fn embed_bilinear(state: &TwoQuditState, n: usize) -> Result<BilinearForm, Error> {
    let d = state.d();
    if n < 2 * d {
        return Err(Error::TooFewModes {
            d,
            n,
            required: 2 * d,
        });
    }
    let mut m = CMat::zeros(n, n);
    let half = Complex64::new(0.5, 0.0);
    let signed_half = half * Complex64::from(state.statistics().sign());
    for i in 0..d {
        for j in 0..d {
            m[(i, d + j)] = half * state.coefficients()[(i, j)];
            m[(d + j, i)] = signed_half * state.coefficients()[(i, j)];
        }
    }
    BilinearForm::new(m, state.statistics())
}

/// Rewrites a two-particle state in terms of the output modes of `u`:
/// the coefficient matrix maps as `N -> U^T N U`.
pub fn transform_bilinear(form: &BilinearForm, u: &ModeUnitary) -> Result<BilinearForm, Error> {
    if form.n() != u.n() {
        return Err(Error::Dimension(format!(
            "form has {} modes but unitary has {}",
            form.n(),
            u.n()
        )));
    }
    let m = u.matrix().transpose() * form.matrix() * u.matrix();
    BilinearForm::new(m, form.statistics())
}

/// Applies local operators to both sides: `A (x) B |C> = |A C B^T>`.
/// The result is generally unnormalized.
pub fn apply_local(a: &CMat, b: &CMat, state: &TwoQuditState) -> Result<TwoQuditState, Error> {
    let d = state.d();
    if a.ncols() != d || b.ncols() != d {
        return Err(Error::Dimension(format!(
            "local operators must have {d} columns, got {} and {}",
            a.ncols(),
            b.ncols()
        )));
    }
    if a.nrows() != d || b.nrows() != d {
        return Err(Error::Dimension(format!(
            "local operators must be {d}x{d} to keep the state square, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let c = a * state.coefficients() * b.transpose();
    TwoQuditState::unnormalized(c, state.statistics())
}

/// Overlap `<X|Y> = Tr(C_X^dag C_Y)`.
pub fn inner_product(x: &TwoQuditState, y: &TwoQuditState) -> Result<Complex64, Error> {
    if x.d() != y.d() {
        return Err(Error::Dimension(format!(
            "states have different local dimensions {} and {}",
            x.d(),
            y.d()
        )));
    }
    Ok(x.coefficients()
        .iter()
        .zip(y.coefficients().iter())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Reduced density matrix of one side: `C C^dag` for subsystem 1,
/// `C^T C^*` for subsystem 2.
pub fn reduced_density(state: &TwoQuditState, subsystem: usize) -> Result<CMat, Error> {
    let c = state.coefficients();
    match subsystem {
        1 => Ok(c * c.adjoint()),
        2 => Ok(c.transpose() * c.conjugate()),
        other => Err(Error::Dimension(format!(
            "subsystem tag must be 1 or 2, got {other}"
        ))),
    }
}

/// Generalized Bell state labelled by a phase index `m` and shift index `k`:
/// `C_jl = d^{-1/2} exp(2 pi i j m / d) [l = j + k mod d]`.
pub fn bell_state(
    d: usize,
    m: usize,
    k: usize,
    statistics: Statistics,
) -> Result<TwoQuditState, Error> {
    if m >= d || k >= d {
        return Err(Error::Dimension(format!(
            "bell indices (m={m}, k={k}) must lie below d={d}"
        )));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut c = CMat::zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * std::f64::consts::PI * (j * m) as f64 / d as f64;
        c[(j, (j + k) % d)] = Complex64::from_polar(scale, phase);
    }
    TwoQuditState::new(c, statistics)
}
