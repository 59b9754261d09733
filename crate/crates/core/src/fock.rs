//! Brute-force two-particle simulation in the occupation basis.
//!
//! This module expands two-particle states explicitly over ordered mode pairs
//! and pushes them through a mode unitary by raw quadratic operator algebra,
//! with no shortcuts shared with the measurement-operator pipeline. It serves
//! as the ground truth that pins every constant, normalization, and sign used
//! elsewhere: any disagreement between `|<P^{ij}|C>|^2` and the probabilities
//! computed here is a bug in the formula path, not in this one.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::mode::ModeUnitary;
use crate::state::{Statistics, TwoQuditState};
use crate::Error;

/// Tolerance on `|sum of squared amplitudes - 1|` for physical vectors.
pub const NORM_TOL: f64 = 1e-10;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// An ordered pair of occupied modes, `1 <= i <= j <= n` (bosons) or
/// `i < j` (fermions, which cannot share a mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModePair {
    i: usize,
    j: usize,
}

impl ModePair {
    /// Validates ordering and exchange statistics for a 1-based mode pair.
    pub fn new(i: usize, j: usize, statistics: Statistics) -> Result<Self, Error> {
        if i == 0 || j == 0 {
            return Err(Error::ModeIndex {
                index: 0,
                n: usize::MAX,
            });
        }
        if i > j {
            return Err(Error::Pattern {
                i,
                j,
                reason: "mode pairs are listed with i <= j".into(),
            });
        }
        if i == j && statistics == Statistics::Fermionic {
            return Err(Error::PauliViolation(i));
        }
        Ok(Self { i, j })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// `true` when both particles sit in the same mode.
    pub fn is_double(&self) -> bool {
        self.i == self.j
    }
}

/// Every valid detection pattern on `n` modes in lexicographic order.
pub fn all_patterns(n: usize, statistics: Statistics) -> Vec<ModePair> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            if i == j && statistics == Statistics::Fermionic {
                continue;
            }
            out.push(ModePair { i, j });
        }
    }
    out
}

/// A two-particle state expanded over ordered occupation pairs.
///
/// Basis states are `a_i^dag a_j^dag |0>` for `i < j` and, for bosons,
/// `(a_i^dag)^2 |0> / sqrt(2)` for `i = j`; all have unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    n: usize,
    statistics: Statistics,
    amplitudes: BTreeMap<(usize, usize), Complex64>,
}

impl FockVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    /// Amplitude on the ordered pair `(i, j)`; zero if absent.
    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes
            .get(&(i, j))
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Iterates over nonzero amplitudes in lexicographic pair order.
    pub fn iter(&self) -> impl Iterator<Item = (ModePair, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .map(|(&(i, j), &amp)| (ModePair { i, j }, amp))
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.values().map(|z| z.norm_sqr()).sum()
    }
}

/// Places a two-qudit state into the dual-rail mode layout: coefficient
/// `C_ij` becomes the amplitude of the pair `(i, d+j)` (1-based).
pub fn encode(state: &TwoQuditState, n: usize) -> Result<FockVector, Error> {
    let d = state.d();
    if n < 2 * d {
        return Err(Error::TooFewModes {
            d,
            n,
            required: 2 * d,
        });
    }
    let mut amplitudes = BTreeMap::new();
    for i in 0..d {
        for j in 0..d {
            let amp = state.coefficients()[(i, j)];
            if amp != Complex64::new(0.0, 0.0) {
                amplitudes.insert((i + 1, d + j + 1), amp);
            }
        }
    }
    Ok(FockVector {
        n,
        statistics: state.statistics(),
        amplitudes,
    })
}

/// Rewrites the state over the output modes of `u` by expanding each
/// `a_i^dag a_j^dag` monomial with `a_i^dag = sum_k U_{ik} c_k^dag`.
///
/// Bosonic double occupations pick up the `sqrt(2)` basis normalization;
/// fermionic expansions reorder operators with explicit sign tracking.
pub fn evolve(v: &FockVector, u: &ModeUnitary) -> Result<FockVector, Error> {
    if v.n() != u.n() {
        return Err(Error::Dimension(format!(
            "state lives on {} modes but unitary acts on {}",
            v.n(),
            u.n()
        )));
    }
    let n = v.n();
    let m = u.matrix();
    let mut amplitudes: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    let mut add = |key: (usize, usize), value: Complex64| {
        if value != Complex64::new(0.0, 0.0) {
            *amplitudes
                .entry(key)
                .or_insert_with(|| Complex64::new(0.0, 0.0)) += value;
        }
    };
    for (&(i, j), &alpha) in &v.amplitudes {
        let (ri, rj) = (i - 1, j - 1);
        match v.statistics {
            Statistics::Bosonic if i == j => {
                // (1/sqrt2)(a_i^dag)^2 -> (1/sqrt2) sum_kl U_ik U_il c_k c_l
                for k in 0..n {
                    add((k + 1, k + 1), alpha * m[(ri, k)] * m[(ri, k)]);
                    for l in (k + 1)..n {
                        add((k + 1, l + 1), alpha * SQRT_2 * m[(ri, k)] * m[(ri, l)]);
                    }
                }
            }
            Statistics::Bosonic => {
                for k in 0..n {
                    add((k + 1, k + 1), alpha * SQRT_2 * m[(ri, k)] * m[(rj, k)]);
                    for l in (k + 1)..n {
                        let coeff = m[(ri, k)] * m[(rj, l)] + m[(ri, l)] * m[(rj, k)];
                        add((k + 1, l + 1), alpha * coeff);
                    }
                }
            }
            Statistics::Fermionic => {
                for k in 0..n {
                    for l in (k + 1)..n {
                        let coeff = m[(ri, k)] * m[(rj, l)] - m[(ri, l)] * m[(rj, k)];
                        add((k + 1, l + 1), alpha * coeff);
                    }
                }
            }
        }
    }
    amplitudes.retain(|_, amp| amp.norm_sqr() > 0.0);
    Ok(FockVector {
        n,
        statistics: v.statistics,
        amplitudes,
    })
}

/// Click-pattern probabilities `|amplitude|^2`, keyed by ordered mode pair.
pub fn detection_probabilities(v: &FockVector) -> BTreeMap<(usize, usize), f64> {
    v.amplitudes
        .iter()
        .map(|(&key, amp)| (key, amp.norm_sqr()))
        .collect()
}
