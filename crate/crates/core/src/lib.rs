//! Two-qudit generalized measurements built from linear mode transformations.
//!
//! Two particles (bosons or fermions) spread over `n` field modes encode a pair
//! of qudits in a dual-rail layout: qudit one lives in modes `1..d`, qudit two in
//! modes `d+1..2d`. A linear transformation mixes the modes, particle counters
//! click on the output, and each click pattern acts as one element of a POVM on
//! the two-qudit space. This crate constructs those POVMs, checks them against a
//! brute-force Fock-space simulation, analyzes the entanglement structure of the
//! measurement operators, and searches for mode transformations that maximize the
//! probability of projecting onto maximally entangled states.

pub mod entangle;
pub mod error;
pub mod fock;
pub mod io;
pub mod mode;
pub mod optimize;
pub mod povm;
pub mod state;

pub use error::Error;

/// Convenient alias for complex double-precision matrices.
pub type CMat = nalgebra::DMatrix<num_complex::Complex64>;
/// Convenient alias for complex double-precision column vectors.
pub type CVec = nalgebra::DVector<num_complex::Complex64>;
