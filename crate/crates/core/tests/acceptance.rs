//! Acceptance suite: the library's headline guarantees checked end to end.
//!
//! Run `cargo test --test acceptance -- --nocapture` to see one verdict line
//! per criterion. Every criterion always runs and prints; the test fails at
//! the end if any verdict is FAIL.

use std::collections::BTreeSet;
use std::panic::catch_unwind;
use std::time::Instant;

use num_complex::Complex64;

use linoptic::entangle::{
    bell_analyzer_circuit, bell_discrimination, is_maximally_entangled, me_success_probability,
    ME_REL_TOL,
};
use linoptic::fock::{detection_probabilities, encode, evolve};
use linoptic::mode::{
    compose_circuit, max_abs, neumark_unitary, random_unitary, CircuitElement, ModeUnitary,
    OpticalCircuit,
};
use linoptic::optimize::{optimize, OptimizerConfig};
use linoptic::povm::{
    completeness_check, oracle_crosscheck, povm_elements, single_qudit_povm, PovmElement,
};
use linoptic::state::{embed_bilinear, transform_bilinear, Statistics, TwoQuditState};
use linoptic::{CMat, CVec};

const STATISTICS: [Statistics; 2] = [Statistics::Bosonic, Statistics::Fermionic];

/// A criterion returns a pass/fail verdict plus a one-line detail string.
type Criterion = fn() -> (bool, String);

/// Detection probabilities from the quadratic formula against the Fock-space
/// oracle, across dimensions, mode counts, and both statistics.
fn criterion_1_oracle_equivalence() -> (bool, String) {
    let started = Instant::now();
    let mut worst = 0.0_f64;
    let mut instances = 0_usize;
    let mut seed = 1000_u64;
    for statistics in STATISTICS {
        for d in [2_usize, 3] {
            for n in [2 * d, 2 * d + 1, 2 * d + 2] {
                for _ in 0..100 {
                    seed += 1;
                    let u = random_unitary(n, seed);
                    let state = TwoQuditState::random(d, statistics, seed ^ 0x5eed);
                    let deviation = oracle_crosscheck(&u, &state).unwrap();
                    worst = worst.max(deviation);
                    instances += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst <= 1e-10 && elapsed < 30.0;
    (
        pass,
        format!(
            "max |formula - oracle| = {worst:.3e} over {instances} instances \
             in {elapsed:.1}s (caps 1e-10, 30s)"
        ),
    )
}

/// The shared instance sweep for criteria 2 and 3: identical seeds, so both
/// criteria see exactly the same unitaries.
fn completeness_sweep(mut visit: impl FnMut(usize, Statistics, &[PovmElement])) -> usize {
    let mut seed = 2000_u64;
    let mut instances = 0_usize;
    for statistics in STATISTICS {
        for d in [2_usize, 3, 4] {
            for i in 0..200 {
                seed += 1;
                let n = 2 * d + i % 3;
                let u = random_unitary(n, seed);
                let elements = povm_elements(&u, d, statistics).unwrap();
                visit(d, statistics, &elements);
                instances += 1;
            }
        }
    }
    instances
}

/// The extracted elements resolve the identity on the two-qudit space.
fn criterion_2_completeness() -> (bool, String) {
    let mut worst = 0.0_f64;
    let instances = completeness_sweep(|d, _, elements| {
        worst = worst.max(completeness_check(elements, d));
    });
    (
        worst <= 1e-10,
        format!("max completeness residual {worst:.3e} over {instances} instances (cap 1e-10)"),
    )
}

/// Every nonzero element has at most two significant singular values, so no
/// element with d >= 3 can be maximally entangled.
fn criterion_3_rank_bound() -> (bool, String) {
    let mut worst_ratio = 0.0_f64;
    let mut me_above_qubit = 0_usize;
    let mut elements_seen = 0_usize;
    completeness_sweep(|_, _, elements| {
        for element in elements.iter().filter(|e| !e.is_null()) {
            elements_seen += 1;
            let sv = element.singular_values();
            if sv.len() > 2 {
                worst_ratio = worst_ratio.max(sv[2] / sv[0]);
            }
            if element.d() >= 3 && is_maximally_entangled(element.matrix(), ME_REL_TOL).is_me {
                me_above_qubit += 1;
            }
        }
    });
    let pass = worst_ratio < 1e-10 && me_above_qubit == 0;
    (
        pass,
        format!(
            "max sigma_3/sigma_1 = {worst_ratio:.3e} over {elements_seen} nonzero elements \
             (cap 1e-10); maximally entangled elements beyond qubits: {me_above_qubit}"
        ),
    )
}

/// The two-splitter qubit circuit identifies exactly two Bell states and
/// succeeds with probability one half.
fn criterion_4_bell_analyzer() -> (bool, String) {
    let u = compose_circuit(&bell_analyzer_circuit()).unwrap();
    let report = bell_discrimination(&u, 2, Statistics::Bosonic).unwrap();
    let states: BTreeSet<(usize, usize)> = report
        .patterns
        .iter()
        .filter_map(|row| row.identified)
        .collect();
    let discrimination_err = (report.success_uniform_bell - 0.5).abs();
    let weight_err = (report.success_maximally_mixed - 0.5).abs();
    let err = discrimination_err.max(weight_err);
    let pass = states.len() == 2 && err <= 1e-10;
    (
        pass,
        format!("identified Bell states {states:?}; success 0.5 within {err:.3e} (cap 1e-10)"),
    )
}

/// No qubit configuration exceeds success 1/2, and the search attains it.
fn criterion_5_ceiling_and_attainment() -> (bool, String) {
    let started = Instant::now();
    let cap = 0.5 + 1e-6;
    let mut capped = true;
    let mut max_random = 0.0_f64;
    let mut seed = 9000_u64;
    for statistics in STATISTICS {
        for i in 0..250_usize {
            seed += 1;
            let n = 4 + i % 3;
            let u = random_unitary(n, seed);
            let elements = povm_elements(&u, 2, statistics).unwrap();
            max_random = max_random.max(me_success_probability(&elements, 2, ME_REL_TOL));
        }
    }
    capped &= max_random <= cap;

    let mut best = 0.0_f64;
    let mut restarts_total = 0_usize;
    for statistics in STATISTICS {
        for (n, restarts) in [(4_usize, 34_usize), (5, 33), (6, 33)] {
            let config = OptimizerConfig {
                n,
                d: 2,
                statistics,
                restarts,
                max_iterations: 8000,
                seed: 77,
                tolerance: 1e-16,
            };
            let result = optimize(&config).unwrap();
            restarts_total += restarts;
            for restart in &result.restarts {
                capped &= restart.hard_success <= cap;
            }
            best = best.max(result.best_hard_success);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let attained = best >= 0.5 - 1e-3;
    let pass = capped && attained && elapsed < 300.0;
    (
        pass,
        format!(
            "500 random unitaries (max success {max_random:.6}) and {restarts_total} restarts \
             all within {cap}; optimizer best {best:.12} (needs >= 0.499) in {elapsed:.0}s (< 300s)"
        ),
    )
}

/// Separable mode unitaries act locally on the state-matrix and the rail
/// swap transposes it, up to the exchange sign.
fn criterion_6_invariance() -> (bool, String) {
    let mut worst = 0.0_f64;
    let mut instances = 0_usize;
    let mut seed = 3000_u64;
    for statistics in STATISTICS {
        for i in 0..100_usize {
            seed += 1;
            let d = 2 + i % 3;
            let extra = i % 2;
            let n = 2 * d + extra;
            let state = TwoQuditState::random(d, statistics, seed);

            let u1 = random_unitary(d, seed + 71);
            let u2 = random_unitary(d, seed + 72);
            let mut sep = CMat::zeros(n, n);
            sep.view_mut((0, 0), (d, d)).copy_from(u1.matrix());
            sep.view_mut((d, d), (d, d)).copy_from(u2.matrix());
            if extra > 0 {
                let u3 = random_unitary(extra, seed + 73);
                sep.view_mut((2 * d, 2 * d), (extra, extra))
                    .copy_from(u3.matrix());
            }
            let sep = ModeUnitary::new(sep).unwrap();
            let got = transform_bilinear(&embed_bilinear(&state, n).unwrap(), &sep).unwrap();
            let local = TwoQuditState::unnormalized(
                u1.matrix().transpose() * state.coefficients() * u2.matrix(),
                statistics,
            )
            .unwrap();
            let expected = embed_bilinear(&local, n).unwrap();
            worst = worst.max(max_abs(&(got.matrix() - expected.matrix())));

            let mut sw = CMat::zeros(2 * d, 2 * d);
            for k in 0..d {
                sw[(k, d + k)] = Complex64::new(1.0, 0.0);
                sw[(d + k, k)] = Complex64::new(1.0, 0.0);
            }
            let sw = ModeUnitary::new(sw).unwrap();
            let got = transform_bilinear(&embed_bilinear(&state, 2 * d).unwrap(), &sw).unwrap();
            let swapped = TwoQuditState::unnormalized(
                state.coefficients().transpose() * Complex64::from(statistics.sign()),
                statistics,
            )
            .unwrap();
            let expected = embed_bilinear(&swapped, 2 * d).unwrap();
            worst = worst.max(max_abs(&(got.matrix() - expected.matrix())));
            instances += 1;
        }
    }
    (
        worst <= 1e-12,
        format!("max entrywise deviation {worst:.3e} over {instances} instance pairs (cap 1e-12)"),
    )
}

/// A balanced splitter makes bosons bunch and fermions antibunch.
fn criterion_7_interference() -> (bool, String) {
    let splitter = compose_circuit(&OpticalCircuit {
        n: 2,
        elements: vec![CircuitElement::BeamSplitter {
            modes: [1, 2],
            theta: std::f64::consts::FRAC_PI_4,
            phi: 0.0,
        }],
    })
    .unwrap();
    let mut coincidences = Vec::new();
    for statistics in STATISTICS {
        let one = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
        let state = TwoQuditState::new(one, statistics).unwrap();
        let evolved = evolve(&encode(&state, 2).unwrap(), &splitter).unwrap();
        let coincidence = detection_probabilities(&evolved)
            .get(&(1, 2))
            .copied()
            .unwrap_or(0.0);
        coincidences.push(coincidence);
    }
    let (boson, fermion) = (coincidences[0], coincidences[1]);
    let pass = boson <= 1e-12 && fermion >= 1.0 - 1e-12;
    (
        pass,
        format!("boson coincidence {boson:.3e} (cap 1e-12), fermion coincidence {fermion:.15}"),
    )
}

/// Dilating a random rank-one measurement to a mode unitary and reading it
/// back returns the original elements.
fn criterion_8_dilation_round_trip() -> (bool, String) {
    let mut worst_infidelity = 0.0_f64;
    let mut worst_weight_gap = 0.0_f64;
    let mut povms = 0_usize;
    let mut seed = 500_u64;
    for d in [2_usize, 3] {
        for i in 0..25_usize {
            seed += 1;
            let n = d + 1 + i % 4;
            let haar = random_unitary(n, seed);
            let vectors: Vec<CVec> = (0..n)
                .map(|r| CVec::from_fn(d, |k, _| haar.matrix()[(r, k)].conj()))
                .collect();
            let u = neumark_unitary(&vectors).unwrap();
            let recovered = single_qudit_povm(&u, d).unwrap();
            for (a, b) in vectors.iter().zip(recovered.vectors()) {
                let (na, nb) = (a.norm_squared(), b.norm_squared());
                let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
                worst_infidelity = worst_infidelity.max(1.0 - overlap.norm_sqr() / (na * nb));
                worst_weight_gap = worst_weight_gap.max((na - nb).abs());
            }
            povms += 1;
        }
    }
    let pass = worst_infidelity <= 1e-10 && worst_weight_gap <= 1e-10;
    (
        pass,
        format!(
            "worst element infidelity {worst_infidelity:.3e}, worst weight gap \
             {worst_weight_gap:.3e} over {povms} measurements (cap 1e-10)"
        ),
    )
}

fn guarded(run: Criterion) -> (bool, String) {
    match catch_unwind(run) {
        Ok(verdict) => verdict,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic without message".into());
            (false, format!("panicked: {message}"))
        }
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 8] = [
        ("oracle equivalence", criterion_1_oracle_equivalence),
        ("measurement completeness", criterion_2_completeness),
        ("Schmidt rank bound", criterion_3_rank_bound),
        ("Bell analyzer", criterion_4_bell_analyzer),
        (
            "qubit ceiling and attainment",
            criterion_5_ceiling_and_attainment,
        ),
        ("swap and separable invariance", criterion_6_invariance),
        ("two-particle interference", criterion_7_interference),
        ("dilation round trip", criterion_8_dilation_round_trip),
    ];
    let mut failed = Vec::new();
    for (idx, (label, run)) in criteria.into_iter().enumerate() {
        let number = idx + 1;
        let (pass, detail) = guarded(run);
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] criterion {number} ({label}): {detail}");
        if !pass {
            failed.push(number);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
