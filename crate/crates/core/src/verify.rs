//! The self-check suite behind the `verify` command: the algebraic
//! identities the whole construction rests on, evaluated at f64. A fault can
//! be injected (wrong σ mapping) to demonstrate the suite actually trips.

use num_complex::Complex;
use serde::Serialize;

use crate::ctc::{time_travel_channel, verify_loop_identity, LoopCircuit};
use crate::kernel::{
    bell_state, f_map, g_map, gates, random_unitary, sigma, BellLabel, ProjectiveBasis,
};
use crate::linalg::ComplexMatrix;
use crate::protocol::build_relabel_table_with;
use crate::rng::RngStream;

/// Fault injection for negative controls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sabotage {
    #[default]
    None,
    /// Replace σ10 with a Hadamard, breaking the correction algebra.
    WrongSigma,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub tolerance: f64,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn sigma_impl(sabotage: Sabotage, label: BellLabel) -> ComplexMatrix<f64> {
    match sabotage {
        Sabotage::WrongSigma if label.index() == 2 => gates::h(),
        _ => sigma(label),
    }
}

/// Runs the whole suite. Identity checks use their pinned bounds (1e−12);
/// `tolerance` governs the loop-vs-partial-trace checks, whose random-unitary
/// instances are numerically conditioned a few orders above machine epsilon.
pub fn run_suite(tolerance: f64, seed: u64, sabotage: Sabotage) -> SuiteReport {
    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(CheckOutcome {
            name: name.to_string(),
            passed,
            detail,
        });
    };

    // F∘G on the maximally entangled pair is half the identity.
    {
        let f = f_map(&bell_state::<f64>(BellLabel::from_index(0)), 2, 2).unwrap();
        let g = g_map(&bell_state::<f64>(BellLabel::from_index(0)), 2, 2).unwrap();
        let err = f
            .mul(&g)
            .unwrap()
            .sub(&ComplexMatrix::identity(2).scale(Complex::new(0.5, 0.0)))
            .unwrap()
            .max_abs_entry();
        check(
            "duality_identity",
            err <= 1e-12,
            format!("max-entry error {err:.3e} (bound 1e-12)"),
        );
    }

    // The four Bell states form an orthonormal basis.
    {
        let result = std::panic::catch_unwind(ProjectiveBasis::<f64>::bell);
        let mut worst = 0.0f64;
        if result.is_ok() {
            for (i, a) in BellLabel::ALL.iter().enumerate() {
                for (j, b) in BellLabel::ALL.iter().enumerate() {
                    let g = bell_state::<f64>(*a).inner(&bell_state(*b)).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g - Complex::new(expect, 0.0)).norm());
                }
            }
        }
        check(
            "bell_orthonormality",
            result.is_ok() && worst <= 1e-12,
            format!("max Gram deviation {worst:.3e}"),
        );
    }

    // Every Bell outcome acts on a teleported qubit as ½σ up to phase, and
    // Ψ10 sends ∣x⟩ to ½∣x+1⟩ entry-exactly.
    {
        let mut ok = true;
        let mut worst_label = String::new();
        for l in BellLabel::ALL {
            let channel = time_travel_channel::<f64>(l);
            let target = sigma_impl(sabotage, l).scale(Complex::new(0.5, 0.0));
            if !channel.equal_up_to_phase(&target, 1e-12) {
                ok = false;
                worst_label = l.to_string();
            }
        }
        let c10 = time_travel_channel::<f64>(BellLabel::from_index(2));
        let exact = c10
            .sub(&sigma_impl(Sabotage::None, BellLabel::from_index(2)).scale(Complex::new(0.5, 0.0)))
            .unwrap()
            .max_abs_entry();
        check(
            "time_travel_channels",
            ok && exact <= 1e-15,
            if ok {
                format!("all four equal ½σ up to phase; Ψ10 entry error {exact:.3e}")
            } else {
                format!("channel for Ψ{worst_label} does not match ½σ{worst_label}")
            },
        );
    }

    // Conditioning the loop on Ψ00 is half the partial trace.
    {
        let cnot = LoopCircuit::new(gates::cnot::<f64>(), 1).unwrap();
        check(
            "loop_identity_cnot",
            verify_loop_identity(&cnot, tolerance),
            format!("CNOT loop within {tolerance:.1e}"),
        );
        let swap = LoopCircuit::new(gates::swap::<f64>(), 1).unwrap();
        check(
            "loop_identity_swap",
            verify_loop_identity(&swap, tolerance),
            format!("SWAP loop within {tolerance:.1e}"),
        );

        let mut rng = RngStream::new(seed, 0);
        let mut failures = 0usize;
        let mut total = 0usize;
        for qubits in [2usize, 3] {
            for trial in 0..20 {
                let u = random_unitary::<f64>(qubits, &mut rng);
                let circuit = LoopCircuit::new(u, trial % qubits).unwrap();
                total += 1;
                if !verify_loop_identity(&circuit, tolerance) {
                    failures += 1;
                }
            }
        }
        check(
            "loop_identity_random",
            failures == 0,
            format!("{}/{} random 2- and 3-qubit loops within {tolerance:.1e}", total - failures, total),
        );
    }

    // The 64-entry relabel table exists, is sound, and is bijective per key
    // pair. With a sabotaged σ the construction must fail.
    {
        let result = build_relabel_table_with(|l| sigma_impl(sabotage, l));
        check(
            "relabel_table",
            result.is_ok(),
            match &result {
                Ok(_) => "64 entries, sound and bijective per key pair".to_string(),
                Err(e) => format!("{e}"),
            },
        );
    }

    let passed = checks.iter().all(|c| c.passed);
    SuiteReport {
        tolerance,
        seed,
        passed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_clean() {
        let report = run_suite(1e-10, 2026, Sabotage::None);
        assert!(report.passed, "{}", report.to_json());
    }

    #[test]
    fn wrong_sigma_trips_the_suite() {
        let report = run_suite(1e-10, 2026, Sabotage::WrongSigma);
        assert!(!report.passed);
        let relabel = report
            .checks
            .iter()
            .find(|c| c.name == "relabel_table")
            .unwrap();
        assert!(!relabel.passed);
        let channels = report
            .checks
            .iter()
            .find(|c| c.name == "time_travel_channels")
            .unwrap();
        assert!(!channels.passed);
    }

    #[test]
    fn report_serializes_to_json() {
        let report = run_suite(1e-10, 1, Sabotage::None);
        let json = report.to_json();
        assert!(json.contains("duality_identity"));
    }
}
