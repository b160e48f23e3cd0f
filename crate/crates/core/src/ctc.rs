//! A backward-in-time wire realized by post-selected teleportation.
//!
//! Take a unitary U on n+1 qubits and imagine one of its wires looped back
//! from output to input. Algebraically the loop is the partial trace of U
//! over that wire. Physically the loop is simulated causally: create a Ψ00
//! pair, feed one half into U's loop input, and Bell-measure U's loop output
//! together with the other half. Whenever the measurement projects onto Ψ00,
//! the arrangement acts on the open wires exactly as ½ · (partial trace of
//! U); on outcome Ψxy it acts as the σxy-twisted partial trace instead, so
//! every outcome has a definite effective linear map and honest statistics.
//!
//! Wiring is fixed as follows: the measured pair is (U's loop output, spare
//! pair half), in that order, and the pair half entering U is the one *not*
//! measured. With U = CNOT (loop on the target wire) this wiring reproduces
//! the outcome statistics (|α|², 0, |β|², 0) for a control state
//! α∣0⟩ + β∣1⟩, which is what pins it down.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::kernel::{
    apply_gate, bell_state, f_map, g_map, measure_factor_out, wire_permutation, BellLabel,
    ProjectiveBasis,
};
use crate::linalg::{ComplexMatrix, StateVector, TracePosition};
use crate::rng::RngStream;
use crate::scalar::Real;

/// A unitary with one designated wire fed back on itself.
#[derive(Clone, Debug)]
pub struct LoopCircuit<T> {
    u: ComplexMatrix<T>,
    loop_qubit: usize,
    num_qubits: usize,
}

impl<T: Real> LoopCircuit<T> {
    /// Validates that `u` is unitary (‖U†U − I‖_F ≤ 1e−10 at f64) and acts on
    /// at least two qubits, one of which is the loop wire.
    pub fn new(u: ComplexMatrix<T>, loop_qubit: usize) -> Result<Self> {
        if !u.is_square() || !u.rows().is_power_of_two() || u.rows() < 4 {
            return Err(Error::DimensionMismatch(format!(
                "loop unitary must act on ≥ 2 qubits, got {}×{}",
                u.rows(),
                u.cols()
            )));
        }
        let num_qubits = u.rows().trailing_zeros() as usize;
        if loop_qubit >= num_qubits {
            return Err(Error::InvalidTargets(format!(
                "loop qubit {loop_qubit} out of range for {num_qubits} wires"
            )));
        }
        let tol = T::from_f64_lossy(1e-10).max(T::epsilon() * T::from_f64_lossy(100.0));
        u.check_unitary(tol)?;
        Ok(Self {
            u,
            loop_qubit,
            num_qubits,
        })
    }

    pub fn unitary(&self) -> &ComplexMatrix<T> {
        &self.u
    }

    pub fn loop_qubit(&self) -> usize {
        self.loop_qubit
    }

    /// Total wires of U, loop included.
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn open_qubits(&self) -> usize {
        self.num_qubits - 1
    }

    pub fn open_dim(&self) -> usize {
        1 << self.open_qubits()
    }

    /// U expressed with its wires reordered to (open wires…, loop wire).
    fn loop_last(&self) -> ComplexMatrix<T> {
        if self.loop_qubit == self.num_qubits - 1 {
            return self.u.clone();
        }
        let mut order: Vec<usize> = (0..self.num_qubits)
            .filter(|&q| q != self.loop_qubit)
            .collect();
        order.push(self.loop_qubit);
        let p = wire_permutation::<T>(self.num_qubits, &order);
        p.mul(&self.u)
            .and_then(|m| m.mul(&p.dagger()))
            .expect("permutation conjugation preserves shape")
    }

    /// Per-outcome analysis: the effective operator, its probability on an
    /// optional input, and the fitted scalar relating it to the (σ-twisted)
    /// partial trace of U.
    pub fn postselection_report(
        &self,
        outcome: BellLabel,
        input: Option<&StateVector<T>>,
    ) -> Result<PostselectionReport<T>> {
        let eff = effective_operator(self, outcome);
        let reference = sigma_twisted_partial_trace(self, outcome);
        let hs = |a: &ComplexMatrix<T>, b: &ComplexMatrix<T>| {
            a.entries()
                .iter()
                .zip(b.entries())
                .fold(Complex::<T>::zero(), |acc, (x, y)| acc + x.conj() * *y)
        };
        let rr = hs(&reference, &reference);
        let scalar_factor = if rr.norm() <= T::from_f64_lossy(1e-24) {
            Complex::zero()
        } else {
            hs(&reference, &eff) / rr
        };
        let outcome_probability = match input {
            Some(psi) => {
                let mapped = eff.mul_state(psi)?;
                Some(mapped.norm() * mapped.norm())
            }
            None => None,
        };
        Ok(PostselectionReport {
            outcome_label: outcome,
            effective_operator: eff,
            outcome_probability,
            scalar_factor,
        })
    }
}

/// Analysis of one Bell outcome of the loop measurement.
#[derive(Clone, Debug)]
pub struct PostselectionReport<T> {
    pub outcome_label: BellLabel,
    /// Unnormalized effective map on the open wires (it keeps the overall ½
    /// of the construction).
    pub effective_operator: ComplexMatrix<T>,
    /// ‖E·input‖² when an input was supplied.
    pub outcome_probability: Option<T>,
    /// Least-squares c with `effective_operator ≈ c · twisted-partial-trace`;
    /// ½ in exact arithmetic, 0 when the reference vanishes.
    pub scalar_factor: Complex<T>,
}

/// Runs one shot of the looped circuit: prepares `input ⊗ Ψ00`, wires one
/// pair half into U's loop input, applies U, Bell-measures (loop output,
/// spare half), and returns the outcome with the renormalized residual on
/// the open wires.
pub fn simulate_loop<T: Real>(
    circuit: &LoopCircuit<T>,
    input: &StateVector<T>,
    rng: &mut RngStream,
) -> Result<(BellLabel, StateVector<T>)> {
    if input.num_qubits() != circuit.open_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "input has {} qubits but the circuit has {} open wires",
            input.num_qubits(),
            circuit.open_qubits()
        )));
    }
    let w = circuit.num_qubits();
    // Register: open wires at 0..w-1, loop wire at w-1, spare half at w.
    let state = input.tensor(&bell_state(BellLabel::new(0, 0)?));
    let mut targets = Vec::with_capacity(w);
    for i in 0..w {
        targets.push(match i.cmp(&circuit.loop_qubit) {
            std::cmp::Ordering::Less => i,
            std::cmp::Ordering::Equal => w - 1,
            std::cmp::Ordering::Greater => i - 1,
        });
    }
    let evolved = apply_gate(&state, &circuit.u, &targets)?;
    let basis = ProjectiveBasis::bell();
    let (outcome, residual) = measure_factor_out(&evolved, &basis, &[w - 1, w], rng)?;
    Ok((BellLabel::from_index(outcome), residual))
}

/// The (unnormalized) linear map induced on the open wires by conditioning
/// the loop measurement on `outcome`, computed by direct index contraction:
///
///   E[b][a] = (1/√2) · Σᵢ𝓆 conj(Ψ_outcome[(i, q)]) · U[(b, i)][(a, q)]
///
/// with i the loop output index and q the loop input index.
pub fn effective_operator<T: Real>(circuit: &LoopCircuit<T>, outcome: BellLabel) -> ComplexMatrix<T> {
    let w = circuit.num_qubits();
    let dim = 1usize << w;
    let open_dim = circuit.open_dim();
    let loop_pos = w - 1 - circuit.loop_qubit;
    let low_mask = (1usize << loop_pos) - 1;
    let split = |idx: usize| -> (usize, usize) {
        let bit = (idx >> loop_pos) & 1;
        let open = ((idx >> (loop_pos + 1)) << loop_pos) | (idx & low_mask);
        (open, bit)
    };
    let bell = bell_state::<T>(outcome);
    let scale = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    let mut e = ComplexMatrix::zeros(open_dim, open_dim);
    for r in 0..dim {
        let (bo, i) = split(r);
        for c in 0..dim {
            let u_entry = circuit.u[(r, c)];
            if u_entry.is_zero() {
                continue;
            }
            let (ao, q) = split(c);
            e[(bo, ao)] += bell.amp((i << 1) | q).conj() * u_entry * scale;
        }
    }
    e
}

/// The σ-twisted partial trace tr_loop(U · (I ⊗ S_outcome†)), with S the
/// outcome's √2-scaled coefficient matrix (so S† = √2·G_{Ψ_outcome*}); the
/// effective operator equals exactly half of this for every outcome.
pub fn sigma_twisted_partial_trace<T: Real>(
    circuit: &LoopCircuit<T>,
    outcome: BellLabel,
) -> ComplexMatrix<T> {
    let u = circuit.loop_last();
    let s_dag = g_map(&bell_state::<T>(outcome), 2, 2)
        .expect("bell states split 2×2")
        .scale(Complex::new(T::SQRT_2(), T::zero()));
    let twist = ComplexMatrix::identity(circuit.open_dim()).tensor(&s_dag);
    u.mul(&twist)
        .expect("same dimension")
        .partial_trace(2, TracePosition::Last)
        .expect("loop wire is last")
}

/// The single-qubit map a Bell outcome applies to a teleported state:
/// F_{Ψ00} ∘ G_{Ψ_outcome*}. Equals ½·σ(outcome) up to a global phase.
pub fn time_travel_channel<T: Real>(outcome: BellLabel) -> ComplexMatrix<T> {
    let f = f_map(&bell_state::<T>(BellLabel::from_index(0)), 2, 2).expect("2×2 split");
    let g = g_map(&bell_state::<T>(outcome), 2, 2).expect("2×2 split");
    f.mul(&g).expect("composable")
}

/// Checks the loop identity: conditioning on Ψ00 acts as ½ · tr_loop(U),
/// where the right-hand side is computed independently through the
/// permutation + partial-trace route.
pub fn verify_loop_identity<T: Real>(circuit: &LoopCircuit<T>, tol: T) -> bool {
    let eff = effective_operator(circuit, BellLabel::from_index(0));
    let ptrace = circuit
        .loop_last()
        .partial_trace(2, TracePosition::Last)
        .expect("loop wire is last");
    let half = ptrace.scale(Complex::new(T::from_f64_lossy(0.5), T::zero()));
    match eff.sub(&half) {
        Ok(diff) => diff.frobenius_norm() <= tol,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gates, random_unitary, sigma};

    type M = ComplexMatrix<f64>;
    type S = StateVector<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn label(x: u8, y: u8) -> BellLabel {
        BellLabel::new(x, y).unwrap()
    }

    fn cnot_loop() -> LoopCircuit<f64> {
        LoopCircuit::new(gates::cnot(), 1).unwrap()
    }

    fn swap_loop() -> LoopCircuit<f64> {
        LoopCircuit::new(gates::swap(), 1).unwrap()
    }

    #[test]
    fn rejects_non_unitary_and_bad_loop_wire() {
        let mut m = gates::cnot::<f64>();
        m[(0, 0)] = c(0.5, 0.0);
        assert!(matches!(LoopCircuit::new(m, 0), Err(Error::NotUnitary { .. })));
        assert!(LoopCircuit::new(gates::cnot::<f64>(), 2).is_err());
        assert!(LoopCircuit::new(M::identity(2), 0).is_err());
    }

    #[test]
    fn effective_operator_of_cnot_is_projector_onto_zero() {
        let e = effective_operator(&cnot_loop(), label(0, 0));
        assert_eq!(e.rows(), 2);
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(e[(1, 1)].norm() < 1e-12);
        assert!(e[(0, 1)].norm() < 1e-12);
        assert!(e[(1, 0)].norm() < 1e-12);
    }

    #[test]
    fn effective_operator_of_swap_is_half_identity() {
        let e = effective_operator(&swap_loop(), label(0, 0));
        let half = M::identity(2).scale(c(0.5, 0.0));
        assert!(e.sub(&half).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn loop_identity_for_named_and_random_unitaries() {
        assert!(verify_loop_identity(&cnot_loop(), 1e-10));
        assert!(verify_loop_identity(&swap_loop(), 1e-10));
        let mut rng = RngStream::new(404, 0);
        for qubits in [2usize, 3] {
            for trial in 0..20 {
                let u = random_unitary::<f64>(qubits, &mut rng);
                let loop_qubit = trial % qubits;
                let circuit = LoopCircuit::new(u, loop_qubit).unwrap();
                assert!(
                    verify_loop_identity(&circuit, 1e-10),
                    "{qubits} qubits, loop at {loop_qubit}"
                );
            }
        }
    }

    #[test]
    fn effective_operator_is_half_the_twisted_trace_for_every_outcome() {
        let mut rng = RngStream::new(405, 0);
        for _ in 0..10 {
            let u = random_unitary::<f64>(3, &mut rng);
            let circuit = LoopCircuit::new(u, 1).unwrap();
            for outcome in BellLabel::ALL {
                let e = effective_operator(&circuit, outcome);
                let r = sigma_twisted_partial_trace(&circuit, outcome).scale(c(0.5, 0.0));
                assert!(e.sub(&r).unwrap().frobenius_norm() < 1e-12, "outcome {outcome}");
            }
        }
    }

    #[test]
    fn swap_loop_teleports_any_input() {
        let psi = S::new(1, vec![c(0.3, 0.4), c(-0.2, 0.84)])
            .unwrap()
            .normalized()
            .unwrap();
        let circuit = swap_loop();
        for stream in 0..32 {
            let mut rng = RngStream::new(1001, stream);
            let (outcome, residual) = simulate_loop(&circuit, &psi, &mut rng).unwrap();
            if outcome == label(0, 0) {
                assert!(residual.equal_up_to_phase(&psi, 1e-10));
            }
        }
    }

    #[test]
    fn cnot_loop_with_zero_control_always_succeeds() {
        let circuit = cnot_loop();
        for stream in 0..16 {
            let mut rng = RngStream::new(55, stream);
            let (outcome, residual) = simulate_loop(&circuit, &S::basis(1, 0), &mut rng).unwrap();
            assert_eq!(outcome, label(0, 0));
            assert!(residual.equal_up_to_phase(&S::basis(1, 0), 1e-12));
        }
    }

    #[test]
    fn cnot_loop_outcome_determines_residual() {
        // Residual ∣0⟩ ⇔ outcome Ψ00 and residual ∣1⟩ ⇔ outcome Ψ10,
        // and the other outcomes never occur.
        let plus = S::new(1, vec![c(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        let circuit = cnot_loop();
        let mut seen = [0u32; 4];
        for stream in 0..256 {
            let mut rng = RngStream::new(56, stream);
            let (outcome, residual) = simulate_loop(&circuit, &plus, &mut rng).unwrap();
            seen[outcome.index()] += 1;
            match outcome.index() {
                0 => assert!(residual.equal_up_to_phase(&S::basis(1, 0), 1e-12)),
                2 => assert!(residual.equal_up_to_phase(&S::basis(1, 1), 1e-12)),
                other => panic!("outcome Ψ{other:02b} must not occur"),
            }
        }
        assert!(seen[0] > 0 && seen[2] > 0);
        assert_eq!(seen[1] + seen[3], 0);
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let mut rng = RngStream::new(77, 7);
        for _ in 0..5 {
            let u = random_unitary::<f64>(2, &mut rng);
            let circuit = LoopCircuit::new(u, 0).unwrap();
            let (a, b) = rng.normal_pair();
            let (cc, d) = rng.normal_pair();
            let psi = S::new(1, vec![c(a, b), c(cc, d)]).unwrap().normalized().unwrap();
            let mut total = 0.0;
            for outcome in BellLabel::ALL {
                let mapped = effective_operator(&circuit, outcome).mul_state(&psi).unwrap();
                total += mapped.norm().powi(2);
            }
            assert!((total - 1.0).abs() < 1e-10, "total {total}");
        }
    }

    #[test]
    fn effective_operator_is_linear() {
        let mut rng = RngStream::new(78, 0);
        let u = random_unitary::<f64>(2, &mut rng);
        let circuit = LoopCircuit::new(u, 1).unwrap();
        let e = effective_operator(&circuit, label(0, 0));
        let psi = S::new(1, vec![c(0.1, -0.3), c(0.7, 0.2)]).unwrap();
        let phi = S::new(1, vec![c(-0.5, 0.1), c(0.2, 0.6)]).unwrap();
        let (ka, kb) = (c(0.3, 0.9), c(-1.2, 0.4));
        let combo = S::new(
            1,
            psi.amplitudes()
                .iter()
                .zip(phi.amplitudes())
                .map(|(&a, &b)| a * ka + b * kb)
                .collect(),
        )
        .unwrap();
        let lhs = e.mul_state(&combo).unwrap();
        let ea = e.mul_state(&psi).unwrap().scale(ka);
        let eb = e.mul_state(&phi).unwrap().scale(kb);
        for i in 0..2 {
            let rhs = ea.amp(i) + eb.amp(i);
            assert!((lhs.amp(i) - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn channels_match_sigma_up_to_phase() {
        // Ψ00: exactly ½I. Ψ10: ∣x⟩ ↦ ½∣x+1⟩.
        let c00 = time_travel_channel::<f64>(label(0, 0));
        assert!(c00
            .sub(&M::identity(2).scale(c(0.5, 0.0)))
            .unwrap()
            .max_abs_entry()
            < 1e-15);

        let c10 = time_travel_channel::<f64>(label(1, 0));
        let half_x = gates::x::<f64>().scale(c(0.5, 0.0));
        assert!(c10.sub(&half_x).unwrap().max_abs_entry() < 1e-15);

        for l in BellLabel::ALL {
            let ch = time_travel_channel::<f64>(l);
            let target = sigma::<f64>(l).scale(c(0.5, 0.0));
            assert!(ch.equal_up_to_phase(&target, 1e-12), "outcome {l}");
        }
    }

    #[test]
    fn report_scalar_factor_is_one_half() {
        let report = cnot_loop()
            .postselection_report(label(0, 0), Some(&S::basis(1, 0)))
            .unwrap();
        assert!((report.scalar_factor - c(0.5, 0.0)).norm() < 1e-12);
        assert!((report.outcome_probability.unwrap() - 1.0).abs() < 1e-12);
        let half_tr = gates::cnot::<f64>()
            .partial_trace(2, TracePosition::Last)
            .unwrap()
            .scale(c(0.5, 0.0));
        assert!(report
            .effective_operator
            .sub(&half_tr)
            .unwrap()
            .frobenius_norm()
            < 1e-10);
    }

    #[test]
    fn simulate_rejects_wrong_input_size() {
        let circuit = cnot_loop();
        let mut rng = RngStream::new(1, 1);
        let two_qubit = S::basis(2, 0);
        assert!(simulate_loop(&circuit, &two_qubit, &mut rng).is_err());
    }

    #[test]
    fn plus_state_is_the_unique_consistent_loop_state() {
        // Trace the CNOT over its control: the operator on the looping wire
        // is 2∣+⟩⟨+∣, whose only fixed ray with a nonzero factor is ∣+⟩.
        let r = gates::cnot::<f64>()
            .partial_trace(2, TracePosition::First)
            .unwrap();
        for row in 0..2 {
            for col in 0..2 {
                assert!((r[(row, col)] - c(1.0, 0.0)).norm() < 1e-15);
            }
        }
        let plus = S::new(1, vec![c(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        let steps = 24usize;
        for i in 0..=steps {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
            for j in 0..steps {
                let phase = std::f64::consts::TAU * j as f64 / steps as f64;
                let psi = S::new(
                    1,
                    vec![
                        c(theta.cos(), 0.0),
                        Complex::from_polar(theta.sin(), phase),
                    ],
                )
                .unwrap();
                let mapped = r.mul_state(&psi).unwrap();
                let is_fixed = mapped.norm() > 1e-9
                    && mapped.normalized().unwrap().equal_up_to_phase(&psi, 1e-6);
                assert_eq!(
                    is_fixed,
                    psi.equal_up_to_phase(&plus, 1e-9),
                    "θ={theta} φ={phase}"
                );
            }
        }
        // ∣0⟩−∣1⟩ is annihilated outright.
        let minus = S::new(
            1,
            vec![
                c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                c(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ],
        )
        .unwrap();
        assert!(r.mul_state(&minus).unwrap().norm() < 1e-15);
    }
}
