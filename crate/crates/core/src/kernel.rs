//! Qubit registers, standard gates, the Bell basis, channel–state duality
//! maps, and seeded projective measurement.
//!
//! The Bell basis is Ψxy = (∣x⟩∣y⟩ + (−1)ʸ∣x+1⟩∣y+1⟩)/√2 with sums mod 2, so
//!
//! * Ψ00 = (∣00⟩ + ∣11⟩)/√2
//! * Ψ01 = (∣01⟩ − ∣10⟩)/√2
//! * Ψ10 = (∣10⟩ + ∣01⟩)/√2
//! * Ψ11 = (∣11⟩ − ∣00⟩)/√2
//!
//! Correction operators carry the same two-bit labels: σ00 = I, σ10 = X,
//! σ01 = Y, σ11 = Z. Correction identities hold up to a global phase (the Y
//! slot contributes ±i), which is why comparisons throughout the crate are
//! phase-insensitive.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hist::Histogram;
use crate::linalg::{ComplexMatrix, StateVector};
use crate::rng::RngStream;
use crate::scalar::Real;

/// Two-bit label (x, y) naming the Bell basis element Ψxy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellLabel {
    x: u8,
    y: u8,
}

impl BellLabel {
    /// All four labels in index order 00, 01, 10, 11.
    pub const ALL: [BellLabel; 4] = [
        BellLabel { x: 0, y: 0 },
        BellLabel { x: 0, y: 1 },
        BellLabel { x: 1, y: 0 },
        BellLabel { x: 1, y: 1 },
    ];

    pub fn new(x: u8, y: u8) -> Result<Self> {
        if x > 1 || y > 1 {
            return Err(Error::InvalidBellLabel { x, y });
        }
        Ok(Self { x, y })
    }

    /// Label for outcome index 0..=3 (x is the high bit).
    pub fn from_index(index: usize) -> Self {
        assert!(index < 4, "bell outcome index out of range");
        Self {
            x: (index >> 1) as u8,
            y: (index & 1) as u8,
        }
    }

    pub fn index(self) -> usize {
        (self.x as usize) << 1 | self.y as usize
    }

    pub fn x(self) -> u8 {
        self.x
    }

    pub fn y(self) -> u8 {
        self.y
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.x, self.y)
    }
}

impl Serialize for BellLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        (self.x, self.y).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BellLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let (x, y) = <(u8, u8)>::deserialize(deserializer)?;
        BellLabel::new(x, y).map_err(|_| D::Error::custom(format!("invalid bell label ({x},{y})")))
    }
}

/// Standard gate matrices.
pub mod gates {
    use super::*;

    pub fn x<T: Real>() -> ComplexMatrix<T> {
        let (o, z) = (Complex::<T>::one(), Complex::<T>::zero());
        ComplexMatrix::from_nested(vec![vec![z, o], vec![o, z]])
    }

    pub fn y<T: Real>() -> ComplexMatrix<T> {
        let z = Complex::<T>::zero();
        let i = Complex::<T>::i();
        ComplexMatrix::from_nested(vec![vec![z, -i], vec![i, z]])
    }

    pub fn z<T: Real>() -> ComplexMatrix<T> {
        let (o, zr) = (Complex::<T>::one(), Complex::<T>::zero());
        ComplexMatrix::from_nested(vec![vec![o, zr], vec![zr, -o]])
    }

    pub fn h<T: Real>() -> ComplexMatrix<T> {
        let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        ComplexMatrix::from_nested(vec![vec![s, s], vec![s, -s]])
    }

    /// CNOT with the control as the high-order qubit: ∣x⟩∣y⟩ ↦ ∣x⟩∣x+y⟩.
    pub fn cnot<T: Real>() -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(4, 4, |r, c| {
            let (cx, cy) = (c >> 1, c & 1);
            if r == (cx << 1 | (cx ^ cy)) {
                Complex::one()
            } else {
                Complex::zero()
            }
        })
    }

    /// SWAP of two qubits.
    pub fn swap<T: Real>() -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(4, 4, |r, c| {
            let (cx, cy) = (c >> 1, c & 1);
            if r == (cy << 1 | cx) {
                Complex::one()
            } else {
                Complex::zero()
            }
        })
    }
}

/// The Bell state Ψxy.
pub fn bell_state<T: Real>(label: BellLabel) -> StateVector<T> {
    let s = T::FRAC_1_SQRT_2();
    let (x, y) = (label.x() as usize, label.y() as usize);
    let mut amps = vec![Complex::<T>::zero(); 4];
    amps[(x << 1) | y] = Complex::new(s, T::zero());
    let sign = if label.y() == 1 { -s } else { s };
    amps[((1 - x) << 1) | (1 - y)] = Complex::new(sign, T::zero());
    StateVector::new(2, amps).expect("four amplitudes")
}

/// The correction operator σxy (unitary and hermitian).
pub fn sigma<T: Real>(label: BellLabel) -> ComplexMatrix<T> {
    match (label.x(), label.y()) {
        (0, 0) => ComplexMatrix::identity(2),
        (1, 0) => gates::x(),
        (0, 1) => gates::y(),
        _ => gates::z(),
    }
}

/// Identifies a bipartite state Φ = Σ c_ab ∣a⟩_H ∣b⟩_K (split dims d_h, d_k)
/// with the map H* → K it induces: the returned d_k×d_h matrix has
/// M[b][a] = c_ab.
pub fn f_map<T: Real>(phi: &StateVector<T>, d_h: usize, d_k: usize) -> Result<ComplexMatrix<T>> {
    check_split(phi, d_h, d_k)?;
    Ok(ComplexMatrix::from_fn(d_k, d_h, |b, a| phi.amp(a * d_k + b)))
}

/// Identifies the **bra** of a bipartite state with the map H → K* it
/// induces. The argument is the ket; conjugation happens here, so the
/// returned d_k×d_h matrix has M[b][a] = conj(c_ab).
pub fn g_map<T: Real>(psi: &StateVector<T>, d_h: usize, d_k: usize) -> Result<ComplexMatrix<T>> {
    check_split(psi, d_h, d_k)?;
    Ok(ComplexMatrix::from_fn(d_k, d_h, |b, a| {
        psi.amp(a * d_k + b).conj()
    }))
}

/// Reconstructs the bipartite state from its induced map; the inverse of
/// [`f_map`]. The matrix dimensions must multiply to a power of two.
pub fn f_map_inverse<T: Real>(m: &ComplexMatrix<T>) -> Result<StateVector<T>> {
    let (d_k, d_h) = (m.rows(), m.cols());
    let total = d_h * d_k;
    if !total.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "{d_h}×{d_k} split is not a qubit register"
        )));
    }
    let num_qubits = total.trailing_zeros() as usize;
    let mut amps = vec![Complex::<T>::zero(); total];
    for a in 0..d_h {
        for b in 0..d_k {
            amps[a * d_k + b] = m[(b, a)];
        }
    }
    StateVector::new(num_qubits, amps)
}

fn check_split<T: Real>(phi: &StateVector<T>, d_h: usize, d_k: usize) -> Result<()> {
    if d_h == 0 || d_k == 0 || d_h * d_k != phi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "split ({d_h}, {d_k}) inconsistent with {} amplitudes",
            phi.dim()
        )));
    }
    Ok(())
}

/// Applies `gate` to the listed qubits, in listed order (the first target is
/// the gate's high-order qubit), identity elsewhere.
pub fn apply_gate<T: Real>(
    state: &StateVector<T>,
    gate: &ComplexMatrix<T>,
    targets: &[usize],
) -> Result<StateVector<T>> {
    let n = state.num_qubits();
    let k = targets.len();
    check_targets(n, targets)?;
    if !gate.is_square() || gate.rows() != 1 << k {
        return Err(Error::DimensionMismatch(format!(
            "gate is {}×{} but {} targets need {}×{}",
            gate.rows(),
            gate.cols(),
            k,
            1 << k,
            1 << k
        )));
    }

    // Bit position (from the LSB) of each qubit index; qubit 0 is the MSB.
    let t_shift: Vec<usize> = targets.iter().map(|&q| n - 1 - q).collect();
    let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
    let r_shift: Vec<usize> = rest.iter().map(|&q| n - 1 - q).collect();

    let mut out = vec![Complex::<T>::zero(); state.dim()];
    let mut gathered = vec![Complex::<T>::zero(); 1 << k];
    for env in 0..1usize << (n - k) {
        let mut base = 0usize;
        for (j, &shift) in r_shift.iter().enumerate() {
            base |= ((env >> (n - k - 1 - j)) & 1) << shift;
        }
        for (local, slot) in gathered.iter_mut().enumerate() {
            *slot = state.amp(scatter(base, local, &t_shift));
        }
        for row in 0..1usize << k {
            let mut acc = Complex::<T>::zero();
            for (col, &amp) in gathered.iter().enumerate() {
                acc += gate[(row, col)] * amp;
            }
            out[scatter(base, row, &t_shift)] = acc;
        }
    }
    StateVector::new(n, out)
}

/// Inserts the bits of `local` (MSB first, following `t_shift` order) into
/// `base`.
fn scatter(base: usize, local: usize, t_shift: &[usize]) -> usize {
    let k = t_shift.len();
    let mut idx = base;
    for (j, &shift) in t_shift.iter().enumerate() {
        idx |= ((local >> (k - 1 - j)) & 1) << shift;
    }
    idx
}

fn check_targets(n: usize, targets: &[usize]) -> Result<()> {
    if targets.iter().any(|&q| q >= n) {
        return Err(Error::InvalidTargets(format!(
            "target out of range for {n} qubits: {targets:?}"
        )));
    }
    for (i, &q) in targets.iter().enumerate() {
        if targets[i + 1..].contains(&q) {
            return Err(Error::InvalidTargets(format!(
                "duplicate target {q} in {targets:?}"
            )));
        }
    }
    Ok(())
}

/// Permutation operator that relabels wires: new qubit `j` carries what old
/// qubit `new_to_old[j]` carried.
pub fn wire_permutation<T: Real>(num_qubits: usize, new_to_old: &[usize]) -> ComplexMatrix<T> {
    assert_eq!(new_to_old.len(), num_qubits);
    let mut seen = vec![false; num_qubits];
    for &q in new_to_old {
        assert!(q < num_qubits && !seen[q], "not a permutation");
        seen[q] = true;
    }
    let dim = 1 << num_qubits;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut r = 0usize;
        for (j, &old) in new_to_old.iter().enumerate() {
            let bit = (c >> (num_qubits - 1 - old)) & 1;
            r |= bit << (num_qubits - 1 - j);
        }
        m[(r, c)] = Complex::one();
    }
    m
}

/// Validated orthonormal, complete projective measurement basis on a block
/// of qubits. Orthonormality is checked once here, not per shot.
#[derive(Clone, Debug)]
pub struct ProjectiveBasis<T> {
    num_target_qubits: usize,
    states: Vec<StateVector<T>>,
    labels: Vec<String>,
}

impl<T: Real> ProjectiveBasis<T> {
    /// Checks that the states form an orthonormal basis of their 2^k-dim
    /// space (Gram matrix within 1e−10 of the identity at f64; the bound is
    /// widened to ~100·ε for coarser scalars).
    pub fn new(states: Vec<StateVector<T>>, labels: Vec<String>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidBasis("no basis states".into()));
        }
        let k = states[0].num_qubits();
        if states.iter().any(|s| s.num_qubits() != k) {
            return Err(Error::InvalidBasis("mixed state dimensions".into()));
        }
        if states.len() != 1 << k {
            return Err(Error::InvalidBasis(format!(
                "{} states cannot be complete on {} qubits",
                states.len(),
                k
            )));
        }
        if labels.len() != states.len() {
            return Err(Error::InvalidBasis("label count mismatch".into()));
        }
        let tol = T::from_f64_lossy(1e-10).max(T::epsilon() * T::from_f64_lossy(100.0));
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let g = a.inner(b)?;
                let expect = if i == j { T::one() } else { T::zero() };
                let dev = (Complex::new(expect, T::zero()) - g).norm();
                if dev > tol {
                    return Err(Error::InvalidBasis(format!(
                        "Gram deviation {:.3e} at ({i}, {j})",
                        dev.as_f64()
                    )));
                }
            }
        }
        Ok(Self {
            num_target_qubits: k,
            states,
            labels,
        })
    }

    /// The four Bell states, labeled 00, 01, 10, 11.
    pub fn bell() -> Self {
        let states = BellLabel::ALL.iter().map(|&l| bell_state(l)).collect();
        let labels = BellLabel::ALL.iter().map(|l| l.to_string()).collect();
        Self::new(states, labels).expect("bell basis is orthonormal")
    }

    /// Computational basis on `k` qubits, labeled by bit strings.
    pub fn computational(k: usize) -> Self {
        let states = (0..1 << k).map(|i| StateVector::basis(k, i)).collect();
        let labels = (0..1usize << k).map(|i| format!("{i:0k$b}")).collect();
        Self::new(states, labels).expect("computational basis is orthonormal")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn target_qubits(&self) -> usize {
        self.num_target_qubits
    }

    pub fn states(&self) -> &[StateVector<T>] {
        &self.states
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// One sampled projective measurement outcome.
#[derive(Clone, Debug)]
pub struct MeasurementResult<T> {
    /// Index into the basis that was measured.
    pub outcome_index: usize,
    /// Born probability of the projected component before renormalization.
    pub probability: T,
    /// Renormalized post-measurement state on all qubits.
    pub post_state: StateVector<T>,
}

/// Unnormalized residual amplitudes on the complement qubits, one vector per
/// basis outcome. `‖residual_k‖²` is the Born probability of outcome k.
fn outcome_residuals<T: Real>(
    state: &StateVector<T>,
    basis: &ProjectiveBasis<T>,
    targets: &[usize],
) -> Result<Vec<Vec<Complex<T>>>> {
    let n = state.num_qubits();
    let k = basis.target_qubits();
    check_targets(n, targets)?;
    if targets.len() != k {
        return Err(Error::InvalidTargets(format!(
            "basis covers {k} qubits but {} targets given",
            targets.len()
        )));
    }
    let t_shift: Vec<usize> = targets.iter().map(|&q| n - 1 - q).collect();
    let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
    let r_shift: Vec<usize> = rest.iter().map(|&q| n - 1 - q).collect();

    let env_count = 1usize << (n - k);
    let mut residuals = Vec::with_capacity(basis.len());
    for b in basis.states() {
        let mut residual = vec![Complex::<T>::zero(); env_count];
        for (env, slot) in residual.iter_mut().enumerate() {
            let mut base = 0usize;
            for (j, &shift) in r_shift.iter().enumerate() {
                base |= ((env >> (n - k - 1 - j)) & 1) << shift;
            }
            let mut acc = Complex::<T>::zero();
            for t in 0..1usize << k {
                acc += b.amp(t).conj() * state.amp(scatter(base, t, &t_shift));
            }
            *slot = acc;
        }
        residuals.push(residual);
    }
    Ok(residuals)
}

fn born_probabilities<T: Real>(residuals: &[Vec<Complex<T>>]) -> Result<Vec<T>> {
    let probs: Vec<T> = residuals
        .iter()
        .map(|r| r.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()))
        .collect();
    let total = probs.iter().fold(T::zero(), |acc, &p| acc + p);
    let dev = (total - T::one()).abs();
    if dev > T::from_f64_lossy(1e-6) {
        return Err(Error::NotNormalized {
            deviation: dev.as_f64(),
        });
    }
    Ok(probs)
}

/// Exact Born distribution of `state` over the basis outcomes on `targets`.
pub fn born_distribution<T: Real>(
    state: &StateVector<T>,
    basis: &ProjectiveBasis<T>,
    targets: &[usize],
) -> Result<Histogram<T>> {
    let residuals = outcome_residuals(state, basis, targets)?;
    let probs = born_probabilities(&residuals)?;
    Ok(Histogram::exact(basis.labels().to_vec(), probs))
}

/// Samples one outcome with Born probability and returns the renormalized
/// post-measurement state on **all** qubits (the measured block collapses
/// onto the selected basis state).
pub fn measure_in_basis<T: Real>(
    state: &StateVector<T>,
    basis: &ProjectiveBasis<T>,
    targets: &[usize],
    rng: &mut RngStream,
) -> Result<MeasurementResult<T>> {
    let residuals = outcome_residuals(state, basis, targets)?;
    let probs = born_probabilities(&residuals)?;
    let outcome = rng.sample_index(&probs.iter().map(|p| p.as_f64()).collect::<Vec<_>>());

    let n = state.num_qubits();
    let k = basis.target_qubits();
    let t_shift: Vec<usize> = targets.iter().map(|&q| n - 1 - q).collect();
    let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
    let r_shift: Vec<usize> = rest.iter().map(|&q| n - 1 - q).collect();

    let inv = Complex::new(T::one() / probs[outcome].sqrt(), T::zero());
    let picked = &basis.states()[outcome];
    let mut amps = vec![Complex::<T>::zero(); state.dim()];
    for (env, &res) in residuals[outcome].iter().enumerate() {
        let mut base = 0usize;
        for (j, &shift) in r_shift.iter().enumerate() {
            base |= ((env >> (n - k - 1 - j)) & 1) << shift;
        }
        for t in 0..1usize << k {
            amps[scatter(base, t, &t_shift)] = picked.amp(t) * res * inv;
        }
    }
    Ok(MeasurementResult {
        outcome_index: outcome,
        probability: probs[outcome],
        post_state: StateVector::new(n, amps)?,
    })
}

/// Like [`measure_in_basis`], but drops the measured block (whose state is
/// the selected basis element) and returns the renormalized residual on the
/// remaining qubits, in their original relative order.
pub fn measure_factor_out<T: Real>(
    state: &StateVector<T>,
    basis: &ProjectiveBasis<T>,
    targets: &[usize],
    rng: &mut RngStream,
) -> Result<(usize, StateVector<T>)> {
    let residuals = outcome_residuals(state, basis, targets)?;
    let probs = born_probabilities(&residuals)?;
    let outcome = rng.sample_index(&probs.iter().map(|p| p.as_f64()).collect::<Vec<_>>());
    let inv = Complex::new(T::one() / probs[outcome].sqrt(), T::zero());
    let amps: Vec<Complex<T>> = residuals[outcome].iter().map(|&a| a * inv).collect();
    let residual = StateVector::new(state.num_qubits() - basis.target_qubits(), amps)?;
    Ok((outcome, residual))
}

/// Random unitary on `num_qubits` qubits: a complex Gaussian matrix
/// orthonormalized column by column (Gram–Schmidt with reorthogonalization).
pub fn random_unitary<T: Real>(num_qubits: usize, rng: &mut RngStream) -> ComplexMatrix<T> {
    let dim = 1 << num_qubits;
    let mut cols: Vec<Vec<Complex<T>>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let (re, im) = rng.normal_pair();
                    Complex::new(T::from_f64_lossy(re), T::from_f64_lossy(im))
                })
                .collect()
        })
        .collect();
    for j in 0..dim {
        for _ in 0..2 {
            for i in 0..j {
                let proj = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .fold(Complex::<T>::zero(), |acc, (a, b)| acc + a.conj() * *b);
                for t in 0..dim {
                    let correction = cols[i][t] * proj;
                    cols[j][t] -= correction;
                }
            }
        }
        let norm = cols[j]
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
            .sqrt();
        let inv = T::one() / norm;
        for t in 0..dim {
            cols[j][t] = cols[j][t].scale(inv);
        }
    }
    ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}
