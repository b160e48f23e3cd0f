//! Dense complex matrices and state vectors, with the tensor-index operations
//! everything else is built on: tensor product, dagger, partial trace, and
//! phase-insensitive comparison.
//!
//! Conventions, fixed here and relied on throughout the crate:
//!
//! * Matrices are row-major. Rows carry **output** indices, columns carry
//!   **input** indices: `m[(r, c)]` is ⟨r∣M∣c⟩.
//! * In a tensor product the **left factor is the high-order index**:
//!   `(a ⊗ b)[(ra·Rb + rb, ca·Cb + cb)] = a[(ra, ca)] · b[(rb, cb)]`.
//! * For state vectors **qubit 0 is the most significant bit** of the
//!   amplitude index, so ∣x⟩⊗∣y⟩ for single qubits sits at index `2x + y`.
//!
//! Storage is dense only; registers here never exceed 8 qubits, so 2ⁿ×2ⁿ
//! matrices stay small. All values are immutable after construction and all
//! operations are pure functions.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tensor position of the subsystem a contraction acts on.
///
/// The partial-trace kernel only contracts the first or last factor;
/// arbitrary positions are reached by conjugating with explicit wire
/// permutations (see `kernel::wire_permutation`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracePosition {
    First,
    Last,
}

/// Dense complex matrix. Rows are output indices, columns input indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    /// n×n identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::one();
        }
        m
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from nested rows; panics if the rows are ragged.
    pub fn from_nested(rows: Vec<Vec<Complex<T>>>) -> Self {
        let nr = rows.len();
        assert!(nr > 0, "matrix must have at least one row");
        let nc = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Self {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.data[k * other.cols + c];
                }
            }
        }
        Ok(out)
    }

    /// Applies the matrix to a raw amplitude vector.
    pub fn apply(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}×{} but vector has length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![Complex::zero(); self.rows];
        for r in 0..self.rows {
            let mut acc = Complex::zero();
            for c in 0..self.cols {
                acc += self.data[r * self.cols + c] * v[c];
            }
            out[r] = acc;
        }
        Ok(out)
    }

    /// Applies the matrix to a full state vector (dimensions must match).
    pub fn mul_state(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        if self.rows != self.cols || self.cols != state.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator {}×{} does not act on a {}-dimensional state",
                self.rows,
                self.cols,
                state.dim()
            )));
        }
        Ok(StateVector {
            num_qubits: state.num_qubits,
            amps: self.apply(&state.amps)?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "shape {}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Multiplies every entry by `k`.
    pub fn scale(&self, k: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * k).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.data[c * self.cols + r].conj())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.data[c * self.cols + r])
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> Complex<T> {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).fold(Complex::zero(), |acc, i| acc + self.data[i * self.cols + i])
    }

    /// Tensor (Kronecker) product, left factor as high-order index.
    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_fn(
            self.rows * other.rows,
            self.cols * other.cols,
            |r, c| {
                self.data[(r / other.rows) * self.cols + (c / other.cols)]
                    * other.data[(r % other.rows) * other.cols + (c % other.cols)]
            },
        )
    }

    /// Contracts the matching input/output index pair of the subsystem of
    /// dimension `traced_dim` sitting at the stated tensor position.
    ///
    /// With the operator written as U with row index (b, p) and column index
    /// (a, p') for `TracePosition::Last`, the result is Σₚ U[(b,p)][(a,p)].
    pub fn partial_trace(&self, traced_dim: usize, position: TracePosition) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "partial trace needs a square matrix, got {}×{}",
                self.rows, self.cols
            )));
        }
        if traced_dim == 0 || self.rows % traced_dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "dimension {} is not divisible by traced subsystem dimension {}",
                self.rows, traced_dim
            )));
        }
        let kept = self.rows / traced_dim;
        let mut out = Self::zeros(kept, kept);
        for b in 0..kept {
            for a in 0..kept {
                let mut acc = Complex::zero();
                for p in 0..traced_dim {
                    let (r, c) = match position {
                        TracePosition::Last => (b * traced_dim + p, a * traced_dim + p),
                        TracePosition::First => (p * kept + b, p * kept + a),
                    };
                    acc += self.data[r * self.cols + c];
                }
                out.data[b * kept + a] = acc;
            }
        }
        Ok(out)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
            .sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs_entry(&self) -> T {
        self.data
            .iter()
            .map(|a| a.norm())
            .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
    }

    /// ‖M†M − I‖_F ≤ tol.
    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_residual().map_or(false, |r| r <= tol)
    }

    /// Errors with the residual when the unitarity bound is violated.
    pub fn check_unitary(&self, tol: T) -> Result<()> {
        let residual = self.unitarity_residual().ok_or_else(|| {
            Error::DimensionMismatch(format!("unitarity of a {}×{} matrix", self.rows, self.cols))
        })?;
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary {
                residual: residual.as_f64(),
                tol: tol.as_f64(),
            })
        }
    }

    fn unitarity_residual(&self) -> Option<T> {
        if !self.is_square() {
            return None;
        }
        let gram = self.dagger().mul(self).expect("square product");
        let id = Self::identity(self.rows);
        Some(gram.sub(&id).expect("same shape").frobenius_norm())
    }

    /// True iff `self = c · other` for some unit-modulus scalar `c`, within
    /// Frobenius distance `tol`. Shape mismatch and zero-vs-nonzero compare
    /// as unequal.
    pub fn equal_up_to_phase(&self, other: &Self, tol: T) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && equal_up_to_phase_slices(&self.data, &other.data, tol)
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &self.data[r * self.cols + c]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &mut self.data[r * self.cols + c]
    }
}

/// Pure state of a qubit register. Qubit 0 is the most significant bit of
/// the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    num_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Wraps raw amplitudes; their count must be 2^num_qubits.
    pub fn new(num_qubits: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} qubits need {} amplitudes, got {}",
                num_qubits,
                1usize << num_qubits,
                amps.len()
            )));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Computational basis state ∣index⟩.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(index < 1 << num_qubits, "basis index out of range");
        let mut amps = vec![Complex::zero(); 1 << num_qubits];
        amps[index] = Complex::one();
        Self { num_qubits, amps }
    }

    /// Computational basis state from bits, qubit 0 first.
    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        Self::basis(bits.len(), index)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex<T> {
        self.amps[index]
    }

    /// Tensor product, left factor as high-order index.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for &a in &self.amps {
            for &b in &other.amps {
                amps.push(a * b);
            }
        }
        Self {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        }
    }

    /// ⟨self∣other⟩.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    pub fn norm(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
            .sqrt()
    }

    /// Rescales to unit norm; errors on the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n <= T::from_f64_lossy(1e-300) {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        let inv = T::one() / n;
        for a in &mut self.amps {
            *a = a.scale(inv);
        }
        Ok(self)
    }

    pub fn is_normalized(&self, tol: T) -> bool {
        (self.norm() - T::one()).abs() <= tol
    }

    pub fn check_normalized(&self, tol: T) -> Result<()> {
        let dev = (self.norm() - T::one()).abs();
        if dev <= tol {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                deviation: dev.as_f64(),
            })
        }
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|&a| a * k).collect(),
        }
    }

    /// True iff `self = c · other` for some unit-modulus scalar `c`, within
    /// L2 distance `tol`.
    pub fn equal_up_to_phase(&self, other: &Self, tol: T) -> bool {
        self.dim() == other.dim() && equal_up_to_phase_slices(&self.amps, &other.amps, tol)
    }
}

/// Shared kernel for the phase-insensitive comparison: the candidate phase is
/// read off at the largest-magnitude entry of `b`.
fn equal_up_to_phase_slices<T: Real>(a: &[Complex<T>], b: &[Complex<T>], tol: T) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let tiny = T::from_f64_lossy(1e-300);
    let norm = |v: &[Complex<T>]| {
        v.iter()
            .fold(T::zero(), |acc, x| acc + x.norm_sqr())
            .sqrt()
    };
    let norm_b = norm(b);
    if norm_b <= tiny {
        return norm(a) <= tol;
    }
    if norm(a) <= tiny {
        return norm_b <= tol;
    }
    let mut i_max = 0;
    let mut best = T::zero();
    for (i, x) in b.iter().enumerate() {
        let m = x.norm_sqr();
        if m > best {
            best = m;
            i_max = i;
        }
    }
    let ratio = a[i_max] / b[i_max];
    let modulus = ratio.norm();
    let phase = if modulus <= tiny {
        Complex::one()
    } else {
        ratio.scale(T::one() / modulus)
    };
    let dist = a
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y * phase).norm_sqr())
        .sqrt();
    dist <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type M = ComplexMatrix<f64>;
    type S = StateVector<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = M::identity(2);
        assert_eq!(i2.tensor(&i2), M::identity(4));
    }

    #[test]
    fn tensor_of_basis_projectors() {
        // ∣0⟩⟨0∣ ⊗ ∣1⟩⟨1∣ has its single 1 at row 1, col 1 (index 01).
        let p0 = M::from_fn(2, 2, |r, ccol| {
            if r == 0 && ccol == 0 { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) }
        });
        let p1 = M::from_fn(2, 2, |r, ccol| {
            if r == 1 && ccol == 1 { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) }
        });
        let t = p0.tensor(&p1);
        for r in 0..4 {
            for col in 0..4 {
                let expect = if r == 1 && col == 1 { 1.0 } else { 0.0 };
                assert_eq!(t[(r, col)], c(expect, 0.0));
            }
        }
    }

    #[test]
    fn partial_trace_of_product_operator() {
        let a = M::from_nested(vec![
            vec![c(1.0, 2.0), c(0.5, -1.0)],
            vec![c(-0.25, 0.0), c(3.0, 1.0)],
        ]);
        let b = M::from_nested(vec![
            vec![c(2.0, 0.0), c(1.0, 1.0)],
            vec![c(0.0, -1.0), c(-1.0, 0.5)],
        ]);
        let tb = b.trace();
        let expect = a.scale(tb);

        let last = a.tensor(&b).partial_trace(2, TracePosition::Last).unwrap();
        assert!(last.sub(&expect).unwrap().frobenius_norm() < 1e-12);

        let ta = a.trace();
        let first = a.tensor(&b).partial_trace(2, TracePosition::First).unwrap();
        assert!(first.sub(&b.scale(ta)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn partial_trace_dimension_mismatch_is_an_error() {
        let m = M::identity(6);
        assert!(m.partial_trace(4, TracePosition::Last).is_err());
        let rect = M::zeros(2, 4);
        assert!(rect.partial_trace(2, TracePosition::Last).is_err());
    }

    #[test]
    fn dagger_of_hermitian_and_involution() {
        let sy = M::from_nested(vec![
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ]);
        assert_eq!(sy.dagger(), sy);
        assert_eq!(M::identity(3).dagger(), M::identity(3));
        let a = M::from_nested(vec![
            vec![c(1.0, 2.0), c(0.5, -1.0), c(0.0, 3.0)],
            vec![c(-0.25, 0.0), c(3.0, 1.0), c(1.0, -1.0)],
        ]);
        assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn phase_comparison_examples() {
        let psi = S::new(2, vec![c(0.5f64.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5f64.sqrt(), 0.0)]).unwrap();
        let minus = psi.scale(c(-1.0, 0.0));
        assert!(psi.equal_up_to_phase(&minus, 1e-10));

        let ortho = S::new(2, vec![c(0.0, 0.0), c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0), c(0.0, 0.0)]).unwrap();
        assert!(!psi.equal_up_to_phase(&ortho, 1e-10));

        // σ_y∣0⟩ = i∣1⟩, equal to any rephasing of i∣1⟩.
        let sy0 = S::new(1, vec![c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
        let target = S::new(1, vec![c(0.0, 0.0), c(0.0, 1.0)]).unwrap().scale(Complex::from_polar(1.0, 1.234));
        assert!(sy0.equal_up_to_phase(&target, 1e-10));

        // Zero vs nonzero compares unequal.
        let zero = S::new(1, vec![c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let one = S::basis(1, 1);
        assert!(!zero.equal_up_to_phase(&one, 1e-10));
        assert!(!one.equal_up_to_phase(&zero, 1e-10));
    }

    #[test]
    fn unitarity_check_reports_residual() {
        assert!(M::identity(4).is_unitary(1e-12));
        let not_u = M::from_nested(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.5, 0.0)],
        ]);
        assert!(!not_u.is_unitary(1e-10));
        match not_u.check_unitary(1e-10) {
            Err(Error::NotUnitary { residual, .. }) => assert!(residual > 0.5),
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn basis_index_convention_qubit0_is_msb() {
        // ∣1⟩⊗∣0⟩: qubit 0 = 1, qubit 1 = 0 → amplitude index 2.
        let s = S::from_bits(&[1, 0]);
        assert_eq!(s.amp(2), c(1.0, 0.0));
        let one = S::basis(1, 1);
        let zero = S::basis(1, 0);
        assert_eq!(one.tensor(&zero), s);
    }

    #[test]
    fn state_amplitude_count_enforced() {
        assert!(S::new(2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(S::new(2, vec![c(0.5, 0.0); 4]).is_ok());
    }

    #[test]
    fn f32_kernels_work() {
        let i2 = ComplexMatrix::<f32>::identity(2);
        let t = i2.tensor(&i2).partial_trace(2, TracePosition::Last).unwrap();
        assert!(t.sub(&i2.scale(Complex::new(2.0, 0.0))).unwrap().frobenius_norm() < 1e-6);
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = M> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(
            move |entries| {
                ComplexMatrix {
                    rows,
                    cols,
                    data: entries.into_iter().map(|(re, im)| c(re, im)).collect(),
                }
            },
        )
    }

    fn arb_state(n: usize) -> impl Strategy<Value = S> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
            "nonzero",
            move |entries| {
                let amps: Vec<_> = entries.into_iter().map(|(re, im)| c(re, im)).collect();
                S::new(n, amps).unwrap().normalized().ok()
            },
        )
    }

    proptest! {
        #[test]
        fn ptrace_of_tensor_factors((a, b) in (arb_matrix(3, 3), arb_matrix(2, 2))) {
            let ab = a.tensor(&b);
            let last = ab.partial_trace(2, TracePosition::Last).unwrap();
            prop_assert!(last.sub(&a.scale(b.trace())).unwrap().frobenius_norm() < 1e-10);
            let first = ab.partial_trace(3, TracePosition::First).unwrap();
            prop_assert!(first.sub(&b.scale(a.trace())).unwrap().frobenius_norm() < 1e-10);
        }

        #[test]
        fn ptrace_preserves_trace(u in arb_matrix(6, 6)) {
            for (d, pos) in [(2, TracePosition::Last), (3, TracePosition::Last), (2, TracePosition::First), (3, TracePosition::First)] {
                let pt = u.partial_trace(d, pos).unwrap();
                let diff = pt.trace() - u.trace();
                prop_assert!(diff.norm() < 1e-10);
            }
        }

        #[test]
        fn tensor_is_associative((a, b, cm) in (arb_matrix(2, 2), arb_matrix(3, 2), arb_matrix(2, 3))) {
            let left = a.tensor(&b).tensor(&cm);
            let right = a.tensor(&b.tensor(&cm));
            prop_assert!(left.sub(&right).unwrap().frobenius_norm() < 1e-12);
        }

        #[test]
        fn phase_equality_reflexive_symmetric((s, t) in (arb_state(2), arb_state(2))) {
            prop_assert!(s.equal_up_to_phase(&s, 1e-10));
            prop_assert_eq!(
                s.equal_up_to_phase(&t, 1e-8),
                t.equal_up_to_phase(&s, 1e-8)
            );
            let rotated = s.scale(Complex::from_polar(1.0, 0.7));
            prop_assert!(s.equal_up_to_phase(&rotated, 1e-10));
        }

        #[test]
        fn dagger_reverses_products((a, b) in (arb_matrix(3, 2), arb_matrix(2, 4))) {
            let lhs = a.mul(&b).unwrap().dagger();
            let rhs = b.dagger().mul(&a.dagger()).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().frobenius_norm() < 1e-12);
        }
    }
}
