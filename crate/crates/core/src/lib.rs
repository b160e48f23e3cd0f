//! Deterministic qubit state-vector simulation of effective time travel by
//! post-selected teleportation.
//!
//! What lives here:
//!
//! * [`linalg`] — dense complex matrices and state vectors with the
//!   tensor-index operations (tensor product, dagger, partial trace,
//!   phase-insensitive comparison).
//! * [`kernel`] — Bell basis, σ correction labels, channel–state duality
//!   maps, gate application, and seeded projective measurement.
//! * [`ctc`] — a backward-in-time wire as a post-selected circuit: the loop
//!   acts as ½·(partial trace) on outcome Ψ00, with definite per-outcome
//!   effective operators otherwise.
//! * [`protocol`] — the encrypted joint-measurement protocol (ciphertext
//!   today, keys tomorrow, σ-relabel decode) and multistage same-day
//!   pipelining, with JSONL trial persistence.
//! * [`verify`] — the algebraic self-check suite used by the CLI.
//!
//! Everything numeric is generic over [`Real`] (f32 or f64); the aliases
//! below fix f64, which is what every pinned tolerance assumes. All types
//! are immutable after construction and operations are pure, so values can
//! be shared freely across threads; randomized runs take per-trial
//! [`RngStream`]s, making results independent of execution order.

pub mod ctc;
pub mod error;
pub mod hist;
pub mod kernel;
pub mod linalg;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use hist::Histogram;
pub use kernel::BellLabel;
pub use linalg::{ComplexMatrix, StateVector, TracePosition};
pub use rng::RngStream;
pub use scalar::Real;

/// Dense complex matrix at f64.
pub type Matrix = ComplexMatrix<f64>;
/// Qubit register state at f64.
pub type State = StateVector<f64>;
/// Dense complex matrix at f32.
pub type Matrix32 = ComplexMatrix<f32>;
/// Qubit register state at f32.
pub type State32 = StateVector<f32>;
/// Complex scalar at f64.
pub type C64 = num_complex::Complex<f64>;
