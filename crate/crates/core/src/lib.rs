//! Scaling experiments for classical optimizers on noisy variational quantum
//! loss functions.
//!
//! The crate covers the whole pipeline: seeded random QUBO instances and their
//! Ising form ([`problems`]), a small dense statevector engine ([`simstate`]),
//! the BENQO, two-local VQE and QAOA loss functions ([`losses`]), Gaussian and
//! finite-shot noise channels ([`noise`]), the optimizer suite
//! ([`optimizers`]), solvability metrics ([`metrics`]), curve fitting and
//! shot-count projections ([`fitlab`]) and the parallel sweep harness
//! ([`harness`]).
//!
//! Basis states are indexed little-endian: qubit `i` is bit `i` of the basis
//! index, and a bit string is printed with variable `x_0` first.

pub mod bits;
pub mod error;
pub mod fitlab;
pub mod harness;
pub mod losses;
pub mod metrics;
pub mod noise;
pub mod optimizers;
pub mod problems;
pub mod rng;
pub mod selfcheck;
pub mod simstate;
pub mod stats;

pub use bits::Bitstring;
pub use error::{Error, Result};
