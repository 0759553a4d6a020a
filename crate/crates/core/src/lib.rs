// SPDX-License-Identifier: Apache-2.0

//! Exact decoherence of a qubit under dynamical decoupling in
//! multi-state telegraph-like noise.
//!
//! The noise jumps among discrete frequency levels with Markov rates; a
//! sequence of ideal flip pulses toggles the sign the qubit accumulates
//! phase with. This crate evaluates the averaged coherence exactly as a
//! product of interval matrix exponentials, expands it at short times to
//! expose the surviving third-order coefficient, minimizes that
//! coefficient over pulse timings, and cross-checks everything against a
//! trajectory-level Monte Carlo average.
//!
//! The crate is `no_std` compatible (with `alloc`); the companion CLI
//! crate carries IO, configuration parsing, and file formats.
//!
//! # Quick tour
//!
//! ```
//! use ddtn_core::{engine, expansion, noise::NoiseModel, pulses::PulseSequence};
//!
//! let model = NoiseModel::two_state_rtn(1.0, 1.0).unwrap();
//! let seq = PulseSequence::cpmg(2);
//! let sample = engine::coherence(&model, &seq, 0.5).unwrap();
//! assert!(sample.magnitude <= 1.0 + 1e-10);
//!
//! // periodic timing carries the smallest third-order coefficient
//! assert!((expansion::g3(&seq) - 1.0 / 48.0).abs() < 1e-15);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub use num_complex;

pub mod engine;
pub mod error;
pub mod expansion;
pub mod linalg;
pub mod montecarlo;
pub mod noise;
pub mod optimizer;
pub mod pulses;
pub mod rng;

pub use engine::DecoherenceSample;
pub use error::{Error, Result};
pub use expansion::ExpansionReport;
pub use montecarlo::MonteCarloEstimate;
pub use noise::NoiseModel;
pub use optimizer::OptimizationResult;
pub use pulses::PulseSequence;
