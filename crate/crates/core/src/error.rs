// SPDX-License-Identifier: Apache-2.0

//! Error type shared across the crate.
//!
//! Every variant names the violated invariant or the failed procedure so
//! that front ends can report precise diagnostics and map failures to
//! exit codes.

use alloc::string::String;
use thiserror::Error;

/// Errors produced by model validation, pulse-sequence construction,
/// numerical routines, and samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // ----- noise model validation -----
    #[error("noise model must have at least one state")]
    EmptyModel,
    #[error("generator must be square, got {rows}x{cols}")]
    NonSquareGenerator { rows: usize, cols: usize },
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("state count {states} exceeds the supported maximum of {max}")]
    TooManyStates { states: usize, max: usize },
    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },
    #[error("generator sign condition violated at ({row},{col}): off-diagonal entries must be >= 0 and diagonal entries <= 0, got {value}")]
    GeneratorSign { row: usize, col: usize, value: f64 },
    #[error("probability conservation violated: generator column {column} sums to {sum:e}")]
    ProbabilityConservation { column: usize, sum: f64 },
    #[error("initial distribution entry {index} is negative: {value}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("initial distribution sums to {sum}, must be 1 within 1e-12")]
    DistributionSum { sum: f64 },
    #[error("initial distribution is not stationary: |(generator . y0)[{index}]| = {residual:e} exceeds 1e-10")]
    NotStationary { index: usize, residual: f64 },
    #[error("jump rate must be positive, got {rate}")]
    NonPositiveRate { rate: f64 },
    #[error("stationary distribution is not unique (reducible jump chain)")]
    ReducibleChain,
    #[error("stationary solve produced negative component {value:e} at index {index}")]
    NegativeStationaryComponent { index: usize, value: f64 },

    // ----- scalar domains -----
    #[error("lag must be non-negative, got {0}")]
    NegativeLag(f64),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("time grid must be sorted and non-negative")]
    UnsortedGrid,
    #[error("normalized time {0} lies outside [0, 1]")]
    TimeOutOfWindow(f64),

    // ----- pulse sequences -----
    #[error("pulse position {value} at index {index} must lie in (0, 1) with at least 1e-9 clearance from the endpoints")]
    PulseOutOfWindow { index: usize, value: f64 },
    #[error("pulse positions must be strictly increasing with gap >= {min_gap:e}; positions {index} and {next} are {gap:e} apart", next = index + 1)]
    PulseGap {
        index: usize,
        gap: f64,
        min_gap: f64,
    },
    #[error("operation requires a non-empty pulse sequence")]
    EmptySequence,
    #[error("concatenation level {level} exceeds the cap of {cap}")]
    CddLevelCap { level: u32, cap: u32 },
    #[error("invalid sequence spec '{spec}': {reason}")]
    SequenceSpec { spec: String, reason: String },

    // ----- short-time expansion -----
    #[error("echo condition violated: alternating interval sum is {residual:e}, must vanish within {tol:e}")]
    EchoViolation { residual: f64, tol: f64 },
    #[error(
        "internal consistency failure: linear scaling term is {value:e} despite the echo condition"
    )]
    LinearTermNonzero { value: f64 },
    #[error("third-order scalar vanishes for this model; the cubic fit is degenerate")]
    DegenerateModel,
    #[error("decoherence signal {value:e} is below the numerical resolution floor")]
    ResolutionFloor { value: f64 },
    #[error("word expansion capped at order {max_order} and {max_pulses} pulses, got order {order} with {pulses} pulses")]
    WordExpansionCap {
        order: usize,
        pulses: usize,
        max_order: usize,
        max_pulses: usize,
    },

    // ----- optimizer and samplers -----
    #[error("rejection sampling budget of {budget} draws exhausted")]
    SamplingBudget { budget: usize },
    #[error("boundary scaling needs a non-zero deviation vector")]
    ZeroDeviation,
    #[error("no optimization start converged; best gradient norm {best_gradient:e}")]
    NoStartConverged { best_gradient: f64 },
    #[error("trajectory count {0} is too small, need at least 100")]
    TooFewTrajectories(u64),

    // ----- numerics -----
    #[error("matrix contains non-finite entries")]
    NonFiniteMatrix,
    #[error("singular linear system (pivot {pivot:e})")]
    SingularSystem { pivot: f64 },
    #[error("coherence magnitude {0} exceeds 1 beyond tolerance")]
    MagnitudeBound(f64),
}

impl Error {
    /// True for failures of numerical procedures, as opposed to invalid
    /// inputs or configuration. Front ends map these to a distinct exit
    /// code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NegativeStationaryComponent { .. }
                | Error::LinearTermNonzero { .. }
                | Error::ResolutionFloor { .. }
                | Error::NoStartConverged { .. }
                | Error::SingularSystem { .. }
                | Error::MagnitudeBound(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
