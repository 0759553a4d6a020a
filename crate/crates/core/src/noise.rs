// SPDX-License-Identifier: Apache-2.0

//! Multi-state telegraph-like noise processes.
//!
//! A noise process jumps among K discrete frequency levels w_j with Markov
//! rates collected in a generator matrix. The column convention is
//! dY/dt = G Y: the rate from state j to state k (k != j) sits at G[(k, j)],
//! every column sums to zero, and diagonal entries are non-positive.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{expm_real, lu_factor, RMatrix};

/// Absolute tolerance on exact-by-construction sums (generator columns,
/// probability normalization).
pub const SUM_TOL: f64 = 1e-12;
/// Per-component tolerance on the stationarity residual G y0 = 0.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Largest supported number of noise states.
pub const MAX_STATES: usize = 64;

/// A validated telegraph-like noise model: discrete frequency levels, the
/// jump-rate generator, and a stationary initial distribution.
///
/// Instances are immutable after construction; all operations are pure, so
/// a model can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    levels: Vec<f64>,
    generator: RMatrix,
    initial: Vec<f64>,
}

impl NoiseModel {
    /// Build and validate a model. When `initial` is `None` the stationary
    /// distribution of the generator is computed and used.
    pub fn new(levels: Vec<f64>, generator: RMatrix, initial: Option<Vec<f64>>) -> Result<Self> {
        let k = levels.len();
        if k == 0 {
            return Err(Error::EmptyModel);
        }
        if k > MAX_STATES {
            return Err(Error::TooManyStates {
                states: k,
                max: MAX_STATES,
            });
        }
        if generator.dim() != k {
            return Err(Error::LengthMismatch {
                what: "generator dimension vs level count",
                expected: k,
                got: generator.dim(),
            });
        }
        if levels.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite { what: "levels" });
        }
        validate_generator(&generator)?;

        let initial = match initial {
            Some(y0) => {
                if y0.len() != k {
                    return Err(Error::LengthMismatch {
                        what: "initial distribution length",
                        expected: k,
                        got: y0.len(),
                    });
                }
                y0
            }
            None => stationary_distribution(&generator)?,
        };
        validate_distribution(&generator, &initial)?;

        Ok(NoiseModel {
            levels,
            generator,
            initial,
        })
    }

    /// Symmetric two-state random telegraph noise with levels (w, -w) and
    /// switching rate `rate` in each direction.
    pub fn two_state_rtn(amplitude: f64, rate: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::NonFinite { what: "amplitude" });
        }
        if rate.is_nan() || rate <= 0.0 || !rate.is_finite() {
            return Err(Error::NonPositiveRate { rate });
        }
        let generator = RMatrix::from_rows(&[vec![-rate, rate], vec![rate, -rate]])?;
        NoiseModel::new(vec![amplitude, -amplitude], generator, Some(vec![0.5, 0.5]))
    }

    pub fn states(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn generator(&self) -> &RMatrix {
        &self.generator
    }

    pub fn initial_distribution(&self) -> &[f64] {
        &self.initial
    }

    /// States with zero total exit rate. The jump process never leaves
    /// them; front ends surface this as a warning because a chain with
    /// absorbing states is not ergodic.
    pub fn absorbing_states(&self) -> Vec<usize> {
        (0..self.states())
            .filter(|&j| self.generator[(j, j)] == 0.0)
            .collect()
    }

    /// Stationary second-order correlation <w(t + lag) w(t)> evaluated as
    /// the contraction of W exp(G lag) W y0.
    pub fn correlation(&self, lag: f64) -> Result<f64> {
        if lag.is_nan() || lag < 0.0 {
            return Err(Error::NegativeLag(lag));
        }
        let k = self.states();
        let propagator = expm_real(&self.generator.scaled(lag))?;
        let mut v: Vec<f64> = (0..k).map(|j| self.levels[j] * self.initial[j]).collect();
        v = propagator.matvec(&v);
        Ok((0..k).map(|j| self.levels[j] * v[j]).sum())
    }
}

fn validate_generator(g: &RMatrix) -> Result<()> {
    let k = g.dim();
    for i in 0..k {
        for j in 0..k {
            let v = g[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "generator" });
            }
            let bad = if i == j { v > 0.0 } else { v < 0.0 };
            if bad {
                return Err(Error::GeneratorSign {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    for j in 0..k {
        let sum: f64 = (0..k).map(|i| g[(i, j)]).sum();
        if sum.abs() > SUM_TOL {
            return Err(Error::ProbabilityConservation { column: j, sum });
        }
    }
    Ok(())
}

fn validate_distribution(g: &RMatrix, y0: &[f64]) -> Result<()> {
    for (index, &v) in y0.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "initial distribution",
            });
        }
        if v < 0.0 {
            return Err(Error::NegativeProbability { index, value: v });
        }
    }
    let sum: f64 = y0.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::DistributionSum { sum });
    }
    let residual = g.matvec(y0);
    for (index, r) in residual.iter().enumerate() {
        if r.abs() > STATIONARY_TOL {
            return Err(Error::NotStationary {
                index,
                residual: *r,
            });
        }
    }
    Ok(())
}

/// Solve G y = 0 for the unique stationary probability vector.
///
/// The generator must satisfy the sign and column-sum invariants. Chains
/// whose null space is not one-dimensional (reducible chains) are rejected.
pub fn stationary_distribution(generator: &RMatrix) -> Result<Vec<f64>> {
    let k = generator.dim();
    if k == 0 {
        return Err(Error::EmptyModel);
    }
    validate_generator(generator)?;
    if k == 1 {
        return Ok(vec![1.0]);
    }

    // Replace the last balance equation (implied by the zero column sums)
    // with the normalization sum(y) = 1; the system is nonsingular exactly
    // when the stationary vector is unique.
    let mut a = generator.clone();
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; k];
    rhs[k - 1] = 1.0;

    let factors = lu_factor(&a).map_err(|_| Error::ReducibleChain)?;
    let scale = a.one_norm().max(1.0);
    if factors.min_pivot <= 1e-12 * scale {
        return Err(Error::ReducibleChain);
    }
    let mut y = factors.solve_vec(&rhs);

    for (index, v) in y.iter_mut().enumerate() {
        if *v < -1e-12 {
            return Err(Error::NegativeStationaryComponent { index, value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = y.iter().sum();
    for v in y.iter_mut() {
        *v /= total;
    }
    Ok(y)
}
