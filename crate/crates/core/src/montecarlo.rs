// SPDX-License-Identifier: Apache-2.0

//! Trajectory-level Monte Carlo estimate of the decoherence function.
//!
//! Each trajectory draws a continuous-time Markov path of the noise,
//! accumulates the phase integral of the switching-signed level over the
//! path's exact segmentation (jump times and pulse times; no quadrature),
//! and contributes exp(i phase). Trajectories use counter-derived rng
//! streams and are reduced by a fixed pairwise summation tree, so the
//! estimate is independent of evaluation order.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pulses::PulseSequence;
use crate::rng::stream_rng;

/// Minimum trajectory count for a standard-error estimate worth reporting.
pub const MIN_TRAJECTORIES: u64 = 100;

/// Complex sample mean with a conservative scalar error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: Complex64,
    /// Larger of the real/imaginary component standard errors.
    pub std_error: f64,
    pub trajectories: u64,
    pub seed: u64,
}

/// One realization of the jump process on [0, horizon].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPath {
    pub initial_state: usize,
    /// (jump time, state entered), strictly inside the horizon.
    pub jumps: Vec<(f64, usize)>,
}

/// Sample one piecewise-constant noise path. The initial state is drawn
/// from the model's initial distribution; in state j the holding time is
/// exponential with rate -G[(j,j)], and states with zero exit rate are
/// absorbing.
pub fn sample_path(model: &NoiseModel, horizon: f64, rng: &mut impl Rng) -> TrajectoryPath {
    let k = model.states();
    let g = model.generator();

    let initial_state = {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = k - 1;
        for (j, &p) in model.initial_distribution().iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = j;
                break;
            }
        }
        chosen
    };

    let mut state = initial_state;
    let mut jumps = Vec::new();
    let mut now = 0.0;
    loop {
        let rate = -g[(state, state)];
        if rate <= 0.0 {
            break; // absorbing
        }
        let u: f64 = rng.random();
        now += -(1.0 - u).ln() / rate;
        if now >= horizon {
            break;
        }
        // next state with probability G[(next, state)] / rate
        let draw: f64 = rng.random::<f64>() * rate;
        let mut acc = 0.0;
        let mut next = usize::MAX;
        for j in 0..k {
            if j == state {
                continue;
            }
            acc += g[(j, state)];
            if draw < acc {
                next = j;
                break;
            }
        }
        if next == usize::MAX {
            // rounding in the column sum; take the last reachable state
            next = (0..k)
                .rev()
                .find(|&j| j != state && g[(j, state)] > 0.0)
                .unwrap_or(state);
        }
        state = next;
        jumps.push((now, state));
    }

    TrajectoryPath {
        initial_state,
        jumps,
    }
}

/// Exact phase integral of the switching-signed level along a path.
/// `extra_breaks` inserts additional segment boundaries that must not
/// change the result (they carry no sign flip and no state change).
fn trajectory_phase(
    model: &NoiseModel,
    path: &TrajectoryPath,
    pulse_times: &[f64],
    horizon: f64,
    extra_breaks: &[f64],
) -> f64 {
    let levels = model.levels();
    let mut phase = 0.0;
    let mut now = 0.0;
    let mut sign = 1.0;
    let mut state = path.initial_state;
    let (mut ji, mut pi, mut ei) = (0usize, 0usize, 0usize);
    while now < horizon {
        let next_jump = path.jumps.get(ji).map(|j| j.0).unwrap_or(f64::INFINITY);
        let next_pulse = pulse_times.get(pi).copied().unwrap_or(f64::INFINITY);
        let next_extra = extra_breaks.get(ei).copied().unwrap_or(f64::INFINITY);
        let next = next_jump.min(next_pulse).min(next_extra).min(horizon);
        phase += sign * levels[state] * (next - now);
        now = next;
        if next_jump <= now {
            state = path.jumps[ji].1;
            ji += 1;
        } else if next_pulse <= now {
            sign = -sign;
            pi += 1;
        } else if next_extra <= now {
            ei += 1;
        }
    }
    phase
}

fn pairwise_sum<T>(v: &[T]) -> T
where
    T: Copy + core::ops::Add<Output = T> + num_traits::Zero,
{
    if v.len() <= 32 {
        let mut acc = T::zero();
        for x in v {
            acc = acc + *x;
        }
        return acc;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Monte Carlo estimate of the decoherence function at time `t`.
///
/// Trajectory `i` uses the rng stream derived from `(seed, i)`, so the
/// estimate depends only on `(seed, trajectories)`.
pub fn mc_coherence(
    model: &NoiseModel,
    seq: &PulseSequence,
    t: f64,
    trajectories: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trajectories < MIN_TRAJECTORIES {
        return Err(Error::TooFewTrajectories(trajectories));
    }
    if t.is_nan() || t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let pulse_times: Vec<f64> = seq.positions().iter().map(|p| p * t).collect();

    let n = trajectories as usize;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = stream_rng(seed, i as u64);
        let path = sample_path(model, t, &mut rng);
        let phase = trajectory_phase(model, &path, &pulse_times, t, &[]);
        values.push(Complex64::from_polar(1.0, phase));
    }

    let mean = pairwise_sum(&values) / n as f64;
    let dev_re: Vec<f64> = values.iter().map(|v| (v.re - mean.re).powi(2)).collect();
    let dev_im: Vec<f64> = values.iter().map(|v| (v.im - mean.im).powi(2)).collect();
    let var_re = pairwise_sum(&dev_re) / (n - 1) as f64;
    let var_im = pairwise_sum(&dev_im) / (n - 1) as f64;
    let std_error = (var_re / n as f64).sqrt().max((var_im / n as f64).sqrt());

    Ok(MonteCarloEstimate {
        mean,
        std_error,
        trajectories,
        seed,
    })
}
