// SPDX-License-Identifier: Apache-2.0

//! Minimization of the third-order coefficient over admissible pulse
//! deviations, plus the scaling and boundary-reduction machinery.
//!
//! Deviations live on the hyperplane b_1 - b_2 + ... +- b_N = 0 (the echo
//! condition); the last coordinate is eliminated, ordering is kept by a
//! log barrier with a decreasing weight schedule, and a final Newton
//! polish runs on the bare cubic. All randomness flows through
//! counter-derived streams, so results are reproducible and independent
//! of scheduling.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::expansion::{
    cubic_along_deviation, deviated_positions, g3_gradient_positions, g3_positions,
};
use crate::linalg::{lu_factor, RMatrix};
use crate::pulses::{PulseSequence, MIN_GAP};
use crate::rng::{derive_stream_seed, stream_rng};

/// Rejection budget for one admissible-deviation draw.
pub const SAMPLE_BUDGET: usize = 10_000;
/// Gradient-norm tolerance declaring an optimizer start converged.
pub const GRADIENT_TOL: f64 = 1e-10;

/// Outcome of a multi-start minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub pulse_count: usize,
    pub best_beta: Vec<f64>,
    pub best_g: f64,
    pub starts: usize,
    pub converged_starts: usize,
    pub gradient_norm_at_best: f64,
}

fn alternating_sign(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Draw one deviation vector satisfying both the echo hyperplane and the
/// ordering constraints: sample a centered cube, project onto the
/// hyperplane, reject draws whose positions violate ordering or gaps.
pub fn sample_admissible(count: usize, rng_seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptySequence);
    }
    let mut rng = stream_rng(rng_seed, 0);
    let halfwidth = 1.0 / (2 * count) as f64;
    for _ in 0..SAMPLE_BUDGET {
        let mut beta: Vec<f64> = (0..count)
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * halfwidth)
            .collect();
        let dot: f64 = beta
            .iter()
            .enumerate()
            .map(|(i, b)| alternating_sign(i) * b)
            .sum();
        let shift = dot / count as f64;
        for (i, b) in beta.iter_mut().enumerate() {
            *b -= alternating_sign(i) * shift;
        }
        let positions = deviated_positions(count, &beta, 1.0);
        if PulseSequence::from_positions(positions).is_ok() {
            return Ok(beta);
        }
    }
    Err(Error::SamplingBudget {
        budget: SAMPLE_BUDGET,
    })
}

/// g3 at deviation `lambda * beta` minus the periodic-grid constant
/// 1/(12 N^2). As a polynomial identity this equals
/// lambda^2 h + lambda^3 g, also beyond the physical boundary.
pub fn scaling_curve(beta: &[f64], lambda: f64) -> f64 {
    let n = beta.len();
    let constant = 1.0 / (12.0 * (n * n) as f64);
    g3_positions(&deviated_positions(n, beta, lambda)) - constant
}

/// Quadratic and cubic parts (h, g) of the scaling polynomial along `beta`.
pub fn scaling_parts(beta: &[f64]) -> (f64, f64) {
    let (_, _, h, g) = cubic_along_deviation(beta.len(), beta);
    (h, g)
}

/// Largest admissible scaling of a deviation, and the reduced sequence
/// obtained at the boundary.
///
/// At `lambda_b` one or more ordering slacks vanish: pulses that reach a
/// window endpoint are dropped (a frame flip), coincident pairs cancel.
/// Both events strictly reduce the pulse count, and neither changes the
/// value of the third-order integral.
pub fn boundary_scale(beta: &[f64]) -> Result<(f64, PulseSequence)> {
    let n = beta.len();
    if n == 0 || beta.iter().all(|&b| b == 0.0) {
        return Err(Error::ZeroDeviation);
    }
    let grid = deviated_positions(n, beta, 0.0);

    // each ordering slack is affine in lambda: slack(lambda) = base + lambda * dir
    let mut lambda_b = f64::INFINITY;
    let mut consider = |base: f64, dir: f64| {
        if dir < 0.0 {
            let hit = base / -dir;
            if hit < lambda_b {
                lambda_b = hit;
            }
        }
    };
    consider(grid[0], beta[0]);
    for i in 1..n {
        consider(grid[i] - grid[i - 1], beta[i] - beta[i - 1]);
    }
    consider(1.0 - grid[n - 1], -beta[n - 1]);
    if !lambda_b.is_finite() {
        // impossible for nonzero beta on the hyperplane: the slack
        // directions sum to zero, so some direction is negative
        return Err(Error::ZeroDeviation);
    }

    let reduced = reduce_boundary_positions(deviated_positions(n, beta, lambda_b))?;
    Ok((lambda_b, reduced))
}

/// Remove boundary-touching pulses (dropped) and coincident pairs
/// (cancelled) until the position list is a valid sequence. End-pulse
/// drops are applied before pair merges at each pass, which fixes the
/// reduction path when both events coincide.
fn reduce_boundary_positions(mut positions: Vec<f64>) -> Result<PulseSequence> {
    loop {
        let before = positions.len();
        positions.retain(|&p| p > MIN_GAP && p < 1.0 - MIN_GAP);
        let mut i = 0;
        while i + 1 < positions.len() {
            if positions[i + 1] - positions[i] <= MIN_GAP {
                positions.drain(i..=i + 1);
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
        if positions.len() == before {
            break;
        }
    }
    PulseSequence::from_positions(positions)
}

// ---------------------------------------------------------------------------
// Multi-start minimization
// ---------------------------------------------------------------------------

/// Pulse count, with the eliminated last deviation coordinate restored
/// from the echo hyperplane.
fn full_beta(x: &[f64], n: usize) -> Vec<f64> {
    let mut beta = Vec::with_capacity(n);
    beta.extend_from_slice(x);
    let partial: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| alternating_sign(i) * v)
        .sum();
    beta.push(-partial / alternating_sign(n - 1));
    beta
}

fn objective(x: &[f64], n: usize) -> f64 {
    g3_positions(&deviated_positions(n, &full_beta(x, n), 1.0))
}

/// Analytic gradient of the objective in the reduced coordinates.
fn objective_gradient(x: &[f64], n: usize) -> Vec<f64> {
    let beta = full_beta(x, n);
    let grad_alpha = g3_gradient_positions(&deviated_positions(n, &beta, 1.0));
    let last = grad_alpha[n - 1];
    (0..n - 1)
        .map(|i| grad_alpha[i] - last * alternating_sign(i) / alternating_sign(n - 1))
        .collect()
}

/// Ordering slacks of the positions (N + 1 values, all positive inside the
/// feasible polytope).
fn slacks(x: &[f64], n: usize) -> Vec<f64> {
    let pos = deviated_positions(n, &full_beta(x, n), 1.0);
    let mut s = Vec::with_capacity(n + 1);
    s.push(pos[0]);
    for i in 1..n {
        s.push(pos[i] - pos[i - 1]);
    }
    s.push(1.0 - pos[n - 1]);
    s
}

/// Gradients of each slack in the reduced coordinates; rows follow the
/// slack order of [`slacks`].
fn slack_gradients(n: usize) -> Vec<Vec<f64>> {
    let dim = n - 1;
    // d pos_j / d x_i = delta_ij for j < n-1, and the hyperplane pullback
    // for the eliminated coordinate
    let dlast = |i: usize| -alternating_sign(i) / alternating_sign(n - 1);
    let dpos = |j: usize, i: usize| -> f64 {
        if j < n - 1 {
            if i == j {
                1.0
            } else {
                0.0
            }
        } else {
            dlast(i)
        }
    };
    let mut rows = Vec::with_capacity(n + 1);
    rows.push((0..dim).map(|i| dpos(0, i)).collect::<Vec<f64>>());
    for j in 1..n {
        rows.push((0..dim).map(|i| dpos(j, i) - dpos(j - 1, i)).collect());
    }
    rows.push((0..dim).map(|i| -dpos(n - 1, i)).collect());
    rows
}

/// Central-difference Hessian of the analytic gradient. The objective is a
/// cubic polynomial, so its gradient is quadratic and the central stencil
/// is exact up to rounding.
fn objective_hessian(x: &[f64], n: usize) -> RMatrix {
    let dim = x.len();
    let h = 1e-5;
    let mut hess = RMatrix::zeros(dim);
    let mut xp = x.to_vec();
    for j in 0..dim {
        xp[j] = x[j] + h;
        let gp = objective_gradient(&xp, n);
        xp[j] = x[j] - h;
        let gm = objective_gradient(&xp, n);
        xp[j] = x[j];
        for i in 0..dim {
            hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    // symmetrize
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (hess[(i, j)] + hess[(j, i)]);
            hess[(i, j)] = avg;
            hess[(j, i)] = avg;
        }
    }
    hess
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// One damped-Newton descent stage on G - mu * sum(ln slack). `mu = 0`
/// runs the bare polish on the cubic.
fn newton_stage(mut x: Vec<f64>, n: usize, mu: f64, grad_tol: f64) -> Vec<f64> {
    let dim = x.len();
    let merit = |x: &[f64]| -> f64 {
        let s = slacks(x, n);
        if s.iter().any(|&v| v <= 0.0) {
            return f64::INFINITY;
        }
        let mut val = objective(x, n);
        if mu > 0.0 {
            val -= mu * s.iter().map(|v| v.ln()).sum::<f64>();
        }
        val
    };
    let srows = slack_gradients(n);

    for _ in 0..80 {
        let s = slacks(&x, n);
        if s.iter().any(|&v| v <= 0.0) {
            break;
        }
        let mut grad = objective_gradient(&x, n);
        if mu > 0.0 {
            for (sv, row) in s.iter().zip(srows.iter()) {
                for (gi, ri) in grad.iter_mut().zip(row.iter()) {
                    *gi -= mu * ri / sv;
                }
            }
        }
        let gnorm = norm2(&grad);
        if gnorm <= grad_tol {
            break;
        }

        let mut hess = objective_hessian(&x, n);
        if mu > 0.0 {
            for (sv, row) in s.iter().zip(srows.iter()) {
                let w = mu / (sv * sv);
                for i in 0..dim {
                    for j in 0..dim {
                        hess[(i, j)] += w * row[i] * row[j];
                    }
                }
            }
        }

        // Newton direction with a Levenberg shift escalated until it
        // descends
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut direction = None;
        for shift in [0.0, 1e-10, 1e-6, 1e-2, 1.0, 1e2] {
            let mut shifted = hess.clone();
            for i in 0..dim {
                shifted[(i, i)] += shift;
            }
            if let Ok(f) = lu_factor(&shifted) {
                let d = f.solve_vec(&neg_grad);
                let slope: f64 = d.iter().zip(grad.iter()).map(|(a, b)| a * b).sum();
                if d.iter().all(|v| v.is_finite()) && slope < 0.0 {
                    direction = Some((d, slope));
                    break;
                }
            }
        }
        let (d, slope) = match direction {
            Some(v) => v,
            None => (neg_grad.clone(), -gnorm * gnorm),
        };

        let f0 = merit(&x);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + step * b).collect();
            if merit(&trial) <= f0 + 1e-4 * step * slope {
                x = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step * norm2(&d) < 1e-16 {
            break;
        }
    }
    x
}

/// Multi-start minimization of g3 over admissible deviations.
///
/// Each start draws its own admissible deviation from a derived stream,
/// runs four barrier stages with weights 1e-2 down to 1e-8, and finishes
/// with a Newton polish on the bare cubic. A start counts as converged
/// when the gradient norm falls below [`GRADIENT_TOL`].
pub fn minimize(count: usize, starts: usize, rng_seed: u64) -> Result<OptimizationResult> {
    if count == 0 {
        return Err(Error::EmptySequence);
    }
    if count == 1 {
        // the echo hyperplane pins the single deviation to zero
        return Ok(OptimizationResult {
            pulse_count: 1,
            best_beta: vec![0.0],
            best_g: g3_positions(&[0.5]),
            starts,
            converged_starts: starts,
            gradient_norm_at_best: 0.0,
        });
    }

    let n = count;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut converged_starts = 0usize;
    let mut best_gradient = f64::INFINITY;

    for start in 0..starts {
        let beta0 = sample_admissible(n, derive_stream_seed(rng_seed, start as u64))?;
        let mut x: Vec<f64> = beta0[..n - 1].to_vec();
        for mu in [1e-2, 1e-4, 1e-6, 1e-8] {
            x = newton_stage(x, n, mu, (mu * 1e-2).max(1e-11));
        }
        x = newton_stage(x, n, 0.0, 1e-12);

        let value = objective(&x, n);
        let gnorm = norm2(&objective_gradient(&x, n));
        let feasible = slacks(&x, n).iter().all(|&s| s > 0.0);
        if gnorm < best_gradient {
            best_gradient = gnorm;
        }
        if feasible && gnorm <= GRADIENT_TOL {
            converged_starts += 1;
        }
        let better = match &best {
            Some((bv, _, _)) => feasible && value < *bv,
            None => feasible,
        };
        if better {
            best = Some((value, x.clone(), gnorm));
        }
    }

    if converged_starts == 0 {
        return Err(Error::NoStartConverged { best_gradient });
    }
    let (best_g, best_x, gradient_norm_at_best) = best.expect("a converged start exists");
    Ok(OptimizationResult {
        pulse_count: n,
        best_beta: full_beta(&best_x, n),
        best_g,
        starts,
        converged_starts,
        gradient_norm_at_best,
    })
}
