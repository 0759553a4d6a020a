// SPDX-License-Identifier: Apache-2.0

//! Short-time expansion of the decoherence function.
//!
//! For a sequence satisfying the echo condition the expansion of
//! `<x(t)> - 1` starts at third order, with coefficient `g3(seq) * s` where
//! `s` is the model contraction 1^T W G W y(0) and
//!
//! ```text
//! g3 = - Int_0^1 f(s3) Int_0^(s3) Int_0^(s2) f(s1) ds1 ds2 ds3
//! ```
//!
//! over the switching function f. The integral is evaluated exactly in
//! O(N) by carrying the antiderivatives F and D across the switching
//! intervals; as a function of the pulse positions it is a cubic
//! polynomial, which the decomposition routines exploit by polynomial
//! interpolation along deviation rays.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::engine;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pulses::PulseSequence;

/// Tolerance on the echo residual for expansion-based interpretations.
pub const ECHO_TOL: f64 = 1e-12;

/// Caps on the word expansion; the term count grows as 2^order and the
/// composition count as pulses^order.
pub const MAX_WORD_ORDER: usize = 4;
pub const MAX_WORD_PULSES: usize = 6;

/// Evaluate the third-order coefficient for raw switching breakpoints.
///
/// Interval k runs from `positions[k-1]` to `positions[k]` (with the window
/// endpoints 0 and 1 added) and carries the alternating sign. The
/// accumulation is a polynomial in the positions, so callers may pass
/// out-of-order or out-of-window values to obtain the polynomial extension
/// used by the scaling analysis.
#[allow(clippy::needless_range_loop)]
pub(crate) fn g3_positions(positions: &[f64]) -> f64 {
    let n = positions.len();
    let mut f = 0.0; // running F(tau) = int_0^tau f
    let mut d = 0.0; // running D(tau) = int_0^tau F
    let mut g = 0.0;
    let mut left = 0.0;
    let mut sign = 1.0;
    for k in 0..=n {
        let right = if k < n { positions[k] } else { 1.0 };
        let len = right - left;
        // int_interval D = D0 len + F0 len^2/2 + sign len^3/6
        let int_d = len * (d + len * (0.5 * f + sign * len / 6.0));
        g -= sign * int_d;
        d += len * (f + sign * len * 0.5);
        f += sign * len;
        left = right;
        sign = -sign;
    }
    g
}

/// Gradient of [`g3_positions`] with respect to each pulse position.
///
/// Moving pulse m changes the switching function by 2 s_m at the pulse, so
/// dG/da_m = -2 s_m [D(a_m) + U(a_m)] with U(tau) = int_tau^1 f(s)(s - tau) ds.
pub(crate) fn g3_gradient_positions(positions: &[f64]) -> Vec<f64> {
    let n = positions.len();
    if n == 0 {
        return Vec::new();
    }
    // forward pass: D at every pulse position
    let mut d_at = vec![0.0; n];
    {
        let mut f = 0.0;
        let mut d = 0.0;
        let mut left = 0.0;
        let mut sign = 1.0;
        for k in 0..n {
            let len = positions[k] - left;
            d += len * (f + sign * len * 0.5);
            f += sign * len;
            d_at[k] = d;
            left = positions[k];
            sign = -sign;
        }
    }
    // backward pass: T(tau) = int_tau^1 f and U at every pulse position
    let mut u_at = vec![0.0; n];
    {
        let mut t_acc = 0.0;
        let mut u_acc = 0.0;
        let mut right = 1.0;
        for k in (0..n).rev() {
            // interval k+1 (after pulse k) carries sign (-1)^(k+1)
            let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let len = right - positions[k];
            u_acc += len * t_acc + sign * len * len * 0.5;
            t_acc += sign * len;
            u_at[k] = u_acc;
            right = positions[k];
        }
    }
    (0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * sign * (d_at[k] + u_at[k])
        })
        .collect()
}

/// Positions of the periodic grid deviated by `lambda * beta`.
pub(crate) fn deviated_positions(n: usize, beta: &[f64], lambda: f64) -> Vec<f64> {
    debug_assert_eq!(beta.len(), n);
    (0..n)
        .map(|i| (2 * i + 1) as f64 / (2 * n) as f64 + lambda * beta[i])
        .collect()
}

/// Third-order decoherence coefficient of a pulse sequence.
///
/// For echo-satisfying sequences, `<x(t)> = 1 + g3 * s * t^3 + O(t^4)` with
/// `s` from [`third_order_scalar`]. The integral itself is defined (and
/// returned) for any sequence.
pub fn g3(seq: &PulseSequence) -> f64 {
    g3_positions(seq.positions())
}

/// Decomposition of `g3` along the sequence's own deviation from the
/// periodic grid: constant + quadratic + cubic parts in the deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicDecomposition {
    pub g_total: f64,
    pub constant_part: f64,
    pub quadratic_part: f64,
    pub cubic_part: f64,
}

/// Interpolate the cubic polynomial lambda -> g3(grid + lambda beta) from
/// its values at lambda in {0, 1, -1, 2}; returns (c0, c1, c2, c3).
pub(crate) fn cubic_along_deviation(n: usize, beta: &[f64]) -> (f64, f64, f64, f64) {
    let p0 = g3_positions(&deviated_positions(n, beta, 0.0));
    let p1 = g3_positions(&deviated_positions(n, beta, 1.0));
    let pm1 = g3_positions(&deviated_positions(n, beta, -1.0));
    let p2 = g3_positions(&deviated_positions(n, beta, 2.0));
    let c2 = 0.5 * (p1 + pm1) - p0;
    let odd = 0.5 * (p1 - pm1); // c1 + c3
    let v = p2 - p0 - 4.0 * c2; // 2 c1 + 8 c3
    let c3 = (v - 2.0 * odd) / 6.0;
    let c1 = odd - c3;
    (p0, c1, c2, c3)
}

/// Split `g3(seq)` into 1/(12 N^2) plus the quadratic and cubic parts in
/// the deviation from the periodic grid.
///
/// Requires the echo condition; the linear part must then vanish, and a
/// linear term above 1e-10 is reported as an internal-consistency failure.
pub fn g3_parts(seq: &PulseSequence) -> Result<CubicDecomposition> {
    let n = seq.count();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let residual = seq.echo_residual();
    if residual.abs() > ECHO_TOL {
        return Err(Error::EchoViolation {
            residual,
            tol: ECHO_TOL,
        });
    }
    let beta = seq.beta()?;
    let (_, c1, c2, c3) = cubic_along_deviation(n, &beta);
    if c1.abs() > 1e-10 {
        return Err(Error::LinearTermNonzero { value: c1 });
    }
    // the quadratic part is a positive form on the echo hyperplane; only
    // interpolation rounding can push it below zero
    if c2 < -1e-12 {
        return Err(Error::LinearTermNonzero { value: c2 });
    }
    Ok(CubicDecomposition {
        g_total: g3(seq),
        constant_part: 1.0 / (12.0 * (n * n) as f64),
        quadratic_part: c2.max(0.0),
        cubic_part: c3,
    })
}

/// Model contraction s = 1^T W G W y(0); the prefactor multiplying
/// `g3 * t^3` in the short-time expansion.
///
/// Vanishes for static noise (G = 0) and for noise with all levels equal.
pub fn third_order_scalar(model: &NoiseModel) -> f64 {
    let k = model.states();
    let w = model.levels();
    let mut v: Vec<f64> = (0..k)
        .map(|j| w[j] * model.initial_distribution()[j])
        .collect();
    v = model.generator().matvec(&v);
    (0..k).map(|j| w[j] * v[j]).sum()
}

/// Full expansion report for a model/sequence pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionReport {
    pub g_total: f64,
    pub quadratic_part: f64,
    pub cubic_part: f64,
    pub constant_part: f64,
    pub scalar_s: f64,
    pub predicted_cubic: f64,
}

pub fn expansion_report(model: &NoiseModel, seq: &PulseSequence) -> Result<ExpansionReport> {
    let parts = g3_parts(seq)?;
    let scalar_s = third_order_scalar(model);
    Ok(ExpansionReport {
        g_total: parts.g_total,
        quadratic_part: parts.quadratic_part,
        cubic_part: parts.cubic_part,
        constant_part: parts.constant_part,
        scalar_s,
        predicted_cubic: parts.g_total * scalar_s,
    })
}

/// Estimate the coefficient of t^3 in `<x(t)> - 1` from the exact engine.
///
/// Samples the curve at t0 * 2^(-i), i = 0..6, with t0 placing the
/// predicted decoherence magnitude at 1e-5 (inside the [1e-6, 1e-4] window
/// that clears the rounding floor while keeping O(t^4) negligible), then
/// refines the ratio estimates by two Richardson halving steps.
pub fn fit_cubic(model: &NoiseModel, seq: &PulseSequence) -> Result<f64> {
    let residual = seq.echo_residual();
    if residual.abs() > ECHO_TOL {
        return Err(Error::EchoViolation {
            residual,
            tol: ECHO_TOL,
        });
    }
    let s = third_order_scalar(model);
    let level_scale = model.levels().iter().fold(0.0f64, |m, w| m.max(w * w));
    let rate_scale = (0..model.states()).fold(0.0f64, |m, j| m.max(-model.generator()[(j, j)]));
    let s_scale = level_scale * rate_scale;
    if s_scale == 0.0 || s.abs() <= 1e-13 * s_scale {
        return Err(Error::DegenerateModel);
    }

    let predicted = g3(seq) * s;
    let t0 = (1e-5 / predicted.abs()).cbrt();
    let grid: Vec<f64> = (0..7).map(|j| t0 * (2.0f64).powi(j - 6)).collect();
    let samples = engine::curve(model, seq, &grid)?;

    let top = samples[6].value.re - 1.0;
    if top.abs() < 1e-13 {
        return Err(Error::ResolutionFloor { value: top });
    }

    // r[i] at t_i = t0 / 2^i, largest time first
    let r: Vec<f64> = (0..7)
        .map(|i| {
            let t = grid[6 - i];
            (samples[6 - i].value.re - 1.0) / (t * t * t)
        })
        .collect();
    // halving steps kill the t and then the t^2 error terms
    let l1: Vec<f64> = (0..6).map(|i| 2.0 * r[i + 1] - r[i]).collect();
    let l2: Vec<f64> = (0..5).map(|i| (4.0 * l1[i + 1] - l1[i]) / 3.0).collect();
    Ok(l2[4])
}

// ---------------------------------------------------------------------------
// Word expansion
// ---------------------------------------------------------------------------

/// A letter of the operator alphabet: the jump generator or the level
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Letter {
    /// The generator G.
    Jump,
    /// The diagonal level matrix W.
    Level,
}

/// An ordered operator word, leftmost factor first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Total order in t contributed by this word.
    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn starts_with_jump(&self) -> bool {
        self.0.first() == Some(&Letter::Jump)
    }

    pub fn ends_with_jump(&self) -> bool {
        self.0.last() == Some(&Letter::Jump)
    }

    pub fn is_pure_level(&self) -> bool {
        !self.0.is_empty() && self.0.iter().all(|l| *l == Letter::Level)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for letter in &self.0 {
            match letter {
                Letter::Jump => write!(f, "\u{0393}")?,
                Letter::Level => write!(f, "W")?,
            }
        }
        Ok(())
    }
}

/// Coefficient and model contraction of one word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordTerm {
    /// c_w: collects the interval weights a_k^m/m! and the (i * sign)
    /// factor of every level letter. Model independent.
    pub coefficient: Complex64,
    /// 1^T w y(0) with the word evaluated as a matrix product.
    pub contraction: f64,
}

impl WordTerm {
    /// Contribution of the word to `<x(t)>` per power of t.
    pub fn contribution(&self) -> Complex64 {
        self.coefficient * self.contraction
    }
}

/// Truncated operator-word expansion of the decoherence function:
/// `<x(t)> = sum_w coefficient(w) * contraction(w) * t^order(w) + O(t^(order+1))`.
#[derive(Debug, Clone)]
pub struct WordExpansion {
    pub order: usize,
    pub terms: BTreeMap<Word, WordTerm>,
}

impl WordExpansion {
    pub fn coefficient(&self, word: &Word) -> Complex64 {
        self.terms
            .get(word)
            .map(|t| t.coefficient)
            .unwrap_or(Complex64::ZERO)
    }

    /// Partial sum of the expansion at time t.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.terms
            .values()
            .zip(self.terms.keys())
            .map(|(term, word)| term.contribution() * t.powi(word.order() as i32))
            .sum()
    }
}

/// Expand every interval exponential as a truncated operator series and
/// collect terms by letter ordering across intervals.
pub fn word_expansion(
    model: &NoiseModel,
    seq: &PulseSequence,
    order: usize,
) -> Result<WordExpansion> {
    if order > MAX_WORD_ORDER || seq.count() > MAX_WORD_PULSES {
        return Err(Error::WordExpansionCap {
            order,
            pulses: seq.count(),
            max_order: MAX_WORD_ORDER,
            max_pulses: MAX_WORD_PULSES,
        });
    }

    const FACTORIAL: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];
    const I_POW: [Complex64; 4] = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];

    // product over intervals, rightmost interval first; prepending each
    // interval's letters keeps the leftmost factor from the last interval
    let mut acc: BTreeMap<Vec<Letter>, Complex64> = BTreeMap::new();
    acc.insert(Vec::new(), Complex64::ONE);

    for (k, a) in seq.intervals().into_iter().enumerate() {
        let sign = seq.interval_sign(k);
        let mut local: Vec<(Vec<Letter>, Complex64)> = Vec::new();
        for (m, factorial) in FACTORIAL.iter().enumerate().take(order + 1) {
            let base = a.powi(m as i32) / factorial;
            for mask in 0u32..(1u32 << m) {
                let letters: Vec<Letter> = (0..m)
                    .map(|bit| {
                        if mask >> (m - 1 - bit) & 1 == 1 {
                            Letter::Level
                        } else {
                            Letter::Jump
                        }
                    })
                    .collect();
                let levels = mask.count_ones() as usize;
                let sign_pow = if sign < 0.0 && levels % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                let coeff = I_POW[levels % 4] * (base * sign_pow);
                local.push((letters, coeff));
            }
        }

        let mut next: BTreeMap<Vec<Letter>, Complex64> = BTreeMap::new();
        for (word, c) in &acc {
            for (prefix, lc) in &local {
                if prefix.len() + word.len() > order {
                    continue;
                }
                let mut combined = prefix.clone();
                combined.extend_from_slice(word);
                *next.entry(combined).or_insert(Complex64::ZERO) += lc * c;
            }
        }
        acc = next;
    }

    let k = model.states();
    let terms = acc
        .into_iter()
        .map(|(letters, coefficient)| {
            // contraction 1^T w y(0), applying letters right to left
            let mut v: Vec<f64> = model.initial_distribution().to_vec();
            for letter in letters.iter().rev() {
                v = match letter {
                    Letter::Jump => model.generator().matvec(&v),
                    Letter::Level => (0..k).map(|j| model.levels()[j] * v[j]).collect(),
                };
            }
            let contraction: f64 = v.iter().sum();
            (
                Word(letters),
                WordTerm {
                    coefficient,
                    contraction,
                },
            )
        })
        .collect();

    Ok(WordExpansion { order, terms })
}
