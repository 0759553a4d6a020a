// SPDX-License-Identifier: Apache-2.0

//! Machine-readable output forms: CSV curves and JSON reports mirroring
//! the library result types field for field.

use std::io::Write;

use ddtn_core::num_complex::Complex64;
use ddtn_core::{DecoherenceSample, ExpansionReport, MonteCarloEstimate, OptimizationResult};
use serde::Serialize;

use crate::CliError;

/// Full-precision decimal form: 17 significant digits round-trip f64
/// losslessly and keep outputs byte-stable.
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_curve_csv(out: &mut dyn Write, samples: &[DecoherenceSample]) -> Result<(), CliError> {
    writeln!(out, "t,re_x,im_x,abs_x").map_err(io_error)?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{}",
            full_precision(s.t),
            full_precision(s.value.re),
            full_precision(s.value.im),
            full_precision(s.magnitude),
        )
        .map_err(io_error)?;
    }
    Ok(())
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::Validation(format!("cannot write output: {e}"))
}

#[derive(Serialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
pub struct ExpansionJson {
    pub g_total: f64,
    pub quadratic_part: f64,
    pub cubic_part: f64,
    pub constant_part: f64,
    pub scalar_s: f64,
    pub predicted_cubic: f64,
}

impl From<ExpansionReport> for ExpansionJson {
    fn from(r: ExpansionReport) -> Self {
        ExpansionJson {
            g_total: r.g_total,
            quadratic_part: r.quadratic_part,
            cubic_part: r.cubic_part,
            constant_part: r.constant_part,
            scalar_s: r.scalar_s,
            predicted_cubic: r.predicted_cubic,
        }
    }
}

#[derive(Serialize)]
pub struct OptimizationJson {
    pub pulse_count: usize,
    pub best_beta: Vec<f64>,
    pub best_g: f64,
    pub starts: usize,
    pub converged_starts: usize,
    pub gradient_norm_at_best: f64,
}

impl From<OptimizationResult> for OptimizationJson {
    fn from(r: OptimizationResult) -> Self {
        OptimizationJson {
            pulse_count: r.pulse_count,
            best_beta: r.best_beta,
            best_g: r.best_g,
            starts: r.starts,
            converged_starts: r.converged_starts,
            gradient_norm_at_best: r.gradient_norm_at_best,
        }
    }
}

#[derive(Serialize)]
pub struct MonteCarloJson {
    pub mean: ComplexJson,
    pub std_error: f64,
    pub trajectories: u64,
    pub seed: u64,
}

impl From<MonteCarloEstimate> for MonteCarloJson {
    fn from(r: MonteCarloEstimate) -> Self {
        MonteCarloJson {
            mean: r.mean.into(),
            std_error: r.std_error,
            trajectories: r.trajectories,
            seed: r.seed,
        }
    }
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("cannot serialize report: {e}")))?;
    writeln!(out, "{text}").map_err(io_error)
}
