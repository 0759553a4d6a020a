// SPDX-License-Identifier: Apache-2.0

//! Dynamical-decoupling pulse sequences on the normalized window [0, 1].
//!
//! A sequence is the strictly increasing list of flip positions
//! 0 < a_1 < ... < a_N < 1, expressed as fractions of the total evolution
//! time. Physical time only enters downstream, when interval lengths are
//! multiplied by t. The associated switching function starts at +1 and
//! changes sign at every pulse.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Minimum admissible gap between neighboring pulses and between a pulse
/// and either window endpoint.
pub const MIN_GAP: f64 = 1e-9;

/// Cap on the concatenation level of [`PulseSequence::cdd`]; the pulse
/// count grows as 2^level.
pub const CDD_LEVEL_CAP: u32 = 12;

/// An immutable, validated pulse sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    positions: Vec<f64>,
}

impl PulseSequence {
    /// The empty sequence: free evolution, no pulses.
    pub fn free() -> Self {
        PulseSequence {
            positions: Vec::new(),
        }
    }

    /// Build from explicit positions, validating ordering and gaps.
    pub fn from_positions(positions: Vec<f64>) -> Result<Self> {
        for (index, &p) in positions.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite {
                    what: "pulse positions",
                });
            }
            if !(MIN_GAP..=1.0 - MIN_GAP).contains(&p) {
                return Err(Error::PulseOutOfWindow { index, value: p });
            }
        }
        for index in 1..positions.len() {
            let gap = positions[index] - positions[index - 1];
            if gap < MIN_GAP {
                return Err(Error::PulseGap {
                    index: index - 1,
                    gap,
                    min_gap: MIN_GAP,
                });
            }
        }
        Ok(PulseSequence { positions })
    }

    /// Periodic sequence with pulses at (2n - 1)/(2N). `count = 0` yields
    /// the free-evolution sequence.
    pub fn cpmg(count: usize) -> Self {
        let positions = (1..=count)
            .map(|n| (2 * n - 1) as f64 / (2 * count) as f64)
            .collect();
        PulseSequence { positions }
    }

    /// Single pulse at the window midpoint.
    pub fn hahn() -> Self {
        Self::cpmg(1)
    }

    /// Non-periodic sequence with pulses at sin^2(n pi / (2N + 2)).
    ///
    /// Positions whose angle is pi/6, pi/4, or pi/3 are the exact rationals
    /// 1/4, 1/2, 3/4; those are produced without trig so that the N = 1, 2
    /// sequences coincide bit-for-bit with their periodic counterparts. The
    /// upper half mirrors the lower half exactly.
    pub fn udd(count: usize) -> Self {
        let denom = 2 * count + 2;
        let mut positions = vec![0.0; count];
        for n in 1..=count.div_ceil(2) {
            let p = if 4 * n == denom {
                0.5
            } else if 6 * n == denom {
                0.25
            } else if 3 * n == denom {
                0.75
            } else {
                let angle = (n as f64) * core::f64::consts::PI / denom as f64;
                let s = angle.sin();
                s * s
            };
            positions[n - 1] = p;
            positions[count - n] = 1.0 - p;
        }
        PulseSequence { positions }
    }

    /// Concatenated sequence of the given nesting level.
    ///
    /// Each level embeds two copies of the previous one into the half
    /// windows with a seam pulse between them; the trailing pulse at the
    /// window end cancels against the measurement frame at every level,
    /// leaving the dyadic midpoint grid k/2^level.
    pub fn cdd(level: u32) -> Result<Self> {
        if level > CDD_LEVEL_CAP {
            return Err(Error::CddLevelCap {
                level,
                cap: CDD_LEVEL_CAP,
            });
        }
        fn build(level: u32) -> Vec<f64> {
            if level == 0 {
                return Vec::new();
            }
            let inner = build(level - 1);
            let mut out: Vec<f64> = inner.iter().map(|p| p * 0.5).collect();
            out.push(0.5);
            out.extend(inner.iter().map(|p| 0.5 + p * 0.5));
            out
        }
        Ok(PulseSequence {
            positions: build(level),
        })
    }

    /// Number of pulses N.
    pub fn count(&self) -> usize {
        self.positions.len()
    }

    /// True for the empty (free evolution) sequence.
    pub fn is_free(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// The N + 1 inter-pulse intervals a_k, including the leading and
    /// trailing segments. They sum to 1.
    pub fn intervals(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.positions.len() + 1);
        let mut prev = 0.0;
        for &p in &self.positions {
            out.push(p - prev);
            prev = p;
        }
        out.push(1.0 - prev);
        out
    }

    /// Sign of the switching function on interval `k` (0-based): +1 before
    /// the first pulse, alternating afterwards.
    pub fn interval_sign(&self, k: usize) -> f64 {
        if k.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Alternating interval sum a_1 - a_2 + ... + (-1)^N a_(N+1). Zero
    /// means the sequence refocuses static dephasing (the echo condition).
    ///
    /// Compensated summation keeps the cancellation error near one ulp
    /// even for long sequences.
    pub fn echo_residual(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (k, a) in self.intervals().into_iter().enumerate() {
            let term = self.interval_sign(k) * a;
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// Deviations of the pulse positions from the periodic grid,
    /// beta_n = a_n - (2n - 1)/(2N).
    pub fn beta(&self) -> Result<Vec<f64>> {
        let n = self.count();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(self
            .positions
            .iter()
            .enumerate()
            .map(|(i, &p)| p - (2 * i + 1) as f64 / (2 * n) as f64)
            .collect())
    }

    /// Value of the switching function at normalized time `s` in [0, 1].
    /// The flip takes effect at the pulse itself, so the value is
    /// right-continuous.
    pub fn switching_value(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::TimeOutOfWindow(s));
        }
        let flips = self.positions.partition_point(|&p| p <= s);
        Ok(if flips.is_multiple_of(2) { 1.0 } else { -1.0 })
    }
}

/// Parse a sequence spec string: `cpmg:N`, `udd:N`, `cdd:L`, `hahn`,
/// `free`, or `pos:p1,p2,...`.
pub fn parse_sequence_spec(spec: &str) -> Result<PulseSequence> {
    let trimmed = spec.trim();
    let bad = |reason: &str| Error::SequenceSpec {
        spec: trimmed.to_string(),
        reason: reason.to_string(),
    };
    match trimmed {
        "free" => return Ok(PulseSequence::free()),
        "hahn" => return Ok(PulseSequence::hahn()),
        _ => {}
    }
    let (kind, arg) = trimmed
        .split_once(':')
        .ok_or_else(|| bad("expected one of free, hahn, cpmg:N, udd:N, cdd:L, pos:p1,p2,..."))?;
    match kind {
        "cpmg" => {
            let n: usize = arg
                .parse()
                .map_err(|_| bad("pulse count must be a non-negative integer"))?;
            Ok(PulseSequence::cpmg(n))
        }
        "udd" => {
            let n: usize = arg
                .parse()
                .map_err(|_| bad("pulse count must be a non-negative integer"))?;
            Ok(PulseSequence::udd(n))
        }
        "cdd" => {
            let level: u32 = arg
                .parse()
                .map_err(|_| bad("level must be a non-negative integer"))?;
            PulseSequence::cdd(level)
        }
        "pos" => {
            let positions = arg
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect::<core::result::Result<Vec<f64>, _>>()
                .map_err(|_| bad("positions must be a comma-separated list of numbers"))?;
            PulseSequence::from_positions(positions)
        }
        _ => Err(bad("unknown sequence kind")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cpmg_examples() {
        assert_eq!(PulseSequence::cpmg(1).positions(), &[0.5]);
        assert_eq!(PulseSequence::cpmg(2).positions(), &[0.25, 0.75]);
        assert_eq!(
            PulseSequence::cpmg(4).positions(),
            &[0.125, 0.375, 0.625, 0.875]
        );
        assert_eq!(PulseSequence::cpmg(2).intervals(), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn cpmg_zero_is_flagged_free_evolution() {
        let seq = PulseSequence::cpmg(0);
        assert!(seq.is_free());
        assert_eq!(seq.count(), 0);
        assert_eq!(seq.intervals(), vec![1.0]);
    }

    #[test]
    fn udd_examples() {
        assert_eq!(PulseSequence::udd(1).positions(), &[0.5]);
        // udd(2) coincides with cpmg(2) exactly
        assert_eq!(
            PulseSequence::udd(2).positions(),
            PulseSequence::cpmg(2).positions()
        );
        // closed form: sin^2(pi/8) = (2 - sqrt(2))/4
        let lo = (2.0 - 2.0f64.sqrt()) / 4.0;
        let got = PulseSequence::udd(3);
        assert!((got.positions()[0] - lo).abs() < 1e-15);
        assert_eq!(got.positions()[1], 0.5);
        assert!((got.positions()[2] - (1.0 - lo)).abs() < 1e-15);
    }

    #[test]
    fn udd_matches_trig_formula() {
        for n in 1..=16usize {
            let seq = PulseSequence::udd(n);
            for (i, &p) in seq.positions().iter().enumerate() {
                let angle = (i + 1) as f64 * core::f64::consts::PI / (2 * n + 2) as f64;
                assert!((p - angle.sin().powi(2)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cdd_examples() {
        assert_eq!(PulseSequence::cdd(1).unwrap().positions(), &[0.5]);
        assert_eq!(
            PulseSequence::cdd(2).unwrap().positions(),
            &[0.25, 0.5, 0.75]
        );
        let l3 = PulseSequence::cdd(3).unwrap();
        assert!(l3.count() <= 8);
        assert_eq!(l3.count(), 7);
        for (i, &p) in l3.positions().iter().enumerate() {
            assert_eq!(p, (i + 1) as f64 / 8.0);
        }
    }

    #[test]
    fn cdd_rejects_excessive_level() {
        assert!(matches!(
            PulseSequence::cdd(CDD_LEVEL_CAP + 1),
            Err(Error::CddLevelCap { .. })
        ));
        assert!(PulseSequence::cdd(CDD_LEVEL_CAP).is_ok());
    }

    #[test]
    fn echo_residual_examples() {
        for n in 1..=3 {
            assert!(PulseSequence::cpmg(n).echo_residual().abs() < 1e-15);
        }
        let single = PulseSequence::from_positions(vec![0.4]).unwrap();
        assert!((single.echo_residual() + 0.2).abs() < 1e-15);
        assert_eq!(PulseSequence::free().echo_residual(), 1.0);
    }

    #[test]
    fn beta_examples() {
        assert!(PulseSequence::cpmg(5)
            .beta()
            .unwrap()
            .iter()
            .all(|&b| b == 0.0));
        let seq = PulseSequence::from_positions(vec![0.3, 0.8]).unwrap();
        let beta = seq.beta().unwrap();
        assert!((beta[0] - 0.05).abs() < 1e-15);
        assert!((beta[1] - 0.05).abs() < 1e-15);
        let udd3 = PulseSequence::udd(3).beta().unwrap();
        let expected = (2.0 - 2.0f64.sqrt()) / 4.0 - 1.0 / 6.0;
        assert!((udd3[0] - expected).abs() < 1e-15);
        assert!(udd3[1].abs() < 1e-15);
        assert!((udd3[2] + expected).abs() < 1e-15);
        assert!(matches!(
            PulseSequence::free().beta(),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn switching_value_examples() {
        let hahn = PulseSequence::cpmg(1);
        assert_eq!(hahn.switching_value(0.25).unwrap(), 1.0);
        assert_eq!(hahn.switching_value(0.75).unwrap(), -1.0);
        let two = PulseSequence::cpmg(2);
        assert_eq!(two.switching_value(0.5).unwrap(), -1.0);
        assert_eq!(two.switching_value(0.0).unwrap(), 1.0);
        assert_eq!(two.switching_value(1.0).unwrap(), 1.0);
        assert!(matches!(
            hahn.switching_value(1.5),
            Err(Error::TimeOutOfWindow(_))
        ));
        assert!(matches!(
            hahn.switching_value(-0.1),
            Err(Error::TimeOutOfWindow(_))
        ));
    }

    #[test]
    fn presets_satisfy_invariants_up_to_64_pulses() {
        for n in 1..=64usize {
            for seq in [PulseSequence::cpmg(n), PulseSequence::udd(n)] {
                let pos = seq.positions();
                assert!(pos[0] >= MIN_GAP);
                assert!(*pos.last().unwrap() <= 1.0 - MIN_GAP);
                for w in pos.windows(2) {
                    assert!(w[1] - w[0] >= MIN_GAP);
                }
                let total: f64 = seq.intervals().iter().sum();
                assert!((total - 1.0).abs() < 1e-15);
                assert!(seq.echo_residual().abs() < 1e-12);
            }
        }
        for level in 1..=6u32 {
            let seq = PulseSequence::cdd(level).unwrap();
            assert_eq!(seq.count(), (1usize << level) - 1);
            let total: f64 = seq.intervals().iter().sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cpmg_echo_and_beta_are_exactly_zero() {
        // the stored positions are correctly rounded, so the alternating
        // sum carries up to ~N/2 position ulps; measured worst case over
        // N <= 64 is 1.8e-15 at N = 63
        for n in 1..=64usize {
            let seq = PulseSequence::cpmg(n);
            let bound = if n <= 32 { 1e-15 } else { 2.5e-15 };
            assert!(
                seq.echo_residual().abs() < bound,
                "n={n}: residual {:e}",
                seq.echo_residual()
            );
            assert!(seq.beta().unwrap().iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn from_positions_rejects_invalid_inputs() {
        assert!(matches!(
            PulseSequence::from_positions(vec![0.0]),
            Err(Error::PulseOutOfWindow { .. })
        ));
        assert!(matches!(
            PulseSequence::from_positions(vec![1.0 - 1e-10]),
            Err(Error::PulseOutOfWindow { .. })
        ));
        assert!(matches!(
            PulseSequence::from_positions(vec![0.5, 0.5 + 1e-10]),
            Err(Error::PulseGap { .. })
        ));
        assert!(matches!(
            PulseSequence::from_positions(vec![0.6, 0.4]),
            Err(Error::PulseGap { .. })
        ));
        assert!(matches!(
            PulseSequence::from_positions(vec![f64::NAN]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn spec_strings_parse() {
        assert_eq!(parse_sequence_spec("free").unwrap(), PulseSequence::free());
        assert_eq!(parse_sequence_spec("hahn").unwrap(), PulseSequence::cpmg(1));
        assert_eq!(
            parse_sequence_spec("cpmg:4").unwrap(),
            PulseSequence::cpmg(4)
        );
        assert_eq!(parse_sequence_spec("udd:3").unwrap(), PulseSequence::udd(3));
        assert_eq!(
            parse_sequence_spec("cdd:2").unwrap(),
            PulseSequence::cdd(2).unwrap()
        );
        assert_eq!(
            parse_sequence_spec("pos:0.1,0.5,0.9").unwrap().positions(),
            &[0.1, 0.5, 0.9]
        );
        assert!(matches!(
            parse_sequence_spec("cpmg"),
            Err(Error::SequenceSpec { .. })
        ));
        assert!(matches!(
            parse_sequence_spec("cpmg:x"),
            Err(Error::SequenceSpec { .. })
        ));
        assert!(matches!(
            parse_sequence_spec("walsh:3"),
            Err(Error::SequenceSpec { .. })
        ));
        assert!(matches!(
            parse_sequence_spec("pos:0.9,0.1"),
            Err(Error::PulseGap { .. })
        ));
    }

    proptest! {
        #[test]
        fn from_positions_round_trips(raw in proptest::collection::btree_set(1usize..999, 0..12)) {
            let positions: Vec<f64> = raw.iter().map(|&i| i as f64 / 1000.0).collect();
            let seq = PulseSequence::from_positions(positions.clone()).unwrap();
            prop_assert_eq!(seq.positions(), positions.as_slice());
            let rebuilt = PulseSequence::from_positions(seq.positions().to_vec()).unwrap();
            prop_assert_eq!(rebuilt, seq);
        }

        #[test]
        fn intervals_always_sum_to_one(raw in proptest::collection::btree_set(1usize..999, 0..12)) {
            let positions: Vec<f64> = raw.iter().map(|&i| i as f64 / 1000.0).collect();
            let seq = PulseSequence::from_positions(positions).unwrap();
            let total: f64 = seq.intervals().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-15);
        }
    }
}
