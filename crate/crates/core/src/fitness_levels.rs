//! Fitness-level method with tail bounds.
//!
//! A level partition lists, for every level `i = k..m-1`, the probability
//! that one step leaves level `i` upwards. Starting from level `k`, the first
//! hitting time of the top level is then compared with the geometric sum
//! over those probabilities.
//!
//! The type does not record whether the probabilities are exact, lower
//! bounds (valid for [`upper_time_bound`]) or upper bounds (valid for
//! [`lower_time_bound`] together with `no_skip`). Callers pick the reading.

use serde::{Deserialize, Serialize};

use crate::tail_bounds::{
    lower_tail_bound, upper_tail_bound, BoundError, GeometricSumSpec, Regime,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPartition {
    level_probs: Vec<f64>,
    start_level: usize,
    no_skip: bool,
}

impl LevelPartition {
    /// `level_probs[j]` belongs to level `start_level + j`.
    pub fn new(
        level_probs: Vec<f64>,
        start_level: usize,
        no_skip: bool,
    ) -> Result<Self, BoundError> {
        GeometricSumSpec::new(level_probs.clone())?;
        Ok(Self {
            level_probs,
            start_level,
            no_skip,
        })
    }

    pub fn level_probs(&self) -> &[f64] {
        &self.level_probs
    }

    pub fn start_level(&self) -> usize {
        self.start_level
    }

    /// Index of the target level `m`.
    pub fn target_level(&self) -> usize {
        self.start_level + self.level_probs.len()
    }

    /// True when a step can raise the level by at most one.
    pub fn no_skip(&self) -> bool {
        self.no_skip
    }

    /// The geometric sum over levels `k..m-1`.
    pub fn spec(&self) -> GeometricSumSpec {
        GeometricSumSpec::new(self.level_probs.clone())
            .expect("level probabilities validated on construction")
    }

    /// `sum_{i=k}^{m-1} 1/p_i`.
    pub fn expected_time(&self) -> f64 {
        self.level_probs.iter().map(|p| 1.0 / p).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingTimeBound {
    /// Steps. For `Upper`, the hitting time is at most this; for `Lower`, at least.
    pub time_bound: f64,
    /// Probability with which the statement holds.
    pub confidence: f64,
    pub direction: Direction,
    pub delta: f64,
    pub regime: Regime,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LevelError {
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("lower hitting-time bound needs a partition that cannot skip levels")]
    SkippingNotAllowed,
    #[error("target confidence must lie in (0, 1), got {0}")]
    InvalidConfidence(f64),
}

fn confidence_from_log(log_bound: f64) -> f64 {
    // `0.0 -` keeps a zero confidence positive.
    0.0 - log_bound.exp_m1()
}

/// With probability at least the returned confidence, the hitting time is at
/// most `sum 1/p_i + delta`.
pub fn upper_time_bound(part: &LevelPartition, delta: f64) -> Result<HittingTimeBound, LevelError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(BoundError::NonPositiveDelta(delta).into());
    }
    let tail = upper_tail_bound(&part.spec(), delta, None, None)?;
    Ok(HittingTimeBound {
        time_bound: part.expected_time() + delta,
        confidence: confidence_from_log(tail.log_bound),
        direction: Direction::Upper,
        delta,
        regime: tail.regime,
    })
}

/// With probability at least the returned confidence, the hitting time is at
/// least `sum 1/p_i - delta`, clamped at zero. Requires `no_skip`.
pub fn lower_time_bound(part: &LevelPartition, delta: f64) -> Result<HittingTimeBound, LevelError> {
    if !part.no_skip {
        return Err(LevelError::SkippingNotAllowed);
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(BoundError::NonPositiveDelta(delta).into());
    }
    let tail = lower_tail_bound(&part.spec(), delta, None)?;
    Ok(HittingTimeBound {
        time_bound: (part.expected_time() - delta).max(0.0),
        confidence: confidence_from_log(tail.log_bound),
        direction: Direction::Lower,
        delta,
        regime: tail.regime,
    })
}

/// Smallest `delta` whose bound in `direction` reaches `target_confidence`.
///
/// With `L = ln(1 / (1 - target))`: the lower direction gives
/// `sqrt(2 s L)`; the upper direction tries the quadratic `sqrt(4 s L)` and
/// falls back to the linear `4 L / h` when that exceeds `s h`.
pub fn delta_for_confidence(
    part: &LevelPartition,
    target_confidence: f64,
    direction: Direction,
) -> Result<f64, LevelError> {
    if !(target_confidence > 0.0 && target_confidence < 1.0) {
        return Err(LevelError::InvalidConfidence(target_confidence));
    }
    let spec = part.spec();
    let s = spec.s_exact();
    let log_inv = -(-target_confidence).ln_1p();
    Ok(match direction {
        Direction::Lower => (2.0 * s * log_inv).sqrt(),
        Direction::Upper => {
            let h = spec.h();
            let quadratic = (4.0 * s * log_inv).sqrt();
            if quadratic <= s * h {
                quadratic
            } else {
                4.0 * log_inv / h
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(p: &[f64], no_skip: bool) -> LevelPartition {
        LevelPartition::new(p.to_vec(), 0, no_skip).unwrap()
    }

    #[test]
    fn partition_shape() {
        let lp = LevelPartition::new(vec![0.5, 0.25, 1.0], 2, true).unwrap();
        assert_eq!(lp.target_level(), 5);
        assert_eq!(lp.spec().len(), 3);
        assert_eq!(lp.expected_time(), 7.0);
        assert!(LevelPartition::new(vec![], 0, true).is_err());
        assert!(LevelPartition::new(vec![0.0], 0, true).is_err());
    }

    #[test]
    fn upper_examples() {
        let b = upper_time_bound(&part(&[0.5, 0.5], true), 8.0).unwrap();
        assert_eq!(b.time_bound, 12.0);
        assert!((b.confidence - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(b.regime, Regime::Linear);

        let b = upper_time_bound(&part(&[1.0], false), 1.0).unwrap();
        assert_eq!(b.time_bound, 2.0);
        assert!((b.confidence - 0.221_199_216_928_595_1).abs() < 1e-15);
        assert!(upper_time_bound(&part(&[1.0], false), 0.0).is_err());
    }

    #[test]
    fn lower_examples() {
        let b = lower_time_bound(&part(&[0.5, 0.5], true), 2.0).unwrap();
        assert_eq!(b.time_bound, 2.0);
        assert!((b.confidence - 0.221_199_216_928_595_1).abs() < 1e-15);

        assert_eq!(
            lower_time_bound(&part(&[0.5, 0.5], false), 2.0),
            Err(LevelError::SkippingNotAllowed)
        );

        let b = lower_time_bound(&part(&[0.2; 5], true), 5.0).unwrap();
        assert!((b.time_bound - 20.0).abs() < 1e-12);
        assert!((b.confidence - 0.095_162_581_964_040_43).abs() < 1e-12);

        // Vacuous negative times are clamped.
        let b = lower_time_bound(&part(&[0.5, 0.5], true), 10.0).unwrap();
        assert_eq!(b.time_bound, 0.0);
    }

    #[test]
    fn inversion_examples() {
        let p = part(&[0.5, 0.5], true);
        let d = delta_for_confidence(&p, 1.0 - (-0.25f64).exp(), Direction::Lower).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
        let d = delta_for_confidence(&p, 1.0 - (-1.0f64).exp(), Direction::Upper).unwrap();
        assert!((d - 8.0).abs() < 1e-12);
        let d = delta_for_confidence(&p, 1e-12, Direction::Upper).unwrap();
        assert!(d > 0.0 && d < 1e-4);
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(delta_for_confidence(&p, bad, Direction::Lower).is_err());
        }
    }
}
