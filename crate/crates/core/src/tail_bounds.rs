//! Tail bounds for sums of independent geometric random variables.
//!
//! Every summand `X_i` uses the trials convention: support `{1, 2, 3, ...}`,
//! `P(X_i = j) = p_i (1 - p_i)^(j - 1)` and `E[X_i] = 1 / p_i`. Off-by-one
//! errors against the `{0, 1, ...}` convention shift every mean by `n`.
//!
//! With `s >= sum 1/p_i^2` and `h = min p_i`:
//!
//! ```text
//! P(X < E[X] - delta) <= exp(-delta^2 / (2 s))
//! P(X > E[X] + delta) <= exp(-(delta / 4) * min(delta / s, h))
//! ```
//!
//! All bounds are evaluated in log space and exponentiated once at the end.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building specs or evaluating bounds.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("geometric sum needs at least one summand")]
    EmptySpec,
    #[error("success probability #{index} = {value} is outside (0, 1]")]
    InvalidProbability { index: usize, value: f64 },
    #[error("delta must be a finite nonnegative number, got {0}")]
    InvalidDelta(f64),
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("s override {given} is below the exact sum of 1/p_i^2 = {exact}")]
    SOverrideTooSmall { given: f64, exact: f64 },
    #[error("h override {given} is not in (0, min p_i = {min}]")]
    InvalidHOverride { given: f64, min: f64 },
    #[error("margin check argument {0} is outside the valid domain")]
    LemmaDomain(f64),
    #[error("budget {budget} is below twice the expected time {expected}")]
    BudgetBelowThreshold { budget: f64, expected: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

/// Success probabilities `p_1..p_n` of independent geometric summands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricSumSpec {
    probs: Vec<f64>,
}

impl GeometricSumSpec {
    pub fn new(probs: Vec<f64>) -> Result<Self, BoundError> {
        if probs.is_empty() {
            return Err(BoundError::EmptySpec);
        }
        for (index, &value) in probs.iter().enumerate() {
            // NaN fails both comparisons.
            if !(value > 0.0 && value <= 1.0) {
                return Err(BoundError::InvalidProbability { index, value });
            }
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of summands.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `E[X] = sum 1/p_i`.
    pub fn mean(&self) -> f64 {
        self.probs.iter().map(|p| 1.0 / p).sum()
    }

    /// `sum 1/p_i^2`, the smallest admissible `s`.
    pub fn s_exact(&self) -> f64 {
        self.probs.iter().map(|p| 1.0 / (p * p)).sum()
    }

    /// `h = min p_i`.
    pub fn h(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Exact variance `sum (1 - p_i) / p_i^2`.
    pub fn variance(&self) -> f64 {
        self.probs.iter().map(|p| (1.0 - p) / (p * p)).sum()
    }

    fn resolve_s(&self, s_override: Option<f64>) -> Result<f64, BoundError> {
        let exact = self.s_exact();
        match s_override {
            None => Ok(exact),
            Some(given) if given.is_finite() && given >= exact => Ok(given),
            Some(given) => Err(BoundError::SOverrideTooSmall { given, exact }),
        }
    }

    fn resolve_h(&self, h_override: Option<f64>) -> Result<f64, BoundError> {
        let min = self.h();
        match h_override {
            None => Ok(min),
            Some(given) if given > 0.0 && given <= min => Ok(given),
            Some(given) => Err(BoundError::InvalidHOverride { given, min }),
        }
    }
}

/// Which expression produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `delta^2 / (2s)` (lower tail) or `delta^2 / (4s)` (upper tail, `delta <= s h`).
    Quadratic,
    /// `delta h / 4`, upper tail with `delta > s h`.
    Linear,
    /// `delta = 0`; the bound is 1.
    Degenerate,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Quadratic => "quadratic",
            Regime::Linear => "linear",
            Regime::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundResult {
    pub bound: f64,
    /// Natural log of `bound`; stays finite where `bound` underflows.
    pub log_bound: f64,
    pub regime: Regime,
    pub delta: f64,
    pub s_used: f64,
    /// `None` for the lower tail, which does not depend on `h`.
    pub h_used: Option<f64>,
}

fn check_delta(delta: f64) -> Result<(), BoundError> {
    if delta.is_finite() && delta >= 0.0 {
        Ok(())
    } else {
        Err(BoundError::InvalidDelta(delta))
    }
}

fn check_positive_delta(delta: f64) -> Result<(), BoundError> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(BoundError::NonPositiveDelta(delta))
    }
}

/// Bound on `P(X < E[X] - delta)`: `exp(-delta^2 / (2s))`.
pub fn lower_tail_bound(
    spec: &GeometricSumSpec,
    delta: f64,
    s_override: Option<f64>,
) -> Result<TailBoundResult, BoundError> {
    check_delta(delta)?;
    let s = spec.resolve_s(s_override)?;
    let (log_bound, regime) = if delta == 0.0 {
        (0.0, Regime::Degenerate)
    } else {
        (-(delta * delta) / (2.0 * s), Regime::Quadratic)
    };
    Ok(TailBoundResult {
        bound: log_bound.exp(),
        log_bound,
        regime,
        delta,
        s_used: s,
        h_used: None,
    })
}

/// Log of the quadratic upper-tail expression, `-delta^2 / (4s)`.
pub fn upper_quadratic_exponent(delta: f64, s: f64) -> f64 {
    -(delta * delta) / (4.0 * s)
}

/// Log of the linear upper-tail expression, `-delta h / 4`.
pub fn upper_linear_exponent(delta: f64, h: f64) -> f64 {
    -delta * h / 4.0
}

/// Bound on `P(X > E[X] + delta)`: `exp(-(delta/4) min(delta/s, h))`.
///
/// The regime is decided by the comparison `delta <= s * h` alone, and the
/// matching branch expression is then evaluated.
pub fn upper_tail_bound(
    spec: &GeometricSumSpec,
    delta: f64,
    s_override: Option<f64>,
    h_override: Option<f64>,
) -> Result<TailBoundResult, BoundError> {
    check_delta(delta)?;
    let s = spec.resolve_s(s_override)?;
    let h = spec.resolve_h(h_override)?;
    let (log_bound, regime) = if delta == 0.0 {
        (0.0, Regime::Degenerate)
    } else if delta <= s * h {
        (upper_quadratic_exponent(delta, s), Regime::Quadratic)
    } else {
        (upper_linear_exponent(delta, h), Regime::Linear)
    };
    Ok(TailBoundResult {
        bound: log_bound.exp(),
        log_bound,
        regime,
        delta,
        s_used: s,
        h_used: Some(h),
    })
}

/// `log(e^{x^2/2}) - log(e^x / (1 + x))` for `x >= 0`. Nonnegative on the domain.
pub fn check_lemma2_part1(x: f64) -> Result<f64, BoundError> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(BoundError::LemmaDomain(x));
    }
    Ok(x * x / 2.0 - x + x.ln_1p())
}

/// `log(e^{x^2/(2-2x)}) - log(e^{-x} / (1 - x))` for `0 <= x < 1`.
///
/// Both sides diverge at `x = 1`, so the endpoint is rejected.
pub fn check_lemma2_part2(x: f64) -> Result<f64, BoundError> {
    if !(0.0..1.0).contains(&x) {
        return Err(BoundError::LemmaDomain(x));
    }
    Ok(x * x / (2.0 - 2.0 * x) + x + (-x).ln_1p())
}

/// `ln E[e^{tY}]` for `Y ~ Geom(p)` on `{1, 2, ...}`, valid for `t < -ln(1 - p)`.
///
/// `E[e^{tY}] = p e^t / (1 - e^t (1 - p))`.
pub fn geometric_log_mgf(p: f64, t: f64) -> f64 {
    // 1 - e^{t + ln(1-p)} without cancellation; ln(1-p) = -inf at p = 1.
    let denom = -(t + (-p).ln_1p()).exp_m1();
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    p.ln() + t - denom.ln()
}

const GOLDEN_TOL: f64 = 1e-12;
const LOWER_T_MAX: f64 = 50.0;

/// Minimizes a convex function on `[lo, hi]` by golden-section search.
fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while hi - lo > GOLDEN_TOL * (1.0 + lo.abs()) && iterations < 500 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
        iterations += 1;
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Log of the Chernoff objective for the lower tail at `t > 0`:
/// `t (E[X] - delta) + sum ln mgf_i(-t)`.
pub fn chernoff_lower_exponent(spec: &GeometricSumSpec, delta: f64, t: f64) -> f64 {
    t * (spec.mean() - delta)
        + spec
            .probs
            .iter()
            .map(|&p| geometric_log_mgf(p, -t))
            .sum::<f64>()
}

/// Log of the Chernoff objective for the upper tail at `t > 0`:
/// `-t (E[X] + delta) + sum ln mgf_i(t)`.
pub fn chernoff_upper_exponent(spec: &GeometricSumSpec, delta: f64, t: f64) -> f64 {
    -t * (spec.mean() + delta)
        + spec
            .probs
            .iter()
            .map(|&p| geometric_log_mgf(p, t))
            .sum::<f64>()
}

/// Numerically optimized exponential-method bound on `P(X < E[X] - delta)`.
///
/// Searches `t` over `(0, max(50, delta / s)]`. The closed form's own
/// choice `t = delta / s` is also evaluated, so the result never exceeds
/// [`lower_tail_bound`] with the exact `s`.
pub fn chernoff_lower_bound(spec: &GeometricSumSpec, delta: f64) -> Result<f64, BoundError> {
    check_positive_delta(delta)?;
    let objective = |t: f64| chernoff_lower_exponent(spec, delta, t);
    let analytic_t = delta / spec.s_exact();
    let (_, best) = golden_section_min(objective, 0.0, LOWER_T_MAX.max(analytic_t));
    let log_bound = best.min(objective(analytic_t)).min(0.0);
    Ok(log_bound.exp())
}

/// Numerically optimized exponential-method bound on `P(X > E[X] + delta)`.
///
/// Searches the whole mgf existence domain `0 < t < -ln(1 - h)`, shrunk by a
/// relative `1e-9`. When every `p_i = 1` the sum is deterministic and the
/// domain is unbounded; the search then runs up to `max(50, 1 / delta)`.
pub fn chernoff_upper_bound(spec: &GeometricSumSpec, delta: f64) -> Result<f64, BoundError> {
    check_positive_delta(delta)?;
    let objective = |t: f64| chernoff_upper_exponent(spec, delta, t);
    let h = spec.h();
    let t_hi = if h >= 1.0 {
        LOWER_T_MAX.max(1.0 / delta)
    } else {
        -(-h).ln_1p() * (1.0 - 1e-9)
    };
    let s = spec.s_exact();
    let analytic_t = if delta <= s * h {
        delta / (2.0 * s)
    } else {
        h / 2.0
    };
    let (_, best) = golden_section_min(objective, 0.0, t_hi);
    let log_bound = best.min(objective(analytic_t)).min(0.0);
    Ok(log_bound.exp())
}

/// Prior-work comparison bound `P(T > 2 E[T] + 2 delta w) = e^{-delta}`, with
/// `w` the worst-case expected waiting time on any level.
///
/// Solves `budget = 2 E[T] + 2 delta w` for `delta`.
pub fn zllh_comparison_bound(
    expected_time: f64,
    worst_waiting_time: f64,
    budget: f64,
) -> Result<f64, BoundError> {
    if !(expected_time > 0.0 && expected_time.is_finite()) {
        return Err(BoundError::NonPositive {
            name: "expected_time",
            value: expected_time,
        });
    }
    if !(worst_waiting_time > 0.0 && worst_waiting_time.is_finite()) {
        return Err(BoundError::NonPositive {
            name: "worst_waiting_time",
            value: worst_waiting_time,
        });
    }
    if budget.is_nan() || budget < 2.0 * expected_time {
        return Err(BoundError::BudgetBelowThreshold {
            budget,
            expected: expected_time,
        });
    }
    let delta = (budget - 2.0 * expected_time) / (2.0 * worst_waiting_time);
    Ok((-delta).exp())
}
