//! Exact distribution of a sum of independent geometric variables.
//!
//! Each summand is convolved in with the recurrence
//! `g[t] = p * q[t-1]`, `q[t] = f[t] + (1 - p) * q[t-1]`, where `f` is the
//! running pmf and `q[t] = sum_{u <= t} f[u] (1-p)^(t-u)`. Mass pushed past
//! `t_max` is accumulated into the residual by addition only, so upper tails
//! carry no truncation or cancellation error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tail_bounds::GeometricSumSpec;

/// Largest `n * t_max` the oracle will attempt.
pub const MAX_CELLS: u128 = 100_000_000;

/// Residual mass above which a pmf is flagged as heavily truncated.
pub const RESIDUAL_WARN: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("t_max = {t_max} is below the minimum support value n = {n}")]
    TruncationBelowSupport { t_max: u64, n: usize },
    #[error("oracle instance too large: n * t_max = {cells} exceeds {MAX_CELLS} cells")]
    TooLarge { cells: u128 },
    #[error("threshold must be finite and nonnegative, got {0}")]
    InvalidThreshold(f64),
}

/// Truncated pmf of `X = sum X_i` on `{n, ..., t_max}` plus the mass beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPmf {
    /// Smallest possible value of `X`, equal to the number of summands.
    pub support_start: u64,
    /// `masses[j] = P(X = support_start + j)`.
    pub masses: Vec<f64>,
    /// `P(X > t_max)`.
    pub residual: f64,
    /// Set when `residual > RESIDUAL_WARN`.
    pub truncation_warning: bool,
}

impl ExactPmf {
    pub fn t_max(&self) -> u64 {
        self.support_start + self.masses.len() as u64 - 1
    }

    /// `P(X = t)`, zero outside the stored window.
    pub fn mass(&self, t: u64) -> f64 {
        if t < self.support_start {
            return 0.0;
        }
        self.masses
            .get((t - self.support_start) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// `P(X <= t)` for `t <= t_max`.
    pub fn cdf(&self, t: u64) -> f64 {
        if t < self.support_start {
            return 0.0;
        }
        let upto = ((t - self.support_start) as usize).min(self.masses.len() - 1);
        self.masses[..=upto].iter().sum()
    }

    /// `sum t * P(X = t)` over the stored window.
    pub fn truncated_mean(&self) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(j, m)| (self.support_start + j as u64) as f64 * m)
            .sum()
    }
}

fn check_size(n: usize, t_max: u64) -> Result<(), OracleError> {
    let cells = n as u128 * t_max as u128;
    if cells > MAX_CELLS {
        return Err(OracleError::TooLarge { cells });
    }
    Ok(())
}

/// Whether [`exact_pmf`] would accept `t_max` for this spec.
pub fn is_feasible(spec: &GeometricSumSpec, t_max: u64) -> bool {
    check_size(spec.len(), t_max).is_ok()
}

/// Exact pmf of `X` truncated at `t_max`.
pub fn exact_pmf(spec: &GeometricSumSpec, t_max: u64) -> Result<ExactPmf, OracleError> {
    let n = spec.len();
    if t_max < n as u64 {
        return Err(OracleError::TruncationBelowSupport { t_max, n });
    }
    check_size(n, t_max)?;
    let len = t_max as usize + 1;

    // Point mass at 0 before any summand is added.
    let mut pmf = vec![0.0; len];
    pmf[0] = 1.0;
    let mut residual = 0.0;
    let mut next = vec![0.0; len];

    for (added, &p) in spec.probs().iter().enumerate() {
        let fail = 1.0 - p;
        // Current support begins at `added`; the new one at `added + 1`.
        let lo = added;
        let mut q = 0.0;
        next[..=lo].iter_mut().for_each(|v| *v = 0.0);
        for t in lo..len {
            if t > lo {
                next[t] = p * q;
            }
            q = pmf[t] + fail * q;
        }
        // Mass that would land beyond t_max: sum_u f[u] (1-p)^(t_max - u).
        residual += q;
        std::mem::swap(&mut pmf, &mut next);
    }

    let masses = pmf[n..].to_vec();
    Ok(ExactPmf {
        support_start: n as u64,
        masses,
        residual,
        truncation_warning: residual > RESIDUAL_WARN,
    })
}

fn check_threshold(t: f64) -> Result<(), OracleError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(OracleError::InvalidThreshold(t))
    }
}

/// `P(X > t)`. Equal to the residual of the pmf truncated at `floor(t)`.
pub fn exact_upper_tail(spec: &GeometricSumSpec, t: f64) -> Result<f64, OracleError> {
    check_threshold(t)?;
    let cut = t.floor() as u64;
    if cut < spec.len() as u64 {
        return Ok(1.0);
    }
    Ok(exact_pmf(spec, cut)?.residual)
}

/// `P(X < t)`, i.e. the cdf at `ceil(t) - 1`.
pub fn exact_lower_tail(spec: &GeometricSumSpec, t: f64) -> Result<f64, OracleError> {
    check_threshold(t)?;
    let ceil = t.ceil() as u64;
    if ceil <= spec.len() as u64 {
        return Ok(0.0);
    }
    let cut = ceil - 1;
    Ok(exact_pmf(spec, cut)?.masses.iter().sum())
}
