//! RLS on OneMax through the fitness-level lens.
//!
//! Level `i` holds the strings with exactly `i` one-bits. A single uniform
//! bit flip leaves level `i` upwards with probability `(n - i) / n`, so from
//! start level `k` the expected number of iterations is `n * H_{n-k}`.
//! Bounding `sum 1/p_i^2` by `n^2 pi^2 / 6` and using `h = 1/n` turns the
//! generic tail bounds into the size-free expressions below.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::fitness_levels::LevelPartition;
use crate::tail_bounds::BoundError;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Brackets around `gamma - ln 2` as stated with the expectation band.
pub const BAND_LOWER_COEFF: f64 = 0.11594;
pub const BAND_UPPER_COEFF: f64 = 0.11593;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneMaxAnalysis {
    pub n: u64,
    pub gamma: f64,
    /// `n^2 pi^2 / 6`, an upper bound on `sum 1/p_i^2` over all levels.
    pub s_paper: f64,
    /// `1 / n`, the smallest level-leave probability.
    pub h: f64,
}

impl OneMaxAnalysis {
    pub fn new(n: u64) -> Result<Self, BoundError> {
        if n == 0 {
            return Err(BoundError::NonPositive {
                name: "n",
                value: 0.0,
            });
        }
        let nf = n as f64;
        Ok(Self {
            n,
            gamma: EULER_GAMMA,
            s_paper: s_paper(n),
            h: 1.0 / nf,
        })
    }

    /// The linear-term constant `gamma - ln 2`.
    pub fn sharp_constant(&self) -> f64 {
        self.gamma - LN_2
    }
}

pub fn s_paper(n: u64) -> f64 {
    let nf = n as f64;
    nf * nf * PI * PI / 6.0
}

/// Level-leave probabilities `(n - i) / n` for `i = k..n-1`, no skipping.
pub fn onemax_partition(n: u64, k: u64) -> Result<LevelPartition, BoundError> {
    if k >= n {
        return Err(BoundError::NonPositive {
            name: "n - k",
            value: n as f64 - k as f64,
        });
    }
    let nf = n as f64;
    let probs = (k..n).map(|i| (n - i) as f64 / nf).collect();
    LevelPartition::new(probs, k as usize, true)
}

/// `H_m = sum_{i=1}^m 1/i`, summed from the smallest term up.
pub fn harmonic(m: u64) -> Result<f64, BoundError> {
    if m == 0 {
        return Err(BoundError::NonPositive {
            name: "m",
            value: 0.0,
        });
    }
    Ok((1..=m).rev().map(|i| 1.0 / i as f64).sum())
}

/// `ln m + gamma`.
pub fn harmonic_asymptotic(m: u64) -> f64 {
    (m as f64).ln() + EULER_GAMMA
}

/// `[H_0, H_1, ..., H_m]`.
fn harmonic_table(m: u64) -> Vec<f64> {
    let mut table = Vec::with_capacity(m as usize + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for i in 1..=m {
        acc += 1.0 / i as f64;
        table.push(acc);
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeBand {
    /// `n ln n - 0.11594 n`.
    pub lower: f64,
    /// `n ln n - 0.11593 n`.
    pub upper: f64,
    /// Always true: the `o(n)` terms of the asymptotic statement are not included.
    pub omits_lower_order_terms: bool,
}

/// Asymptotic expectation band for the running time, without `o(n)` terms.
pub fn expected_runtime_band(n: u64) -> Result<RuntimeBand, BoundError> {
    if n < 2 {
        return Err(BoundError::NonPositive {
            name: "n - 1",
            value: n as f64 - 1.0,
        });
    }
    let nf = n as f64;
    let lead = nf * nf.ln();
    Ok(RuntimeBand {
        lower: lead - BAND_LOWER_COEFF * nf,
        upper: lead - BAND_UPPER_COEFF * nf,
        omits_lower_order_terms: true,
    })
}

/// Exact `E[T] = 1 + sum_k C(n,k) 2^-n n H_{n-k}` for a uniform random start.
///
/// Binomial weights are formed in log space so large `n` does not overflow.
pub fn exact_expected_runtime(n: u64) -> Result<f64, BoundError> {
    if n == 0 {
        return Err(BoundError::NonPositive {
            name: "n",
            value: 0.0,
        });
    }
    let nf = n as f64;
    let harmonics = harmonic_table(n);
    let mut log_choose = 0.0;
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let weight = (log_choose - nf * LN_2).exp();
        total += weight * nf * harmonics[(n - k) as usize];
    }
    Ok(1.0 + total)
}

/// Expected running time from a fixed start level `k`: `1 + n H_{n-k}`.
pub fn expected_runtime_from_level(n: u64, k: u64) -> Result<f64, BoundError> {
    if k > n || n == 0 {
        return Err(BoundError::NonPositive {
            name: "n - k",
            value: n as f64 - k as f64,
        });
    }
    if k == n {
        return Ok(1.0);
    }
    Ok(1.0 + n as f64 * harmonic(n - k)?)
}

fn check_r(r: f64) -> Result<(), BoundError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(BoundError::NonPositive {
            name: "r",
            value: r,
        })
    }
}

/// Bound on `P(T <= E[T] - r n)`: `exp(-3 r^2 / pi^2)`.
pub fn onemax_lower_tail(r: f64) -> Result<f64, BoundError> {
    check_r(r)?;
    Ok((-3.0 * r * r / (PI * PI)).exp())
}

/// Bound on `P(T >= E[T] + r n)`: `exp(-3 r^2 / (2 pi^2))` for
/// `r <= pi^2 / 6`, else `exp(-r / 4)`.
pub fn onemax_upper_tail(r: f64) -> Result<f64, BoundError> {
    check_r(r)?;
    if r <= PI * PI / 6.0 {
        Ok((-3.0 * r * r / (2.0 * PI * PI)).exp())
    } else {
        Ok((-r / 4.0).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tail_bounds::{lower_tail_bound, upper_tail_bound};

    #[test]
    fn partition_examples() {
        let p = onemax_partition(3, 0).unwrap();
        assert_eq!(p.level_probs(), &[1.0, 2.0 / 3.0, 1.0 / 3.0]);
        assert!(p.no_skip());
        assert_eq!(p.target_level(), 3);
        assert_eq!(onemax_partition(2, 1).unwrap().level_probs(), &[0.5]);
        assert!(onemax_partition(4, 4).is_err());

        for (n, k) in [(10, 0), (10, 7), (100, 50), (257, 3)] {
            let expected = n as f64 * harmonic(n - k).unwrap();
            let got = onemax_partition(n, k).unwrap().expected_time();
            assert!((got - expected).abs() < 1e-9 * expected, "n={n} k={k}");
        }
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(1).unwrap(), 1.0);
        assert!((harmonic(3).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        let big = harmonic(1_000_000).unwrap();
        assert!((big - (harmonic_asymptotic(1_000_000) + 0.5e-6)).abs() < 5e-7);
        assert!(harmonic(0).is_err());
    }

    #[test]
    fn band_examples() {
        let c = OneMaxAnalysis::new(10).unwrap().sharp_constant();
        assert!((c - (-0.115_931_515_658_412_45)).abs() < 1e-15);
        assert!((-BAND_LOWER_COEFF..=-BAND_UPPER_COEFF).contains(&c));

        let band = expected_runtime_band(1000).unwrap();
        assert!((band.lower - 6_791.815_278_982_137).abs() < 1e-9);
        assert!((band.upper - 6_791.825_278_982_137).abs() < 1e-9);
        assert!(band.omits_lower_order_terms);
        assert!(expected_runtime_band(1).is_err());
    }

    #[test]
    fn exact_expectation_matches_high_precision() {
        // Reference values from a 40-digit binomial-weighted harmonic sum.
        assert!((exact_expected_runtime(10).unwrap() - 23.359_033_978_174_603).abs() < 1e-12);
        assert!((exact_expected_runtime(1000).unwrap() - 6_793.323_679_990_4).abs() < 1e-8);
        assert_eq!(exact_expected_runtime(1).unwrap(), 1.5);
    }

    #[test]
    fn fixed_level_expectation() {
        assert_eq!(expected_runtime_from_level(5, 5).unwrap(), 1.0);
        assert_eq!(expected_runtime_from_level(2, 0).unwrap(), 4.0);
        assert!(expected_runtime_from_level(2, 3).is_err());
    }

    #[test]
    fn tail_examples() {
        assert!((onemax_lower_tail(1.0).unwrap() - 0.737_887_761_285_309_4).abs() < 1e-15);
        assert!((onemax_lower_tail(1e-9).unwrap() - 1.0).abs() < 1e-15);
        assert!((onemax_upper_tail(1.0).unwrap() - 0.859_003_935_547_043_6).abs() < 1e-15);
        assert!((onemax_upper_tail(2.0).unwrap() - 0.606_530_659_712_633_4).abs() < 1e-15);
        let boundary = PI * PI / 6.0;
        assert!((onemax_upper_tail(boundary).unwrap() - 0.662_832_131_147_273_4).abs() < 1e-15);
        assert!(onemax_lower_tail(0.0).is_err());
        assert!(onemax_upper_tail(-1.0).is_err());
    }

    #[test]
    fn specialization_matches_generic_bounds() {
        for n in [10u64, 100, 1000] {
            let spec = onemax_partition(n, 0).unwrap().spec();
            let a = OneMaxAnalysis::new(n).unwrap();
            for r in [0.1, 0.5, 1.0, 1.6, 2.0, 3.0] {
                let delta = r * n as f64;
                let generic = lower_tail_bound(&spec, delta, Some(a.s_paper))
                    .unwrap()
                    .bound;
                let special = onemax_lower_tail(r).unwrap();
                assert!((generic - special).abs() <= 1e-15 * special, "n={n} r={r}");

                let generic = upper_tail_bound(&spec, delta, Some(a.s_paper), Some(a.h))
                    .unwrap()
                    .bound;
                let special = onemax_upper_tail(r).unwrap();
                assert!((generic - special).abs() <= 1e-15 * special, "n={n} r={r}");
            }
        }
    }
}
