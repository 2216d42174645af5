//! Seeded samplers for RLS, the abstract level chain and the coupon collector.
//!
//! Reproducibility: replication `i` of a batch with master seed `m` uses the
//! run seed `splitmix64_nth(m, i)` (the `(i+1)`-th SplitMix64 output from
//! state `m`) and draws from `ChaCha8Rng::seed_from_u64(run_seed)`
//! (`rand_chacha` 0.3). Histograms are merged by key, so a batch yields the
//! same counts for any worker count.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitness_levels::LevelPartition;

/// Default per-run iteration cap.
pub const DEFAULT_ITERATION_CAP: u64 = 10_000_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("problem size must be at least 1")]
    ZeroSize,
    #[error("start level {k} is outside [0, {n}]")]
    LevelOutOfRange { k: u64, n: u64 },
    #[error("iteration cap of {cap} exceeded in replication {replication}")]
    CapExceeded { cap: u64, replication: u64 },
    #[error("at least one replication is required")]
    ZeroReplications,
    #[error("worker pool: {0}")]
    WorkerPool(String),
}

/// One seeded run. `hitting_time` counts the initial evaluation, so a run
/// that starts at the optimum has `hitting_time = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Problem size (bits, coupon types, or target level of a chain).
    pub n: u64,
    /// Initial level: one-bits of `x_0`, prefilled coupons, or chain start.
    pub start_level: u64,
    pub hitting_time: u64,
}

/// Black-box pseudo-Boolean fitness `f: {0,1}^n -> Z` to be maximized.
pub trait Fitness: Sync {
    fn evaluate(&self, x: &[bool]) -> i64;

    /// The value at which a run stops.
    fn optimum(&self, n: usize) -> i64;

    /// Fitness after flipping `bit`, given `current = evaluate(x)`.
    fn evaluate_flip(&self, x: &[bool], current: i64, bit: usize) -> i64 {
        let _ = current;
        let mut y = x.to_vec();
        y[bit] = !y[bit];
        self.evaluate(&y)
    }

    /// Largest fitness increase a single bit flip can cause, if known.
    fn max_step_gain(&self) -> Option<i64> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OneMax;

impl Fitness for OneMax {
    fn evaluate(&self, x: &[bool]) -> i64 {
        x.iter().filter(|&&b| b).count() as i64
    }

    fn optimum(&self, n: usize) -> i64 {
        n as i64
    }

    fn evaluate_flip(&self, x: &[bool], current: i64, bit: usize) -> i64 {
        if x[bit] {
            current - 1
        } else {
            current + 1
        }
    }

    fn max_step_gain(&self) -> Option<i64> {
        Some(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitnessKind {
    OneMax,
}

impl FitnessKind {
    pub fn function(self) -> &'static dyn Fitness {
        match self {
            FitnessKind::OneMax => &OneMax,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// `x_0` uniform over `{0,1}^n`.
    Uniform,
    /// `x_0` uniform over the strings with exactly `k` one-bits.
    FixedLevel(u64),
}

/// `(index+1)`-th output of SplitMix64 started from `master`.
pub fn splitmix64_nth(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Randomized local search until the optimum is hit.
///
/// Debug builds assert that the accepted fitness never decreases and, when
/// the fitness declares [`Fitness::max_step_gain`], never jumps further.
pub fn rls_run<F: Fitness + ?Sized>(
    n: u64,
    seed: u64,
    fitness: &F,
    init: Init,
    cap: u64,
) -> Result<RunRecord, SimError> {
    if n == 0 {
        return Err(SimError::ZeroSize);
    }
    let len = n as usize;
    let mut rng = rng_for(seed);
    let mut x = match init {
        Init::Uniform => (0..len).map(|_| rng.gen::<bool>()).collect::<Vec<_>>(),
        Init::FixedLevel(k) => {
            if k > n {
                return Err(SimError::LevelOutOfRange { k, n });
            }
            let mut x = vec![false; len];
            for i in sample(&mut rng, len, k as usize) {
                x[i] = true;
            }
            x
        }
    };
    let start_level = x.iter().filter(|&&b| b).count() as u64;
    let optimum = fitness.optimum(len);
    let max_gain = fitness.max_step_gain();
    let mut current = fitness.evaluate(&x);
    let mut iterations = 0u64;
    while current < optimum {
        if iterations >= cap {
            return Err(SimError::CapExceeded {
                cap,
                replication: 0,
            });
        }
        let bit = rng.gen_range(0..len);
        let candidate = fitness.evaluate_flip(&x, current, bit);
        if candidate >= current {
            debug_assert!(max_gain.is_none_or(|g| candidate - current <= g));
            x[bit] = !x[bit];
            current = candidate;
        }
        iterations += 1;
    }
    Ok(RunRecord {
        seed,
        n,
        start_level,
        hitting_time: iterations + 1,
    })
}

/// Abstract no-skip chain: at level `i` each step advances with probability `p_i`.
pub fn level_chain_run(part: &LevelPartition, seed: u64, cap: u64) -> Result<RunRecord, SimError> {
    let mut rng = rng_for(seed);
    let mut steps = 0u64;
    for &p in part.level_probs() {
        loop {
            if steps >= cap {
                return Err(SimError::CapExceeded {
                    cap,
                    replication: 0,
                });
            }
            steps += 1;
            if rng.gen_bool(p) {
                break;
            }
        }
    }
    Ok(RunRecord {
        seed,
        n: part.target_level() as u64,
        start_level: part.start_level() as u64,
        hitting_time: steps + 1,
    })
}

/// Uniform coupon draws until all `n` types are held, `prefilled` held at start.
pub fn coupon_collector_run(
    n: u64,
    prefilled: u64,
    seed: u64,
    cap: u64,
) -> Result<RunRecord, SimError> {
    if n == 0 {
        return Err(SimError::ZeroSize);
    }
    if prefilled > n {
        return Err(SimError::LevelOutOfRange { k: prefilled, n });
    }
    let len = n as usize;
    let mut rng = rng_for(seed);
    // By symmetry the identity of the prefilled types does not matter.
    let mut held: Vec<bool> = (0..len).map(|i| (i as u64) < prefilled).collect();
    let mut collected = prefilled;
    let mut draws = 0u64;
    while collected < n {
        if draws >= cap {
            return Err(SimError::CapExceeded {
                cap,
                replication: 0,
            });
        }
        let coupon = rng.gen_range(0..len);
        if !held[coupon] {
            held[coupon] = true;
            collected += 1;
        }
        draws += 1;
    }
    Ok(RunRecord {
        seed,
        n,
        start_level: prefilled,
        hitting_time: draws + 1,
    })
}

/// What a batch of replications samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "process", rename_all = "kebab-case")]
pub enum ProcessConfig {
    RlsOnemax { n: u64, init: Init },
    LevelChain { partition: LevelPartition },
    CouponCollector { n: u64, prefilled: u64 },
}

impl ProcessConfig {
    fn validate(&self) -> Result<(), SimError> {
        match *self {
            ProcessConfig::RlsOnemax { n, init } => {
                if n == 0 {
                    return Err(SimError::ZeroSize);
                }
                if let Init::FixedLevel(k) = init {
                    if k > n {
                        return Err(SimError::LevelOutOfRange { k, n });
                    }
                }
                Ok(())
            }
            ProcessConfig::LevelChain { .. } => Ok(()),
            ProcessConfig::CouponCollector { n, prefilled } => {
                if n == 0 {
                    return Err(SimError::ZeroSize);
                }
                if prefilled > n {
                    return Err(SimError::LevelOutOfRange { k: prefilled, n });
                }
                Ok(())
            }
        }
    }

    /// A single run with the given seed.
    pub fn run(&self, seed: u64, cap: u64) -> Result<RunRecord, SimError> {
        match self {
            ProcessConfig::RlsOnemax { n, init } => rls_run(*n, seed, &OneMax, *init, cap),
            ProcessConfig::LevelChain { partition } => level_chain_run(partition, seed, cap),
            ProcessConfig::CouponCollector { n, prefilled } => {
                coupon_collector_run(*n, *prefilled, seed, cap)
            }
        }
    }
}

/// Quantile levels reported in every summary.
pub const SUMMARY_QUANTILES: [f64; 9] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    /// Unbiased sample variance (zero for a single replication).
    pub variance: f64,
    pub min: u64,
    pub max: u64,
    /// `(level, smallest t with empirical cdf >= level)`.
    pub quantiles: Vec<(f64, u64)>,
}

/// Histogram of hitting times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
    pub summary: Summary,
}

impl EmpiricalDistribution {
    /// Builds the distribution and its summary from a nonempty histogram.
    pub fn from_counts(counts: BTreeMap<u64, u64>) -> Self {
        let total: u64 = counts.values().sum();
        assert!(total > 0, "empty histogram");
        let tf = total as f64;
        let mean = counts
            .iter()
            .map(|(&t, &c)| t as f64 * c as f64)
            .sum::<f64>()
            / tf;
        let variance = if total > 1 {
            counts
                .iter()
                .map(|(&t, &c)| {
                    let d = t as f64 - mean;
                    d * d * c as f64
                })
                .sum::<f64>()
                / (tf - 1.0)
        } else {
            0.0
        };
        let min = *counts.keys().next().unwrap();
        let max = *counts.keys().next_back().unwrap();
        let quantiles = SUMMARY_QUANTILES
            .iter()
            .map(|&q| (q, quantile_of(&counts, total, q)))
            .collect();
        Self {
            counts,
            total,
            summary: Summary {
                mean,
                variance,
                min,
                max,
                quantiles,
            },
        }
    }

    pub fn from_samples<I: IntoIterator<Item = u64>>(samples: I) -> Self {
        let mut counts = BTreeMap::new();
        for t in samples {
            *counts.entry(t).or_insert(0) += 1;
        }
        Self::from_counts(counts)
    }

    pub fn mean(&self) -> f64 {
        self.summary.mean
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        (self.summary.variance / self.total as f64).sqrt()
    }

    pub fn quantile(&self, q: f64) -> u64 {
        quantile_of(&self.counts, self.total, q)
    }

    /// Empirical `P(T <= t)`.
    pub fn cdf(&self, t: u64) -> f64 {
        self.count_where(|x| x <= t as f64) as f64 / self.total as f64
    }

    /// Empirical frequency of `T > threshold`.
    pub fn frac_above(&self, threshold: f64) -> f64 {
        self.count_where(|x| x > threshold) as f64 / self.total as f64
    }

    /// Empirical frequency of `T >= threshold`.
    pub fn frac_at_least(&self, threshold: f64) -> f64 {
        self.count_where(|x| x >= threshold) as f64 / self.total as f64
    }

    /// Empirical frequency of `T < threshold`.
    pub fn frac_below(&self, threshold: f64) -> f64 {
        self.count_where(|x| x < threshold) as f64 / self.total as f64
    }

    /// Empirical frequency of `T <= threshold`.
    pub fn frac_at_most(&self, threshold: f64) -> f64 {
        self.count_where(|x| x <= threshold) as f64 / self.total as f64
    }

    fn count_where<F: Fn(f64) -> bool>(&self, pred: F) -> u64 {
        self.counts
            .iter()
            .filter(|(&t, _)| pred(t as f64))
            .map(|(_, &c)| c)
            .sum()
    }

    /// Shifts every hitting time by `-offset`.
    pub fn shifted_down(&self, offset: u64) -> Self {
        Self::from_counts(self.counts.iter().map(|(&t, &c)| (t - offset, c)).collect())
    }

    /// Largest absolute gap between two empirical cdfs.
    pub fn max_cdf_gap(&self, other: &Self) -> f64 {
        let mut keys: Vec<u64> = self
            .counts
            .keys()
            .chain(other.counts.keys())
            .copied()
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let (mut a, mut b) = (0u64, 0u64);
        let (na, nb) = (self.total as f64, other.total as f64);
        let mut gap: f64 = 0.0;
        for t in keys {
            a += self.counts.get(&t).copied().unwrap_or(0);
            b += other.counts.get(&t).copied().unwrap_or(0);
            gap = gap.max((a as f64 / na - b as f64 / nb).abs());
        }
        gap
    }

    /// Largest gap between the empirical cdf and `cdf(t)` over `t` in `[lo, hi]`.
    pub fn max_cdf_gap_to<F: Fn(u64) -> f64>(&self, cdf: F, lo: u64, hi: u64) -> f64 {
        let mut acc = self.counts.range(..lo).map(|(_, &c)| c).sum::<u64>();
        let n = self.total as f64;
        let mut gap: f64 = 0.0;
        for t in lo..=hi {
            acc += self.counts.get(&t).copied().unwrap_or(0);
            gap = gap.max((acc as f64 / n - cdf(t)).abs());
        }
        gap
    }
}

fn quantile_of(counts: &BTreeMap<u64, u64>, total: u64, q: f64) -> u64 {
    let needed = (q * total as f64).ceil().max(1.0) as u64;
    let mut acc = 0;
    for (&t, &c) in counts {
        acc += c;
        if acc >= needed {
            return t;
        }
    }
    *counts.keys().next_back().expect("nonempty histogram")
}

#[derive(Default)]
struct Partial {
    counts: BTreeMap<u64, u64>,
    first_error: Option<(u64, SimError)>,
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        for (t, c) in other.counts {
            *self.counts.entry(t).or_insert(0) += c;
        }
        self.first_error = match (self.first_error, other.first_error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Runs `replications` independent runs on `workers` threads.
///
/// Counts do not depend on `workers`. If any run hits the cap, the error
/// names the lowest failing replication index.
pub fn replicate(
    process: &ProcessConfig,
    replications: u64,
    master_seed: u64,
    workers: usize,
    cap: u64,
) -> Result<EmpiricalDistribution, SimError> {
    if replications == 0 {
        return Err(SimError::ZeroReplications);
    }
    process.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::WorkerPool(e.to_string()))?;
    let merged = pool.install(|| {
        (0..replications)
            .into_par_iter()
            .fold(Partial::default, |mut acc, i| {
                match process.run(splitmix64_nth(master_seed, i), cap) {
                    Ok(record) => *acc.counts.entry(record.hitting_time).or_insert(0) += 1,
                    Err(SimError::CapExceeded { cap, .. }) => {
                        let err = SimError::CapExceeded {
                            cap,
                            replication: i,
                        };
                        acc = acc.merge(Partial {
                            counts: BTreeMap::new(),
                            first_error: Some((i, err)),
                        });
                    }
                    Err(e) => {
                        acc = acc.merge(Partial {
                            counts: BTreeMap::new(),
                            first_error: Some((i, e)),
                        });
                    }
                }
                acc
            })
            .reduce(Partial::default, Partial::merge)
    });
    if let Some((_, err)) = merged.first_error {
        return Err(err);
    }
    Ok(EmpiricalDistribution::from_counts(merged.counts))
}
