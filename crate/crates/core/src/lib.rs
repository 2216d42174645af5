//! Concentration bounds for sums of independent geometric random variables,
//! the fitness-level method with tail bounds, and randomized local search on
//! OneMax as a worked case.
//!
//! * [`tail_bounds`]: closed-form and numerically optimized tail bounds.
//! * [`fitness_levels`]: hitting-time statements over level partitions.
//! * [`exact_oracle`]: exact distribution of small geometric sums.
//! * [`simulator`]: seeded RLS, level-chain and coupon-collector samplers.
//! * [`onemax_analysis`]: OneMax level probabilities and specialized bounds.

pub mod exact_oracle;
pub mod fitness_levels;
pub mod onemax_analysis;
pub mod simulator;
pub mod tail_bounds;

pub use exact_oracle::{exact_lower_tail, exact_pmf, exact_upper_tail, ExactPmf, OracleError};
pub use fitness_levels::{
    delta_for_confidence, lower_time_bound, upper_time_bound, Direction, HittingTimeBound,
    LevelError, LevelPartition,
};
pub use simulator::{EmpiricalDistribution, Init, ProcessConfig, RunRecord, SimError};
pub use tail_bounds::{
    chernoff_lower_bound, chernoff_upper_bound, lower_tail_bound, upper_tail_bound, BoundError,
    GeometricSumSpec, Regime, TailBoundResult,
};
