//! The `bound`, `simulate`, `verify` and `exact` subcommands.

use geotail::exact_oracle::{self, exact_pmf};
use geotail::onemax_analysis::{onemax_partition, OneMaxAnalysis};
use geotail::simulator::{replicate, EmpiricalDistribution, Init, ProcessConfig};
use geotail::tail_bounds::{
    chernoff_lower_bound, chernoff_upper_bound, lower_tail_bound, upper_tail_bound,
    GeometricSumSpec, Regime,
};
use geotail::LevelPartition;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{fmt_f64, fmt_opt, render, render_json, Table};
use crate::source::{validate_grid, Format, GridKind, ProcessKind, SpecSource, SCHEMA_VERSION};

/// Absolute slack for floating-point comparisons between bounds.
pub const DOMINANCE_TOL: f64 = 1e-12;
/// Standard errors of slack when comparing an empirical frequency to a bound.
pub const EMPIRICAL_SE_SLACK: f64 = 3.0;

// ---------------------------------------------------------------- bound

#[derive(Debug, Clone, Copy, Default)]
pub struct BoundOptions {
    pub s_override: Option<f64>,
    pub h_override: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub delta: f64,
    pub mean: f64,
    pub s: f64,
    pub h: f64,
    pub lower_bound: f64,
    pub lower_regime: Regime,
    pub upper_bound: f64,
    pub upper_regime: Regime,
    pub chernoff_lower: f64,
    pub chernoff_upper: f64,
    /// Hitting time is at most this with `upper_confidence`.
    pub upper_time: f64,
    pub upper_confidence: f64,
    /// Hitting time is at least this with `lower_confidence`.
    pub lower_time: f64,
    pub lower_confidence: f64,
}

pub fn bound_rows(
    spec: &GeometricSumSpec,
    deltas: &[f64],
    opts: BoundOptions,
) -> Result<Vec<BoundRow>, CliError> {
    validate_grid(deltas)?;
    let mean = spec.mean();
    let bad = |e: geotail::BoundError| CliError::Config(e.to_string());
    deltas
        .iter()
        .map(|&delta| {
            let lower = lower_tail_bound(spec, delta, opts.s_override).map_err(bad)?;
            let upper =
                upper_tail_bound(spec, delta, opts.s_override, opts.h_override).map_err(bad)?;
            let (chernoff_lower, chernoff_upper) = if delta > 0.0 {
                (
                    chernoff_lower_bound(spec, delta).map_err(bad)?,
                    chernoff_upper_bound(spec, delta).map_err(bad)?,
                )
            } else {
                (1.0, 1.0)
            };
            Ok(BoundRow {
                delta,
                mean,
                s: upper.s_used,
                h: upper.h_used.unwrap_or(f64::NAN),
                lower_bound: lower.bound,
                lower_regime: lower.regime,
                upper_bound: upper.bound,
                upper_regime: upper.regime,
                chernoff_lower,
                chernoff_upper,
                upper_time: mean + delta,
                upper_confidence: 0.0 - upper.log_bound.exp_m1(),
                lower_time: (mean - delta).max(0.0),
                lower_confidence: 0.0 - lower.log_bound.exp_m1(),
            })
        })
        .collect()
}

pub const BOUND_COLUMNS: &[&str] = &[
    "delta",
    "mean",
    "s",
    "h",
    "lower_bound",
    "lower_regime",
    "upper_bound",
    "upper_regime",
    "chernoff_lower",
    "chernoff_upper",
    "upper_time",
    "upper_confidence",
    "lower_time",
    "lower_confidence",
];

pub fn render_bound(rows: &[BoundRow], format: Format) -> String {
    let mut table = Table::new(BOUND_COLUMNS);
    for r in rows {
        table.push(vec![
            fmt_f64(r.delta),
            fmt_f64(r.mean),
            fmt_f64(r.s),
            fmt_f64(r.h),
            fmt_f64(r.lower_bound),
            r.lower_regime.as_str().into(),
            fmt_f64(r.upper_bound),
            r.upper_regime.as_str().into(),
            fmt_f64(r.chernoff_lower),
            fmt_f64(r.chernoff_upper),
            fmt_f64(r.upper_time),
            fmt_f64(r.upper_confidence),
            fmt_f64(r.lower_time),
            fmt_f64(r.lower_confidence),
        ]);
    }
    render(format, &table, || {
        render_json(&serde_json::json!({ "schema": SCHEMA_VERSION, "rows": rows }))
    })
}

/// `s = n^2 pi^2 / 6` and `h = 1/n` for a OneMax source.
pub fn onemax_constants(source: &SpecSource) -> Result<BoundOptions, CliError> {
    let (n, _) = source
        .onemax()
        .ok_or_else(|| CliError::Config("--onemax-constants needs a onemax:N:K spec".into()))?;
    let a = OneMaxAnalysis::new(n).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(BoundOptions {
        s_override: Some(a.s_paper),
        h_override: Some(a.h),
    })
}

// ---------------------------------------------------------------- config

/// A fully resolved experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub process: ProcessKind,
    pub n: Option<u64>,
    /// Fixed start level; `None` means uniform initialization (RLS only).
    pub k: Option<u64>,
    pub partition: Option<SpecSource>,
    pub replications: u64,
    pub master_seed: u64,
    pub grid: Vec<f64>,
    pub grid_kind: GridKind,
    #[serde(skip)]
    pub format: Format,
    /// Not part of any report: results do not depend on it.
    #[serde(skip)]
    pub workers: usize,
    pub cap: u64,
}

impl ExperimentConfig {
    fn need_n(&self) -> Result<u64, CliError> {
        self.n
            .ok_or_else(|| CliError::Config(format!("{:?} needs --n", self.process)))
    }

    pub fn process_config(&self) -> Result<ProcessConfig, CliError> {
        if self.replications == 0 {
            return Err(CliError::Config("replications must be at least 1".into()));
        }
        Ok(match self.process {
            ProcessKind::RlsOnemax => ProcessConfig::RlsOnemax {
                n: self.need_n()?,
                init: self.k.map_or(Init::Uniform, Init::FixedLevel),
            },
            ProcessKind::CouponCollector => ProcessConfig::CouponCollector {
                n: self.need_n()?,
                prefilled: self.k.unwrap_or(0),
            },
            ProcessKind::LevelChain => ProcessConfig::LevelChain {
                partition: self
                    .partition
                    .as_ref()
                    .ok_or_else(|| CliError::Config("level-chain needs --probs or --spec".into()))?
                    .partition()?,
            },
        })
    }

    /// Partition whose geometric sum equals `T - 1` in law, plus the OneMax
    /// size used to scale an `r` grid.
    pub fn level_target(&self) -> Result<(LevelPartition, Option<u64>), CliError> {
        match self.process {
            ProcessKind::RlsOnemax | ProcessKind::CouponCollector => {
                let n = self.need_n()?;
                let k = self.k.ok_or_else(|| {
                    CliError::Config("verification needs a fixed start level (--k)".into())
                })?;
                let part = onemax_partition(n, k).map_err(|_| {
                    CliError::Config(format!("start level must satisfy k < n, got n={n} k={k}"))
                })?;
                Ok((part, Some(n)))
            }
            ProcessKind::LevelChain => {
                let src = self.partition.as_ref().ok_or_else(|| {
                    CliError::Config("level-chain needs --probs or --spec".into())
                })?;
                Ok((src.partition()?, src.onemax().map(|(n, _)| n)))
            }
        }
    }
}

// ---------------------------------------------------------------- simulate

pub fn simulate(cfg: &ExperimentConfig) -> Result<EmpiricalDistribution, CliError> {
    let process = cfg.process_config()?;
    Ok(replicate(
        &process,
        cfg.replications,
        cfg.master_seed,
        cfg.workers,
        cfg.cap,
    )?)
}

pub fn render_simulation(cfg: &ExperimentConfig, dist: &EmpiricalDistribution) -> String {
    let mut table = Table::new(&["kind", "key", "value"]);
    let s = &dist.summary;
    let row = |kind: &str, key: String, value: String| vec![kind.to_string(), key, value];
    table.push(row("summary", "total".into(), dist.total.to_string()));
    table.push(row("summary", "mean".into(), fmt_f64(s.mean)));
    table.push(row("summary", "variance".into(), fmt_f64(s.variance)));
    table.push(row("summary", "min".into(), s.min.to_string()));
    table.push(row("summary", "max".into(), s.max.to_string()));
    for (q, t) in &s.quantiles {
        table.push(row("summary", format!("q{q}"), t.to_string()));
    }
    for (t, c) in &dist.counts {
        table.push(row("histogram", t.to_string(), c.to_string()));
    }
    render(cfg.format, &table, || {
        #[derive(Serialize)]
        struct Bin {
            hitting_time: u64,
            count: u64,
        }
        let histogram: Vec<Bin> = dist
            .counts
            .iter()
            .map(|(&hitting_time, &count)| Bin {
                hitting_time,
                count,
            })
            .collect();
        render_json(&serde_json::json!({
            "schema": SCHEMA_VERSION,
            "config": cfg,
            "total": dist.total,
            "summary": s,
            "histogram": histogram,
        }))
    })
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Upper,
    Lower,
}

impl Tail {
    fn as_str(self) -> &'static str {
        match self {
            Tail::Upper => "upper",
            Tail::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub tail: Tail,
    /// Grid value as given (`delta` or `r`).
    pub delta_or_r: f64,
    pub closed_form_bound: f64,
    pub chernoff_bound: f64,
    pub exact_tail: Option<f64>,
    pub empirical_tail: Option<f64>,
    pub empirical_se: Option<f64>,
    pub pass: bool,
}

impl VerifyRow {
    /// Pass iff `exact <= chernoff <= closed` (when exact is known) and
    /// `empirical <= closed + 3 SE` (when simulated).
    fn judge(&mut self) {
        let oracle_ok = self.exact_tail.is_none_or(|exact| {
            exact <= self.chernoff_bound + DOMINANCE_TOL
                && self.chernoff_bound <= self.closed_form_bound + DOMINANCE_TOL
        });
        let empirical_ok = match (self.empirical_tail, self.empirical_se) {
            (Some(freq), Some(se)) => freq <= self.closed_form_bound + EMPIRICAL_SE_SLACK * se,
            _ => true,
        };
        self.pass = oracle_ok && empirical_ok;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub mean: f64,
    pub rows: Vec<VerifyRow>,
}

impl VerificationReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub onemax_constants: bool,
    /// Multiplies every closed-form bound; `0.5` is the harness self-test.
    pub corrupt_factor: Option<f64>,
    /// Skip the Monte Carlo column.
    pub oracle_only: bool,
}

/// `P(X >= threshold)`, or `None` when the oracle would be too large.
fn exact_upper(spec: &GeometricSumSpec, threshold: f64) -> Option<f64> {
    if threshold <= 0.0 {
        return Some(1.0);
    }
    // X is integer-valued: X >= t  <=>  X > ceil(t) - 1.
    let cut = threshold.ceil() - 1.0;
    if cut >= spec.len() as f64 && !exact_oracle::is_feasible(spec, cut as u64) {
        return None;
    }
    exact_oracle::exact_upper_tail(spec, cut).ok()
}

/// `P(X <= threshold)`, or `None` when the oracle would be too large.
fn exact_lower(spec: &GeometricSumSpec, threshold: f64) -> Option<f64> {
    if threshold < 0.0 {
        return Some(0.0);
    }
    // X <= t  <=>  X < floor(t) + 1.
    let cut = threshold.floor();
    if cut >= spec.len() as f64 && !exact_oracle::is_feasible(spec, cut as u64) {
        return None;
    }
    exact_oracle::exact_lower_tail(spec, cut + 1.0).ok()
}

fn binomial_se(freq: f64, total: u64) -> f64 {
    (freq * (1.0 - freq) / total as f64).sqrt()
}

pub fn verify(cfg: &ExperimentConfig, opts: VerifyOptions) -> Result<VerificationReport, CliError> {
    validate_grid(&cfg.grid)?;
    let (part, onemax_n) = cfg.level_target()?;
    let spec = part.spec();
    let mean = spec.mean();
    let scale = match cfg.grid_kind {
        GridKind::Delta => 1.0,
        GridKind::R => onemax_n
            .ok_or_else(|| CliError::Config("an r grid needs a OneMax-shaped process".into()))?
            as f64,
    };
    let overrides = match (opts.onemax_constants, onemax_n) {
        (false, _) => BoundOptions::default(),
        (true, Some(n)) => {
            let a = OneMaxAnalysis::new(n).map_err(|e| CliError::Config(e.to_string()))?;
            BoundOptions {
                s_override: Some(a.s_paper),
                h_override: Some(a.h),
            }
        }
        (true, None) => {
            return Err(CliError::Config(
                "--onemax-constants needs a OneMax-shaped process".into(),
            ))
        }
    };
    // Hitting times count the initial step; the geometric sum does not.
    let samples = if opts.oracle_only {
        None
    } else {
        Some(simulate(cfg)?.shifted_down(1))
    };

    let bad = |e: geotail::BoundError| CliError::Config(e.to_string());
    let corrupt = opts.corrupt_factor.unwrap_or(1.0);
    let mut rows = Vec::with_capacity(2 * cfg.grid.len());
    for &g in &cfg.grid {
        let delta = g * scale;
        let (chern_up, chern_lo) = if delta > 0.0 {
            (
                chernoff_upper_bound(&spec, delta).map_err(bad)?,
                chernoff_lower_bound(&spec, delta).map_err(bad)?,
            )
        } else {
            (1.0, 1.0)
        };
        let closed_up = upper_tail_bound(&spec, delta, overrides.s_override, overrides.h_override)
            .map_err(bad)?
            .bound;
        let closed_lo = lower_tail_bound(&spec, delta, overrides.s_override)
            .map_err(bad)?
            .bound;

        let mut upper = VerifyRow {
            tail: Tail::Upper,
            delta_or_r: g,
            closed_form_bound: closed_up * corrupt,
            chernoff_bound: chern_up,
            exact_tail: exact_upper(&spec, mean + delta),
            empirical_tail: None,
            empirical_se: None,
            pass: false,
        };
        let mut lower = VerifyRow {
            tail: Tail::Lower,
            delta_or_r: g,
            closed_form_bound: closed_lo * corrupt,
            chernoff_bound: chern_lo,
            exact_tail: exact_lower(&spec, mean - delta),
            empirical_tail: None,
            empirical_se: None,
            pass: false,
        };
        if let Some(dist) = &samples {
            let f = dist.frac_at_least(mean + delta);
            upper.empirical_tail = Some(f);
            upper.empirical_se = Some(binomial_se(f, dist.total));
            let f = dist.frac_at_most(mean - delta);
            lower.empirical_tail = Some(f);
            lower.empirical_se = Some(binomial_se(f, dist.total));
        }
        upper.judge();
        lower.judge();
        rows.push(upper);
        rows.push(lower);
    }
    Ok(VerificationReport { mean, rows })
}

pub const VERIFY_COLUMNS: &[&str] = &[
    "tail",
    "delta_or_r",
    "closed_form_bound",
    "chernoff_bound",
    "exact_tail",
    "empirical_tail",
    "empirical_se",
    "verdict",
];

pub fn render_verification(report: &VerificationReport, format: Format) -> String {
    let mut table = Table::new(VERIFY_COLUMNS);
    for r in &report.rows {
        table.push(vec![
            r.tail.as_str().into(),
            fmt_f64(r.delta_or_r),
            fmt_f64(r.closed_form_bound),
            fmt_f64(r.chernoff_bound),
            fmt_opt(r.exact_tail),
            fmt_opt(r.empirical_tail),
            fmt_opt(r.empirical_se),
            if r.pass { "pass" } else { "fail" }.into(),
        ]);
    }
    render(format, &table, || {
        render_json(&serde_json::json!({
            "schema": SCHEMA_VERSION,
            "mean": report.mean,
            "passed": report.failures() == 0,
            "rows": report.rows,
        }))
    })
}

// ---------------------------------------------------------------- exact

#[derive(Debug, Clone, Default)]
pub struct ExactQuery {
    pub t_max: Option<u64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactRow {
    pub quantity: &'static str,
    pub t: f64,
    pub value: f64,
}

pub fn exact_rows(spec: &GeometricSumSpec, query: &ExactQuery) -> Result<Vec<ExactRow>, CliError> {
    let oracle = |e: geotail::OracleError| CliError::Config(e.to_string());
    let mut rows = Vec::new();
    if let Some(t_max) = query.t_max {
        let pmf = exact_pmf(spec, t_max).map_err(oracle)?;
        let mut cdf = 0.0;
        for (j, &m) in pmf.masses.iter().enumerate() {
            let t = (pmf.support_start + j as u64) as f64;
            cdf += m;
            rows.push(ExactRow {
                quantity: "mass",
                t,
                value: m,
            });
            rows.push(ExactRow {
                quantity: "cdf",
                t,
                value: cdf,
            });
        }
        rows.push(ExactRow {
            quantity: "residual",
            t: t_max as f64,
            value: pmf.residual,
        });
    }
    for &t in &query.upper {
        let value = exact_oracle::exact_upper_tail(spec, t).map_err(oracle)?;
        rows.push(ExactRow {
            quantity: "upper_tail",
            t,
            value,
        });
    }
    for &t in &query.lower {
        let value = exact_oracle::exact_lower_tail(spec, t).map_err(oracle)?;
        rows.push(ExactRow {
            quantity: "lower_tail",
            t,
            value,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Config(
            "exact needs --t-max, --upper or --lower".into(),
        ));
    }
    Ok(rows)
}

pub fn render_exact(rows: &[ExactRow], format: Format) -> String {
    let mut table = Table::new(&["quantity", "t", "value"]);
    for r in rows {
        table.push(vec![r.quantity.into(), fmt_f64(r.t), fmt_f64(r.value)]);
    }
    render(format, &table, || {
        render_json(&serde_json::json!({ "schema": SCHEMA_VERSION, "rows": rows }))
    })
}
