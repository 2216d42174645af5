//! Command-line harness: compute bounds, run seeded experiments, verify the
//! bounds against the exact oracle and Monte Carlo tails.
//!
//! Exit codes: 0 all checks pass, 1 verification failure, 2 configuration
//! error, 3 iteration cap exceeded.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use geotail::simulator::DEFAULT_ITERATION_CAP;

pub mod commands;
pub mod error;
pub mod output;
pub mod source;

use commands::{BoundOptions, ExactQuery, ExperimentConfig, VerifyOptions};
pub use error::CliError;
use source::{
    load_config_file, parse_list, parse_spec_arg, ConfigFile, Format, GridKind, ProcessKind,
    SpecSource,
};

#[derive(Debug, Parser)]
#[command(
    name = "geotail",
    version,
    about = "Tail bounds for geometric sums and fitness levels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Master seed for all randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for simulations; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and Chernoff tail bounds over a delta grid.
    Bound(BoundArgs),
    /// Seeded hitting-time histogram.
    Simulate(ExperimentArgs),
    /// Check bounds against exact and empirical tails.
    Verify(VerifyArgs),
    /// Exact distribution queries.
    Exact(ExactArgs),
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Inline success probabilities, e.g. 0.5,0.25.
    #[arg(long, conflicts_with = "spec")]
    pub probs: Option<String>,
    /// `onemax:N:K` or a JSON spec file.
    #[arg(long)]
    pub spec: Option<String>,
}

impl SpecArgs {
    fn source(&self) -> Result<Option<SpecSource>, CliError> {
        match (&self.probs, &self.spec) {
            (Some(p), _) => Ok(Some(SpecSource::Probs {
                probs: parse_list(p, "--probs")?,
            })),
            (None, Some(s)) => parse_spec_arg(s).map(Some),
            (None, None) => Ok(None),
        }
    }

    fn require(&self) -> Result<SpecSource, CliError> {
        self.source()?
            .ok_or_else(|| CliError::Config("one of --probs or --spec is required".into()))
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Comma-separated deltas, nonnegative and strictly increasing.
    #[arg(long)]
    pub delta: String,
    #[arg(long)]
    pub s_override: Option<f64>,
    #[arg(long)]
    pub h_override: Option<f64>,
    /// Use s = n^2 pi^2 / 6 and h = 1/n for a onemax spec.
    #[arg(long, conflicts_with_all = ["s_override", "h_override"])]
    pub onemax_constants: bool,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub process: Option<ProcessKind>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Fixed start level (prefilled coupons); RLS starts uniformly without it.
    #[arg(long)]
    pub k: Option<u64>,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub replications: Option<u64>,
    /// Per-run iteration cap.
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Comma-separated deltas.
    #[arg(long, conflicts_with = "r")]
    pub delta: Option<String>,
    /// Comma-separated multiples of n (delta = r n).
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub onemax_constants: bool,
    /// Halve every closed-form bound; the run must then fail.
    #[arg(long)]
    pub self_test: bool,
    /// Skip the Monte Carlo column.
    #[arg(long)]
    pub oracle_only: bool,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Print the pmf and cdf up to this value.
    #[arg(long)]
    pub t_max: Option<u64>,
    /// Comma-separated thresholds t for P(X > t).
    #[arg(long)]
    pub upper: Option<String>,
    /// Comma-separated thresholds t for P(X < t).
    #[arg(long)]
    pub lower: Option<String>,
}

pub const DEFAULT_REPLICATIONS: u64 = 10_000;

fn resolve_experiment(
    cli: &Cli,
    args: &ExperimentArgs,
    grid: Option<(Vec<f64>, GridKind)>,
) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => load_config_file(path)?,
        None => ConfigFile::default(),
    };
    let master_seed = cli.seed.or(file.master_seed).ok_or_else(|| {
        CliError::Config("a seed is required (--seed or master_seed in the config)".into())
    })?;
    let process = args
        .process
        .or(file.process)
        .ok_or_else(|| CliError::Config("--process is required".into()))?;
    let partition = match args.spec.source()? {
        Some(src) => Some(src),
        None => file.partition,
    };
    let (grid, grid_kind) = match grid {
        Some(g) => g,
        None => (
            file.grid.unwrap_or_default(),
            file.grid_kind.unwrap_or(GridKind::Delta),
        ),
    };
    Ok(ExperimentConfig {
        process,
        n: args.n.or(file.n),
        k: args.k.or(file.k),
        partition,
        replications: args
            .replications
            .or(file.replications)
            .unwrap_or(DEFAULT_REPLICATIONS),
        master_seed,
        grid,
        grid_kind,
        format: cli.format.or(file.format).unwrap_or_default(),
        workers: cli.workers.or(file.workers).unwrap_or(1),
        cap: args.cap.or(file.cap).unwrap_or(DEFAULT_ITERATION_CAP),
    })
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let format = cli.format.unwrap_or_default();
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Bound(args) => {
            let source = args.spec.require()?;
            let spec = source.partition()?.spec();
            let deltas = parse_list(&args.delta, "--delta")?;
            let opts = if args.onemax_constants {
                commands::onemax_constants(&source)?
            } else {
                BoundOptions {
                    s_override: args.s_override,
                    h_override: args.h_override,
                }
            };
            let rows = commands::bound_rows(&spec, &deltas, opts)?;
            output::emit(&commands::render_bound(&rows, format), out)?;
        }
        Command::Simulate(args) => {
            let cfg = resolve_experiment(cli, args, None)?;
            let dist = commands::simulate(&cfg)?;
            output::emit(&commands::render_simulation(&cfg, &dist), out)?;
        }
        Command::Verify(args) => {
            let grid = match (&args.delta, &args.r) {
                (Some(d), _) => Some((parse_list(d, "--delta")?, GridKind::Delta)),
                (None, Some(r)) => Some((parse_list(r, "--r")?, GridKind::R)),
                (None, None) => None,
            };
            let cfg = resolve_experiment(cli, &args.experiment, grid)?;
            let opts = VerifyOptions {
                onemax_constants: args.onemax_constants,
                corrupt_factor: args.self_test.then_some(0.5),
                oracle_only: args.oracle_only,
            };
            let report = commands::verify(&cfg, opts)?;
            output::emit(&commands::render_verification(&report, cfg.format), out)?;
            let failed = report.failures();
            if failed > 0 {
                return Err(CliError::VerificationFailed {
                    failed,
                    total: report.rows.len(),
                });
            }
        }
        Command::Exact(args) => {
            let spec = args.spec.require()?.partition()?.spec();
            let query = ExactQuery {
                t_max: args.t_max,
                upper: args
                    .upper
                    .as_deref()
                    .map(|s| parse_list(s, "--upper"))
                    .transpose()?
                    .unwrap_or_default(),
                lower: args
                    .lower
                    .as_deref()
                    .map(|s| parse_list(s, "--lower"))
                    .transpose()?
                    .unwrap_or_default(),
            };
            let rows = commands::exact_rows(&spec, &query)?;
            output::emit(&commands::render_exact(&rows, format), out)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
