//! The `masslock` command line.
//!
//! Every subcommand resolves its config as defaults < flags < `--config`
//! file, and every output embeds a provenance block with the resolved config,
//! so `--config <output>` reruns the same computation.
//!
//! Exit codes: 0 success, 1 other failures (degenerate probe, divergent
//! size), 2 argument/IO/parse errors, 3 infeasible, 4 capacity exceeded.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

#[derive(Parser, Debug)]
#[command(
    name = "masslock",
    version,
    about = "Smallest packing-sized sets carrying a given share of a measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Packing number M(B, t) of a point file.
    Pack(PackArgs),
    /// Covering number N(B, t) of a point file.
    Cover(CoverArgs),
    /// Full packing profile t -> M(B, t).
    Profile(ProfileArgs),
    /// Size tau of a point set, a descriptor, or an interval length.
    Tau(TauArgs),
    /// Hausdorff contrasts between point sets or descriptors.
    Haus(HausArgs),
    /// Smallest set of a class with mass at least 1 - alpha.
    Localize(LocalizeArgs),
    /// Consistency sweep over sample sizes and replicates.
    Sweep(SweepArgs),
    /// Checks tau^alpha <= tau(B_n) <= tau^(alpha - eps) per replicate.
    Sandwich(SandwichArgs),
    /// tau^alpha over a list of levels, with an optional continuity check.
    AlphaCurve(AlphaCurveArgs),
    /// Tilted densities whose minimizers do not recover the limit family.
    Converse(ConverseArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON config; overrides flags. Outputs of this tool are accepted too.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct InputArgs {
    /// Point file: CSV, or JSON by extension.
    #[arg(long)]
    input: Option<PathBuf>,
    /// euclidean, chebyshev or wrap-1d; ignored for distance matrices.
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Args, Debug, Default)]
struct ClassArgs {
    /// intervals, balls, boxes, separated-union or finite-subsets.
    #[arg(long)]
    class: Option<String>,
    /// Number of balls in a separated union.
    #[arg(long)]
    union_k: Option<usize>,
    /// Minimum gap between union components.
    #[arg(long)]
    union_eps: Option<f64>,
    /// Enumerate every candidate, not only the minimal feasible ones.
    #[arg(long)]
    exhaustive: bool,
    /// Upper bound on interval length, ball radius and box side.
    #[arg(long)]
    max_extent: Option<f64>,
    /// Extra ball centers on a grid of this step.
    #[arg(long)]
    center_grid: Option<f64>,
    /// Candidate budget.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args, Debug, Default)]
struct FunctionalArgs {
    /// linear, constant or power:<p>.
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    tmax: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct CapsArgs {
    /// Largest point set handled by exact packing.
    #[arg(long)]
    packing_cap: Option<usize>,
    /// Largest point set handled by exact covering.
    #[arg(long)]
    covering_cap: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct SourceArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Generator JSON (a bare distribution is accepted).
    #[arg(long)]
    generator: Option<String>,
    /// Sample size drawn from --generator.
    #[arg(long)]
    n: Option<usize>,
    /// Analytic 1-D measure JSON.
    #[arg(long)]
    analytic: Option<String>,
    /// Generator seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    class: ClassArgs,
    #[command(flatten)]
    functional: FunctionalArgs,
    /// finite, interval-exact, sample or grid:<step>.
    #[arg(long)]
    backend: Option<String>,
    #[command(flatten)]
    caps: CapsArgs,
}

#[derive(Args, Debug)]
struct PackArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    t: Option<f64>,
    /// exact or lower-bound.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    t: Option<f64>,
    /// exact or upper-bound.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args, Debug)]
struct TauArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    /// Descriptor JSON evaluated against --input.
    #[arg(long)]
    descriptor: Option<String>,
    /// Length of an interval, evaluated in closed form.
    #[arg(long)]
    length: Option<f64>,
    #[command(flatten)]
    functional: FunctionalArgs,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args, Debug)]
struct HausArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    /// Second point file; contrasts are between the two point sets.
    #[arg(long)]
    other: Option<PathBuf>,
    /// First descriptor JSON, over the space of --input.
    #[arg(long)]
    a: Option<String>,
    /// Second descriptor JSON.
    #[arg(long)]
    b: Option<String>,
    /// Probe point file for non-interval descriptors (default: --input).
    #[arg(long)]
    probe: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LocalizeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    alpha: Option<f64>,
    /// Near-minimizer slack.
    #[arg(long)]
    slack: Option<f64>,
}

#[derive(Args, Debug)]
struct AlphaCurveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    source: SourceArgs,
    /// Comma-separated ascending levels.
    #[arg(long)]
    alphas: Option<String>,
    /// Shift for the continuity check.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    slack: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepCommon {
    #[command(flatten)]
    common: Common,
    /// Generator JSON (a bare distribution is accepted).
    #[arg(long)]
    generator: Option<String>,
    /// Population measure JSON, when it cannot be read off the generator.
    #[arg(long)]
    population: Option<String>,
    #[command(flatten)]
    class: ClassArgs,
    #[command(flatten)]
    functional: FunctionalArgs,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated ascending sample sizes.
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    slack: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    sweep: SweepCommon,
    /// Summary JSON path.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Record wall-clock milliseconds (otherwise 0, keeping output reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct SandwichArgs {
    #[command(flatten)]
    sweep: SweepCommon,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct ConverseArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated n values.
    #[arg(long)]
    n_list: Option<String>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 2,
        Error::Infeasible { .. } => 3,
        Error::Capacity { .. } => 4,
        Error::DegenerateProbe(_) | Error::Divergent(_) => 1,
    }
}

fn init_threads() {
    let Ok(v) = std::env::var("MASSLOCK_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // a pool already built (e.g. by an earlier in-process run) stays
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("masslock: ignoring MASSLOCK_THREADS={v:?}"),
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("masslock: {e}");
            exit_code(&e)
        }
    }
}
