//! `euclid`: exhaustive ensembles, transfer-operator constants and checks
//! for the standard, centered and odd Euclidean algorithms.

mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use euclid_dyn::ensemble::{
    smoothed, smoothed_measure, summarize, total_variation, trans1_holds, uni_check, uniform_measure,
    write_histogram_csv, CostProfile, InputSet, SummaryCache, SCHEMA_VERSION,
};
use euclid_dyn::realdyn::{real_clt_check_with, write_samples_csv};
use euclid_dyn::spectral::{constants, OperatorConfig};
use euclid_dyn::stats::Check;
use euclid_dyn::{Algorithm, DigitCost, Error};
use serde::Serialize;

const CACHE_ENV: &str = "EUCLID_CACHE_DIR";

#[derive(Parser)]
#[command(name = "euclid", version, about = "Dynamical analysis of Euclidean algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact cost distribution over all inputs with denominator <= N.
    Stats(StatsArgs),
    /// Limit constants from the transfer operator.
    Constants(ConstantsArgs),
    /// Run a verification suite; exits 5 if any check fails.
    Verify(VerifyArgs),
    /// Smoothed model around N and its distance to the uniform law.
    Smooth(SmoothArgs),
    /// UNI ratio table for truncated branch sets.
    Uni(UniArgs),
    /// CLT check on truncated trajectories of random reals.
    Real(RealArgs),
}

#[derive(Args, Clone, Debug, Serialize)]
struct Common {
    /// Algorithm: G, K or O.
    #[arg(long, default_value = "G")]
    algo: Algorithm,
    /// Cost: unit, indicator:<m>, bits or table:<path>.
    #[arg(long, default_value = "unit")]
    cost: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize)]
struct OperatorArgs {
    #[arg(long, default_value_t = 40)]
    degree: usize,
    #[arg(long, default_value_t = 64)]
    m_cap: u64,
    #[arg(long, default_value_t = 1e-14)]
    tail_tol: f64,
}

impl OperatorArgs {
    fn config(&self) -> OperatorConfig {
        OperatorConfig { degree: self.degree, m_cap: self.m_cap, tail_tol: self.tail_tol, ..Default::default() }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
struct StatsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "N")]
    n: u64,
    /// Use all pairs `Ω̃_N` instead of coprime pairs.
    #[arg(long)]
    all_pairs: bool,
    /// Number of raw moments to record.
    #[arg(long, default_value_t = 4)]
    moments: usize,
    /// Also write the histogram as CSV.
    #[arg(long)]
    histogram: Option<PathBuf>,
    /// Summary cache directory (overridden by EUCLID_CACHE_DIR).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize)]
struct ConstantsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    operator: OperatorArgs,
}

#[derive(Args, Clone, Debug, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    operator: OperatorArgs,
    #[arg(long, value_enum, default_value = "all")]
    suite: verify::Suite,
    /// Size parameter of the suite (largest N, or largest v for identities).
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long, default_value_t = 20240601)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Clone, Debug, Serialize)]
struct SmoothArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "N")]
    n: u64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long)]
    all_pairs: bool,
}

#[derive(Args, Clone, Debug, Serialize)]
struct UniArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    /// Depths to check.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    depths: Vec<u32>,
    #[arg(long, default_value_t = 30)]
    m_cap: u64,
}

#[derive(Args, Clone, Debug, Serialize)]
struct RealArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    operator: OperatorArgs,
    /// Truncation depth.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 20240601)]
    seed: u64,
    /// Bits of precision of each random seed.
    #[arg(long, default_value_t = euclid_dyn::realdyn::DEFAULT_SEED_BITS)]
    seed_bits: u32,
    /// Also write the per-sample values as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failure of a run, mapped to the process exit code.
enum Failure {
    Lib(Error),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Cache(_) => 3,
        Error::Discretization(_)
        | Error::Inconsistency(_)
        | Error::Divergence { .. }
        | Error::NonConvergence { .. }
        | Error::Bracketing(_)
        | Error::Pole(_) => 4,
        _ => 2,
    }
}

type Run = std::result::Result<(), Failure>;

/// Every artifact carries the producing command, its arguments and the schema version.
#[derive(Serialize)]
struct Artifact<'a, C: Serialize, R: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a C,
    result: R,
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<C: Serialize, R: Serialize>(path: Option<&Path>, command: &str, config: &C, result: R) -> Run {
    let mut out = open_out(path)?;
    let artifact = Artifact { schema_version: SCHEMA_VERSION, command, config, result };
    serde_json::to_writer_pretty(&mut out, &artifact).map_err(|e| Error::Io(e.into()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// `# `-prefixed provenance lines for CSV files.
fn csv_header<C: Serialize>(out: &mut dyn Write, command: &str, config: &C) -> io::Result<()> {
    writeln!(out, "# schema_version: {SCHEMA_VERSION}")?;
    writeln!(out, "# command: {command}")?;
    writeln!(out, "# config: {}", serde_json::to_string(config).map_err(io::Error::other)?)
}

fn parse_cost(spec: &str) -> Result<DigitCost, Error> {
    let cost = DigitCost::parse_spec(spec)?;
    if let Some(w) = cost.moderate_growth_warning() {
        eprintln!("warning: {w}");
    }
    Ok(cost)
}

fn cmd_stats(args: &StatsArgs) -> Run {
    let cost = parse_cost(&args.common.cost)?;
    let set = InputSet::new(args.common.algo, args.n, !args.all_pairs);
    let cache_dir = std::env::var_os(CACHE_ENV).map(PathBuf::from).or_else(|| args.cache.clone());
    let summary = match cache_dir {
        Some(dir) => SummaryCache::new(dir)?.get_or_insert_with(&set, &cost.descriptor(), args.moments, || {
            summarize(&set, &cost, args.moments)
        })?,
        None => summarize(&set, &cost, args.moments)?,
    };
    if let Some(path) = &args.histogram {
        let mut out = BufWriter::new(File::create(path)?);
        csv_header(&mut out, "stats", args)?;
        write_histogram_csv(&summary, &mut out)?;
        out.flush()?;
    }
    write_json(args.common.out.as_deref(), "stats", args, &summary)
}

fn cmd_constants(args: &ConstantsArgs) -> Run {
    let cost = parse_cost(&args.common.cost)?;
    let bundle = constants(args.common.algo, &cost, &args.operator.config())?;
    write_json(args.common.out.as_deref(), "constants", args, &bundle)?;
    let failed = bundle.checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Run {
    let cost = parse_cost(&args.common.cost)?;
    let cfg = verify::VerifyConfig {
        suite: args.suite,
        algo: args.common.algo,
        cost: args.common.cost.clone(),
        n: args.n,
        degree: args.operator.degree,
        m_cap: args.operator.m_cap,
        seed: args.seed,
        samples: args.samples,
    };
    let rows = verify::run(&cfg, &cost)?;
    let mut out = open_out(args.common.out.as_deref())?;
    csv_header(&mut out, "verify", args)?;
    write_checks(&mut out, &rows)?;
    out.flush()?;
    let failed = rows.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn write_checks(out: &mut dyn Write, rows: &[Check]) -> io::Result<()> {
    writeln!(out, "check,target,observed,tolerance,pass")?;
    for c in rows {
        let verdict = if c.pass { "pass" } else { "fail" };
        writeln!(out, "\"{}\",{},{},{},{verdict}", c.name, c.target, c.observed, c.tolerance)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SmoothReport {
    smoothed: euclid_dyn::ensemble::SmoothedSummary,
    total_variation: f64,
    smoothing_identity: bool,
}

fn cmd_smooth(args: &SmoothArgs) -> Run {
    let cost = parse_cost(&args.common.cost)?;
    let set = InputSet::new(args.common.algo, args.n, !args.all_pairs);
    let profile = CostProfile::build(set.algo, &cost, args.n + 1)?;
    let s = smoothed(&profile, &set, args.gamma)?;
    let tv = total_variation(&uniform_measure(&profile, &set)?, &smoothed_measure(&profile, &set, args.gamma)?)?;
    let ok = trans1_holds(&profile, &s)?;
    write_json(
        args.common.out.as_deref(),
        "smooth",
        args,
        SmoothReport { smoothed: s, total_variation: tv, smoothing_identity: ok },
    )?;
    if !ok {
        return Err(Failure::Checks(1));
    }
    Ok(())
}

fn cmd_uni(args: &UniArgs) -> Run {
    let mut out = open_out(args.common.out.as_deref())?;
    csv_header(&mut out, "uni", args)?;
    writeln!(out, "n,eta,worst_ratio,worst_tail,truncated_mass,branches")?;
    for &n in &args.depths {
        let r = uni_check(args.common.algo, n, args.a, args.m_cap)?;
        writeln!(out, "{n},{},{},{},{},{}", r.eta, r.worst_ratio, r.worst_tail, r.truncated_mass, r.branches)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_real(args: &RealArgs) -> Run {
    let cost = parse_cost(&args.common.cost)?;
    let report = real_clt_check_with(
        args.common.algo,
        &cost,
        args.n,
        args.samples,
        args.seed,
        args.seed_bits,
        &args.operator.config(),
    )?;
    if let Some(path) = &args.csv {
        let mut out = BufWriter::new(File::create(path)?);
        csv_header(&mut out, "real", args)?;
        write_samples_csv(&report, &mut out)?;
        out.flush()?;
    }
    write_json(args.common.out.as_deref(), "real", args, &report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Stats(a) => cmd_stats(a),
        Command::Constants(a) => cmd_constants(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Smooth(a) => cmd_smooth(a),
        Command::Uni(a) => cmd_uni(a),
        Command::Real(a) => cmd_real(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Checks(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(5)
        }
    }
}
