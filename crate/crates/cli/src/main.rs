//! `pawpcn`: single solves, parameter sweeps and config checks for
//! pinching-antenna wireless powered networks.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible, 4 internal.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pawpcn::allocator::Protocol;
use pawpcn::config::RunConfig;
use pawpcn::orchestrator::output::{write_outputs, write_results_to};
use pawpcn::orchestrator::{run_sweep, Algorithm, RowStatus, SweepAxis, SweepResult, SweepSpec};
use pawpcn::Error;

#[derive(Parser)]
#[command(name = "pawpcn", version, about = "Pinching-antenna WPCN solver and sweep runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one seeded scenario and print CSV rows to stdout.
    Solve(SolveArgs),
    /// Run a parameter sweep and write results.csv, trace.csv and manifest.json.
    Sweep(SweepArgs),
    /// Parse and check a configuration file.
    Validate(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set delta=0.55`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_enum, default_value_t = ProtocolChoice::Tdma)]
    protocol: ProtocolChoice,
    #[arg(long, value_enum, default_value_t = AlgoChoice::Ew)]
    algo: AlgoChoice,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Single scenario seed (ignored when --seeds is given).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed range, `N..M` (M excluded) or `N..=M`.
    #[arg(long, value_parser = parse_seed_range)]
    seeds: Option<SeedRange>,
    /// Varied parameter, e.g. `delta=0.3,0.35,0.4`. Keys: n_antennas,
    /// k_devices, delta, mu_db_per_m, circuit_power_w, hap_power_dbm,
    /// protocol, algo.
    #[arg(long, value_parser = parse_axis)]
    sweep: Option<SweepAxis>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolChoice {
    Tdma,
    Noma,
    Both,
}

impl ProtocolChoice {
    fn protocols(self) -> Vec<Protocol> {
        match self {
            ProtocolChoice::Tdma => vec![Protocol::Tdma],
            ProtocolChoice::Noma => vec![Protocol::Noma],
            ProtocolChoice::Both => vec![Protocol::Tdma, Protocol::Noma],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoChoice {
    Ew,
    Spde,
    /// Fixed antenna at the feed point, allocation only.
    Conv,
    /// ew and spde.
    Both,
    /// ew, spde and conv.
    All,
}

impl AlgoChoice {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgoChoice::Ew => vec![Algorithm::Ew],
            AlgoChoice::Spde => vec![Algorithm::Spde],
            AlgoChoice::Conv => vec![Algorithm::Conv],
            AlgoChoice::Both => vec![Algorithm::Ew, Algorithm::Spde],
            AlgoChoice::All => vec![Algorithm::Ew, Algorithm::Spde, Algorithm::Conv],
        }
    }
}

#[derive(Clone)]
struct SeedRange(Vec<u64>);

fn parse_seed_range(s: &str) -> Result<SeedRange, String> {
    let (lo, hi, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        return Err(format!("expected N..M or N..=M, got `{s}`"));
    };
    let lo: u64 = lo.trim().parse().map_err(|_| format!("bad seed `{lo}`"))?;
    let hi: u64 = hi.trim().parse().map_err(|_| format!("bad seed `{hi}`"))?;
    let seeds: Vec<u64> = if inclusive { (lo..=hi).collect() } else { (lo..hi).collect() };
    if seeds.is_empty() {
        return Err(format!("seed range `{s}` is empty"));
    }
    Ok(SeedRange(seeds))
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig { .. } => EXIT_CONFIG,
        e if e.is_infeasible() => EXIT_INFEASIBLE,
        _ => EXIT_INTERNAL,
    }
}

fn status_code(status: RowStatus) -> u8 {
    match status {
        RowStatus::Ok => 0,
        RowStatus::Invalid => EXIT_CONFIG,
        RowStatus::Infeasible => EXIT_INFEASIBLE,
        RowStatus::Failed => EXIT_INTERNAL,
    }
}

fn load(args: &ConfigArgs) -> Result<RunConfig, Error> {
    RunConfig::load(args.config.as_deref(), &args.overrides)
}

fn spec(cfg: &RunConfig, run: &RunArgs, axis: SweepAxis, seeds: Vec<u64>) -> SweepSpec {
    SweepSpec {
        axis,
        seeds,
        protocols: run.protocol.protocols(),
        algorithms: run.algo.algorithms(),
        config: cfg.system(),
        template: cfg.template(),
        settings: cfg.settings(),
    }
}

fn run_pool(jobs: Option<usize>, spec: &SweepSpec) -> Result<SweepResult, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::invalid("jobs", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(|| run_sweep(spec)))
}

fn report_failures(result: &SweepResult) {
    for row in &result.rows {
        if let Some(msg) = &row.message {
            let point = if row.value.is_empty() {
                String::new()
            } else {
                format!("{} = {}, ", row.parameter, row.value)
            };
            eprintln!(
                "run {} ({point}seed {}, {} {}): {msg}",
                row.run_id, row.seed, row.protocol, row.algo
            );
        }
    }
}

fn solve(args: &SolveArgs) -> Result<u8, Error> {
    let cfg = load(&args.run.config)?;
    let spec = spec(&cfg, &args.run, SweepAxis::Single, vec![args.seed]);
    let result = run_pool(args.run.jobs, &spec)?;
    report_failures(&result);
    let ok: Vec<_> = result.rows.iter().filter(|r| r.status == RowStatus::Ok).cloned().collect();
    write_results_to(std::io::stdout().lock(), &ok).map_err(|e| Error::Domain(format!("cannot write to stdout: {e}")))?;
    Ok(result.rows.iter().map(|r| status_code(r.status)).max().unwrap_or(0))
}

fn sweep(args: &SweepArgs) -> Result<u8, Error> {
    let cfg = load(&args.run.config)?;
    let seeds = args.seeds.clone().map_or_else(|| vec![args.seed], |r| r.0);
    let spec = spec(&cfg, &args.run, args.sweep.clone().unwrap_or(SweepAxis::Single), seeds);
    let result = run_pool(args.run.jobs, &spec)?;
    report_failures(&result);
    write_outputs(&args.out, &spec, &result, cfg.to_json_value())?;
    let n_ok = result.n_ok();
    eprintln!(
        "{n_ok} of {} runs succeeded in {:.1} s; wrote {}",
        result.rows.len(),
        result.wall_time_s,
        args.out.display()
    );
    if n_ok > 0 {
        Ok(0)
    } else {
        Ok(result.rows.iter().map(|r| status_code(r.status)).max().unwrap_or(EXIT_INTERNAL))
    }
}

fn validate(args: &ConfigArgs) -> Result<u8, Error> {
    let cfg = load(args)?;
    let sys = cfg.system();
    let source = args.config.as_deref().unwrap_or(Path::new("<defaults>"));
    println!(
        "{}: ok (N = {}, K = {}, {} W at the access point, spacing {} m)",
        source.display(),
        cfg.n_antennas,
        cfg.k_devices,
        sys.hap_power_w,
        sys.min_spacing_m
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
