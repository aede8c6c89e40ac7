//! `pol`: classify projection-order sequences, emit and check porosity
//! certificates, and run alternating-projection experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::json;

use pol_core::classify::{membership, SetDescriptor};
use pol_core::config::Limits;
use pol_core::generators::{empirical_class_rates, ExperimentSpec, RateRow, RNG_ALGORITHM};
use pol_core::hilbert::{run_map, StopRule, SubspaceSystem};
use pol_core::parallel::Execution;
use pol_core::partition::{greedy_partition, GreedyPartition};
use pol_core::porosity::{
    verify_certificate, witness_a, witness_a_weighted, witness_b, witness_f, witness_nlc,
    VerifyMode, WitnessCertificate,
};
use pol_core::seqspace::SymbolicSequence;

/// Environment variable that replaces every seed of an experiment spec.
const SEED_ENV: &str = "POL_SEED";

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error(transparent)]
    Core(#[from] pol_core::Error),
    #[error("verification failed")]
    VerificationFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input { .. } => 2,
            CliError::Core(pol_core::Error::CapExceeded { .. }) => 4,
            CliError::Core(_) => 2,
            CliError::VerificationFailed => 3,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "pol",
    version,
    about = "Projection-order sequences and alternating projections"
)]
struct Cli {
    /// TOML file overriding the default resource caps.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Omit the timestamp from experiment summaries.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide membership of a sequence in a set.
    Classify {
        #[arg(long)]
        seq: PathBuf,
        /// Set descriptor, inline JSON or a path to a JSON file.
        #[arg(long)]
        set: String,
    },
    /// Greedy block partition of a sequence.
    Partition {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long = "L")]
        block_len: usize,
        #[arg(long, default_value_t = 20)]
        max_blocks: usize,
    },
    /// Construct a porosity witness certificate.
    Witness {
        #[arg(long)]
        set: String,
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        epsilon_exp: u64,
    },
    /// Check a certificate; exits with 3 when it does not hold.
    Verify {
        #[arg(long)]
        cert: PathBuf,
        /// Enumerate the ball to this many entries past the forced prefix
        /// instead of replaying the prefix argument.
        #[arg(long)]
        enumerate: Option<usize>,
    },
    /// Run alternating projections and print the trajectory as CSV.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        order: PathBuf,
        /// Comma-separated starting vector.
        #[arg(long)]
        xi0: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, default_value_t = 1)]
        log_stride: usize,
    },
    /// Empirical class rates for generator families.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::VerificationFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let limits = load_limits(cli.config.as_deref())?;
    match cli.command {
        Command::Classify { seq, set } => {
            let x: SymbolicSequence = read_json(&seq)?;
            let set = parse_set(&set)?;
            print_json(&membership(&x, &set, &limits)?)
        }
        Command::Partition {
            seq,
            block_len,
            max_blocks,
        } => {
            let x: SymbolicSequence = read_json(&seq)?;
            let g = greedy_partition(&x, block_len, max_blocks)?;
            print_json(&PartitionReport::new(&g))
        }
        Command::Witness {
            set,
            seq,
            epsilon_exp,
        } => {
            let x: SymbolicSequence = read_json(&seq)?;
            let set = parse_set(&set)?;
            print_json(&witness(&x, &set, epsilon_exp, &limits)?)
        }
        Command::Verify { cert, enumerate } => {
            let c: WitnessCertificate = read_json(&cert)?;
            let mode = match enumerate {
                Some(extra) => VerifyMode::Enumerate { extra },
                None => VerifyMode::PrefixForced,
            };
            let report = verify_certificate(&c, mode, &limits, Execution::Parallel)?;
            print_json(&report)?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::VerificationFailed)
            }
        }
        Command::Simulate {
            system,
            order,
            xi0,
            tol,
            max_iters,
            log_stride,
        } => {
            let system: SubspaceSystem = read_json(&system)?;
            let order: SymbolicSequence = read_json(&order)?;
            let xi0 = parse_vector(&xi0)?;
            let stop = StopRule {
                tol,
                max_iters: max_iters.unwrap_or(limits.max_iterations),
                log_stride,
            };
            let t = run_map(&system, &order, &xi0, stop)?;
            print!("{}", t.to_csv());
            Ok(())
        }
        Command::Experiment {
            spec,
            trials,
            horizon,
            out,
            jobs,
        } => experiment(&spec, trials, horizon, &out, jobs, !cli.no_timestamp),
    }
}

#[derive(Serialize)]
struct PartitionReport<'a> {
    #[serde(rename = "L")]
    block_len: usize,
    starts: &'a [u64],
    status: &'a pol_core::partition::GreedyStatus,
    /// `Σ_{i ≤ k} 1/r_i` for each listed start.
    partial_sums: Vec<f64>,
}

impl<'a> PartitionReport<'a> {
    fn new(g: &'a GreedyPartition) -> Self {
        let partial_sums = g
            .starts
            .iter()
            .scan(0.0, |acc, &r| {
                *acc += 1.0 / r as f64;
                Some(*acc)
            })
            .collect();
        PartitionReport {
            block_len: g.block_len,
            starts: &g.starts,
            status: &g.status,
            partial_sums,
        }
    }
}

fn witness(
    x: &SymbolicSequence,
    set: &SetDescriptor,
    e: u64,
    limits: &Limits,
) -> CliResult<WitnessCertificate> {
    let n = x.alphabet().size() as usize;
    let cert = match set {
        SetDescriptor::A { l, m } => {
            require_l_eq_n(*l, n)?;
            witness_a(x, *m, e, limits)?
        }
        SetDescriptor::B { l, k } => {
            require_l_eq_n(*l, n)?;
            witness_b(x, *k, e)?
        }
        SetDescriptor::F { n: symbol, m } => witness_f(x, *symbol, *m, e)?,
        SetDescriptor::NLc { l, bound } => witness_nlc(x, *l, bound, e)?,
        SetDescriptor::NfWeighted { l, m, weights } => {
            require_l_eq_n(*l, n)?;
            witness_a_weighted(x, *m, weights, e, limits)?
        }
    };
    Ok(cert)
}

fn require_l_eq_n(l: usize, n: usize) -> CliResult<()> {
    if l == n {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "witnesses for this set are built with L equal to the alphabet size {n}, got L = {l}"
        )))
    }
}

fn experiment(
    spec_path: &Path,
    trials: usize,
    horizon: usize,
    out: &Path,
    jobs: Option<usize>,
    timestamp: bool,
) -> CliResult<()> {
    let mut spec: ExperimentSpec = read_json(spec_path)?;
    let seed_override = match std::env::var(SEED_ENV) {
        Ok(v) => Some(v.trim().parse::<u64>().map_err(|e| CliError::Input {
            path: SEED_ENV.into(),
            message: e.to_string(),
        })?),
        Err(_) => None,
    };
    if let Some(seed) = seed_override {
        for f in &mut spec.families {
            f.generator = f.generator.with_seed(seed);
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Vec<RateRow> = pool.install(|| {
        spec.families
            .iter()
            .map(|f| {
                empirical_class_rates(
                    f,
                    spec.alphabet,
                    trials,
                    horizon,
                    spec.block_len,
                    spec.m,
                    Execution::Parallel,
                )
            })
            .collect::<pol_core::Result<_>>()
    })?;

    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let rates_path = out.join("rates.csv");
    let mut w = csv::Writer::from_path(&rates_path).map_err(|e| CliError::Input {
        path: rates_path.display().to_string(),
        message: e.to_string(),
    })?;
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Input {
            path: rates_path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| io_error(&rates_path, e))?;

    let mut summary = json!({
        "alphabet": spec.alphabet,
        "L": spec.block_len,
        "M": spec.m,
        "trials": trials,
        "horizon": horizon,
        "rng": RNG_ALGORITHM,
        "seed_override": seed_override,
        "families": spec.families,
        "rates": rows,
    });
    if timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        summary["timestamp"] = json!(secs);
    }
    let summary_path = out.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&summary_path, text + "\n").map_err(|e| io_error(&summary_path, e))?;
    print_json(&rows)
}

fn load_limits(path: Option<&Path>) -> CliResult<Limits> {
    match path {
        None => Ok(Limits::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            toml::from_str(&text).map_err(|e| CliError::Input {
                path: p.display().to_string(),
                message: e.to_string(),
            })
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Inline JSON when the argument looks like an object, otherwise a file.
fn parse_set(arg: &str) -> CliResult<SetDescriptor> {
    if arg.trim_start().starts_with('{') {
        serde_json::from_str(arg).map_err(|e| CliError::Input {
            path: "--set".into(),
            message: e.to_string(),
        })
    } else {
        read_json(Path::new(arg))
    }
}

fn parse_vector(arg: &str) -> CliResult<DVector<f64>> {
    let entries = arg
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input {
            path: "--xi0".into(),
            message: e.to_string(),
        })?;
    Ok(DVector::from_vec(entries))
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input {
        path: "<output>".into(),
        message: e.to_string(),
    })?;
    println!("{text}");
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
