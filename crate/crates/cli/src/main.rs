//! `selberg`: verify Selberg-type identities from the command line.
//!
//! Exit codes: 0 when every record passes, 1 on any failed record or engine
//! failure, 2 on a configuration or parameter-validity error.

mod config;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use selberg_core::identity_suite::run_grid;
use selberg_core::{Error, IdentityId};

use config::{ConfigError, Format, RunConfig, Settings};

#[derive(Parser)]
#[command(
    name = "selberg",
    version,
    about = "Numerical verification of Selberg-type integral and series identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run identities at a parameter point or over a grid.
    Verify(VerifyArgs),
    /// List the registered identities.
    List,
}

#[derive(Args)]
struct VerifyArgs {
    /// Identity to run (repeatable).
    #[arg(long = "identity", value_name = "ID")]
    identity: Vec<IdentityId>,
    /// Flat `key = value` file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sets k1 and k2 = 0.
    #[arg(long, conflicts_with_all = ["k1", "k2"])]
    k: Option<usize>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Alias of --beta1.
    #[arg(long, conflicts_with = "beta1", allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Alias of --z1.
    #[arg(long, conflicts_with = "z1")]
    z: Option<f64>,
    #[arg(long)]
    z1: Option<f64>,
    #[arg(long)]
    z2: Option<f64>,
    /// Grid file of value lists (Cartesian) or ranges with `draws` (random).
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Tolerance override for every identity.
    #[arg(long)]
    tol: Option<f64>,
    /// Preset (quick, default, thorough) or `nodes=..,samples=..,series_tol=..,max_bound=..`.
    #[arg(long)]
    budget: Option<String>,
    /// Seed; falls back to SELBERG_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl VerifyArgs {
    fn settings(self) -> (Settings, Option<PathBuf>) {
        let s = Settings {
            identity: self.identity,
            k1: self.k.or(self.k1),
            k2: if self.k.is_some() { Some(0) } else { self.k2 },
            alpha: self.alpha,
            beta1: self.beta.or(self.beta1),
            beta2: self.beta2,
            gamma: self.gamma,
            z1: self.z.or(self.z1),
            z2: self.z2,
            grid: self.grid,
            tol: self.tol,
            budget: self.budget,
            seed: self.seed,
            format: self.format,
            out: self.out,
        };
        (s, self.config)
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParams(_) | Error::Pole(_) | Error::Domain(_) | Error::InadmissibleTriple { .. }
    )
}

fn verify(args: VerifyArgs) -> ExitCode {
    let (flags, config_path) = args.settings();
    let resolved = config_path
        .as_deref()
        .map(Settings::from_file)
        .transpose()
        .and_then(|file| RunConfig::resolve(flags.or(file.unwrap_or_default()), std::env::var("SELBERG_SEED").ok()));
    let cfg = match resolved {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };

    let mut records = Vec::new();
    let mut config_errors = 0usize;
    let mut engine_errors = 0usize;
    for id in &cfg.identities {
        let outcome = run_grid(*id, &cfg.grid, &cfg.budget, cfg.seed, cfg.tol);
        for (p, e) in &outcome.errors {
            eprintln!("selberg: {id} at {p:?}: {e}");
            if is_config_error(e) {
                config_errors += 1;
            } else {
                engine_errors += 1;
            }
        }
        records.extend(outcome.records);
    }

    let written = match &cfg.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            report::write_records(&mut w, cfg.format, &records)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            report::write_records(&mut w, cfg.format, &records).and_then(|_| w.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("selberg: writing report: {e}");
        return ExitCode::from(2);
    }

    if config_errors > 0 {
        ExitCode::from(2)
    } else if engine_errors > 0 || records.iter().any(|r| !r.passed) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("selberg: configuration error: {e}");
    ExitCode::from(2)
}

fn list() -> ExitCode {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    let written: io::Result<()> = IdentityId::ALL.iter().try_for_each(|id| {
        let info = id.info();
        writeln!(w, "{:<15} {}", id.as_str(), info.title)?;
        writeln!(w, "{:<15} valid for: {}", "", info.predicate)?;
        writeln!(
            w,
            "{:<15} engine: {:?}, default tolerance: {:e}",
            "", info.engine, info.default_tolerance
        )
    });
    match written {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            eprintln!("selberg: {e}");
            ExitCode::from(1)
        }
        _ => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match cli.command {
        Command::Verify(args) => verify(args),
        Command::List => list(),
    }
}
