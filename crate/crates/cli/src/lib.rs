//! Command-line front end: `coulomb-gas sample|equilibrium|verify|analyze`.

pub mod config;
pub mod run;

use std::path::PathBuf;

use clap::Parser;
use coulomb_gas::equilibrium::ClosedFormLaw;

use config::{resolve, Command, Overrides};
use run::{run, EXIT_USAGE};

fn parse_law(s: &str) -> Result<ClosedFormLaw, String> {
    ClosedFormLaw::from_name(s).ok_or_else(|| format!("unknown law `{s}`"))
}

/// Simulate Coulomb gases, solve for equilibrium measures and check the
/// stereographic identities.
#[derive(Debug, Parser)]
#[command(name = "coulomb-gas", version)]
pub struct Cli {
    /// What to run; overrides `command` in the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel kernels.
    #[arg(long, value_name = "K")]
    pub threads: Option<usize>,
    /// Samples CSV for `analyze`.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Reference law for `analyze`.
    #[arg(long, value_parser = parse_law)]
    pub reference: Option<ClosedFormLaw>,
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let text = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                return EXIT_USAGE;
            }
        },
        None => None,
    };
    let overrides = Overrides {
        command: cli.command,
        seed: cli.seed,
        out: cli.out,
        threads: cli.threads,
        input: cli.input,
        reference: cli.reference,
    };
    let config = match resolve(text.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(k) = config.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run(&config) {
        Ok(outcome) => outcome.exit_code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
