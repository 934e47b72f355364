//! Executes a resolved [`RunConfig`] and writes its artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use coulomb_gas::analysis::{fit_against, FitReport};
use coulomb_gas::equilibrium::{closed_form, fekete_descent, grid_minimize, DescentOptions, SolverReport};
use coulomb_gas::geometry::pushforward;
use coulomb_gas::io::{read_samples, write_plane_measure, write_samples, write_sphere_measure};
use coulomb_gas::model::initial_configuration;
use coulomb_gas::sampler::{run_chains, TraceSummary};
use coulomb_gas::verify::run_identity_suites;
use coulomb_gas::{Complex64, Execution};
use serde::Serialize;

use crate::config::{Command, ConfigError, RunConfig, Start};

/// Exit status of a completed run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] coulomb_gas::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// Files written, manifest last.
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct ChainSummary {
    chain: usize,
    acceptance_rate: f64,
    burn_in_acceptance_rate: f64,
    final_step_scale: f64,
    heavy_tail_fraction: f64,
    energy_trace_summary: TraceSummary,
}

#[derive(Serialize)]
struct SampleStats {
    acceptance_rate: f64,
    chains: Vec<ChainSummary>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    seed: u64,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_owned(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_owned(),
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, RunError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(BufWriter::new(file))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)
            .map_err(std::io::Error::from)
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush())
            .map_err(|source| RunError::Io { path, source })
    }
}

/// Runs `config`. Verification failure is reported through
/// [`Outcome::exit_code`]; everything else that goes wrong is an error.
pub fn run(config: &RunConfig) -> Result<Outcome, RunError> {
    let mut out = Artifacts::new(&config.out)?;
    let exit_code = match config.command {
        Command::Sample => sample(config, &mut out)?,
        Command::Equilibrium => equilibrium(config, &mut out)?,
        Command::Verify => verify(config, &mut out)?,
        Command::Analyze => analyze(config, &mut out)?,
    };
    let outputs = out
        .files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    out.json(
        "manifest.json",
        &Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: config.command,
            seed: config.seed,
            config,
            outputs,
        },
    )?;
    Ok(Outcome {
        exit_code,
        files: out.files,
    })
}

fn sample(config: &RunConfig, out: &mut Artifacts) -> Result<i32, RunError> {
    let model = config.gas_model();
    let mut init = initial_configuration(model);
    if config.chain.start == Start::Mode {
        init = fekete_descent(model, &init, &DescentOptions::default())?.config;
    }
    let params = config.chain_params();
    let chains = run_chains(
        model,
        Some(&init),
        &params,
        config.chain.chains,
        Execution::Parallel,
    )?;

    let path = out.dir.join("samples.csv");
    let w = out.create("samples.csv")?;
    write_samples(w, &chains).map_err(|e| io_error(&path, e))?;

    let summaries: Vec<ChainSummary> = chains
        .iter()
        .map(|c| ChainSummary {
            chain: c.chain,
            acceptance_rate: c.stats.acceptance_rate,
            burn_in_acceptance_rate: c.stats.burn_in_acceptance_rate,
            final_step_scale: c.stats.final_step_scale,
            heavy_tail_fraction: c.stats.heavy_tail_fraction,
            energy_trace_summary: c.stats.trace_summary(),
        })
        .collect();
    let acceptance_rate = summaries.iter().map(|s| s.acceptance_rate).sum::<f64>() / summaries.len() as f64;
    out.json(
        "stats.json",
        &SampleStats {
            acceptance_rate,
            chains: summaries,
        },
    )?;
    Ok(EXIT_OK)
}

fn equilibrium(config: &RunConfig, out: &mut Artifacts) -> Result<i32, RunError> {
    let model = config.gas_model();
    let result = grid_minimize(model, &config.grid_spec()?, &config.solver_options())?;
    let mu = result.measure();

    let path = out.dir.join("measure.csv");
    let w = out.create("measure.csv")?;
    write_plane_measure(w, &mu, model.support().is_real()).map_err(|e| io_error(&path, e))?;
    let path = out.dir.join("sphere_measure.csv");
    let w = out.create("sphere_measure.csv")?;
    write_sphere_measure(w, &pushforward(&mu)).map_err(|e| io_error(&path, e))?;

    let report: SolverReport = result.report();
    if !report.converged {
        eprintln!(
            "warning: solver stopped after {} iterations with duality gap {:.3e} > tol {:.3e}",
            report.iterations, report.gap, config.grid.tol
        );
    }
    out.json("report.json", &report)?;
    Ok(EXIT_OK)
}

fn verify(config: &RunConfig, out: &mut Artifacts) -> Result<i32, RunError> {
    let report = run_identity_suites(&config.verify_options())?;
    for s in &report.suites {
        eprintln!(
            "{:<20} {:>8} cases  max deviation {:.3e}  {}",
            s.name,
            s.cases,
            s.max_deviation,
            if s.passed { "ok" } else { "FAILED" }
        );
    }
    out.json("verify.json", &report)?;
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn analyze(config: &RunConfig, out: &mut Artifacts) -> Result<i32, RunError> {
    let input = config
        .analyze
        .input
        .as_ref()
        .expect("validated: analyze has an input");
    let file = File::open(input).map_err(|source| RunError::Io {
        path: input.clone(),
        source,
    })?;
    let rows = read_samples(std::io::BufReader::new(file)).map_err(|e| io_error(input, e))?;
    let points: Vec<Complex64> = rows.iter().map(|r| r.point()).collect();
    let law = match config.analyze.reference {
        Some(law) => law,
        None => closed_form(config.gas_model())?,
    };
    let fit: FitReport = fit_against(law, &points)?;
    eprintln!(
        "{}: KS statistic {:.4} over {} samples",
        fit.reference, fit.statistic, fit.sample_size
    );
    out.json("fit.json", &fit)?;
    Ok(EXIT_OK)
}

fn io_error(path: &Path, e: coulomb_gas::Error) -> RunError {
    match e {
        coulomb_gas::Error::Io(msg) => RunError::Io {
            path: path.to_owned(),
            source: std::io::Error::other(msg),
        },
        other => RunError::Core(other),
    }
}
