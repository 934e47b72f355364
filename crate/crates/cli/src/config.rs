//! Run configuration: a strict TOML schema, command-line overrides and
//! validation.
//!
//! ```toml
//! command = "sample"
//! seed = 7
//!
//! [model]
//! potential = "cauchy"      # or { name = "...", params = { ... }, beta_prime = 2.0 }
//! beta = 2.0
//! n = 64
//!
//! [chain]
//! sweeps = 1000
//! ```

use std::fmt;
use std::path::PathBuf;

use coulomb_gas::equilibrium::{ClosedFormLaw, GridSpec, Init, Method, SolverOptions, Spacing};
use coulomb_gas::model::{GasModel, PotentialSpec, Support};
use coulomb_gas::sampler::{ChainParams, HeavyTail};
use coulomb_gas::verify::VerifyOptions;
use coulomb_gas::Execution;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Sample,
    Equilibrium,
    Verify,
    Analyze,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Sample => "sample",
            Command::Equilibrium => "equilibrium",
            Command::Verify => "verify",
            Command::Analyze => "analyze",
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), field.as_ref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },
    #[error("invalid value for `{path}`: {message}")]
    Validation { path: String, message: String },
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        path: path.to_owned(),
        message: message.into(),
    }
}

/// A potential given by built-in name or as a full table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialField {
    Name(String),
    Spec(PotentialSpec),
}

impl PotentialField {
    fn resolve(&self) -> Result<PotentialSpec, ConfigError> {
        match self {
            PotentialField::Spec(s) => Ok(s.clone()),
            PotentialField::Name(name) => match name.as_str() {
                "cauchy" => Ok(PotentialSpec::cauchy()),
                "spherical" => Ok(PotentialSpec::spherical()),
                "quadratic" => Ok(PotentialSpec::quadratic()),
                other => Err(invalid(
                    "model.potential",
                    format!("unknown built-in potential `{other}`; custom potentials need a table"),
                )),
            },
        }
    }
}

fn default_potential() -> PotentialField {
    PotentialField::Name("cauchy".into())
}

fn default_beta() -> f64 {
    2.0
}

fn default_n() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_potential")]
    pub potential: PotentialField,
    /// Defaults to the complex plane for `spherical` and the real line otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Support>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_n")]
    pub n: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            potential: default_potential(),
            support: None,
            beta: default_beta(),
            n: default_n(),
        }
    }
}

/// Starting configuration of every chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// The deterministic spread-out configuration of the support.
    #[default]
    Spread,
    /// A local maximizer of the density, found by mode descent from `spread`.
    Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSection {
    /// Total sweeps, burn-in included.
    pub sweeps: usize,
    /// Defaults to `min(1000, sweeps / 2)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    pub step_scale: f64,
    pub adapt: bool,
    pub thin: usize,
    pub heavy_tail: HeavyTail,
    pub chains: usize,
    pub start: Start,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self {
            sweeps: 3000,
            burn_in: None,
            step_scale: 0.1,
            adapt: true,
            thin: 1,
            heavy_tail: HeavyTail::Auto,
            chains: 4,
            start: Start::Spread,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub window: f64,
    /// Atoms on the real line, or bands (and sectors per band) on the plane.
    /// Defaults to 400 and 20 respectively.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    pub spacing: Spacing,
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub init: Init,
}

impl Default for GridSection {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            window: 100.0,
            resolution: None,
            spacing: Spacing::default(),
            method: solver.method,
            tol: solver.tol,
            max_iter: solver.max_iter,
            init: solver.init,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub cases: usize,
    pub configurations: usize,
    pub measures: usize,
    pub atoms: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        let v = VerifyOptions::default();
        Self {
            cases: v.cases,
            configurations: v.configurations,
            measures: v.measures,
            atoms: v.atoms,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeSection {
    /// Samples CSV written by `sample`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Law to test against; defaults to the model's closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ClosedFormLaw>,
}

/// The file schema. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    chain: ChainSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    verify: VerifySection,
    #[serde(default)]
    analyze: AnalyzeSection,
}

/// Values given on the command line; they take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub input: Option<PathBuf>,
    pub reference: Option<ClosedFormLaw>,
}

/// A fully resolved and validated run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub model: ModelSection,
    pub chain: ChainSection,
    pub grid: GridSection,
    pub verify: VerifySection,
    pub analyze: AnalyzeSection,
    #[serde(skip)]
    gas_model: GasModel,
}

fn parse_error(text: &str, e: toml::de::Error) -> ConfigError {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    let message = e.message().to_owned();
    let field = message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
        .map(str::to_owned);
    ConfigError::Parse { line, field, message }
}

/// Parses and validates a configuration file with no overrides.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    resolve(Some(text), &Overrides::default())
}

/// Merges `text` (if any) under `overrides`, fills defaults and validates.
pub fn resolve(text: Option<&str>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let file: FileConfig = match text {
        Some(t) => toml::from_str(t).map_err(|e| parse_error(t, e))?,
        None => FileConfig::default(),
    };
    let command = overrides
        .command
        .or(file.command)
        .ok_or_else(|| invalid("command", "no command given on the command line or in the file"))?;
    let mut analyze = file.analyze;
    if overrides.input.is_some() {
        analyze.input = overrides.input.clone();
    }
    if overrides.reference.is_some() {
        analyze.reference = overrides.reference;
    }
    let model = file.model;
    let gas_model = build_model(&model)?;
    let mut chain = file.chain;
    chain.burn_in.get_or_insert((chain.sweeps / 2).min(1000));
    let mut grid = file.grid;
    grid.resolution
        .get_or_insert(if gas_model.support().is_real() { 400 } else { 20 });
    let config = RunConfig {
        command,
        seed: overrides.seed.or(file.seed).unwrap_or(0),
        out: overrides
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("out")),
        threads: overrides.threads.or(file.threads),
        model,
        chain,
        grid,
        verify: file.verify,
        analyze,
        gas_model,
    };
    config.validate()?;
    Ok(config)
}

fn build_model(m: &ModelSection) -> Result<GasModel, ConfigError> {
    if !(m.beta.is_finite() && m.beta > 0.0) {
        return Err(invalid("model.beta", format!("must be > 0, got {}", m.beta)));
    }
    if m.n == 0 {
        return Err(invalid("model.n", "must be >= 1"));
    }
    let potential = m.potential.resolve()?;
    let support = m.support.unwrap_or(if potential.name() == "spherical" {
        Support::ComplexPlane
    } else {
        Support::RealLine
    });
    GasModel::new(support, m.beta, potential, m.n).map_err(|e| invalid("model", e.to_string()))
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be >= 1"));
        }
        let c = &self.chain;
        if c.sweeps == 0 {
            return Err(invalid("chain.sweeps", "must be >= 1"));
        }
        if self.burn_in() >= c.sweeps {
            return Err(invalid(
                "chain.burn_in",
                format!("must be below chain.sweeps = {}", c.sweeps),
            ));
        }
        if !(c.step_scale.is_finite() && c.step_scale > 0.0) {
            return Err(invalid("chain.step_scale", "must be > 0"));
        }
        if c.thin == 0 {
            return Err(invalid("chain.thin", "must be >= 1"));
        }
        if c.chains == 0 {
            return Err(invalid("chain.chains", "must be >= 1"));
        }
        if let HeavyTail::Fraction(f) = c.heavy_tail {
            if !(0.0..=1.0).contains(&f) {
                return Err(invalid("chain.heavy_tail", "fraction must lie in [0, 1]"));
            }
        }
        let g = &self.grid;
        if let Err(e) = self.grid_spec() {
            let path = if !(g.window.is_finite() && g.window > 0.0) {
                "grid.window"
            } else {
                "grid.resolution"
            };
            return Err(invalid(path, e.to_string()));
        }
        if !(g.tol.is_finite() && g.tol >= 0.0) {
            return Err(invalid("grid.tol", "must be >= 0"));
        }
        let v = &self.verify;
        for (name, value) in [
            ("verify.cases", v.cases),
            ("verify.configurations", v.configurations),
            ("verify.measures", v.measures),
            ("verify.atoms", v.atoms),
        ] {
            if value == 0 {
                return Err(invalid(name, "must be >= 1"));
            }
        }
        if self.command == Command::Analyze {
            match &self.analyze.input {
                None => {
                    return Err(invalid(
                        "analyze.input",
                        "the analyze command needs a samples CSV",
                    ))
                }
                Some(p) if !p.is_file() => {
                    return Err(invalid(
                        "analyze.input",
                        format!("{} does not exist", p.display()),
                    ))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn gas_model(&self) -> &GasModel {
        &self.gas_model
    }

    pub fn burn_in(&self) -> usize {
        self.chain.burn_in.expect("filled in by resolve")
    }

    pub fn chain_params(&self) -> ChainParams {
        ChainParams {
            sweeps: self.chain.sweeps,
            burn_in: self.burn_in(),
            step_scale: self.chain.step_scale,
            adapt: self.chain.adapt,
            seed: self.seed,
            thin: self.chain.thin,
            heavy_tail: self.chain.heavy_tail,
        }
    }

    pub fn grid_spec(&self) -> coulomb_gas::Result<GridSpec> {
        GridSpec::new(
            self.grid.window,
            self.grid.resolution.expect("filled in by resolve"),
            self.grid.spacing,
        )
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.grid.tol,
            max_iter: self.grid.max_iter,
            method: self.grid.method,
            init: self.grid.init.clone(),
            exec: Execution::Parallel,
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            seed: self.seed,
            cases: self.verify.cases,
            configurations: self.verify.configurations,
            measures: self.verify.measures,
            atoms: self.verify.atoms,
            exec: Execution::Parallel,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
command = "sample"

[model]
potential = "cauchy"
beta = 2.0
n = 64

[chain]
sweeps = 1000
"#;

    #[test]
    fn minimal_sample_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.command, Command::Sample);
        assert_eq!(c.seed, 0);
        assert_eq!(c.gas_model(), &GasModel::cauchy(64));
        let p = c.chain_params();
        assert_eq!(p.sweeps, 1000);
        assert_eq!(p.burn_in, 500);
        assert_eq!(p.thin, 1);
        assert!(p.adapt);
        assert_eq!(c.out, PathBuf::from("out"));
    }

    #[test]
    fn unknown_key_names_the_field() {
        let err = parse_config("command = \"sample\"\n[model]\ngamma = 3\n").unwrap_err();
        match err {
            ConfigError::Parse { line, field, .. } => {
                assert_eq!(field.as_deref(), Some("gamma"));
                assert_eq!(line, Some(3));
            }
            other => panic!("{other:?}"),
        }
        let err = parse_config("gamma = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { field: Some(ref f), .. } if f == "gamma"));
    }

    #[test]
    fn negative_beta_is_a_validation_error() {
        let err = parse_config("command = \"sample\"\n[model]\nbeta = -1.0\n").unwrap_err();
        assert!(
            matches!(err, ConfigError::Validation { ref path, .. } if path == "model.beta"),
            "{err}"
        );
    }

    #[test]
    fn flags_override_the_file() {
        let text = "command = \"verify\"\nseed = 5\nout = \"a\"\n";
        let o = Overrides {
            command: Some(Command::Sample),
            seed: Some(9),
            ..Default::default()
        };
        let c = resolve(Some(text), &o).unwrap();
        assert_eq!(c.command, Command::Sample);
        assert_eq!(c.seed, 9);
        assert_eq!(c.out, PathBuf::from("a"));
    }

    #[test]
    fn potential_table_and_support_defaults() {
        let text = r#"
command = "equilibrium"
[model]
potential = { name = "spherical" }
n = 4
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.gas_model().support(), Support::ComplexPlane);
        assert_eq!(c.grid_spec().unwrap().resolution, 20);

        let custom = r#"
command = "equilibrium"
[model]
potential = { name = "quartic", params = { poly = [0.0, 0.0, 1.0], log_coeff = 0.0, variable = "x" }, v_infinity = "inf" }
"#;
        let c = parse_config(custom).unwrap();
        assert_eq!(c.gas_model().potential().name(), "quartic");
        assert_eq!(c.gas_model().potential().v_infinity(), Some(f64::INFINITY));
    }

    #[test]
    fn validation_paths() {
        let cases = [
            (
                "command = \"sample\"\n[chain]\nsweeps = 10\nburn_in = 10\n",
                "chain.burn_in",
            ),
            ("command = \"sample\"\n[chain]\nthin = 0\n", "chain.thin"),
            (
                "command = \"equilibrium\"\n[grid]\nresolution = 3\n",
                "grid.resolution",
            ),
            ("command = \"equilibrium\"\n[grid]\nwindow = 0.0\n", "grid.window"),
            ("command = \"analyze\"\n", "analyze.input"),
            (
                "command = \"analyze\"\n[analyze]\ninput = \"/nonexistent/x.csv\"\n",
                "analyze.input",
            ),
            ("[model]\nn = 3\n", "command"),
            (
                "command = \"sample\"\n[model]\npotential = \"quartic\"\n",
                "model.potential",
            ),
        ];
        for (text, path) in cases {
            match parse_config(text) {
                Err(ConfigError::Validation { path: p, .. }) => assert_eq!(p, path, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn malformed_toml_reports_a_line() {
        let err = parse_config("command = \"sample\"\nseed = \n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: Some(2), .. }), "{err:?}");
    }
}
