//! Experiment configuration: a JSON file, command-line flags, or both.
//!
//! Flags override the file key by key. The merged parameters are parsed
//! into the typed parameters of the chosen command, so unknown or
//! ill-typed keys are rejected whichever way they were given.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DICHOTOMY_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Gen,
    Distortion,
    L2Distortion,
    Invariant,
    DichotomyFit,
    Heta,
    Forks,
    B4Search,
    Sweep,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Gen => "gen",
            CommandKind::Distortion => "distortion",
            CommandKind::L2Distortion => "l2-distortion",
            CommandKind::Invariant => "invariant",
            CommandKind::DichotomyFit => "dichotomy-fit",
            CommandKind::Heta => "heta",
            CommandKind::Forks => "forks",
            CommandKind::B4Search => "b4-search",
            CommandKind::Sweep => "sweep",
        }
    }
}

/// A fully resolved run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Node, map-evaluation or iteration cap, depending on the command.
    #[serde(default)]
    pub budget: Option<u64>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn new(command: CommandKind, parameters: Value) -> CliResult<Self> {
        let parameters = match parameters {
            Value::Object(map) => map,
            Value::Null => Map::new(),
            other => return Err(CliError::Config(format!("parameters must be an object, got {other}"))),
        };
        Ok(Self {
            command,
            parameters,
            seed: 0,
            output_dir: default_output_dir(),
            budget: None,
        })
    }

    pub fn with_output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = dir.into();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }
}

/// The configuration file: every key optional, flags fill in the rest.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    command: Option<CommandKind>,
    #[serde(default)]
    parameters: Map<String, Value>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    budget: Option<u64>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Runs experiments on finite metric spaces and writes CSV results, a JSON
/// manifest and optional SVG plots.
///
/// Spaces are written `kind:key=value,...`, e.g. `path:n=4`,
/// `ultrametric-host:depth=4`, `heta:depth=5,eta=0.2`, `random:n=6,seed=1`
/// or `file:path=space.txt`. Kinds: path, cube, linf-grid, torus-index,
/// binary-tree, ultrametric-host, snowflake-line, heta, random, file.
///
/// Exit status: 0 success, 2 invalid configuration, 3 budget exhausted with
/// no result, 4 internal invariant violation. The worker thread count is
/// read from DICHOTOMY_THREADS.
#[derive(Debug, Parser)]
#[command(name = "dichotomy", version)]
pub struct Cli {
    /// JSON configuration file with keys command, parameters, seed,
    /// output-dir and budget; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for random spaces (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving the CSV, manifest and plots (default `results`).
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Search-node, map-evaluation or solver-iteration cap.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build a space and write it in the interchange text format.
    Gen(GenArgs),
    /// Exact least distortion of a domain into a finite host.
    Distortion(DistortionArgs),
    /// Certified bracket on the least Euclidean distortion.
    L2Distortion(L2Args),
    /// Evaluate psi, type, gamma or metric-en-cotype over a list of n.
    Invariant(InvariantArgs),
    /// Decay exponent implied by one functional value below 1.
    DichotomyFit(FitArgs),
    /// Validate H_eta hosts and their identity distortion over a grid.
    Heta(HetaArgs),
    /// List and classify the delta-forks of a space.
    Forks(ForksArgs),
    /// Bounded search for faithful embeddings of B_t into H_eta.
    B4Search(B4Args),
    /// Distortion bounds over a (host, family, n) grid with running D_N.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenArgs {
    /// Space to build.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DistortionArgs {
    /// Space to embed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    /// Finite host space.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct L2Args {
    /// Space to embed (at most 64 points).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    /// Relative gap between the bounds at which the solver stops (default 1e-4).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InvariantArgs {
    /// psi, type, gamma or metric-en-cotype.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Host space.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    /// Torus side for gamma and metric-en-cotype.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Cotype exponent for metric-en-cotype (default 2).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Also write a log-log plot of n against the value.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub plot: bool,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    /// Scale at which the functional was evaluated.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<u64>,
    /// Functional value at n0; give this or --host.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Host whose psi at n0 is fitted; give this or --eta.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct HetaArgs {
    /// Comma-separated depth caps.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<u32>>,
    /// Comma-separated contraction factors in (0, 1].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ForksArgs {
    /// Space to search; heta spaces are also classified.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    /// Fork tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Only forks with two different prongs (default true).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct_prongs: Option<bool>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct B4Args {
    /// Depth cap of the H_eta host.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// Contraction factor of the host.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Vertical faithfulness slack (default 0.02).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Depth of the domain tree (default 4).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_depth: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    /// Domain family; repeat for several. `n` is set per cell.
    #[arg(long = "family")]
    #[serde(rename = "families", skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<String>>,
    /// Host space; repeat for several.
    #[arg(long = "host")]
    #[serde(rename = "hosts", skip_serializing_if = "Option::is_none")]
    pub hosts: Option<Vec<String>>,
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    /// Also write a log-log plot of N against D_N.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub plot: bool,
}

impl Command {
    /// The command and the parameters given as flags.
    fn overrides(&self) -> CliResult<(CommandKind, Map<String, Value>)> {
        // Serializing an externally tagged enum gives {"<command>": {..}}.
        let value = serde_json::to_value(self)?;
        let (name, params) = value
            .as_object()
            .and_then(|o| o.iter().next())
            .ok_or_else(|| CliError::Config("cannot read subcommand flags".into()))?;
        let kind: CommandKind = serde_json::from_value(Value::String(name.clone()))?;
        let params = params.as_object().cloned().unwrap_or_default();
        Ok((kind, params))
    }
}

fn read_file_config(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Merges the configuration file (if any) with the flags.
pub fn resolve(cli: &Cli) -> CliResult<ExperimentConfig> {
    let file = match &cli.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };
    let flags = cli.command.as_ref().map(Command::overrides).transpose()?;
    let command = match (&flags, file.command) {
        (Some((a, _)), Some(b)) if *a != b => {
            return Err(CliError::Config(format!(
                "subcommand {} conflicts with command {} in the configuration file",
                a.as_str(),
                b.as_str()
            )))
        }
        (Some((a, _)), _) => *a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(CliError::Config(
                "no command: give a subcommand or a configuration file with `command`".into(),
            ))
        }
    };
    let mut parameters = file.parameters;
    if let Some((_, params)) = flags {
        parameters.extend(params);
    }
    Ok(ExperimentConfig {
        command,
        parameters,
        seed: cli.seed.or(file.seed).unwrap_or(0),
        output_dir: cli.output_dir.clone().or(file.output_dir).unwrap_or_else(default_output_dir),
        budget: cli.budget.or(file.budget),
    })
}

/// Thread count from [`THREADS_ENV`], if set.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{THREADS_ENV}: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("dichotomy").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_become_parameters() {
        let cli = parse(&["invariant", "--kind", "psi", "--host", "ultrametric-host:depth=4", "--n-list", "2,4,8", "--seed", "5"]);
        let cfg = resolve(&cli).unwrap();
        assert_eq!(cfg.command, CommandKind::Invariant);
        assert_eq!(cfg.seed, 5);
        assert_eq!(
            Value::Object(cfg.parameters),
            serde_json::json!({"kind": "psi", "host": "ultrametric-host:depth=4", "n-list": [2, 4, 8]})
        );
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"command": "invariant", "seed": 3, "budget": 10,
                "parameters": {"kind": "psi", "host": "path:n=3", "n-list": [2]}}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let cfg = resolve(&parse(&["--config", p, "invariant", "--n-list", "4,5"])).unwrap();
        assert_eq!(cfg.parameters["n-list"], serde_json::json!([4, 5]));
        assert_eq!(cfg.parameters["host"], serde_json::json!("path:n=3"));
        assert_eq!((cfg.seed, cfg.budget), (3, Some(10)));

        let cfg = resolve(&parse(&["--config", p, "--seed", "9"])).unwrap();
        assert_eq!((cfg.command, cfg.seed), (CommandKind::Invariant, 9));

        assert!(resolve(&parse(&["--config", p, "gen"])).is_err());
    }

    #[test]
    fn missing_command_is_a_config_error() {
        let err = resolve(&parse(&[])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
