//! Experiment runner for `dichotomy-core`.
//!
//! A run takes an [`ExperimentConfig`], computes the command's result table
//! and writes to the output directory:
//!
//! * `<command>.csv` — rows in canonical order, floats with 12 significant
//!   digits, so identical inputs give byte-identical files whatever the
//!   thread count;
//! * `manifest.json` — canonical parameters, seed, budget, a SHA-256 digest
//!   of those inputs, versions (including the fork predicate table), the
//!   command's summary and a SHA-256 of every artifact;
//! * optional SVG plots and auxiliary files.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod spaces;
pub mod table;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{json, Value};

pub use commands::{compute, Artifacts};
pub use config::{resolve, Cli, CommandKind, ExperimentConfig, THREADS_ENV};
pub use error::{CliError, CliResult};
pub use table::{fmt_float, Table};

/// Name of the manifest file in the output directory.
pub const MANIFEST: &str = "manifest.json";

/// Files written by [`run`].
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub files: Vec<PathBuf>,
    pub artifacts: Artifacts,
}

/// Canonical inputs of a run: everything that determines its results.
pub fn canonical_inputs(cfg: &ExperimentConfig, parameters: &Value) -> Value {
    json!({
        "command": cfg.command.as_str(),
        "parameters": parameters,
        "seed": cfg.seed,
        "budget": cfg.budget,
    })
}

/// The manifest for computed artifacts; `files` maps artifact names to
/// their contents.
pub fn manifest(cfg: &ExperimentConfig, a: &Artifacts, files: &BTreeMap<String, String>) -> Value {
    let inputs = canonical_inputs(cfg, &a.parameters);
    let digest = table::sha256_hex(inputs.to_string().as_bytes());
    let hashes: BTreeMap<&String, String> =
        files.iter().map(|(name, body)| (name, table::sha256_hex(body.as_bytes()))).collect();
    json!({
        "tool": "dichotomy",
        "version": env!("CARGO_PKG_VERSION"),
        "core-version": dichotomy_core::VERSION,
        "fork-predicate-version": dichotomy_core::trees::FORK_PREDICATE_VERSION,
        "command": cfg.command.as_str(),
        "parameters": a.parameters,
        "seed": cfg.seed,
        "budget": cfg.budget,
        "inputs-digest": digest,
        "results": a.results,
        "artifacts": hashes,
    })
}

/// Computes the run and writes its artifacts.
pub fn run(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    let a = compute(cfg)?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_name = format!("{}.csv", cfg.command.as_str());
    let mut files: BTreeMap<String, String> = a.files.iter().cloned().collect();
    files.insert(csv_name.clone(), a.table.to_csv());
    let mut written = Vec::new();
    for (name, body) in &files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        if *name != csv_name {
            written.push(path);
        }
    }
    let manifest_path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest(cfg, &a, &files))? + "\n";
    std::fs::write(&manifest_path, text).map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(RunOutput {
        csv: dir.join(csv_name),
        manifest: manifest_path,
        files: written,
        artifacts: a,
    })
}
