//! The computation behind each subcommand.

use std::collections::BTreeMap;

use dichotomy_core::euclid::{min_distortion_l2, L2Options};
use dichotomy_core::generators::{binary_tree, FamilyKind};
use dichotomy_core::invariants::{
    fit_beta, gamma_constant, gamma_ratio_of_map, metric_en_cotype_constant, metric_en_cotype_ratio,
    psi_constant, psi_of_walk, type_constant, type_ratio_of_map, FitOutcome, InvariantKind,
    InvariantValue,
};
use dichotomy_core::trees::{
    classify_fork_heta, find_delta_forks, fork_tip_contraction, identity_distortion_heta,
    search_b4_nonembed, vertical_faithfulness, B4SearchOptions, ForkType, HEtaHost,
};
use dichotomy_core::{distortion, min_distortion_exact, Embedding, FiniteMetricSpace};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{CommandKind, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::plot::{loglog_fit, loglog_svg, Series};
use crate::spaces::{SpaceKind, SpaceSpec};
use crate::table::{join_indices, round12, witness_hash, Cell, Table};

/// Default node budget of exhaustive distortion searches.
pub const DEFAULT_SEARCH_BUDGET: u64 = 100_000_000;
/// Default number of map evaluations for the map functionals.
pub const DEFAULT_MAP_BUDGET: u64 = 10_000_000;
/// Default solver iteration cap for Euclidean distortion.
pub const DEFAULT_L2_ITERATIONS: u64 = 100_000;
/// Default node budget of the faithful tree search.
pub const DEFAULT_B4_BUDGET: u64 = 2_000_000_000;

/// Everything a run produces before it is written to disk.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub command: CommandKind,
    /// Typed parameters re-serialized in canonical form.
    pub parameters: Value,
    /// Main result table, written as `<command>.csv`.
    pub table: Table,
    /// Command-specific summary for the manifest.
    pub results: Value,
    /// Further files `(name, contents)`.
    pub files: Vec<(String, String)>,
}

/// JSON number rounded to 12 significant digits; non-finite values become
/// the strings `inf`, `-inf` or `nan`.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(round12(v))
    } else {
        json!(crate::table::fmt_float(v))
    }
}

fn params<T: DeserializeOwned + Serialize>(cfg: &ExperimentConfig) -> CliResult<(T, Value)> {
    let p: T = serde_json::from_value(Value::Object(cfg.parameters.clone())).map_err(|e| {
        CliError::Config(format!("parameters of `{}`: {e}", cfg.command.as_str()))
    })?;
    let canonical = serde_json::to_value(&p)?;
    Ok((p, canonical))
}

/// Runs the command of `cfg` without touching the filesystem (except to
/// read `file:` spaces).
pub fn compute(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    match cfg.command {
        CommandKind::Gen => gen(cfg),
        CommandKind::Distortion => distortion_cmd(cfg),
        CommandKind::L2Distortion => l2_distortion(cfg),
        CommandKind::Invariant => invariant(cfg),
        CommandKind::DichotomyFit => dichotomy_fit(cfg),
        CommandKind::Heta => heta(cfg),
        CommandKind::Forks => forks(cfg),
        CommandKind::B4Search => b4_search(cfg),
        CommandKind::Sweep => sweep(cfg),
    }
}

fn artifacts(cfg: &ExperimentConfig, parameters: Value, table: Table, results: Value) -> Artifacts {
    Artifacts {
        command: cfg.command,
        parameters,
        table,
        results,
        files: Vec::new(),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------- gen

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct GenParams {
    space: SpaceSpec,
}

fn gen(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (GenParams, _) = params(cfg)?;
    let x = p.space.build(cfg.seed)?.space;
    let mut table = Table::new(&["space", "points", "diameter", "min-distance", "digest"], &[]);
    table.push(vec![
        p.space.to_string().into(),
        x.len().into(),
        x.diameter().into(),
        x.min_distance().into(),
        x.digest().into(),
    ]);
    let results = json!({"points": x.len(), "digest": x.digest(), "file": "space.txt"});
    let mut a = artifacts(cfg, canonical, table, results);
    a.files.push(("space.txt".into(), x.to_text()));
    Ok(a)
}

// ---------------------------------------------------------------- distortion

/// Bounds on `c_H(X)` for one (domain, host) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CellBounds {
    pub lower: f64,
    pub upper: f64,
    pub certificate: &'static str,
    pub work: u64,
    pub witness: Option<Vec<usize>>,
}

/// Exhaustive search within `budget`; when it stops early and the domain is
/// the path `P_n`, the lower bound is raised to `1 / Psi_n(H)` if larger.
/// The witness is re-checked, and so is `1 / Psi_n(H) <= c_H(P_n)` when the
/// search is exact.
pub fn bracket_distortion(
    domain_spec: &SpaceSpec,
    x: &FiniteMetricSpace,
    h: &FiniteMetricSpace,
    budget: u64,
) -> CliResult<CellBounds> {
    let report = min_distortion_exact(x, h, budget)?;
    let functional = match (domain_spec.kind, domain_spec.n) {
        (SpaceKind::Family(FamilyKind::Path), Some(n)) => {
            let psi = psi_constant(h, n)?.value;
            (psi > 0.0).then(|| 1.0 / psi)
        }
        _ => None,
    };
    let witness = report.assignment().map(<[usize]>::to_vec);
    if let Some(w) = &witness {
        let d = distortion(&Embedding::new(x, h, w)?)?;
        if !close(d, report.upper, 1e-9) {
            return Err(CliError::Invariant(format!(
                "witness has distortion {d} but the search reported {}",
                report.upper
            )));
        }
    }
    let mut bounds = CellBounds {
        lower: report.lower,
        upper: report.upper,
        certificate: report.certificate.as_str(),
        work: report.work,
        witness,
    };
    if let Some(f) = functional {
        if report.is_exact() {
            if f > report.upper * (1.0 + 1e-9) + 1e-6 {
                return Err(CliError::Invariant(format!(
                    "1/psi = {f} exceeds the exact distortion {}",
                    report.upper
                )));
            }
        } else if f > bounds.lower {
            bounds.lower = f.min(bounds.upper);
            bounds.certificate = "functional";
        }
    }
    Ok(bounds)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct DistortionParams {
    domain: SpaceSpec,
    host: SpaceSpec,
}

fn distortion_cmd(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (DistortionParams, _) = params(cfg)?;
    let x = p.domain.build(cfg.seed)?.space;
    let h = p.host.build(cfg.seed)?.space;
    let b = bracket_distortion(&p.domain, &x, &h, cfg.budget.unwrap_or(DEFAULT_SEARCH_BUDGET))?;
    let Some(w) = &b.witness else {
        return Err(CliError::Budget(format!(
            "no injection found within {} nodes (lower bound {})",
            b.work, b.lower
        )));
    };
    let mut table = Table::new(
        &[
            "domain", "host", "points", "lower", "upper", "certificate", "work", "witness-hash", "witness",
            "domain-digest", "host-digest",
        ],
        &[],
    );
    let wh = witness_hash(&h.digest(), w);
    table.push(vec![
        p.domain.to_string().into(),
        p.host.to_string().into(),
        x.len().into(),
        b.lower.into(),
        b.upper.into(),
        b.certificate.into(),
        b.work.into(),
        wh.clone().into(),
        join_indices(w).into(),
        x.digest().into(),
        h.digest().into(),
    ]);
    let results = json!({
        "lower": num(b.lower),
        "upper": num(b.upper),
        "certificate": b.certificate,
        "witness-hash": wh,
    });
    Ok(artifacts(cfg, canonical, table, results))
}

// ---------------------------------------------------------------- l2-distortion

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct L2Params {
    space: SpaceSpec,
    #[serde(default = "default_l2_tol")]
    tol: f64,
}

fn default_l2_tol() -> f64 {
    L2Options::default().tol
}

fn l2_distortion(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (L2Params, _) = params(cfg)?;
    if !(p.tol > 0.0) {
        return Err(CliError::Config(format!("tol must be positive, got {}", p.tol)));
    }
    let x = p.space.build(cfg.seed)?.space;
    let opts = L2Options {
        tol: p.tol,
        max_iterations: cfg.budget.unwrap_or(DEFAULT_L2_ITERATIONS),
        ..L2Options::default()
    };
    let sol = min_distortion_l2(&x, opts)?;
    let (lower, upper) = (sol.report.lower, sol.report.upper);
    if lower > upper * (1.0 + 1e-9) || !sol.gram.verify(&x, 1e-6) {
        return Err(CliError::Invariant(format!(
            "inconsistent Euclidean bracket [{lower}, {upper}]"
        )));
    }
    let mut table = Table::new(
        &["space", "points", "lower", "upper", "converged", "iterations", "digest"],
        &[],
    );
    table.push(vec![
        p.space.to_string().into(),
        x.len().into(),
        lower.into(),
        upper.into(),
        sol.converged.into(),
        sol.iterations.into(),
        x.digest().into(),
    ]);
    let mut coords = Table::new(&["point", "label", "coordinates"], &[]);
    for (i, c) in sol.gram.coordinates().iter().enumerate() {
        let text: Vec<String> = c.iter().map(|v| crate::table::fmt_float(*v)).collect();
        coords.push(vec![i.into(), x.label(i).into(), text.join(" ").into()]);
    }
    let results = json!({
        "lower": num(lower),
        "upper": num(upper),
        "converged": sol.converged,
        "iterations": sol.iterations,
    });
    let mut a = artifacts(cfg, canonical, table, results);
    a.files.push(("coordinates.csv".into(), coords.to_csv()));
    Ok(a)
}

// ---------------------------------------------------------------- invariant

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct InvariantParams {
    kind: InvariantKind,
    host: SpaceSpec,
    n_list: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default)]
    plot: bool,
}

/// Evaluates one functional and re-checks its witness map.
pub fn evaluate_invariant(
    h: &FiniteMetricSpace,
    kind: InvariantKind,
    n: u32,
    m: Option<u32>,
    q: f64,
    budget: u64,
) -> CliResult<InvariantValue> {
    let need_m = || m.ok_or_else(|| CliError::Config(format!("{} needs `m`", kind.as_str())));
    let v = match kind {
        InvariantKind::Psi => psi_constant(h, n)?,
        InvariantKind::Type => type_constant(h, n, budget)?,
        InvariantKind::Gamma => gamma_constant(h, n, need_m()?, budget)?,
        InvariantKind::MetricEnCotype => metric_en_cotype_constant(h, n, need_m()?, q, budget)?,
    };
    let recomputed = match kind {
        InvariantKind::Psi => Some(psi_of_walk(h, &v.witness)?),
        InvariantKind::Type => type_ratio_of_map(h, n, &v.witness)?,
        InvariantKind::Gamma => gamma_ratio_of_map(h, n, need_m()?, &v.witness)?,
        InvariantKind::MetricEnCotype => metric_en_cotype_ratio(&v.witness, h, n, need_m()?, q)?.finite(),
    };
    // every map with a vanishing denominator is skipped, so a witness
    // always has a finite ratio unless all maps are degenerate (value 0)
    let matches = match recomputed {
        Some(r) => close(r, v.value, 1e-9),
        None => v.value == 0.0,
    };
    if !matches {
        return Err(CliError::Invariant(format!(
            "{} witness at n = {n} evaluates to {recomputed:?}, not {}",
            kind.as_str(),
            v.value
        )));
    }
    let ceiling = match kind {
        InvariantKind::Psi => Some(1.0 + 1e-12),
        InvariantKind::Type => Some(1.0 + 1e-9),
        _ => None,
    };
    if let Some(c) = ceiling {
        if v.value > c {
            return Err(CliError::Invariant(format!(
                "{} at n = {n} is {} > 1",
                kind.as_str(),
                v.value
            )));
        }
    }
    Ok(v)
}

fn invariant(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (InvariantParams, _) = params(cfg)?;
    let h = p.host.build(cfg.seed)?.space;
    let budget = cfg.budget.unwrap_or(DEFAULT_MAP_BUDGET);
    let q = p.q.unwrap_or(2.0);
    let hd = h.digest();
    let mut table = Table::new(
        &["kind", "n", "m", "value", "upper", "exact", "witness-hash", "witness", "host", "host-digest"],
        &["kind", "n", "m"],
    );
    let mut series = Vec::new();
    for &n in &p.n_list {
        let v = evaluate_invariant(&h, p.kind, n, p.m, q, budget)?;
        table.push(vec![
            p.kind.as_str().into(),
            n.into(),
            v.m.into(),
            v.value.into(),
            v.upper.into(),
            v.exact.into(),
            witness_hash(&hd, &v.witness).into(),
            join_indices(&v.witness).into(),
            p.host.to_string().into(),
            hd.clone().into(),
        ]);
        series.push((f64::from(n), v.value));
    }
    series.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values: Vec<Value> = series.iter().map(|&(n, v)| json!({"n": n as u32, "value": num(v)})).collect();
    let mut results = json!({"values": values, "host-digest": hd});
    if let Some((slope, _)) = loglog_fit(&series) {
        results["loglog-slope"] = num(slope);
    }
    let mut a = artifacts(cfg, canonical, table, results);
    if p.plot {
        let title = format!("{} on {}", p.kind.as_str(), p.host);
        let s = Series {
            name: p.kind.as_str().into(),
            points: series,
        };
        a.files.push(("invariant.svg".into(), loglog_svg(&title, "n", "value", &[s])));
    }
    Ok(a)
}

// ---------------------------------------------------------------- dichotomy-fit

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FitParams {
    n0: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    host: Option<SpaceSpec>,
}

fn dichotomy_fit(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (FitParams, _) = params(cfg)?;
    let eta = match (p.eta, &p.host) {
        (Some(eta), None) => eta,
        (None, Some(host)) => {
            let n0 = u32::try_from(p.n0).map_err(|_| CliError::Config(format!("n0 = {} is too large", p.n0)))?;
            psi_constant(&host.build(cfg.seed)?.space, n0)?.value
        }
        _ => return Err(CliError::Config("give exactly one of `eta` and `host`".into())),
    };
    let outcome = fit_beta(p.n0, eta)?;
    let mut table = Table::new(&["n0", "eta", "outcome", "beta"], &[]);
    let results = match outcome {
        FitOutcome::Decay(f) => {
            table.push(vec![f.n0.into(), f.eta.into(), "decay".into(), f.beta.into()]);
            json!({"outcome": "decay", "n0": f.n0, "eta": num(f.eta), "beta": num(f.beta)})
        }
        FitOutcome::NoDecay { n0, eta } => {
            table.push(vec![n0.into(), eta.into(), "no-decay".into(), Cell::Empty]);
            json!({"outcome": "no-decay", "n0": n0, "eta": num(eta), "beta": null})
        }
    };
    Ok(artifacts(cfg, canonical, table, results))
}

// ---------------------------------------------------------------- heta

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct HetaParams {
    depths: Vec<u32>,
    etas: Vec<f64>,
}

fn heta(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (HetaParams, _) = params(cfg)?;
    let cells: Vec<(u32, f64)> = p
        .depths
        .iter()
        .flat_map(|&d| p.etas.iter().map(move |&e| (d, e)))
        .collect();
    let rows: Vec<CliResult<Vec<Cell>>> = cells
        .par_iter()
        .map(|&(depth, eta)| {
            let host = HEtaHost::new(depth, eta)?;
            let id = if depth >= 1 {
                Some(identity_distortion_heta(depth, eta)?)
            } else {
                None
            };
            if let Some(id) = id.filter(|&id| !close(id, 1.0 / eta, 1e-9)) {
                return Err(CliError::Invariant(format!(
                    "identity distortion of H_eta(D = {depth}, eta = {eta}) is {id}, not 1/eta"
                )));
            }
            Ok(vec![
                depth.into(),
                eta.into(),
                host.space().len().into(),
                id.into(),
                host.space().digest().into(),
            ])
        })
        .collect();
    let mut table = Table::new(&["depth", "eta", "points", "identity-distortion", "digest"], &["depth", "eta"]);
    for r in rows {
        table.push(r?);
    }
    let results = json!({"cells": table.len()});
    Ok(artifacts(cfg, canonical, table, results))
}

// ---------------------------------------------------------------- forks

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ForksParams {
    space: SpaceSpec,
    delta: f64,
    #[serde(default = "yes")]
    distinct_prongs: bool,
}

fn yes() -> bool {
    true
}

fn forks(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (ForksParams, _) = params(cfg)?;
    let built = p.space.build(cfg.seed)?;
    let space = &built.space;
    let found = find_delta_forks(space, p.delta, p.distinct_prongs)?;
    let mut table = Table::new(
        &["x", "y", "z", "w", "delta", "type", "tip-contraction"],
        &["x", "y", "z", "w"],
    );
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut max_contracting_tip: Option<f64> = None;
    for f in &found {
        let kind = match &built.heta {
            Some(host) if f.kind != ForkType::Degenerate => classify_fork_heta(f, host, p.delta)?,
            _ => f.kind,
        };
        let tip = fork_tip_contraction(f, space);
        if kind.is_contracting() {
            max_contracting_tip = Some(max_contracting_tip.map_or(tip, |m: f64| m.max(tip)));
        }
        *counts.entry(kind.as_str()).or_default() += 1;
        table.push(vec![
            space.label(f.x).into(),
            space.label(f.y).into(),
            space.label(f.z).into(),
            space.label(f.w).into(),
            p.delta.into(),
            kind.as_str().into(),
            tip.into(),
        ]);
    }
    let unclassified = counts.get(ForkType::Unclassified.as_str()).copied().unwrap_or(0);
    let fraction = if found.is_empty() {
        0.0
    } else {
        unclassified as f64 / found.len() as f64
    };
    let results = json!({
        "forks": found.len(),
        "counts": counts,
        "classified": built.heta.is_some(),
        "unclassified-fraction": num(fraction),
        "max-contracting-tip-contraction": max_contracting_tip.map(num),
    });
    Ok(artifacts(cfg, canonical, table, results))
}

// ---------------------------------------------------------------- b4-search

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct B4Params {
    depth: u32,
    eta: f64,
    #[serde(default = "default_b4_delta")]
    delta: f64,
    #[serde(default = "default_domain_depth")]
    domain_depth: u32,
}

fn default_b4_delta() -> f64 {
    B4SearchOptions::default().delta
}

fn default_domain_depth() -> u32 {
    B4SearchOptions::default().domain_depth
}

fn b4_search(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (B4Params, _) = params(cfg)?;
    let host = HEtaHost::new(p.depth, p.eta)?;
    let opts = B4SearchOptions {
        domain_depth: p.domain_depth,
        delta: p.delta,
        budget: cfg.budget.unwrap_or(DEFAULT_B4_BUDGET),
    };
    let r = search_b4_nonembed(&host, opts)?;
    if r.witness.is_none() && !r.complete {
        return Err(CliError::Budget(format!(
            "no faithful map found in {} nodes ({} of the search explored)",
            r.nodes, r.explored_fraction
        )));
    }
    let hd = host.space().digest();
    let wh = r.witness.as_ref().map(|w| witness_hash(&hd, w));
    if let Some(w) = &r.witness {
        let tree = binary_tree(p.domain_depth)?;
        let e = Embedding::new(&tree, host.space(), w)?;
        let d = distortion(&e)?;
        if !close(d, r.min_distortion, 1e-9) || !vertical_faithfulness(&e)?.within(1.0 + p.delta) {
            return Err(CliError::Invariant(format!(
                "search witness has distortion {d} (reported {}) or is not faithful",
                r.min_distortion
            )));
        }
    }
    let mut table = Table::new(
        &[
            "host-depth", "eta", "delta", "domain-depth", "min-distortion", "lower-bound", "explored-fraction",
            "complete", "nodes", "witness-hash", "witness",
        ],
        &[],
    );
    table.push(vec![
        r.host_depth.into(),
        r.eta.into(),
        r.delta.into(),
        r.domain_depth.into(),
        r.min_distortion.into(),
        r.lower_bound.into(),
        r.explored_fraction.into(),
        r.complete.into(),
        r.nodes.into(),
        wh.clone().into(),
        r.witness.as_deref().map(join_indices).into(),
    ]);
    let census: Map<String, Value> = r.census.iter().map(|(k, v)| (k.as_str().to_string(), json!(v))).collect();
    let results = json!({
        "min-distortion": num(r.min_distortion),
        "lower-bound": num(r.lower_bound),
        "explored-fraction": num(r.explored_fraction),
        "complete": r.complete,
        "nodes": r.nodes,
        "witness-hash": wh,
        "census": census,
    });
    Ok(artifacts(cfg, canonical, table, results))
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SweepParams {
    #[serde(default)]
    families: Vec<SpaceSpec>,
    #[serde(default)]
    hosts: Vec<SpaceSpec>,
    #[serde(default)]
    n_list: Vec<u32>,
    #[serde(default)]
    plot: bool,
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "host", "family", "n", "points", "lower", "upper", "certificate", "work", "witness-hash", "witness", "d-n",
    "status",
];

fn sweep_cell(host: &SpaceSpec, family: &SpaceSpec, n: u32, seed: u64, budget: u64) -> Vec<Cell> {
    let domain = family.with_n(n);
    let mut row = vec![
        host.to_string().into(),
        family.to_string().into(),
        n.into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
    ];
    let outcome = (|| -> CliResult<(usize, String, CellBounds)> {
        let x = domain.build(seed)?.space;
        let h = host.build(seed)?.space;
        Ok((x.len(), h.digest(), bracket_distortion(&domain, &x, &h, budget)?))
    })();
    match outcome {
        Ok((points, hd, b)) => {
            row[3] = points.into();
            row[4] = b.lower.into();
            row[5] = b.upper.into();
            row[6] = b.certificate.into();
            row[7] = b.work.into();
            row[8] = b.witness.as_ref().map(|w| witness_hash(&hd, w)).into();
            row[9] = b.witness.as_deref().map(join_indices).into();
            row[11] = if b.witness.is_some() { "ok" } else { "budget-exhausted" }.into();
        }
        Err(e) => {
            if let Ok(x) = domain.build(seed) {
                row[3] = x.space.len().into();
            }
            row[11] = format!("error (exit {}): {e}", e.exit_code()).into();
        }
    }
    row
}

fn sweep(cfg: &ExperimentConfig) -> CliResult<Artifacts> {
    let (p, canonical): (SweepParams, _) = params(cfg)?;
    let budget = cfg.budget.unwrap_or(DEFAULT_SEARCH_BUDGET);
    let mut cells = Vec::new();
    for host in &p.hosts {
        for family in &p.families {
            for &n in &p.n_list {
                cells.push((host, family, n));
            }
        }
    }
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .map(|&(host, family, n)| sweep_cell(host, family, n, cfg.seed, budget))
        .collect();
    let mut table = Table::new(&SWEEP_COLUMNS, &["host", "family", "points", "n"]);
    for r in rows {
        table.push(r);
    }
    table.sort();

    // running max of the lower bounds, by size, within each (host, family)
    let mut group: Option<(Cell, Cell)> = None;
    let mut running = f64::NEG_INFINITY;
    let mut series: Vec<Series> = Vec::new();
    let mut failures = 0usize;
    for row in table.rows_mut() {
        let key = (row[0].clone(), row[1].clone());
        if group.as_ref() != Some(&key) {
            running = f64::NEG_INFINITY;
            series.push(Series {
                name: format!("{} in {}", row[1].render(), row[0].render()),
                points: Vec::new(),
            });
            group = Some(key);
        }
        if let Cell::Float(lower) = row[4] {
            running = running.max(lower);
        } else {
            failures += 1;
        }
        if running.is_finite() {
            row[10] = running.into();
            if let Cell::Int(points) = row[3] {
                series.last_mut().expect("a series per group").points.push((points as f64, running));
            }
        }
    }
    let results = json!({"cells": table.len(), "failed-cells": failures});
    let mut a = artifacts(cfg, canonical, table, results);
    if p.plot {
        a.files.push(("sweep.svg".into(), loglog_svg("D_N lower bounds", "N", "D_N", &series)));
    }
    Ok(a)
}
