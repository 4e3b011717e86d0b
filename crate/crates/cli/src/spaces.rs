//! Space descriptions accepted by the runner.
//!
//! A space is written either as an object (`{"kind": "path", "n": 4}`) or
//! as a string `kind:key=value,...` (`path:n=4`, `heta:depth=4,eta=0.5`,
//! `file:path=space.txt`). Both forms normalize to the string form, which is
//! what manifests and result tables record.

use std::fmt;
use std::path::PathBuf;

use dichotomy_core::generators::{FamilyKind, FamilySpec};
use dichotomy_core::metric::index_labels;
use dichotomy_core::trees::HEtaHost;
use dichotomy_core::FiniteMetricSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::table::fmt_float;

/// Largest random space.
pub const MAX_RANDOM_POINTS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Family(FamilyKind),
    /// The contracted tree host `H_eta` (needs `depth`, `eta`).
    HEta,
    /// Shortest-path metric of uniform random edge weights (needs `n`;
    /// `seed` defaults to the run seed).
    Random,
    /// A space in the interchange text format (needs `path`).
    File,
}

impl SpaceKind {
    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "heta" => Ok(SpaceKind::HEta),
            "random" => Ok(SpaceKind::Random),
            "file" => Ok(SpaceKind::File),
            _ => serde_json::from_value(serde_json::Value::String(s.to_string()))
                .map(SpaceKind::Family)
                .map_err(|_| CliError::Config(format!("unknown space kind {s:?}"))),
        }
    }

    fn name(self) -> String {
        match self {
            SpaceKind::Family(k) => serde_json::to_value(k)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .expect("family kinds serialize to strings"),
            SpaceKind::HEta => "heta".into(),
            SpaceKind::Random => "random".into(),
            SpaceKind::File => "file".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "String")]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub depth: Option<u32>,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpaceRepr {
    Text(String),
    Object(SpaceObject),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceObject {
    kind: String,
    n: Option<u32>,
    m: Option<u32>,
    depth: Option<u32>,
    alpha: Option<f64>,
    eta: Option<f64>,
    seed: Option<u64>,
    path: Option<PathBuf>,
}

impl TryFrom<SpaceRepr> for SpaceSpec {
    type Error = CliError;

    fn try_from(r: SpaceRepr) -> CliResult<Self> {
        match r {
            SpaceRepr::Text(s) => s.parse(),
            SpaceRepr::Object(o) => Ok(SpaceSpec {
                kind: SpaceKind::parse(&o.kind)?,
                n: o.n,
                m: o.m,
                depth: o.depth,
                alpha: o.alpha,
                eta: o.eta,
                seed: o.seed,
                path: o.path,
            }),
        }
    }
}

impl From<SpaceSpec> for String {
    fn from(s: SpaceSpec) -> String {
        s.to_string()
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(v) = self.n {
            parts.push(format!("n={v}"));
        }
        if let Some(v) = self.m {
            parts.push(format!("m={v}"));
        }
        if let Some(v) = self.depth {
            parts.push(format!("depth={v}"));
        }
        if let Some(v) = self.alpha {
            parts.push(format!("alpha={}", fmt_float(v)));
        }
        if let Some(v) = self.eta {
            parts.push(format!("eta={}", fmt_float(v)));
        }
        if let Some(v) = self.seed {
            parts.push(format!("seed={v}"));
        }
        if let Some(p) = &self.path {
            parts.push(format!("path={}", p.display()));
        }
        if parts.is_empty() {
            write!(f, "{}", self.kind.name())
        } else {
            write!(f, "{}:{}", self.kind.name(), parts.join(","))
        }
    }
}

impl std::str::FromStr for SpaceSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut spec = SpaceSpec::new(SpaceKind::parse(kind.trim())?);
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("expected key=value in space {s:?}, got {part:?}")))?;
            let bad = |e: &dyn fmt::Display| CliError::Config(format!("bad value for `{key}` in space {s:?}: {e}"));
            match key.trim() {
                "n" => spec.n = Some(value.parse().map_err(|e| bad(&e))?),
                "m" => spec.m = Some(value.parse().map_err(|e| bad(&e))?),
                "depth" => spec.depth = Some(value.parse().map_err(|e| bad(&e))?),
                "alpha" => spec.alpha = Some(value.parse().map_err(|e| bad(&e))?),
                "eta" => spec.eta = Some(value.parse().map_err(|e| bad(&e))?),
                "seed" => spec.seed = Some(value.parse().map_err(|e| bad(&e))?),
                "path" => spec.path = Some(PathBuf::from(value)),
                other => return Err(CliError::Config(format!("unknown key `{other}` in space {s:?}"))),
            }
        }
        Ok(spec)
    }
}

/// A built space, with the tree structure kept for `H_eta` hosts.
#[derive(Clone, Debug)]
pub struct BuiltSpace {
    pub space: FiniteMetricSpace,
    pub heta: Option<HEtaHost>,
}

impl SpaceSpec {
    pub fn new(kind: SpaceKind) -> Self {
        Self {
            kind,
            n: None,
            m: None,
            depth: None,
            alpha: None,
            eta: None,
            seed: None,
            path: None,
        }
    }

    pub fn with_n(&self, n: u32) -> Self {
        Self {
            n: Some(n),
            ..self.clone()
        }
    }

    fn need<T: Copy>(&self, v: Option<T>, key: &str) -> CliResult<T> {
        v.ok_or_else(|| CliError::Config(format!("space {self} needs `{key}`")))
    }

    /// Builds the space; `run_seed` seeds random spaces without a `seed`.
    pub fn build(&self, run_seed: u64) -> CliResult<BuiltSpace> {
        let plain = |space| BuiltSpace { space, heta: None };
        match self.kind {
            SpaceKind::Family(kind) => {
                let spec = FamilySpec {
                    kind,
                    n: self.n,
                    m: self.m,
                    depth: self.depth,
                    alpha: self.alpha,
                };
                Ok(plain(spec.build()?))
            }
            SpaceKind::HEta => {
                let host = HEtaHost::new(self.need(self.depth, "depth")?, self.need(self.eta, "eta")?)?;
                Ok(BuiltSpace {
                    space: host.space().clone(),
                    heta: Some(host),
                })
            }
            SpaceKind::Random => {
                let n = self.need(self.n, "n")?;
                Ok(plain(random_metric(n, self.seed.unwrap_or(run_seed))?))
            }
            SpaceKind::File => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| CliError::Config(format!("space {self} needs `path`")))?;
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                Ok(plain(FiniteMetricSpace::from_text(&text)?))
            }
        }
    }
}

/// Shortest-path metric of the complete graph on `n` points with edge
/// weights drawn uniformly from `[0.1, 1)`.
pub fn random_metric(n: u32, seed: u64) -> CliResult<FiniteMetricSpace> {
    if !(1..=MAX_RANDOM_POINTS).contains(&n) {
        return Err(CliError::Config(format!(
            "random spaces need 1 to {MAX_RANDOM_POINTS} points, got {n}"
        )));
    }
    let size = n as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0.0_f64; size]; size];
    for i in 0..size {
        for j in (i + 1)..size {
            let w = rng.gen_range(0.1..1.0);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..size {
        for i in 0..size {
            for j in 0..size {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    Ok(FiniteMetricSpace::new(index_labels(size), d)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_and_object_forms_agree() {
        let a: SpaceSpec = serde_json::from_str(r#""ultrametric-host:depth=4""#).unwrap();
        let b: SpaceSpec = serde_json::from_str(r#"{"kind": "ultrametric-host", "depth": 4}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#""ultrametric-host:depth=4""#);
        assert_eq!(a.build(0).unwrap().space.len(), 16);
    }

    #[test]
    fn display_round_trips() {
        for s in ["path:n=4", "heta:depth=3,eta=0.25", "random:n=5,seed=9", "snowflake-line:n=8,alpha=0.5"] {
            let spec: SpaceSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!("moon:n=3".parse::<SpaceSpec>().is_err());
        assert!("path:n".parse::<SpaceSpec>().is_err());
        assert!("path:k=3".parse::<SpaceSpec>().is_err());
        assert!(serde_json::from_str::<SpaceSpec>(r#"{"kind": "path", "size": 3}"#).is_err());
        assert!("path".parse::<SpaceSpec>().unwrap().build(0).is_err());
    }

    #[test]
    fn random_spaces_follow_the_seed() {
        let a = random_metric(6, 3).unwrap();
        assert_eq!(a, random_metric(6, 3).unwrap());
        assert_ne!(a, random_metric(6, 4).unwrap());
        let spec: SpaceSpec = "random:n=6".parse().unwrap();
        assert_eq!(spec.build(3).unwrap().space, a);
    }
}
