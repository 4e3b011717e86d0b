//! The dichotomy functionals of a host space: the path functional `Psi_n`,
//! the metric-type functional `T_n`, the grid functional `Gamma_n`, the
//! equal-norm type/cotype ratios of vector families, and exponent fitting.

mod fit;
mod linear;
mod maps;
mod psi;

pub use fit::{fit_beta, DichotomyFit, FitOutcome};
pub use linear::{en_cotype_ratio, en_type_ratio, Ratio, VectorFamily};
pub use maps::{
    gamma_constant, gamma_constant_with, gamma_ratio_of_map, metric_en_cotype_constant,
    metric_en_cotype_ratio, type_constant, type_ratio_of_map, GammaExponents, HEURISTIC_RESTARTS,
    HEURISTIC_SEED,
};
pub use psi::{psi_constant, psi_of_walk, psi_rigidity, PsiRigidity};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

/// Which functional an [`InvariantValue`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantKind {
    Psi,
    Type,
    Gamma,
    MetricEnCotype,
}

impl InvariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InvariantKind::Psi => "psi",
            InvariantKind::Type => "type",
            InvariantKind::Gamma => "gamma",
            InvariantKind::MetricEnCotype => "metric-en-cotype",
        }
    }
}

impl std::str::FromStr for InvariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi" => Ok(InvariantKind::Psi),
            "type" => Ok(InvariantKind::Type),
            "gamma" => Ok(InvariantKind::Gamma),
            "metric-en-cotype" => Ok(InvariantKind::MetricEnCotype),
            _ => Err(Error::Parse(format!("unknown invariant kind {s:?}"))),
        }
    }
}

/// The value of a functional on a host, with the map attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantValue {
    pub kind: InvariantKind,
    pub n: u32,
    pub m: Option<u32>,
    /// Exact value, or a lower bound attained by `witness` when not exact.
    pub value: f64,
    /// Upper bound known for the functional (`value` when exact).
    pub upper: f64,
    /// Host point index of each point of the relevant index set: the walk
    /// `0..=n` for psi, the cube `{0,1}^n` for type, `Z_m^n` otherwise
    /// (coordinates as base-`m` digits, first coordinate least significant).
    pub witness: Vec<usize>,
    pub exact: bool,
}

/// Outcome of comparing `value(mn)` with `value(m) * value(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmultiplicativityReport {
    pub kind: InvariantKind,
    pub m: u32,
    pub n: u32,
    pub value_m: f64,
    pub value_n: f64,
    pub value_mn: f64,
    /// `value_mn <= value_m * value_n + 1e-9`.
    pub holds: bool,
}

/// Evaluates `Psi` or `T` at `m`, `n` and `mn`; all three must be exact.
pub fn check_submultiplicativity(
    h: &FiniteMetricSpace,
    kind: InvariantKind,
    m: u32,
    n: u32,
    budget: u64,
) -> Result<SubmultiplicativityReport> {
    let mn = m
        .checked_mul(n)
        .ok_or_else(|| Error::Parameter("m * n overflows".into()))?;
    let eval = |k: u32| -> Result<f64> {
        let v = match kind {
            InvariantKind::Psi => psi_constant(h, k)?,
            InvariantKind::Type => type_constant(h, k, budget)?,
            _ => {
                return Err(Error::Parameter(format!(
                    "sub-multiplicativity is checked for psi and type, not {}",
                    kind.as_str()
                )))
            }
        };
        if !v.exact {
            return Err(Error::Budget(format!(
                "{} at n = {k} needs more than {budget} map evaluations",
                kind.as_str()
            )));
        }
        Ok(v.value)
    };
    let (value_m, value_n, value_mn) = (eval(m)?, eval(n)?, eval(mn)?);
    Ok(SubmultiplicativityReport {
        kind,
        m,
        n,
        value_m,
        value_n,
        value_mn,
        holds: value_mn <= value_m * value_n + 1e-9,
    })
}
