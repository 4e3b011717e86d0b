//! The decay exponent implied by one value of a sub-multiplicative functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n0^(-beta) = eta`: a functional value `eta < 1` at `n0` gives, by
/// sub-multiplicativity, `Psi_{n0^k} <= (n0^k)^(-beta)` and so
/// `c_H(P_{n0^k}) >= (n0^k)^beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyFit {
    pub n0: u64,
    pub eta: f64,
    pub beta: f64,
}

impl DichotomyFit {
    /// The implied lower bound `N^beta` on the distortion of `P_N`.
    pub fn implied_path_distortion(&self, size: u64) -> f64 {
        (size as f64).powf(self.beta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum FitOutcome {
    Decay(DichotomyFit),
    /// `eta >= 1`: the functional does not decay, no exponent follows.
    NoDecay { n0: u64, eta: f64 },
}

pub fn fit_beta(n0: u64, eta: f64) -> Result<FitOutcome> {
    if n0 < 2 {
        return Err(Error::Parameter(format!("n0 must be at least 2, got {n0}")));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Parameter(format!("eta must be positive and finite, got {eta}")));
    }
    if eta >= 1.0 {
        return Ok(FitOutcome::NoDecay { n0, eta });
    }
    let beta = -eta.ln() / (n0 as f64).ln();
    Ok(FitOutcome::Decay(DichotomyFit { n0, eta, beta }))
}
