//! Finite metric spaces, exact and certified embedding distortion, and the
//! path, cube and grid functionals that decide whether a host space admits
//! almost-isometric copies of these families.
//!
//! The crate is organized by topic:
//!
//! * [`metric`] — metric spaces, maps, Lipschitz norms and distortion;
//! * [`exact`] — minimum distortion into a finite host by branch-and-bound;
//! * [`generators`] — paths, cubes, grids, trees and the tightness hosts;
//! * [`invariants`] — the functionals `Psi_n`, `T_n`, `Gamma_n`, the
//!   equal-norm type/cotype ratios and exponent fitting;
//! * [`euclid`] — certified bounds on Euclidean distortion;
//! * [`trees`] — the contracted tree host `H_eta`, forks and faithful maps.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values, and
// index loops over distance matrices read more naturally than iterators.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod euclid;
pub mod exact;
pub mod generators;
pub mod invariants;
pub mod metric;
pub mod trees;

pub use error::{Error, Result};
pub use exact::{min_distortion_exact, Certificate, DistortionReport, Witness};
pub use metric::{
    distortion, inverse_lipschitz_norm, lipschitz_norm, snowflake, validate_metric, Embedding,
    FiniteMetricSpace, AXIOM_TOL, SEARCH_TOL,
};

/// Version of this library, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
