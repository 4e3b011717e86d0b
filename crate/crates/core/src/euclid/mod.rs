//! Certified bounds on the least distortion of a finite metric into
//! Euclidean space, and Poincaré-type functional lower bounds.

mod poincare;
mod sdp;

pub use poincare::{cube_diagonal_pairs, poincare_lower_bound, WeightedPair};
pub use sdp::{
    certified_dual_bound, coordinates_of_gram, euclidean_space, min_distortion_l2, GramCertificate, L2Options,
    L2Solution, witness_distortion, MAX_L2_POINTS,
};
