//! Lower bounds from a weighted comparison of two pair sets.

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

/// `(i, j, weight)`.
pub type WeightedPair = (usize, usize, f64);

fn weighted_sum(x: &FiniteMetricSpace, pairs: &[WeightedPair], what: &str) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Parameter(format!("{what} pair set is empty")));
    }
    let mut sum = 0.0;
    for &(i, j, w) in pairs {
        if i >= x.len() || j >= x.len() {
            return Err(Error::Parameter(format!("{what} pair ({i}, {j}) outside the space")));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::Parameter(format!("{what} weight {w} is not positive")));
        }
        sum += w * x.d(i, j).powi(2);
    }
    Ok(sum)
}

/// `sqrt(sum_num w d^2 / (modulus * sum_den w d^2))`.
///
/// When every map of the host satisfies
/// `sum_num w d(f i, f j)^2 <= modulus * sum_den w d(f i, f j)^2`, this is a
/// lower bound on the distortion of `x` into that host.
pub fn poincare_lower_bound(
    x: &FiniteMetricSpace,
    numerator: &[WeightedPair],
    denominator: &[WeightedPair],
    modulus: f64,
) -> Result<f64> {
    if !(modulus > 0.0) || !modulus.is_finite() {
        return Err(Error::Parameter(format!("modulus must be positive, got {modulus}")));
    }
    let num = weighted_sum(x, numerator, "numerator")?;
    let den = weighted_sum(x, denominator, "denominator")?;
    if den == 0.0 {
        return Err(Error::Degenerate("denominator pairs have zero total".into()));
    }
    Ok((num / (modulus * den)).sqrt())
}

/// Diagonals `{x, x + 1}` and edges `{x, x + e_i}` of the cube `{0,1}^n`,
/// each unordered pair once with weight 1, indexed as in `hamming_cube`.
pub fn cube_diagonal_pairs(n: u32) -> Result<(Vec<WeightedPair>, Vec<WeightedPair>)> {
    if !(1..=crate::generators::MAX_CUBE_DIM).contains(&n) {
        return Err(Error::Parameter(format!("cube dimension {n} out of range")));
    }
    let size = 1usize << n;
    let all = size - 1;
    let diagonals = (0..size)
        .filter(|&x| x < x ^ all)
        .map(|x| (x, x ^ all, 1.0))
        .collect();
    let edges = (0..size)
        .flat_map(|x| (0..n).map(move |i| (x, x ^ (1 << i))))
        .filter(|&(x, y)| x < y)
        .map(|(x, y)| (x, y, 1.0))
        .collect();
    Ok((diagonals, edges))
}
