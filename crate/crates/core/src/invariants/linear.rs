//! Equal-norm type and cotype ratios of a finite family of vectors in an
//! `l_r` space, by exact averaging over all sign patterns.

use crate::error::{Error, Result};

/// Largest family handled (`2^n` sign patterns).
pub const MAX_FAMILY: usize = 20;

/// A ratio that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Unbounded,
}

impl Ratio {
    pub fn finite(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            Ratio::Unbounded => None,
        }
    }
}

/// Vectors `x_1, ..., x_n` of common dimension in `l_r^d`
/// (`r = f64::INFINITY` for the max norm).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFamily {
    vectors: Vec<Vec<f64>>,
    r: f64,
}

impl VectorFamily {
    pub fn new(vectors: Vec<Vec<f64>>, r: f64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Empty);
        }
        if vectors.len() > MAX_FAMILY {
            return Err(Error::SizeCap(format!(
                "{} vectors exceed the {MAX_FAMILY}-vector limit",
                vectors.len()
            )));
        }
        let d = vectors[0].len();
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::Parameter("vectors must share a positive dimension".into()));
        }
        if vectors.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("coordinates must be finite".into()));
        }
        if !(r >= 1.0) {
            return Err(Error::Parameter(format!("norm exponent must be at least 1, got {r}")));
        }
        Ok(Self { vectors, r })
    }

    /// The standard basis of `l_r^d`.
    pub fn standard_basis(d: usize, r: f64) -> Result<Self> {
        let vectors = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(vectors, r)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn norm_exponent(&self) -> f64 {
        self.r
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        if self.r.is_infinite() {
            v.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
        } else if self.r == 1.0 {
            v.iter().map(|c| c.abs()).sum()
        } else if self.r == 2.0 {
            v.iter().map(|c| c * c).sum::<f64>().sqrt()
        } else {
            v.iter().map(|c| c.abs().powf(self.r)).sum::<f64>().powf(1.0 / self.r)
        }
    }

    /// `sum_j ||x_j||^2`.
    pub fn sum_squared_norms(&self) -> f64 {
        self.vectors.iter().map(|v| self.norm(v).powi(2)).sum()
    }

    /// `Avg_eps ||sum_j eps_j x_j||^2` over all `2^n` sign patterns; pattern
    /// bit `j` set means `eps_j = -1`.
    pub fn sign_average(&self) -> f64 {
        let n = self.vectors.len();
        let d = self.vectors[0].len();
        let mut acc = vec![0.0; d];
        let mut total = 0.0;
        for pattern in 0u64..(1u64 << n) {
            acc.fill(0.0);
            for (j, v) in self.vectors.iter().enumerate() {
                let s = if pattern >> j & 1 == 1 { -1.0 } else { 1.0 };
                for (a, c) in acc.iter_mut().zip(v) {
                    *a += s * c;
                }
            }
            total += self.norm(&acc).powi(2);
        }
        total / (1u64 << n) as f64
    }
}

/// Least `T^` with `Avg ||sum eps_j x_j||^2 <= T^2 n^(2/p - 1) sum ||x_j||^2`.
pub fn en_type_ratio(fam: &VectorFamily, p: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Parameter(format!("type exponent must lie in [1, 2], got {p}")));
    }
    let norms = fam.sum_squared_norms();
    if norms == 0.0 {
        return Err(Error::Degenerate("all vectors are zero".into()));
    }
    let n = fam.len() as f64;
    Ok((fam.sign_average() / (n.powf(2.0 / p - 1.0) * norms)).sqrt())
}

/// Least `C^` with `C^2 n^(1 - 2/q) Avg ||sum eps_j x_j||^2 >= sum ||x_j||^2`;
/// `q` may be infinite.
pub fn en_cotype_ratio(fam: &VectorFamily, q: f64) -> Result<Ratio> {
    if !(q >= 2.0) {
        return Err(Error::Parameter(format!("cotype exponent must be at least 2, got {q}")));
    }
    let norms = fam.sum_squared_norms();
    if norms == 0.0 {
        return Err(Error::Degenerate("all vectors are zero".into()));
    }
    let avg = fam.sign_average();
    if avg == 0.0 {
        return Ok(Ratio::Unbounded);
    }
    let n = fam.len() as f64;
    Ok(Ratio::Finite((norms / (n.powf(1.0 - 2.0 / q) * avg)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_examples() {
        let e2 = VectorFamily::standard_basis(2, 2.0).unwrap();
        assert!((en_type_ratio(&e2, 2.0).unwrap() - 1.0).abs() <= 1e-15);
        let single = VectorFamily::new(vec![vec![3.0, -4.0]], 1.5).unwrap();
        for p in [1.0, 1.5, 2.0] {
            assert!((en_type_ratio(&single, p).unwrap() - 1.0).abs() <= 1e-15);
        }
        let l1 = VectorFamily::standard_basis(2, 1.0).unwrap();
        assert!((en_type_ratio(&l1, 1.0).unwrap() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn cotype_examples() {
        let e2 = VectorFamily::standard_basis(4, 2.0).unwrap();
        assert_eq!(en_cotype_ratio(&e2, 2.0).unwrap(), Ratio::Finite(1.0));
        let linf = VectorFamily::standard_basis(3, f64::INFINITY).unwrap();
        assert!((linf.sign_average() - 1.0).abs() <= 1e-15);
        let r = en_cotype_ratio(&linf, f64::INFINITY).unwrap().finite().unwrap();
        assert!((r - 1.0).abs() <= 1e-15);
        let single = VectorFamily::new(vec![vec![0.5]], 2.0).unwrap();
        assert_eq!(en_cotype_ratio(&single, 2.0).unwrap(), Ratio::Finite(1.0));
    }

    #[test]
    fn cancelling_family_is_unbounded() {
        // x and -x with a zero average is impossible; zero average needs all zero
        let z = VectorFamily::new(vec![vec![0.0, 0.0]], 2.0).unwrap();
        assert!(en_cotype_ratio(&z, 2.0).is_err());
        assert!(en_type_ratio(&z, 2.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(VectorFamily::new(vec![], 2.0).is_err());
        assert!(VectorFamily::new(vec![vec![1.0], vec![1.0, 2.0]], 2.0).is_err());
        assert!(VectorFamily::new(vec![vec![1.0]], 0.5).is_err());
    }
}
