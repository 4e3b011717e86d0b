//! Finite metric spaces, maps between them, and Lipschitz/distortion arithmetic.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance used when checking the metric axioms.
pub const AXIOM_TOL: f64 = 1e-12;

/// Tolerance used when comparing candidate values during searches.
pub const SEARCH_TOL: f64 = 1e-9;

/// A labeled point set with a validated distance matrix.
///
/// The matrix is stored row-major and is exactly symmetric with a zero
/// diagonal; every off-diagonal entry is strictly positive and the triangle
/// inequality holds up to [`AXIOM_TOL`] (relative to the largest side).
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
    n: usize,
}

impl FiniteMetricSpace {
    /// Validates `matrix` against the metric axioms.
    ///
    /// Checks run in a fixed order (shape, finiteness, diagonal, symmetry,
    /// positivity, triangle) and the first violation is reported together
    /// with the indices that witness it.
    pub fn new(labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Shape {
                labels: n,
                rows: matrix.len(),
            });
        }
        let mut dist = Vec::with_capacity(n * n);
        for row in &matrix {
            dist.extend_from_slice(row);
        }
        Self::from_flat(labels, dist)
    }

    /// Like [`FiniteMetricSpace::new`] but takes a row-major flat matrix.
    pub fn from_flat(labels: Vec<String>, mut dist: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if dist.len() != n * n {
            return Err(Error::Shape {
                labels: n,
                rows: dist.len() / n.max(1),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = dist[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidEntry { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            let v = dist[i * n + i];
            if v != 0.0 {
                return Err(Error::NonzeroDiagonal { i, value: v });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (dist[i * n + j], dist[j * n + i]);
                if (a - b).abs() > AXIOM_TOL * a.max(b).max(1.0) {
                    return Err(Error::Asymmetric { i, j, ij: a, ji: b });
                }
                // keep the upper triangle as the canonical value
                dist[j * n + i] = a;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dist[i * n + j] == 0.0 {
                    return Err(Error::ZeroDistance { i, j });
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                if i == k {
                    continue;
                }
                let direct = dist[i * n + k];
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let detour = dist[i * n + j] + dist[j * n + k];
                    if direct - detour > AXIOM_TOL * direct.max(1.0) {
                        return Err(Error::Triangle {
                            i,
                            j,
                            k,
                            direct,
                            detour,
                        });
                    }
                }
            }
        }
        Ok(Self { labels, dist, n })
    }

    /// Builds a space from a distance function over `labels`.
    pub fn from_fn(labels: Vec<String>, mut d: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = labels.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = d(i, j);
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Self::from_flat(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Row-major distance matrix.
    pub fn flat(&self) -> &[f64] {
        &self.dist
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest nonzero distance, or 0 for a single point.
    pub fn min_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m = m.min(self.d(i, j));
            }
        }
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Sorted distinct pairwise distances (exact float equality).
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.d(i, j))
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Restriction to the listed points, in the listed order.
    pub fn subspace(&self, points: &[usize]) -> Result<Self> {
        let labels = points.iter().map(|&p| self.labels[p].clone()).collect();
        Self::from_fn(labels, |a, b| self.d(points[a], points[b]))
    }

    /// Every distance multiplied by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("scale factor must be positive, got {lambda}")));
        }
        let dist = self.dist.iter().map(|d| d * lambda).collect();
        Self::from_flat(self.labels.clone(), dist)
    }

    /// Maximum violation of the ultrametric inequality (0 for ultrametrics).
    pub fn ultrametric_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    let excess = self.d(i, k) - self.d(i, j).max(self.d(j, k));
                    worst = worst.max(excess);
                }
            }
        }
        worst
    }

    /// Hex digest of the text serialization, used to tie results to inputs.
    pub fn digest(&self) -> String {
        // FNV-1a, 64 bit. Stable across platforms and releases.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_text().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Serializes to the interchange text format: `N`, then the labels one
    /// per line, then `N` rows of `N` space-separated distances.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.n).unwrap();
        for l in &self.labels {
            writeln!(out, "{l}").unwrap();
        }
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }

    /// Parses the interchange text format. Tokens are whitespace separated,
    /// so labels may sit on one line or one per line; labels cannot contain
    /// whitespace.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("missing point count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad point count: {e}")))?;
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let l = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing label {i}")))?;
            labels.push(l.to_string());
        }
        let mut dist = Vec::with_capacity(n * n);
        for k in 0..n * n {
            let t = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing distance entry {k}")))?;
            dist.push(
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad distance {t:?}: {e}")))?,
            );
        }
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse(format!("trailing token {extra:?}")));
        }
        Self::from_flat(labels, dist)
    }
}

impl fmt::Display for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for FiniteMetricSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

/// Validates a square matrix as a metric on `labels`.
pub fn validate_metric(matrix: Vec<Vec<f64>>, labels: Vec<String>) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::new(labels, matrix)
}

/// Labels `0..n` as strings.
pub fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// The snowflake transform: every distance `d` becomes `d^alpha`.
pub fn snowflake(space: &FiniteMetricSpace, alpha: f64) -> Result<FiniteMetricSpace> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!(
            "snowflake exponent must lie in (0, 1], got {alpha}"
        )));
    }
    if alpha == 1.0 {
        return Ok(space.clone());
    }
    let dist = space.flat().iter().map(|d| d.powf(alpha)).collect();
    FiniteMetricSpace::from_flat(space.labels().to_vec(), dist)
}

/// A map from the points of `domain` to the points of `host`.
#[derive(Clone, Copy, Debug)]
pub struct Embedding<'a> {
    pub domain: &'a FiniteMetricSpace,
    pub host: &'a FiniteMetricSpace,
    pub assignment: &'a [usize],
}

impl<'a> Embedding<'a> {
    pub fn new(
        domain: &'a FiniteMetricSpace,
        host: &'a FiniteMetricSpace,
        assignment: &'a [usize],
    ) -> Result<Self> {
        if assignment.len() != domain.len() {
            return Err(Error::Parameter(format!(
                "assignment has {} entries for a {}-point domain",
                assignment.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&h| h >= host.len()) {
            return Err(Error::Parameter(format!(
                "host index {bad} out of range for a {}-point host",
                host.len()
            )));
        }
        Ok(Self {
            domain,
            host,
            assignment,
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.host.len()];
        self.assignment
            .iter()
            .all(|&h| !std::mem::replace(&mut seen[h], true))
    }

    /// Expansion ratio `d_host(f i, f j) / d_domain(i, j)` for `i != j`.
    #[inline]
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        self.host.d(self.assignment[i], self.assignment[j]) / self.domain.d(i, j)
    }

    /// Smallest and largest expansion ratio over unordered pairs.
    pub fn ratio_range(&self) -> (f64, f64) {
        let n = self.domain.len();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for i in 0..n {
            for j in (i + 1)..n {
                let r = self.ratio(i, j);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        (lo, hi)
    }
}

/// Exact maximum of `d_H(f x, f y) / d_X(x, y)` over unordered pairs.
///
/// Collapsed pairs contribute 0, so a constant map has norm 0.
pub fn lipschitz_norm(e: &Embedding<'_>) -> Result<f64> {
    if e.domain.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: e.domain.len(),
        });
    }
    Ok(e.ratio_range().1)
}

/// Lipschitz norm of the inverse map on the image.
pub fn inverse_lipschitz_norm(e: &Embedding<'_>) -> Result<f64> {
    if e.domain.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: e.domain.len(),
        });
    }
    if !e.is_injective() {
        return Err(Error::NotInjective);
    }
    Ok(1.0 / e.ratio_range().0)
}

/// `||f||_Lip * ||f^-1||_Lip` for an injective map.
pub fn distortion(e: &Embedding<'_>) -> Result<f64> {
    if e.domain.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: e.domain.len(),
        });
    }
    if !e.is_injective() {
        return Err(Error::NotInjective);
    }
    let (lo, hi) = e.ratio_range();
    Ok(hi / lo)
}
