//! Constructors for the structured families (paths, cubes, grids, binary
//! trees) and the two tightness hosts (ultrametric strings, snowflaked line).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{index_labels, snowflake, FiniteMetricSpace};
use crate::trees::TreePoint;

pub const MAX_CUBE_DIM: u32 = 20;
pub const MAX_GRID_POINTS: u64 = 1_000_000;
pub const MAX_TREE_DEPTH: u32 = 16;

/// The path `{0, ..., n}` with `d(i, j) = |i - j|`.
pub fn path(n: usize) -> Result<FiniteMetricSpace> {
    if n == 0 {
        return Err(Error::Parameter("path length must be at least 1".into()));
    }
    FiniteMetricSpace::from_fn(index_labels(n + 1), |i, j| i.abs_diff(j) as f64)
}

/// Bit string label of `x` with `n` bits, first coordinate first.
fn bits_label(x: usize, n: u32) -> String {
    (0..n)
        .map(|i| if x >> (n - 1 - i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// `{0,1}^n` with Hamming distance. Point `x` has label equal to its bits,
/// most significant bit first; index `x` is the integer value of the label.
pub fn hamming_cube(n: u32) -> Result<FiniteMetricSpace> {
    if n == 0 || n > MAX_CUBE_DIM {
        return Err(Error::SizeCap(format!(
            "cube dimension must lie in 1..={MAX_CUBE_DIM}, got {n}"
        )));
    }
    let size = 1usize << n;
    let labels = (0..size).map(|x| bits_label(x, n)).collect();
    FiniteMetricSpace::from_fn(labels, |a, b| (a ^ b).count_ones() as f64)
}

/// `{1..m}^n` with the `l_inf` distance, points in lexicographic order.
pub fn linf_grid(n: u32, m: u32) -> Result<FiniteMetricSpace> {
    if n == 0 || m == 0 {
        return Err(Error::Parameter("grid dimension and side must be positive".into()));
    }
    let size = (m as u64).checked_pow(n).filter(|&s| s <= MAX_GRID_POINTS);
    let Some(size) = size else {
        return Err(Error::SizeCap(format!(
            "{m}^{n} grid points exceed the cap of {MAX_GRID_POINTS}"
        )));
    };
    let coords: Vec<Vec<u32>> = (0..size)
        .map(|mut x| {
            let mut c = vec![0; n as usize];
            for slot in c.iter_mut().rev() {
                *slot = (x % m as u64) as u32 + 1;
                x /= m as u64;
            }
            c
        })
        .collect();
    let labels = coords
        .iter()
        .map(|c| {
            c.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    FiniteMetricSpace::from_fn(labels, |a, b| {
        coords[a]
            .iter()
            .zip(&coords[b])
            .map(|(p, q)| p.abs_diff(*q))
            .max()
            .unwrap_or(0) as f64
    })
}

/// Every binary string of length at most `n`, ordered by depth and then
/// lexicographically, with the tree distance `|x| + |y| - 2|lcp(x, y)|`.
pub fn binary_tree(n: u32) -> Result<FiniteMetricSpace> {
    if n > MAX_TREE_DEPTH {
        return Err(Error::SizeCap(format!(
            "binary tree depth must be at most {MAX_TREE_DEPTH}, got {n}"
        )));
    }
    let points = TreePoint::all_up_to(n);
    let labels = points.iter().map(|p| p.to_string()).collect();
    FiniteMetricSpace::from_fn(labels, |a, b| points[a].tree_distance(&points[b]) as f64)
}

/// The strings of length exactly `depth` with `rho(x, y) = 2^-|lcp(x, y)|`.
pub fn ultrametric_host(depth: u32) -> Result<FiniteMetricSpace> {
    if depth == 0 || depth > MAX_TREE_DEPTH {
        return Err(Error::SizeCap(format!(
            "ultrametric depth must lie in 1..={MAX_TREE_DEPTH}, got {depth}"
        )));
    }
    let size = 1usize << depth;
    let labels = (0..size).map(|x| bits_label(x, depth)).collect();
    FiniteMetricSpace::from_fn(labels, |a, b| {
        // a ^ b fits in `depth` bits; its bit length is depth - |lcp|
        let shared = depth - (usize::BITS - (a ^ b).leading_zeros());
        0.5f64.powi(shared as i32)
    })
}

/// `path(n)` with every distance raised to `alpha`.
pub fn snowflake_line(n: usize, alpha: f64) -> Result<FiniteMetricSpace> {
    snowflake(&path(n)?, alpha)
}

/// The family a generator call belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Path,
    Cube,
    LinfGrid,
    TorusIndex,
    BinaryTree,
    UltrametricHost,
    SnowflakeLine,
}

/// Serializable description of a generator call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Self {
        Self {
            kind,
            n: None,
            m: None,
            depth: None,
            alpha: None,
        }
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_m(mut self, m: u32) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_depth(mut self, depth: u32) -> Self {
        self.depth = Some(depth);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    fn need(&self, v: Option<u32>, name: &str) -> Result<u32> {
        v.ok_or_else(|| Error::Parameter(format!("family {:?} needs parameter `{name}`", self.kind)))
    }

    /// Builds the space. `torus-index` is the `Z_m^n` index set with the
    /// graph metric of the `{-1,0,1}^n` steps (wrap-around `l_inf`).
    pub fn build(&self) -> Result<FiniteMetricSpace> {
        match self.kind {
            FamilyKind::Path => path(self.need(self.n, "n")? as usize),
            FamilyKind::Cube => hamming_cube(self.need(self.n, "n")?),
            FamilyKind::LinfGrid => linf_grid(self.need(self.n, "n")?, self.need(self.m, "m")?),
            FamilyKind::TorusIndex => torus_index(self.need(self.n, "n")?, self.need(self.m, "m")?),
            FamilyKind::BinaryTree => binary_tree(self.need(self.n.or(self.depth), "n")?),
            FamilyKind::UltrametricHost => {
                ultrametric_host(self.need(self.depth.or(self.n), "depth")?)
            }
            FamilyKind::SnowflakeLine => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::Parameter("snowflake-line needs `alpha`".into()))?;
                snowflake_line(self.need(self.n, "n")? as usize, alpha)
            }
        }
    }
}

/// `Z_m^n` with the wrap-around `l_inf` distance.
pub fn torus_index(n: u32, m: u32) -> Result<FiniteMetricSpace> {
    if m < 2 {
        return Err(Error::Parameter("torus side must be at least 2".into()));
    }
    let size = (m as u64)
        .checked_pow(n)
        .filter(|&s| s <= MAX_GRID_POINTS)
        .ok_or_else(|| Error::SizeCap(format!("{m}^{n} torus points exceed the cap")))?
        as usize;
    let coord = |mut x: usize| {
        let mut c = vec![0u32; n as usize];
        for slot in c.iter_mut().rev() {
            *slot = (x % m as usize) as u32;
            x /= m as usize;
        }
        c
    };
    let coords: Vec<Vec<u32>> = (0..size).map(coord).collect();
    let labels = coords
        .iter()
        .map(|c| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    FiniteMetricSpace::from_fn(labels, |a, b| {
        coords[a]
            .iter()
            .zip(&coords[b])
            .map(|(p, q)| {
                let d = p.abs_diff(*q);
                d.min(m - d)
            })
            .max()
            .unwrap_or(0) as f64
    })
}
