//! Binary-tree points, the contracted tree host `H_eta`, forks, vertical
//! faithfulness and the bounded `B_4` search.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::generators::MAX_TREE_DEPTH;
use crate::metric::{distortion, Embedding, FiniteMetricSpace};

mod b4;
mod faithful;
mod forks;

pub use b4::{search_b4_nonembed, B4Report, B4SearchOptions};
pub use faithful::{find_faithful_subtree, vertical_faithfulness, Faithfulness, SubtreeCopy};
pub use forks::{
    classify_fork_heta, classify_path4_heta, find_delta_forks, fork_census, fork_tip_contraction,
    is_delta_fork, CensusRow, Fork, ForkType, PathType, FORK_PREDICATE_VERSION,
};

/// Label used for the empty string (the root).
pub const ROOT_LABEL: &str = "ε";

/// A node of the infinite binary tree: a bit string, root = empty string.
///
/// `bits` holds the string as a binary number, first character most
/// significant, so siblings differ in the lowest bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePoint {
    depth: u32,
    bits: u64,
}

impl TreePoint {
    pub const ROOT: TreePoint = TreePoint { depth: 0, bits: 0 };

    pub fn new(depth: u32, bits: u64) -> Result<Self> {
        if depth > 63 || (depth < 64 && bits >> depth != 0) {
            return Err(Error::Parameter(format!(
                "bits {bits:#b} do not fit in depth {depth}"
            )));
        }
        Ok(Self { depth, bits })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn child(&self, bit: u64) -> Self {
        Self {
            depth: self.depth + 1,
            bits: (self.bits << 1) | (bit & 1),
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.depth > 0).then(|| Self {
            depth: self.depth - 1,
            bits: self.bits >> 1,
        })
    }

    /// The ancestor (or self) at depth `d <= self.depth`.
    pub fn truncate(&self, d: u32) -> Self {
        debug_assert!(d <= self.depth);
        Self {
            depth: d,
            bits: self.bits >> (self.depth - d),
        }
    }

    /// Depth of the lowest common ancestor (length of the longest common prefix).
    pub fn lca_depth(&self, other: &Self) -> u32 {
        let m = self.depth.min(other.depth);
        let diff = (self.bits >> (self.depth - m)) ^ (other.bits >> (other.depth - m));
        m - (u64::BITS - diff.leading_zeros())
    }

    pub fn lca(&self, other: &Self) -> Self {
        self.truncate(self.lca_depth(other))
    }

    /// True when `self` is a prefix of `other` (including equality).
    pub fn is_ancestor_or_self(&self, other: &Self) -> bool {
        self.depth <= other.depth && other.bits >> (other.depth - self.depth) == self.bits
    }

    /// True when `self` is a proper prefix of `other`.
    pub fn is_ancestor(&self, other: &Self) -> bool {
        self.depth < other.depth && self.is_ancestor_or_self(other)
    }

    /// `|x| + |y| - 2 |lcp(x, y)|`.
    pub fn tree_distance(&self, other: &Self) -> u32 {
        self.depth + other.depth - 2 * self.lca_depth(other)
    }

    /// Position in [`TreePoint::all_up_to`] order.
    pub fn index(&self) -> usize {
        ((1usize << self.depth) - 1) + self.bits as usize
    }

    pub fn from_index(index: usize) -> Self {
        let depth = usize::BITS - 1 - (index + 1).leading_zeros();
        Self {
            depth,
            bits: (index + 1 - (1usize << depth)) as u64,
        }
    }

    /// All strings of length at most `n`, by depth, then lexicographically.
    pub fn all_up_to(n: u32) -> Vec<TreePoint> {
        (0..=n)
            .flat_map(|d| (0..(1u64 << d)).map(move |b| TreePoint { depth: d, bits: b }))
            .collect()
    }
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.depth == 0 {
            return f.write_str(ROOT_LABEL);
        }
        for i in (0..self.depth).rev() {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for TreePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == ROOT_LABEL || s.is_empty() || s == "-" {
            return Ok(Self::ROOT);
        }
        if s.len() > 63 {
            return Err(Error::Parse(format!("tree label too long: {s:?}")));
        }
        let mut bits = 0u64;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Parse(format!("bad tree label {s:?}"))),
                };
        }
        Ok(Self {
            depth: s.len() as u32,
            bits,
        })
    }
}

/// `d_eta(x, y) = h(y) - h(x) + 2 (h(x) - h(lca(x, y))) * eta` with the
/// roles arranged so that `h(y) >= h(x)`.
pub fn d_eta(x: &TreePoint, y: &TreePoint, eta: f64) -> f64 {
    let (lo, hi) = if x.depth <= y.depth { (x, y) } else { (y, x) };
    let vertical = f64::from(hi.depth - lo.depth);
    let horizontal = f64::from(lo.depth - lo.lca_depth(hi));
    vertical + 2.0 * horizontal * eta
}

/// The truncation of `(B_inf, d_eta)` to depth `depth_cap`.
#[derive(Clone, Debug)]
pub struct HEtaHost {
    depth_cap: u32,
    eta: f64,
    points: Vec<TreePoint>,
    space: FiniteMetricSpace,
}

impl HEtaHost {
    pub fn new(depth_cap: u32, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Parameter(format!("eta must lie in (0, 1], got {eta}")));
        }
        if depth_cap > MAX_TREE_DEPTH {
            return Err(Error::SizeCap(format!(
                "H_eta depth cap must be at most {MAX_TREE_DEPTH}, got {depth_cap}"
            )));
        }
        let points = TreePoint::all_up_to(depth_cap);
        let labels = points.iter().map(|p| p.to_string()).collect();
        let space = FiniteMetricSpace::from_fn(labels, |a, b| d_eta(&points[a], &points[b], eta))?;
        Ok(Self {
            depth_cap,
            eta,
            points,
            space,
        })
    }

    pub fn depth_cap(&self) -> u32 {
        self.depth_cap
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn points(&self) -> &[TreePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> TreePoint {
        self.points[i]
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.space.d(i, j)
    }
}

/// Distortion of the identity from `B_D` (tree metric) onto `H_eta`
/// truncated at depth `D`.
pub fn identity_distortion_heta(depth: u32, eta: f64) -> Result<f64> {
    if depth < 1 {
        return Err(Error::Parameter("depth must be at least 1".into()));
    }
    let tree = crate::generators::binary_tree(depth)?;
    let host = HEtaHost::new(depth, eta)?;
    let id: Vec<usize> = (0..tree.len()).collect();
    distortion(&Embedding::new(&tree, host.space(), &id)?)
}

/// Recovers the tree points of a space whose labels are binary strings.
pub fn tree_points_of(space: &FiniteMetricSpace) -> Result<Vec<TreePoint>> {
    space.labels().iter().map(|l| l.parse()).collect()
}

/// Depth `n` when `space` is exactly `binary_tree(n)`, point for point.
pub fn as_binary_tree(space: &FiniteMetricSpace) -> Result<u32> {
    let not_tree = || Error::Parameter("domain is not a binary_tree instance".into());
    let size = space.len() + 1;
    if !size.is_power_of_two() {
        return Err(not_tree());
    }
    let n = size.trailing_zeros() - 1;
    let points = tree_points_of(space).map_err(|_| not_tree())?;
    for (i, p) in points.iter().enumerate() {
        if p.index() != i {
            return Err(not_tree());
        }
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if space.d(i, j) != f64::from(points[i].tree_distance(&points[j])) {
                return Err(not_tree());
            }
        }
    }
    Ok(n)
}
