//! δ-forks: detection in any finite space, and the combinatorial
//! classification of forks and 4-point paths inside `H_eta`.
//!
//! Fork predicate table (version [`FORK_PREDICATE_VERSION`]). Write `a ⊐ b`
//! for "a is an ancestor of b" up to `r = floor(delta * d(x, y))` levels of
//! slack, and `a ≍ b` for "same depth up to r, neither an ancestor of the
//! other". For a fork `(x, y, z, w)` with handle `x`, forking point `y` and
//! prongs `z, w`:
//!
//! | tag        | handle       | prongs                         |
//! |------------|--------------|--------------------------------|
//! | contract-A | `x ⊐ y`      | `y ⊐ z` and `y ⊐ w`            |
//! | contract-B | `x ≍ y`      | `y ⊐ z` and `y ⊐ w`            |
//! | I          | `x ⊐ y`      | some prong outside `y`'s subtree |
//! | II         | `y ⊐ x`      | no prong inside `y`'s subtree  |
//! | III        | `x ≍ y`      | some prong outside `y`'s subtree |
//! | IV         | oblique      | any                            |
//!
//! `y ⊐ x` with a prong inside `y`'s subtree matches no row and is tagged
//! unclassified.

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

use super::{HEtaHost, TreePoint};

pub const FORK_PREDICATE_VERSION: &str = "fork-predicates/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ForkType {
    ContractA,
    ContractB,
    I,
    II,
    III,
    IV,
    Unclassified,
    Degenerate,
}

impl ForkType {
    pub fn as_str(self) -> &'static str {
        match self {
            ForkType::ContractA => "contract-A",
            ForkType::ContractB => "contract-B",
            ForkType::I => "I",
            ForkType::II => "II",
            ForkType::III => "III",
            ForkType::IV => "IV",
            ForkType::Unclassified => "unclassified",
            ForkType::Degenerate => "degenerate",
        }
    }

    /// Forks whose prongs are pulled together by the host.
    pub fn is_contracting(self) -> bool {
        matches!(self, ForkType::ContractA | ForkType::ContractB)
    }
}

/// A quadruple `(x, y, z, w)` of point indices: handle, forking point, prongs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fork {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub w: usize,
    pub delta: f64,
    pub kind: ForkType,
}

#[inline]
fn within(value: f64, delta: f64) -> bool {
    // 1e-12 absorbs rounding in the host distances
    value >= 1.0 / (1.0 + delta) - 1e-12 && value <= 1.0 + delta + 1e-12
}

/// Is `(x, y, z)` a `(1+delta)`-copy of the path `(0, 1, 2)`?
fn is_delta_triple(h: &FiniteMetricSpace, x: usize, y: usize, z: usize, delta: f64) -> bool {
    let s = h.d(x, y);
    s > 0.0 && within(h.d(y, z) / s, delta) && within(h.d(x, z) / (2.0 * s), delta)
}

/// Both `(x, y, z)` and `(x, y, w)` are `(1+delta)`-equivalent to `(0, 1, 2)`.
pub fn is_delta_fork(
    h: &FiniteMetricSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
    delta: f64,
) -> bool {
    x != y && is_delta_triple(h, x, y, z, delta) && is_delta_triple(h, x, y, w, delta)
}

/// Every δ-fork of `h`: ordered in `(x, y)`, unordered in `{z, w}`.
///
/// With `distinct_prongs` off, forks with `z = w` are included and tagged
/// degenerate; all other forks are tagged unclassified (classification
/// needs the tree structure of an `H_eta` host).
pub fn find_delta_forks(h: &FiniteMetricSpace, delta: f64, distinct_prongs: bool) -> Result<Vec<Fork>> {
    if !(delta >= 0.0) {
        return Err(Error::Parameter(format!("delta must be nonnegative, got {delta}")));
    }
    let n = h.len();
    let mut out = Vec::new();
    let mut prongs = Vec::with_capacity(n);
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            prongs.clear();
            prongs.extend((0..n).filter(|&z| z != x && z != y && is_delta_triple(h, x, y, z, delta)));
            for (a, &z) in prongs.iter().enumerate() {
                if !distinct_prongs {
                    out.push(Fork {
                        x,
                        y,
                        z,
                        w: z,
                        delta,
                        kind: ForkType::Degenerate,
                    });
                }
                for &w in &prongs[a + 1..] {
                    out.push(Fork {
                        x,
                        y,
                        z,
                        w,
                        delta,
                        kind: ForkType::Unclassified,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `d(z, w) / d(x, y)`; zero for degenerate forks.
pub fn fork_tip_contraction(f: &Fork, h: &FiniteMetricSpace) -> f64 {
    if f.z == f.w {
        return 0.0;
    }
    h.d(f.z, f.w) / h.d(f.x, f.y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Relation {
    /// first point is an ancestor of the second
    Above,
    /// first point is a descendant of the second
    Below,
    Level,
    Oblique,
}

fn approx_ancestor(a: &TreePoint, b: &TreePoint, slack: u32) -> bool {
    a.depth() - a.lca_depth(b) <= slack && b.depth() > a.depth() + slack
}

fn relation(a: &TreePoint, b: &TreePoint, slack: u32) -> Relation {
    if approx_ancestor(a, b, slack) {
        Relation::Above
    } else if approx_ancestor(b, a, slack) {
        Relation::Below
    } else if a.depth().abs_diff(b.depth()) <= slack {
        Relation::Level
    } else {
        Relation::Oblique
    }
}

/// Tags a fork of `host` according to the predicate table in the module docs.
pub fn classify_fork_heta(f: &Fork, host: &HEtaHost, delta: f64) -> Result<ForkType> {
    let space = host.space();
    if !is_delta_fork(space, f.x, f.y, f.z, f.w, delta) {
        return Err(Error::NotAFork(format!(
            "({}, {}, {}, {}) is not a {delta}-fork",
            space.label(f.x),
            space.label(f.y),
            space.label(f.z),
            space.label(f.w)
        )));
    }
    if f.z == f.w {
        return Ok(ForkType::Degenerate);
    }
    let slack = (delta * space.d(f.x, f.y)).floor() as u32;
    let [x, y, z, w] = [f.x, f.y, f.z, f.w].map(|i| host.point(i));
    let handle = relation(&x, &y, slack);
    let prongs_below = relation(&y, &z, slack) == Relation::Above && relation(&y, &w, slack) == Relation::Above;
    let any_prong_below = relation(&y, &z, slack) == Relation::Above || relation(&y, &w, slack) == Relation::Above;
    Ok(match handle {
        Relation::Above if prongs_below => ForkType::ContractA,
        Relation::Level if prongs_below => ForkType::ContractB,
        Relation::Above => ForkType::I,
        Relation::Below if !any_prong_below => ForkType::II,
        Relation::Level => ForkType::III,
        Relation::Oblique => ForkType::IV,
        Relation::Below => ForkType::Unclassified,
    })
}

/// One line of a fork census.
#[derive(Clone, Debug, PartialEq)]
pub struct CensusRow {
    pub x: String,
    pub y: String,
    pub z: String,
    pub w: String,
    pub delta: f64,
    pub kind: ForkType,
    pub tip_contraction: f64,
}

/// All distinct-prong δ-forks of `host`, classified.
pub fn fork_census(host: &HEtaHost, delta: f64) -> Result<Vec<CensusRow>> {
    let space = host.space();
    find_delta_forks(space, delta, true)?
        .into_iter()
        .map(|mut f| {
            f.kind = classify_fork_heta(&f, host, delta)?;
            Ok(CensusRow {
                x: space.label(f.x).to_string(),
                y: space.label(f.y).to_string(),
                z: space.label(f.z).to_string(),
                w: space.label(f.w).to_string(),
                delta,
                kind: f.kind,
                tip_contraction: fork_tip_contraction(&f, space),
            })
        })
        .collect()
}

/// Shapes of 4-point paths `(x0, x1, x2, x3)` in the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathType {
    /// monotone along one branch
    A,
    /// vertical, horizontal, vertical (x1 and x2 at the same depth)
    B,
    /// horizontal first step followed by two steps along one branch, or the reverse
    C,
    Other,
}

impl PathType {
    pub fn as_str(self) -> &'static str {
        match self {
            PathType::A => "A",
            PathType::B => "B",
            PathType::C => "C",
            PathType::Other => "other",
        }
    }
}

fn horizontal(a: &TreePoint, b: &TreePoint) -> bool {
    a.depth() == b.depth() && a != b
}

/// Classifies a 4-point path by exact ancestor/depth relations:
///
/// * A: `x0 ⊐ x1 ⊐ x2 ⊐ x3` or the reverse chain;
/// * B: `x1 ⊐ x0`, `x3 ⊐ x2`, `h(x1) = h(x2)`, or the same read backwards;
/// * C: `h(x0) = h(x1)` and `x1 ⊐ x2 ⊐ x3`, or the same read backwards.
pub fn classify_path4_heta(points: [TreePoint; 4]) -> Result<PathType> {
    for i in 0..4 {
        for j in (i + 1)..4 {
            if points[i] == points[j] {
                return Err(Error::Parameter(format!(
                    "path points {i} and {j} coincide ({})",
                    points[i]
                )));
            }
        }
    }
    let [p0, p1, p2, p3] = points;
    let anc = |a: &TreePoint, b: &TreePoint| a.is_ancestor(b);
    let chain = |a, b, c, d| anc(a, b) && anc(b, c) && anc(c, d);
    if chain(&p0, &p1, &p2, &p3) || chain(&p3, &p2, &p1, &p0) {
        return Ok(PathType::A);
    }
    let middle_flat = horizontal(&p1, &p2);
    if middle_flat && ((anc(&p1, &p0) && anc(&p3, &p2)) || (anc(&p0, &p1) && anc(&p2, &p3))) {
        return Ok(PathType::B);
    }
    if (horizontal(&p0, &p1) && anc(&p1, &p2) && anc(&p2, &p3))
        || (horizontal(&p3, &p2) && anc(&p2, &p1) && anc(&p1, &p0))
    {
        return Ok(PathType::C);
    }
    Ok(PathType::Other)
}
