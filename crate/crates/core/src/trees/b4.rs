//! Branch-and-bound over vertically faithful maps of a complete binary tree
//! into `H_eta`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::SEARCH_TOL;

use super::forks::{classify_fork_heta, is_delta_fork, Fork, ForkType};
use super::{HEtaHost, TreePoint};

#[derive(Clone, Copy, Debug)]
pub struct B4SearchOptions {
    /// Depth of the domain tree; 4 for `B_4`.
    pub domain_depth: u32,
    pub delta: f64,
    /// Search node budget shared by all root placements.
    pub budget: u64,
}

impl Default for B4SearchOptions {
    fn default() -> Self {
        Self {
            domain_depth: 4,
            delta: 0.02,
            budget: 2_000_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct B4Report {
    pub host_depth: u32,
    pub eta: f64,
    pub delta: f64,
    pub domain_depth: u32,
    /// Least distortion among the `(1+delta)`-vertically faithful injections
    /// found; infinite when none was found.
    pub min_distortion: f64,
    /// Host index of each domain node (breadth-first tree order).
    pub witness: Option<Vec<usize>>,
    /// No faithful map has distortion below this value.
    pub lower_bound: f64,
    /// Share of the search tree explored or pruned, weighted uniformly
    /// over candidate branches at each node.
    pub explored_fraction: f64,
    pub complete: bool,
    pub nodes: u64,
    /// Fork types among the parent-handled stars of the witness.
    pub census: BTreeMap<ForkType, usize>,
}

struct Domain {
    k: usize,
    /// tree distance, k x k
    dist: Vec<f64>,
    /// ancestors of each node
    ancestors: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

impl Domain {
    fn new(depth: u32) -> Self {
        let pts = TreePoint::all_up_to(depth);
        let k = pts.len();
        let mut dist = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                dist[a * k + b] = f64::from(pts[a].tree_distance(&pts[b]));
            }
        }
        let ancestors = pts
            .iter()
            .map(|p| (0..p.depth()).map(|d| p.truncate(d).index()).collect())
            .collect();
        let parent = pts.iter().map(|p| p.parent().map(|q| q.index())).collect();
        Self {
            k,
            dist,
            ancestors,
            parent,
        }
    }
}

#[derive(Clone, Copy)]
struct Bounds {
    lo: f64,
    hi: f64,
    vertical_lo: f64,
}

struct Search<'a> {
    dom: &'a Domain,
    host: &'a HEtaHost,
    faithful_limit: f64,
    img: Vec<usize>,
    used: Vec<bool>,
    best: f64,
    best_img: Option<Vec<usize>>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    frontier_min: f64,
    explored: f64,
}

impl<'a> Search<'a> {
    #[inline]
    fn extend(&self, h: usize, b: Bounds) -> Option<Bounds> {
        let p = self.img.len();
        let k = self.dom.k;
        let mut nb = b;
        for (q, &hq) in self.img.iter().enumerate() {
            let dh = self.host.d(h, hq);
            if dh == 0.0 {
                return None;
            }
            let r = dh / self.dom.dist[p * k + q];
            nb.lo = nb.lo.min(r);
            nb.hi = nb.hi.max(r);
        }
        for &a in &self.dom.ancestors[p] {
            let r = self.host.d(h, self.img[a]) / self.dom.dist[p * k + a];
            nb.vertical_lo = nb.vertical_lo.min(r);
        }
        // the final Lipschitz constant is at least the current maximum ratio
        if nb.vertical_lo * self.faithful_limit < nb.hi * (1.0 - 1e-12) {
            return None;
        }
        Some(nb)
    }

    #[inline]
    fn bound(b: &Bounds) -> f64 {
        if b.lo.is_finite() {
            b.hi / b.lo
        } else {
            1.0
        }
    }

    #[inline]
    fn prunable(&self, bound: f64) -> bool {
        bound >= self.best * (1.0 - SEARCH_TOL)
    }

    fn dfs(&mut self, b: Bounds, weight: f64) {
        let p = self.img.len();
        if p == self.dom.k {
            let v = Self::bound(&b);
            if v < self.best {
                self.best = v;
                self.best_img = Some(self.img.clone());
            }
            self.explored += weight;
            return;
        }
        // children of one parent are placed in increasing host index order
        let start = if p >= 2 && p.is_multiple_of(2) && self.dom.parent[p] == self.dom.parent[p - 1] {
            self.img[p - 1] + 1
        } else {
            0
        };
        let candidates: Vec<(usize, Bounds)> = (start..self.host.space().len())
            .filter(|&h| !self.used[h])
            .filter_map(|h| self.extend(h, b).map(|nb| (h, nb)))
            .collect();
        if candidates.is_empty() {
            self.explored += weight;
            return;
        }
        let share = weight / candidates.len() as f64;
        for (h, nb) in candidates {
            let bound = Self::bound(&nb);
            if self.exhausted {
                if !self.prunable(bound) {
                    self.frontier_min = self.frontier_min.min(bound);
                }
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                if !self.prunable(bound) {
                    self.frontier_min = self.frontier_min.min(bound);
                }
                continue;
            }
            if self.prunable(bound) {
                self.explored += share;
                continue;
            }
            self.used[h] = true;
            self.img.push(h);
            self.dfs(nb, share);
            self.img.pop();
            self.used[h] = false;
        }
    }
}

struct RootResult {
    best: f64,
    best_img: Option<Vec<usize>>,
    nodes: u64,
    exhausted: bool,
    frontier_min: f64,
    explored: f64,
}

/// Identity placement of `B_t` on the top levels of the host, when it fits.
fn identity_seed(dom: &Domain, host: &HEtaHost) -> Option<(f64, Vec<usize>)> {
    if dom.k > host.space().len() {
        return None;
    }
    let img: Vec<usize> = (0..dom.k).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for a in 0..dom.k {
        for b in (a + 1)..dom.k {
            let r = host.d(img[a], img[b]) / dom.dist[a * dom.k + b];
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Some((hi / lo, img))
}

/// Least distortion of a `(1+delta)`-vertically faithful injection of
/// `B_t` into `host`, by branch-and-bound.
///
/// Nodes are placed in breadth-first order; siblings take increasing host
/// indices (domain symmetry) and the root goes to the leftmost host point of
/// each depth (host symmetry). Partial maps are pruned when the vertical
/// ratios fall below `max ratio / (1 + delta)` or when the ratio spread
/// reaches the incumbent, which starts at the identity placement. Root depths
/// are searched independently in parallel with equal budget shares.
pub fn search_b4_nonembed(host: &HEtaHost, opts: B4SearchOptions) -> Result<B4Report> {
    if !(opts.delta >= 0.0) {
        return Err(Error::Parameter(format!("delta must be nonnegative, got {}", opts.delta)));
    }
    if opts.domain_depth == 0 {
        return Err(Error::Parameter("domain tree depth must be positive".into()));
    }
    let dom = Domain::new(opts.domain_depth);
    if dom.k > host.space().len() {
        return Err(Error::NoInjection {
            domain: dom.k,
            host: host.space().len(),
        });
    }
    let seed = identity_seed(&dom, host);
    let incumbent = seed.as_ref().map_or(f64::INFINITY, |s| s.0);
    let roots: Vec<usize> = (0..=host.depth_cap())
        .map(|d| TreePoint::new(d, 0).unwrap().index())
        .collect();
    let share = (opts.budget / roots.len() as u64).max(1);
    let root_weight = 1.0 / roots.len() as f64;
    let results: Vec<RootResult> = roots
        .par_iter()
        .map(|&r| {
            let mut s = Search {
                dom: &dom,
                host,
                faithful_limit: 1.0 + opts.delta,
                img: vec![r],
                used: vec![false; host.space().len()],
                best: incumbent,
                best_img: None,
                nodes: 1,
                budget: share,
                exhausted: false,
                frontier_min: f64::INFINITY,
                explored: 0.0,
            };
            s.used[r] = true;
            let start = Bounds {
                lo: f64::INFINITY,
                hi: 0.0,
                vertical_lo: f64::INFINITY,
            };
            s.dfs(start, root_weight);
            RootResult {
                best: s.best,
                best_img: s.best_img,
                nodes: s.nodes,
                exhausted: s.exhausted,
                frontier_min: s.frontier_min,
                explored: s.explored,
            }
        })
        .collect();

    let (mut best, mut best_img) = match seed {
        Some((v, img)) => (v, Some(img)),
        None => (f64::INFINITY, None),
    };
    for r in &results {
        if r.best < best && r.best_img.is_some() {
            best = r.best;
            best_img = r.best_img.clone();
        }
    }
    let complete = results.iter().all(|r| !r.exhausted);
    let frontier = results
        .iter()
        .filter(|r| r.exhausted)
        .map(|r| r.frontier_min)
        .fold(f64::INFINITY, f64::min);
    let explored: f64 = results.iter().map(|r| r.explored).sum();
    let lower = if complete { best } else { frontier.min(best).max(1.0) };
    let census = best_img
        .as_ref()
        .map(|img| star_census(&dom, host, img, opts.delta))
        .unwrap_or_default();
    Ok(B4Report {
        host_depth: host.depth_cap(),
        eta: host.eta(),
        delta: opts.delta,
        domain_depth: opts.domain_depth,
        min_distortion: best,
        witness: best_img,
        lower_bound: lower,
        explored_fraction: if complete { 1.0 } else { explored.min(1.0) },
        complete,
        nodes: results.iter().map(|r| r.nodes).sum(),
        census,
    })
}

/// Classifies the images of the stars (parent, node, two children).
fn star_census(dom: &Domain, host: &HEtaHost, img: &[usize], delta: f64) -> BTreeMap<ForkType, usize> {
    let mut census = BTreeMap::new();
    for y in 0..dom.k {
        let (Some(x), true) = (dom.parent[y], 2 * y + 2 < dom.k) else {
            continue;
        };
        let f = Fork {
            x: img[x],
            y: img[y],
            z: img[2 * y + 1],
            w: img[2 * y + 2],
            delta,
            kind: ForkType::Unclassified,
        };
        let kind = if is_delta_fork(host.space(), f.x, f.y, f.z, f.w, delta) {
            classify_fork_heta(&f, host, delta).unwrap_or(ForkType::Unclassified)
        } else {
            ForkType::Unclassified
        };
        *census.entry(kind).or_insert(0) += 1;
    }
    census
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over all injections of `B_1` satisfying faithfulness.
    fn oracle_b1(host: &HEtaHost, delta: f64) -> f64 {
        let n = host.space().len();
        let mut best = f64::INFINITY;
        for r in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if r == a || r == b || a == b {
                        continue;
                    }
                    let ra = host.d(r, a);
                    let rb = host.d(r, b);
                    let ab = host.d(a, b) / 2.0;
                    let hi = ra.max(rb).max(ab);
                    let lo = ra.min(rb).min(ab);
                    if ra.min(rb) * (1.0 + delta) >= hi {
                        best = best.min(hi / lo);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn b1_matches_brute_force() {
        let host = HEtaHost::new(2, 0.25).unwrap();
        let oracle = oracle_b1(&host, 0.05);
        assert_eq!(oracle, 1.0);
        let r = search_b4_nonembed(
            &host,
            B4SearchOptions {
                domain_depth: 1,
                delta: 0.05,
                budget: 1 << 30,
            },
        )
        .unwrap();
        assert!(r.complete);
        assert_eq!(r.min_distortion, oracle);
    }

    #[test]
    fn b1_with_tight_host() {
        // depth-1 host: only the star itself, siblings at 2 * eta
        let host = HEtaHost::new(1, 0.25).unwrap();
        let oracle = oracle_b1(&host, 0.05);
        let r = search_b4_nonembed(
            &host,
            B4SearchOptions {
                domain_depth: 1,
                delta: 0.05,
                budget: 1 << 30,
            },
        )
        .unwrap();
        assert_eq!(r.min_distortion, oracle);
        assert_eq!(oracle, 4.0);
    }

    /// Least distortion over all faithful injections of `B_t`.
    fn oracle(t: u32, host: &HEtaHost, delta: f64) -> f64 {
        use crate::metric::{distortion, Embedding};
        use crate::trees::vertical_faithfulness;
        fn rec(
            dom: &crate::metric::FiniteMetricSpace,
            host: &HEtaHost,
            img: &mut Vec<usize>,
            best: &mut f64,
            delta: f64,
        ) {
            if img.len() == dom.len() {
                let e = Embedding::new(dom, host.space(), img).unwrap();
                if vertical_faithfulness(&e).unwrap().within(1.0 + delta) {
                    *best = best.min(distortion(&e).unwrap());
                }
                return;
            }
            for h in 0..host.space().len() {
                if !img.contains(&h) {
                    img.push(h);
                    rec(dom, host, img, best, delta);
                    img.pop();
                }
            }
        }
        let dom = crate::generators::binary_tree(t).unwrap();
        let mut best = f64::INFINITY;
        rec(&dom, host, &mut Vec::new(), &mut best, delta);
        best
    }

    #[test]
    fn b2_matches_brute_force() {
        for eta in [0.2, 0.3, 0.5] {
            let host = HEtaHost::new(2, eta).unwrap();
            for delta in [0.05, 0.6, 3.0] {
                let o = oracle(2, &host, delta);
                let r = search_b4_nonembed(
                    &host,
                    B4SearchOptions {
                        domain_depth: 2,
                        delta,
                        budget: 1 << 40,
                    },
                )
                .unwrap();
                assert!(r.complete);
                assert!((r.min_distortion - o).abs() <= 1e-12, "eta {eta} delta {delta}");
            }
        }
    }

    #[test]
    fn b2_below_one_over_eta_with_large_delta() {
        // golden value from the brute-force oracle above over all
        // 15!/8! injections into the depth-3 host
        let host = HEtaHost::new(3, 0.3).unwrap();
        let r = search_b4_nonembed(
            &host,
            B4SearchOptions {
                domain_depth: 2,
                delta: 3.0,
                budget: 1 << 40,
            },
        )
        .unwrap();
        assert!((r.min_distortion - 2.4).abs() <= 1e-12);
    }

    #[test]
    fn eta_one_gives_one() {
        let host = HEtaHost::new(4, 1.0).unwrap();
        let r = search_b4_nonembed(&host, B4SearchOptions::default()).unwrap();
        assert_eq!(r.min_distortion, 1.0);
        assert!(r.complete);
    }
}
