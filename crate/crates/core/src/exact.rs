//! Exact minimum distortion into a finite host by branch-and-bound over
//! injections.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, SEARCH_TOL};

/// How the lower bound of a [`DistortionReport`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Certificate {
    /// The search space was fully explored; lower equals upper.
    Exhaustive,
    /// The lower bound comes from an invariant such as `1 / Psi_n`.
    Functional,
    /// The lower bound comes from a dual semidefinite certificate.
    SemidefiniteDual,
    /// A budgeted search stopped early; lower is the smallest partial bound
    /// over the unexplored part of the search tree.
    SearchBound,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Certificate::Exhaustive => "exhaustive",
            Certificate::Functional => "functional",
            Certificate::SemidefiniteDual => "semidefinite-dual",
            Certificate::SearchBound => "search-bound",
        }
    }
}

/// A map realizing the upper bound of a report.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Host point index for each domain point.
    Assignment(Vec<usize>),
    /// Euclidean coordinates for each domain point.
    Coordinates(Vec<Vec<f64>>),
}

/// Certified bounds on the least distortion of a space into a host.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionReport {
    pub lower: f64,
    pub upper: f64,
    pub witness: Option<Witness>,
    pub certificate: Certificate,
    /// Search nodes or solver iterations spent.
    pub work: u64,
}

impl DistortionReport {
    pub fn is_exact(&self) -> bool {
        self.certificate == Certificate::Exhaustive
    }

    pub fn assignment(&self) -> Option<&[usize]> {
        match &self.witness {
            Some(Witness::Assignment(a)) => Some(a),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
struct SubtreeResult {
    best: f64,
    best_img: Option<Vec<usize>>,
    nodes: u64,
    exhausted: bool,
    frontier_min: f64,
}

struct Search<'a> {
    /// domain distances, reindexed by assignment order
    dx: Vec<f64>,
    k: usize,
    host: &'a FiniteMetricSpace,
    img: Vec<usize>,
    used: Vec<bool>,
    best: f64,
    best_img: Option<Vec<usize>>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    frontier_min: f64,
}

impl<'a> Search<'a> {
    fn new(dx: Vec<f64>, k: usize, host: &'a FiniteMetricSpace, incumbent: f64, budget: u64) -> Self {
        Self {
            dx,
            k,
            host,
            img: Vec::with_capacity(k),
            used: vec![false; host.len()],
            best: incumbent,
            best_img: None,
            nodes: 0,
            budget,
            exhausted: false,
            frontier_min: f64::INFINITY,
        }
    }

    /// Ratio range after tentatively placing the next point at `h`.
    #[inline]
    fn extend(&self, h: usize, lo: f64, hi: f64) -> (f64, f64) {
        let pos = self.img.len();
        let (mut lo, mut hi) = (lo, hi);
        for (q, &hq) in self.img.iter().enumerate() {
            let r = self.host.d(h, hq) / self.dx[pos * self.k + q];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }

    #[inline]
    fn bound(lo: f64, hi: f64) -> f64 {
        if lo.is_finite() {
            hi / lo
        } else {
            1.0
        }
    }

    #[inline]
    fn prunable(&self, bound: f64) -> bool {
        bound >= self.best * (1.0 - SEARCH_TOL)
    }

    fn dfs(&mut self, lo: f64, hi: f64) {
        if self.img.len() == self.k {
            let value = Self::bound(lo, hi);
            if value < self.best {
                self.best = value;
                self.best_img = Some(self.img.clone());
            }
            return;
        }
        for h in 0..self.host.len() {
            if self.used[h] {
                continue;
            }
            let (nlo, nhi) = self.extend(h, lo, hi);
            let b = Self::bound(nlo, nhi);
            if self.exhausted {
                if !self.prunable(b) {
                    self.frontier_min = self.frontier_min.min(b);
                }
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                if !self.prunable(b) {
                    self.frontier_min = self.frontier_min.min(b);
                }
                continue;
            }
            if self.prunable(b) {
                continue;
            }
            self.used[h] = true;
            self.img.push(h);
            self.dfs(nlo, nhi);
            self.img.pop();
            self.used[h] = false;
        }
    }

    fn run_from(mut self, first: usize) -> SubtreeResult {
        self.nodes = 1;
        self.used[first] = true;
        self.img.push(first);
        self.dfs(f64::INFINITY, 0.0);
        SubtreeResult {
            best: self.best,
            best_img: self.best_img,
            nodes: self.nodes,
            exhausted: self.exhausted,
            frontier_min: self.frontier_min,
        }
    }
}

/// Domain points in decreasing order of distance sum, ties by index.
pub fn most_constrained_order(x: &FiniteMetricSpace) -> Vec<usize> {
    let sums: Vec<f64> = (0..x.len()).map(|i| x.row(i).iter().sum()).collect();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| sums[b].total_cmp(&sums[a]).then(a.cmp(&b)));
    order
}

/// Least distortion of an injection `x -> h`, by branch-and-bound.
///
/// Domain points are placed most-constrained first; a partial map is pruned
/// once the ratio spread of its assigned pairs reaches the incumbent. The
/// subtree for the first host choice runs alone to seed an incumbent, then
/// the remaining first choices run independently in parallel from that seed,
/// so the report does not depend on the thread count.
///
/// When `budget` search nodes are not enough the report carries the best
/// incumbent as `upper` and the smallest unexplored partial bound as `lower`.
pub fn min_distortion_exact(
    x: &FiniteMetricSpace,
    h: &FiniteMetricSpace,
    budget: u64,
) -> Result<DistortionReport> {
    if x.len() > h.len() {
        return Err(Error::NoInjection {
            domain: x.len(),
            host: h.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: x.len(),
        });
    }
    let order = most_constrained_order(x);
    let k = order.len();
    let mut dx = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            dx[a * k + b] = x.d(order[a], order[b]);
        }
    }

    let seed = Search::new(dx.clone(), k, h, f64::INFINITY, budget).run_from(0);
    let remaining = budget.saturating_sub(seed.nodes);
    let others = (h.len() - 1) as u64;
    let share = remaining.checked_div(others).map_or(0, |s| s.max(1));
    let incumbent = seed.best;
    let rest: Vec<SubtreeResult> = (1..h.len())
        .into_par_iter()
        .map(|first| Search::new(dx.clone(), k, h, incumbent, share).run_from(first))
        .collect();

    let mut best = seed.best;
    let mut best_img = seed.best_img.clone();
    for r in &rest {
        if r.best < best && r.best_img.is_some() {
            best = r.best;
            best_img = r.best_img.clone();
        }
    }
    let all = std::iter::once(&seed).chain(rest.iter());
    let complete = all.clone().all(|r| !r.exhausted);
    let nodes: u64 = all.clone().map(|r| r.nodes).sum();
    let frontier = all
        .filter(|r| r.exhausted)
        .map(|r| r.frontier_min)
        .fold(f64::INFINITY, f64::min);

    let witness = best_img.map(|img| {
        let mut assignment = vec![0; k];
        for (pos, &hp) in img.iter().enumerate() {
            assignment[order[pos]] = hp;
        }
        Witness::Assignment(assignment)
    });
    if complete {
        Ok(DistortionReport {
            lower: best,
            upper: best,
            witness,
            certificate: Certificate::Exhaustive,
            work: nodes,
        })
    } else {
        Ok(DistortionReport {
            lower: frontier.min(best).max(1.0),
            upper: best,
            witness,
            certificate: Certificate::SearchBound,
            work: nodes,
        })
    }
}
