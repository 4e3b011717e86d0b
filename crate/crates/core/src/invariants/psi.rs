//! The path functional `Psi_n(H)`: the best constant in
//! `d(f(0), f(n)) <= Psi * n * max_i d(f(i), f(i+1))` over all maps
//! `f: {0..n} -> H`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::metric::{distortion, Embedding, FiniteMetricSpace};

use super::{InvariantKind, InvariantValue};

/// `d(w_0, w_n) / (n * max step)` of a walk with `n + 1` points; a constant
/// walk gives 0.
pub fn psi_of_walk(h: &FiniteMetricSpace, walk: &[usize]) -> Result<f64> {
    if walk.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: walk.len(),
        });
    }
    if let Some(&bad) = walk.iter().find(|&&p| p >= h.len()) {
        return Err(Error::Parameter(format!("walk point {bad} outside the host")));
    }
    let n = (walk.len() - 1) as f64;
    let step = walk
        .windows(2)
        .map(|w| h.d(w[0], w[1]))
        .fold(0.0_f64, f64::max);
    if step == 0.0 {
        return Ok(0.0);
    }
    Ok(h.d(walk[0], walk[walk.len() - 1]) / (n * step))
}

/// Hop distances from `src` in the graph of host pairs at distance `<= t`;
/// `parent` receives the breadth-first tree.
fn bfs(h: &FiniteMetricSpace, t: f64, src: usize, hops: &mut [u32], parent: &mut [usize]) {
    hops.fill(u32::MAX);
    hops[src] = 0;
    parent[src] = src;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let row = h.row(u);
        for v in 0..h.len() {
            if hops[v] == u32::MAX && row[v] <= t {
                hops[v] = hops[u] + 1;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
}

/// Exact `Psi_n(H)` by a threshold sweep.
///
/// For every distinct host distance `t` the pairs reachable in at most `n`
/// hops of length `<= t` are found by breadth-first search, and the best
/// `d(u, v) / (n t)` is kept. Walks may repeat points, so a shorter path is
/// padded to `n` steps by staying put; the optimum has its longest step equal
/// to some host distance, so the sweep is exact. The witness is the first
/// optimal walk found (thresholds ascending, then `u`, then `v`).
pub fn psi_constant(h: &FiniteMetricSpace, n: u32) -> Result<InvariantValue> {
    if h.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: h.len(),
        });
    }
    if n < 1 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let nf = f64::from(n);
    let size = h.len();
    let mut hops = vec![0u32; size];
    let mut parent = vec![0usize; size];
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize, 0.0_f64);
    for t in h.distinct_distances() {
        for u in 0..size {
            bfs(h, t, u, &mut hops, &mut parent);
            for v in 0..size {
                if hops[v] <= n {
                    let r = h.d(u, v) / (nf * t);
                    if r > best.0 {
                        best = (r, u, v, t);
                    }
                }
            }
        }
    }
    let (value, u, v, t) = best;
    bfs(h, t, u, &mut hops, &mut parent);
    let mut walk = vec![v];
    while *walk.last().unwrap() != u {
        let p = parent[*walk.last().unwrap()];
        walk.push(p);
    }
    walk.reverse();
    walk.resize(n as usize + 1, v);
    Ok(InvariantValue {
        kind: InvariantKind::Psi,
        n,
        m: None,
        value,
        upper: value,
        witness: walk,
        exact: true,
    })
}

/// Finite-scale rigidity check: when `Psi_n(H) >= 1 - epsilon`, the optimal
/// walk, viewed as an embedding of the path `P_n`, has distortion at most
/// `1 + 2 epsilon n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiRigidity {
    pub psi: f64,
    pub epsilon: f64,
    pub walk: Vec<usize>,
    /// Distortion of the walk; `None` when it repeats a point.
    pub distortion: Option<f64>,
    pub bound: f64,
}

impl PsiRigidity {
    /// True when the walk is injective and within the bound (up to `1e-9`),
    /// or when `epsilon >= 1/n`, where repeated points are possible and the
    /// statement says nothing.
    pub fn holds(&self) -> bool {
        let n = (self.walk.len() - 1) as f64;
        match self.distortion {
            Some(d) => d <= self.bound + 1e-9,
            None => self.epsilon * n >= 1.0 - 1e-12,
        }
    }
}

pub fn psi_rigidity(h: &FiniteMetricSpace, n: u32) -> Result<PsiRigidity> {
    let v = psi_constant(h, n)?;
    let epsilon = (1.0 - v.value).max(0.0);
    let domain = crate::generators::path(n as usize)?;
    let e = Embedding::new(&domain, h, &v.witness)?;
    let distortion = if e.is_injective() {
        Some(distortion(&e)?)
    } else {
        None
    };
    Ok(PsiRigidity {
        psi: v.value,
        epsilon,
        walk: v.witness,
        distortion,
        bound: 1.0 + 2.0 * epsilon * f64::from(n),
    })
}
