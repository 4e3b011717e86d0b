//! Functionals defined as a supremum over all maps from a cube or a discrete
//! torus into the host: `T_n`, `Gamma_n` and the metric en-cotype ratio.
//!
//! Each functional is a ratio `scale * N(f) / D(f)` of two sums of squared
//! host distances over fixed pairs of index points. Small instances are
//! solved by enumerating every map; larger ones by seeded random restarts
//! with steepest single-point ascent, which yields a lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

use super::linear::Ratio;
use super::{InvariantKind, InvariantValue};

/// Restarts used when a functional is too large to enumerate.
pub const HEURISTIC_RESTARTS: u64 = 64;
/// Seed of the heuristic restarts.
pub const HEURISTIC_SEED: u64 = 0x5eed_2024;
/// Largest index set handled (cube or torus points).
const MAX_INDEX_POINTS: usize = 1 << 16;

/// A pair term `(u, v)` feeding the numerator or the denominator.
#[derive(Clone, Copy, Debug)]
struct Term {
    other: u32,
    numerator: bool,
}

/// Pairs over an index set of `points` vertices; `scale * N / D` is the
/// squared ratio.
struct PairProblem {
    points: usize,
    /// terms whose larger endpoint is the vertex, partner strictly smaller
    lower: Vec<Vec<Term>>,
    /// every term touching the vertex, partner distinct
    incident: Vec<Vec<Term>>,
    scale: f64,
}

impl PairProblem {
    fn new(points: usize, scale: f64) -> Self {
        Self {
            points,
            lower: vec![Vec::new(); points],
            incident: vec![Vec::new(); points],
            scale,
        }
    }

    /// Adds the ordered pair `(u, v)`; pairs with `u == v` always vanish.
    fn add(&mut self, u: usize, v: usize, numerator: bool) {
        if u == v {
            return;
        }
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        self.lower[hi].push(Term {
            other: lo as u32,
            numerator,
        });
        self.incident[u].push(Term {
            other: v as u32,
            numerator,
        });
        self.incident[v].push(Term {
            other: u as u32,
            numerator,
        });
    }

    /// Numerator and denominator sums of a full map.
    fn sums(&self, h: &FiniteMetricSpace, f: &[usize]) -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for (v, terms) in self.lower.iter().enumerate() {
            for t in terms {
                let d = h.d(f[v], f[t.other as usize]);
                if t.numerator {
                    num += d * d;
                } else {
                    den += d * d;
                }
            }
        }
        (num, den)
    }

    /// Squared ratio of a map, `None` when the denominator vanishes.
    fn squared_ratio(&self, h: &FiniteMetricSpace, f: &[usize]) -> Option<f64> {
        let (num, den) = self.sums(h, f);
        (den > 0.0).then(|| self.scale * num / den)
    }
}

/// Best squared ratio and a map attaining it.
#[derive(Clone, Debug)]
struct Best {
    sq: f64,
    map: Option<Vec<usize>>,
}

impl Best {
    fn none() -> Self {
        Self {
            sq: f64::NEG_INFINITY,
            map: None,
        }
    }

    /// Keeps `self` on ties, so earlier candidates win.
    fn merge(self, other: Best) -> Best {
        if other.sq > self.sq {
            other
        } else {
            self
        }
    }
}

struct Enumerator<'a> {
    p: &'a PairProblem,
    h: &'a FiniteMetricSpace,
    f: Vec<usize>,
    best: Best,
}

impl Enumerator<'_> {
    fn dfs(&mut self, v: usize, num: f64, den: f64) {
        if v == self.p.points {
            if den > 0.0 {
                let sq = self.p.scale * num / den;
                if sq > self.best.sq {
                    self.best = Best {
                        sq,
                        map: Some(self.f.clone()),
                    };
                }
            }
            return;
        }
        for x in 0..self.h.len() {
            self.f[v] = x;
            let (mut n2, mut d2) = (num, den);
            let row = self.h.row(x);
            for t in &self.p.lower[v] {
                let d = row[self.f[t.other as usize]];
                if t.numerator {
                    n2 += d * d;
                } else {
                    d2 += d * d;
                }
            }
            self.dfs(v + 1, n2, d2);
        }
    }
}

/// Every map, split by the value of vertex 0 across threads.
fn enumerate(p: &PairProblem, h: &FiniteMetricSpace) -> Best {
    (0..h.len())
        .into_par_iter()
        .map(|x0| {
            let mut e = Enumerator {
                p,
                h,
                f: vec![x0; p.points],
                best: Best::none(),
            };
            e.dfs(1, 0.0, 0.0);
            e.best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Best::none(), Best::merge)
}

/// Steepest single-point ascent from `f`.
fn ascend(p: &PairProblem, h: &FiniteMetricSpace, f: &mut [usize]) -> Option<f64> {
    let (mut num, mut den) = p.sums(h, f);
    loop {
        let current = if den > 0.0 { p.scale * num / den } else { f64::NEG_INFINITY };
        let mut best_move: Option<(usize, usize, f64, f64)> = None;
        let mut best_sq = current;
        for v in 0..p.points {
            let old = f[v];
            let (mut n_old, mut d_old) = (0.0, 0.0);
            for t in &p.incident[v] {
                let d = h.d(old, f[t.other as usize]);
                if t.numerator {
                    n_old += d * d;
                } else {
                    d_old += d * d;
                }
            }
            for x in 0..h.len() {
                if x == old {
                    continue;
                }
                let (mut n_new, mut d_new) = (0.0, 0.0);
                for t in &p.incident[v] {
                    let d = h.d(x, f[t.other as usize]);
                    if t.numerator {
                        n_new += d * d;
                    } else {
                        d_new += d * d;
                    }
                }
                let n2 = num - n_old + n_new;
                let d2 = den - d_old + d_new;
                if d2 > 1e-12 * den.max(1e-300) {
                    let sq = p.scale * n2 / d2;
                    let improves = if best_sq.is_finite() {
                        sq > best_sq * (1.0 + 1e-12)
                    } else {
                        sq.is_finite()
                    };
                    if improves {
                        best_sq = sq;
                        best_move = Some((v, x, n2, d2));
                    }
                }
            }
        }
        match best_move {
            Some((v, x, _, _)) => {
                f[v] = x;
                // recompute rather than accumulate rounding
                (num, den) = p.sums(h, f);
            }
            None => return p.squared_ratio(h, f),
        }
    }
}

fn heuristic(p: &PairProblem, h: &FiniteMetricSpace, restarts: u64, seed: u64) -> Best {
    (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let mut f: Vec<usize> = (0..p.points).map(|_| rng.gen_range(0..h.len())).collect();
            match ascend(p, h, &mut f) {
                Some(sq) => Best { sq, map: Some(f) },
                None => Best::none(),
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Best::none(), Best::merge)
}

/// `|H|^points`, saturating.
fn map_count(host: usize, points: usize) -> u128 {
    let mut c: u128 = 1;
    for _ in 0..points {
        c = c.saturating_mul(host as u128);
    }
    c
}

/// Sup of the ratio over all maps; exhaustive when `|H|^points <= budget`.
fn solve(
    p: &PairProblem,
    h: &FiniteMetricSpace,
    budget: u64,
    kind: InvariantKind,
    n: u32,
    m: Option<u32>,
) -> InvariantValue {
    let exact = map_count(h.len(), p.points) <= u128::from(budget);
    let best = if exact {
        enumerate(p, h)
    } else {
        heuristic(p, h, HEURISTIC_RESTARTS, HEURISTIC_SEED)
    };
    let (value, witness) = match best.map {
        Some(map) => (best.sq.max(0.0).sqrt(), map),
        // every map has a vanishing denominator: only constant maps exist
        None => (0.0, vec![0; p.points]),
    };
    InvariantValue {
        kind,
        n,
        m,
        value,
        upper: if exact { value } else { 1.0 },
        witness,
        exact,
    }
}

fn cube_problem(n: u32) -> Result<PairProblem> {
    if n < 1 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if n > 16 {
        return Err(Error::SizeCap(format!("cube dimension {n} exceeds 16")));
    }
    let points = 1usize << n;
    let all = points - 1;
    let mut p = PairProblem::new(points, 1.0 / f64::from(n));
    for x in 0..points {
        p.add(x, x ^ all, true);
        for i in 0..n {
            p.add(x, x ^ (1 << i), false);
        }
    }
    Ok(p)
}

/// Torus points as base-`m` digits, first coordinate least significant.
struct Torus {
    n: u32,
    m: usize,
    points: usize,
}

impl Torus {
    fn new(n: u32, m: u32) -> Result<Self> {
        if n < 1 || m < 1 {
            return Err(Error::Parameter("n and m must be positive".into()));
        }
        let points = (m as usize)
            .checked_pow(n)
            .filter(|&p| p <= MAX_INDEX_POINTS)
            .ok_or_else(|| Error::SizeCap(format!("{m}^{n} torus points exceed {MAX_INDEX_POINTS}")))?;
        Ok(Self {
            n,
            m: m as usize,
            points,
        })
    }

    fn digits(&self, mut x: usize) -> Vec<usize> {
        (0..self.n)
            .map(|_| {
                let d = x % self.m;
                x /= self.m;
                d
            })
            .collect()
    }

    fn index(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |acc, &d| acc * self.m + d)
    }

    /// `x + shift` with every coordinate taken modulo `m`.
    fn add(&self, x: usize, shift: &[i64]) -> usize {
        let m = self.m as i64;
        let moved: Vec<usize> = self
            .digits(x)
            .iter()
            .zip(shift)
            .map(|(&d, &s)| (d as i64 + s).rem_euclid(m) as usize)
            .collect();
        self.index(&moved)
    }

    /// `x + s e_j` for every point and coordinate.
    fn add_axis_terms(&self, p: &mut PairProblem, s: i64, numerator: bool) {
        for x in 0..self.points {
            for j in 0..self.n as usize {
                let mut shift = vec![0; self.n as usize];
                shift[j] = s;
                p.add(x, self.add(x, &shift), numerator);
            }
        }
    }

    /// `x + eps` for every point and every `eps` in `values^n`.
    fn add_sign_terms(&self, p: &mut PairProblem, values: &[i64], numerator: bool) -> usize {
        let k = values.len();
        let patterns = k.pow(self.n);
        for pat in 0..patterns {
            let mut rest = pat;
            let eps: Vec<i64> = (0..self.n)
                .map(|_| {
                    let v = values[rest % k];
                    rest /= k;
                    v
                })
                .collect();
            for x in 0..self.points {
                p.add(x, self.add(x, &eps), numerator);
            }
        }
        patterns
    }
}

/// Exponents of the grid inequality: the left side shifts by `n^shift e_j`
/// and the right side carries the factor `n^factor * n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaExponents {
    pub shift: u32,
    pub factor: u32,
}

impl Default for GammaExponents {
    /// Shift `n e_j` and factor `n^2 * n`.
    fn default() -> Self {
        Self { shift: 1, factor: 2 }
    }
}

impl GammaExponents {
    /// Shift `n^3 e_j` and factor `n^6 * n`.
    pub fn cubed() -> Self {
        Self { shift: 3, factor: 6 }
    }
}

fn gamma_problem(n: u32, m: u32, exps: GammaExponents) -> Result<PairProblem> {
    if !m.is_multiple_of(2) {
        return Err(Error::Parameter(format!("m must be even, got {m}")));
    }
    let torus = Torus::new(n, m)?;
    let shift = (u64::from(n).pow(exps.shift) % u64::from(m)) as i64;
    let scale = 2f64.powi(n as i32) / f64::from(n).powi(exps.factor as i32 + 1);
    let mut p = PairProblem::new(torus.points, scale);
    torus.add_axis_terms(&mut p, shift, true);
    torus.add_sign_terms(&mut p, &[1, -1], false);
    Ok(p)
}

fn metric_cotype_problem(n: u32, m: u32, q: f64) -> Result<PairProblem> {
    if !m.is_multiple_of(2) {
        return Err(Error::Parameter(format!("m must be even, got {m}")));
    }
    if !(q >= 2.0) {
        return Err(Error::Parameter(format!("q must be at least 2, got {q}")));
    }
    let torus = Torus::new(n, m)?;
    let nf = f64::from(n);
    let scale = 3f64.powi(n as i32) / (f64::from(m).powi(2) * nf.powf(1.0 - 2.0 / q));
    let mut p = PairProblem::new(torus.points, scale);
    torus.add_axis_terms(&mut p, i64::from(m / 2), true);
    torus.add_sign_terms(&mut p, &[0, 1, -1], false);
    Ok(p)
}

/// `T_n(H)`: the sup over `f: {0,1}^n -> H` of
/// `sqrt(Avg d(f x, f(x+1))^2 / (n * sum_i Avg d(f x, f(x+e_i))^2))`.
///
/// Cube points are indexed by their bits, coordinate `i` at bit `i`. Maps
/// with vanishing denominator are skipped; when `|H|^(2^n)` exceeds
/// `budget` the value is a heuristic lower bound paired with the upper
/// bound 1.
pub fn type_constant(h: &FiniteMetricSpace, n: u32, budget: u64) -> Result<InvariantValue> {
    let p = cube_problem(n)?;
    Ok(solve(&p, h, budget, InvariantKind::Type, n, None))
}

/// The `T_n` ratio of one map from the cube; `None` for a vanishing
/// denominator.
pub fn type_ratio_of_map(h: &FiniteMetricSpace, n: u32, f: &[usize]) -> Result<Option<f64>> {
    let p = cube_problem(n)?;
    check_map(&p, h, f)?;
    Ok(p.squared_ratio(h, f).map(f64::sqrt))
}

/// Per-`m` value of `Gamma_n(H)` with the default exponents.
pub fn gamma_constant(h: &FiniteMetricSpace, n: u32, m: u32, budget: u64) -> Result<InvariantValue> {
    gamma_constant_with(h, n, m, budget, GammaExponents::default())
}

/// The sup over `f: Z_m^n -> H` of
/// `sqrt(sum_j Avg_x d(f x, f(x + n^a e_j))^2 / (n^b n Avg_eps Avg_x d(f x, f(x+eps))^2))`
/// with `eps` over `{-1,1}^n` and all shifts modulo `m`.
pub fn gamma_constant_with(
    h: &FiniteMetricSpace,
    n: u32,
    m: u32,
    budget: u64,
    exps: GammaExponents,
) -> Result<InvariantValue> {
    let p = gamma_problem(n, m, exps)?;
    Ok(solve(&p, h, budget, InvariantKind::Gamma, n, Some(m)))
}

/// The `Gamma_n` ratio (default exponents) of one map from `Z_m^n`.
pub fn gamma_ratio_of_map(h: &FiniteMetricSpace, n: u32, m: u32, f: &[usize]) -> Result<Option<f64>> {
    let p = gamma_problem(n, m, GammaExponents::default())?;
    check_map(&p, h, f)?;
    Ok(p.squared_ratio(h, f).map(f64::sqrt))
}

/// Least `Gamma~` for one map `f: Z_m^n -> H`:
/// `sqrt(sum_j Avg_x d(f x, f(x + m/2 e_j))^2 / (m^2 n^(1-2/q) Avg_eps Avg_x d(f x, f(x+eps))^2))`
/// with `eps` over `{0,-1,1}^n`. A constant map gives 0.
pub fn metric_en_cotype_ratio(
    f: &[usize],
    h: &FiniteMetricSpace,
    n: u32,
    m: u32,
    q: f64,
) -> Result<Ratio> {
    let p = metric_cotype_problem(n, m, q)?;
    check_map(&p, h, f)?;
    let (num, den) = p.sums(h, f);
    Ok(if den > 0.0 {
        Ratio::Finite((p.scale * num / den).sqrt())
    } else if num == 0.0 {
        Ratio::Finite(0.0)
    } else {
        Ratio::Unbounded
    })
}

/// Sup of [`metric_en_cotype_ratio`] over all maps `Z_m^n -> H`.
pub fn metric_en_cotype_constant(
    h: &FiniteMetricSpace,
    n: u32,
    m: u32,
    q: f64,
    budget: u64,
) -> Result<InvariantValue> {
    let p = metric_cotype_problem(n, m, q)?;
    Ok(solve(&p, h, budget, InvariantKind::MetricEnCotype, n, Some(m)))
}

fn check_map(p: &PairProblem, h: &FiniteMetricSpace, f: &[usize]) -> Result<()> {
    if f.len() != p.points {
        return Err(Error::Parameter(format!(
            "map has {} entries for {} index points",
            f.len(),
            p.points
        )));
    }
    if let Some(&bad) = f.iter().find(|&&x| x >= h.len()) {
        return Err(Error::Parameter(format!("map value {bad} outside the host")));
    }
    Ok(())
}
