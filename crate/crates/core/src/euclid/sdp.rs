//! Least Euclidean distortion by semidefinite programming.
//!
//! With `Q` the Gram matrix of an embedding and
//! `Delta_ij(Q) = Q_ii + Q_jj - 2 Q_ij` the squared image distances, the
//! squared distortion is the optimum of
//!
//! ```text
//! minimize s  subject to  Q >= 0 (PSD),  sum(Q) = 0,
//!                         d_ij^2 <= Delta_ij(Q) <= s d_ij^2.
//! ```
//!
//! The problem is put in standard form (a PSD block plus nonnegative
//! variables `s`, `a_ij`, `b_ij` for the slacks) and solved by an alternating
//! direction method on the dual. The normal operator `A A*` has the
//! structure of the pair graph of the complete graph, so it is inverted in
//! closed form. Bounds do not rely on convergence:
//!
//! * the upper bound is the distortion of the coordinates read off the
//!   current `Q` after clamping negative eigenvalues;
//! * the lower bound comes from the current dual weights: for weights
//!   `u, v >= 0` with `L(v) - L(u)` PSD (`L` the weighted Laplacian), every
//!   embedding satisfies `D^2 >= sum u d^2 / sum v d^2`. The weights are
//!   repaired to make the Laplacian condition hold before evaluating.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::exact::{Certificate, DistortionReport, Witness};
use crate::metric::{distortion, index_labels, Embedding, FiniteMetricSpace};

/// Largest space accepted.
pub const MAX_L2_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2Options {
    /// Stop once `upper - lower <= tol * upper`.
    pub tol: f64,
    pub max_iterations: u64,
    /// Iterations between certificate evaluations.
    pub check_every: u64,
}

impl Default for L2Options {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iterations: 100_000,
            check_every: 20,
        }
    }
}

impl L2Options {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// A Gram matrix `Q` whose squared distances satisfy
/// `d^2 <= Delta_ij(Q) <= D^2 d^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramCertificate {
    pub matrix: DMatrix<f64>,
    pub distortion: f64,
}

impl GramCertificate {
    /// Checks the certificate against `x` with absolute slack `tol` on
    /// eigenvalues and relative slack `tol` on the distance bounds.
    pub fn verify(&self, x: &FiniteMetricSpace, tol: f64) -> bool {
        let n = x.len();
        if self.matrix.nrows() != n || self.matrix.ncols() != n {
            return false;
        }
        let eig = SymmetricEigen::new(self.matrix.clone()).eigenvalues;
        let scale = eig.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if eig.iter().any(|&v| v < -tol * scale) {
            return false;
        }
        let d2max = self.distortion * self.distortion;
        for i in 0..n {
            for j in (i + 1)..n {
                let q = &self.matrix;
                let delta = q[(i, i)] + q[(j, j)] - 2.0 * q[(i, j)];
                let d2 = x.d(i, j).powi(2);
                if delta < d2 * (1.0 - tol) || delta > d2max * d2 * (1.0 + tol) {
                    return false;
                }
            }
        }
        true
    }

    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        coordinates_of_gram(&self.matrix)
    }
}

/// Result of [`min_distortion_l2`].
#[derive(Clone, Debug)]
pub struct L2Solution {
    pub report: DistortionReport,
    /// Gram matrix of the embedding realizing `report.upper`.
    pub gram: GramCertificate,
    /// Dual weights `(i, j, u_ij, v_ij)` behind `report.lower`.
    pub dual_weights: Vec<(usize, usize, f64, f64)>,
    /// Whether the requested gap was reached within the iteration cap.
    pub converged: bool,
    pub iterations: u64,
}

/// Rows of `V sqrt(max(Lambda, 0))` for the eigendecomposition of `q`.
pub fn coordinates_of_gram(q: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let eig = SymmetricEigen::new(q.clone());
    let n = q.nrows();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt())
                .collect()
        })
        .collect()
}

/// Pair bookkeeping for a space of `n` points.
struct Pairs {
    n: usize,
    ends: Vec<(usize, usize)>,
}

impl Pairs {
    fn new(n: usize) -> Self {
        let ends = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        Self { n, ends }
    }

    fn len(&self) -> usize {
        self.ends.len()
    }

    /// `Delta_p(Q)` for every pair.
    fn deltas(&self, q: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.ends
                .iter()
                .map(|&(i, j)| q[(i, i)] + q[(j, j)] - 2.0 * q[(i, j)]),
        )
    }

    /// `sum_p w_p E_p`, the weighted Laplacian.
    fn laplacian(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for (p, &(i, j)) in self.ends.iter().enumerate() {
            let v = w[p];
            l[(i, i)] += v;
            l[(j, j)] += v;
            l[(i, j)] -= v;
            l[(j, i)] -= v;
        }
        l
    }

    /// `(K z)_p = z_i + z_j`.
    fn k(&self, z: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.ends.iter().map(|&(i, j)| z[i] + z[j]))
    }

    /// `(K^T u)_i = sum of u_p over pairs containing i`.
    fn kt(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut z = DVector::zeros(self.n);
        for (p, &(i, j)) in self.ends.iter().enumerate() {
            z[i] += u[p];
            z[j] += u[p];
        }
        z
    }

    /// `(2 G + I)^{-1} u` where `G_pq = <E_p, E_q> = (K K^T + 2 I)_pq`.
    ///
    /// `2G + I = 5 (I + (2/5) K K^T)`, inverted with the Woodbury identity
    /// and `K^T K = (n - 2) I + 1 1^T`.
    fn w_solve(&self, u: &DVector<f64>) -> DVector<f64> {
        let beta = self.n as f64 + 0.5;
        let z = self.kt(u);
        let total = z.sum();
        let inner = (z - DVector::from_element(self.n, total / (beta + self.n as f64))) / beta;
        (u - self.k(&inner)) / 5.0
    }
}

/// Standard-form problem data and iterates, in normalized units.
struct Admm<'a> {
    pairs: &'a Pairs,
    d2: DVector<f64>,
    /// primal: Q, s, a, b
    q: DMatrix<f64>,
    s: f64,
    a: DVector<f64>,
    b: DVector<f64>,
    /// dual slack
    sq: DMatrix<f64>,
    ss: f64,
    sa: DVector<f64>,
    sb: DVector<f64>,
    /// multipliers of the lower rows, upper rows, centering row
    y1: DVector<f64>,
    y2: DVector<f64>,
    mu: f64,
    dd: f64,
    dwd: f64,
    wd: DVector<f64>,
}

impl<'a> Admm<'a> {
    fn new(pairs: &'a Pairs, d2: DVector<f64>) -> Self {
        let n = pairs.n;
        let m = pairs.len();
        let wd = pairs.w_solve(&d2);
        Self {
            pairs,
            dd: d2.dot(&d2),
            dwd: d2.dot(&wd),
            wd,
            d2,
            q: DMatrix::zeros(n, n),
            s: 0.0,
            a: DVector::zeros(m),
            b: DVector::zeros(m),
            sq: DMatrix::zeros(n, n),
            ss: 0.0,
            sa: DVector::zeros(m),
            sb: DVector::zeros(m),
            y1: DVector::zeros(m),
            y2: DVector::zeros(m),
            mu: 1.0,
        }
    }

    /// `A(X)` for `X = (Q, s, a, b)`: lower rows, upper rows, centering.
    fn apply_a(
        &self,
        q: &DMatrix<f64>,
        s: f64,
        a: &DVector<f64>,
        b: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>, f64) {
        let delta = self.pairs.deltas(q);
        let lower = &delta - a;
        let upper = &self.d2 * s - &delta - b;
        (lower, upper, q.sum())
    }

    /// Solves `A A* y = r` for the stacked rows.
    fn solve_normal(&self, r1: &DVector<f64>, r2: &DVector<f64>, r0: f64) -> (DVector<f64>, DVector<f64>, f64) {
        let n2 = (self.pairs.n * self.pairs.n) as f64;
        let sum = r1 + r2;
        let diff = r1 - r2;
        let w_diff = self.pairs.w_solve(&diff);
        let c = (self.d2.dot(&sum) - self.d2.dot(&w_diff)) / (2.0 + self.dd + self.dwd);
        let sigma = &sum - &self.d2 * c;
        let delta = w_diff + &self.wd * c;
        let y1 = (&sigma + &delta) * 0.5;
        let y2 = (&sigma - &delta) * 0.5;
        (y1, y2, r0 / n2)
    }

    /// One iteration.
    fn step(&mut self) {
        let mu = self.mu;
        let (l, u, c) = self.apply_a(&self.q, self.s, &self.a, &self.b);
        let (sl, su, sc) = self.apply_a(&self.sq, self.ss - 1.0, &self.sa, &self.sb);
        let r1 = -((l - &self.d2) * mu + sl);
        let r2 = -(u * mu + su);
        let r0 = -(c * mu + sc);
        let (y1, y2, y0) = self.solve_normal(&r1, &r2, r0);

        let n = self.pairs.n;
        let lap = self.pairs.laplacian(&(&y1 - &y2));
        let vq = -(lap + DMatrix::from_element(n, n, y0)) - &self.q * mu;
        let vs = 1.0 - y2.dot(&self.d2) - mu * self.s;
        let va = &y1 - &self.a * mu;
        let vb = &y2 - &self.b * mu;

        let eig = SymmetricEigen::new(vq.clone());
        let mut pos = DMatrix::zeros(n, n);
        for k in 0..n {
            let lam = eig.eigenvalues[k];
            if lam > 0.0 {
                let v = eig.eigenvectors.column(k);
                pos += v * v.transpose() * lam;
            }
        }
        let new_q = (&pos - &vq) / mu;
        let new_s = (vs.max(0.0) - vs) / mu;
        let new_a = (va.map(|v| v.max(0.0)) - &va) / mu;
        let new_b = (vb.map(|v| v.max(0.0)) - &vb) / mu;

        self.sq = pos;
        self.ss = vs.max(0.0);
        self.sa = va.map(|v| v.max(0.0));
        self.sb = vb.map(|v| v.max(0.0));
        self.q = new_q;
        self.s = new_s;
        self.a = new_a;
        self.b = new_b;
        self.y1 = y1;
        self.y2 = y2;
    }
}

/// Distortion and rescaled Gram matrix of the embedding read off `q`.
fn upper_from_gram(
    x: &FiniteMetricSpace,
    pairs: &Pairs,
    q: &DMatrix<f64>,
) -> Option<(f64, GramCertificate)> {
    let eig = SymmetricEigen::new(q.clone());
    let n = q.nrows();
    let mut clamped = DMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            clamped += v * v.transpose() * lam;
        }
    }
    let deltas = pairs.deltas(&clamped);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for (p, &(i, j)) in pairs.ends.iter().enumerate() {
        let r = deltas[p] / x.d(i, j).powi(2);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if !(lo > 0.0) || !hi.is_finite() {
        return None;
    }
    let value = (hi / lo).sqrt();
    Some((
        value,
        GramCertificate {
            matrix: clamped / lo,
            distortion: value,
        },
    ))
}

/// Lower bound `sqrt(sum u d^2 / sum v d^2)` from dual weights on the pairs
/// `i < j` (lexicographic), after clipping negative weights and adding a
/// uniform weight to `v` so that `L(v) - L(u)` is PSD. Never below 1.
pub fn certified_dual_bound(x: &FiniteMetricSpace, u: &[f64], v: &[f64]) -> Result<f64> {
    let pairs = Pairs::new(x.len());
    if u.len() != pairs.len() || v.len() != pairs.len() {
        return Err(Error::Parameter(format!(
            "expected {} pair weights, got {} and {}",
            pairs.len(),
            u.len(),
            v.len()
        )));
    }
    let n = x.len();
    let up = DVector::from_iterator(pairs.len(), u.iter().map(|w| w.max(0.0)));
    let vp = DVector::from_iterator(pairs.len(), v.iter().map(|w| w.max(0.0)));
    let lm = pairs.laplacian(&vp) - pairs.laplacian(&up);
    let norm = lm.norm();
    // lift the all-ones direction (always in the kernel) above the spectrum
    let lift = (1.0 + norm) / n as f64;
    let shifted = &lm + DMatrix::from_element(n, n, lift);
    let lambda_min = SymmetricEigen::new(shifted).eigenvalues.min();
    let eps = (-lambda_min).max(0.0) + 1e-12 * (1.0 + norm);
    let extra = eps / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (p, &(i, j)) in pairs.ends.iter().enumerate() {
        let d2 = x.d(i, j).powi(2);
        num += up[p] * d2;
        den += (vp[p] + extra) * d2;
    }
    Ok((num / den).sqrt().max(1.0))
}

/// Certified bracket on the least distortion of `x` into Euclidean space.
///
/// Runs the alternating direction method until the certified gap is at
/// most `tol * upper` or the iteration cap is hit; in the latter case the
/// best bounds found are returned with `converged = false`.
pub fn min_distortion_l2(x: &FiniteMetricSpace, opts: L2Options) -> Result<L2Solution> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if n > MAX_L2_POINTS {
        return Err(Error::SizeCap(format!("{n} points exceed {MAX_L2_POINTS}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let pairs = Pairs::new(n);
    // normalize to unit mean squared distance
    let raw: Vec<f64> = pairs.ends.iter().map(|&(i, j)| x.d(i, j).powi(2)).collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let d2 = DVector::from_iterator(pairs.len(), raw.iter().map(|v| v / mean));
    // the step parameter stays at 1 on normalized data; adapting it made
    // the iteration cycle on tree metrics
    let mut admm = Admm::new(&pairs, d2);

    let mut best_upper: Option<(f64, GramCertificate)> = None;
    let mut best_lower = (1.0, DVector::zeros(pairs.len()), DVector::zeros(pairs.len()));
    let mut iterations = 0;
    let mut converged = false;
    let check = opts.check_every.max(1);
    while iterations < opts.max_iterations {
        admm.step();
        iterations += 1;
        if iterations % check == 0 || iterations == opts.max_iterations {
            if let Some((value, cert)) = upper_from_gram(x, &pairs, &admm.q) {
                if best_upper.as_ref().is_none_or(|(b, _)| value < *b) {
                    best_upper = Some((value, cert));
                }
            }
            let lower = certified_dual_bound(x, admm.y1.as_slice(), admm.y2.as_slice())?;
            if lower > best_lower.0 {
                best_lower = (lower, admm.y1.clone(), admm.y2.clone());
            }
            if let Some((upper, _)) = &best_upper {
                if upper - best_lower.0 <= opts.tol * upper {
                    converged = true;
                    break;
                }
            }
        }
    }

    let (upper, gram) = match best_upper {
        Some(b) => b,
        None => {
            return Err(Error::Budget(format!(
                "no injective embedding found in {iterations} iterations"
            )))
        }
    };
    let lower = best_lower.0.min(upper);
    let coords = gram.coordinates();
    let dual_weights = pairs
        .ends
        .iter()
        .enumerate()
        .map(|(p, &(i, j))| (i, j, best_lower.1[p], best_lower.2[p]))
        .collect();
    Ok(L2Solution {
        report: DistortionReport {
            lower,
            upper,
            witness: Some(Witness::Coordinates(coords)),
            certificate: Certificate::SemidefiniteDual,
            work: iterations,
        },
        gram,
        dual_weights,
        converged,
        iterations,
    })
}

/// Euclidean metric on a list of coordinate vectors.
pub fn euclidean_space(coords: &[Vec<f64>]) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::from_fn(index_labels(coords.len()), |i, j| {
        coords[i]
            .iter()
            .zip(&coords[j])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    })
}

/// Distortion of the coordinate witness, recomputed from scratch.
pub fn witness_distortion(x: &FiniteMetricSpace, coords: &[Vec<f64>]) -> Result<f64> {
    let host = euclidean_space(coords)?;
    let id: Vec<usize> = (0..x.len()).collect();
    distortion(&Embedding::new(x, &host, &id)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{binary_tree, hamming_cube, path};

    fn dense_g(pairs: &Pairs) -> DMatrix<f64> {
        let m = pairs.len();
        DMatrix::from_fn(m, m, |p, q| {
            let (a, b) = pairs.ends[p];
            let (c, d) = pairs.ends[q];
            let shared = [a == c, a == d, b == c, b == d].iter().filter(|&&t| t).count();
            match shared {
                2 => 4.0,
                1 => 1.0,
                _ => 0.0,
            }
        })
    }

    #[test]
    fn structured_solve_matches_dense() {
        for n in [2, 3, 5, 8] {
            let pairs = Pairs::new(n);
            let m = pairs.len();
            let g = dense_g(&pairs);
            let w = (&g * 2.0 + DMatrix::identity(m, m)).try_inverse().unwrap();
            let u = DVector::from_fn(m, |p, _| (p as f64 * 0.37).sin());
            assert!((pairs.w_solve(&u) - &w * &u).norm() <= 1e-10);

            // the full normal operator
            let d2 = DVector::from_fn(m, |p, _| 1.0 + p as f64 * 0.1);
            let admm = Admm::new(&pairs, d2.clone());
            let id = DMatrix::<f64>::identity(m, m);
            let mut aat = DMatrix::zeros(2 * m, 2 * m);
            aat.view_mut((0, 0), (m, m)).copy_from(&(&g + &id));
            aat.view_mut((0, m), (m, m)).copy_from(&(-&g));
            aat.view_mut((m, 0), (m, m)).copy_from(&(-&g));
            aat.view_mut((m, m), (m, m))
                .copy_from(&(&g + &id + &d2 * d2.transpose()));
            let r1 = DVector::from_fn(m, |p, _| (p as f64).cos());
            let r2 = DVector::from_fn(m, |p, _| 0.5 - p as f64 * 0.01);
            let (y1, y2, y0) = admm.solve_normal(&r1, &r2, 3.0);
            let y = DVector::from_iterator(2 * m, y1.iter().chain(y2.iter()).copied());
            let r = DVector::from_iterator(2 * m, r1.iter().chain(r2.iter()).copied());
            assert!((&aat * y - r).norm() <= 1e-9);
            assert!((y0 * (n * n) as f64 - 3.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn path_is_isometric() {
        let s = min_distortion_l2(&path(5).unwrap(), L2Options::with_tol(1e-6)).unwrap();
        assert!(s.report.lower <= s.report.upper);
        assert!((s.report.upper - 1.0).abs() <= 1e-5, "{:?}", s.report);
        assert_eq!(s.report.lower, 1.0);
    }

    #[test]
    fn four_cycle_is_sqrt_two() {
        let s = min_distortion_l2(&hamming_cube(2).unwrap(), L2Options::default()).unwrap();
        let r = &s.report;
        assert!(s.converged);
        assert!(r.lower <= 2f64.sqrt() + 1e-9 && r.upper >= 2f64.sqrt() - 1e-9, "{r:?}");
        assert!(r.upper - r.lower <= 1e-3);
    }

    #[test]
    fn certificate_and_witness_are_consistent() {
        let x = binary_tree(2).unwrap();
        let s = min_distortion_l2(&x, L2Options::default()).unwrap();
        assert!(s.gram.verify(&x, 1e-9));
        let Some(Witness::Coordinates(c)) = &s.report.witness else {
            panic!("no coordinates")
        };
        let d = witness_distortion(&x, c).unwrap();
        assert!((d - s.report.upper).abs() <= 1e-6);
        let u: Vec<f64> = s.dual_weights.iter().map(|w| w.2).collect();
        let v: Vec<f64> = s.dual_weights.iter().map(|w| w.3).collect();
        assert_eq!(certified_dual_bound(&x, &u, &v).unwrap(), s.report.lower);
    }

    #[test]
    fn cube_dual_weights_give_sqrt_n() {
        // diagonals contract, edges expand
        let x = hamming_cube(3).unwrap();
        let pairs = Pairs::new(8);
        let u: Vec<f64> = pairs.ends.iter().map(|&(i, j)| if i ^ j == 7 { 1.0 } else { 0.0 }).collect();
        let v: Vec<f64> = pairs
            .ends
            .iter()
            .map(|&(i, j)| if (i ^ j).count_ones() == 1 { 1.0 } else { 0.0 })
            .collect();
        let b = certified_dual_bound(&x, &u, &v).unwrap();
        assert!((b - 3f64.sqrt()).abs() <= 1e-9);
    }
}
