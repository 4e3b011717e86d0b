use dichotomy_core::euclid::{min_distortion_l2, poincare_lower_bound, witness_distortion, L2Options};
use dichotomy_core::generators::{binary_tree, path};
use dichotomy_core::metric::index_labels;
use dichotomy_core::FiniteMetricSpace;

fn star(leaves: usize) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(index_labels(leaves + 1), |a, b| match (a, b) {
        _ if a == b => 0.0,
        (0, _) | (_, 0) => 1.0,
        _ => 2.0,
    })
    .unwrap()
}

/// Upper bound: centre at the origin, leaves on an equilateral triangle of
/// circumradius 1. Lower bound: in a Hilbert space
/// `sum_{i<j} |x_i - x_j|^2 = 3 sum_i |x_i - m|^2 <= 3 sum_i |x_i - c|^2`
/// for the three leaves, their mean `m` and any centre `c`.
#[test]
fn claw_distortion_is_two_over_root_three() {
    let x = star(3);
    let target = 2.0 / 3f64.sqrt();

    let s = 3f64.sqrt() / 2.0;
    let coords = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![-0.5, s], vec![-0.5, -s]];
    let upper = witness_distortion(&x, &coords).unwrap();
    assert!((upper - target).abs() <= 1e-12);

    let leaves = [(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)];
    let edges = [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)];
    let lower = poincare_lower_bound(&x, &leaves, &edges, 3.0).unwrap();
    assert!((lower - target).abs() <= 1e-12);

    let sol = min_distortion_l2(&x, L2Options::with_tol(1e-6)).unwrap();
    assert!(sol.converged);
    assert!(sol.report.lower <= target + 1e-9 && sol.report.upper >= target - 1e-9);
    assert!(sol.report.upper - sol.report.lower <= 1e-5);
}

#[test]
fn brackets_are_certified() {
    for x in [path(5).unwrap(), star(4), binary_tree(2).unwrap()] {
        let sol = min_distortion_l2(&x, L2Options::default()).unwrap();
        let (lo, hi) = (sol.report.lower, sol.report.upper);
        assert!(lo >= 1.0 && lo <= hi * (1.0 + 1e-12), "[{lo}, {hi}]");
        assert!(sol.gram.verify(&x, 1e-6));
        let w = witness_distortion(&x, &sol.gram.coordinates()).unwrap();
        assert!((w - hi).abs() <= 1e-6 * hi);
    }
}

#[test]
fn star_with_four_leaves() {
    // same identity with k leaves: modulus k, leaf pairs k(k-1)/2 at distance 2
    let x = star(4);
    let leaves: Vec<(usize, usize, f64)> =
        (1..5).flat_map(|i| ((i + 1)..5).map(move |j| (i, j, 1.0))).collect();
    let edges: Vec<(usize, usize, f64)> = (1..5).map(|i| (0, i, 1.0)).collect();
    let lower = poincare_lower_bound(&x, &leaves, &edges, 4.0).unwrap();
    assert!((lower - 1.5f64.sqrt()).abs() <= 1e-12);
    let sol = min_distortion_l2(&x, L2Options::with_tol(1e-6)).unwrap();
    // regular simplex on the unit sphere: leaf distance sqrt(2 * 4/3)
    let simplex = 2.0 / (8.0f64 / 3.0).sqrt();
    assert!(sol.report.lower <= simplex + 1e-9 && sol.report.upper >= simplex - 1e-9);
    assert!((lower - simplex).abs() <= 1e-12);
}
