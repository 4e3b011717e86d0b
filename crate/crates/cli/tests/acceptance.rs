//! Acceptance harness: runs every criterion, prints one PASS/FAIL line for
//! each, writes each criterion's result table to
//! `<target tmpdir>/acceptance/criterion_NN.csv`, and exits non-zero when
//! any criterion fails.
//!
//! Criterion 11 re-runs criteria 1–10 on a one-thread pool and on a
//! four-thread (or wider) pool and compares the CSV bytes with the first
//! run.

use std::path::PathBuf;
use std::time::Instant;

use dichotomy_cli::spaces::random_metric;
use dichotomy_cli::table::{Cell, Table};
use dichotomy_core::euclid::{
    cube_diagonal_pairs, euclidean_space, min_distortion_l2, poincare_lower_bound, L2Options,
};
use dichotomy_core::generators::{binary_tree, hamming_cube, path, snowflake_line, ultrametric_host};
use dichotomy_core::invariants::{
    check_submultiplicativity, en_cotype_ratio, en_type_ratio, fit_beta, gamma_constant, psi_constant,
    type_constant, FitOutcome, InvariantKind, Ratio, VectorFamily,
};
use dichotomy_core::metric::index_labels;
use dichotomy_core::trees::{
    find_delta_forks, fork_census, fork_tip_contraction, identity_distortion_heta, search_b4_nonembed,
    B4SearchOptions, ForkType, HEtaHost,
};
use dichotomy_core::{min_distortion_exact, validate_metric, FiniteMetricSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    summary: String,
    table: Table,
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "functional bounds", functional_bounds),
    (2, "sub-multiplicativity", submultiplicativity),
    (3, "reciprocal bound", reciprocal_bound),
    (4, "tightness hosts", tightness_hosts),
    (5, "Euclidean cube distortion", euclidean_cubes),
    (6, "Euclidean trees trend", euclidean_trees),
    (7, "H_eta host", heta_host),
    (8, "fork suite", fork_suite),
    (9, "B_4 search", b4_search),
    (10, "oracle equivalence", oracle_equivalence),
];

/// Generous enough that every map functional below is evaluated exactly.
const MAP_BUDGET: u64 = 1 << 24;
const SEARCH_BUDGET: u64 = 1 << 36;

/// The 200 hosts of criteria 1 and 2: sizes 2 to 6, seeds 1000 + i.
fn small_hosts() -> Vec<(u64, FiniteMetricSpace)> {
    (0..200u64)
        .map(|i| (1000 + i, random_metric(2 + (i % 5) as u32, 1000 + i).unwrap()))
        .collect()
}

fn f(v: f64) -> Cell {
    Cell::Float(v)
}

fn functional_bounds() -> Outcome {
    let mut table = Table::new(&["kind", "host", "points", "n", "m", "value", "exact"], &[]);
    let mut worst_psi: f64 = 0.0;
    let mut worst_type: f64 = 0.0;
    let mut all_exact = true;
    for (seed, h) in small_hosts() {
        for n in [2u32, 3] {
            let psi = psi_constant(&h, n).unwrap();
            let t = type_constant(&h, n, MAP_BUDGET).unwrap();
            worst_psi = worst_psi.max(psi.value);
            worst_type = worst_type.max(t.value);
            all_exact &= psi.exact && t.exact;
            for v in [&psi, &t] {
                table.push(vec![
                    v.kind.as_str().into(),
                    seed.into(),
                    h.len().into(),
                    n.into(),
                    Cell::Empty,
                    f(v.value),
                    v.exact.into(),
                ]);
            }
        }
    }
    let mut worst_gamma: f64 = 0.0;
    for scale in [1.0, 3.7] {
        let h = FiniteMetricSpace::new(index_labels(2), vec![vec![0.0, scale], vec![scale, 0.0]]).unwrap();
        let g = gamma_constant(&h, 2, 4, MAP_BUDGET).unwrap();
        all_exact &= g.exact;
        worst_gamma = worst_gamma.max(g.value);
        table.push(vec![
            "gamma".into(),
            format!("two-point scale {scale}").into(),
            2usize.into(),
            2u32.into(),
            4u32.into(),
            f(g.value),
            g.exact.into(),
        ]);
    }
    Outcome {
        pass: all_exact && worst_psi <= 1.0 + 1e-12 && worst_type <= 1.0 + 1e-9 && worst_gamma <= 1.0,
        summary: format!(
            "max psi {worst_psi:.12}, max T {worst_type:.12} over 200 hosts x n in {{2,3}}; gamma(n=2, m=4, |H|=2) = {worst_gamma:.12}; all exact: {all_exact}"
        ),
        table,
    }
}

fn submultiplicativity() -> Outcome {
    let mut table = Table::new(
        &["host", "m", "n", "value-m", "value-n", "value-mn", "holds", "equality"],
        &[],
    );
    let mut pass = true;
    let mut slack = f64::INFINITY;
    for (seed, h) in small_hosts() {
        for (m, n) in [(2, 2), (2, 3)] {
            let r = check_submultiplicativity(&h, InvariantKind::Psi, m, n, MAP_BUDGET).unwrap();
            pass &= r.holds;
            slack = slack.min(r.value_m * r.value_n - r.value_mn);
            table.push(vec![
                seed.to_string().into(),
                m.into(),
                n.into(),
                f(r.value_m),
                f(r.value_n),
                f(r.value_mn),
                r.holds.into(),
                Cell::Empty,
            ]);
        }
    }
    let mut worst_gap: f64 = 0.0;
    for depth in 1..=5 {
        let h = ultrametric_host(depth).unwrap();
        for (m, n) in [(2, 2), (2, 3), (3, 3), (2, 4)] {
            let r = check_submultiplicativity(&h, InvariantKind::Psi, m, n, MAP_BUDGET).unwrap();
            let gap = (r.value_mn - r.value_m * r.value_n).abs();
            worst_gap = worst_gap.max(gap);
            pass &= r.holds && gap <= 1e-9;
            table.push(vec![
                format!("ultrametric-host:depth={depth}").into(),
                m.into(),
                n.into(),
                f(r.value_m),
                f(r.value_n),
                f(r.value_mn),
                r.holds.into(),
                (gap <= 1e-9).into(),
            ]);
        }
    }
    Outcome {
        pass,
        summary: format!(
            "min slack psi_m psi_n - psi_mn = {slack:.3e} on random hosts; max |psi_mn - psi_m psi_n| = {worst_gap:.3e} on ultrametric hosts"
        ),
        table,
    }
}

fn reciprocal_bound() -> Outcome {
    let mut table = Table::new(&["host", "points", "n", "inverse-psi", "distortion", "exact", "holds"], &[]);
    let mut pass = true;
    let mut tightest = f64::INFINITY;
    for i in 0..50u64 {
        let seed = 2000 + i;
        let h = random_metric(6 + (i % 3) as u32, seed).unwrap();
        for n in 1..=5u32 {
            let inv = 1.0 / psi_constant(&h, n).unwrap().value;
            let r = min_distortion_exact(&path(n as usize).unwrap(), &h, SEARCH_BUDGET).unwrap();
            let holds = r.is_exact() && inv <= r.upper + 1e-6;
            pass &= holds;
            tightest = tightest.min(r.upper - inv);
            table.push(vec![
                seed.into(),
                h.len().into(),
                n.into(),
                f(inv),
                f(r.upper),
                r.is_exact().into(),
                holds.into(),
            ]);
        }
    }
    Outcome {
        pass,
        summary: format!("50 hosts, n <= 5: min c_H(P_n) - 1/psi_n = {tightest:.3e}"),
        table,
    }
}

fn tightness_hosts() -> Outcome {
    let mut table = Table::new(&["part", "n", "beta", "value", "expected", "holds"], &[]);
    let mut pass = true;
    let mut notes = Vec::new();
    for n in [2u32, 4, 8] {
        let depth = (f64::from(n).log2().ceil() as u32) + 1;
        let psi = psi_constant(&ultrametric_host(depth).unwrap(), n).unwrap().value;
        let beta = match fit_beta(u64::from(n), psi).unwrap() {
            FitOutcome::Decay(fit) => fit.beta,
            FitOutcome::NoDecay { .. } => f64::NAN,
        };
        let holds = psi == 1.0 / f64::from(n) && (beta - 1.0).abs() <= 1e-12;
        pass &= holds;
        table.push(vec!["ultrametric psi".into(), n.into(), f(beta), f(psi), f(1.0 / f64::from(n)), holds.into()]);
    }
    let mut worst_c: f64 = f64::INFINITY;
    for n in 1..=6u32 {
        let depth = (f64::from(n).log2().ceil() as u32) + 1;
        let r = min_distortion_exact(&path(n as usize).unwrap(), &ultrametric_host(depth).unwrap(), SEARCH_BUDGET)
            .unwrap();
        let holds = r.is_exact() && r.upper >= f64::from(n) - 1e-9;
        worst_c = worst_c.min(r.upper - f64::from(n));
        pass &= holds;
        table.push(vec!["ultrametric c(P_n)".into(), n.into(), Cell::Empty, f(r.upper), f(f64::from(n)), holds.into()]);
    }
    notes.push(format!("psi_n = 1/n, beta = 1 for n in {{2,4,8}}; min c(P_n) - n = {worst_c:.3e} for n <= 6"));
    let mut worst_rel: f64 = 0.0;
    for beta in [0.25, 0.5] {
        for n in [2u32, 4, 8] {
            let h = snowflake_line(2 * n as usize, 1.0 - beta).unwrap();
            let psi = psi_constant(&h, n).unwrap().value;
            let expected = f64::from(n).powf(-beta);
            let rel = (psi - expected).abs() / expected;
            worst_rel = worst_rel.max(rel);
            pass &= rel <= 0.02;
            table.push(vec!["snowflake psi".into(), n.into(), f(beta), f(psi), f(expected), (rel <= 0.02).into()]);
        }
    }
    notes.push(format!("snowflake max relative error {worst_rel:.3e}"));
    Outcome {
        pass,
        summary: notes.join("; "),
        table,
    }
}

fn euclidean_cubes() -> Outcome {
    let mut table = Table::new(
        &["n", "lower", "upper", "poincare", "sqrt-n", "converged", "iterations"],
        &[],
    );
    let mut pass = true;
    let mut widest: f64 = 0.0;
    for n in 1..=3u32 {
        let x = hamming_cube(n).unwrap();
        let sol = min_distortion_l2(&x, L2Options::with_tol(1e-6)).unwrap();
        let (num, den) = cube_diagonal_pairs(n).unwrap();
        let pb = poincare_lower_bound(&x, &num, &den, 1.0).unwrap();
        let root = f64::from(n).sqrt();
        let (lo, hi) = (sol.report.lower, sol.report.upper);
        widest = widest.max(hi - lo);
        pass &= lo <= root + 1e-9 && hi >= root - 1e-9 && hi - lo <= 1e-3 && (pb - root).abs() <= 1e-12;
        table.push(vec![n.into(), f(lo), f(hi), f(pb), f(root), sol.converged.into(), sol.iterations.into()]);
    }
    Outcome {
        pass,
        summary: format!("brackets contain sqrt(n), widest {widest:.3e}; Poincare bound equals sqrt(n)"),
        table,
    }
}

fn euclidean_trees() -> Outcome {
    let mut table = Table::new(&["t", "points", "lower", "upper", "converged", "iterations"], &[]);
    let mut brackets = Vec::new();
    for t in 1..=4u32 {
        let x = binary_tree(t).unwrap();
        let sol = min_distortion_l2(&x, L2Options::with_tol(1e-4)).unwrap();
        brackets.push((sol.report.lower, sol.report.upper));
        table.push(vec![
            t.into(),
            x.len().into(),
            f(sol.report.lower),
            f(sol.report.upper),
            sol.converged.into(),
            sol.iterations.into(),
        ]);
    }
    // c(B_t) <= upper_t <= lower_{t+1} <= c(B_{t+1})
    let pass = brackets.windows(2).all(|w| w[0].1 <= w[1].0);
    let text: Vec<String> = brackets.iter().map(|(l, u)| format!("[{l:.5}, {u:.5}]")).collect();
    Outcome {
        pass,
        summary: format!("c2(B_1..B_4) in {}", text.join(" <= ")),
        table,
    }
}

fn heta_host() -> Outcome {
    let mut table = Table::new(&["depth", "eta", "points", "valid", "identity-distortion"], &[]);
    let mut pass = true;
    for depth in 1..=8u32 {
        for eta in [1.0, 0.5, 0.25, 0.1] {
            let host = HEtaHost::new(depth, eta).unwrap();
            let s = host.space();
            let rows: Vec<Vec<f64>> = (0..s.len()).map(|i| s.row(i).to_vec()).collect();
            let valid = validate_metric(rows, s.labels().to_vec()).is_ok();
            pass &= valid;
            let id = if [2, 4, 6].contains(&depth) {
                let id = identity_distortion_heta(depth, eta).unwrap();
                pass &= (id - 1.0 / eta).abs() <= 1e-12 / eta;
                Some(id)
            } else {
                None
            };
            table.push(vec![depth.into(), f(eta), s.len().into(), valid.into(), id.into()]);
        }
    }
    Outcome {
        pass,
        summary: "H_eta valid for D <= 8; identity distortion 1/eta for D in {2,4,6}".into(),
        table,
    }
}

fn star() -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(index_labels(4), |a, b| match (a, b) {
        _ if a == b => 0.0,
        (0, _) | (_, 0) => 1.0,
        _ => 2.0,
    })
    .unwrap()
}

fn fork_suite() -> Outcome {
    let mut table = Table::new(&["case", "forks", "contracting", "unclassified", "max-tip", "holds"], &[]);
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, space, expected) in [
        ("star K_1,3", star(), 3usize),
        ("path P_3", path(2).unwrap(), 0),
        ("cube_2", hamming_cube(2).unwrap(), 0),
    ] {
        let forks = find_delta_forks(&space, 0.0, true).unwrap();
        let holds = forks.len() == expected;
        pass &= holds;
        table.push(vec![name.into(), forks.len().into(), Cell::Empty, Cell::Empty, Cell::Empty, holds.into()]);
    }

    let grid2: Vec<Vec<f64>> = (0..16).map(|i| vec![f64::from(i % 4), f64::from(i / 4)]).collect();
    let grid3: Vec<Vec<f64>> = (0..27)
        .map(|i| vec![f64::from(i % 3), f64::from(i / 3 % 3), f64::from(i / 9)])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cloud: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    for (name, coords) in [("euclidean grid 4x4", grid2), ("euclidean grid 3x3x3", grid3), ("euclidean cloud", cloud)] {
        let space = euclidean_space(&coords).unwrap();
        let forks = find_delta_forks(&space, 0.0, false).unwrap();
        let max_tip = forks.iter().map(|fk| fork_tip_contraction(fk, &space)).fold(0.0_f64, f64::max);
        let holds = max_tip <= 1e-6;
        pass &= holds;
        table.push(vec![name.into(), forks.len().into(), Cell::Empty, Cell::Empty, f(max_tip), holds.into()]);
    }

    let (delta, eta) = (0.05, 0.2);
    let census = fork_census(&HEtaHost::new(5, eta).unwrap(), delta).unwrap();
    let contracting: Vec<f64> = census.iter().filter(|r| r.kind.is_contracting()).map(|r| r.tip_contraction).collect();
    let unclassified = census.iter().filter(|r| r.kind == ForkType::Unclassified).count();
    let max_tip = contracting.iter().copied().fold(0.0_f64, f64::max);
    let bound = 2.0 * delta + 2.0 * eta + 1e-9;
    let holds = max_tip <= bound;
    pass &= holds;
    table.push(vec![
        "heta:depth=5,eta=0.2 delta=0.05".into(),
        census.len().into(),
        contracting.len().into(),
        unclassified.into(),
        f(max_tip),
        holds.into(),
    ]);
    for kind in [
        ForkType::ContractA,
        ForkType::ContractB,
        ForkType::I,
        ForkType::II,
        ForkType::III,
        ForkType::IV,
        ForkType::Unclassified,
    ] {
        let count = census.iter().filter(|r| r.kind == kind).count();
        table.push(vec![format!("census {}", kind.as_str()).into(), count.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
    }
    let fraction = if census.is_empty() { 0.0 } else { unclassified as f64 / census.len() as f64 };
    notes.push(format!(
        "star 3 forks, P_3 and cube_2 none, Euclidean tips <= 1e-6; H_eta(5, 0.2) census {} forks, unclassified fraction {fraction:.4}, max contracting tip {max_tip:.4} <= {bound:.4}",
        census.len()
    ));
    Outcome {
        pass,
        summary: notes.join("; "),
        table,
    }
}

fn b4_search() -> Outcome {
    let mut table = Table::new(
        &["eta", "min-distortion", "lower-bound", "explored-fraction", "complete", "nodes", "holds"],
        &[],
    );
    let opts = B4SearchOptions::default();
    let r = search_b4_nonembed(&HEtaHost::new(6, 0.2).unwrap(), opts).unwrap();
    let main = r.min_distortion >= 2.5;
    table.push(vec![
        f(0.2),
        f(r.min_distortion),
        f(r.lower_bound),
        f(r.explored_fraction),
        r.complete.into(),
        r.nodes.into(),
        main.into(),
    ]);
    let one = search_b4_nonembed(&HEtaHost::new(6, 1.0).unwrap(), opts).unwrap();
    let flat = (one.min_distortion - 1.0).abs() <= 1e-12;
    table.push(vec![
        f(1.0),
        f(one.min_distortion),
        f(one.lower_bound),
        f(one.explored_fraction),
        one.complete.into(),
        one.nodes.into(),
        flat.into(),
    ]);
    Outcome {
        pass: main && flat,
        summary: format!(
            "eta 0.2, delta 0.02: min distortion {} (lower bound {}, explored fraction {}, {} nodes); eta 1: {}",
            r.min_distortion, r.lower_bound, r.explored_fraction, r.nodes, one.min_distortion
        ),
        table,
    }
}

/// Sup over all `|H|^(n+1)` walks, by odometer enumeration.
fn psi_brute_force(h: &FiniteMetricSpace, n: u32) -> f64 {
    let len = n as usize + 1;
    let mut walk = vec![0usize; len];
    let mut best: f64 = 0.0;
    loop {
        let step = walk.windows(2).map(|w| h.d(w[0], w[1])).fold(0.0_f64, f64::max);
        if step > 0.0 {
            best = best.max(h.d(walk[0], walk[len - 1]) / (f64::from(n) * step));
        }
        let mut i = 0;
        loop {
            if i == len {
                return best;
            }
            walk[i] += 1;
            if walk[i] < h.len() {
                break;
            }
            walk[i] = 0;
            i += 1;
        }
    }
}

fn norm(v: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        v.iter().map(|c| c.abs()).fold(0.0, f64::max)
    } else {
        v.iter().map(|c| c.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `sum over sign vectors of ||sum eps_j x_j||^2`, recursing on `j`.
fn sign_sum(xs: &[Vec<f64>], r: f64, j: usize, acc: &mut Vec<f64>) -> f64 {
    if j == xs.len() {
        return norm(acc, r).powi(2);
    }
    let mut total = 0.0;
    for s in [1.0, -1.0] {
        for (a, c) in acc.iter_mut().zip(&xs[j]) {
            *a += s * c;
        }
        total += sign_sum(xs, r, j + 1, acc);
        for (a, c) in acc.iter_mut().zip(&xs[j]) {
            *a -= s * c;
        }
    }
    total
}

fn oracle_equivalence() -> Outcome {
    let mut table = Table::new(&["check", "case", "n", "value", "oracle", "holds"], &[]);
    let mut pass = true;
    let mut worst_psi: f64 = 0.0;
    for i in 0..100u64 {
        let seed = 3000 + i;
        let h = random_metric(2 + (i % 4) as u32, seed).unwrap();
        for n in 1..=3 {
            let v = psi_constant(&h, n).unwrap().value;
            let o = psi_brute_force(&h, n);
            worst_psi = worst_psi.max((v - o).abs());
            let holds = (v - o).abs() <= 1e-12;
            pass &= holds;
            table.push(vec!["psi".into(), format!("host {seed} ({} points)", h.len()).into(), n.into(), f(v), f(o), holds.into()]);
        }
    }
    let mut worst_rel: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for n in 1..=10usize {
        for r in [1.0, 1.5, 2.0, f64::INFINITY] {
            let dim = rng.gen_range(1..=4);
            let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let fam = VectorFamily::new(xs.clone(), r).unwrap();
            let avg = sign_sum(&xs, r, 0, &mut vec![0.0; dim]) / 2f64.powi(n as i32);
            let norms: f64 = xs.iter().map(|x| norm(x, r).powi(2)).sum();
            let nf = n as f64;
            for p in [1.0, 1.5, 2.0] {
                let v = en_type_ratio(&fam, p).unwrap();
                let o = (avg / (nf.powf(2.0 / p - 1.0) * norms)).sqrt();
                let rel = (v - o).abs() / o;
                worst_rel = worst_rel.max(rel);
                pass &= rel <= 1e-12;
                table.push(vec!["en-type".into(), format!("r={r} p={p}").into(), n.into(), f(v), f(o), (rel <= 1e-12).into()]);
            }
            for q in [2.0, 3.0, f64::INFINITY] {
                let v = match en_cotype_ratio(&fam, q).unwrap() {
                    Ratio::Finite(v) => v,
                    Ratio::Unbounded => f64::INFINITY,
                };
                let o = (norms / (nf.powf(1.0 - 2.0 / q) * avg)).sqrt();
                let rel = (v - o).abs() / o;
                worst_rel = worst_rel.max(rel);
                pass &= rel <= 1e-12;
                table.push(vec!["en-cotype".into(), format!("r={r} q={q}").into(), n.into(), f(v), f(o), (rel <= 1e-12).into()]);
            }
        }
    }
    Outcome {
        pass,
        summary: format!(
            "psi vs all walks: max diff {worst_psi:.3e} (100 hosts, n <= 3); type/cotype vs direct summation: max rel diff {worst_rel:.3e} (n <= 10)"
        ),
        table,
    }
}

fn line(id: u32, name: &str, pass: bool, summary: &str, secs: f64) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} [{status}] {name}: {summary} ({secs:.1}s)");
}

fn main() {
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&out_dir).unwrap();
    let mut all_pass = true;
    let mut csvs = Vec::new();
    for (id, name, run) in CRITERIA {
        let start = Instant::now();
        let o = run();
        line(id, name, o.pass, &o.summary, start.elapsed().as_secs_f64());
        all_pass &= o.pass;
        let csv = o.table.to_csv();
        std::fs::write(out_dir.join(format!("criterion_{id:02}.csv")), &csv).unwrap();
        csvs.push(csv);
    }

    let start = Instant::now();
    let wide = std::thread::available_parallelism().map_or(4, |n| n.get().max(4));
    let mut mismatches = Vec::new();
    for threads in [1, wide] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        for ((id, _, run), first) in CRITERIA.iter().zip(&csvs) {
            if pool.install(|| run().table.to_csv()) != *first {
                mismatches.push(format!("criterion {id} on {threads} thread(s)"));
            }
        }
    }
    let determinism = mismatches.is_empty();
    let summary = if determinism {
        format!("criteria 1-10 byte-identical across a second run, 1 thread and {wide} threads")
    } else {
        format!("differing CSVs: {}", mismatches.join(", "))
    };
    line(11, "determinism", determinism, &summary, start.elapsed().as_secs_f64());
    all_pass &= determinism;
    println!("acceptance CSVs in {}", out_dir.display());
    if !all_pass {
        std::process::exit(1);
    }
}
