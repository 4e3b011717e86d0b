//! Vertical faithfulness of maps out of complete binary trees.

use crate::error::{Error, Result};
use crate::metric::{lipschitz_norm, Embedding};

use super::{as_binary_tree, TreePoint};

/// Result of a vertical-faithfulness evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Faithfulness {
    /// After rescaling to Lipschitz norm 1, ancestor pairs shrink by at most this factor.
    Bounded(f64),
    /// Some ancestor pair collapses (or the map is constant).
    Unbounded,
}

impl Faithfulness {
    pub fn within(self, limit: f64) -> bool {
        matches!(self, Faithfulness::Bounded(a) if a <= limit * (1.0 + 1e-12))
    }
}

/// Worst contraction of ancestor pairs of `points` (domain indices into a
/// tree), after rescaling the map to Lipschitz norm 1 on the same points.
fn faithfulness_on(e: &Embedding<'_>, points: &[usize], tree: &[TreePoint]) -> Faithfulness {
    let mut lip: f64 = 0.0;
    for (a, &p) in points.iter().enumerate() {
        for &q in &points[a + 1..] {
            lip = lip.max(e.ratio(p, q));
        }
    }
    if lip == 0.0 {
        return Faithfulness::Unbounded;
    }
    let mut worst: f64 = 1.0;
    for &p in points {
        for &q in points {
            if tree[p].is_ancestor(&tree[q]) {
                let r = e.ratio(p, q);
                if r == 0.0 {
                    return Faithfulness::Unbounded;
                }
                worst = worst.max(lip / r);
            }
        }
    }
    Faithfulness::Bounded(worst)
}

/// Smallest `A` for which the map (rescaled to `||f||_Lip = 1`) is
/// `A`-vertically faithful.
pub fn vertical_faithfulness(e: &Embedding<'_>) -> Result<Faithfulness> {
    as_binary_tree(e.domain)?;
    let tree: Vec<TreePoint> = (0..e.domain.len()).map(TreePoint::from_index).collect();
    if e.domain.len() < 2 || lipschitz_norm(e)? == 0.0 {
        return Ok(Faithfulness::Unbounded);
    }
    let all: Vec<usize> = (0..e.domain.len()).collect();
    Ok(faithfulness_on(e, &all, &tree))
}

/// A level-uniform copy of `B_t` inside `B_n`: copy depth `i` sits at tree
/// depth `root.depth + i * spacing`, and every copy node branches into both
/// subtrees of its tree node.
#[derive(Clone, Debug, PartialEq)]
pub struct SubtreeCopy {
    pub root: TreePoint,
    pub spacing: u32,
    /// Domain indices, in `B_t` breadth-first order.
    pub nodes: Vec<usize>,
    pub faithfulness: f64,
}

/// Cap on the number of candidate copies examined.
pub const MAX_COPIES: u64 = 50_000_000;

struct CopySearch<'a, 'b> {
    e: &'a Embedding<'b>,
    tree: Vec<TreePoint>,
    t: u32,
    spacing: u32,
    limit: f64,
    copy: Vec<TreePoint>,
    examined: u64,
    found: Option<(Vec<usize>, f64)>,
}

impl CopySearch<'_, '_> {
    /// Descendants of `p` exactly `spacing` levels down whose first step is `first`.
    fn descendants(&self, p: TreePoint, first: u64) -> impl Iterator<Item = TreePoint> {
        let k = self.spacing;
        let head = p.child(first);
        (0..(1u64 << (k - 1))).map(move |tail| {
            TreePoint::new(head.depth() + k - 1, (head.bits() << (k - 1)) | tail).unwrap()
        })
    }

    fn evaluate(&mut self) -> Result<bool> {
        self.examined += 1;
        if self.examined > MAX_COPIES {
            return Err(Error::SizeCap(format!("more than {MAX_COPIES} subtree copies")));
        }
        let nodes: Vec<usize> = self.copy.iter().map(|p| p.index()).collect();
        let mut images: Vec<usize> = nodes.iter().map(|&i| self.e.assignment[i]).collect();
        images.sort_unstable();
        if images.windows(2).any(|w| w[0] == w[1]) {
            return Ok(false);
        }
        if let Faithfulness::Bounded(a) = faithfulness_on(self.e, &nodes, &self.tree) {
            if a <= self.limit * (1.0 + 1e-12) {
                self.found = Some((nodes, a));
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Fills copy nodes in breadth-first order; node `i` has children `2i+1, 2i+2`.
    fn fill(&mut self, i: usize) -> Result<bool> {
        let internal = (1usize << self.t) - 1;
        if i == internal {
            return self.evaluate();
        }
        let p = self.copy[i];
        let lefts: Vec<TreePoint> = self.descendants(p, 0).collect();
        let rights: Vec<TreePoint> = self.descendants(p, 1).collect();
        for &l in &lefts {
            for &r in &rights {
                self.copy[2 * i + 1] = l;
                self.copy[2 * i + 2] = r;
                if self.fill(i + 1)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Searches level-uniform copies of `B_t` (by spacing, then root index, then
/// descendant choices in lexicographic order) for the first one whose image
/// is injective and `(1 + delta)`-vertically faithful.
pub fn find_faithful_subtree(e: &Embedding<'_>, t: u32, delta: f64) -> Result<Option<SubtreeCopy>> {
    let n = as_binary_tree(e.domain)?;
    if t > n {
        return Err(Error::Parameter(format!("copy depth {t} exceeds tree depth {n}")));
    }
    if !(delta >= 0.0) {
        return Err(Error::Parameter(format!("delta must be nonnegative, got {delta}")));
    }
    let tree: Vec<TreePoint> = (0..e.domain.len()).map(TreePoint::from_index).collect();
    if t == 0 {
        return Ok(Some(SubtreeCopy {
            root: TreePoint::ROOT,
            spacing: 1,
            nodes: vec![0],
            faithfulness: 1.0,
        }));
    }
    let mut examined = 0;
    for spacing in 1..=(n / t) {
        let max_root_depth = n - t * spacing;
        for root in TreePoint::all_up_to(max_root_depth) {
            let mut search = CopySearch {
                e,
                tree: tree.clone(),
                t,
                spacing,
                limit: 1.0 + delta,
                copy: vec![TreePoint::ROOT; (1usize << (t + 1)) - 1],
                examined,
                found: None,
            };
            search.copy[0] = root;
            let hit = search.fill(0)?;
            examined = search.examined;
            if hit {
                let (nodes, a) = search.found.expect("hit implies a copy");
                return Ok(Some(SubtreeCopy {
                    root,
                    spacing,
                    nodes,
                    faithfulness: a,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{binary_tree, path};
    use crate::trees::HEtaHost;

    #[test]
    fn identity_is_one_faithful() {
        let t = binary_tree(3).unwrap();
        let id: Vec<usize> = (0..t.len()).collect();
        let e = Embedding::new(&t, &t, &id).unwrap();
        assert_eq!(vertical_faithfulness(&e).unwrap(), Faithfulness::Bounded(1.0));
    }

    #[test]
    fn identity_into_heta_preserves_vertical_pairs() {
        let t = binary_tree(3).unwrap();
        let tree = TreePoint::all_up_to(3);
        for eta in [0.1, 0.3, 0.7] {
            let host = HEtaHost::new(3, eta).unwrap();
            for p in &tree {
                for q in &tree {
                    if p.is_ancestor(q) {
                        assert_eq!(host.d(p.index(), q.index()), f64::from(p.tree_distance(q)));
                    }
                }
            }
            let id: Vec<usize> = (0..t.len()).collect();
            let e = Embedding::new(&t, host.space(), &id).unwrap();
            assert_eq!(vertical_faithfulness(&e).unwrap(), Faithfulness::Bounded(1.0));
        }
    }

    #[test]
    fn constant_map_is_unbounded() {
        let t = binary_tree(2).unwrap();
        let c = vec![0; t.len()];
        let e = Embedding::new(&t, &t, &c).unwrap();
        assert_eq!(vertical_faithfulness(&e).unwrap(), Faithfulness::Unbounded);
    }

    #[test]
    fn non_tree_domain_is_rejected() {
        let p = path(2).unwrap();
        let e = Embedding::new(&p, &p, &[0, 1, 2]).unwrap();
        assert!(vertical_faithfulness(&e).is_err());
    }

    #[test]
    fn subtree_examples() {
        let t = binary_tree(3).unwrap();
        let id: Vec<usize> = (0..t.len()).collect();
        let e = Embedding::new(&t, &t, &id).unwrap();
        let whole = find_faithful_subtree(&e, 3, 0.0).unwrap().unwrap();
        assert_eq!(whole.nodes, id);
        let single = find_faithful_subtree(&e, 0, 0.0).unwrap().unwrap();
        assert_eq!(single.nodes, vec![0]);
        assert!(find_faithful_subtree(&e, 4, 0.0).is_err());
    }

    #[test]
    fn collapsed_siblings_have_no_copy() {
        // B_2 into the line: depth d goes to the point d, so siblings collapse
        let t = binary_tree(2).unwrap();
        let line = path(2).unwrap();
        let map: Vec<usize> = (0..t.len()).map(|i| TreePoint::from_index(i).depth() as usize).collect();
        let e = Embedding::new(&t, &line, &map).unwrap();
        // oracle: every B_1 copy (root + one descendant per side) has equal prong images
        for root in TreePoint::all_up_to(1) {
            for k in 1..=(2 - root.depth()) {
                for l in 0..(1u64 << (k - 1)) {
                    let left = TreePoint::new(root.depth() + k, (root.bits() << k) | l).unwrap();
                    let right = TreePoint::new(root.depth() + k, (root.bits() << k) | (1 << (k - 1)) | l).unwrap();
                    assert_eq!(map[left.index()], map[right.index()]);
                }
            }
        }
        assert_eq!(find_faithful_subtree(&e, 1, 0.1).unwrap(), None);
    }
}
