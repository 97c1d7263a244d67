//! Fractional isomorphism of finite graphs.
//!
//! The coarsest equitable partition is computed by color refinement. Two
//! graphs are fractionally isomorphic iff their coarsest equitable partitions
//! have the same parameters under some bijection of classes. Tree
//! homomorphism counts give an independent characterization used as an
//! oracle.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcore::FiniteGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertOrdering {
    /// Classes are in the order chosen by the construction that produced them.
    #[default]
    Construction,
    /// Classes are sorted by `(p_i, sorted multiset of (D_ij, p_j))`.
    Canonical,
}

/// Parameters `((p_i), (D_ij))` of an equitable partition: every vertex of
/// class `i` has exactly `D_ij` neighbours in class `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FICertificate {
    pub part_sizes: Vec<usize>,
    pub degree_matrix: Vec<Vec<usize>>,
    #[serde(skip)]
    pub ordering: CertOrdering,
}

type ClassKey = (usize, Vec<(usize, usize)>);

impl FICertificate {
    pub fn classes(&self) -> usize {
        self.part_sizes.len()
    }

    pub fn order(&self) -> usize {
        self.part_sizes.iter().sum()
    }

    /// Shape, range and double-counting checks.
    pub fn check_consistency(&self) -> Result<()> {
        let k = self.classes();
        if self.degree_matrix.len() != k || self.degree_matrix.iter().any(|r| r.len() != k) {
            return Err(Error::Usage(format!("degree matrix must be {k}x{k}")));
        }
        let p = &self.part_sizes;
        for i in 0..k {
            for j in 0..k {
                let d = self.degree_matrix[i][j];
                let cap = if i == j { p[j].saturating_sub(1) } else { p[j] };
                if p[i] > 0 && d > cap {
                    return Err(Error::Usage(format!("D[{i}][{j}] = {d} exceeds {cap}")));
                }
                let lhs = d as u128 * p[i] as u128;
                let rhs = self.degree_matrix[j][i] as u128 * p[j] as u128;
                if lhs != rhs {
                    return Err(Error::Usage(format!(
                        "double counting fails for classes {i}, {j}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn key(&self, i: usize) -> ClassKey {
        let mut row: Vec<(usize, usize)> = self.degree_matrix[i]
            .iter()
            .zip(&self.part_sizes)
            .map(|(&d, &p)| (d, p))
            .collect();
        row.sort_unstable();
        (self.part_sizes[i], row)
    }

    /// Reorders classes so that `new[k] = old[order[k]]`.
    pub fn reordered(&self, order: &[usize]) -> FICertificate {
        FICertificate {
            part_sizes: order.iter().map(|&o| self.part_sizes[o]).collect(),
            degree_matrix: order
                .iter()
                .map(|&a| order.iter().map(|&b| self.degree_matrix[a][b]).collect())
                .collect(),
            ordering: self.ordering,
        }
    }

    /// Stable sort of the classes by their canonical key; returns the
    /// certificate and the order applied.
    pub fn canonicalized(&self) -> (FICertificate, Vec<usize>) {
        let keys: Vec<ClassKey> = (0..self.classes()).map(|i| self.key(i)).collect();
        let mut order: Vec<usize> = (0..self.classes()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let mut c = self.reordered(&order);
        c.ordering = CertOrdering::Canonical;
        (c, order)
    }

    /// A bijection `sigma` of classes with `p_i = p'_sigma(i)` and
    /// `D_ij = D'_sigma(i)sigma(j)`, if one exists.
    pub fn matching(&self, other: &FICertificate) -> Option<Vec<usize>> {
        let k = self.classes();
        if other.classes() != k {
            return None;
        }
        let mine: Vec<ClassKey> = (0..k).map(|i| self.key(i)).collect();
        let theirs: Vec<ClassKey> = (0..k).map(|i| other.key(i)).collect();
        let mut a = mine.clone();
        let mut b = theirs.clone();
        a.sort();
        b.sort();
        if a != b {
            return None;
        }
        let candidates: Vec<Vec<usize>> = (0..k)
            .map(|i| (0..k).filter(|&j| theirs[j] == mine[i]).collect())
            .collect();
        // most constrained classes first
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| candidates[i].len());
        let mut sigma = vec![usize::MAX; k];
        let mut used = vec![false; k];
        if self.extend(other, &order, 0, &candidates, &mut sigma, &mut used) {
            Some(sigma)
        } else {
            None
        }
    }

    fn extend(
        &self,
        other: &FICertificate,
        order: &[usize],
        depth: usize,
        candidates: &[Vec<usize>],
        sigma: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let i = order[depth];
        for &c in &candidates[i] {
            if used[c] {
                continue;
            }
            let consistent = order[..depth].iter().all(|&j| {
                self.degree_matrix[i][j] == other.degree_matrix[c][sigma[j]]
                    && self.degree_matrix[j][i] == other.degree_matrix[sigma[j]][c]
            }) && self.degree_matrix[i][i] == other.degree_matrix[c][c];
            if !consistent {
                continue;
            }
            sigma[i] = c;
            used[c] = true;
            if self.extend(other, order, depth + 1, candidates, sigma, used) {
                return true;
            }
            used[c] = false;
            sigma[i] = usize::MAX;
        }
        false
    }

    /// Equality of parameters up to relabeling of classes.
    pub fn equivalent(&self, other: &FICertificate) -> bool {
        self.matching(other).is_some()
    }
}

/// One refinement round: new color = rank of `(color, sorted neighbour colors)`.
pub fn refine_once(g: &FiniteGraph, colors: &[usize]) -> Vec<usize> {
    let signatures: Vec<(usize, Vec<usize>)> = (0..g.n())
        .map(|v| {
            let mut nb: Vec<usize> = g.neighbors(v).iter().map(|&u| colors[u]).collect();
            nb.sort_unstable();
            (colors[v], nb)
        })
        .collect();
    let ranks: BTreeMap<&(usize, Vec<usize>), usize> = signatures
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(r, s)| (s, r))
        .collect();
    signatures.iter().map(|s| ranks[s]).collect()
}

/// Stable coloring reached by color refinement from the uniform coloring.
pub fn color_refinement(g: &FiniteGraph) -> Vec<usize> {
    let mut colors = vec![0; g.n()];
    let mut count = usize::from(g.n() > 0);
    loop {
        let next = refine_once(g, &colors);
        let next_count = next.iter().copied().max().map_or(0, |c| c + 1);
        colors = next;
        if next_count == count {
            return colors;
        }
        count = next_count;
    }
}

/// Parameters of the partition `class_of` if it is equitable.
pub fn equitable_parameters(g: &FiniteGraph, class_of: &[usize], classes: usize) -> Option<FICertificate> {
    let mut sizes = vec![0; classes];
    for &c in class_of {
        sizes[c] += 1;
    }
    let mut matrix: Vec<Option<Vec<usize>>> = vec![None; classes];
    for v in 0..g.n() {
        let mut row = vec![0; classes];
        for &u in g.neighbors(v) {
            row[class_of[u]] += 1;
        }
        match &matrix[class_of[v]] {
            None => matrix[class_of[v]] = Some(row),
            Some(r) if *r == row => {}
            Some(_) => return None,
        }
    }
    Some(FICertificate {
        part_sizes: sizes,
        degree_matrix: matrix
            .into_iter()
            .map(|r| r.unwrap_or_else(|| vec![0; classes]))
            .collect(),
        ordering: CertOrdering::Construction,
    })
}

/// Coarsest equitable partition with canonically ordered classes.
pub fn coarsest_equitable_graph(g: &FiniteGraph) -> (Vec<usize>, FICertificate) {
    let colors = color_refinement(g);
    let k = colors.iter().copied().max().map_or(0, |c| c + 1);
    let cert = equitable_parameters(g, &colors, k).expect("stable coloring is equitable");
    let (canon, order) = cert.canonicalized();
    let mut new_index = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    (colors.iter().map(|&c| new_index[c]).collect(), canon)
}

pub fn fractionally_isomorphic(g: &FiniteGraph, h: &FiniteGraph) -> bool {
    if g.n() != h.n() || g.edge_count() != h.edge_count() {
        return false;
    }
    let (_, a) = coarsest_equitable_graph(g);
    let (_, b) = coarsest_equitable_graph(h);
    a.equivalent(&b)
}

/// Number of homomorphisms from the tree `t` to `g`.
pub fn tree_hom_count(t: &FiniteGraph, g: &FiniteGraph) -> Result<u128> {
    if !t.is_tree() {
        return Err(Error::Usage("pattern graph is not a tree".into()));
    }
    let overflow = || Error::Overflow("tree homomorphism count exceeds u128".into());
    // root at 0; order vertices so children come after parents
    let mut parent = vec![usize::MAX; t.n()];
    let mut order = vec![0];
    let mut seen = vec![false; t.n()];
    seen[0] = true;
    let mut idx = 0;
    while idx < order.len() {
        let v = order[idx];
        idx += 1;
        for &c in t.neighbors(v) {
            if !seen[c] {
                seen[c] = true;
                parent[c] = v;
                order.push(c);
            }
        }
    }
    let mut msg: Vec<Vec<u128>> = vec![vec![1; g.n()]; t.n()];
    for &v in order.iter().rev() {
        if parent[v] == usize::MAX {
            continue;
        }
        let p = parent[v];
        for x in 0..g.n() {
            let mut s: u128 = 0;
            for &y in g.neighbors(x) {
                s = s.checked_add(msg[v][y]).ok_or_else(overflow)?;
            }
            msg[p][x] = msg[p][x].checked_mul(s).ok_or_else(overflow)?;
        }
    }
    msg[0]
        .iter()
        .try_fold(0u128, |acc, &x| acc.checked_add(x))
        .ok_or_else(overflow)
}

fn rooted_code(t: &FiniteGraph, v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = t
        .neighbors(v)
        .iter()
        .filter(|&&c| c != parent)
        .map(|&c| rooted_code(t, c, v))
        .collect();
    kids.sort_unstable();
    format!("({})", kids.concat())
}

fn tree_centers(t: &FiniteGraph) -> Vec<usize> {
    let n = t.n();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut deg = t.degrees();
    let mut leaves: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= leaves.len();
        let mut next = Vec::new();
        for &l in &leaves {
            for &u in t.neighbors(l) {
                deg[u] -= 1;
                if deg[u] == 1 {
                    next.push(u);
                }
            }
        }
        leaves = next;
    }
    leaves
}

/// Canonical string of an unrooted tree; equal iff the trees are isomorphic.
pub fn tree_canonical_form(t: &FiniteGraph) -> String {
    tree_centers(t)
        .into_iter()
        .map(|c| rooted_code(t, c, usize::MAX))
        .min()
        .unwrap_or_default()
}

/// All trees on `1..=max_size` vertices, one per isomorphism class.
pub fn trees_up_to(max_size: usize) -> Vec<FiniteGraph> {
    let mut all = Vec::new();
    if max_size == 0 {
        return all;
    }
    let mut layer = vec![FiniteGraph::empty(1)];
    all.extend(layer.iter().cloned());
    for size in 2..=max_size {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for t in &layer {
            for v in 0..t.n() {
                let edges = t.edges().chain(std::iter::once((v, size - 1)));
                let grown = FiniteGraph::from_edges(size, edges).expect("leaf addition is simple");
                if seen.insert(tree_canonical_form(&grown)) {
                    next.push(grown);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

/// Compares homomorphism counts from every tree with at most `max_tree_size`
/// vertices. A `false` is conclusive; a `true` is conclusive only for a cap
/// large enough for the graphs at hand.
pub fn fi_oracle_trees(g: &FiniteGraph, h: &FiniteGraph, max_tree_size: usize) -> Result<bool> {
    for t in trees_up_to(max_tree_size) {
        if tree_hom_count(&t, g)? != tree_hom_count(&t, h)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> FiniteGraph {
        FiniteGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn path(n: usize) -> FiniteGraph {
        FiniteGraph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn coarsest_examples() {
        let (_, c6) = coarsest_equitable_graph(&cycle(6));
        assert_eq!(c6.part_sizes, vec![6]);
        assert_eq!(c6.degree_matrix, vec![vec![2]]);

        let (classes, p4) = coarsest_equitable_graph(&path(4));
        assert_eq!(p4.part_sizes, vec![2, 2]);
        assert_eq!(p4.degree_matrix, vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(classes[0], classes[3]);
        assert_eq!(classes[0], 0);

        let (_, e) = coarsest_equitable_graph(&FiniteGraph::empty(5));
        assert_eq!(e.part_sizes, vec![5]);
        assert_eq!(e.degree_matrix, vec![vec![0]]);
    }

    #[test]
    fn fi_examples() {
        let two_triangles = cycle(3).disjoint_union(&cycle(3));
        assert!(fractionally_isomorphic(&cycle(6), &two_triangles));
        assert!(!fractionally_isomorphic(&cycle(6), &path(6)));
        assert!(fractionally_isomorphic(&path(5), &path(5)));
    }

    #[test]
    fn hom_count_examples() {
        assert_eq!(tree_hom_count(&FiniteGraph::empty(1), &cycle(6)).unwrap(), 6);
        assert_eq!(tree_hom_count(&path(2), &cycle(6)).unwrap(), 12);
        assert_eq!(tree_hom_count(&path(3), &FiniteGraph::complete(3)).unwrap(), 12);
        assert!(matches!(
            tree_hom_count(&cycle(3), &cycle(6)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn hom_count_matches_brute_force() {
        let t = FiniteGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let g = path(4).disjoint_union(&cycle(3));
        let n = g.n();
        let mut brute = 0u128;
        for code in 0..n.pow(4) {
            let f: Vec<usize> = (0..4).map(|k| code / n.pow(k) % n).collect();
            if t.edges().all(|(a, b)| g.has_edge(f[a], f[b])) {
                brute += 1;
            }
        }
        assert_eq!(tree_hom_count(&t, &g).unwrap(), brute);
    }

    #[test]
    fn hom_count_overflow_is_reported() {
        let star = FiniteGraph::from_edges(40, (1..40).map(|i| (0, i))).unwrap();
        let k = FiniteGraph::complete(12);
        assert!(matches!(tree_hom_count(&star, &k), Err(Error::Overflow(_))));
    }

    #[test]
    fn tree_counts_by_size() {
        let trees = trees_up_to(8);
        let mut by_size = [0usize; 9];
        for t in &trees {
            by_size[t.n()] += 1;
            assert!(t.is_tree());
        }
        assert_eq!(&by_size[1..], &[1, 1, 1, 2, 3, 6, 11, 23]);
    }

    #[test]
    fn oracle_examples() {
        let two_triangles = cycle(3).disjoint_union(&cycle(3));
        assert!(fi_oracle_trees(&cycle(6), &two_triangles, 6).unwrap());
        assert!(!fi_oracle_trees(&FiniteGraph::complete(3), &path(3), 3).unwrap());
        assert!(fi_oracle_trees(&path(4), &path(4), 4).unwrap());
    }

    #[test]
    fn certificate_json_shape() {
        let (_, c) = coarsest_equitable_graph(&path(4));
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json, serde_json::json!({"part_sizes": [2, 2], "degree_matrix": [[0, 1], [1, 1]]}));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::{seq::SliceRandom, SeedableRng};

        fn arb_graph(max_n: usize) -> impl Strategy<Value = FiniteGraph> {
            (1..=max_n).prop_flat_map(|n| {
                proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                    let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
                    let edges: Vec<_> = pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e).collect();
                    FiniteGraph::from_edges(n, edges).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn coarsest_is_equitable_fixpoint(g in arb_graph(12)) {
                let (classes, cert) = coarsest_equitable_graph(&g);
                let again = equitable_parameters(&g, &classes, cert.classes());
                prop_assert_eq!(again.map(|c| c.degree_matrix), Some(cert.degree_matrix.clone()));
                let refined = refine_once(&g, &classes);
                let k = refined.iter().copied().max().map_or(0, |c| c + 1);
                prop_assert_eq!(k, cert.classes());
                prop_assert!(cert.check_consistency().is_ok());
            }

            #[test]
            fn permuted_graphs_are_fi(g in arb_graph(12), seed in any::<u64>()) {
                let mut perm: Vec<usize> = (0..g.n()).collect();
                perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                let h = g.relabeled(&perm).unwrap();
                prop_assert!(fractionally_isomorphic(&g, &h));
                let (_, a) = coarsest_equitable_graph(&g);
                let (_, b) = coarsest_equitable_graph(&h);
                prop_assert_eq!(a, b);
            }

            #[test]
            fn fi_is_transitive(a in arb_graph(6), b in arb_graph(6), c in arb_graph(6)) {
                let ab = fractionally_isomorphic(&a, &b);
                let bc = fractionally_isomorphic(&b, &c);
                let ac = fractionally_isomorphic(&a, &c);
                prop_assert_eq!(ab, fractionally_isomorphic(&b, &a));
                if ab && bc {
                    prop_assert!(ac);
                }
            }
        }
    }
}
