//! Graphic and bigraphic degree sequences: Erdős–Gallai and Gale–Ryser tests
//! with greedy constructive realizers.
//!
//! Realizers run in `O(n^2 log n)` and break ties among equal residual
//! degrees by lowest index, so results are deterministic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernelcore::FiniteGraph;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreeSequence(pub Vec<usize>);

impl DegreeSequence {
    pub fn new(values: Vec<usize>) -> Self {
        DegreeSequence(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    fn sorted_desc(&self) -> Vec<usize> {
        let mut v = self.0.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

impl From<Vec<usize>> for DegreeSequence {
    fn from(v: Vec<usize>) -> Self {
        DegreeSequence(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// Degree sum is odd.
    EG1,
    /// Erdős–Gallai prefix inequality.
    EG2,
    /// Side sums differ.
    GR1,
    /// Gale–Ryser prefix inequality.
    GR2,
    /// An entry exceeds the number of available partners.
    Range,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::EG1 => "EG1",
            Condition::EG2 => "EG2",
            Condition::GR1 => "GR1",
            Condition::GR2 => "GR2",
            Condition::Range => "range",
        };
        f.write_str(s)
    }
}

/// A violated realizability condition. For prefix conditions `witness` is the
/// first failing `k`; for range violations it is the offending position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("{condition} violated{}", .witness.map(|k| format!(" at k={k}")).unwrap_or_default())]
pub struct Infeasible {
    pub condition: Condition,
    pub witness: Option<usize>,
}

impl Infeasible {
    fn new(condition: Condition, witness: Option<usize>) -> Self {
        Infeasible { condition, witness }
    }
}

/// Checks realizability of `d` as the degree sequence of a simple graph.
pub fn check_graphic(d: &DegreeSequence) -> Result<(), Infeasible> {
    let n = d.len();
    if let Some(pos) = d.0.iter().position(|&x| x >= n.max(1) && x > 0) {
        return Err(Infeasible::new(Condition::Range, Some(pos)));
    }
    if d.sum() % 2 != 0 {
        return Err(Infeasible::new(Condition::EG1, None));
    }
    let s = d.sorted_desc();
    // suffix sums of the sorted sequence
    let mut suffix = vec![0usize; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + s[i];
    }
    // `p` = number of entries >= k among positions >= k (sorted, so a prefix of the tail)
    let mut lhs = 0usize;
    let mut p = n;
    for k in 1..=n {
        lhs += s[k - 1];
        while p > 0 && s[p - 1] < k {
            p -= 1;
        }
        let big_end = p.max(k);
        let rhs = k * (k - 1) + (big_end - k) * k + suffix[big_end];
        if lhs > rhs {
            return Err(Infeasible::new(Condition::EG2, Some(k)));
        }
    }
    Ok(())
}

pub fn is_graphic(d: &DegreeSequence) -> bool {
    check_graphic(d).is_ok()
}

/// Edges `(u, v)`, `u < v`, of a simple graph whose degree at position `u`
/// equals `d[u]` for every `u`.
pub fn graphic_edges(d: &DegreeSequence) -> Result<Vec<(usize, usize)>, Infeasible> {
    check_graphic(d)?;
    let n = d.len();
    let mut residual = d.0.clone();
    let mut edges = Vec::with_capacity(d.sum() / 2);
    let mut order: Vec<usize> = (0..n).collect();
    while n > 0 {
        order.sort_unstable_by(|&a, &b| residual[b].cmp(&residual[a]).then(a.cmp(&b)));
        let v = order[0];
        let r = residual[v];
        if r == 0 {
            break;
        }
        residual[v] = 0;
        let mut taken = 0;
        for &u in order[1..].iter() {
            if taken == r {
                break;
            }
            if residual[u] == 0 {
                return Err(Infeasible::new(Condition::EG2, None));
            }
            residual[u] -= 1;
            edges.push((v.min(u), v.max(u)));
            taken += 1;
        }
        if taken < r {
            return Err(Infeasible::new(Condition::EG2, None));
        }
    }
    Ok(edges)
}

/// Havel–Hakimi realization on vertices `0..d.len()`.
pub fn realize_graphic(d: &DegreeSequence) -> crate::Result<FiniteGraph> {
    let edges = graphic_edges(d)?;
    FiniteGraph::from_edges(d.len(), edges)
}

/// Realization on caller-supplied vertex identifiers: position `u` of `d`
/// becomes `ids[u]`.
pub fn realize_graphic_on(d: &DegreeSequence, ids: &[usize]) -> Result<Vec<(usize, usize)>, Infeasible> {
    assert_eq!(d.len(), ids.len(), "one identifier per degree");
    Ok(graphic_edges(d)?
        .into_iter()
        .map(|(u, v)| (ids[u], ids[v]))
        .collect())
}

/// Checks realizability of `(a, b)` as the side-degree sequences of a simple
/// bipartite graph.
pub fn check_bigraphic(a: &DegreeSequence, b: &DegreeSequence) -> Result<(), Infeasible> {
    if let Some(pos) = a.0.iter().position(|&x| x > b.len()) {
        return Err(Infeasible::new(Condition::Range, Some(pos)));
    }
    if let Some(pos) = b.0.iter().position(|&x| x > a.len()) {
        return Err(Infeasible::new(Condition::Range, Some(pos)));
    }
    if a.sum() != b.sum() {
        return Err(Infeasible::new(Condition::GR1, None));
    }
    let sa = a.sorted_desc();
    let sb = b.sorted_desc();
    let nb = sb.len();
    let mut suffix = vec![0usize; nb + 1];
    for j in (0..nb).rev() {
        suffix[j] = suffix[j + 1] + sb[j];
    }
    let mut lhs = 0usize;
    let mut p = nb;
    for k in 1..=sa.len() {
        lhs += sa[k - 1];
        while p > 0 && sb[p - 1] < k {
            p -= 1;
        }
        // entries >= k contribute k, the rest contribute themselves
        let rhs = p * k + suffix[p];
        if lhs > rhs {
            return Err(Infeasible::new(Condition::GR2, Some(k)));
        }
    }
    Ok(())
}

pub fn is_bigraphic(a: &DegreeSequence, b: &DegreeSequence) -> bool {
    check_bigraphic(a, b).is_ok()
}

/// Bipartite graph with sides tagged; `edges` hold `(left, right)` indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bigraph {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Bigraph {
    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.left];
        for &(a, _) in &self.edges {
            d[a] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.right];
        for &(_, b) in &self.edges {
            d[b] += 1;
        }
        d
    }

    /// The same graph on `left + right` vertices, right side shifted by `left`.
    pub fn to_graph(&self) -> FiniteGraph {
        FiniteGraph::from_edges(
            self.left + self.right,
            self.edges.iter().map(|&(a, b)| (a, self.left + b)),
        )
        .expect("bipartite edges are simple")
    }
}

/// Edges `(i, j)` with `i` on the `a` side and `j` on the `b` side.
pub fn bigraphic_edges(a: &DegreeSequence, b: &DegreeSequence) -> Result<Vec<(usize, usize)>, Infeasible> {
    check_bigraphic(a, b)?;
    let mut rows: Vec<usize> = (0..a.len()).collect();
    rows.sort_by(|&x, &y| a.0[y].cmp(&a.0[x]).then(x.cmp(&y)));
    let mut residual = b.0.clone();
    let mut cols: Vec<usize> = (0..b.len()).collect();
    let mut edges = Vec::with_capacity(a.sum());
    for &i in &rows {
        let need = a.0[i];
        if need == 0 {
            break;
        }
        cols.sort_unstable_by(|&x, &y| residual[y].cmp(&residual[x]).then(x.cmp(&y)));
        for &j in &cols[..need] {
            if residual[j] == 0 {
                return Err(Infeasible::new(Condition::GR2, None));
            }
            residual[j] -= 1;
            edges.push((i, j));
        }
    }
    Ok(edges)
}

pub fn realize_bigraphic(a: &DegreeSequence, b: &DegreeSequence) -> crate::Result<Bigraph> {
    let edges = bigraphic_edges(a, b)?;
    Ok(Bigraph {
        left: a.len(),
        right: b.len(),
        edges,
    })
}
