use num_rational::Rational64;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..n`, stored as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGraph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl FiniteGraph {
    pub fn empty(n: usize) -> Self {
        FiniteGraph {
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|u| (0..n).filter(|&v| v != u).collect())
            .collect();
        FiniteGraph {
            adj,
            edge_count: n * n.saturating_sub(1) / 2,
        }
    }

    /// Builds a graph from unordered pairs, rejecting loops, out-of-range
    /// endpoints and repeated pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
            edge_count += 1;
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({u},{})",
                    w[0]
                )));
            }
        }
        Ok(FiniteGraph { adj, edge_count })
    }

    /// Trusted constructor for adjacency lists that are already sorted,
    /// symmetric and loop-free.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        debug_assert!(adj
            .iter()
            .enumerate()
            .all(|(u, l)| l.windows(2).all(|w| w[0] < w[1]) && !l.contains(&u)));
        FiniteGraph { adj, edge_count }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<FiniteGraph> {
        if perm.len() != self.n() {
            return Err(Error::Usage("permutation has wrong length".into()));
        }
        FiniteGraph::from_edges(self.n(), self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &FiniteGraph) -> FiniteGraph {
        let shift = self.n();
        let mut adj = self.adj.clone();
        adj.extend(
            other
                .adj
                .iter()
                .map(|list| list.iter().map(|v| v + shift).collect()),
        );
        FiniteGraph {
            adj,
            edge_count: self.edge_count + other.edge_count,
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n()
    }

    pub fn is_tree(&self) -> bool {
        self.n() >= 1 && self.edge_count + 1 == self.n() && self.is_connected()
    }
}

/// A graph together with a partition of its vertex set into indexed parts.
/// Parts may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionedGraph {
    graph: FiniteGraph,
    parts: Vec<Vec<usize>>,
    part_of: Vec<usize>,
}

impl PartitionedGraph {
    pub fn new(graph: FiniteGraph, parts: Vec<Vec<usize>>) -> Result<Self> {
        let mut part_of = vec![usize::MAX; graph.n()];
        for (p, members) in parts.iter().enumerate() {
            for &v in members {
                if v >= graph.n() {
                    return Err(Error::InvalidGraph(format!(
                        "part {p} names vertex {v} outside the graph"
                    )));
                }
                if part_of[v] != usize::MAX {
                    return Err(Error::InvalidGraph(format!(
                        "vertex {v} lies in parts {} and {p}",
                        part_of[v]
                    )));
                }
                part_of[v] = p;
            }
        }
        if let Some(v) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidGraph(format!("vertex {v} is in no part")));
        }
        Ok(PartitionedGraph {
            graph,
            parts,
            part_of,
        })
    }

    /// Builds the partition from a per-vertex part index.
    pub fn from_assignment(graph: FiniteGraph, part_of: Vec<usize>, num_parts: usize) -> Result<Self> {
        if part_of.len() != graph.n() {
            return Err(Error::InvalidGraph("assignment length differs from n".into()));
        }
        let mut parts = vec![Vec::new(); num_parts];
        for (v, &p) in part_of.iter().enumerate() {
            if p >= num_parts {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} assigned to part {p} of {num_parts}"
                )));
            }
            parts[p].push(v);
        }
        Ok(PartitionedGraph {
            graph,
            parts,
            part_of,
        })
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn into_graph(self) -> FiniteGraph {
        self.graph
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn part_of(&self) -> &[usize] {
        &self.part_of
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    /// Number of neighbours of `v` in each part.
    pub fn degree_profile(&self, v: usize) -> Vec<usize> {
        let mut counts = vec![0; self.parts.len()];
        for &u in self.graph.neighbors(v) {
            counts[self.part_of[u]] += 1;
        }
        counts
    }

    /// Degree profiles of all vertices, indexed `[vertex][part]`.
    pub fn degree_profiles(&self) -> Vec<Vec<usize>> {
        (0..self.graph.n()).map(|v| self.degree_profile(v)).collect()
    }

    /// Ordered pairs `(u, v)` with `u` in part `i`, `v` in part `j`; each edge
    /// inside a part is counted twice.
    pub fn ordered_pairs_between(&self, i: usize, j: usize) -> usize {
        self.parts[i]
            .iter()
            .map(|&u| {
                self.graph
                    .neighbors(u)
                    .iter()
                    .filter(|&&v| self.part_of[v] == j)
                    .count()
            })
            .sum()
    }

    /// Edge density between parts `i` and `j` as an exact fraction:
    /// `e(X_i, X_j) / (|X_i||X_j|)` for `i != j` and `2 e(X_i) / |X_i|^2` on
    /// the diagonal.
    pub fn stepped_density_exact(&self, i: usize, j: usize) -> Result<Rational64> {
        let (si, sj) = self.nonempty_sizes(i, j)?;
        let pairs = self.ordered_pairs_between(i, j) as i64;
        Ok(Rational64::new(pairs, si as i64 * sj as i64))
    }

    pub fn stepped_density(&self, i: usize, j: usize) -> Result<f64> {
        let (si, sj) = self.nonempty_sizes(i, j)?;
        Ok(self.ordered_pairs_between(i, j) as f64 / (si as f64 * sj as f64))
    }

    fn nonempty_sizes(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        if i >= self.parts.len() || j >= self.parts.len() {
            return Err(Error::Usage(format!(
                "part index out of range ({i},{j}) for {} parts",
                self.parts.len()
            )));
        }
        let (si, sj) = (self.parts[i].len(), self.parts[j].len());
        if si == 0 || sj == 0 {
            return Err(Error::Degenerate(format!("part {} is empty", if si == 0 { i } else { j })));
        }
        Ok((si, sj))
    }
}
