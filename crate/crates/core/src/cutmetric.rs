//! Cut norm and cut distance for step kernels, plus the certified distance
//! report assembled for pipeline outputs.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balancer::TargetDegreeMatrix;
use crate::error::{Error, Result};
use crate::fintest::FICertificate;
use crate::kernelcore::{PartitionedGraph, RobustProfile, StepGraphon};
use crate::sampler::fs3_bound;

/// Largest part count handled by [`cut_norm_exact`].
pub const ORACLE_LIMIT: usize = 24;

/// A symmetric step function with possibly negative values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedStepKernel {
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl SignedStepKernel {
    pub fn new(weights: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidGraphon("kernel weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidGraphon(format!("kernel weights sum to {total}")));
        }
        if values.len() != k || values.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidGraphon(format!("kernel values must be {k}x{k}")));
        }
        for i in 0..k {
            for j in 0..k {
                if values[i][j] != values[j][i] || !(values[i][j].abs() <= 1.0) {
                    return Err(Error::InvalidGraphon(format!(
                        "kernel value ({i},{j}) invalid or asymmetric"
                    )));
                }
            }
        }
        Ok(SignedStepKernel { weights, values })
    }

    /// `a - b` for graphons on the same part structure.
    pub fn difference(a: &StepGraphon, b: &StepGraphon) -> Result<Self> {
        if a.weights() != b.weights() {
            return Err(Error::Usage("difference needs identical part structures".into()));
        }
        let values = a
            .densities()
            .iter()
            .zip(b.densities())
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
            .collect();
        SignedStepKernel::new(a.weights().to_vec(), values)
    }

    pub fn parts(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        SignedStepKernel::new(
            self.weights.clone(),
            self.values.iter().map(|r| r.iter().map(|v| v * c).collect()).collect(),
        )
    }

    /// Simultaneous permutation of rows, columns and weights.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        SignedStepKernel::new(
            order.iter().map(|&o| self.weights[o]).collect(),
            order
                .iter()
                .map(|&a| order.iter().map(|&b| self.values[a][b]).collect())
                .collect(),
        )
    }

    /// `||K||_1`.
    pub fn l1_norm(&self) -> f64 {
        let mut t = 0.0;
        for i in 0..self.parts() {
            for j in 0..self.parts() {
                t += self.weights[i] * self.weights[j] * self.values[i][j].abs();
            }
        }
        t
    }

    /// `integral over S x T` for fractional indicators `s`, `t` in `[0,1]^M`.
    pub fn bilinear(&self, s: &[f64], t: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.parts() {
            if s[i] == 0.0 {
                continue;
            }
            for j in 0..self.parts() {
                acc += s[i] * t[j] * self.weights[i] * self.weights[j] * self.values[i][j];
            }
        }
        acc
    }

    fn weighted(&self) -> Vec<Vec<f64>> {
        (0..self.parts())
            .map(|i| {
                (0..self.parts())
                    .map(|j| self.weights[i] * self.weights[j] * self.values[i][j])
                    .collect()
            })
            .collect()
    }
}

fn best_for_columns(col: &[f64]) -> f64 {
    let (mut pos, mut neg) = (0.0, 0.0);
    for &c in col {
        if c > 0.0 {
            pos += c;
        } else {
            neg -= c;
        }
    }
    f64::max(pos, neg)
}

/// Exact cut norm by enumerating row sets `S` in Gray-code order; the best
/// `T` for a fixed `S` takes every column of one sign.
pub fn cut_norm_exact(k: &SignedStepKernel) -> Result<f64> {
    let m = k.parts();
    if m > ORACLE_LIMIT {
        return Err(Error::OracleLimit {
            parts: m,
            limit: ORACLE_LIMIT,
        });
    }
    let a = k.weighted();
    let high = m.min(6);
    let low = m - high;
    let best = (0u64..1 << high)
        .into_par_iter()
        .map(|prefix| {
            let mut col = vec![0.0; m];
            for b in 0..high {
                if prefix >> b & 1 == 1 {
                    for (j, c) in col.iter_mut().enumerate() {
                        *c += a[low + b][j];
                    }
                }
            }
            let mut best = best_for_columns(&col);
            let mut in_set = vec![false; low];
            for step in 1u64..1 << low {
                let bit = step.trailing_zeros() as usize;
                let sign = if in_set[bit] { -1.0 } else { 1.0 };
                in_set[bit] = !in_set[bit];
                for (j, c) in col.iter_mut().enumerate() {
                    *c += sign * a[bit][j];
                }
                best = best.max(best_for_columns(&col));
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

fn eval_sets(a: &[Vec<f64>], s: &[bool], t: &[bool]) -> f64 {
    let mut acc = 0.0;
    for (i, row) in a.iter().enumerate() {
        if s[i] {
            for (j, &x) in row.iter().enumerate() {
                if t[j] {
                    acc += x;
                }
            }
        }
    }
    acc
}

fn improve(a: &[Vec<f64>], mut s: Vec<bool>, sign: f64) -> f64 {
    let m = a.len();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..100 {
        let t: Vec<bool> = (0..m)
            .map(|j| sign * (0..m).filter(|&i| s[i]).map(|i| a[i][j]).sum::<f64>() > 0.0)
            .collect();
        s = (0..m)
            .map(|i| sign * (0..m).filter(|&j| t[j]).map(|j| a[i][j]).sum::<f64>() > 0.0)
            .collect();
        let v = sign * eval_sets(a, &s, &t);
        if v <= best {
            break;
        }
        best = v;
    }
    best.max(0.0)
}

/// Lower bound on the cut norm by alternating maximization from `restarts`
/// random row sets, for both signs.
pub fn cut_norm_heuristic(k: &SignedStepKernel, restarts: usize, seed: u64) -> f64 {
    let a = k.weighted();
    let m = k.parts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for r in 0..restarts.max(1) {
        let mut s: Vec<bool> = if r == 0 {
            vec![true; m]
        } else {
            (0..m).map(|_| rng.gen::<bool>()).collect()
        };
        if !s.iter().any(|&x| x) {
            s[rng.gen_range(0..m)] = true;
        }
        best = best.max(improve(&a, s.clone(), 1.0)).max(improve(&a, s, -1.0));
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceFlag {
    /// The graphons are relabelings of each other.
    ExactZero,
    /// Minimum over the searched alignments.
    UpperBound,
    /// Oracle limit exceeded; the norm itself is a heuristic lower bound.
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutDistance {
    pub value: f64,
    pub flag: DistanceFlag,
}

const PERMUTATION_BUDGET: usize = 40_320;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            let swap = if k % 2 == 0 { i } else { 0 };
            cur.swap(swap, k - 1);
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

/// Weight-compatible bijections from parts of `a` to parts of `b`, or `None`
/// if the weight multisets differ or the search would be too large.
fn compatible_maps(a: &StepGraphon, b: &StepGraphon) -> Option<Vec<Vec<usize>>> {
    if a.parts() != b.parts() {
        return None;
    }
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for i in 0..a.parts() {
        match groups.iter_mut().find(|(g, _)| close(a.weight(g[0]), a.weight(i))) {
            Some((g, _)) => g.push(i),
            None => groups.push((vec![i], Vec::new())),
        }
    }
    for j in 0..b.parts() {
        let (_, targets) = groups.iter_mut().find(|(g, _)| close(a.weight(g[0]), b.weight(j)))?;
        targets.push(j);
    }
    if groups.iter().any(|(g, t)| g.len() != t.len()) {
        return None;
    }
    let mut count = 1usize;
    for (g, _) in &groups {
        count = count.saturating_mul((1..=g.len()).product());
        if count > PERMUTATION_BUDGET {
            return None;
        }
    }
    let mut maps = vec![vec![usize::MAX; a.parts()]];
    for (g, t) in &groups {
        let perms = permutations(g.len());
        maps = maps
            .into_iter()
            .flat_map(|base| {
                perms.iter().map(move |p| {
                    let mut m = base.clone();
                    for (x, &y) in p.iter().enumerate() {
                        m[g[x]] = t[y];
                    }
                    m
                })
            })
            .collect();
    }
    Some(maps)
}

/// Kernel of `a - b` on the common refinement of the interval layouts where
/// `a`'s parts are laid out in index order and `b`'s in `order_b`.
fn overlay(a: &StepGraphon, b: &StepGraphon, order_b: &[usize]) -> Result<SignedStepKernel> {
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    let (mut i, mut jj) = (0usize, 0usize);
    let (mut left_a, mut left_b) = (a.weight(0), b.weight(order_b[0]));
    while i < a.parts() && jj < b.parts() {
        let w = left_a.min(left_b);
        if w > 1e-15 {
            cells.push((i, order_b[jj], w));
        }
        left_a -= w;
        left_b -= w;
        if left_a <= 1e-15 {
            i += 1;
            if i < a.parts() {
                left_a = a.weight(i);
            }
        }
        if left_b <= 1e-15 {
            jj += 1;
            if jj < b.parts() {
                left_b = b.weight(order_b[jj]);
            }
        }
    }
    let total: f64 = cells.iter().map(|c| c.2).sum();
    let weights: Vec<f64> = cells.iter().map(|c| c.2 / total).collect();
    let values = cells
        .iter()
        .map(|&(ia, ib, _)| {
            cells
                .iter()
                .map(|&(ja, jb, _)| a.density(ia, ja) - b.density(ib, jb))
                .collect()
        })
        .collect();
    SignedStepKernel::new(weights, values)
}

/// Upper bound on the cut distance over part permutations and interval
/// overlays.
pub fn cut_distance_step(a: &StepGraphon, b: &StepGraphon) -> Result<CutDistance> {
    let mut best = f64::INFINITY;
    let mut heuristic = false;
    if let Some(maps) = compatible_maps(a, b) {
        if a.parts() <= ORACLE_LIMIT {
            for map in maps {
                let values: Vec<Vec<f64>> = (0..a.parts())
                    .map(|i| {
                        (0..a.parts())
                            .map(|j| a.density(i, j) - b.density(map[i], map[j]))
                            .collect()
                    })
                    .collect();
                if values.iter().flatten().all(|&v| v == 0.0) {
                    return Ok(CutDistance {
                        value: 0.0,
                        flag: DistanceFlag::ExactZero,
                    });
                }
                let k = SignedStepKernel::new(a.weights().to_vec(), values)?;
                best = best.min(cut_norm_exact(&k)?);
            }
        }
    }
    let orders: Vec<Vec<usize>> = if b.parts() <= 6 {
        permutations(b.parts())
    } else {
        vec![(0..b.parts()).collect()]
    };
    for order in orders {
        let k = overlay(a, b, &order)?;
        let v = if k.parts() <= ORACLE_LIMIT {
            cut_norm_exact(&k)?
        } else {
            heuristic = true;
            cut_norm_heuristic(&k, 64, 0)
        };
        best = best.min(v);
    }
    Ok(CutDistance {
        value: best,
        flag: if heuristic {
            DistanceFlag::Heuristic
        } else {
            DistanceFlag::UpperBound
        },
    })
}

/// Vertex-deletion bound `2 (1 - m/n)` on the cut distance between a graph on
/// `n` vertices and an induced subgraph on `m` of them.
pub fn zoom_bound(n: usize, m: usize) -> Result<f64> {
    if m < 1 || m > n {
        return Err(Error::Usage(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    Ok((2 * (n - m)) as f64 / n as f64)
}

/// Components of the cut-distance bound between an input graphon and the
/// balanced output built from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    /// Exact L1 cost of cleaning.
    pub cleaning_l1: f64,
    /// `22 / sqrt(log2 m)`, assumed rather than verified.
    pub sampling_bound: f64,
    pub sampling_bound_vacuous: bool,
    /// `zoom_bound(n, m)` plus the L1 cost `2 * deleted / m^2` of deletions.
    pub balancing_bound: f64,
    pub zoom: f64,
    pub deletion_l1: f64,
    /// Largest `|d*_ij - d_ij|` over on-threshold pairs.
    pub rounding_drift: f64,
    /// Largest `|stepped_density - d*_ij|` over on-threshold pairs, as an
    /// exact fraction `[numerator, denominator]`.
    pub stepped_density_deviation: [i64; 2],
    pub stepped_density_exact: bool,
    pub total_upper_bound: f64,
    /// Set when the exactness component is nonzero.
    pub flagged: bool,
}

pub struct ReportInputs<'a> {
    pub graph: &'a PartitionedGraph,
    pub certificate: &'a FICertificate,
    pub targets: &'a TargetDegreeMatrix,
    pub profile: &'a RobustProfile,
    pub cleaning_l1: f64,
    pub m: usize,
    pub deleted_edges: usize,
}

pub fn certified_distance_report(inp: &ReportInputs<'_>) -> Result<DistanceReport> {
    let g = inp.graph;
    let n = g.graph().n();
    if inp.certificate.order() != n {
        return Err(Error::Usage("certificate does not match the graph".into()));
    }
    let k = inp.targets.clusters();
    let mut worst = Rational64::new(0, 1);
    let mut drift = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            if !(inp.targets.active[i] && inp.targets.active[j]) || inp.targets.part_sizes[i] == 0 || inp.targets.part_sizes[j] == 0 {
                continue;
            }
            let dstar = inp.targets.dstar(i, j);
            let got = g.stepped_density_exact(i + 1, j + 1)?;
            let dev = if got > dstar { got - dstar } else { dstar - got };
            if dev > worst {
                worst = dev;
            }
            let approx = *dstar.numer() as f64 / *dstar.denom() as f64;
            drift = drift.max((approx - inp.profile.matrix()[i][j]).abs());
        }
    }
    let m = inp.m;
    let sampling = fs3_bound(m);
    let zoom = zoom_bound(n, m)?;
    let deletion = 2.0 * inp.deleted_edges as f64 / (m as f64 * m as f64);
    let balancing = zoom + deletion;
    let exact = *worst.numer() == 0;
    Ok(DistanceReport {
        cleaning_l1: inp.cleaning_l1,
        sampling_bound: sampling,
        sampling_bound_vacuous: sampling > 1.0,
        balancing_bound: balancing,
        zoom,
        deletion_l1: deletion,
        rounding_drift: drift,
        stepped_density_deviation: [*worst.numer(), *worst.denom()],
        stepped_density_exact: exact,
        total_upper_bound: inp.cleaning_l1 + sampling + balancing,
        flagged: !exact,
    })
}
