//! Quotients of step graphons.
//!
//! For a step graphon the minimal invariant structure is realized by the
//! coarsest grouping of parts whose degrees toward every group agree. Two
//! step graphons are fractionally isomorphic iff these quotients agree up to
//! relabeling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcore::{DensityProfile, PipelineParams, RobustProfile, StepGraphon};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedEquitableCoarsening {
    /// Class of each original part.
    pub class_of: Vec<usize>,
    pub class_footprint: Vec<f64>,
    pub class_matrix: Vec<Vec<f64>>,
}

impl WeightedEquitableCoarsening {
    pub fn classes(&self) -> usize {
        self.class_footprint.len()
    }

    /// Parts of the original graphon grouped by class.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.classes()];
        for (p, &c) in self.class_of.iter().enumerate() {
            out[c].push(p);
        }
        out
    }

    /// The quotient itself as a step graphon with one part per class.
    pub fn quotient_graphon(&self) -> Result<StepGraphon> {
        let total: f64 = self.class_footprint.iter().sum();
        let mut weights = self.class_footprint.clone();
        weights[0] += 1.0 - total;
        StepGraphon::new(weights, self.class_matrix.clone())
    }

    pub fn profile(&self) -> Result<DensityProfile> {
        DensityProfile::new(self.class_footprint.clone(), self.class_matrix.clone())
    }
}

fn degrees_to_classes(w: &StepGraphon, class_of: &[usize], k: usize) -> Vec<Vec<f64>> {
    (0..w.parts())
        .map(|i| {
            let mut row = vec![0.0; k];
            for j in 0..w.parts() {
                row[class_of[j]] += w.density(i, j) * w.weight(j);
            }
            row
        })
        .collect()
}

fn within(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Weighted color refinement on parts, from the single-class partition.
pub fn coarsest_equitable(w: &StepGraphon, tol: f64) -> WeightedEquitableCoarsening {
    let m = w.parts();
    let mut class_of = vec![0usize; m];
    let mut k = 1;
    for _ in 0..m {
        let deg = degrees_to_classes(w, &class_of, k);
        let mut next = vec![0usize; m];
        let mut next_k = 0;
        for c in 0..k {
            let mut members: Vec<usize> = (0..m).filter(|&i| class_of[i] == c).collect();
            members.sort_by(|&a, &b| lex(&deg[a], &deg[b]).then(a.cmp(&b)));
            let mut leader: Option<usize> = None;
            for &p in &members {
                match leader {
                    Some(l) if within(&deg[l], &deg[p], tol) => {}
                    _ => {
                        leader = Some(p);
                        next_k += 1;
                    }
                }
                next[p] = next_k - 1;
            }
        }
        let stable = next_k == k;
        class_of = next;
        k = next_k;
        if stable {
            break;
        }
    }
    let mut footprint = vec![0.0; k];
    for i in 0..m {
        footprint[class_of[i]] += w.weight(i);
    }
    let mut mass = vec![vec![0.0; k]; k];
    for i in 0..m {
        for j in 0..m {
            mass[class_of[i]][class_of[j]] += w.weight(i) * w.weight(j) * w.density(i, j);
        }
    }
    let mut matrix = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let v = mass[a][b] / (footprint[a] * footprint[b]);
            matrix[a][b] = v.clamp(0.0, 1.0);
        }
    }
    // the two triangle entries accumulate in different orders
    for a in 0..k {
        for b in a + 1..k {
            matrix[b][a] = matrix[a][b];
        }
    }
    WeightedEquitableCoarsening {
        class_of,
        class_footprint: footprint,
        class_matrix: matrix,
    }
}

/// Finds a class bijection `sigma` (class `c` of `a` to class `sigma[c]` of
/// `b`) matching footprints and matrices within `tol`.
pub fn match_coarsenings(
    a: &WeightedEquitableCoarsening,
    b: &WeightedEquitableCoarsening,
    tol: f64,
) -> Option<Vec<usize>> {
    let k = a.classes();
    if b.classes() != k {
        return None;
    }
    let candidates: Vec<Vec<usize>> = (0..k)
        .map(|c| {
            (0..k)
                .filter(|&d| {
                    (a.class_footprint[c] - b.class_footprint[d]).abs() <= tol
                        && (a.class_matrix[c][c] - b.class_matrix[d][d]).abs() <= tol
                })
                .collect()
        })
        .collect();
    let mut sigma = vec![usize::MAX; k];
    let mut used = vec![false; k];
    fn go(
        c: usize,
        a: &WeightedEquitableCoarsening,
        b: &WeightedEquitableCoarsening,
        tol: f64,
        candidates: &[Vec<usize>],
        sigma: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if c == sigma.len() {
            return true;
        }
        for &d in &candidates[c] {
            if used[d] {
                continue;
            }
            if (0..c).any(|e| (a.class_matrix[c][e] - b.class_matrix[d][sigma[e]]).abs() > tol) {
                continue;
            }
            sigma[c] = d;
            used[d] = true;
            if go(c + 1, a, b, tol, candidates, sigma, used) {
                return true;
            }
            used[d] = false;
        }
        false
    }
    if go(0, a, b, tol, &candidates, &mut sigma, &mut used) {
        Some(sigma)
    } else {
        None
    }
}

/// Fractional isomorphism of step graphons; on success returns the class
/// matching between the coarsenings of `w1` and `w2`.
pub fn step_fi_equivalent(w1: &StepGraphon, w2: &StepGraphon, tol: f64) -> Option<Vec<usize>> {
    match_coarsenings(&coarsest_equitable(w1, tol), &coarsest_equitable(w2, tol), tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCheck {
    /// `[c][c']`: largest relative deviation of a part's degree toward `c'`
    /// from `class_matrix[c][c'] * class_footprint[c']`, over parts in `c`.
    pub worst_relative_deviation: Vec<Vec<f64>>,
    pub passes: bool,
}

/// Checks that within each class, degrees toward every class are within a
/// factor `1 +- lambda` of the class prediction.
pub fn verify_step_partition(
    w: &StepGraphon,
    coarsening: &WeightedEquitableCoarsening,
    lambda: f64,
) -> Result<PartitionCheck> {
    if coarsening.class_of.len() != w.parts() {
        return Err(Error::Usage("coarsening does not match the graphon".into()));
    }
    let k = coarsening.classes();
    let deg = degrees_to_classes(w, &coarsening.class_of, k);
    let mut worst = vec![vec![0.0f64; k]; k];
    let mut passes = true;
    for i in 0..w.parts() {
        let c = coarsening.class_of[i];
        for t in 0..k {
            let pred = coarsening.class_matrix[c][t] * coarsening.class_footprint[t];
            let diff = (deg[i][t] - pred).abs();
            let rel = if pred > 0.0 {
                diff / pred
            } else if diff > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            worst[c][t] = worst[c][t].max(rel);
            if diff > lambda * pred + 1e-12 {
                passes = false;
            }
        }
    }
    Ok(PartitionCheck {
        worst_relative_deviation: worst,
        passes,
    })
}

/// Outcome of cleaning a step graphon against a `beta`-robust profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Cleaned {
    pub graphon: StepGraphon,
    pub profile: RobustProfile,
    /// Exact `||W - W_beta||_1` over the step structure.
    pub l1_change: f64,
}

fn threshold(d: f64, beta: f64) -> Option<f64> {
    if d < beta {
        Some(0.0)
    } else if d > 1.0 - beta {
        Some(1.0 - beta)
    } else {
        None
    }
}

/// Entrywise thresholding of a density matrix to `{0} ∪ [beta, 1 - beta]`.
pub fn robust_matrix(matrix: &[Vec<f64>], beta: f64) -> Vec<Vec<f64>> {
    matrix
        .iter()
        .map(|row| row.iter().map(|&d| threshold(d, beta).unwrap_or(d)).collect())
        .collect()
}

/// Cleans `w` at the level of clusters: part `p` lies in cluster
/// `cluster_of[p]` and `class_matrix` holds the cluster densities. Blocks
/// whose cluster density is below `beta` become 0, blocks above `1 - beta`
/// become the constant `1 - beta`, and the rest are kept. Degrees from any
/// part toward a cluster are then exactly the cleaned density times the
/// cluster footprint.
pub fn clean_against(
    w: &StepGraphon,
    cluster_of: &[usize],
    footprint: &[f64],
    class_matrix: &[Vec<f64>],
    beta: f64,
) -> Result<Cleaned> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Parameter(format!("beta = {beta} outside (0, 1/2)")));
    }
    if cluster_of.len() != w.parts() || cluster_of.iter().any(|&c| c >= footprint.len()) {
        return Err(Error::Usage("cluster map does not match the graphon".into()));
    }
    let m = w.parts();
    let mut dens = w.densities().to_vec();
    let mut l1 = 0.0;
    for i in 0..m {
        for j in 0..m {
            if let Some(t) = threshold(class_matrix[cluster_of[i]][cluster_of[j]], beta) {
                l1 += w.weight(i) * w.weight(j) * (dens[i][j] - t).abs();
                dens[i][j] = t;
            }
        }
    }
    let cleaned_matrix = robust_matrix(class_matrix, beta);
    let graphon = StepGraphon::new(w.weights().to_vec(), dens)?;
    let profile = RobustProfile::new(
        DensityProfile::new(footprint.to_vec(), cleaned_matrix)?,
        beta,
    )?;
    Ok(Cleaned {
        graphon,
        profile,
        l1_change: l1,
    })
}

/// Part-level cleaning: every part is its own cluster.
pub fn clean_beta_robust(w: &StepGraphon, params: &PipelineParams) -> Result<Cleaned> {
    let identity: Vec<usize> = (0..w.parts()).collect();
    clean_against(w, &identity, w.weights(), w.densities(), params.beta)
}
