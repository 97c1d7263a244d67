use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcore::FiniteGraph;

/// Absolute tolerance on the weight sum of a step graphon.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Default tolerance for comparing degrees and densities computed in floating point.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A graphon that is constant on the blocks of a finite weighted partition.
///
/// Part `i` has measure `weights[i]`; the value on block `i x j` is
/// `densities[i][j]`. The matrix is stored symmetrically and every entry lies
/// in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepGraphon", into = "RawStepGraphon")]
pub struct StepGraphon {
    weights: Vec<f64>,
    densities: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawStepGraphon {
    weights: Vec<f64>,
    densities: Vec<Vec<f64>>,
}

impl TryFrom<RawStepGraphon> for StepGraphon {
    type Error = Error;

    fn try_from(raw: RawStepGraphon) -> Result<Self> {
        StepGraphon::new(raw.weights, raw.densities)
    }
}

impl From<StepGraphon> for RawStepGraphon {
    fn from(w: StepGraphon) -> Self {
        RawStepGraphon {
            weights: w.weights,
            densities: w.densities,
        }
    }
}

impl StepGraphon {
    pub fn new(weights: Vec<f64>, densities: Vec<Vec<f64>>) -> Result<Self> {
        let parts = weights.len();
        if parts == 0 {
            return Err(Error::InvalidGraphon("no parts".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidGraphon(format!(
                "part {i} has non-positive weight {w}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidGraphon(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        if densities.len() != parts || densities.iter().any(|row| row.len() != parts) {
            return Err(Error::InvalidGraphon(format!(
                "density matrix must be {parts}x{parts}"
            )));
        }
        for i in 0..parts {
            for j in 0..parts {
                let d = densities[i][j];
                if !(0.0..=1.0).contains(&d) {
                    return Err(Error::InvalidGraphon(format!(
                        "density ({i},{j}) = {d} outside [0,1]"
                    )));
                }
                if d != densities[j][i] {
                    return Err(Error::InvalidGraphon(format!(
                        "density matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(StepGraphon { weights, densities })
    }

    /// The constant graphon with value `d` on a single part.
    pub fn constant(d: f64) -> Result<Self> {
        StepGraphon::new(vec![1.0], vec![vec![d]])
    }

    pub fn parts(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn densities(&self) -> &[Vec<f64>] {
        &self.densities
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.densities[i][j]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.parts() {
            return Err(Error::Usage(format!(
                "part index {i} out of range for {} parts",
                self.parts()
            )));
        }
        Ok(())
    }

    /// Generalized degree of any point of part `i` into part `j`.
    pub fn degree(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.densities[i][j] * self.weights[j])
    }

    /// Total degree of any point of part `i`.
    pub fn total_degree(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok((0..self.parts())
            .map(|j| self.densities[i][j] * self.weights[j])
            .sum())
    }

    /// Integral of the graphon over the unit square.
    pub fn edge_density(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.parts() {
            for j in 0..self.parts() {
                total += self.weights[i] * self.weights[j] * self.densities[i][j];
            }
        }
        total
    }

    /// L1 distance to another graphon on the same part structure.
    pub fn l1_distance_same_parts(&self, other: &StepGraphon) -> Result<f64> {
        if self.weights != other.weights {
            return Err(Error::Usage(
                "L1 distance requires identical part structures".into(),
            ));
        }
        let mut total = 0.0;
        for i in 0..self.parts() {
            for j in 0..self.parts() {
                total += self.weights[i]
                    * self.weights[j]
                    * (self.densities[i][j] - other.densities[i][j]).abs();
            }
        }
        Ok(total)
    }

    /// Relabels parts: part `k` of the result is part `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<StepGraphon> {
        let mut seen = vec![false; self.parts()];
        if order.len() != self.parts() {
            return Err(Error::Usage("permutation has wrong length".into()));
        }
        for &o in order {
            if o >= self.parts() || std::mem::replace(&mut seen[o], true) {
                return Err(Error::Usage("not a permutation".into()));
            }
        }
        let weights = order.iter().map(|&o| self.weights[o]).collect();
        let densities = order
            .iter()
            .map(|&a| order.iter().map(|&b| self.densities[a][b]).collect())
            .collect();
        StepGraphon::new(weights, densities)
    }
}

/// The graphon representation of a finite graph: one part of weight `1/n` per
/// vertex and 0/1 densities, with a zero diagonal.
pub fn graphon_of_graph(g: &FiniteGraph) -> Result<StepGraphon> {
    let n = g.n();
    if n == 0 {
        return Err(Error::Usage("graph has no vertices".into()));
    }
    let mut densities = vec![vec![0.0; n]; n];
    for (u, v) in g.edges() {
        densities[u][v] = 1.0;
        densities[v][u] = 1.0;
    }
    let w = 1.0 / n as f64;
    let mut weights = vec![w; n];
    // keep the sum within tolerance for large n
    let drift = 1.0 - weights.iter().sum::<f64>();
    weights[0] += drift;
    StepGraphon::new(weights, densities)
}

/// Cluster footprint together with the density matrix between clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    footprint: Vec<f64>,
    matrix: Vec<Vec<f64>>,
}

impl DensityProfile {
    pub fn new(footprint: Vec<f64>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let k = footprint.len();
        if k == 0 {
            return Err(Error::InvalidGraphon("empty profile".into()));
        }
        if footprint.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidGraphon("footprint entry outside [0,1]".into()));
        }
        let total: f64 = footprint.iter().sum();
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidGraphon(format!(
                "footprint sums to {total}, expected 1"
            )));
        }
        if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidGraphon(format!("profile matrix must be {k}x{k}")));
        }
        for i in 0..k {
            for j in 0..k {
                if !(0.0..=1.0).contains(&matrix[i][j]) || matrix[i][j] != matrix[j][i] {
                    return Err(Error::InvalidGraphon(format!(
                        "profile matrix entry ({i},{j}) invalid"
                    )));
                }
            }
        }
        Ok(DensityProfile { footprint, matrix })
    }

    pub fn clusters(&self) -> usize {
        self.footprint.len()
    }

    pub fn footprint(&self) -> &[f64] {
        &self.footprint
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }
}

/// A density profile whose matrix is `beta`-robust: every entry is 0 or lies
/// in `[beta, 1 - beta]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustProfile {
    profile: DensityProfile,
    beta: f64,
}

impl RobustProfile {
    pub fn new(profile: DensityProfile, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.5) {
            return Err(Error::Parameter(format!("beta = {beta} outside (0, 1/2)")));
        }
        for (i, row) in profile.matrix().iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !is_robust_entry(d, beta) {
                    return Err(Error::InvalidGraphon(format!(
                        "entry ({i},{j}) = {d} is not {beta}-robust"
                    )));
                }
            }
        }
        Ok(RobustProfile { profile, beta })
    }

    pub fn profile(&self) -> &DensityProfile {
        &self.profile
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn clusters(&self) -> usize {
        self.profile.clusters()
    }

    pub fn footprint(&self) -> &[f64] {
        self.profile.footprint()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        self.profile.matrix()
    }
}

pub fn is_robust_entry(d: f64, beta: f64) -> bool {
    d == 0.0 || (beta..=1.0 - beta).contains(&d)
}
