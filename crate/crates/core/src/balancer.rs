//! Buffer construction: pads a sampled graph with buffer vertices and an
//! isolated filler set, then adds edges so that every vertex of cluster `i`
//! has exactly `D_ij` neighbours in cluster `j`.
//!
//! Layout of the output: the sampled vertices keep their ids, followed by the
//! buffers `Y_1, ..., Y_M`, followed by fresh isolated vertices. Part 0 of the
//! output partition is the filler `Z_0` and part `i + 1` is `Z_(i+1) =
//! X_(i+1) + Y_(i+1)`. Clusters below the footprint threshold have all their
//! edges removed; their parts are filled from the isolated vertices, so a
//! sampled vertex of such a cluster may end up in `Z_0`.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::degseq::{bigraphic_edges, graphic_edges, DegreeSequence};
use crate::error::{Error, Result};
use crate::fintest::{CertOrdering, FICertificate};
use crate::kernelcore::{FiniteGraph, PartitionedGraph, PipelineParams, RobustProfile};

/// Largest rounding granularity handled without loss in `f64`.
pub const MAX_GAMMA: u64 = 1 << 52;

/// Exact degree targets: `dstar[i][j] = numerators[i][j] / gamma`,
/// `degrees[i][j] = dstar[i][j] * part_sizes[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetDegreeMatrix {
    pub gamma: u64,
    pub numerators: Vec<Vec<u64>>,
    pub part_sizes: Vec<usize>,
    pub degrees: Vec<Vec<usize>>,
    /// Clusters at or above the footprint threshold.
    pub active: Vec<bool>,
}

fn ceil_numerator(gamma: u64, alpha: f64, beta: f64, d: f64) -> f64 {
    let x = gamma as f64 * (1.0 + alpha) * d / (1.0 + beta);
    (x - 1e-9 * x.max(1.0)).ceil().max(0.0)
}

/// Numerators of the rounding `ceil(gamma (1+alpha) d / (1+beta)) / gamma`,
/// with diagonal numerators raised to the next even integer.
pub fn gamma_round_numerators(d: &[Vec<f64>], alpha: f64, beta: f64, gamma: u64) -> Result<Vec<Vec<u64>>> {
    if gamma < 2 || gamma % 2 != 0 || gamma > MAX_GAMMA {
        return Err(Error::Parameter(format!(
            "Gamma = {gamma} must be even and in [2, 2^52]"
        )));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Parameter("alpha and beta must be positive".into()));
    }
    let k = d.len();
    let mut out = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in i..k {
            let mut num = ceil_numerator(gamma, alpha, beta, d[i][j]) as u64;
            if i == j && num % 2 == 1 {
                num += 1;
            }
            if num > gamma {
                return Err(Error::Parameter(format!(
                    "rounded density ({i},{j}) = {num}/{gamma} exceeds 1; alpha too large for d = {}",
                    d[i][j]
                )));
            }
            out[i][j] = num;
            out[j][i] = num;
        }
    }
    Ok(out)
}

pub fn gamma_round_matrix(d: &[Vec<f64>], alpha: f64, beta: f64, gamma: u64) -> Result<Vec<Vec<Rational64>>> {
    let g = i64::try_from(gamma).map_err(|_| Error::Overflow("Gamma exceeds i64".into()))?;
    Ok(gamma_round_numerators(d, alpha, beta, gamma)?
        .into_iter()
        .map(|row| row.into_iter().map(|k| Rational64::new(k as i64, g)).collect())
        .collect())
}

/// `|Z_i| = Gamma floor((1 + beta) m v_i / Gamma)`.
pub fn cluster_sizes(footprint: &[f64], beta: f64, m: usize, gamma: u64) -> Vec<usize> {
    footprint
        .iter()
        .map(|&v| {
            let x = (1.0 + beta) * m as f64 * v / gamma as f64;
            (x + 1e-9).floor() as usize * gamma as usize
        })
        .collect()
}

/// Smallest slack, in vertices, over the degree-sequence conditions met while
/// balancing a sample whose part sizes and degrees sit at their expectations,
/// after charging `z` standard deviations of degree noise to every vertex.
/// Negative values predict failure.
pub fn predicted_slack(footprint: &[f64], matrix: &[Vec<f64>], params: &PipelineParams, z: f64) -> Result<f64> {
    let k = footprint.len();
    let thr = params.footprint_threshold();
    let active: Vec<bool> = footprint.iter().map(|&v| v >= thr).collect();
    let num = gamma_round_numerators(matrix, params.alpha, params.beta, params.gamma)?;
    let zs = cluster_sizes(footprint, params.beta, params.m, params.gamma);
    let xs: Vec<f64> = footprint.iter().map(|&v| v * params.m as f64).collect();
    let ys: Vec<f64> = (0..k).map(|i| zs[i] as f64 - xs[i]).collect();
    let target = |i: usize, j: usize| num[i][j] as f64 * zs[j] as f64 / params.gamma as f64;
    let mut slack = f64::INFINITY;
    for i in (0..k).filter(|&i| active[i]) {
        if ys[i] < 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        for j in (0..k).filter(|&j| active[j]) {
            let d = matrix[i][j];
            if num[i][j] == 0 {
                continue;
            }
            let noise = z * (d * (1.0 - d) * xs[j]).sqrt() + 1.0;
            let a = target(i, j) - d * xs[j];
            // x in X_i: deficit into Y_j within [0, |Y_j|]
            slack = slack.min(a - noise).min(ys[j] - a - noise);
            // y in Y_j: share of the X_i deficits, completed inside Y_i
            let received = xs[i] * a / ys[j];
            let room = ys[i] - if i == j { 1.0 } else { 0.0 };
            let rest = target(j, i) - received;
            slack = slack.min(rest - 1.0).min(room - rest - 1.0);
        }
    }
    Ok(slack)
}

impl TargetDegreeMatrix {
    /// Targets for the general construction.
    pub fn new(profile: &RobustProfile, params: &PipelineParams) -> Result<Self> {
        let k = profile.clusters();
        let gamma = params.gamma;
        let thr = params.footprint_threshold();
        let active: Vec<bool> = profile.footprint().iter().map(|&v| v >= thr).collect();
        let mut numerators = gamma_round_numerators(profile.matrix(), params.alpha, params.beta, gamma)?;
        for i in 0..k {
            for j in 0..k {
                if !active[i] || !active[j] {
                    numerators[i][j] = 0;
                }
            }
        }
        let part_sizes = cluster_sizes(profile.footprint(), params.beta, params.m, gamma);
        let degrees = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (numerators[i][j] as u128 * part_sizes[j] as u128 / gamma as u128) as usize)
                    .collect()
            })
            .collect();
        Ok(TargetDegreeMatrix {
            gamma,
            numerators,
            part_sizes,
            degrees,
            active,
        })
    }

    /// Single cluster of size `n` with even degree `degree`.
    pub fn regular(n: usize, degree: usize) -> Result<Self> {
        if degree % 2 != 0 || degree >= n.max(1) {
            return Err(Error::Parameter(format!(
                "regular degree {degree} must be even and below n = {n}"
            )));
        }
        Ok(TargetDegreeMatrix {
            gamma: n as u64,
            numerators: vec![vec![degree as u64]],
            part_sizes: vec![n],
            degrees: vec![vec![degree]],
            active: vec![true],
        })
    }

    pub fn clusters(&self) -> usize {
        self.part_sizes.len()
    }

    pub fn dstar(&self, i: usize, j: usize) -> Rational64 {
        Rational64::new(self.numerators[i][j] as i64, self.gamma as i64)
    }

    /// Certificate over the parts `[Z_0, Z_1, ..., Z_M]` for order `n`.
    pub fn certificate(&self, n: usize) -> FICertificate {
        let k = self.clusters();
        let z0 = n - self.part_sizes.iter().sum::<usize>();
        let mut part_sizes = vec![z0];
        part_sizes.extend(&self.part_sizes);
        let mut degree_matrix = vec![vec![0; k + 1]; k + 1];
        for i in 0..k {
            for j in 0..k {
                degree_matrix[i + 1][j + 1] = self.degrees[i][j];
            }
        }
        FICertificate {
            part_sizes,
            degree_matrix,
            ordering: CertOrdering::Construction,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Balanced {
    /// Output graph partitioned as `[Z_0, Z_1, ..., Z_M]`.
    pub graph: PartitionedGraph,
    pub certificate: FICertificate,
    pub targets: TargetDegreeMatrix,
    pub deleted_edges: usize,
    pub first_step_edges: usize,
    pub second_step_edges: usize,
}

/// Builds the balanced graph on `params.n` vertices from a sample `f`
/// partitioned by cluster.
pub fn build_balanced(f: &PartitionedGraph, profile: &RobustProfile, params: &PipelineParams) -> Result<Balanced> {
    let targets = TargetDegreeMatrix::new(profile, params)?;
    balance_with_targets(f, &targets, params.n)
}

fn infeasible(step: String, detail: impl Into<String>) -> Error {
    Error::BalanceInfeasible {
        step,
        detail: detail.into(),
    }
}

/// `total` split over `slots` values differing by at most one; the first
/// `total mod slots` entries get the larger value.
fn round_robin(total: usize, slots: usize) -> Vec<usize> {
    if slots == 0 {
        return Vec::new();
    }
    let (q, r) = (total / slots, total % slots);
    (0..slots).map(|s| q + usize::from(s < r)).collect()
}

/// The balancing core, driven by explicit targets.
pub fn balance_with_targets(f: &PartitionedGraph, t: &TargetDegreeMatrix, n: usize) -> Result<Balanced> {
    let k = t.clusters();
    if f.num_parts() != k {
        return Err(Error::Usage(format!(
            "sample has {} parts, targets have {k}",
            f.num_parts()
        )));
    }
    let m = f.graph().n();
    let x_sizes = f.part_sizes();
    // inactive clusters get no buffer; their vertices join the isolated pool
    let mut y_sizes = vec![0; k];
    for i in (0..k).filter(|&i| t.active[i]) {
        if x_sizes[i] > t.part_sizes[i] {
            return Err(Error::Layout(format!(
                "cluster {i}: |X| = {} exceeds |Z| = {}",
                x_sizes[i], t.part_sizes[i]
            )));
        }
        y_sizes[i] = t.part_sizes[i] - x_sizes[i];
    }
    let z_total: usize = t.part_sizes.iter().sum();
    let used = m + y_sizes.iter().sum::<usize>();
    if z_total > n || used > n {
        return Err(Error::Layout(format!(
            "n = {n} too small: cluster sizes sum to {z_total}, sample plus buffers need {used}"
        )));
    }

    let mut y_ids: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut next = m;
    for &s in &y_sizes {
        y_ids.push((next..next + s).collect());
        next += s;
    }

    let part_of_f = f.part_of();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut deleted = 0;
    for (u, v) in f.graph().edges() {
        if t.active[part_of_f[u]] && t.active[part_of_f[v]] {
            edges.push((u, v));
        } else {
            deleted += 1;
        }
    }
    let profiles = f.degree_profiles();

    // received[c][y][j]: edges from X_j into buffer vertex y of Y_c
    let mut received: Vec<Vec<Vec<usize>>> = y_sizes.iter().map(|&s| vec![vec![0; k]; s]).collect();
    let mut first = 0;
    for i in (0..k).filter(|&i| t.active[i]) {
        let xs = &f.parts()[i];
        for j in (0..k).filter(|&j| t.active[j]) {
            let target = t.degrees[i][j];
            let mut a = Vec::with_capacity(xs.len());
            for &h in xs {
                let have = profiles[h][j];
                if have > target {
                    return Err(infeasible(
                        format!("first step ({i},{j}) a-sequence"),
                        format!(
                            "vertex {h} already has {have} neighbours in X_{j}, target {target}; increase beta - alpha or m"
                        ),
                    ));
                }
                a.push(target - have);
            }
            let total: usize = a.iter().sum();
            if total == 0 {
                continue;
            }
            if y_sizes[j] == 0 {
                return Err(infeasible(
                    format!("first step ({i},{j})"),
                    format!("{total} edges needed but Y_{j} is empty"),
                ));
            }
            let b = round_robin(total, y_sizes[j]);
            let pairs = bigraphic_edges(&DegreeSequence(a), &DegreeSequence(b.clone())).map_err(|e| {
                infeasible(format!("first step ({i},{j}) Gale-Ryser"), e.to_string())
            })?;
            for (y, &by) in b.iter().enumerate() {
                received[j][y][i] = by;
            }
            first += pairs.len();
            edges.extend(pairs.into_iter().map(|(h, y)| (xs[h], y_ids[j][y])));
        }
    }

    let mut second = 0;
    for i in (0..k).filter(|&i| t.active[i]) {
        for j in (i..k).filter(|&j| t.active[j]) {
            let residual = |c: usize, other: usize| -> Result<Vec<usize>> {
                let target = t.degrees[c][other];
                received[c]
                    .iter()
                    .enumerate()
                    .map(|(y, row)| {
                        target.checked_sub(row[other]).ok_or_else(|| {
                            infeasible(
                                format!("second step ({c},{other}) r-sequence"),
                                format!("buffer vertex {y} received {} > {target}", row[other]),
                            )
                        })
                    })
                    .collect()
            };
            if i == j {
                let c = residual(i, i)?;
                let sum: usize = c.iter().sum();
                if sum % 2 != 0 {
                    return Err(Error::Parity(format!(
                        "c-sequence of cluster {i} sums to odd {sum}"
                    )));
                }
                let pairs = graphic_edges(&DegreeSequence(c)).map_err(|e| {
                    infeasible(format!("second step ({i},{i}) Erdos-Gallai"), e.to_string())
                })?;
                second += pairs.len();
                edges.extend(pairs.into_iter().map(|(u, v)| (y_ids[i][u], y_ids[i][v])));
            } else {
                let ri = residual(i, j)?;
                let rj = residual(j, i)?;
                let pairs = bigraphic_edges(&DegreeSequence(ri), &DegreeSequence(rj)).map_err(|e| {
                    infeasible(format!("second step ({i},{j}) Gale-Ryser"), e.to_string())
                })?;
                second += pairs.len();
                edges.extend(pairs.into_iter().map(|(u, v)| (y_ids[i][u], y_ids[j][v])));
            }
        }
    }

    let graph = FiniteGraph::from_edges(n, edges)
        .map_err(|e| infeasible("assembly".into(), e.to_string()))?;
    let mut part_of = vec![0usize; n];
    let mut pool = Vec::new();
    for (v, &c) in part_of_f.iter().enumerate() {
        if t.active[c] {
            part_of[v] = c + 1;
        } else {
            pool.push(v);
        }
    }
    for (c, ids) in y_ids.iter().enumerate() {
        for &v in ids {
            part_of[v] = c + 1;
        }
    }
    pool.extend(next..n);
    // isolated vertices fill the inactive clusters first, the rest is Z_0
    let mut pool = pool.into_iter();
    for c in (0..k).filter(|&c| !t.active[c]) {
        for v in pool.by_ref().take(t.part_sizes[c]) {
            part_of[v] = c + 1;
        }
    }
    let graph = PartitionedGraph::from_assignment(graph, part_of, k + 1)?;
    let certificate = t.certificate(n);
    if !verify_certificate(&graph, &certificate) {
        return Err(infeasible(
            "post-check".into(),
            "constructed graph does not meet its certificate",
        ));
    }
    Ok(Balanced {
        graph,
        certificate,
        targets: t.clone(),
        deleted_edges: deleted,
        first_step_edges: first,
        second_step_edges: second,
    })
}

/// Exact check that the partition of `g` is equitable with the certified
/// parameters.
pub fn verify_certificate(g: &PartitionedGraph, cert: &FICertificate) -> bool {
    if g.part_sizes() != cert.part_sizes {
        return false;
    }
    if cert.degree_matrix.len() != cert.classes() {
        return false;
    }
    g.parts().iter().enumerate().all(|(i, members)| {
        members
            .iter()
            .all(|&u| g.degree_profile(u) == cert.degree_matrix[i])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernelcore::{DensityProfile, ParamMode, StepGraphon};
    use crate::sampler::sample_clustered;

    fn params(m: usize, n: usize, beta: f64, alpha: f64, gamma: u64, clusters: usize) -> PipelineParams {
        PipelineParams {
            epsilon: 0.3,
            beta,
            lambda: 0.01,
            delta: 1e-3,
            alpha,
            gamma,
            m,
            n,
            clusters,
            mode: ParamMode::Practical,
        }
    }

    fn robust(v: Vec<f64>, d: Vec<Vec<f64>>, beta: f64) -> RobustProfile {
        RobustProfile::new(DensityProfile::new(v, d).unwrap(), beta).unwrap()
    }

    #[test]
    fn rounding_examples() {
        let r = gamma_round_matrix(&[vec![0.5, 0.5], vec![0.5, 0.0]], 0.02, 0.05, 100).unwrap();
        assert_eq!(r[0][1], Rational64::new(49, 100));
        assert_eq!(r[0][0], Rational64::new(50, 100));
        assert_eq!(r[1][1], Rational64::new(0, 1));
        assert!(gamma_round_matrix(&[vec![0.99]], 0.5, 0.01, 100).is_err());
        assert!(gamma_round_matrix(&[vec![0.5]], 0.02, 0.05, 7).is_err());
    }

    #[test]
    fn round_robin_splits_evenly() {
        assert_eq!(round_robin(7, 3), vec![3, 2, 2]);
        assert_eq!(round_robin(6, 3), vec![2, 2, 2]);
    }

    #[test]
    fn cycle_certificate() {
        let c6 = FiniteGraph::from_edges(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        let g = PartitionedGraph::new(c6, vec![(0..6).collect()]).unwrap();
        let cert = FICertificate {
            part_sizes: vec![6],
            degree_matrix: vec![vec![2]],
            ordering: CertOrdering::Construction,
        };
        assert!(verify_certificate(&g, &cert));
    }

    #[test]
    fn constant_case_is_regular() {
        let w = StepGraphon::constant(0.5).unwrap();
        let p = params(1800, 2100, 0.15, 0.12, 100, 1);
        let prof = robust(vec![1.0], vec![vec![0.5]], 0.15);
        let f = sample_clustered(&w, &[0], 1, p.m, 5).unwrap();
        let out = build_balanced(&f, &prof, &p).unwrap();
        assert!(verify_certificate(&out.graph, &out.certificate));
        let d = out.targets.degrees[0][0];
        assert_eq!(d % 2, 0);
        for &v in &out.graph.parts()[1] {
            assert_eq!(out.graph.graph().degree(v), d);
        }
        for &v in &out.graph.parts()[0] {
            assert_eq!(out.graph.graph().degree(v), 0);
        }
        assert_eq!(out.graph.graph().n(), 2100);

        let mut perturbed: Vec<_> = out.graph.graph().edges().collect();
        perturbed.pop();
        let g2 = FiniteGraph::from_edges(2100, perturbed).unwrap();
        let pg2 = PartitionedGraph::new(g2, out.graph.parts().to_vec()).unwrap();
        assert!(!verify_certificate(&pg2, &out.certificate));
    }

    #[test]
    fn added_edges_match_a_sums() {
        let w = StepGraphon::constant(0.5).unwrap();
        let p = params(400, 480, 0.2, 0.15, 20, 1);
        let prof = robust(vec![1.0], vec![vec![0.5]], 0.2);
        let f = sample_clustered(&w, &[0], 1, p.m, 2).unwrap();
        let out = build_balanced(&f, &prof, &p).unwrap();
        let d = out.targets.degrees[0][0];
        let a_sum: usize = f.graph().degrees().iter().map(|&x| d - x).sum();
        assert_eq!(out.first_step_edges, a_sum);
        assert_eq!(
            out.graph.graph().edge_count(),
            f.graph().edge_count() + out.first_step_edges + out.second_step_edges
        );
    }

    #[test]
    fn sub_threshold_cluster_is_isolated() {
        let w = StepGraphon::new(vec![0.999, 0.001], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let mut p = params(600, 760, 0.2, 0.15, 20, 2);
        p.delta = 0.01;
        let prof = robust(vec![0.999, 0.001], vec![vec![0.5, 0.5], vec![0.5, 0.5]], 0.2);
        let f = (0..50)
            .map(|s| sample_clustered(&w, &[0, 1], 2, p.m, s).unwrap())
            .find(|f| !f.parts()[1].is_empty())
            .expect("a sample with a vertex in the small cluster");
        let out = build_balanced(&f, &prof, &p).unwrap();
        assert!(out.deleted_edges > 0);
        assert!(out.graph.parts()[2].is_empty());
        for &v in &f.parts()[1] {
            assert_eq!(out.graph.graph().degree(v), 0);
            assert_eq!(out.graph.part_of()[v], 0);
        }
        assert!(verify_certificate(&out.graph, &out.certificate));
    }

    #[test]
    fn two_cluster_targets_are_symmetric() {
        let prof = robust(vec![0.4, 0.6], vec![vec![0.6, 0.3], vec![0.3, 0.5]], 0.1);
        let p = params(3000, 3700, 0.2, 0.18, 40, 2);
        let t = TargetDegreeMatrix::new(&prof, &p).unwrap();
        for i in 0..2 {
            assert_eq!(t.part_sizes[i] % 40, 0);
            assert_eq!(t.degrees[i][i] % 2, 0);
            for j in 0..2 {
                assert_eq!(t.degrees[i][j] * t.part_sizes[i], t.degrees[j][i] * t.part_sizes[j]);
            }
        }
        let w = StepGraphon::new(vec![0.4, 0.6], vec![vec![0.6, 0.3], vec![0.3, 0.5]]).unwrap();
        let f = sample_clustered(&w, &[0, 1], 2, p.m, 1).unwrap();
        let out = balance_with_targets(&f, &t, p.n).unwrap();
        assert!(verify_certificate(&out.graph, &out.certificate));
        assert_eq!(out.certificate.part_sizes.iter().sum::<usize>(), 3700);
    }

    #[test]
    fn layout_error_when_n_too_small() {
        let w = StepGraphon::constant(0.5).unwrap();
        let p = params(400, 300, 0.1, 0.08, 20, 1);
        let prof = robust(vec![1.0], vec![vec![0.5]], 0.1);
        let f = sample_clustered(&w, &[0], 1, p.m, 2).unwrap();
        assert!(matches!(build_balanced(&f, &prof, &p), Err(Error::Layout(_))));
    }

    #[test]
    fn infeasible_when_gap_is_too_small() {
        // buffer of 2 vertices cannot absorb sampling noise
        let w = StepGraphon::constant(0.5).unwrap();
        let p = params(400, 404, 0.005, 0.004, 2, 1);
        let prof = robust(vec![1.0], vec![vec![0.5]], 0.005);
        let f = sample_clustered(&w, &[0], 1, p.m, 2).unwrap();
        assert!(matches!(
            build_balanced(&f, &prof, &p),
            Err(Error::BalanceInfeasible { .. })
        ));
    }
}
