//! Seeded sampling of `G(m, W)` from a step graphon, with post hoc checks of
//! the part-size and degree concentration events and a retry budget.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcore::{FiniteGraph, PartitionedGraph, PipelineParams, RobustProfile, StepGraphon};

pub const DEFAULT_MAX_ATTEMPTS: usize = 100;

/// Result of a successful rejection-sampling run.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub graph: PartitionedGraph,
    pub attempts: usize,
    pub event_report: EventReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub part_sizes: Vec<usize>,
    pub expected_sizes: Vec<f64>,
    /// Per cluster; `true` for clusters below the footprint threshold.
    pub size_ok: Vec<bool>,
    /// `[i][j]`: largest `|deg(x; X_j) - d_ij v_j m|` over `x` in `X_i`.
    pub worst_degree_dev: Vec<Vec<f64>>,
    /// Number of `(vertex, cluster)` pairs outside the degree window.
    pub fs2_violations: usize,
    pub fs1_ok: bool,
    pub fs2_ok: bool,
    /// `22 / sqrt(log2 m)`, assumed rather than verified.
    pub fs3_assumed_bound: f64,
}

impl EventReport {
    pub fn accepted(&self) -> bool {
        self.fs1_ok && self.fs2_ok
    }

    fn badness(&self) -> usize {
        self.size_ok.iter().filter(|ok| !**ok).count() + self.fs2_violations
    }

    pub fn summary(&self) -> String {
        format!(
            "{} part-size failures, {} degree-window violations",
            self.size_ok.iter().filter(|ok| !**ok).count(),
            self.fs2_violations
        )
    }
}

pub fn fs3_bound(m: usize) -> f64 {
    22.0 / (m as f64).log2().sqrt()
}

/// Acceptance threshold for a Bernoulli draw against a uniform `u64`.
/// `None` means the edge is always present.
fn threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        Some((p * 18_446_744_073_709_551_616.0) as u64)
    }
}

fn draw_parts(w: &StepGraphon, m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut cum = Vec::with_capacity(w.parts());
    let mut acc = 0.0;
    for &x in w.weights() {
        acc += x;
        cum.push(acc);
    }
    (0..m)
        .map(|_| {
            let u: f64 = rng.gen();
            cum.iter().position(|&c| u < c).unwrap_or(w.parts() - 1)
        })
        .collect()
}

fn sample_raw(w: &StepGraphon, m: usize, seed: u64) -> Result<(FiniteGraph, Vec<usize>)> {
    if m < 2 {
        return Err(Error::Usage(format!("sample size m={m} must be at least 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let part = draw_parts(w, m, &mut rng);
    let k = w.parts();
    let thresholds: Vec<Vec<Option<u64>>> = (0..k)
        .map(|a| (0..k).map(|b| threshold(w.density(a, b))).collect())
        .collect();
    // row-major pair order keeps every adjacency list sorted
    let mut adj = vec![Vec::new(); m];
    for u in 0..m {
        let row = &thresholds[part[u]];
        for v in u + 1..m {
            let r = rng.next_u64();
            let hit = match row[part[v]] {
                None => true,
                Some(t) => r < t,
            };
            if hit {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    Ok((FiniteGraph::from_sorted_adjacency(adj), part))
}

/// One draw of `G(m, W)` partitioned by the part each vertex fell into.
pub fn sample_once(w: &StepGraphon, m: usize, seed: u64) -> Result<PartitionedGraph> {
    let (g, part) = sample_raw(w, m, seed)?;
    PartitionedGraph::from_assignment(g, part, w.parts())
}

/// One draw of `G(m, W)` partitioned by cluster, where part `p` of `W`
/// belongs to cluster `cluster_of[p]`.
pub fn sample_clustered(
    w: &StepGraphon,
    cluster_of: &[usize],
    clusters: usize,
    m: usize,
    seed: u64,
) -> Result<PartitionedGraph> {
    if cluster_of.len() != w.parts() || cluster_of.iter().any(|&c| c >= clusters) {
        return Err(Error::Usage("cluster map does not match the graphon".into()));
    }
    let (g, part) = sample_raw(w, m, seed)?;
    let assignment = part.into_iter().map(|p| cluster_of[p]).collect();
    PartitionedGraph::from_assignment(g, assignment, clusters)
}

/// Checks the part-size and degree events from scratch.
pub fn check_events(
    graph: &PartitionedGraph,
    profile: &RobustProfile,
    params: &PipelineParams,
) -> EventReport {
    let k = profile.clusters();
    let m = graph.graph().n() as f64;
    let v = profile.footprint();
    let d = profile.matrix();
    let lam = params.lambda;
    let thr = params.footprint_threshold();
    let big: Vec<bool> = v.iter().map(|&x| x >= thr).collect();

    let part_sizes = graph.part_sizes();
    let expected_sizes: Vec<f64> = v.iter().map(|&x| x * m).collect();
    let size_ok: Vec<bool> = (0..k)
        .map(|i| {
            !big[i] || {
                let s = part_sizes[i] as f64;
                (1.0 - lam) * expected_sizes[i] <= s && s <= (1.0 + lam) * expected_sizes[i]
            }
        })
        .collect();

    let mut worst = vec![vec![0.0f64; k]; k];
    let mut violations = 0;
    for (i, members) in graph.parts().iter().enumerate() {
        if !big[i] {
            continue;
        }
        for &x in members {
            let prof = graph.degree_profile(x);
            for j in (0..k).filter(|&j| big[j]) {
                let target = d[i][j] * v[j] * m;
                let deg = prof[j] as f64;
                worst[i][j] = worst[i][j].max((deg - target).abs());
                let hi = (1.0 + 6.0 * lam) * target + 1.0;
                let lo = if d[i][j] == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (1.0 - 6.0 * lam) * target - 1.0
                };
                if deg < lo || deg > hi {
                    violations += 1;
                }
            }
        }
    }
    EventReport {
        fs1_ok: size_ok.iter().all(|&ok| ok),
        fs2_ok: violations == 0,
        part_sizes,
        expected_sizes,
        size_ok,
        worst_degree_dev: worst,
        fs2_violations: violations,
        fs3_assumed_bound: fs3_bound(graph.graph().n()),
    }
}

/// Rejection sampling with the clustering of the profile. Attempt `t` uses
/// seed `seed + t`; the first accepted attempt is returned.
pub fn sample_clustered_with_events(
    w: &StepGraphon,
    cluster_of: &[usize],
    profile: &RobustProfile,
    params: &PipelineParams,
    seed: u64,
    max_attempts: usize,
) -> Result<SampleOutcome> {
    if max_attempts == 0 {
        return Err(Error::Usage("max_attempts must be at least 1".into()));
    }
    let mut best: Option<EventReport> = None;
    for t in 0..max_attempts {
        let graph = sample_clustered(
            w,
            cluster_of,
            profile.clusters(),
            params.m,
            seed.wrapping_add(t as u64),
        )?;
        let report = check_events(&graph, profile, params);
        if report.accepted() {
            return Ok(SampleOutcome {
                graph,
                attempts: t + 1,
                event_report: report,
            });
        }
        if best.as_ref().map_or(true, |b| report.badness() < b.badness()) {
            best = Some(report);
        }
    }
    let best = best.expect("at least one attempt");
    Err(Error::Concentration {
        attempts: max_attempts,
        summary: best.summary(),
        best: Box::new(best),
    })
}

/// Rejection sampling where every part of `W` is its own cluster.
pub fn sample_with_events(
    w: &StepGraphon,
    profile: &RobustProfile,
    params: &PipelineParams,
    seed: u64,
    max_attempts: usize,
) -> Result<SampleOutcome> {
    if profile.clusters() != w.parts() {
        return Err(Error::Usage(
            "profile must have one cluster per graphon part".into(),
        ));
    }
    let identity: Vec<usize> = (0..w.parts()).collect();
    sample_clustered_with_events(w, &identity, profile, params, seed, max_attempts)
}
