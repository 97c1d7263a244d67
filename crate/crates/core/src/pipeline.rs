//! End-to-end construction for a family of fractionally isomorphic step
//! graphons: a shared profile is taken from the first member, every member is
//! cleaned against it, sampled and balanced, and the outputs are checked to
//! be pairwise fractionally isomorphic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balancer::{
    balance_with_targets, build_balanced, predicted_slack, verify_certificate, TargetDegreeMatrix,
};
use crate::cutmetric::{certified_distance_report, DistanceReport, ReportInputs};
use crate::error::{Error, Result};
use crate::fintest::{coarsest_equitable_graph, FICertificate};
use crate::kernelcore::{
    FiniteGraph, ParamMode, PartitionedGraph, PipelineParams, RobustProfile, StepGraphon, DEFAULT_TOL,
};
use crate::quotient::{
    clean_against, coarsest_equitable, match_coarsenings, robust_matrix, WeightedEquitableCoarsening,
};
use crate::sampler::{sample_clustered_with_events, EventReport, DEFAULT_MAX_ATTEMPTS};

const RETRY_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
/// Degree noise, in standard deviations, charged when choosing `Gamma`.
const SLACK_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[default]
    General,
    Regular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Fixed(usize),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl OrderSpec {
    pub fn auto() -> Self {
        OrderSpec::Auto(AutoTag::Auto)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsOverride {
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
    pub alpha: f64,
    pub gamma: u64,
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    /// Sampler attempts per balancing try.
    pub sampler_attempts: usize,
    /// Fresh samples per member when balancing turns out infeasible.
    pub family_retries: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            sampler_attempts: DEFAULT_MAX_ATTEMPTS,
            family_retries: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: Vec<StepGraphon>,
    pub epsilon: f64,
    pub n: OrderSpec,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params_override: Option<ParamsOverride>,
    #[serde(default)]
    pub budgets: Budgets,
    /// Fail instead of falling back when the strict constants are infeasible.
    #[serde(default)]
    pub strict: bool,
}

#[derive(Clone, Debug)]
pub struct MemberResult {
    pub graph: PartitionedGraph,
    pub certificate: FICertificate,
    pub report: DistanceReport,
    pub event_report: Option<EventReport>,
    pub sampler_attempts: usize,
    pub balance_retries: usize,
    pub cleaning_l1: f64,
    pub deleted_edges: usize,
    /// Cluster of each part of the member graphon.
    pub cluster_of: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub mode: RunMode,
    pub params: PipelineParams,
    /// Setup inequalities violated by the strict constants, if a fallback
    /// to practical constants happened.
    pub strict_violations: Vec<String>,
    pub profile: RobustProfile,
    pub targets: TargetDegreeMatrix,
    pub certificate: FICertificate,
    pub members: Vec<MemberResult>,
    pub fi_matrix: Vec<Vec<bool>>,
    pub certificates_identical: bool,
    pub certificates_verified: bool,
    pub regular_degree: Option<usize>,
    /// Smallest predicted balancing slack in vertices; negative values mean
    /// `n` is small for this profile and retries are likely.
    pub predicted_slack: Option<f64>,
}

impl RunResult {
    pub fn family_ok(&self) -> bool {
        self.certificates_identical
            && self.certificates_verified
            && self.fi_matrix.iter().flatten().all(|&b| b)
    }

    /// Distance components, attempts and verdicts as a JSON document.
    pub fn report(&self) -> serde_json::Value {
        let members: Vec<_> = self
            .members
            .iter()
            .enumerate()
            .map(|(k, m)| {
                serde_json::json!({
                    "member": k,
                    "n": m.graph.graph().n(),
                    "edges": m.graph.graph().edge_count(),
                    "sampler_attempts": m.sampler_attempts,
                    "balance_retries": m.balance_retries,
                    "cleaning_l1": m.cleaning_l1,
                    "deleted_edges": m.deleted_edges,
                    "events": m.event_report,
                    "distance": m.report,
                    "certificate_verified": verify_certificate(&m.graph, &m.certificate),
                })
            })
            .collect();
        serde_json::json!({
            "mode": self.mode,
            "params": self.params,
            "strict_violations": self.strict_violations,
            "regular_degree": self.regular_degree,
            "predicted_slack": self.predicted_slack,
            "members": members,
            "verdict": {
                "certificates_identical": self.certificates_identical,
                "certificates_verified": self.certificates_verified,
                "pairwise_fi": self.fi_matrix,
                "family_ok": self.family_ok(),
            },
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Usage(format!("epsilon = {epsilon} must lie in (0,1)")));
    }
    Ok(())
}

fn sample_order(n: usize, beta: f64) -> usize {
    let mut m = (n as f64 / (1.0 + beta)).floor() as usize;
    while m > 0 && (1.0 + beta) * m as f64 > n as f64 {
        m -= 1;
    }
    m
}

fn strict_params(epsilon: f64, n: usize, clusters: usize) -> PipelineParams {
    let beta = epsilon / 10.0;
    let lambda = beta.powi(4);
    let delta = beta.powi(10);
    let m = sample_order(n, beta);
    let raw = delta * delta * m as f64 / (2.0 * clusters as f64);
    let gamma = if raw >= (u64::MAX / 2) as f64 {
        u64::MAX - 1
    } else {
        2 * raw.floor() as u64
    };
    PipelineParams {
        epsilon,
        beta,
        lambda,
        delta,
        alpha: beta - 20.0 * lambda,
        gamma,
        m,
        n,
        clusters,
        mode: ParamMode::Strict,
    }
}

fn practical_params(epsilon: f64, n: usize, footprint: &[f64], matrix: &[Vec<f64>]) -> PipelineParams {
    let clusters = footprint.len();
    let beta = epsilon / 2.0;
    let matrix = &robust_matrix(matrix, beta);
    let m = sample_order(n, beta);
    let alpha = beta - beta.powi(3) / 5.0;
    let v_min = footprint.iter().copied().fold(1.0, f64::min);
    let d_min = matrix
        .iter()
        .flatten()
        .copied()
        .filter(|&d| d >= beta)
        .fold(1.0, f64::min);
    let mf = m.max(2) as f64;
    let chernoff = (3.0 * (20.0 * (clusters * clusters) as f64 * mf).ln() / (d_min * v_min * mf)).sqrt() / 6.0;
    let lambda = (epsilon / 100.0).max(chernoff).min(beta);
    let delta = (beta * beta * lambda * lambda).min(beta * lambda / 10.0);
    let mut p = PipelineParams {
        epsilon,
        beta,
        lambda,
        delta,
        alpha,
        gamma: 2,
        m,
        n,
        clusters,
        mode: ParamMode::Practical,
    };
    p.gamma = choose_gamma(&p, footprint, matrix);
    p
}

/// Even `Gamma` with the largest predicted balancing slack; ties go to the
/// smaller value.
fn choose_gamma(p: &PipelineParams, footprint: &[f64], matrix: &[Vec<f64>]) -> u64 {
    let top = ((1.0 + p.beta) * p.m as f64) as u64;
    let mut best = (f64::NEG_INFINITY, 2);
    let mut trial = p.clone();
    for gamma in (2..=top.max(2)).step_by(2) {
        trial.gamma = gamma;
        if let Ok(s) = predicted_slack(footprint, matrix, &trial, SLACK_SIGMAS) {
            if s > best.0 {
                best = (s, gamma);
            }
        }
    }
    best.1
}

/// Constants for a profile with the given cluster footprint and densities.
/// In practical mode `Gamma` is searched for the densities after cleaning.
pub fn derive_params_for(
    epsilon: f64,
    n: usize,
    mode: ParamMode,
    footprint: &[f64],
    matrix: &[Vec<f64>],
) -> Result<PipelineParams> {
    check_epsilon(epsilon)?;
    if n < 10 {
        return Err(Error::Usage(format!("n = {n} must be at least 10")));
    }
    let p = match mode {
        ParamMode::Strict => strict_params(epsilon, n, footprint.len()),
        ParamMode::Practical => practical_params(epsilon, n, footprint, matrix),
    };
    p.validate()?;
    Ok(p)
}

/// Constants for a single-cluster profile of density 1/2.
pub fn derive_params(epsilon: f64, n: usize, mode: ParamMode) -> Result<PipelineParams> {
    derive_params_for(epsilon, n, mode, &[1.0], &[vec![0.5]])
}

/// Smallest order at which the degree noise of a sample is comfortably
/// below the buffer margin: `m >= 36 d (1-d) / (beta^2 min(d,1-d)^2 v_j)` for
/// every positive density, and `n >= 100`.
pub fn auto_order(epsilon: f64, footprint: &[f64], matrix: &[Vec<f64>]) -> usize {
    let beta = epsilon / 2.0;
    let mut need_m = 0.0f64;
    for row in matrix {
        for (j, &d) in row.iter().enumerate() {
            if d >= beta && d <= 1.0 - beta && footprint[j] > 0.0 {
                let slack = d.min(1.0 - d);
                need_m = need_m.max(36.0 * d * (1.0 - d) / (beta * beta * slack * slack * footprint[j]));
            }
        }
    }
    (((1.0 + beta) * need_m).ceil() as usize).max(100)
}

struct SharedProfile {
    base: WeightedEquitableCoarsening,
    cluster_maps: Vec<Vec<usize>>,
}

fn shared_profile(family: &[StepGraphon]) -> Result<SharedProfile> {
    let base = coarsest_equitable(&family[0], DEFAULT_TOL);
    let mut cluster_maps = Vec::with_capacity(family.len());
    for (k, w) in family.iter().enumerate() {
        let c = coarsest_equitable(w, DEFAULT_TOL);
        let sigma = match_coarsenings(&base, &c, DEFAULT_TOL).ok_or_else(|| Error::InputNotFi {
            member: k,
            detail: format!(
                "quotient footprint {:?} / matrix {:?} vs footprint {:?} / matrix {:?}",
                c.class_footprint, c.class_matrix, base.class_footprint, base.class_matrix
            ),
        })?;
        let mut inverse = vec![0; sigma.len()];
        for (b, &s) in sigma.iter().enumerate() {
            inverse[s] = b;
        }
        cluster_maps.push(c.class_of.iter().map(|&cl| inverse[cl]).collect());
    }
    Ok(SharedProfile { base, cluster_maps })
}

fn choose_params(config: &RunConfig, footprint: &[f64], matrix: &[Vec<f64>], mode: RunMode) -> Result<(PipelineParams, Vec<String>)> {
    check_epsilon(config.epsilon)?;
    let n = match config.n {
        OrderSpec::Fixed(n) => n,
        OrderSpec::Auto(_) => auto_order(config.epsilon, footprint, matrix),
    };
    if let Some(o) = &config.params_override {
        let p = PipelineParams {
            epsilon: config.epsilon,
            beta: o.beta,
            lambda: o.lambda,
            delta: o.delta,
            alpha: o.alpha,
            gamma: o.gamma,
            m: o.m,
            n,
            clusters: footprint.len(),
            mode: ParamMode::Practical,
        };
        p.validate()?;
        return Ok((p, Vec::new()));
    }
    let strict = derive_params_for(config.epsilon, n, ParamMode::Strict, footprint, matrix);
    match strict {
        Ok(p) => Ok((p, Vec::new())),
        Err(e) if config.strict => Err(e),
        Err(Error::SetupInfeasible { violations }) => {
            let mut p = derive_params_for(config.epsilon, n, ParamMode::Practical, footprint, matrix)?;
            if mode == RunMode::Regular {
                // the regular construction needs no divisibility
                p.gamma = 2;
            }
            Ok((p, violations))
        }
        Err(e) => Err(e),
    }
}

fn member_seed(seed: u64, k: usize, retry: usize) -> u64 {
    (seed ^ k as u64).wrapping_add((retry as u64).wrapping_mul(RETRY_STRIDE))
}

fn retryable(e: &Error) -> bool {
    matches!(e, Error::BalanceInfeasible { .. } | Error::Parity(_))
}

struct Built {
    graph: PartitionedGraph,
    certificate: FICertificate,
    targets: TargetDegreeMatrix,
    deleted: usize,
    events: EventReport,
    attempts: usize,
    retries: usize,
}

fn sample_and_balance(
    w: &StepGraphon,
    cluster_of: &[usize],
    profile: &RobustProfile,
    params: &PipelineParams,
    budgets: &Budgets,
    seed: u64,
    k: usize,
    targets: Option<&TargetDegreeMatrix>,
) -> Result<Built> {
    let mut last = None;
    for retry in 0..budgets.family_retries.max(1) {
        let s = member_seed(seed, k, retry);
        let sample = sample_clustered_with_events(w, cluster_of, profile, params, s, budgets.sampler_attempts)?;
        let balanced = match targets {
            Some(t) => balance_with_targets(&sample.graph, t, params.n),
            None => build_balanced(&sample.graph, profile, params),
        };
        match balanced {
            Ok(b) => {
                return Ok(Built {
                    graph: b.graph,
                    certificate: b.certificate,
                    targets: b.targets,
                    deleted: b.deleted_edges,
                    events: sample.event_report,
                    attempts: sample.attempts,
                    retries: retry,
                })
            }
            Err(e) if retryable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one retry"))
}

fn wrap(k: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Member {
        member: k,
        source: Box::new(e),
    }
}

fn finish(
    mode: RunMode,
    params: PipelineParams,
    strict_violations: Vec<String>,
    profile: RobustProfile,
    members: Vec<MemberResult>,
    targets: TargetDegreeMatrix,
    regular_degree: Option<usize>,
) -> RunResult {
    let certificate = members[0].certificate.clone();
    let certificates_identical = members.iter().all(|m| m.certificate == certificate);
    let certificates_verified = members.iter().all(|m| verify_certificate(&m.graph, &m.certificate));
    let coarsest: Vec<FICertificate> = members
        .par_iter()
        .map(|m| coarsest_equitable_graph(m.graph.graph()).1)
        .collect();
    let fi_matrix = (0..members.len())
        .map(|a| {
            (0..members.len())
                .map(|b| {
                    members[a].graph.graph().n() == members[b].graph.graph().n()
                        && coarsest[a].equivalent(&coarsest[b])
                })
                .collect()
        })
        .collect();
    RunResult {
        mode,
        params,
        strict_violations,
        profile,
        targets,
        certificate,
        members,
        fi_matrix,
        certificates_identical,
        certificates_verified,
        regular_degree,
        predicted_slack: None,
    }
}

/// Runs the construction selected by `config.mode`.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    if config.family.is_empty() {
        return Err(Error::Usage("family is empty".into()));
    }
    if config.mode == RunMode::Regular {
        return run_regular(config);
    }
    let shared = shared_profile(&config.family)?;
    let base = &shared.base;
    let (params, strict_violations) = choose_params(config, &base.class_footprint, &base.class_matrix, RunMode::General)?;

    let members: Vec<Result<MemberResult>> = config
        .family
        .par_iter()
        .enumerate()
        .map(|(k, w)| {
            let cluster_of = &shared.cluster_maps[k];
            let cleaned = clean_against(w, cluster_of, &base.class_footprint, &base.class_matrix, params.beta)
                .map_err(wrap(k))?;
            let built = sample_and_balance(
                &cleaned.graphon,
                cluster_of,
                &cleaned.profile,
                &params,
                &config.budgets,
                config.seed,
                k,
                None,
            )
            .map_err(wrap(k))?;
            let report = certified_distance_report(&ReportInputs {
                graph: &built.graph,
                certificate: &built.certificate,
                targets: &built.targets,
                profile: &cleaned.profile,
                cleaning_l1: cleaned.l1_change,
                m: params.m,
                deleted_edges: built.deleted,
            })
            .map_err(wrap(k))?;
            Ok(MemberResult {
                graph: built.graph,
                certificate: built.certificate,
                report,
                event_report: Some(built.events),
                sampler_attempts: built.attempts,
                balance_retries: built.retries,
                cleaning_l1: cleaned.l1_change,
                deleted_edges: built.deleted,
                cluster_of: cluster_of.clone(),
            })
        })
        .collect();
    let members = members.into_iter().collect::<Result<Vec<_>>>()?;
    let profile = clean_against(
        &config.family[0],
        &shared.cluster_maps[0],
        &base.class_footprint,
        &base.class_matrix,
        params.beta,
    )?
    .profile;
    let targets = TargetDegreeMatrix::new(&profile, &params)?;
    let slack = predicted_slack(profile.footprint(), profile.matrix(), &params, SLACK_SIGMAS).ok();
    let mut result = finish(RunMode::General, params, strict_violations, profile, members, targets, None);
    result.predicted_slack = slack;
    Ok(result)
}

/// Smallest even integer at least `(1 + alpha) d n / (1 + beta)`.
pub fn regular_degree(d: f64, n: usize, alpha: f64, beta: f64) -> usize {
    let x = (1.0 + alpha) * d * n as f64 / (1.0 + beta);
    let up = (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize;
    up + up % 2
}

fn trivial_member(n: usize, complete: bool, profile: &RobustProfile, cleaning_l1: f64) -> Result<(MemberResult, TargetDegreeMatrix)> {
    let g = if complete { FiniteGraph::complete(n) } else { FiniteGraph::empty(n) };
    let degree = if complete { n - 1 } else { 0 };
    let targets = TargetDegreeMatrix {
        gamma: n as u64,
        numerators: vec![vec![degree as u64]],
        part_sizes: vec![n],
        degrees: vec![vec![degree]],
        active: vec![true],
    };
    let graph = PartitionedGraph::from_assignment(g, vec![1; n], 2)?;
    let certificate = targets.certificate(n);
    let report = certified_distance_report(&ReportInputs {
        graph: &graph,
        certificate: &certificate,
        targets: &targets,
        profile,
        cleaning_l1,
        m: n,
        deleted_edges: 0,
    })?;
    let member = MemberResult {
        graph,
        certificate,
        report,
        event_report: None,
        sampler_attempts: 0,
        balance_retries: 0,
        cleaning_l1,
        deleted_edges: 0,
        cluster_of: vec![0],
    };
    Ok((member, targets))
}

/// Exactly `D`-regular outputs with a common even `D` for a family whose
/// quotients are a single class.
pub fn run_regular(config: &RunConfig) -> Result<RunResult> {
    if config.family.is_empty() {
        return Err(Error::Usage("family is empty".into()));
    }
    let coarsenings: Vec<WeightedEquitableCoarsening> =
        config.family.iter().map(|w| coarsest_equitable(w, DEFAULT_TOL)).collect();
    for (k, c) in coarsenings.iter().enumerate() {
        if c.classes() != 1 {
            return Err(Error::Usage(format!(
                "member {k} has {} quotient classes; regular mode needs one, use general mode",
                c.classes()
            )));
        }
    }
    let d = coarsenings[0].class_matrix[0][0];
    for (k, c) in coarsenings.iter().enumerate() {
        if (c.class_matrix[0][0] - d).abs() > DEFAULT_TOL {
            return Err(Error::InputNotFi {
                member: k,
                detail: format!("density {} vs {d}", c.class_matrix[0][0]),
            });
        }
    }
    let footprint = [1.0];
    let matrix = [vec![d]];
    let (params, strict_violations) = choose_params(config, &footprint, &matrix, RunMode::Regular)?;
    let n = params.n;

    let cleaned: Vec<_> = config
        .family
        .iter()
        .map(|w| clean_against(w, &vec![0; w.parts()], &footprint, &matrix, params.beta))
        .collect::<Result<_>>()?;
    let profile = cleaned[0].profile.clone();
    let dc = profile.matrix()[0][0];

    if dc <= DEFAULT_TOL || d >= 1.0 - DEFAULT_TOL {
        let complete = d >= 1.0 - DEFAULT_TOL;
        let mut members = Vec::new();
        let mut targets = None;
        for c in &cleaned {
            let (m, t) = trivial_member(n, complete, &profile, c.l1_change)?;
            members.push(m);
            targets = Some(t);
        }
        let targets = targets.expect("nonempty family");
        let degree = targets.degrees[0][0];
        return Ok(finish(RunMode::Regular, params, strict_violations, profile, members, targets, Some(degree)));
    }

    let degree = regular_degree(dc, n, params.alpha, params.beta);
    let targets = TargetDegreeMatrix::regular(n, degree).map_err(|e| Error::Parameter(format!(
        "regular target infeasible ({e}); increase n or lower epsilon"
    )))?;
    let members: Vec<Result<MemberResult>> = config
        .family
        .par_iter()
        .zip(cleaned.par_iter())
        .enumerate()
        .map(|(k, (w, c))| {
            let cluster_of = vec![0; w.parts()];
            let built = sample_and_balance(
                &c.graphon,
                &cluster_of,
                &c.profile,
                &params,
                &config.budgets,
                config.seed,
                k,
                Some(&targets),
            )
            .map_err(wrap(k))?;
            let report = certified_distance_report(&ReportInputs {
                graph: &built.graph,
                certificate: &built.certificate,
                targets: &built.targets,
                profile: &c.profile,
                cleaning_l1: c.l1_change,
                m: params.m,
                deleted_edges: built.deleted,
            })
            .map_err(wrap(k))?;
            Ok(MemberResult {
                graph: built.graph,
                certificate: built.certificate,
                report,
                event_report: Some(built.events),
                sampler_attempts: built.attempts,
                balance_retries: built.retries,
                cleaning_l1: c.l1_change,
                deleted_edges: built.deleted,
                cluster_of,
            })
        })
        .collect();
    let members = members.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(finish(RunMode::Regular, params, strict_violations, profile, members, targets, Some(degree)))
}
