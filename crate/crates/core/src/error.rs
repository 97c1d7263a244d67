use thiserror::Error;

use crate::degseq::Infeasible;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("setup infeasible: {}", .violations.join("; "))]
    SetupInfeasible { violations: Vec<String> },

    #[error("degree sequence infeasible: {0}")]
    Infeasible(#[from] Infeasible),

    #[error("oracle limit exceeded: {parts} parts (limit {limit})")]
    OracleLimit { parts: usize, limit: usize },

    #[error("concentration failure after {attempts} attempts: {summary}")]
    Concentration {
        attempts: usize,
        summary: String,
        best: Box<crate::sampler::EventReport>,
    },

    #[error("buffer layout error: {0}")]
    Layout(String),

    #[error("balance infeasible at {step}: {detail}")]
    BalanceInfeasible { step: String, detail: String },

    #[error("parity error: {0}")]
    Parity(String),

    #[error("member {member} is not fractionally isomorphic to member 0: {detail}")]
    InputNotFi { member: usize, detail: String },

    #[error("member {member}: {source}")]
    Member {
        member: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
