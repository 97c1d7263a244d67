//! Fractionally isomorphic finite graphs from step graphons.
//!
//! Given a family of step graphons that share a quotient, the pipeline builds
//! one graph per member on a common vertex count. Every output carries an
//! equitable partition with identical integer parameters, so the outputs are
//! pairwise fractionally isomorphic by construction, and the certificate can
//! be re-checked independently.

pub mod balancer;
pub mod cutmetric;
pub mod degseq;
pub mod error;
pub mod fintest;
pub mod io;
pub mod kernelcore;
pub mod pipeline;
pub mod quotient;
pub mod sampler;

pub use error::{Error, Result};
