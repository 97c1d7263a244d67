//! Value types shared by every stage: step graphons, density profiles, finite
//! graphs with partitions, and pipeline constants.

mod graph;
mod graphon;
mod params;

pub use graph::{FiniteGraph, PartitionedGraph};
pub use graphon::{
    graphon_of_graph, is_robust_entry, DensityProfile, RobustProfile, StepGraphon, DEFAULT_TOL,
    WEIGHT_SUM_TOL,
};
pub use params::{ParamMode, PipelineParams};
