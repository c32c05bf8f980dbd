//! Executable cores of three lower bounds: the reduction from sinkless orientation to
//! `(2Δ−2)`-edge coloring, exact failure probabilities of zero-round orientation
//! algorithms, and the layered gadget that forces any completion of one uncolored
//! edge to recolor a deep subgraph.

mod gadget;
mod recolor;
mod sinkless;
mod zero_round;

pub use gadget::{build_gstar, layer_sizes, verify_gstar, GadgetDoc, GadgetReport, GadgetViolation, LayerSizes, LayeredGadget, Side};
pub use recolor::{
    check_certificate, exhaustive_completion, forced_recolor_check, Certificate, Contradiction, ForcingStep, Method,
    RecolorOutcome,
};
pub use sinkless::{
    bipartite_edge_coloring, ec_to_sinkless, verify_sinkless, AllBottom, EdgeColorer, LocalColorer, Orientation,
    PerfectOracle, SinkReport, SinklessRun,
};
pub use zero_round::{
    binomial, grid_minimum, grid_minimum_full, worst_label_failure, zero_round_floor, zero_round_sink_probability,
    GridMinimum, ZeroRoundAlg,
};

use crate::graph_core::GraphError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LowerBoundError {
    #[error("graph needs a 0/1 vertex labeling")]
    MissingLabels,
    #[error("not a properly 2-colored bipartite graph: {0}")]
    NotBipartite(String),
    #[error("vertex {vertex} has degree {degree} < Δ = {delta}")]
    DegreeDeficient { vertex: usize, degree: usize, delta: usize },
    #[error("edge {edge} got color {color}, outside 1..={max}")]
    ColorOutOfRange { edge: usize, color: u32, max: u32 },
    #[error("Δ = {delta} outside the supported range {min}..={max}")]
    DeltaOutOfRange { delta: usize, min: usize, max: usize },
    #[error("invalid zero-round algorithm: {0}")]
    InvalidAlgorithm(String),
    #[error("invalid gadget parameters: {0}")]
    InvalidParameters(String),
    #[error("gadget has {0} vertices, above the cap")]
    TooLarge(usize),
    #[error("{free} free edges exceed the exhaustive-search limit {limit}")]
    TooManyFreeEdges { free: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}
