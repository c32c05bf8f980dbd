//! Randomized `(1+ε)Δ`-edge coloring by repeated one-shot rounds, with the greedy
//! and Linial baselines and a concentration experiment for a single round.

mod baselines;
mod concentration;
mod oneshot;
mod pipeline;
mod schedule;
mod state;

pub use baselines::{greedy_edge_coloring, greedy_with_palette, linial_edge_coloring, EdgeColoringRun};
pub use concentration::{concentration_experiment, ConcentrationStats, CONCENTRATION_EPS};
pub use oneshot::{one_shot_coloring, resolve, sample_selection, ImaginaryPick, OneShotOutcome, Selection};
pub use pipeline::{
    color_graph, default_eta, default_xi, nibble_iteration, ColorGraphOutcome, ColorOptions, IterationOutcome,
    IterationStats, RetryMode,
};
pub use schedule::{compute_schedule, terminating_index, Schedule, ScheduleRow};
pub use state::{check_invariant, pad_uniform, ColoringState, ImaginaryEdge, InvariantReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NibbleError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("terminating condition not met within {rows} rows")]
    NeverTerminates { rows: usize },
    #[error("terminating index {index} is not below i* = {i_star}")]
    PastIStar { index: usize, i_star: usize },
    #[error("state violates the invariant ({} violations)", .0.violation_count())]
    Invariant(Box<InvariantReport>),
    #[error("iteration {iteration}: no valid outcome after {retries} retries (best had {} violations)", best.violation_count())]
    RetriesExhausted {
        iteration: usize,
        retries: usize,
        best: Box<InvariantReport>,
    },
    #[error("phase two needs more than the {available} remaining colors")]
    Phase2Exhausted { available: usize },
    #[error("ids are not unique")]
    DuplicateIds,
}
