//! Lovász Local Lemma instances whose dependency graph is a power of a tree, and the
//! solvers for them: Moser–Tardos, a deterministic solver driven by a network
//! decomposition, and a randomized solver that shatters the tree first.

mod contagion;
mod deterministic;
mod instance;
mod moser_tardos;
mod probability;
mod shatter;

pub use contagion::{
    bernoulli_infection, find_small_stable_set, hatdeg, hatdeg_all, tau_for, verify_stable_small, ComponentReport,
    ContagionTrace, StabilityReport,
};
pub use deterministic::{deterministic_lll_via_decomposition, DetOptions, DetOutcome};
pub use instance::{EventSpec, LLLInstance, LLLInstanceDoc, PartialAssignment, TreeSource, VarId, Variable};
pub use moser_tardos::{moser_tardos, MtOutcome};
pub use probability::{event_probability, Fallback, Probability};
pub use shatter::{
    mu_for, shatter_components, shatter_good_partial, solve_tree_lll, verify_good_partial, GoodReport, InfectionMode, ShatterOutcome,
    SolveOutcome,
};

use crate::graph_core::GraphError;
use crate::tree_decomp::DecompError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LllError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("dependency radius {0} must be even and positive")]
    OddRadius(usize),
    #[error("declared p = {declared} is below the exact maximum {exact}")]
    DeclaredPTooSmall { declared: f64, exact: f64 },
    #[error("{states} joint states exceed the enumeration cap {cap}")]
    EnumerationCap { states: u128, cap: u64 },
    #[error("criterion violated: p·(ed)^{exponent} = {value} with p = {p}, ed = {ed}")]
    CriterionViolated { p: f64, ed: f64, exponent: usize, value: f64 },
    #[error("potential increased from {before} to {after}")]
    PotentialIncreased { before: f64, after: f64 },
    #[error("{count} events still occur")]
    EventsRemain { count: usize },
    #[error("gave up after {resamples} resamples with {violated} events violated")]
    ResampleLimit { resamples: u64, violated: usize },
    #[error("λ = {0} is below 2")]
    LambdaTooSmall(usize),
    #[error("no valid assignment after {attempts} attempts: {diagnostics:?}")]
    RetriesExhausted { attempts: usize, diagnostics: Vec<String> },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
}
