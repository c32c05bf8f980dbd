//! Rake/Compress tree contraction, network decompositions of tree powers, and
//! deterministic edge colorings of trees.

mod edge_coloring;
mod mixed;
mod ops;
mod ruling;
mod two_part;
mod verify;

pub use edge_coloring::{
    oriented_tree_plus_one_coloring, sibling_rank_coloring, tree_delta_edge_coloring, tree_k, OrientedRun, TreeColoringRun,
};
pub use mixed::{decompose_mixed, mixed_bound, mixed_radius};
pub use ops::{compress_ball, compress_degree, compress_path, rake, remove_all, OpKind, RemovalTrace};
pub use ruling::{ruling_set_on_path, verify_ruling_set, RulingSet};
pub use two_part::{decompose_two_part, two_part_bound};
pub use verify::{verify_decomposition, DecompositionReport, PartReport};

use crate::graph_core::{connected_components, Graph, GraphError, VertexId};
use std::collections::HashSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompError {
    #[error("path of {len} vertices is shorter than {min}")]
    PathTooShort { len: usize, min: usize },
    #[error("λ = {lambda} is below {min} for k = {k}")]
    LambdaTooSmall { lambda: usize, k: usize, min: usize },
    #[error("maximum degree {0} is below 3")]
    DegreeTooSmall(usize),
    #[error("ids are not unique")]
    DuplicateIds,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Tree parameters shared by the decompositions: target power `k`, a domination
/// distance `d`, and the size `s` of some distance-`d` dominating set. `d = 0`, `s = n`
/// is always valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompParams {
    pub k: usize,
    pub d: usize,
    pub s: usize,
}

impl DecompParams {
    pub fn trivial(k: usize, n: usize) -> Self {
        DecompParams { k, d: 0, s: n.max(1) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PartKind {
    /// Components have diameter at most `bound`, measured in `T`.
    Diam { bound: usize },
    /// Independent in `T^k`.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub k: usize,
    pub labels: Vec<usize>,
    pub kinds: Vec<PartKind>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionDoc {
    k: usize,
    parts: BTreeMap<VertexId, usize>,
    kinds: BTreeMap<usize, PartKind>,
}

impl Decomposition {
    pub fn to_json(&self) -> String {
        let doc = DecompositionDoc {
            k: self.k,
            parts: self.labels.iter().copied().enumerate().collect(),
            kinds: self.kinds.iter().copied().enumerate().collect(),
        };
        serde_json::to_string(&doc).expect("decomposition serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let doc: DecompositionDoc = serde_json::from_str(s).map_err(|e| GraphError::Json(e.to_string()))?;
        let n = doc.parts.keys().next_back().map_or(0, |&v| v + 1);
        if doc.parts.len() != n {
            return Err(GraphError::Json("parts must cover 0..n".into()));
        }
        let kinds_n = doc.kinds.keys().next_back().map_or(0, |&p| p + 1);
        if doc.kinds.len() != kinds_n || doc.parts.values().any(|&p| p >= kinds_n) {
            return Err(GraphError::Json("every part needs a kind".into()));
        }
        Ok(Decomposition {
            k: doc.k,
            labels: doc.parts.into_values().collect(),
            kinds: doc.kinds.into_values().collect(),
        })
    }
}

pub(crate) fn check_forest(g: &Graph, ids: &[u64]) -> Result<(), DecompError> {
    if ids.len() != g.n() {
        return Err(DecompError::InvalidParameter(format!("{} ids for {} vertices", ids.len(), g.n())));
    }
    if ids.iter().collect::<HashSet<_>>().len() != ids.len() {
        return Err(DecompError::DuplicateIds);
    }
    let comps = connected_components(g, &vec![true; g.n()]).len();
    if g.m() + comps != g.n() {
        return Err(GraphError::NotATree("graph has a cycle".into()).into());
    }
    Ok(())
}

/// A decomposition with its removal trace and LOCAL round count.
#[derive(Debug, Clone)]
pub struct DecompositionRun {
    pub decomposition: Decomposition,
    pub trace: RemovalTrace,
    pub rounds: usize,
}
