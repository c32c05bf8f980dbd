use crate::graph_core::{Graph, VertexId};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OpKind {
    Rake,
    /// Degree-≤2 paths of at least `ℓ` vertices.
    CompressPath,
    /// Vertices with few surviving vertices within a radius.
    CompressBall,
    /// Vertices whose closed neighborhood has degree ≤ k throughout.
    CompressDegree,
}

/// The operations applied, in order, with the vertices each one removed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RemovalTrace {
    pub ops: Vec<(OpKind, Vec<VertexId>)>,
}

impl RemovalTrace {
    pub fn count(&self, kind: OpKind) -> usize {
        self.ops.iter().filter(|(k, _)| *k == kind).count()
    }

    /// Index of the operation that removed each vertex, `None` if never removed.
    pub fn removal_index(&self, n: usize) -> Vec<Option<usize>> {
        let mut idx = vec![None; n];
        for (i, (_, u)) in self.ops.iter().enumerate() {
            for &v in u {
                idx[v] = Some(i);
            }
        }
        idx
    }

    /// Every vertex removed exactly once.
    pub fn is_partition(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for (_, u) in &self.ops {
            for &v in u {
                if v >= n || seen[v] {
                    return false;
                }
                seen[v] = true;
            }
        }
        seen.into_iter().all(|b| b)
    }
}

pub(crate) fn live_degree(g: &Graph, alive: &[bool], v: VertexId) -> usize {
    g.neighbors(v).iter().filter(|&&(w, _)| alive[w]).count()
}

/// Removes all leaves and isolated vertices.
pub fn rake(g: &Graph, alive: &[bool]) -> Vec<VertexId> {
    (0..g.n())
        .into_par_iter()
        .filter(|&v| alive[v] && live_degree(g, alive, v) <= 1)
        .collect()
}

/// Removes every vertex on a path of at least `ell` vertices, all of degree ≤ 2.
pub fn compress_path(g: &Graph, alive: &[bool], ell: usize) -> Vec<VertexId> {
    let low: Vec<bool> = (0..g.n())
        .map(|v| alive[v] && live_degree(g, alive, v) <= 2)
        .collect();
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if !low[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &(w, _) in g.neighbors(v) {
                if low[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        if comp.len() >= ell {
            out.extend(comp);
        }
    }
    out.sort_unstable();
    out
}

/// Number of surviving vertices within `T`-distance `radius` of `v`, capped at `cap+1`.
pub(crate) fn surviving_ball(g: &Graph, alive: &[bool], v: VertexId, radius: usize, cap: usize) -> usize {
    let mut count = 0;
    let mut queue = VecDeque::from([(v, usize::MAX, 0)]);
    while let Some((x, from, d)) = queue.pop_front() {
        if alive[x] {
            count += 1;
            if count > cap {
                return count;
            }
        }
        if d == radius {
            continue;
        }
        for &(w, _) in g.neighbors(x) {
            if w != from {
                queue.push_back((w, x, d + 1));
            }
        }
    }
    count
}

/// Removes surviving vertices with at most `lambda` surviving vertices within `T`-distance
/// `radius`. The walk goes through removed vertices too; `g` must be a forest.
pub fn compress_ball(g: &Graph, alive: &[bool], radius: usize, lambda: usize) -> Vec<VertexId> {
    (0..g.n())
        .into_par_iter()
        .filter(|&v| alive[v] && surviving_ball(g, alive, v, radius, lambda) <= lambda)
        .collect()
}

/// Removes surviving `v` when every surviving `u` in `{v} ∪ N(v)` has degree ≤ k.
pub fn compress_degree(g: &Graph, alive: &[bool], k: usize) -> Vec<VertexId> {
    let low: Vec<bool> = (0..g.n())
        .into_par_iter()
        .map(|v| alive[v] && live_degree(g, alive, v) <= k)
        .collect();
    (0..g.n())
        .into_par_iter()
        .filter(|&v| low[v] && g.neighbors(v).iter().all(|&(w, _)| !alive[w] || low[w]))
        .collect()
}

/// Applies `step` until no vertex survives; `step` gets the op index and the survivors.
/// Stops with a partial trace after `max_ops` operations.
pub fn remove_all<F>(g: &Graph, max_ops: usize, mut step: F) -> RemovalTrace
where
    F: FnMut(usize, &[bool]) -> (OpKind, Vec<VertexId>),
{
    let mut alive = vec![true; g.n()];
    let mut left = g.n();
    let mut trace = RemovalTrace::default();
    while left > 0 && trace.ops.len() < max_ops {
        let (kind, removed) = step(trace.ops.len(), &alive);
        for &v in &removed {
            debug_assert!(alive[v]);
            alive[v] = false;
        }
        left -= removed.len();
        trace.ops.push((kind, removed));
    }
    trace
}
