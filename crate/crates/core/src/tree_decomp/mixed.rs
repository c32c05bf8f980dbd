use super::ops::{compress_ball, rake, remove_all, OpKind};
use super::{check_forest, DecompError, DecompParams, Decomposition, DecompositionRun, PartKind};
use crate::constants::{MIXED_C, MIXED_LAMBDA_C};
use crate::graph_core::{Graph, VertexId};
use crate::symmetry::linial_coloring;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Ball radius of the Compress step, `⌈2.5k⌉`.
pub fn mixed_radius(k: usize) -> usize {
    (5 * k).div_ceil(2)
}

/// Diameter bound, in `T`, of the components of part 0.
pub fn mixed_bound(k: usize, d: usize, s: usize, lambda: usize) -> usize {
    let base = lambda as f64 / k as f64;
    let log = if s <= 1 { 0.0 } else { ((s as f64).ln() / base.ln() - 1e-9).ceil().max(0.0) };
    MIXED_C * (k * log as usize + d + k)
}

/// One diameter-bounded part (label 0, the unmarked vertices) plus color classes of the
/// vertices near Compress removals, each independent in `T^k`.
pub fn decompose_mixed(g: &Graph, ids: &[u64], params: &DecompParams, lambda: usize) -> Result<DecompositionRun, DecompError> {
    let DecompParams { k, d, s } = *params;
    if k == 0 {
        return Err(DecompError::InvalidParameter("k must be positive".into()));
    }
    let min = MIXED_LAMBDA_C * k;
    if lambda < min {
        return Err(DecompError::LambdaTooSmall { lambda, k, min });
    }
    check_forest(g, ids)?;
    let r = mixed_radius(k);
    let head = 3 * d + 1;
    let trace = remove_all(g, usize::MAX, |i, alive| {
        if i >= head && (i - head) % (r + 1) == 0 {
            (OpKind::CompressBall, compress_ball(g, alive, r, lambda))
        } else {
            (OpKind::Rake, rake(g, alive))
        }
    });
    let mut rounds: usize = trace.ops.iter().map(|(kind, _)| if *kind == OpKind::Rake { 1 } else { r }).sum();

    let mut marked = vec![false; g.n()];
    for (kind, removed) in &trace.ops {
        if *kind != OpKind::CompressBall {
            continue;
        }
        for &v in removed {
            for (u, _) in g.ball(v, k / 2) {
                marked[u] = true;
            }
        }
    }
    rounds += k / 2;

    // marked graph: pairs at T-distance ≤ k
    let members: Vec<VertexId> = (0..g.n()).filter(|&v| marked[v]).collect();
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in members.iter().enumerate() {
        pos[v] = i;
    }
    let pos = &pos;
    let edges: Vec<(usize, usize)> = members
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &v)| {
            g.ball(v, k)
                .into_iter()
                .filter(|&(u, _)| marked[u] && pos[u] > i)
                .map(move |(u, _)| (i, pos[u]))
                .collect::<Vec<_>>()
        })
        .collect();
    let marked_graph = Graph::from_edges(members.len(), &edges, None)?;
    let mids: Vec<u64> = members.iter().map(|&v| ids[v]).collect();
    let m = mids.iter().copied().max().map_or(1, |x| x + 1);
    let run = linial_coloring(&marked_graph, &mids, m, marked_graph.max_degree())
        .map_err(|e| DecompError::InvalidParameter(e.to_string()))?;
    // one LOCAL round of the marked graph costs k rounds of T
    rounds += run.rounds * k;

    let used: BTreeMap<u64, usize> = run.colors.iter().map(|&c| (c, 0)).collect();
    let used: BTreeMap<u64, usize> = used.into_keys().enumerate().map(|(j, c)| (c, j + 1)).collect();
    let mut labels = vec![0; g.n()];
    for (i, &v) in members.iter().enumerate() {
        labels[v] = used[&run.colors[i]];
    }
    let mut kinds = vec![PartKind::Diam { bound: mixed_bound(k, d, s, lambda) }];
    kinds.extend(std::iter::repeat(PartKind::Zero).take(used.len()));
    Ok(DecompositionRun { decomposition: Decomposition { k, labels, kinds }, trace, rounds })
}
