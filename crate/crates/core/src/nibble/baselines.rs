use super::NibbleError;
use crate::graph_core::{Color, Graph, PartialEdgeColoring};
use crate::symmetry::linial_coloring;
use std::collections::HashSet;

/// Colors every uncolored edge, in id order, with the smallest color of `lo..=hi`
/// unused at both endpoints.
pub fn greedy_with_palette(g: &Graph, colors: &mut [Option<Color>], lo: Color, hi: Color) -> Result<(), NibbleError> {
    let mut used: Vec<Vec<Color>> = vec![Vec::new(); g.n()];
    for (e, c) in colors.iter().enumerate() {
        if let Some(c) = *c {
            let (u, v) = g.endpoints(e);
            used[u].push(c);
            used[v].push(c);
        }
    }
    let available = (hi + 1).saturating_sub(lo) as usize;
    for e in 0..g.m() {
        if colors[e].is_some() {
            continue;
        }
        let (u, v) = g.endpoints(e);
        let c = (lo..=hi)
            .find(|c| !used[u].contains(c) && !used[v].contains(c))
            .ok_or(NibbleError::Phase2Exhausted { available })?;
        colors[e] = Some(c);
        used[u].push(c);
        used[v].push(c);
    }
    Ok(())
}

/// Sequential greedy in edge-id order; at most `2Δ−1` colors.
pub fn greedy_edge_coloring(g: &Graph) -> PartialEdgeColoring {
    let k = (2 * g.max_degree()).saturating_sub(1) as Color;
    let mut colors = vec![None; g.m()];
    greedy_with_palette(g, &mut colors, 1, k).expect("2Δ−1 colors always suffice");
    PartialEdgeColoring { colors, palette_size: k }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoringRun {
    pub coloring: PartialEdgeColoring,
    /// Rounds on the line graph.
    pub rounds: usize,
}

/// Linial reduction on the line graph, starting from the edge color `(min id, max id)`.
/// Ends with at most `LINIAL_BETA * Δ_L^2` colors, `Δ_L` the line-graph degree.
pub fn linial_edge_coloring(g: &Graph, ids: &[u64]) -> Result<EdgeColoringRun, NibbleError> {
    if ids.len() != g.n() {
        return Err(NibbleError::InvalidParameter(format!("{} ids for {} vertices", ids.len(), g.n())));
    }
    if ids.iter().collect::<HashSet<_>>().len() != ids.len() {
        return Err(NibbleError::DuplicateIds);
    }
    let big = ids.iter().copied().max().map_or(1, |x| x + 1);
    if big > u32::MAX as u64 {
        return Err(NibbleError::InvalidParameter("ids must be below 2^32".into()));
    }
    let line = g.line_graph();
    let init: Vec<u64> = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (ids[u].min(ids[v]), ids[u].max(ids[v]));
            a * big + b
        })
        .collect();
    let run = linial_coloring(&line, &init, big * big, line.max_degree())
        .map_err(|e| NibbleError::InvalidParameter(e.to_string()))?;
    Ok(EdgeColoringRun {
        coloring: PartialEdgeColoring {
            colors: run.colors.iter().map(|&c| Some(c as Color + 1)).collect(),
            palette_size: run.palette as Color,
        },
        rounds: run.rounds,
    })
}
