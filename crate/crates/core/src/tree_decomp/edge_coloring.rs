use super::ops::{compress_degree, rake, remove_all, OpKind};
use super::{check_forest, DecompError};
use crate::constants::EDGE_LINIAL_BETA;
use crate::graph_core::{Color, EdgeId, Graph, PartialEdgeColoring, RootedTree, VertexId};
use crate::nibble::linial_edge_coloring;
use crate::symmetry::{delta_plus_one_coloring, reduce_colors, ColoringRun};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeColoringRun {
    pub coloring: PartialEdgeColoring,
    pub k: usize,
    /// Compress/Rake rounds of the decomposition.
    pub phases: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedRun {
    pub coloring: PartialEdgeColoring,
    pub rounds: usize,
}

/// Degree parameter of the Compress step: the largest `k ≥ 2` with
/// `EDGE_LINIAL_BETA * k^3 ≤ Δ`, or 2.
pub fn tree_k(delta: usize) -> usize {
    let mut k = 2u64;
    while EDGE_LINIAL_BETA * (k + 1).pow(3) <= delta as u64 {
        k += 1;
    }
    k as usize
}

fn used_at(g: &Graph, colors: &[Option<Color>], v: VertexId) -> Vec<Color> {
    g.neighbors(v).iter().filter_map(|&(_, e)| colors[e]).collect()
}

fn free_color(g: &Graph, colors: &[Option<Color>], e: EdgeId, range: impl Iterator<Item = Color>) -> Option<Color> {
    let (u, v) = g.endpoints(e);
    let (a, b) = (used_at(g, colors, u), used_at(g, colors, v));
    range.into_iter().find(|c| !a.contains(c) && !b.contains(c))
}

fn subgraph_linial(g: &Graph, ids: &[u64], edges: &[EdgeId]) -> Result<(Vec<Color>, Color, usize), DecompError> {
    let sub: Vec<_> = edges.iter().map(|&e| g.endpoints(e)).collect();
    let h = Graph::from_edges(g.n(), &sub, None)?;
    let run = linial_edge_coloring(&h, ids).map_err(|e| DecompError::InvalidParameter(e.to_string()))?;
    let colors = run.coloring.colors.iter().map(|c| c.expect("total")).collect();
    Ok((colors, run.coloring.palette_size, run.rounds))
}

/// Δ-edge coloring of a forest with `Δ ≥ 3`: alternating degree-Compress and Rake peel the
/// tree, then edges are colored from the last round back to the first.
pub fn tree_delta_edge_coloring(g: &Graph, ids: &[u64]) -> Result<TreeColoringRun, DecompError> {
    check_forest(g, ids)?;
    let delta = g.max_degree();
    if delta < 3 {
        return Err(DecompError::DegreeTooSmall(delta));
    }
    let k = tree_k(delta);
    let partition = EDGE_LINIAL_BETA * (k as u64).pow(3) <= delta as u64;
    let trace = remove_all(g, usize::MAX, |i, alive| {
        if i % 2 == 0 {
            (OpKind::CompressDegree, compress_degree(g, alive, k))
        } else {
            (OpKind::Rake, rake(g, alive))
        }
    });
    let idx: Vec<usize> = trace.removal_index(g.n()).into_iter().map(|i| i.expect("all removed")).collect();
    let phases = trace.ops.len().div_ceil(2);
    // edge e leaves the forest at operation min(idx): Compress edges at even indices
    let mut by_op: Vec<Vec<EdgeId>> = vec![Vec::new(); trace.ops.len()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        by_op[idx[u].min(idx[v])].push(e);
    }
    let live_deg = |v: VertexId, op: usize| g.neighbors(v).iter().filter(|&&(w, _)| idx[w] >= op).count();
    let delta_c = delta as Color;
    let mut colors: Vec<Option<Color>> = vec![None; g.m()];
    let mut rounds = 3 * trace.ops.len();

    // k = 2: every Compress edge lies on a path; 3-color them all up front
    let mut initial: Vec<Option<Color>> = vec![None; g.m()];
    let mut linial_rounds = 0;
    if !partition {
        let all: Vec<EdgeId> = by_op.iter().step_by(2).flatten().copied().collect();
        let sub: Vec<_> = all.iter().map(|&e| g.endpoints(e)).collect();
        let h = Graph::from_edges(g.n(), &sub, None)?;
        assert!(h.max_degree() <= 2, "Compress edges do not form paths");
        let (lin, palette, r) = subgraph_linial(g, ids, &all)?;
        let run = ColoringRun { colors: lin.iter().map(|&c| c as u64 - 1).collect(), palette: palette as u64, rounds: r };
        let three = reduce_colors(&h.line_graph(), &run, 3).map_err(|e| DecompError::InvalidParameter(e.to_string()))?;
        for (j, &e) in all.iter().enumerate() {
            initial[e] = Some(three.colors[j] as Color + 1);
        }
        linial_rounds = three.rounds;
    }

    for phase in (0..phases).rev() {
        let (cop, rop) = (2 * phase, 2 * phase + 1);
        if let Some(rake_edges) = by_op.get(rop) {
            for &e in rake_edges {
                colors[e] = Some(free_color(g, &colors, e, 1..=delta_c).expect("a raked vertex's anchor has a free color"));
            }
        }
        let batch = &by_op[cop];
        if batch.is_empty() {
            continue;
        }
        if partition {
            let (phi, palette, r) = subgraph_linial(g, ids, batch)?;
            linial_rounds = linial_rounds.max(r);
            let size = delta_c / palette;
            assert!(size as usize >= k, "palette part of {size} colors for k = {k}");
            let in_batch: HashSet<EdgeId> = batch.iter().copied().collect();
            for (j, &e) in batch.iter().enumerate() {
                let (u, v) = g.endpoints(e);
                let outside = [u, v]
                    .iter()
                    .flat_map(|&x| g.neighbors(x))
                    .filter(|&&(_, f)| colors[f].is_some() && !in_batch.contains(&f))
                    .count();
                assert!(outside < k && live_deg(u, cop).max(live_deg(v, cop)) <= k);
                let lo = (phi[j] - 1) * size + 1;
                colors[e] = Some(free_color(g, &colors, e, lo..lo + size).expect("part larger than colored neighbors"));
            }
        } else {
            for &e in batch {
                colors[e] = initial[e];
            }
            for &e in batch {
                let (u, v) = g.endpoints(e);
                let c = colors[e].unwrap();
                let clash = [u, v].iter().flat_map(|&x| g.neighbors(x)).any(|&(_, f)| f != e && colors[f] == Some(c));
                if clash {
                    colors[e] = None;
                    colors[e] = Some(free_color(g, &colors, e, 1..=delta_c).expect("end edges see at most two colors"));
                }
            }
        }
        rounds += 2;
    }
    rounds += linial_rounds;
    Ok(TreeColoringRun { coloring: PartialEdgeColoring { colors, palette_size: delta_c }, k, phases, rounds })
}

fn check_ids(t: &RootedTree, ids: &[u64]) -> Result<(), DecompError> {
    if ids.len() != t.n() {
        return Err(DecompError::InvalidParameter(format!("{} ids for {} vertices", ids.len(), t.n())));
    }
    if ids.iter().collect::<HashSet<_>>().len() != ids.len() {
        return Err(DecompError::DuplicateIds);
    }
    Ok(())
}

/// Colors the edge to each child by the rank of the child's id among its siblings,
/// largest id first.
pub fn sibling_rank_coloring(t: &RootedTree, ids: &[u64]) -> Result<PartialEdgeColoring, DecompError> {
    check_ids(t, ids)?;
    let g = &t.graph;
    let mut colors = vec![None; g.m()];
    for v in 0..t.n() {
        let mut ch = t.children(v);
        ch.sort_unstable_by_key(|&w| std::cmp::Reverse(ids[w]));
        for (r, w) in ch.into_iter().enumerate() {
            colors[t.parent[w].unwrap().1] = Some(r as Color + 1);
        }
    }
    Ok(PartialEdgeColoring { colors, palette_size: g.max_degree() as Color })
}

/// (Δ+1)-edge coloring of a rooted tree. Each sibling-rank class `i` is a set of upward
/// paths; all but the top edge of each path are recolored from `{i, Δ, Δ+1}`.
pub fn oriented_tree_plus_one_coloring(t: &RootedTree, ids: &[u64]) -> Result<OrientedRun, DecompError> {
    let g = &t.graph;
    let mut colors = sibling_rank_coloring(t, ids)?.colors;
    let delta = g.max_degree() as Color;
    // edge to the parent, and its class
    let up = |v: VertexId| t.parent[v].map(|(p, e)| (p, e));
    let class = |v: VertexId, colors: &[Option<Color>]| up(v).map(|(_, e)| colors[e].unwrap());
    // v's parent edge is non-top when the parent's own parent edge shares its class
    let non_top = |v: VertexId| match (class(v, &colors), up(v).and_then(|(p, _)| class(p, &colors))) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    let lower: Vec<VertexId> = (0..t.n()).filter(|&v| non_top(v)).collect();
    let mut pos = vec![usize::MAX; t.n()];
    for (j, &v) in lower.iter().enumerate() {
        pos[v] = j;
    }
    let links: Vec<(usize, usize)> = lower
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| {
            let p = up(v).unwrap().0;
            (pos[p] != usize::MAX).then_some((j, pos[p]))
        })
        .collect();
    let paths = Graph::from_edges(lower.len(), &links, None)?;
    assert!(paths.max_degree() <= 2, "sibling-rank classes are not paths");
    let lids: Vec<u64> = lower.iter().map(|&v| ids[v]).collect();
    let psi = delta_plus_one_coloring(&paths, &lids).map_err(|e| DecompError::InvalidParameter(e.to_string()))?;
    let original = colors.clone();
    for (j, &v) in lower.iter().enumerate() {
        let e = up(v).unwrap().1;
        let i = original[e].unwrap();
        colors[e] = Some(match psi.colors[j] {
            0 => delta,
            1 => delta + 1,
            _ => i,
        });
    }
    // the edge right below a top edge must not keep i
    for (j, &v) in lower.iter().enumerate() {
        let (p, e) = up(v).unwrap();
        if pos[p] != usize::MAX || colors[e] != original[e] {
            continue;
        }
        let below = paths.neighbors(j).iter().map(|&(w, _)| colors[up(lower[w]).unwrap().1]).next().flatten();
        colors[e] = Some(if below == Some(delta) { delta + 1 } else { delta });
    }
    Ok(OrientedRun {
        coloring: PartialEdgeColoring { colors, palette_size: delta + 1 },
        rounds: psi.rounds + 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{LINIAL_BETA, ORIENTED_ROUNDS_C};
    use crate::graph_core::{
        build_graph, random_bounded_degree_tree, random_tree, truncated_regular_tree, verify_proper_edge_coloring,
    };
    use crate::symmetry::log_star;

    fn ids(n: usize) -> Vec<u64> {
        (0..n as u64).map(|i| (i * 2654435761) % (1 << 31)).collect()
    }

    fn check(g: &Graph, run: &TreeColoringRun) {
        let rep = verify_proper_edge_coloring(g, &run.coloring).unwrap();
        assert!(rep.is_proper_total());
        let delta = g.max_degree() as Color;
        assert!(run.coloring.colors.iter().all(|c| (1..=delta).contains(&c.unwrap())));
    }

    #[test]
    fn k_values() {
        assert_eq!(tree_k(3), 2);
        assert_eq!(tree_k(971), 2);
        assert_eq!(tree_k(972), 3);
        assert_eq!(tree_k(36 * 64), 4);
    }

    #[test]
    fn star_uses_every_color() {
        for d in 3..12 {
            let g = build_graph(&(1..=d).map(|i| (0, i)).collect::<Vec<_>>(), None).unwrap();
            let run = tree_delta_edge_coloring(&g, &ids(d + 1)).unwrap();
            check(&g, &run);
            assert_eq!(run.coloring.distinct_colors(), d);
        }
    }

    #[test]
    fn complete_binary_tree() {
        let n = (1 << 10) - 1;
        let edges: Vec<_> = (1..n).map(|v| ((v - 1) / 2, v)).collect();
        let g = build_graph(&edges, None).unwrap();
        let run = tree_delta_edge_coloring(&g, &ids(n)).unwrap();
        check(&g, &run);
        assert_eq!(g.max_degree(), 3);
    }

    #[test]
    fn random_trees_small_degree() {
        for seed in 0..6 {
            let t = if seed % 2 == 0 { random_tree(10_000, seed).unwrap() } else { random_bounded_degree_tree(10_000, 3 + seed as usize, seed).unwrap() };
            let run = tree_delta_edge_coloring(&t.graph, &ids(10_000)).unwrap();
            check(&t.graph, &run);
            let log = (0..).find(|&i| run.k.pow(i) >= 10_000).unwrap() as usize;
            assert!(run.phases <= log + 1);
        }
    }

    #[test]
    fn partition_branch_on_high_degree() {
        // Δ = 1000 gives k = 3 and palette parts of at least k colors
        let t = truncated_regular_tree(1000, 2).unwrap();
        let run = tree_delta_edge_coloring(&t.graph, &ids(t.n())).unwrap();
        assert_eq!(run.k, 3);
        check(&t.graph, &run);
        let t = random_bounded_degree_tree(20_000, 1000, 3).unwrap();
        if t.graph.max_degree() >= 972 {
            check(&t.graph, &tree_delta_edge_coloring(&t.graph, &ids(20_000)).unwrap());
        }
    }

    #[test]
    fn rejects_low_degree() {
        let g = build_graph(&[(0, 1), (1, 2)], None).unwrap();
        assert_eq!(tree_delta_edge_coloring(&g, &ids(3)).unwrap_err(), DecompError::DegreeTooSmall(2));
    }

    fn rooted_star(d: usize) -> RootedTree {
        RootedTree::new(build_graph(&(1..=d).map(|i| (0, i)).collect::<Vec<_>>(), None).unwrap(), 0).unwrap()
    }

    #[test]
    fn oriented_star_keeps_ranks() {
        let t = rooted_star(6);
        let run = oriented_tree_plus_one_coloring(&t, &ids(7)).unwrap();
        assert_eq!(run.coloring, PartialEdgeColoring { palette_size: 7, ..sibling_rank_coloring(&t, &ids(7)).unwrap() });
        assert_eq!(run.coloring.distinct_colors(), 6);
    }

    #[test]
    fn oriented_path() {
        let g = build_graph(&(1..50).map(|i| (i - 1, i)).collect::<Vec<_>>(), None).unwrap();
        let t = RootedTree::new(g, 0).unwrap();
        let run = oriented_tree_plus_one_coloring(&t, &ids(50)).unwrap();
        assert!(verify_proper_edge_coloring(&t.graph, &run.coloring).unwrap().is_proper_total());
        assert!(run.coloring.max_color().unwrap() <= 3);
    }

    // every vertex meets at most two class-i edges, and with two one is its parent edge
    fn classes_are_paths(t: &RootedTree, c: &PartialEdgeColoring) -> bool {
        (0..t.n()).all(|v| {
            let mut seen = std::collections::HashMap::new();
            for &(_, e) in t.graph.neighbors(v) {
                *seen.entry(c.colors[e].unwrap()).or_insert(0) += 1;
            }
            let up = t.parent[v].map(|(_, e)| c.colors[e].unwrap());
            seen.iter().all(|(&col, &cnt)| cnt == 1 || (cnt == 2 && up == Some(col)))
        })
    }

    #[test]
    fn oriented_random_trees() {
        for seed in 0..1000 {
            let n = 2 + (seed as usize * 37) % 300;
            let t = if seed % 3 == 0 { random_tree(n, seed).unwrap() } else { random_bounded_degree_tree(n, 2 + seed as usize % 5, seed).unwrap() };
            let id = ids(n);
            let phi0 = sibling_rank_coloring(&t, &id).unwrap();
            assert!(classes_are_paths(&t, &phi0));
            let run = oriented_tree_plus_one_coloring(&t, &id).unwrap();
            assert!(verify_proper_edge_coloring(&t.graph, &run.coloring).unwrap().is_proper_total());
            assert!(run.coloring.max_color().unwrap() as usize <= t.graph.max_degree() + 1);
            let bound = ORIENTED_ROUNDS_C * (log_star(n as u64) + 1) + 4 * LINIAL_BETA as usize;
            assert!(run.rounds <= bound, "{} > {bound}", run.rounds);
        }
    }

    #[test]
    fn oriented_rejects_duplicate_ids() {
        let t = rooted_star(3);
        assert_eq!(oriented_tree_plus_one_coloring(&t, &[1, 2, 2, 3]).unwrap_err(), DecompError::DuplicateIds);
    }
}
