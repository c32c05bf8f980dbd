use super::{Color, Graph, GraphError, PartialEdgeColoring, RootedTree, VertexId};
use crate::rng::rng_from;
use rand::seq::SliceRandom;
use rand::Rng;

/// Decodes a Prüfer sequence over `[0, n)` into its edge list.
pub(crate) fn prufer_decode(seq: &[usize], n: usize) -> Vec<(VertexId, VertexId)> {
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut ptr = 0;
    while ptr < n && degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &x in seq {
        edges.push((leaf, x));
        degree[x] -= 1;
        if x < ptr && degree[x] == 1 {
            leaf = x;
        } else {
            ptr += 1;
            while ptr < n && degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    if n >= 2 {
        // the two remaining degree-1 vertices; `leaf` is one, n-1 the other
        edges.push((leaf, n - 1));
    }
    edges
}

/// Uniform labeled tree on `n` vertices via a random Prüfer sequence, rooted at 0.
pub fn random_tree(n: usize, seed: u64) -> Result<RootedTree, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyTree);
    }
    let mut rng = rng_from(seed);
    let seq: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    let edges = prufer_decode(&seq, n);
    let g = Graph::from_edges_unchecked(n, &edges, None);
    RootedTree::new(g, 0)
}

/// Random recursive tree where vertex `i` attaches to a uniform earlier vertex whose
/// degree is still below `max_deg`. Rooted at 0.
pub fn random_bounded_degree_tree(
    n: usize,
    max_deg: usize,
    seed: u64,
) -> Result<RootedTree, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyTree);
    }
    if max_deg < 2 && n > 2 {
        return Err(GraphError::InvalidParameter(format!(
            "max degree {max_deg} cannot span {n} vertices"
        )));
    }
    let mut rng = rng_from(seed);
    let mut deg = vec![0usize; n];
    let mut open: Vec<usize> = vec![0];
    let mut edges = Vec::with_capacity(n - 1);
    for v in 1..n {
        let idx = rng.gen_range(0..open.len());
        let u = open[idx];
        edges.push((u, v));
        deg[u] += 1;
        deg[v] += 1;
        if deg[u] >= max_deg {
            open.swap_remove(idx);
        }
        if deg[v] < max_deg {
            open.push(v);
        }
    }
    RootedTree::new(Graph::from_edges_unchecked(n, &edges, None), 0)
}

/// Depth-`height` truncation of the infinite `delta`-regular tree, labeled by depth parity.
pub fn truncated_regular_tree(delta: usize, height: usize) -> Result<RootedTree, GraphError> {
    if delta < 2 {
        return Err(GraphError::InvalidParameter(format!(
            "degree must be at least 2, got {delta}"
        )));
    }
    let mut edges = Vec::new();
    let mut depth = vec![0usize];
    let mut frontier = vec![0usize];
    for h in 0..height {
        let mut next = Vec::new();
        for &v in &frontier {
            let kids = if h == 0 { delta } else { delta - 1 };
            for _ in 0..kids {
                let w = depth.len();
                depth.push(h + 1);
                edges.push((v, w));
                next.push(w);
            }
        }
        frontier = next;
    }
    let labels = depth.iter().map(|&d| (d % 2) as u32).collect();
    let g = Graph::from_edges_unchecked(depth.len(), &edges, Some(labels));
    RootedTree::new(g, 0)
}

fn check_truncated_regular(t: &RootedTree) -> Result<usize, GraphError> {
    let h = t.height();
    let delta = t.graph.degree(t.root);
    if h == 0 {
        return Ok(0);
    }
    if delta < 2 {
        return Err(GraphError::NotTruncatedRegular(format!(
            "root degree {delta}"
        )));
    }
    for v in 0..t.n() {
        let d = t.graph.degree(v);
        let want = if v == t.root {
            delta
        } else if t.depth[v] == h {
            1
        } else {
            delta
        };
        if d != want {
            return Err(GraphError::NotTruncatedRegular(format!(
                "vertex {v} at depth {} has degree {d}, expected {want}",
                t.depth[v]
            )));
        }
    }
    Ok(delta)
}

/// Proper `(2Δ-1)`-edge coloring of a truncated `T_Δ`, generated by coloring one
/// edge uniformly and then letting each vertex with one colored edge give its other
/// edges a uniform ordered choice of the remaining colors.
pub fn random_proper_coloring_t_delta(
    t: &RootedTree,
    seed: u64,
) -> Result<PartialEdgeColoring, GraphError> {
    let delta = check_truncated_regular(t)?;
    let g = &t.graph;
    let palette = (2 * delta.max(1) - 1) as Color;
    let mut colors: Vec<Option<Color>> = vec![None; g.m()];
    if g.m() == 0 {
        return Ok(PartialEdgeColoring {
            colors,
            palette_size: palette,
        });
    }
    let mut rng = rng_from(seed);
    let first = g.neighbors(t.root)[0].1;
    colors[first] = Some(rng.gen_range(1..=palette));
    // BFS: every processed vertex has exactly one colored incident edge.
    let mut queue = std::collections::VecDeque::from([t.root]);
    let mut done = vec![false; g.n()];
    while let Some(v) = queue.pop_front() {
        if done[v] {
            continue;
        }
        done[v] = true;
        let used: Vec<Color> = g
            .neighbors(v)
            .iter()
            .filter_map(|&(_, e)| colors[e])
            .collect();
        debug_assert_eq!(used.len(), 1);
        let mut rest: Vec<Color> = (1..=palette).filter(|c| !used.contains(c)).collect();
        rest.shuffle(&mut rng);
        let mut it = rest.into_iter();
        for &(w, e) in g.neighbors(v) {
            if colors[e].is_none() {
                colors[e] = it.next();
            }
            if !done[w] {
                queue.push_back(w);
            }
        }
    }
    Ok(PartialEdgeColoring {
        colors,
        palette_size: palette,
    })
}

/// Graph with edges between all pairs at distance in `[1, k]`.
pub fn power_graph(g: &Graph, k: usize) -> Result<Graph, GraphError> {
    if k == 0 {
        return Err(GraphError::InvalidParameter("power must be >= 1".into()));
    }
    let mut edges = Vec::new();
    for u in 0..g.n() {
        for (v, _) in g.ball(u, k) {
            if v > u {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_edges_unchecked(
        g.n(),
        &edges,
        g.labels().map(<[u32]>::to_vec),
    ))
}

/// Simple `delta`-regular graph from the configuration model. Stubs are paired one
/// pair at a time; a pair that would create a loop or a repeated edge is redrawn, and
/// the whole pairing restarts if the tail admits no valid pair.
pub fn random_regular_graph(n: usize, delta: usize, seed: u64) -> Result<Graph, GraphError> {
    if delta >= n || (n * delta) % 2 != 0 {
        return Err(GraphError::InvalidParameter(format!(
            "no simple {delta}-regular graph on {n} vertices"
        )));
    }
    let mut rng = rng_from(seed);
    'restart: for _ in 0..1000 {
        let mut stubs: Vec<u32> = (0..n as u32)
            .flat_map(|v| std::iter::repeat(v).take(delta))
            .collect();
        let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(delta); n];
        let mut edges = Vec::with_capacity(n * delta / 2);
        while !stubs.is_empty() {
            let mut found = None;
            for _ in 0..64 {
                let i = rng.gen_range(0..stubs.len());
                let j = rng.gen_range(0..stubs.len());
                let (a, b) = (stubs[i], stubs[j]);
                if i != j && a != b && !adj[a as usize].contains(&b) {
                    found = Some((i, j));
                    break;
                }
            }
            if found.is_none() {
                // exhaustive scan of the remaining stubs
                'scan: for i in 0..stubs.len() {
                    for j in (i + 1)..stubs.len() {
                        let (a, b) = (stubs[i], stubs[j]);
                        if a != b && !adj[a as usize].contains(&b) {
                            found = Some((i, j));
                            break 'scan;
                        }
                    }
                }
            }
            let Some((i, j)) = found else {
                continue 'restart;
            };
            let (a, b) = (stubs[i], stubs[j]);
            adj[a as usize].push(b);
            adj[b as usize].push(a);
            edges.push((a as usize, b as usize));
            let (hi, lo) = (i.max(j), i.min(j));
            stubs.swap_remove(hi);
            stubs.swap_remove(lo);
        }
        return Ok(Graph::from_edges_unchecked(n, &edges, None));
    }
    Err(GraphError::InvalidParameter(
        "regular graph pairing kept failing".into(),
    ))
}

/// Simple `delta`-regular bipartite graph on `2·half` vertices: the union of `delta`
/// edge-disjoint random perfect matchings between `[0, half)` (label 0) and
/// `[half, 2·half)` (label 1).
pub fn random_regular_bipartite_graph(half: usize, delta: usize, seed: u64) -> Result<Graph, GraphError> {
    if delta > half {
        return Err(GraphError::InvalidParameter(format!(
            "no simple {delta}-regular bipartite graph with sides of {half}"
        )));
    }
    let mut rng = rng_from(seed);
    let mut adj: Vec<std::collections::HashSet<usize>> = vec![Default::default(); half];
    let mut edges = Vec::with_capacity(half * delta);
    for _ in 0..delta {
        let mut perm: Vec<usize> = (0..half).collect();
        let mut ok = false;
        for _ in 0..1000 {
            perm.shuffle(&mut rng);
            // swap clashing entries with random partners until none is left
            for _ in 0..20 * half {
                let Some(a) = (0..half).find(|&a| adj[a].contains(&perm[a])) else {
                    break;
                };
                let b = rng.gen_range(0..half);
                perm.swap(a, b);
            }
            if (0..half).all(|a| !adj[a].contains(&perm[a])) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(GraphError::InvalidParameter("bipartite matching kept clashing".into()));
        }
        for a in 0..half {
            adj[a].insert(perm[a]);
            edges.push((a, half + perm[a]));
        }
    }
    let labels = (0..2 * half).map(|v| u32::from(v >= half)).collect();
    Graph::from_edges(2 * half, &edges, Some(labels))
}

/// Checks that `edges` has no loops or repeated pairs.
#[cfg(test)]
pub(crate) fn is_simple(edges: &[(VertexId, VertexId)]) -> bool {
    let mut seen = std::collections::HashSet::new();
    edges
        .iter()
        .all(|&(u, v)| u != v && seen.insert((u.min(v), u.max(v))))
}
