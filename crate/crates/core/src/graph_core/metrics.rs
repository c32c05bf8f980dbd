use super::{Color, EdgeId, Graph, GraphError, PartialEdgeColoring, VertexId};
use std::collections::{HashMap, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringViolation {
    pub vertex: VertexId,
    pub edges: (EdgeId, EdgeId),
    pub color: Color,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColoringReport {
    pub violations: Vec<ColoringViolation>,
    pub uncolored: Vec<EdgeId>,
    pub max_color: Option<Color>,
}

impl ColoringReport {
    pub fn is_proper(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_proper_total(&self) -> bool {
        self.violations.is_empty() && self.uncolored.is_empty()
    }
}

/// Lists every pair of adjacent edges sharing a color, every uncolored edge, and the
/// largest color used.
pub fn verify_proper_edge_coloring(
    g: &Graph,
    c: &PartialEdgeColoring,
) -> Result<ColoringReport, GraphError> {
    if c.colors.len() > g.m() {
        return Err(GraphError::UnknownEdge(g.m()));
    }
    if c.colors.len() < g.m() {
        return Err(GraphError::InvalidParameter(format!(
            "coloring covers {} of {} edges",
            c.colors.len(),
            g.m()
        )));
    }
    let mut rep = ColoringReport {
        uncolored: (0..g.m()).filter(|&e| c.colors[e].is_none()).collect(),
        max_color: c.max_color(),
        ..Default::default()
    };
    let mut by_color: HashMap<Color, Vec<EdgeId>> = HashMap::new();
    for v in 0..g.n() {
        by_color.clear();
        for &(_, e) in g.neighbors(v) {
            if let Some(col) = c.colors[e] {
                by_color.entry(col).or_default().push(e);
            }
        }
        let mut groups: Vec<_> = by_color.iter().filter(|(_, es)| es.len() > 1).collect();
        groups.sort();
        for (&color, es) in groups {
            for i in 0..es.len() {
                for j in (i + 1)..es.len() {
                    rep.violations.push(ColoringViolation {
                        vertex: v,
                        edges: (es[i], es[j]),
                        color,
                    });
                }
            }
        }
    }
    Ok(rep)
}

/// Connected components of the subgraph induced by `part`, each sorted.
pub fn connected_components(g: &Graph, part: &[bool]) -> Vec<Vec<VertexId>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if !part[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &(w, _) in g.neighbors(v) {
                if part[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn bfs_within(g: &Graph, inside: &[bool], src: VertexId, dist: &mut HashMap<VertexId, usize>) {
    dist.clear();
    dist.insert(src, 0);
    let mut q = VecDeque::from([src]);
    while let Some(v) = q.pop_front() {
        let d = dist[&v];
        for &(w, _) in g.neighbors(v) {
            if inside[w] && !dist.contains_key(&w) {
                dist.insert(w, d + 1);
                q.push_back(w);
            }
        }
    }
}

/// Exact `(size, diameter)` of each component induced by `part`. Components that are
/// trees use a double sweep; others fall back to BFS from every vertex.
pub fn component_metrics(g: &Graph, part: &[bool]) -> Vec<(usize, usize)> {
    let mut dist = HashMap::new();
    connected_components(g, part)
        .into_iter()
        .map(|comp| {
            let inner_edges: usize = comp
                .iter()
                .map(|&v| g.neighbors(v).iter().filter(|&&(w, _)| part[w]).count())
                .sum::<usize>()
                / 2;
            let diam = if inner_edges + 1 == comp.len() {
                bfs_within(g, part, comp[0], &mut dist);
                let (&far, _) = dist.iter().max_by_key(|&(v, d)| (*d, *v)).unwrap();
                bfs_within(g, part, far, &mut dist);
                *dist.values().max().unwrap()
            } else {
                comp.iter()
                    .map(|&s| {
                        bfs_within(g, part, s, &mut dist);
                        *dist.values().max().unwrap()
                    })
                    .max()
                    .unwrap()
            };
            (comp.len(), diam)
        })
        .collect()
}

fn check_component(g: &Graph, component: &[VertexId]) -> Result<Vec<bool>, GraphError> {
    let mut inside = vec![false; g.n()];
    for &v in component {
        if v >= g.n() {
            return Err(GraphError::VertexOutOfRange { id: v, n: g.n() });
        }
        inside[v] = true;
    }
    if let Some(&s) = component.first() {
        let mut dist = HashMap::new();
        bfs_within(g, &inside, s, &mut dist);
        let distinct = inside.iter().filter(|&&b| b).count();
        if dist.len() != distinct {
            return Err(GraphError::Disconnected);
        }
    }
    Ok(inside)
}

fn ball_within(g: &Graph, inside: &[bool], c: VertexId, d: usize) -> Vec<VertexId> {
    let mut out = vec![c];
    let mut depth = HashMap::from([(c, 0usize)]);
    let mut head = 0;
    while head < out.len() {
        let v = out[head];
        head += 1;
        let dv = depth[&v];
        if dv == d {
            continue;
        }
        for &(w, _) in g.neighbors(v) {
            if inside[w] && !depth.contains_key(&w) {
                depth.insert(w, dv + 1);
                out.push(w);
            }
        }
    }
    out
}

/// Greedy distance-`d` dominating set of a connected vertex set.
///
/// Uncovered vertices are visited in preference order (then by id). For each, the
/// dominator is the vertex of its `d`-ball covering the most uncovered vertices; ties
/// go to the more preferred vertex.
pub fn greedy_distance_dominating_set(
    g: &Graph,
    component: &[VertexId],
    d: usize,
    preference: Option<&[VertexId]>,
) -> Result<Vec<VertexId>, GraphError> {
    let inside = check_component(g, component)?;
    let mut rank = HashMap::new();
    if let Some(p) = preference {
        for &v in p {
            if v < g.n() && inside[v] && !rank.contains_key(&v) {
                rank.insert(v, rank.len());
            }
        }
    }
    let mut order: Vec<VertexId> = component.to_vec();
    order.sort_unstable_by_key(|v| (rank.get(v).copied().unwrap_or(usize::MAX), *v));
    order.dedup();
    let mut covered: HashMap<VertexId, bool> = order.iter().map(|&v| (v, false)).collect();
    let mut chosen = Vec::new();
    for &u in &order {
        if covered[&u] {
            continue;
        }
        let mut best: Option<(usize, usize, VertexId)> = None;
        for w in ball_within(g, &inside, u, d) {
            let gain = ball_within(g, &inside, w, d)
                .into_iter()
                .filter(|x| !covered[x])
                .count();
            let key = (gain, usize::MAX - rank.get(&w).copied().unwrap_or(usize::MAX), w);
            let better = match best {
                None => true,
                Some((bg, br, bw)) => (key.0, key.1) > (bg, br) || ((key.0, key.1) == (bg, br) && w < bw),
            };
            if better {
                best = Some(key);
            }
        }
        let w = best.unwrap().2;
        for x in ball_within(g, &inside, w, d) {
            covered.insert(x, true);
        }
        chosen.push(w);
    }
    Ok(chosen)
}

/// Rank-ordered greedy: candidates are taken in `ranked` order, and each pick removes
/// its radius-`d/2` ball from consideration. Vertices still farther than `d` from
/// every pick are then covered with [`greedy_distance_dominating_set`]'s rule.
pub fn ranked_dominating_set(
    g: &Graph,
    component: &[VertexId],
    d: usize,
    ranked: &[VertexId],
) -> Result<Vec<VertexId>, GraphError> {
    let inside = check_component(g, component)?;
    let mut removed: HashMap<VertexId, bool> = HashMap::new();
    let mut chosen = Vec::new();
    for &v in ranked {
        if v >= g.n() || !inside[v] || removed.get(&v).copied().unwrap_or(false) {
            continue;
        }
        chosen.push(v);
        for x in ball_within(g, &inside, v, d / 2) {
            removed.insert(x, true);
        }
    }
    let mut dominated: HashMap<VertexId, bool> = HashMap::new();
    for &c in &chosen {
        for x in ball_within(g, &inside, c, d) {
            dominated.insert(x, true);
        }
    }
    let rest: Vec<VertexId> = component
        .iter()
        .copied()
        .filter(|v| !dominated.contains_key(v))
        .collect();
    if !rest.is_empty() {
        // cover the leftovers inside the full component metric
        let extra = greedy_distance_dominating_set(g, component, d, Some(&rest))?;
        let mut dom = dominated;
        for w in extra {
            let gains = ball_within(g, &inside, w, d)
                .iter()
                .any(|x| !dom.contains_key(x));
            if gains {
                for x in ball_within(g, &inside, w, d) {
                    dom.insert(x, true);
                }
                chosen.push(w);
            }
        }
    }
    Ok(chosen)
}
