use super::{LayeredGadget, LowerBoundError, Side};
use crate::constants::EXHAUSTIVE_EDGE_LIMIT;
use crate::graph_core::{Color, EdgeId, VertexId};
use serde::{Deserialize, Serialize};

/// One forcing step: the `witnesses` at `vertex` all lie in palette half `saturated`
/// and are `k` many, so they use that whole half and every edge in `forced` must take
/// a color from the other half.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcingStep {
    pub vertex: VertexId,
    pub side: Side,
    pub layer: usize,
    pub saturated: u8,
    pub witnesses: Vec<EdgeId>,
    pub forced: Vec<EdgeId>,
}

/// More than `k` edges at `vertex` are known to lie in half `half`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub vertex: VertexId,
    pub half: u8,
    pub edges: Vec<EdgeId>,
    /// The edge among `edges` whose half was forced from its other endpoint; it has no
    /// legal color.
    pub blocked: Option<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Propagation,
    /// No proper completion exists among all colorings of the free edges.
    Exhaustive { nodes: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub frozen_top: usize,
    /// Lowest layer held fixed.
    pub frozen_from: usize,
    pub method: Method,
    pub steps: Vec<ForcingStep>,
    pub contradiction: Option<Contradiction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecolorOutcome {
    /// Every total coloring agreeing with the initial one on the top layers fails.
    Certificate(Certificate),
    /// A proper total coloring that agrees with the initial one on the top layers.
    Counterexample { coloring: Vec<Color> },
    /// Propagation stalled and the instance is too large to search.
    Inconclusive { reason: String, steps: Vec<ForcingStep> },
}

fn frozen_from(g: &LayeredGadget, frozen_top: usize) -> Result<usize, LowerBoundError> {
    if g.ell < 7 {
        return Err(LowerBoundError::InvalidParameters(format!("ℓ = {} is below 7", g.ell)));
    }
    if frozen_top == 0 || frozen_top > g.ell {
        return Err(LowerBoundError::InvalidParameters(format!("frozen_top = {frozen_top} outside 1..={}", g.ell)));
    }
    Ok(g.ell + 1 - frozen_top)
}

fn is_frozen(g: &LayeredGadget, e: EdgeId, from: usize) -> bool {
    let (a, b) = g.graph.endpoints(e);
    e != g.e0 && g.layer[a].1 >= from && g.layer[b].1 >= from && g.coloring.colors[e].is_some()
}

// Half known for each edge: from the frozen color, or from the step that forced it.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Known {
    Free,
    Frozen(u8),
    Forced(u8, usize),
}

impl Known {
    fn half(self) -> Option<u8> {
        match self {
            Known::Free => None,
            Known::Frozen(h) | Known::Forced(h, _) => Some(h),
        }
    }
}

fn propagate(g: &LayeredGadget, from: usize) -> (Vec<ForcingStep>, Option<Contradiction>) {
    let graph = &g.graph;
    let mut known: Vec<Known> = (0..graph.m())
        .map(|e| if is_frozen(g, e, from) { Known::Frozen(g.half(g.coloring.colors[e].unwrap())) } else { Known::Free })
        .collect();
    let mut order: Vec<VertexId> = (0..graph.n()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.layer[v].1), v));
    let mut saturated = vec![[false; 2]; graph.n()];
    let mut steps: Vec<ForcingStep> = Vec::new();
    loop {
        let mut changed = false;
        for &v in &order {
            for h in 0..2u8 {
                let with_h: Vec<EdgeId> =
                    graph.neighbors(v).iter().map(|&(_, e)| e).filter(|&e| known[e].half() == Some(h)).collect();
                if with_h.len() > g.k {
                    let blocked = with_h.iter().copied().find(|&e| match known[e] {
                        Known::Forced(_, s) => steps[s].vertex != v,
                        _ => false,
                    });
                    return (steps, Some(Contradiction { vertex: v, half: h, edges: with_h, blocked }));
                }
                if with_h.len() < g.k || saturated[v][h as usize] {
                    continue;
                }
                saturated[v][h as usize] = true;
                let forced: Vec<EdgeId> =
                    graph.neighbors(v).iter().map(|&(_, e)| e).filter(|&e| known[e] == Known::Free).collect();
                for &e in &forced {
                    known[e] = Known::Forced(1 - h, steps.len());
                }
                let (side, layer) = g.layer[v];
                steps.push(ForcingStep { vertex: v, side, layer, saturated: h, witnesses: with_h, forced });
                changed = true;
            }
        }
        if !changed {
            return (steps, None);
        }
    }
}

/// Replays a propagation certificate against the gadget. Exhaustive certificates carry
/// no derivation and are only checked for their frozen range.
pub fn check_certificate(g: &LayeredGadget, cert: &Certificate) -> Result<(), String> {
    let from = frozen_from(g, cert.frozen_top).map_err(|e| e.to_string())?;
    if from != cert.frozen_from {
        return Err(format!("frozen range starts at {from}, certificate says {}", cert.frozen_from));
    }
    if cert.method != Method::Propagation {
        return Ok(());
    }
    let graph = &g.graph;
    let mut half: Vec<Option<u8>> =
        (0..graph.m()).map(|e| is_frozen(g, e, from).then(|| g.half(g.coloring.colors[e].unwrap()))).collect();
    let incident = |v: VertexId, e: EdgeId| e < graph.m() && { let (a, b) = graph.endpoints(e); a == v || b == v };
    for (i, s) in cert.steps.iter().enumerate() {
        if s.vertex >= graph.n() || s.saturated > 1 {
            return Err(format!("step {i}: bad vertex or half"));
        }
        let mut w = s.witnesses.clone();
        w.sort_unstable();
        w.dedup();
        if w.len() != g.k || !w.iter().all(|&e| incident(s.vertex, e) && half[e] == Some(s.saturated)) {
            return Err(format!("step {i}: witnesses do not fill half {} at vertex {}", s.saturated, s.vertex));
        }
        for &e in &s.forced {
            if !incident(s.vertex, e) || half[e].is_some() {
                return Err(format!("step {i}: edge {e} cannot be forced at vertex {}", s.vertex));
            }
            half[e] = Some(1 - s.saturated);
        }
    }
    let Some(c) = &cert.contradiction else {
        return Err("no contradiction".into());
    };
    let mut es = c.edges.clone();
    es.sort_unstable();
    es.dedup();
    if es.len() <= g.k || !es.iter().all(|&e| incident(c.vertex, e) && half[e] == Some(c.half)) {
        return Err(format!("contradiction at vertex {} does not overfill half {}", c.vertex, c.half));
    }
    Ok(())
}

/// Searches every coloring of the edges outside the frozen top for a proper total
/// completion. `None` means none exists.
pub fn exhaustive_completion(g: &LayeredGadget, frozen_top: usize) -> Result<(Option<Vec<Color>>, u64), LowerBoundError> {
    let from = frozen_from(g, frozen_top)?;
    let graph = &g.graph;
    let free: Vec<EdgeId> = (0..graph.m()).filter(|&e| !is_frozen(g, e, from)).collect();
    if free.len() > EXHAUSTIVE_EDGE_LIMIT {
        return Err(LowerBoundError::TooManyFreeEdges { free: free.len(), limit: EXHAUSTIVE_EDGE_LIMIT });
    }
    let palette = (g.delta + g.c) as Color;
    let mut used = vec![0u64; graph.n()];
    let mut colors: Vec<Option<Color>> = vec![None; graph.m()];
    for e in (0..graph.m()).filter(|&e| is_frozen(g, e, from)) {
        let c = g.coloring.colors[e].unwrap();
        let (a, b) = graph.endpoints(e);
        used[a] |= 1 << c;
        used[b] |= 1 << c;
        colors[e] = Some(c);
    }
    fn go(
        i: usize,
        free: &[EdgeId],
        g: &LayeredGadget,
        palette: Color,
        used: &mut [u64],
        colors: &mut [Option<Color>],
        nodes: &mut u64,
    ) -> bool {
        *nodes += 1;
        let Some(&e) = free.get(i) else {
            return true;
        };
        let (a, b) = g.graph.endpoints(e);
        for c in 1..=palette {
            if (used[a] | used[b]) >> c & 1 == 1 {
                continue;
            }
            used[a] |= 1 << c;
            used[b] |= 1 << c;
            colors[e] = Some(c);
            if go(i + 1, free, g, palette, used, colors, nodes) {
                return true;
            }
            used[a] &= !(1 << c);
            used[b] &= !(1 << c);
            colors[e] = None;
        }
        false
    }
    let mut nodes = 0;
    let found = go(0, &free, g, palette, &mut used, &mut colors, &mut nodes);
    Ok((found.then(|| colors.into_iter().map(|c| c.expect("all colored")).collect()), nodes))
}

/// Holds the initial coloring on the top `frozen_top` layers and derives, one palette
/// half at a time, that the rest cannot be completed. Falls back to exhaustive search
/// when propagation stalls on a small enough instance.
pub fn forced_recolor_check(g: &LayeredGadget, frozen_top: usize) -> Result<RecolorOutcome, LowerBoundError> {
    let from = frozen_from(g, frozen_top)?;
    let (steps, contradiction) = propagate(g, from);
    if contradiction.is_some() {
        return Ok(RecolorOutcome::Certificate(Certificate {
            frozen_top,
            frozen_from: from,
            method: Method::Propagation,
            steps,
            contradiction,
        }));
    }
    match exhaustive_completion(g, frozen_top) {
        Ok((Some(coloring), _)) => Ok(RecolorOutcome::Counterexample { coloring }),
        Ok((None, nodes)) => Ok(RecolorOutcome::Certificate(Certificate {
            frozen_top,
            frozen_from: from,
            method: Method::Exhaustive { nodes },
            steps,
            contradiction: None,
        })),
        Err(LowerBoundError::TooManyFreeEdges { free, .. }) => Ok(RecolorOutcome::Inconclusive {
            reason: format!("propagation stalled after {} steps; {free} free edges", steps.len()),
            steps,
        }),
        Err(e) => Err(e),
    }
}
