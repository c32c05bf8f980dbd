use super::LowerBoundError;
use crate::constants::GADGET_VERTEX_CAP;
use crate::graph_core::{verify_proper_edge_coloring, Color, EdgeId, Graph, PartialEdgeColoring, VertexId};
use crate::rng::{derive, rng_from};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerSizes {
    pub k: usize,
    pub kprime: usize,
    /// `n[i − 1] = n_i` for `i = 1..=ℓ`.
    pub n: Vec<usize>,
    /// `l[i − 1] = l_i` for `i = 1..ℓ`, the levels where grouping happens.
    pub l: Vec<usize>,
}

impl LayerSizes {
    pub fn total(&self) -> usize {
        self.n.iter().sum()
    }
}

/// Layer and leftover counts of one half of the gadget: `n_1 = k`,
/// `n_{i+1} = k·⌊(n_i + l_{i−2}) / k′⌋`, `l_i = (n_i + l_{i−2}) mod k′`.
pub fn layer_sizes(delta: usize, c: usize, ell: usize) -> Result<LayerSizes, LowerBoundError> {
    if (delta + c) % 2 == 1 || c == 0 || 3 * c > delta || ell == 0 {
        return Err(LowerBoundError::InvalidParameters(format!(
            "need Δ + c even, 1 ≤ c ≤ Δ/3 and ℓ ≥ 1 (Δ = {delta}, c = {c}, ℓ = {ell})"
        )));
    }
    let k = (delta + c) / 2;
    let kprime = delta - k;
    let mut n = vec![k];
    let mut l: Vec<usize> = Vec::new();
    for i in 1..ell {
        let pool = n[i - 1] + if i >= 3 { l[i - 3] } else { 0 };
        l.push(pool % kprime);
        let next = (pool / kprime).saturating_mul(k);
        if next > GADGET_VERTEX_CAP {
            return Err(LowerBoundError::TooLarge(next));
        }
        n.push(next);
    }
    Ok(LayerSizes { k, kprime, n, l })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    U,
    V,
}

impl Side {
    fn flip(self) -> usize {
        match self {
            Side::U => 0,
            Side::V => 1,
        }
    }
}

/// `G*(ℓ, Δ, c)` with its initial partial coloring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredGadget {
    pub graph: Graph,
    /// Colors in `1..=Δ+c`; only `e0` is uncolored.
    pub coloring: PartialEdgeColoring,
    pub delta: usize,
    pub c: usize,
    pub ell: usize,
    pub k: usize,
    pub kprime: usize,
    pub e0: EdgeId,
    /// Side and layer of every vertex; the endpoints of `e0` are layer 0.
    pub layer: Vec<(Side, usize)>,
    /// Vertices left ungrouped at their own layer.
    pub leftover: Vec<bool>,
}

impl LayeredGadget {
    /// 0 for `S₀ = 1..=k`, 1 for `S₁ = k+1..=Δ+c`.
    pub fn half(&self, color: Color) -> u8 {
        u8::from(color as usize > self.k)
    }

    /// Palette half used by the blocks grouped at `level` on `side`.
    pub fn expected_half(&self, side: Side, level: usize) -> u8 {
        ((level + side.flip()) % 2) as u8
    }

    pub fn root(&self, side: Side) -> VertexId {
        let (a, b) = self.graph.endpoints(self.e0);
        if self.layer[a].0 == side {
            a
        } else {
            b
        }
    }

    /// The gadget with every vertex above `max_layer` deleted; parameters unchanged.
    pub fn truncated(&self, max_layer: usize) -> LayeredGadget {
        let keep: Vec<bool> = self.layer.iter().map(|&(_, i)| i <= max_layer).collect();
        let (graph, old) = self.graph.induced(&keep);
        let colors = (0..graph.m())
            .map(|e| {
                let (a, b) = graph.endpoints(e);
                self.coloring.colors[self.graph.edge_between(old[a], old[b]).expect("induced edge")]
            })
            .collect();
        let (a0, b0) = self.graph.endpoints(self.e0);
        let e0 = (0..graph.m())
            .find(|&e| {
                let (a, b) = graph.endpoints(e);
                (old[a], old[b]) == (a0, b0) || (old[a], old[b]) == (b0, a0)
            })
            .expect("layer 0 is kept");
        LayeredGadget {
            graph,
            coloring: PartialEdgeColoring { colors, palette_size: self.coloring.palette_size },
            layer: old.iter().map(|&v| self.layer[v]).collect(),
            leftover: old.iter().map(|&v| self.leftover[v]).collect(),
            e0,
            ..self.clone()
        }
    }

    pub fn to_doc(&self) -> GadgetDoc {
        GadgetDoc {
            n: self.graph.n(),
            edges: self.graph.edges().iter().map(|&(a, b)| [a, b]).collect(),
            colors: self.coloring.colors.iter().enumerate().filter_map(|(e, c)| c.map(|c| (e, c))).collect(),
            layers: self.layer.iter().copied().enumerate().collect(),
            leftover: (0..self.graph.n()).filter(|&v| self.leftover[v]).collect(),
            e0: self.e0,
            k: self.k,
            kprime: self.kprime,
            delta: self.delta,
            c: self.c,
            ell: self.ell,
        }
    }
}

/// Graph JSON plus the layer structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetDoc {
    pub n: usize,
    pub edges: Vec<[VertexId; 2]>,
    #[serde(default)]
    pub colors: BTreeMap<EdgeId, Color>,
    pub layers: BTreeMap<VertexId, (Side, usize)>,
    #[serde(default)]
    pub leftover: Vec<VertexId>,
    pub e0: EdgeId,
    pub k: usize,
    pub kprime: usize,
    pub delta: usize,
    pub c: usize,
    pub ell: usize,
}

impl GadgetDoc {
    pub fn gadget(&self) -> Result<LayeredGadget, LowerBoundError> {
        let edges: Vec<_> = self.edges.iter().map(|&[a, b]| (a, b)).collect();
        let graph = Graph::from_edges(self.n, &edges, None)?;
        let bad = |msg: String| LowerBoundError::InvalidParameters(msg);
        if self.e0 >= graph.m() {
            return Err(bad(format!("e0 = {} is not an edge", self.e0)));
        }
        let mut colors = vec![None; graph.m()];
        for (&e, &c) in &self.colors {
            *colors.get_mut(e).ok_or_else(|| bad(format!("color for unknown edge {e}")))? = Some(c);
        }
        let mut layer = Vec::with_capacity(self.n);
        for v in 0..self.n {
            layer.push(*self.layers.get(&v).ok_or_else(|| bad(format!("vertex {v} has no layer")))?);
        }
        let mut leftover = vec![false; self.n];
        for &v in &self.leftover {
            *leftover.get_mut(v).ok_or_else(|| bad(format!("leftover {v} out of range")))? = true;
        }
        Ok(LayeredGadget {
            graph,
            coloring: PartialEdgeColoring { colors, palette_size: (self.delta + self.c) as Color },
            delta: self.delta,
            c: self.c,
            ell: self.ell,
            k: self.k,
            kprime: self.kprime,
            e0: self.e0,
            layer,
            leftover,
        })
    }
}

/// Builds both halves. Grouping at each level takes the promoted leftovers first, then
/// the layer's vertices in id order. The seed picks the color order inside each
/// `K_{k′,k}` block.
pub fn build_gstar(delta: usize, c: usize, ell: usize, seed: u64) -> Result<LayeredGadget, LowerBoundError> {
    let sizes = layer_sizes(delta, c, ell)?;
    let total = 2 + 2 * sizes.total();
    if total > GADGET_VERTEX_CAP {
        return Err(LowerBoundError::TooLarge(total));
    }
    let (k, kp) = (sizes.k, sizes.kprime);
    let mut layer = vec![(Side::U, 0), (Side::V, 0)];
    let mut leftover = vec![false, false];
    let mut edges = vec![(0, 1)];
    let mut colors: Vec<Option<Color>> = vec![None];
    for side in [Side::U, Side::V] {
        let mut rng = rng_from(derive(seed, &[side.flip() as u64]));
        let root = side.flip();
        let mut block = |lower: &[VertexId], level: usize, layer: &mut Vec<(Side, usize)>, leftover: &mut Vec<bool>| {
            let half = (level + side.flip()) % 2;
            let mut palette: Vec<Color> = (1..=k as Color).map(|x| x + (half * k) as Color).collect();
            palette.shuffle(&mut rng);
            let first = layer.len();
            for _ in 0..k {
                layer.push((side, level + 1));
                leftover.push(false);
            }
            for (j, &a) in lower.iter().enumerate() {
                for m in 0..k {
                    edges.push((a, first + m));
                    colors.push(Some(palette[(j + m) % k]));
                }
            }
            (first..first + k).collect::<Vec<_>>()
        };
        let mut layers: Vec<Vec<VertexId>> = vec![vec![root]];
        layers.push(block(&[root], 0, &mut layer, &mut leftover));
        let mut left: Vec<Vec<VertexId>> = vec![Vec::new(), Vec::new()];
        for i in 1..ell {
            let promoted = if i >= 2 { left[i - 2].clone() } else { Vec::new() };
            let pool: Vec<VertexId> = promoted.iter().chain(&layers[i]).copied().collect();
            let groups = pool.len() / kp;
            let mut next = Vec::with_capacity(groups * k);
            for g in 0..groups {
                next.extend(block(&pool[g * kp..(g + 1) * kp], i, &mut layer, &mut leftover));
            }
            let rest: Vec<VertexId> = pool[groups * kp..].to_vec();
            for &v in &rest {
                leftover[v] = true;
            }
            if left.len() <= i {
                left.resize(i + 1, Vec::new());
            }
            left[i] = rest;
            layers.push(next);
        }
        debug_assert_eq!(layers[1..].iter().map(Vec::len).collect::<Vec<_>>(), sizes.n);
    }
    let graph = Graph::from_edges(layer.len(), &edges, None)?;
    Ok(LayeredGadget {
        graph,
        coloring: PartialEdgeColoring { colors, palette_size: (delta + c) as Color },
        delta,
        c,
        ell,
        k,
        kprime: kp,
        e0: 0,
        layer,
        leftover,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GadgetViolation {
    Parameters(String),
    E0Colored { edge: EdgeId },
    E0Endpoints { edge: EdgeId },
    Uncolored { edge: EdgeId },
    ColorOutOfRange { edge: EdgeId, color: Color },
    Improper { vertex: VertexId, edges: (EdgeId, EdgeId), color: Color },
    CrossesSides { edge: EdgeId },
    LayerCrossing { edge: EdgeId, from: usize, to: usize },
    WrongPaletteHalf { edge: EdgeId, color: Color, expected: u8 },
    IncompleteBlock { side: Side, level: usize, lower: Vec<VertexId> },
    Ungrouped { vertex: VertexId },
    LayerCount { side: Side, layer: usize, expected: usize, found: usize },
    LeftoverCount { side: Side, layer: usize, expected: usize, found: usize },
}

impl fmt::Display for GadgetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GadgetViolation::*;
        match self {
            Parameters(s) => write!(f, "bad parameters: {s}"),
            E0Colored { edge } => write!(f, "e0 must be uncolored (edge {edge})"),
            E0Endpoints { edge } => write!(f, "e0 (edge {edge}) must join the two layer-0 roots"),
            Uncolored { edge } => write!(f, "edge {edge} is uncolored"),
            ColorOutOfRange { edge, color } => write!(f, "edge {edge} has color {color} outside the palette"),
            Improper { vertex, edges, color } => {
                write!(f, "edges {} and {} share color {color} at vertex {vertex}", edges.0, edges.1)
            }
            CrossesSides { edge } => write!(f, "edge {edge} joins the two halves"),
            LayerCrossing { edge, from, to } => write!(f, "edge {edge} joins layers {from} and {to}"),
            WrongPaletteHalf { edge, color, expected } => {
                write!(f, "edge {edge} has color {color}, expected palette half S{expected}")
            }
            IncompleteBlock { side, level, lower } => {
                write!(f, "block at level {level} on side {side:?} with lower vertices {lower:?} is not K_(k',k)")
            }
            Ungrouped { vertex } => write!(f, "vertex {vertex} is neither grouped nor a leftover"),
            LayerCount { side, layer, expected, found } => {
                write!(f, "side {side:?} layer {layer} has {found} vertices, expected {expected}")
            }
            LeftoverCount { side, layer, expected, found } => {
                write!(f, "side {side:?} layer {layer} has {found} leftovers, expected {expected}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GadgetReport {
    pub violations: Vec<GadgetViolation>,
}

impl GadgetReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_gstar(g: &LayeredGadget) -> GadgetReport {
    let mut out = Vec::new();
    let sizes = match layer_sizes(g.delta, g.c, g.ell) {
        Ok(s) if s.k == g.k && s.kprime == g.kprime => s,
        Ok(_) => {
            out.push(GadgetViolation::Parameters(format!("k = {}, k' = {} do not match Δ and c", g.k, g.kprime)));
            return GadgetReport { violations: out };
        }
        Err(e) => {
            out.push(GadgetViolation::Parameters(e.to_string()));
            return GadgetReport { violations: out };
        }
    };
    let graph = &g.graph;
    let n = graph.n();
    if g.layer.len() != n || g.leftover.len() != n || g.coloring.colors.len() != graph.m() || g.e0 >= graph.m() {
        out.push(GadgetViolation::Parameters("layer, leftover or color vectors do not match the graph".into()));
        return GadgetReport { violations: out };
    }
    let top = (g.delta + g.c) as Color;
    let (a0, b0) = graph.endpoints(g.e0);
    let mut sides = [g.layer[a0], g.layer[b0]];
    sides.sort();
    if sides != [(Side::U, 0), (Side::V, 0)] {
        out.push(GadgetViolation::E0Endpoints { edge: g.e0 });
    }
    if g.coloring.colors[g.e0].is_some() {
        out.push(GadgetViolation::E0Colored { edge: g.e0 });
    }
    for e in (0..graph.m()).filter(|&e| e != g.e0) {
        match g.coloring.colors[e] {
            None => out.push(GadgetViolation::Uncolored { edge: e }),
            Some(c) if c == 0 || c > top => out.push(GadgetViolation::ColorOutOfRange { edge: e, color: c }),
            _ => {}
        }
    }
    if let Ok(rep) = verify_proper_edge_coloring(graph, &g.coloring) {
        for v in rep.violations {
            out.push(GadgetViolation::Improper { vertex: v.vertex, edges: v.edges, color: v.color });
        }
    }
    // up-edges per vertex, split by span
    let mut up1: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut up3: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut down: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for e in (0..graph.m()).filter(|&e| e != g.e0) {
        let (a, b) = graph.endpoints(e);
        let ((sa, la), (sb, lb)) = (g.layer[a], g.layer[b]);
        if sa != sb {
            out.push(GadgetViolation::CrossesSides { edge: e });
            continue;
        }
        let (lo, hi) = if la <= lb { (a, b) } else { (b, a) };
        let (l_lo, l_hi) = (la.min(lb), la.max(lb));
        let level = match l_hi - l_lo {
            1 => l_lo,
            3 if g.leftover[lo] => l_lo + 2,
            _ => {
                out.push(GadgetViolation::LayerCrossing { edge: e, from: l_lo, to: l_hi });
                continue;
            }
        };
        if l_hi - l_lo == 1 {
            up1[lo].push(hi);
        } else {
            up3[lo].push(hi);
        }
        down[hi].push(lo);
        if let Some(c) = g.coloring.colors[e].filter(|&c| c >= 1 && c <= top) {
            let expected = g.expected_half(sa, level);
            if g.half(c) != expected {
                out.push(GadgetViolation::WrongPaletteHalf { edge: e, color: c, expected });
            }
        }
    }
    // grouping: every vertex below the top groups exactly once, at its level
    for v in 0..n {
        let (_, i) = g.layer[v];
        let (want1, want3) = if i == 0 {
            (g.k, 0)
        } else if i >= g.ell {
            (0, 0)
        } else if !g.leftover[v] {
            (g.k, 0)
        } else if i + 2 < g.ell {
            (0, g.k)
        } else {
            (0, 0)
        };
        if up1[v].len() != want1 || up3[v].len() != want3 {
            out.push(GadgetViolation::Ungrouped { vertex: v });
        }
    }
    // blocks: lower vertices sharing an upper neighborhood
    let mut blocks: BTreeMap<(Side, usize, Vec<VertexId>), Vec<VertexId>> = BTreeMap::new();
    for v in 0..n {
        let ups: Vec<VertexId> = up1[v].iter().chain(&up3[v]).copied().collect::<BTreeSet<_>>().into_iter().collect();
        if ups.is_empty() {
            continue;
        }
        let (side, i) = g.layer[v];
        let level = if up3[v].is_empty() { i } else { i + 2 };
        blocks.entry((side, level, ups)).or_default().push(v);
    }
    for ((side, level, ups), lower) in blocks {
        let want_lower = if level == 0 { 1 } else { g.kprime };
        let complete = ups.len() == g.k
            && lower.len() == want_lower
            && ups.iter().all(|&u| {
                let mut d = down[u].clone();
                d.sort_unstable();
                d == lower
            });
        if !complete {
            out.push(GadgetViolation::IncompleteBlock { side, level, lower });
        }
    }
    for side in [Side::U, Side::V] {
        for i in 1..=g.ell {
            let members: Vec<VertexId> = (0..n).filter(|&v| g.layer[v] == (side, i)).collect();
            if members.len() != sizes.n[i - 1] {
                out.push(GadgetViolation::LayerCount { side, layer: i, expected: sizes.n[i - 1], found: members.len() });
            }
            let found = members.iter().filter(|&&v| g.leftover[v]).count();
            let expected = if i < g.ell { sizes.l[i - 1] } else { 0 };
            if found != expected {
                out.push(GadgetViolation::LeftoverCount { side, layer: i, expected, found });
            }
        }
    }
    GadgetReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layer_sizes_example() {
        let s = layer_sizes(5, 1, 5).unwrap();
        assert_eq!((s.k, s.kprime), (3, 2));
        assert_eq!(s.n, vec![3, 3, 3, 6, 9]);
        assert_eq!(s.l, vec![1, 1, 0, 1]);
        assert_eq!(layer_sizes(5, 1, 1).unwrap().n, vec![3]);
    }

    #[test]
    fn layer_sizes_rejects_bad_parameters() {
        for (d, c, l) in [(5, 2, 3), (5, 0, 3), (6, 4, 3), (5, 1, 0)] {
            assert!(layer_sizes(d, c, l).is_err(), "{d} {c} {l}");
        }
    }

    #[test]
    fn growth_ratio_approaches_k_over_kprime() {
        let s = layer_sizes(17, 1, 120).unwrap();
        for i in 80..119 {
            let ratio = s.n[i + 1] as f64 / s.n[i] as f64;
            assert!((ratio / (9.0 / 8.0) - 1.0).abs() < 0.05, "i = {i}: {ratio}");
        }
    }

    proptest! {
        #[test]
        fn grouping_conserves_vertices(delta in 3usize..40, c in 1usize..14, ell in 1usize..40) {
            prop_assume!((delta + c) % 2 == 0 && 3 * c <= delta);
            let s = match layer_sizes(delta, c, ell) {
                Err(LowerBoundError::TooLarge(_)) => return Ok(()),
                other => other.unwrap(),
            };
            prop_assert_eq!(s.n[0], s.k);
            for i in 1..ell {
                let promoted = if i >= 3 { s.l[i - 3] } else { 0 };
                prop_assert_eq!(s.kprime * (s.n[i] / s.k) + s.l[i - 1], s.n[i - 1] + promoted);
                prop_assert_eq!(s.n[i] % s.k, 0);
            }
        }
    }

    #[test]
    fn built_gadgets_pass() {
        for delta in [5, 7, 9, 17] {
            for c in [1, 2] {
                if (delta + c) % 2 == 1 || 3 * c > delta {
                    continue;
                }
                for ell in 1..=12 {
                    let g = build_gstar(delta, c, ell, ell as u64).unwrap();
                    let rep = verify_gstar(&g);
                    assert!(rep.passes(), "Δ={delta} c={c} ℓ={ell}: {:?}", &rep.violations[..rep.violations.len().min(3)]);
                    let sizes = layer_sizes(delta, c, ell).unwrap();
                    assert_eq!(g.graph.n(), 2 * sizes.total() + 2);
                    assert!(g.graph.max_degree() <= delta);
                }
            }
        }
    }

    #[test]
    fn edges_span_one_or_three_layers() {
        let g = build_gstar(5, 1, 10, 0).unwrap();
        let mut spans = BTreeSet::new();
        for e in 0..g.graph.m() {
            let (a, b) = g.graph.endpoints(e);
            spans.insert(g.layer[a].1.abs_diff(g.layer[b].1));
        }
        assert_eq!(spans, BTreeSet::from([0, 1, 3]));
    }

    #[test]
    fn tampering_is_named() {
        let g = build_gstar(5, 1, 3, 1).unwrap();
        let mut bad = g.clone();
        bad.coloring.colors[bad.e0] = Some(1);
        let rep = verify_gstar(&bad);
        assert!(rep.violations.contains(&GadgetViolation::E0Colored { edge: 0 }));
        assert!(rep.violations.iter().any(|v| v.to_string().starts_with("e0 must be uncolored")));

        let mut bad = g.clone();
        let e = 5;
        let c = bad.coloring.colors[e].unwrap();
        let swapped = if bad.half(c) == 0 { c + 3 } else { c - 3 };
        bad.coloring.colors[e] = Some(swapped);
        let rep = verify_gstar(&bad);
        assert!(rep.violations.iter().any(|v| matches!(v, GadgetViolation::WrongPaletteHalf { edge, .. } if *edge == e)));

        let mut bad = g.clone();
        bad.leftover.iter_mut().for_each(|x| *x = false);
        assert!(!verify_gstar(&bad).passes());
    }

    #[test]
    fn json_roundtrip() {
        let g = build_gstar(5, 1, 6, 2).unwrap();
        let doc = g.to_doc();
        let s = serde_json::to_string(&doc).unwrap();
        assert!(s.contains("\"layers\":{\"0\":[\"u\",0]"));
        let back: GadgetDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(back.gadget().unwrap(), g);
    }

    #[test]
    fn seeds_change_colors_not_structure() {
        let a = build_gstar(7, 1, 6, 1).unwrap();
        let b = build_gstar(7, 1, 6, 2).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_ne!(a.coloring, b.coloring);
        assert_eq!(a, build_gstar(7, 1, 6, 1).unwrap());
    }

    #[test]
    fn truncation_keeps_low_layers() {
        let g = build_gstar(5, 1, 8, 0).unwrap();
        let t = g.truncated(3);
        assert!(t.layer.iter().all(|&(_, i)| i <= 3));
        assert_eq!(t.coloring.colors[t.e0], None);
        assert!(!verify_gstar(&t).passes());
    }
}
