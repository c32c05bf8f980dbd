use super::NibbleError;
use crate::graph_core::{Color, EdgeId, Graph, VertexId};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Bitset over colors `1..=C`; color `c` is bit `c-1`.
pub(crate) mod bits {
    use crate::graph_core::Color;

    pub fn words_for(colors: u32) -> usize {
        (colors as usize).div_ceil(64).max(1)
    }

    pub fn count(s: &[u64]) -> usize {
        s.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[cfg(test)]
    pub fn has(s: &[u64], c: Color) -> bool {
        let b = (c - 1) as usize;
        s[b / 64] >> (b % 64) & 1 == 1
    }

    pub fn insert(s: &mut [u64], c: Color) {
        let b = (c - 1) as usize;
        s[b / 64] |= 1 << (b % 64);
    }

    pub fn iter(s: &[u64]) -> impl Iterator<Item = Color> + '_ {
        s.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(i as Color * 64 + b + 1)
            })
        })
    }

    /// The `k`-th smallest color (0-based).
    pub fn nth(s: &[u64], mut k: usize) -> Color {
        for (i, &w) in s.iter().enumerate() {
            let c = w.count_ones() as usize;
            if k < c {
                let mut w = w;
                for _ in 0..k {
                    w &= w - 1;
                }
                return i as Color * 64 + w.trailing_zeros() + 1;
            }
            k -= c;
        }
        panic!("index past the end of the color set")
    }

    /// Keeps only the `keep` smallest colors.
    pub fn truncate(s: &mut [u64], mut keep: usize) {
        for w in s.iter_mut() {
            let c = w.count_ones() as usize;
            if keep >= c {
                keep -= c;
                continue;
            }
            let mut kept = 0u64;
            let mut x = *w;
            for _ in 0..keep {
                let low = x & x.wrapping_neg();
                kept |= low;
                x ^= low;
            }
            *w = kept;
            keep = 0;
        }
    }
}

/// Pendant virtual edge attached to one vertex. Its palette has `colors` plus
/// `synthetic` placeholder slots that no real edge can hold, so its size is uniform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImaginaryEdge {
    pub colors: Vec<Color>,
    pub synthetic: usize,
}

/// Residual graph, palettes and committed colors of the first phase.
#[derive(Debug, Clone)]
pub struct ColoringState {
    pub(crate) graph: Arc<Graph>,
    pub(crate) colors: Vec<Option<Color>>,
    pub(crate) num_colors: u32,
    pub(crate) words: usize,
    pub(crate) palettes: Vec<u64>,
    pub(crate) imaginary: Vec<Vec<ImaginaryEdge>>,
    /// `(t, p)` after padding.
    pub(crate) uniform: Option<(usize, usize)>,
}

impl ColoringState {
    /// Fresh state: nothing colored, every palette is `{1..=num_colors}`.
    pub fn new(graph: Arc<Graph>, num_colors: u32) -> Self {
        let words = bits::words_for(num_colors);
        let mut full = vec![0u64; words];
        for c in 1..=num_colors {
            bits::insert(&mut full, c);
        }
        let m = graph.m();
        let n = graph.n();
        ColoringState {
            graph,
            colors: vec![None; m],
            num_colors,
            words,
            palettes: full.repeat(m),
            imaginary: vec![Vec::new(); n],
            uniform: None,
        }
    }

    /// State with explicit palettes (colors in `1..=num_colors`).
    pub fn with_palettes(graph: Arc<Graph>, num_colors: u32, palettes: &[Vec<Color>]) -> Result<Self, NibbleError> {
        if palettes.len() != graph.m() {
            return Err(NibbleError::InvalidParameter(format!(
                "{} palettes for {} edges",
                palettes.len(),
                graph.m()
            )));
        }
        let mut s = ColoringState::new(graph, num_colors);
        s.palettes.iter_mut().for_each(|w| *w = 0);
        for (e, pal) in palettes.iter().enumerate() {
            for &c in pal {
                if c == 0 || c > num_colors {
                    return Err(NibbleError::InvalidParameter(format!("color {c} outside 1..={num_colors}")));
                }
                bits::insert(s.palette_mut(e), c);
            }
        }
        Ok(s)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn num_colors(&self) -> u32 {
        self.num_colors
    }

    pub fn colors(&self) -> &[Option<Color>] {
        &self.colors
    }

    pub fn palette(&self, e: EdgeId) -> &[u64] {
        &self.palettes[e * self.words..(e + 1) * self.words]
    }

    pub(crate) fn palette_mut(&mut self, e: EdgeId) -> &mut [u64] {
        &mut self.palettes[e * self.words..(e + 1) * self.words]
    }

    pub fn palette_colors(&self, e: EdgeId) -> Vec<Color> {
        bits::iter(self.palette(e)).collect()
    }

    pub fn imaginary(&self, v: VertexId) -> &[ImaginaryEdge] {
        &self.imaginary[v]
    }

    pub fn uniform(&self) -> Option<(usize, usize)> {
        self.uniform
    }

    pub fn is_live(&self, e: EdgeId) -> bool {
        self.colors[e].is_none()
    }

    pub fn live_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        self.graph.neighbors(v).iter().copied().filter(|&(_, e)| self.colors[e].is_none())
    }

    pub fn residual_size(&self) -> usize {
        self.colors.iter().filter(|c| c.is_none()).count()
    }

    /// Per-color count of live real edges at `v` whose palette has the color
    /// (index `c`, index 0 unused).
    pub(crate) fn color_degrees(&self, v: VertexId) -> Vec<u32> {
        let mut cnt = vec![0u32; self.num_colors as usize + 1];
        for (_, e) in self.live_edges(v) {
            for c in bits::iter(self.palette(e)) {
                cnt[c as usize] += 1;
            }
        }
        cnt
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InvariantReport {
    pub deg_cap: usize,
    pub cdeg_cap: usize,
    pub palette_floor: usize,
    pub max_deg: usize,
    pub max_cdeg: usize,
    /// Smallest palette over live edges, `None` with an empty residual.
    pub min_palette: Option<usize>,
    pub deg_violations: Vec<VertexId>,
    pub cdeg_violations: Vec<(VertexId, Color)>,
    pub palette_violations: Vec<EdgeId>,
}

impl InvariantReport {
    pub fn passes(&self) -> bool {
        self.deg_violations.is_empty() && self.cdeg_violations.is_empty() && self.palette_violations.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.deg_violations.len() + self.cdeg_violations.len() + self.palette_violations.len()
    }
}

/// Compares the live real graph against `deg ≤ ⌊d⌋`, `c-deg ≤ ⌊t⌋`, `|Ψ| ≥ ⌈p⌉`.
pub fn check_invariant(state: &ColoringState, d: f64, t: f64, p: f64) -> InvariantReport {
    let row = super::ScheduleRow {
        i: 0,
        d,
        t,
        p,
        d_diamond: 0.0,
        t_diamond: 0.0,
        p_diamond: 0.0,
        beta: 0.0,
        delta: 0.0,
    };
    let (dc, tc, pf) = (row.deg_cap(), row.cdeg_cap(), row.palette_floor());
    let per_vertex: Vec<(usize, u32, Vec<Color>)> = (0..state.graph.n())
        .into_par_iter()
        .map(|v| {
            let deg = state.live_edges(v).count();
            let cnt = state.color_degrees(v);
            let max = cnt.iter().copied().max().unwrap_or(0);
            let bad = (1..cnt.len()).filter(|&c| cnt[c] as usize > tc).map(|c| c as Color).collect();
            (deg, max, bad)
        })
        .collect();
    let mut rep = InvariantReport {
        deg_cap: dc,
        cdeg_cap: tc,
        palette_floor: pf,
        ..Default::default()
    };
    for (v, (deg, max, bad)) in per_vertex.into_iter().enumerate() {
        rep.max_deg = rep.max_deg.max(deg);
        rep.max_cdeg = rep.max_cdeg.max(max as usize);
        if deg > dc {
            rep.deg_violations.push(v);
        }
        rep.cdeg_violations.extend(bad.into_iter().map(|c| (v, c)));
    }
    for e in 0..state.graph.m() {
        if state.is_live(e) {
            let size = bits::count(state.palette(e));
            rep.min_palette = Some(rep.min_palette.map_or(size, |m: usize| m.min(size)));
            if size < pf {
                rep.palette_violations.push(e);
            }
        }
    }
    rep
}

/// Truncates live palettes to exactly `⌈p⌉` colors (highest dropped first) and attaches
/// imaginary edges so that every color present at a vertex has c-degree exactly `⌊t⌋`.
pub fn pad_uniform(state: &ColoringState, t: f64, p: f64) -> Result<ColoringState, NibbleError> {
    let rep = check_invariant(state, f64::INFINITY, t, p);
    if !rep.passes() {
        return Err(NibbleError::Invariant(Box::new(rep)));
    }
    let (tc, pf) = (rep.cdeg_cap, rep.palette_floor);
    let mut out = state.clone();
    for e in 0..out.graph.m() {
        if out.is_live(e) {
            bits::truncate(out.palette_mut(e), pf);
        }
    }
    let imaginary: Vec<Vec<ImaginaryEdge>> = (0..out.graph.n())
        .into_par_iter()
        .map(|v| {
            let cnt = out.color_degrees(v);
            // each color c needs tc - cnt[c] more edges; lay the copies out in a row and
            // deal them round-robin so no edge gets a color twice
            let deficits: Vec<(Color, usize)> = (1..cnt.len())
                .filter(|&c| cnt[c] > 0 && (cnt[c] as usize) < tc)
                .map(|c| (c as Color, tc - cnt[c] as usize))
                .collect();
            let total: usize = deficits.iter().map(|&(_, k)| k).sum();
            if total == 0 {
                return Vec::new();
            }
            let max = deficits.iter().map(|&(_, k)| k).max().unwrap();
            let k = max.max(total.div_ceil(pf));
            let mut edges = vec![Vec::new(); k];
            let mut pos = 0;
            for &(c, need) in &deficits {
                for _ in 0..need {
                    edges[pos % k].push(c);
                    pos += 1;
                }
            }
            edges
                .into_iter()
                .map(|mut colors| {
                    colors.sort_unstable();
                    ImaginaryEdge {
                        synthetic: pf - colors.len(),
                        colors,
                    }
                })
                .collect()
        })
        .collect();
    out.imaginary = imaginary;
    out.uniform = Some((tc, pf));
    Ok(out)
}
