use super::schedule::pow_keep;
use super::state::{bits, ColoringState};
use crate::graph_core::{Color, EdgeId};
use crate::rng::{derive, rng_from};
use rand::Rng;
use rayon::prelude::*;

/// Choice of an imaginary edge: a real color or a synthetic slot (`None`), and whether
/// its far endpoint saw no competing pick of the same color.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImaginaryPick {
    pub color: Option<Color>,
    pub far_free: bool,
}

/// One color pick per live real edge (`None` for colored edges and empty palettes) and
/// per imaginary edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub real: Vec<Option<Color>>,
    pub imaginary: Vec<Vec<ImaginaryPick>>,
}

#[derive(Debug, Clone)]
pub struct OneShotOutcome {
    pub committed: Vec<(EdgeId, Color)>,
    pub imaginary_commits: usize,
    /// Committed colors applied, live palettes pruned, imaginary edges dropped.
    pub next: ColoringState,
}

const REAL: u64 = 0;
const IMAG: u64 = 1;

pub(crate) fn pick_real(state: &ColoringState, e: EdgeId, seed: u64, epoch: u64) -> Option<Color> {
    if !state.is_live(e) {
        return None;
    }
    let pal = state.palette(e);
    let k = bits::count(pal);
    if k == 0 {
        return None;
    }
    let mut r = rng_from(derive(seed, &[REAL, e as u64, epoch]));
    Some(bits::nth(pal, r.gen_range(0..k)))
}

pub(crate) fn pick_imaginary(state: &ColoringState, v: usize, j: usize, seed: u64, epoch: u64) -> ImaginaryPick {
    let im = &state.imaginary(v)[j];
    let (t, p) = state.uniform().expect("imaginary edges exist only after padding");
    let mut r = rng_from(derive(seed, &[IMAG, v as u64, j as u64, epoch]));
    let slot = r.gen_range(0..p);
    let keep = pow_keep(p as f64, t.saturating_sub(1) as f64);
    ImaginaryPick {
        color: im.colors.get(slot).copied(),
        far_free: r.gen_bool(keep.clamp(0.0, 1.0)),
    }
}

/// Draws every pick from the entity's own stream; `edge_epoch[e]` and `vertex_epoch[v]`
/// select fresh streams for resampled entities.
pub fn sample_selection(state: &ColoringState, seed: u64, edge_epoch: &[u64], vertex_epoch: &[u64]) -> Selection {
    let g = state.graph();
    let real = (0..g.m())
        .into_par_iter()
        .map(|e| pick_real(state, e, seed, edge_epoch[e]))
        .collect();
    let imaginary = (0..g.n())
        .into_par_iter()
        .map(|v| {
            (0..state.imaginary(v).len())
                .map(|j| pick_imaginary(state, v, j, seed, vertex_epoch[v]))
                .collect()
        })
        .collect();
    Selection { real, imaginary }
}

/// Commits and prunes for a fixed selection.
pub fn resolve(state: &ColoringState, sel: &Selection) -> OneShotOutcome {
    let g = state.graph();
    let cn = state.num_colors() as usize + 1;
    // number of edges at v that picked each color
    let counts: Vec<Vec<u32>> = (0..g.n())
        .into_par_iter()
        .map(|v| {
            let mut cnt = vec![0u32; cn];
            for (_, e) in state.live_edges(v) {
                if let Some(c) = sel.real[e] {
                    cnt[c as usize] += 1;
                }
            }
            for pk in &sel.imaginary[v] {
                if let Some(c) = pk.color {
                    cnt[c as usize] += 1;
                }
            }
            cnt
        })
        .collect();
    let committed: Vec<(EdgeId, Color)> = (0..g.m())
        .into_par_iter()
        .filter_map(|e| {
            let c = sel.real[e]?;
            let (u, v) = g.endpoints(e);
            (counts[u][c as usize] == 1 && counts[v][c as usize] == 1).then_some((e, c))
        })
        .collect();
    let words = state.words;
    let mut used = vec![0u64; g.n() * words];
    let mut imaginary_commits = 0;
    for &(e, c) in &committed {
        let (u, v) = g.endpoints(e);
        bits::insert(&mut used[u * words..(u + 1) * words], c);
        bits::insert(&mut used[v * words..(v + 1) * words], c);
    }
    for v in 0..g.n() {
        for pk in &sel.imaginary[v] {
            if let Some(c) = pk.color {
                if pk.far_free && counts[v][c as usize] == 1 {
                    bits::insert(&mut used[v * words..(v + 1) * words], c);
                    imaginary_commits += 1;
                }
            }
        }
    }
    let mut next = state.clone();
    for &(e, c) in &committed {
        next.colors[e] = Some(c);
    }
    next.palettes.par_chunks_mut(words).enumerate().for_each(|(e, pal)| {
        if next.colors[e].is_some() {
            return;
        }
        let (u, v) = g.endpoints(e);
        for (k, w) in pal.iter_mut().enumerate() {
            *w &= !(used[u * words + k] | used[v * words + k]);
        }
    });
    next.imaginary.iter_mut().for_each(Vec::clear);
    next.uniform = None;
    OneShotOutcome {
        committed,
        imaginary_commits,
        next,
    }
}

/// One round on a padded (or otherwise prepared) state.
pub fn one_shot_coloring(state: &ColoringState, seed: u64) -> OneShotOutcome {
    let g = state.graph();
    let sel = sample_selection(state, seed, &vec![0; g.m()], &vec![0; g.n()]);
    resolve(state, &sel)
}
