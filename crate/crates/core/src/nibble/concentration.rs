use super::oneshot::one_shot_coloring;
use super::pipeline::{default_eta, default_xi};
use super::schedule::compute_schedule;
use super::state::{bits, ColoringState};
use super::NibbleError;
use crate::graph_core::random_regular_graph;
use crate::rng::derive;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// `ε` used to pick the default `ξ` and `η` of the experiment.
pub const CONCENTRATION_EPS: f64 = 0.5;

/// Empirical one-round statistics on fresh random regular graphs against the first row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationStats {
    pub max_degree: usize,
    pub n: usize,
    pub trials: usize,
    pub p: f64,
    pub d_diamond: f64,
    pub t_diamond: f64,
    pub p_diamond: f64,
    /// Mean live degree after the round.
    pub mean_s: f64,
    /// Mean of `|N_c(v)|` over pairs `(v, c)` where it is nonzero.
    pub mean_nc: f64,
    /// Mean palette size over edges left uncolored.
    pub mean_psi: f64,
    /// Fraction of vertices whose live degree exceeds `1.2 d◇`.
    pub tail_s: f64,
}

#[derive(Default)]
struct Acc {
    s: f64,
    vertices: f64,
    nc: f64,
    pairs: f64,
    psi: f64,
    edges: f64,
    tail: f64,
}

/// One round of one-shot coloring per trial, each on its own Δ-regular graph.
pub fn concentration_experiment(max_degree: usize, n: usize, trials: usize, seed: u64) -> Result<ConcentrationStats, NibbleError> {
    if max_degree < 8 {
        return Err(NibbleError::InvalidParameter(format!("Δ = {max_degree} < 8")));
    }
    let eta = default_eta(max_degree);
    let xi = (max_degree as f64 * default_xi(CONCENTRATION_EPS, eta)).ceil() / max_degree as f64;
    let sched = compute_schedule(max_degree, CONCENTRATION_EPS, xi, eta)?;
    let row = sched.rows[0];
    let limit = 1.2 * row.d_diamond;
    let accs: Vec<Acc> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let g = random_regular_graph(n, max_degree, derive(seed, &[0, trial as u64]))?;
            let state = ColoringState::new(Arc::new(g), sched.phase_one_palette() as u32);
            let out = one_shot_coloring(&state, derive(seed, &[1, trial as u64]));
            let next = &out.next;
            let mut a = Acc::default();
            for v in 0..next.graph().n() {
                let s = next.live_edges(v).count();
                a.s += s as f64;
                a.vertices += 1.0;
                if s as f64 > limit {
                    a.tail += 1.0;
                }
                for &k in next.color_degrees(v).iter().skip(1) {
                    if k > 0 {
                        a.nc += k as f64;
                        a.pairs += 1.0;
                    }
                }
            }
            for e in 0..next.graph().m() {
                if next.is_live(e) {
                    a.psi += bits::count(next.palette(e)) as f64;
                    a.edges += 1.0;
                }
            }
            Ok(a)
        })
        .collect::<Result<_, crate::graph_core::GraphError>>()
        .map_err(|e| NibbleError::InvalidParameter(e.to_string()))?;
    let sum = |f: fn(&Acc) -> f64| accs.iter().map(f).sum::<f64>();
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    Ok(ConcentrationStats {
        max_degree,
        n,
        trials,
        p: row.p,
        d_diamond: row.d_diamond,
        t_diamond: row.t_diamond,
        p_diamond: row.p_diamond,
        mean_s: ratio(sum(|a| a.s), sum(|a| a.vertices)),
        mean_nc: ratio(sum(|a| a.nc), sum(|a| a.pairs)),
        mean_psi: ratio(sum(|a| a.psi), sum(|a| a.edges)),
        tail_s: ratio(sum(|a| a.tail), sum(|a| a.vertices)),
    })
}
