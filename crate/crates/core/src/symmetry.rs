//! Deterministic symmetry breaking in the LOCAL model: Linial color reduction,
//! one-class-per-round reduction to Δ+1 colors, and MIS from a coloring.
//!
//! Every routine runs through [`iterate_local`] and reports its round count.

use crate::graph_core::{Graph, VertexId};
use crate::local_runtime::iterate_local;
use thiserror::Error;

pub use crate::constants::LINIAL_BETA;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("initial coloring is not proper: {0} and {1} share a color")]
    NotProper(VertexId, VertexId),
    #[error("input has {got} entries, graph has {n} vertices")]
    Length { got: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringRun {
    pub colors: Vec<u64>,
    /// Colors lie in `[0, palette)`.
    pub palette: u64,
    pub rounds: usize,
}

/// Number of times log2 must be applied to `n` to reach a value ≤ 1.
pub fn log_star(n: u64) -> usize {
    let mut x = n as f64;
    let mut k = 0;
    while x > 1.0 {
        x = x.log2();
        k += 1;
    }
    k
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= q {
        if q % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

fn next_prime(mut q: u64) -> u64 {
    while !is_prime(q) {
        q += 1;
    }
    q
}

fn pow_at_least(q: u64, e: u32, m: u64) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc *= q as u128;
        if acc >= m as u128 {
            return true;
        }
    }
    acc >= m as u128
}

/// Per-round `(q, d)`: colors in `[0, m)` map to polynomials of degree ≤ d over F_q,
/// giving `q^2` new colors. Stops when no choice shrinks the palette.
pub(crate) fn linial_schedule(mut m: u64, delta: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    loop {
        let mut best: Option<(u64, u32)> = None;
        for d in 1..=62u32 {
            let root = ((m as f64).powf(1.0 / (d + 1) as f64) as u64).saturating_sub(2);
            let mut q = next_prime((delta * d as u64 + 1).max(root));
            while !pow_at_least(q, d + 1, m) {
                q = next_prime(q + 1);
            }
            if best.map_or(true, |(bq, _)| q < bq) {
                best = Some((q, d));
            }
            if delta * d as u64 + 1 > best.unwrap().0 {
                break;
            }
        }
        let (q, d) = best.unwrap();
        if q * q >= m {
            return out;
        }
        out.push((q, d));
        m = q * q;
    }
}

fn poly_eval(c: u64, q: u64, d: u32, x: u64) -> u64 {
    let mut digits = Vec::with_capacity(d as usize + 1);
    let mut c = c;
    for _ in 0..=d {
        digits.push(c % q);
        c /= q;
    }
    digits
        .iter()
        .rev()
        .fold(0u64, |acc, &a| ((acc as u128 * x as u128 + a as u128) % q as u128) as u64)
}

fn check_proper(g: &Graph, colors: &[u64]) -> Result<(), SymmetryError> {
    if colors.len() != g.n() {
        return Err(SymmetryError::Length { got: colors.len(), n: g.n() });
    }
    for &(u, v) in g.edges() {
        if colors[u] == colors[v] {
            return Err(SymmetryError::NotProper(u, v));
        }
    }
    Ok(())
}

/// Linial color reduction from a proper coloring with colors in `[0, m)`.
pub fn linial_coloring(g: &Graph, init: &[u64], m: u64, delta: usize) -> Result<ColoringRun, SymmetryError> {
    check_proper(g, init)?;
    let delta = delta.max(g.max_degree()) as u64;
    if delta == 0 {
        return Ok(ColoringRun { colors: vec![0; g.n()], palette: 1, rounds: 0 });
    }
    let sched = linial_schedule(m.max(1), delta);
    let rec = iterate_local(g, init.to_vec(), sched.len(), 0, |ctx| {
        let (q, d) = sched[ctx.round];
        let c = *ctx.state;
        let x = (0..q)
            .find(|&x| {
                let fx = poly_eval(c, q, d, x);
                ctx.neighbors.iter().all(|&(_, _, &o)| poly_eval(o, q, d, x) != fx)
            })
            .expect("q > Δd leaves a free point");
        x * q + poly_eval(c, q, d, x)
    });
    let palette = sched.last().map_or(m, |&(q, _)| q * q);
    Ok(ColoringRun { colors: rec.outputs, palette, rounds: rec.rounds_used })
}

/// Removes one color class per round until `target ≥ Δ+1` colors remain.
pub fn reduce_colors(g: &Graph, run: &ColoringRun, target: u64) -> Result<ColoringRun, SymmetryError> {
    check_proper(g, &run.colors)?;
    let delta = g.max_degree() as u64;
    let target = target.max(delta + 1);
    if run.palette <= target {
        return Ok(run.clone());
    }
    let rounds = (run.palette - target) as usize;
    let top = run.palette - 1;
    let rec = iterate_local(g, run.colors.clone(), rounds, 0, |ctx| {
        let c = *ctx.state;
        if c != top - ctx.round as u64 {
            return c;
        }
        (0..target)
            .find(|x| ctx.neighbors.iter().all(|&(_, _, &o)| o != *x))
            .expect("Δ+1 colors leave a free one")
    });
    Ok(ColoringRun { colors: rec.outputs, palette: target, rounds: run.rounds + rounds })
}

/// Linial reduction followed by reduction to Δ+1 colors, starting from ids.
pub fn delta_plus_one_coloring(g: &Graph, ids: &[u64]) -> Result<ColoringRun, SymmetryError> {
    let m = ids.iter().copied().max().map_or(1, |x| x + 1);
    let lin = linial_coloring(g, ids, m, g.max_degree())?;
    reduce_colors(g, &lin, g.max_degree() as u64 + 1)
}

/// Maximal independent set from a proper coloring, one color class per round.
pub fn mis_from_coloring(g: &Graph, run: &ColoringRun) -> Result<(Vec<bool>, usize), SymmetryError> {
    check_proper(g, &run.colors)?;
    let init: Vec<(u64, bool)> = run.colors.iter().map(|&c| (c, false)).collect();
    let rec = iterate_local(g, init, run.palette as usize, 0, |ctx| {
        let (c, inside) = *ctx.state;
        let join = c == ctx.round as u64 && ctx.neighbors.iter().all(|&(_, _, &(_, x))| !x);
        (c, inside || join)
    });
    Ok((rec.outputs.into_iter().map(|(_, b)| b).collect(), run.rounds + run.palette as usize))
}
