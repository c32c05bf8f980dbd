use super::contagion::{ball_components, find_small_stable_set, tau_for, ComponentReport, ContagionTrace};
use super::deterministic::{fix_by_parts, DetOptions};
use super::probability::exact_with;
use super::{LLLInstance, LllError, PartialAssignment};
use crate::constants::SMALL_C;
use crate::graph_core::{connected_components, greedy_distance_dominating_set, VertexId};
use crate::rng::derive;
use crate::tree_decomp::{decompose_two_part, DecompParams};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;

/// How the initially infected vertices are found.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum InfectionMode {
    /// Exhaustive over resample sets where that is cheap, single vertices elsewhere.
    #[default]
    Exact,
    /// Always single-vertex resample sets.
    Surrogate,
}

/// Largest even `μ ≥ 4` with `λ ≥ 2(μ^r + 8r)`.
pub fn mu_for(lambda: usize, r: usize) -> Option<usize> {
    let fits = |mu: usize| {
        (mu as u128)
            .checked_pow(r as u32)
            .map_or(false, |x| 2 * (x + 8 * r as u128) <= lambda as u128)
    };
    if !fits(4) {
        return None;
    }
    let mut mu = 4;
    while fits(mu + 2) {
        mu += 2;
    }
    Some(mu)
}

fn guaranteed(inst: &LLLInstance, lambda: usize) -> bool {
    let r = inst.r() as u32;
    let floor = 2 * (4u128.saturating_pow(r) + 8 * r as u128);
    inst.p() * inst.ed().powi(lambda as i32) < 1.0 && lambda as u128 >= floor
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShatterOutcome {
    pub assignment: PartialAssignment,
    /// Components of the vertices whose event scope has an unset variable.
    pub components: Vec<Vec<VertexId>>,
    pub infected0: Vec<VertexId>,
    pub stable_set: Vec<VertexId>,
    pub trace: ContagionTrace,
    pub lambda: usize,
    pub mu: usize,
    pub tau: usize,
    /// The criterion for the guaranteed path failed; μ fell back to 4.
    pub best_effort: bool,
}

// ln Pr[E(v) | resample the variables within r/2 of `set`] ≥ log_threshold
// (logs because (ed)^(-λ/2) underflows for large λ)
fn too_close(
    inst: &LLLInstance,
    v: VertexId,
    sample: &[u32],
    set: &[VertexId],
    log_threshold: f64,
) -> Result<bool, LllError> {
    let r2 = inst.r() / 2;
    let near: HashSet<VertexId> = set.iter().flat_map(|&u| inst.tree().ball(u, r2)).map(|(w, _)| w).collect();
    let q = exact_with(inst, v, |x| if near.contains(&inst.owner(x)) { None } else { Some(sample[x]) })?;
    Ok(q > 0.0 && q.ln() >= log_threshold)
}

fn infected(
    inst: &LLLInstance,
    v: VertexId,
    sample: &[u32],
    mu: usize,
    threshold: f64,
    mode: InfectionMode,
) -> Result<bool, LllError> {
    if inst.occurs(v, sample) {
        return Ok(true);
    }
    let ball: Vec<VertexId> = inst.tree().ball(v, inst.r()).into_iter().map(|(w, _)| w).collect();
    let max_set = (mu as u128).saturating_pow(inst.r() as u32);
    if mode == InfectionMode::Exact && ball.len() <= 12 && max_set <= 4 {
        // every nonempty subset of the ball with at most μ^r vertices
        for mask in 1u32..1 << ball.len() {
            if mask.count_ones() as u128 <= max_set {
                let set: Vec<VertexId> = (0..ball.len()).filter(|&i| mask >> i & 1 == 1).map(|i| ball[i]).collect();
                if too_close(inst, v, sample, &set, threshold)? {
                    return Ok(true);
                }
            }
        }
        return Ok(false);
    }
    for &u in &ball {
        if too_close(inst, v, sample, &[u], threshold)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Samples everything, finds a small stable superset `S` of the infected vertices, and
/// unsets `vbl(S)`.
pub fn shatter_good_partial(
    inst: &LLLInstance,
    lambda: usize,
    seed: u64,
    mode: InfectionMode,
) -> Result<ShatterOutcome, LllError> {
    if lambda < 2 {
        return Err(LllError::LambdaTooSmall(lambda));
    }
    let n = inst.n();
    let best_effort = !guaranteed(inst, lambda);
    let mu = mu_for(lambda, inst.r()).unwrap_or(4);
    let threshold = -(lambda as f64) / 2.0 * inst.ed().ln();
    let sample = inst.sample_all(seed);
    let flags: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|v| infected(inst, v, &sample, mu, threshold, mode))
        .collect::<Result<_, _>>()?;
    let tau = tau_for(n, mu);
    let (stable_set, trace) = find_small_stable_set(inst.tree(), &flags, inst.r(), mu, tau);
    let mut assignment = PartialAssignment::from_total(&sample);
    for &s in &stable_set {
        for &x in inst.scope(s) {
            assignment.values[x] = None;
        }
    }
    let open: Vec<bool> = (0..n).map(|v| inst.scope(v).iter().any(|&x| assignment.get(x).is_none())).collect();
    Ok(ShatterOutcome {
        components: connected_components(inst.tree(), &open),
        infected0: (0..n).filter(|&v| flags[v]).collect(),
        assignment,
        stable_set,
        trace,
        lambda,
        mu,
        tau,
        best_effort,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodReport {
    /// Fully assigned events that occur.
    pub occurring: Vec<VertexId>,
    pub components: Vec<ComponentReport>,
    /// `SMALL_C · log₂ n`, the dominating-set allowance.
    pub bound: f64,
    pub max_probability: f64,
    pub over_p_prime: Vec<VertexId>,
    /// Events whose probability could not be evaluated exactly.
    pub unevaluated: Vec<VertexId>,
}

impl GoodReport {
    pub fn assigned_events_avoided(&self) -> bool {
        self.occurring.is_empty()
    }

    pub fn components_small(&self) -> bool {
        self.components.iter().all(|c| c.dominating as f64 <= self.bound)
    }

    pub fn probabilities_bounded(&self) -> bool {
        self.over_p_prime.is_empty() && self.unevaluated.is_empty()
    }

    pub fn passes(&self) -> bool {
        self.assigned_events_avoided() && self.components_small() && self.probabilities_bounded()
    }
}

pub fn verify_good_partial(inst: &LLLInstance, phi: &PartialAssignment, p_prime: f64) -> Result<GoodReport, LllError> {
    phi.check(inst)?;
    let n = inst.n();
    let r = inst.r();
    let evals: Vec<(VertexId, bool, Option<f64>)> = (0..n)
        .into_par_iter()
        .map(|v| {
            let total = inst.scope(v).iter().all(|&x| phi.get(x).is_some());
            (v, total, exact_with(inst, v, |x| phi.get(x)).ok())
        })
        .collect();
    let occurring = evals.iter().filter(|&&(_, t, q)| t && q == Some(1.0)).map(|e| e.0).collect();
    let over_p_prime = evals.iter().filter(|e| e.2.map_or(false, |q| q > p_prime + 1e-12)).map(|e| e.0).collect();
    let unevaluated = evals.iter().filter(|e| e.2.is_none()).map(|e| e.0).collect();
    let max_probability = evals.iter().filter_map(|e| e.2).fold(0.0, f64::max);
    let open: Vec<bool> = evals.iter().map(|e| !e.1).collect();
    let components = connected_components(inst.tree(), &open)
        .par_iter()
        .map(|c| ComponentReport {
            size: c.len(),
            dominating: greedy_distance_dominating_set(inst.tree(), c, 2 * r, None).expect("connected").len(),
        })
        .collect();
    Ok(GoodReport {
        occurring,
        components,
        bound: SMALL_C * (n.max(2) as f64).log2(),
        max_probability,
        over_p_prime,
        unevaluated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub assignment: Vec<u32>,
    pub retries: usize,
    pub lambda: usize,
    pub mu: usize,
    pub best_effort: bool,
    pub components: usize,
    pub largest_component: usize,
}

/// Largest `λ` with `p·(ed)^λ < 1`, at least 2 and capped for sanity.
fn lambda_for(inst: &LLLInstance) -> usize {
    const CAP: usize = 1 << 16;
    let (p, ed) = (inst.p(), inst.ed());
    if p <= 0.0 || ed <= 1.0 {
        return CAP;
    }
    let mut lambda = ((-p.ln()) / ed.ln()).floor() as usize;
    while lambda > 0 && p * ed.powi(lambda as i32) >= 1.0 {
        lambda -= 1;
    }
    lambda.clamp(2, CAP)
}

/// Shatter, then solve every component deterministically on a two-part decomposition
/// of its `T^{2r}`; the whole pipeline restarts from a fresh seed when the final exact
/// check finds an occurring event.
pub fn solve_tree_lll(inst: &LLLInstance, seed: u64, max_retries: usize) -> Result<SolveOutcome, LllError> {
    let lambda = lambda_for(inst);
    let r = inst.r();
    let mut diagnostics = Vec::new();
    for attempt in 0..=max_retries {
        let sh = shatter_good_partial(inst, lambda, derive(seed, &[attempt as u64]), InfectionMode::Exact)?;
        let mut phi = sh.assignment.clone();
        let mut part = vec![usize::MAX; inst.n()];
        let opts = DetOptions { best_effort: sh.best_effort };
        let mut failure = None;
        for comp in &sh.components {
            let keep = {
                let mut k = vec![false; inst.n()];
                for &v in comp {
                    k[v] = true;
                }
                k
            };
            let (sub, old) = inst.tree().induced(&keep);
            let dom = greedy_distance_dominating_set(inst.tree(), comp, 2 * r, None)?.len();
            let ids: Vec<u64> = old.iter().map(|&v| v as u64).collect();
            let run = decompose_two_part(&sub, &ids, &DecompParams { k: 2 * r, d: 2 * r, s: dom.max(1) })?;
            for (i, &v) in old.iter().enumerate() {
                part[v] = run.decomposition.labels[i];
            }
            let p_prime = comp
                .iter()
                .map(|&v| exact_with(inst, v, |x| phi.get(x)))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let lookup = |v: VertexId| part[v];
            match fix_by_parts(inst, &mut phi, comp, &lookup, run.decomposition.kinds.len(), p_prime, opts) {
                Ok(_) => {}
                Err(e) => {
                    failure = Some(format!("component of {} vertices: {e}", comp.len()));
                    break;
                }
            }
        }
        let largest = sh.components.iter().map(Vec::len).max().unwrap_or(0);
        if let Some(f) = failure {
            diagnostics.push(format!("attempt {attempt}: {f}"));
            continue;
        }
        let assignment = phi.to_total().expect("components cover every unset variable");
        let bad = inst.occurring_events(&assignment);
        if bad.is_empty() {
            return Ok(SolveOutcome {
                assignment,
                retries: attempt,
                lambda,
                mu: sh.mu,
                best_effort: sh.best_effort,
                components: sh.components.len(),
                largest_component: largest,
            });
        }
        diagnostics.push(format!(
            "attempt {attempt}: {} events occur after {} components (largest {largest})",
            bad.len(),
            sh.components.len()
        ));
    }
    Err(LllError::RetriesExhausted { attempts: max_retries + 1, diagnostics })
}

/// Components of `∪_{v∈S} N^r(v)` for a shatter outcome, with dominating-set sizes.
pub fn shatter_components(inst: &LLLInstance, out: &ShatterOutcome) -> Vec<ComponentReport> {
    ball_components(inst.tree(), &out.stable_set, inst.r()).1
}
