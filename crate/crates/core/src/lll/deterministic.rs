use super::probability::exact_with;
use super::{LLLInstance, LllError, PartialAssignment, VarId};
use crate::graph_core::VertexId;
use crate::tree_decomp::Decomposition;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeSet, HashMap, HashSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetOptions {
    /// Run even when `p·(ed)^parts ≥ 1` and return whatever the greedy fixing reaches.
    pub best_effort: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetOutcome {
    pub assignment: Vec<u32>,
    /// Events that still occur; empty whenever the criterion held.
    pub occurring: Vec<VertexId>,
    /// `p·(ed)^parts`.
    pub criterion: f64,
    pub potential_start: f64,
    pub potential_end: f64,
    pub fixed: usize,
    pub groups: usize,
}

/// Fixes every variable by conditional expectations, one part of `decomp` (a
/// decomposition of `T^{2r}`) at a time.
pub fn deterministic_lll_via_decomposition(
    inst: &LLLInstance,
    decomp: &Decomposition,
    opts: DetOptions,
) -> Result<DetOutcome, LllError> {
    if decomp.labels.len() != inst.n() || decomp.labels.iter().any(|&l| l >= decomp.kinds.len()) {
        return Err(LllError::InvalidInstance("decomposition does not cover the tree".into()));
    }
    if decomp.k != 2 * inst.r() {
        return Err(LllError::InvalidInstance(format!("decomposition is for T^{}, need T^{}", decomp.k, 2 * inst.r())));
    }
    let mut phi = PartialAssignment::unset(inst.num_vars());
    let vertices: Vec<VertexId> = (0..inst.n()).collect();
    let part = |v: VertexId| decomp.labels[v];
    let stats = fix_by_parts(inst, &mut phi, &vertices, &part, decomp.kinds.len(), inst.p(), opts)?;
    let assignment = phi.to_total().expect("every variable is fixed");
    let occurring = inst.occurring_events(&assignment);
    if !occurring.is_empty() && !opts.best_effort {
        return Err(LllError::EventsRemain { count: occurring.len() });
    }
    Ok(DetOutcome { assignment, occurring, ..stats })
}

/// Runs the part-by-part fixing on the unset variables owned by `vertices`, whose
/// part labels are `part(v)`. Events outside `vertices` must not see any of them.
pub(crate) fn fix_by_parts(
    inst: &LLLInstance,
    phi: &mut PartialAssignment,
    vertices: &[VertexId],
    part: &(dyn Fn(VertexId) -> usize + Sync),
    parts: usize,
    p: f64,
    opts: DetOptions,
) -> Result<DetOutcome, LllError> {
    let ed = inst.ed();
    let criterion = p * ed.powi(parts as i32);
    if criterion >= 1.0 && !opts.best_effort {
        return Err(LllError::CriterionViolated { p, ed, exponent: parts, value: criterion });
    }
    let owners_unset = |phi: &PartialAssignment, v: VertexId| -> BTreeSet<usize> {
        inst.scope(v).iter().filter(|&&y| phi.get(y).is_none()).map(|&y| part(inst.owner(y))).collect()
    };
    let potential = |phi: &PartialAssignment| -> Result<f64, LllError> {
        vertices
            .iter()
            .map(|&v| Ok(exact_with(inst, v, |x| phi.get(x))? * ed.powi(owners_unset(phi, v).len() as i32)))
            .sum()
    };
    let potential_start = potential(phi)?;
    let (mut fixed, mut groups) = (0, 0);
    for j in 0..parts {
        let members: Vec<VertexId> = vertices
            .iter()
            .copied()
            .filter(|&v| part(v) == j && inst.vertex_vars(v).any(|x| phi.get(x).is_none()))
            .collect();
        let comps = near_groups(inst, &members);
        groups += comps.len();
        let frozen: &PartialAssignment = phi;
        let results: Vec<Result<Vec<(VarId, u32)>, LllError>> =
            comps.par_iter().map(|c| fix_group(inst, frozen, c, part, j, ed)).collect();
        for r in results {
            for (x, a) in r? {
                phi.values[x] = Some(a);
                fixed += 1;
            }
        }
    }
    let potential_end = potential(phi)?;
    Ok(DetOutcome { assignment: Vec::new(), occurring: Vec::new(), criterion, potential_start, potential_end, fixed, groups })
}

// groups of members linked by T-distance ≤ r; different groups share no event
fn near_groups(inst: &LLLInstance, members: &[VertexId]) -> Vec<Vec<VertexId>> {
    let set: HashSet<VertexId> = members.iter().copied().collect();
    let mut seen: HashSet<VertexId> = HashSet::new();
    let mut out = Vec::new();
    for &s in members {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for (w, _) in inst.tree().ball(v, inst.r()) {
                if set.contains(&w) && seen.insert(w) {
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn fix_group(
    inst: &LLLInstance,
    phi: &PartialAssignment,
    group: &[VertexId],
    part: &(dyn Fn(VertexId) -> usize + Sync),
    current: usize,
    ed: f64,
) -> Result<Vec<(VarId, u32)>, LllError> {
    let mut overlay: HashMap<VarId, u32> = HashMap::new();
    // weight (ed)^c with c the later parts still owning unset scope variables
    let mut weight: HashMap<VertexId, f64> = HashMap::new();
    let r2 = inst.r() / 2;
    let mut out = Vec::new();
    for &u in group {
        let events: Vec<VertexId> = inst.tree().ball(u, r2).into_iter().map(|(w, _)| w).collect();
        for &w in &events {
            weight.entry(w).or_insert_with(|| {
                let later: BTreeSet<usize> = inst
                    .scope(w)
                    .iter()
                    .filter(|&&y| phi.get(y).is_none())
                    .map(|&y| part(inst.owner(y)))
                    .filter(|&q| q > current)
                    .collect();
                ed.powi(later.len() as i32)
            });
        }
        for x in inst.vertex_vars(u) {
            if phi.get(x).is_some() {
                continue;
            }
            let local = |overlay: &HashMap<VarId, u32>| -> Result<f64, LllError> {
                events
                    .iter()
                    .map(|&w| Ok(exact_with(inst, w, |y| phi.get(y).or_else(|| overlay.get(&y).copied()))? * weight[&w]))
                    .sum()
            };
            let before = local(&overlay)?;
            let mut best: Option<(f64, u32)> = None;
            for a in 0..inst.var(x).domain {
                if inst.var(x).mass(a) == 0.0 {
                    continue;
                }
                overlay.insert(x, a);
                let val = local(&overlay)?;
                if best.map_or(true, |(b, _)| val < b) {
                    best = Some((val, a));
                }
            }
            let (after, a) = best.expect("a distribution has support");
            if after > before * (1.0 + 1e-9) + 1e-300 {
                return Err(LllError::PotentialIncreased { before, after });
            }
            overlay.insert(x, a);
            out.push((x, a));
        }
    }
    Ok(out)
}
