use super::ops::{compress_path, rake, remove_all, OpKind};
use super::ruling::{ruling_set_on_path, RulingSet};
use super::{check_forest, DecompError, DecompParams, Decomposition, DecompositionRun, PartKind};
use crate::constants::{ELL_FACTOR, TWO_PART_C};
use crate::graph_core::{connected_components, Graph, VertexId};
use rayon::prelude::*;

pub(crate) fn ceil_log2(s: usize) -> usize {
    (usize::BITS - (s.max(1) - 1).leading_zeros()) as usize
}

/// Diameter bound, in `T`, of every component of either part.
pub fn two_part_bound(k: usize, d: usize, s: usize) -> usize {
    TWO_PART_C * (k * ceil_log2(s) + d + 1)
}

// the vertices of a removed path in order, starting from an end
fn order_path(g: &Graph, comp: &[VertexId], inside: impl Fn(VertexId) -> bool) -> Vec<VertexId> {
    let inner = |v: VertexId| g.neighbors(v).iter().filter(|&&(w, _)| inside(w)).count();
    let start = comp.iter().copied().find(|&v| inner(v) <= 1).expect("paths have ends");
    let mut out = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(&(w, _)) = g.neighbors(cur).iter().find(|&&(w, _)| w != prev && inside(w)) {
        out.push(w);
        prev = cur;
        cur = w;
    }
    debug_assert_eq!(out.len(), comp.len());
    out
}

/// Two-label decomposition: Rakes and long-path Compresses remove the tree, then labels
/// are assigned from the last operation back to the first. Same-label components end up
/// more than `k` apart, so the parts have the same components in `T` and in `T^k`.
pub fn decompose_two_part(g: &Graph, ids: &[u64], params: &DecompParams) -> Result<DecompositionRun, DecompError> {
    let DecompParams { k, d, s } = *params;
    if k == 0 {
        return Err(DecompError::InvalidParameter("k must be positive".into()));
    }
    check_forest(g, ids)?;
    let ell = ELL_FACTOR * k;
    let head = 3 * d + 1;
    let trace = remove_all(g, usize::MAX, |i, alive| {
        if i >= head && (i - head) % ell == 0 {
            (OpKind::CompressPath, compress_path(g, alive, ell))
        } else {
            (OpKind::Rake, rake(g, alive))
        }
    });
    let idx: Vec<usize> = trace.removal_index(g.n()).into_iter().map(|i| i.expect("all removed")).collect();
    let mut rounds: usize = trace.ops.iter().map(|(kind, _)| if *kind == OpKind::Rake { 1 } else { ell }).sum();

    // removed paths in order, with their ruling sets; these run in parallel up front
    let paths: Vec<Vec<Vec<VertexId>>> = trace
        .ops
        .iter()
        .enumerate()
        .map(|(i, (kind, removed))| {
            if *kind != OpKind::CompressPath {
                return Vec::new();
            }
            let mut inside = vec![false; g.n()];
            for &v in removed {
                inside[v] = true;
            }
            connected_components(g, &inside)
                .into_iter()
                .map(|c| order_path(g, &c, |w| idx[w] == i))
                .collect()
        })
        .collect();
    let ruling: Vec<Vec<RulingSet>> = paths
        .par_iter()
        .map(|ps| {
            ps.iter()
                .map(|p| ruling_set_on_path(&p.iter().map(|&v| ids[v]).collect::<Vec<_>>(), k))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ruling_rounds = ruling.iter().flatten().map(|r| r.rounds).max().unwrap_or(0);
    rounds += ruling_rounds;

    // labels 1 and 2, 0 while unset
    let mut label = vec![0u8; g.n()];
    for i in (0..trace.ops.len()).rev() {
        let (kind, removed) = &trace.ops[i];
        match kind {
            OpKind::Rake => {
                for &v in removed {
                    let later = g.neighbors(v).iter().find(|&&(w, _)| idx[w] > i);
                    label[v] = later.map_or(1, |&(w, _)| label[w]);
                }
                rounds += 1;
            }
            _ => {
                for (p, members) in paths[i].iter().zip(&ruling[i]) {
                    label_path(g, p, &members.members, k, i, &idx, &mut label);
                }
                rounds += 7 * k;
            }
        }
    }
    let bound = two_part_bound(k, d, s);
    Ok(DecompositionRun {
        decomposition: Decomposition {
            k,
            labels: label.iter().map(|&c| c as usize - 1).collect(),
            kinds: vec![PartKind::Diam { bound }; 2],
        },
        trace,
        rounds,
    })
}

fn label_path(g: &Graph, p: &[VertexId], members: &[usize], k: usize, i: usize, idx: &[usize], label: &mut [u8]) {
    for &v in p {
        label[v] = 2;
    }
    for &m in members {
        for &v in &p[m..m + k] {
            label[v] = 1;
        }
    }
    // an end adjacent to a later vertex must match it: flip the run at that end
    for from_right in [false, true] {
        let at = |j: usize| if from_right { p.len() - 1 - j } else { j };
        let end = p[at(0)];
        let Some(&(u, _)) = g.neighbors(end).iter().find(|&&(w, _)| idx[w] > i) else {
            continue;
        };
        let c = label[end];
        if c == label[u] {
            continue;
        }
        let mut j = 0;
        while j < p.len() && label[p[at(j)]] == c {
            label[p[at(j)]] = 3 - c;
            j += 1;
        }
    }
}
