use super::DecompError;
use crate::graph_core::Graph;
use crate::symmetry::{delta_plus_one_coloring, mis_from_coloring};
use std::collections::HashSet;

/// Positions (along the path) of an independent set whose gaps, end segments
/// included, all have between `3k` and `6k` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulingSet {
    pub members: Vec<usize>,
    pub rounds: usize,
}

fn path_graph(len: usize) -> Graph {
    let edges: Vec<_> = (1..len).map(|i| (i - 1, i)).collect();
    Graph::from_edges(len, &edges, None).expect("paths are simple")
}

// MIS of a path whose i-th vertex has id ids[i]; returns positions and rounds
fn path_mis(ids: &[u64]) -> (Vec<usize>, usize) {
    if ids.len() <= 1 {
        return ((0..ids.len()).collect(), 0);
    }
    let g = path_graph(ids.len());
    let run = delta_plus_one_coloring(&g, ids).expect("distinct ids color a path properly");
    let (mis, rounds) = mis_from_coloring(&g, &run).expect("proper coloring");
    ((0..ids.len()).filter(|&i| mis[i]).collect(), rounds)
}

/// New members cutting the gap of `size` vertices starting at `start` into pieces of
/// `beta..=2*beta` vertices. Needs `size ≥ beta`.
fn split(start: usize, size: usize, beta: usize) -> Vec<usize> {
    let q = ((size + 1) / (beta + 1)).max(1);
    let free = size - (q - 1);
    let (base, extra) = (free / q, free % q);
    let mut out = Vec::with_capacity(q - 1);
    let mut pos = start;
    for j in 0..q - 1 {
        pos += base + usize::from(j < extra);
        out.push(pos);
        pos += 1;
    }
    out
}

// sizes of the segments left by `members` on a path of `len` vertices
fn segments(len: usize, members: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(members.len() + 1);
    let mut prev = 0;
    for &m in members {
        out.push(m - prev);
        prev = m + 1;
    }
    out.push(len - prev);
    out
}

pub fn verify_ruling_set(len: usize, members: &[usize], k: usize) -> bool {
    members.windows(2).all(|w| w[1] > w[0] + 1)
        && members.last().map_or(true, |&m| m < len)
        && segments(len, members).iter().all(|&s| (3 * k..=6 * k).contains(&s))
}

/// `(3k+1, 3k)`-ruling set of a path given by its vertex ids in order, by repeated MIS
/// on the path contracted to the current set, growing the gaps each time.
pub fn ruling_set_on_path(ids: &[u64], k: usize) -> Result<RulingSet, DecompError> {
    if k == 0 {
        return Err(DecompError::InvalidParameter("k must be positive".into()));
    }
    let len = ids.len();
    if len < 3 * k {
        return Err(DecompError::PathTooShort { len, min: 3 * k });
    }
    if ids.iter().collect::<HashSet<_>>().len() != len {
        return Err(DecompError::DuplicateIds);
    }
    let (mut members, mut rounds) = path_mis(ids);
    // interior gaps lie in [alpha, 2 alpha]
    let mut alpha = 1;
    while alpha < 3 * k {
        let beta = (2 * alpha + 1).min(3 * k);
        let sub: Vec<u64> = members.iter().map(|&p| ids[p]).collect();
        let (keep, r) = path_mis(&sub);
        // one contracted round spans a gap plus a member
        rounds += r * (2 * alpha + 1);
        let kept: Vec<usize> = keep.into_iter().map(|j| members[j]).collect();
        let mut next = Vec::with_capacity(kept.len() * 2);
        for (j, &m) in kept.iter().enumerate() {
            next.push(m);
            if let Some(&n) = kept.get(j + 1) {
                next.extend(split(m + 1, n - m - 1, beta));
            }
        }
        rounds += 6 * alpha + 2;
        members = next;
        alpha = beta;
    }
    // end segments: merge short ones inward, then cut long ones
    let lo = 3 * k;
    while !members.is_empty() && members[0] < lo {
        members.remove(0);
    }
    while let Some(&last) = members.last() {
        if len - last - 1 >= lo {
            break;
        }
        members.pop();
    }
    let first_cut = split(0, members.first().copied().unwrap_or(len), lo);
    let tail_cut = match members.last() {
        Some(&last) => split(last + 1, len - last - 1, lo),
        None => Vec::new(),
    };
    members = first_cut.into_iter().chain(members).chain(tail_cut).collect();
    rounds += 12 * k;
    debug_assert!(verify_ruling_set(len, &members, k));
    Ok(RulingSet { members, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::RULING_ROUNDS_C;
    use crate::symmetry::log_star;
    use rand::seq::SliceRandom;
    use rand::Rng;

    // does any valid set exist? reach[x]: the first x positions split into whole
    // segments each followed by a member
    fn exists(len: usize, k: usize) -> bool {
        let mut reach = vec![false; len + 1];
        reach[0] = true;
        for x in 0..=len {
            if !reach[x] {
                continue;
            }
            for s in 3 * k..=6 * k {
                if x + s == len {
                    return true;
                }
                if x + s < len {
                    reach[x + s + 1] = true;
                }
            }
        }
        false
    }

    #[test]
    fn split_sizes() {
        for beta in 1..8 {
            for size in beta..60 {
                let cut = split(0, size, beta);
                let segs = segments(size, &cut);
                assert!(segs.iter().all(|&s| (beta..=2 * beta).contains(&s)), "{beta} {size} {segs:?}");
            }
        }
    }

    #[test]
    fn short_example() {
        let k = 1;
        let ids: Vec<u64> = (0..8).collect();
        let r = ruling_set_on_path(&ids, k).unwrap();
        assert!(verify_ruling_set(8, &r.members, k));
        assert!(exists(8, k));
        assert!(matches!(ruling_set_on_path(&[1, 2], 1), Err(DecompError::PathTooShort { .. })));
        assert_eq!(ruling_set_on_path(&[1, 2, 1], 1), Err(DecompError::DuplicateIds));
    }

    #[test]
    fn feasible_lengths_match_brute_force() {
        for k in 1..=3 {
            for len in 3 * k..80 {
                assert!(exists(len, k));
                let ids: Vec<u64> = (0..len as u64).rev().collect();
                let r = ruling_set_on_path(&ids, k).unwrap();
                assert!(verify_ruling_set(len, &r.members, k), "k={k} len={len} {:?}", r.members);
            }
        }
    }

    #[test]
    fn random_lengths_and_ids() {
        let mut r = crate::rng::rng_from(12);
        for _ in 0..1000 {
            let k = r.gen_range(1..=4);
            let len = r.gen_range(3 * k..600);
            let mut ids: Vec<u64> = (0..(4 * len) as u64).collect();
            ids.shuffle(&mut r);
            ids.truncate(len);
            let rs = ruling_set_on_path(&ids, k).unwrap();
            assert!(verify_ruling_set(len, &rs.members, k));
            let bound = RULING_ROUNDS_C * k * (log_star(4 * len as u64) + 1);
            assert!(rs.rounds <= bound, "{} > {bound}", rs.rounds);
        }
    }
}
