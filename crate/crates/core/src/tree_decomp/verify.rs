use super::{DecompError, Decomposition, PartKind};
use crate::graph_core::{Graph, VertexId};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};

/// Above this size a `T^k` component that is not connected in `T` gets no exact diameter.
const ALL_PAIRS_CAP: usize = 3000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartReport {
    pub part: usize,
    pub kind: PartKind,
    pub size: usize,
    /// Components in `T^k`.
    pub components: usize,
    /// Largest distance in `T` between two vertices of one `T^k` component.
    pub max_t_diameter: usize,
    /// Largest diameter of a component in `T^k`; `None` when too large to compute exactly.
    pub max_tk_diameter: Option<usize>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub k: usize,
    pub parts: Vec<PartReport>,
    /// Same label, different `T` components, distance ≤ k (diameter parts only). Empty
    /// when every diameter part has the same components in `T` and in `T^k`.
    pub separation_violations: Vec<(VertexId, VertexId)>,
    /// Same zero part, distance ≤ k.
    pub independence_violations: Vec<(VertexId, VertexId)>,
}

impl DecompositionReport {
    /// Zero parts independent and every `T^k` component of a diameter part within its
    /// bound.
    pub fn passes(&self) -> bool {
        self.parts.iter().all(|p| p.ok)
    }

    pub fn separated(&self) -> bool {
        self.separation_violations.is_empty()
    }
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

// farthest vertex from src over same-label T-edges
fn sweep(g: &Graph, labels: &[usize], src: VertexId) -> (VertexId, usize) {
    let mut dist = HashMap::from([(src, 0)]);
    let mut q = VecDeque::from([src]);
    let mut best = (src, 0);
    while let Some(v) = q.pop_front() {
        let d = dist[&v];
        if d > best.1 {
            best = (v, d);
        }
        for &(w, _) in g.neighbors(v) {
            if labels[w] == labels[src] && !dist.contains_key(&w) {
                dist.insert(w, d + 1);
                q.push_back(w);
            }
        }
    }
    best
}

// largest T-distance within `set`; double sweep is exact in a tree metric
fn weak_diameter(g: &Graph, set: &[VertexId]) -> usize {
    let farthest = |src: VertexId| {
        let d = g.bfs_distances(src);
        set.iter().map(|&v| (d[v], v)).max().unwrap()
    };
    let (_, a) = farthest(set[0]);
    farthest(a).0
}

// exact diameter of the T^k graph on `comp`, BFS from every vertex
fn power_diameter(g: &Graph, k: usize, comp: &[VertexId]) -> usize {
    let index: HashMap<VertexId, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = comp
        .iter()
        .map(|&v| g.ball(v, k).into_iter().filter_map(|(u, _)| (u != v).then(|| index.get(&u).copied()).flatten()).collect())
        .collect();
    (0..comp.len())
        .into_par_iter()
        .map(|s| {
            let mut dist = vec![usize::MAX; comp.len()];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            let mut far = 0;
            while let Some(v) = q.pop_front() {
                far = far.max(dist[v]);
                for &w in &adj[v] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            far
        })
        .max()
        .unwrap_or(0)
}

/// Checks separation and diameter bounds of the diameter parts and independence of the
/// zero parts, all in `T^k`. `g` must be a forest.
pub fn verify_decomposition(g: &Graph, dec: &Decomposition) -> Result<DecompositionReport, DecompError> {
    let n = g.n();
    let k = dec.k;
    if dec.labels.len() != n {
        return Err(DecompError::InvalidParameter(format!("{} labels for {n} vertices", dec.labels.len())));
    }
    if let Some(&p) = dec.labels.iter().find(|&&p| p >= dec.kinds.len()) {
        return Err(DecompError::InvalidParameter(format!("part {p} has no kind")));
    }
    let labels = &dec.labels;
    // T components of each part
    let mut tcomp: Vec<usize> = (0..n).collect();
    for &(u, v) in g.edges() {
        if labels[u] == labels[v] {
            let (a, b) = (find(&mut tcomp, u), find(&mut tcomp, v));
            tcomp[a.max(b)] = a.min(b);
        }
    }
    let tcomp: Vec<usize> = (0..n).map(|v| find(&mut tcomp, v)).collect();

    let close: Vec<(VertexId, VertexId)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|v| {
            g.ball(v, k)
                .into_iter()
                .filter(|&(u, _)| u > v && labels[u] == labels[v])
                .filter(|&(u, _)| dec.kinds[labels[v]] == PartKind::Zero || tcomp[u] != tcomp[v])
                .map(|(u, _)| (v, u))
                .collect::<Vec<_>>()
        })
        .collect();
    let (independence_violations, separation_violations): (Vec<_>, Vec<_>) =
        close.into_iter().partition(|&(v, _)| dec.kinds[labels[v]] == PartKind::Zero);

    // T^k components: T components joined by separation violations
    let mut uf = tcomp.clone();
    for &(u, v) in &separation_violations {
        let (a, b) = (find(&mut uf, u), find(&mut uf, v));
        uf[a.max(b)] = a.min(b);
    }
    let mut groups: HashMap<usize, Vec<VertexId>> = HashMap::new();
    for v in 0..n {
        groups.entry(find(&mut uf, v)).or_default().push(v);
    }

    let mut parts: Vec<PartReport> = dec
        .kinds
        .iter()
        .enumerate()
        .map(|(part, &kind)| PartReport {
            part,
            kind,
            size: 0,
            components: 0,
            max_t_diameter: 0,
            max_tk_diameter: Some(0),
            ok: true,
        })
        .collect();
    for v in 0..n {
        parts[labels[v]].size += 1;
    }
    for comp in groups.values() {
        let part = &mut parts[labels[comp[0]]];
        part.components += 1;
        let roots: Vec<usize> = {
            let mut r: Vec<usize> = comp.iter().map(|&v| tcomp[v]).collect();
            r.sort_unstable();
            r.dedup();
            r
        };
        let t_diam = if roots.len() == 1 {
            let (far, _) = sweep(g, labels, comp[0]);
            sweep(g, labels, far).1
        } else {
            weak_diameter(g, comp)
        };
        part.max_t_diameter = part.max_t_diameter.max(t_diam);
        let tk = if roots.len() == 1 {
            Some(t_diam.div_ceil(k.max(1)))
        } else if comp.len() <= ALL_PAIRS_CAP {
            Some(power_diameter(g, k, comp))
        } else {
            None
        };
        part.max_tk_diameter = match (part.max_tk_diameter, tk) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    for v in independence_violations.iter().map(|&(v, _)| v) {
        parts[labels[v]].ok = false;
    }
    for p in &mut parts {
        if let PartKind::Diam { bound } = p.kind {
            if p.max_t_diameter > bound {
                p.ok = false;
            }
        }
    }
    Ok(DecompositionReport { k, parts, separation_violations, independence_violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{build_graph, power_graph, random_tree};
    use rand::Rng;

    fn path(n: usize) -> Graph {
        build_graph(&(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>(), None).unwrap()
    }

    #[test]
    fn trivial_p2() {
        let dec = Decomposition { k: 1, labels: vec![0, 0], kinds: vec![PartKind::Diam { bound: 1 }] };
        let rep = verify_decomposition(&path(2), &dec).unwrap();
        assert!(rep.passes());
        assert_eq!(rep.parts[0].max_tk_diameter, Some(1));
        assert_eq!(rep.parts[0].max_t_diameter, 1);
    }

    #[test]
    fn names_separation_violation() {
        let dec = Decomposition { k: 2, labels: vec![0, 1, 0], kinds: vec![PartKind::Diam { bound: 5 }; 2] };
        let rep = verify_decomposition(&path(3), &dec).unwrap();
        assert_eq!(rep.separation_violations, vec![(0, 2)]);
        assert!(!rep.separated());
        // in T^2 the two ends form one component, 2 apart in T
        assert!(rep.parts[0].ok && rep.parts[1].ok);
        assert_eq!(rep.parts[0].components, 1);
        assert_eq!(rep.parts[0].max_t_diameter, 2);
        assert_eq!(rep.parts[0].max_tk_diameter, Some(1));
    }

    #[test]
    fn zero_part_independence() {
        let dec = Decomposition { k: 2, labels: vec![1, 0, 1, 0], kinds: vec![PartKind::Zero; 2] };
        let rep = verify_decomposition(&path(4), &dec).unwrap();
        assert_eq!(rep.independence_violations, vec![(0, 2), (1, 3)]);
        let dec = Decomposition { k: 1, labels: vec![1, 0, 1, 0], kinds: vec![PartKind::Zero; 2] };
        assert!(verify_decomposition(&path(4), &dec).unwrap().passes());
    }

    #[test]
    fn diameter_bound_enforced() {
        let dec = Decomposition { k: 1, labels: vec![0; 5], kinds: vec![PartKind::Diam { bound: 3 }] };
        assert!(!verify_decomposition(&path(5), &dec).unwrap().passes());
    }

    #[test]
    fn matches_power_graph_on_random_labelings() {
        let mut r = crate::rng::rng_from(8);
        for seed in 0..60 {
            let n = 40;
            let t = random_tree(n, seed).unwrap();
            let k = r.gen_range(1..4);
            let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..3)).collect();
            let dec = Decomposition { k, labels: labels.clone(), kinds: vec![PartKind::Diam { bound: n }; 3] };
            let rep = verify_decomposition(&t.graph, &dec).unwrap();
            let pk = power_graph(&t.graph, k).unwrap();
            for c in 0..3 {
                let part: Vec<bool> = labels.iter().map(|&l| l == c).collect();
                let metrics = crate::graph_core::component_metrics(&pk, &part);
                assert_eq!(rep.parts[c].components, metrics.len());
                let diam = metrics.iter().map(|m| m.1).max().unwrap_or(0);
                assert_eq!(rep.parts[c].max_tk_diameter, Some(diam));
            }
        }
    }

    #[test]
    fn rejects_bad_labels() {
        let dec = Decomposition { k: 1, labels: vec![0, 2], kinds: vec![PartKind::Zero] };
        assert!(verify_decomposition(&path(2), &dec).is_err());
    }
}
