use super::{LLLInstance, LllError, PartialAssignment, VarId};
use crate::constants::{ENUMERATION_CAP, MONTE_CARLO_SAMPLES};
use crate::graph_core::VertexId;
use crate::lll::EventSpec;
use crate::rng::rng_from;
use serde::Serialize;

/// What to do when the unset part of a scope is too large to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    Reject,
    MonteCarlo { seed: u64, samples: usize },
}

impl Fallback {
    pub fn monte_carlo(seed: u64) -> Self {
        Fallback::MonteCarlo { seed, samples: MONTE_CARLO_SAMPLES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probability {
    pub value: f64,
    /// False for a Monte Carlo estimate.
    pub exact: bool,
    pub samples: usize,
    pub std_error: f64,
}

/// Pr[E(v) | φ], exact when the unset joint domain fits the enumeration cap.
pub fn event_probability(
    inst: &LLLInstance,
    v: VertexId,
    phi: &PartialAssignment,
    fallback: Fallback,
) -> Result<Probability, LllError> {
    match (exact_with(inst, v, |x| phi.get(x)), fallback) {
        (Ok(value), _) => Ok(Probability { value, exact: true, samples: 0, std_error: 0.0 }),
        (Err(LllError::EnumerationCap { .. }), Fallback::MonteCarlo { seed, samples }) => {
            Ok(monte_carlo(inst, v, phi, seed, samples))
        }
        (Err(e), _) => Err(e),
    }
}

fn monte_carlo(inst: &LLLInstance, v: VertexId, phi: &PartialAssignment, seed: u64, samples: usize) -> Probability {
    let mut rng = rng_from(seed);
    let scope = inst.scope(v);
    let mut values: Vec<u32> = scope.iter().map(|&x| phi.get(x).unwrap_or(0)).collect();
    let mut hits = 0usize;
    for _ in 0..samples {
        for (i, &x) in scope.iter().enumerate() {
            if phi.get(x).is_none() {
                values[i] = inst.var(x).sample(&mut rng);
            }
        }
        hits += usize::from(inst.occurs_on(v, &values));
    }
    let q = hits as f64 / samples.max(1) as f64;
    Probability { value: q, exact: false, samples, std_error: (q * (1.0 - q) / samples.max(1) as f64).sqrt() }
}

/// Exact Pr[E(v)] with `get` supplying the fixed values; unset variables follow their
/// distributions. The two symmetric builtins have closed forms; tables are enumerated.
pub(crate) fn exact_with<F>(inst: &LLLInstance, v: VertexId, get: F) -> Result<f64, LllError>
where
    F: Fn(VarId) -> Option<u32>,
{
    let scope = inst.scope(v);
    match inst.event() {
        EventSpec::AllEqualBall => {
            let mut fixed: Option<u32> = None;
            for &x in scope {
                if let Some(a) = get(x) {
                    match fixed {
                        Some(b) if b != a => return Ok(0.0),
                        _ => fixed = Some(a),
                    }
                }
            }
            let free = scope.iter().filter(|&&x| get(x).is_none());
            Ok(match fixed {
                Some(a) => free.map(|&x| inst.var(x).mass(a)).product(),
                None => {
                    let free: Vec<VarId> = free.copied().collect();
                    if free.is_empty() {
                        return Ok(1.0);
                    }
                    let top = free.iter().map(|&x| inst.var(x).domain).max().unwrap_or(0);
                    (0..top).map(|a| free.iter().map(|&x| inst.var(x).mass(a)).product::<f64>()).sum()
                }
            })
        }
        EventSpec::MajorityBall { threshold } => {
            // distribution of the number of nonzero free variables
            let mut ones = 0usize;
            let mut dp = vec![1.0f64];
            for &x in scope {
                match get(x) {
                    Some(a) => ones += usize::from(a != 0),
                    None => {
                        let q = 1.0 - inst.var(x).mass(0);
                        let mut next = vec![0.0; dp.len() + 1];
                        for (c, &w) in dp.iter().enumerate() {
                            next[c] += w * (1.0 - q);
                            next[c + 1] += w * q;
                        }
                        dp = next;
                    }
                }
            }
            let m = scope.len() as f64;
            Ok(dp
                .iter()
                .enumerate()
                .filter(|&(c, _)| (ones + c) as f64 > threshold * m)
                .map(|(_, &w)| w)
                .sum())
        }
        EventSpec::CustomTable { tables } => {
            let Some(table) = tables.get(&v) else {
                return Ok(0.0);
            };
            let mut base = 0usize;
            let mut stride = 1usize;
            let mut free: Vec<(VarId, usize)> = Vec::new();
            let mut states = 1u128;
            for &x in scope {
                let dom = inst.var(x).domain as usize;
                match get(x) {
                    Some(a) => base += a as usize * stride,
                    None => {
                        free.push((x, stride));
                        states *= dom as u128;
                    }
                }
                stride *= dom;
            }
            if states > ENUMERATION_CAP as u128 {
                return Err(LllError::EnumerationCap { states, cap: ENUMERATION_CAP });
            }
            enumerate(inst, table, base, &free)
        }
    }
}

// mixed-radix odometer over the free variables
fn enumerate(inst: &LLLInstance, table: &[u8], base: usize, free: &[(VarId, usize)]) -> Result<f64, LllError> {
    let mut digits = vec![0u32; free.len()];
    let mut total = 0.0;
    loop {
        let mut idx = base;
        let mut w = 1.0;
        for (&(x, stride), &a) in free.iter().zip(&digits) {
            idx += a as usize * stride;
            w *= inst.var(x).mass(a);
        }
        if table[idx] != 0 {
            total += w;
        }
        let mut i = 0;
        loop {
            if i == free.len() {
                return Ok(total);
            }
            digits[i] += 1;
            if digits[i] < inst.var(free[i].0).domain {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{build_graph, random_tree, Graph};
    use crate::lll::Variable;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn path(n: usize) -> Graph {
        build_graph(&(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>(), None).unwrap()
    }

    fn single() -> Graph {
        Graph::from_edges(1, &[], None).unwrap()
    }

    // sum over all joint states of the scope, evaluating the predicate directly
    fn brute(inst: &LLLInstance, v: VertexId, phi: &PartialAssignment) -> f64 {
        let scope = inst.scope(v).to_vec();
        let mut total = 0.0;
        let mut digits = vec![0u32; scope.len()];
        'outer: loop {
            let ok = scope.iter().zip(&digits).all(|(&x, &a)| phi.get(x).map_or(true, |b| a == b));
            if ok {
                let w: f64 = scope
                    .iter()
                    .zip(&digits)
                    .filter(|(&x, _)| phi.get(x).is_none())
                    .map(|(&x, &a)| inst.var(x).mass(a))
                    .product();
                if inst.occurs_on(v, &digits) {
                    total += w;
                }
            }
            for i in 0..scope.len() {
                digits[i] += 1;
                if digits[i] < inst.var(scope[i]).domain {
                    continue 'outer;
                }
                digits[i] = 0;
            }
            return total;
        }
    }

    #[test]
    fn examples() {
        let inst = LLLInstance::all_equal_coins(path(3), 2).unwrap();
        let phi = PartialAssignment::from_total(&[0, 1, 0]);
        assert_eq!(event_probability(&inst, 1, &phi, Fallback::Reject).unwrap().value, 0.0);
        let heads = EventSpec::CustomTable { tables: BTreeMap::from([(0, vec![0, 1])]) };
        let coin = LLLInstance::new(single(), 2, vec![vec![Variable::fair_coin()]], heads, None).unwrap();
        let p = event_probability(&coin, 0, &PartialAssignment::unset(1), Fallback::Reject).unwrap();
        assert_eq!(p.value, 0.5);
        // all three coins of the middle ball equal
        let p = event_probability(&inst, 1, &PartialAssignment::unset(3), Fallback::Reject).unwrap();
        assert_eq!(p.value, 0.25);
        assert_eq!(brute(&inst, 1, &PartialAssignment::unset(3)), 0.25);
    }

    #[test]
    fn cap_and_monte_carlo() {
        // star with 24 leaves; vertex 0's table spans 2^25 states: "leaf 1 shows 0"
        let g = build_graph(&(1..=24).map(|i| (0, i)).collect::<Vec<_>>(), None).unwrap();
        let vars = vec![vec![Variable::fair_coin()]; 25];
        let table: Vec<u8> = (0..1usize << 25).map(|i| u8::from((i >> 1) & 1 == 0)).collect();
        let tables = BTreeMap::from([(0, table)]);
        let event = EventSpec::CustomTable { tables };
        assert!(matches!(
            LLLInstance::new(g.clone(), 2, vars.clone(), event.clone(), None),
            Err(LllError::EnumerationCap { .. })
        ));
        let inst = LLLInstance::new(g, 2, vars, event, Some(0.5)).unwrap();
        let phi = PartialAssignment::unset(25);
        assert!(matches!(event_probability(&inst, 0, &phi, Fallback::Reject), Err(LllError::EnumerationCap { .. })));
        let est = event_probability(&inst, 0, &phi, Fallback::MonteCarlo { seed: 2, samples: 20_000 }).unwrap();
        assert!(!est.exact && est.samples == 20_000);
        assert!((est.value - 0.5).abs() < 5.0 * est.std_error);
        // fixing one variable brings it under the cap
        let mut phi = phi;
        phi.values[5] = Some(1);
        let p = event_probability(&inst, 0, &phi, Fallback::Reject).unwrap();
        assert!(p.exact && p.value == 0.5);
    }

    #[test]
    fn monte_carlo_estimate() {
        let g = path(3);
        let vars = vec![vec![Variable::uniform(5)]; 3];
        let inst = LLLInstance::new(g, 2, vars, EventSpec::MajorityBall { threshold: 0.5 }, None).unwrap();
        let phi = PartialAssignment::unset(3);
        let exact = event_probability(&inst, 1, &phi, Fallback::Reject).unwrap();
        let est = monte_carlo(&inst, 1, &phi, 3, 200_000);
        assert!(!est.exact && est.samples == 200_000);
        assert!((est.value - exact.value).abs() < 5.0 * est.std_error + 1e-9, "{est:?} vs {exact:?}");
    }

    proptest! {
        #[test]
        fn closed_forms_match_enumeration(n in 1usize..12, seed in 0u64..1000, dom in 2u32..4, thr in 0.0f64..1.0) {
            let g = random_tree(n, seed).unwrap().graph;
            let mut r = rng_from(seed);
            let vars: Vec<Vec<Variable>> = (0..n).map(|v| {
                (0..(v % 2 + usize::from(v == 0))).map(|_| {
                    let w: Vec<f64> = (0..dom).map(|_| rand::Rng::gen_range(&mut r, 0.1..1.0)).collect();
                    let s: f64 = w.iter().sum();
                    Variable { domain: dom, dist: w.iter().map(|x| x / s).collect() }
                }).collect()
            }).collect();
            for event in [EventSpec::AllEqualBall, EventSpec::MajorityBall { threshold: thr }] {
                let inst = LLLInstance::new(g.clone(), 2, vars.clone(), event, None).unwrap();
                let mut phi = PartialAssignment::unset(inst.num_vars());
                for x in 0..inst.num_vars() {
                    if rand::Rng::gen_bool(&mut r, 0.4) {
                        phi.values[x] = Some(rand::Rng::gen_range(&mut r, 0..dom));
                    }
                }
                for v in 0..n {
                    let a = event_probability(&inst, v, &phi, Fallback::Reject).unwrap().value;
                    prop_assert!((a - brute(&inst, v, &phi)).abs() < 1e-12);
                }
            }
        }
    }
}
