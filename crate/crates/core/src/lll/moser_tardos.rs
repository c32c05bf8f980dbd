use super::{LLLInstance, LllError};
use crate::rng::{derive, rng_from};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MtOutcome {
    pub assignment: Vec<u32>,
    pub resamples: u64,
}

/// Sequential Moser–Tardos: sample everything, then resample the scope of the
/// smallest-index occurring event until none occurs.
pub fn moser_tardos(inst: &LLLInstance, seed: u64, max_resamples: u64) -> Result<MtOutcome, LllError> {
    let mut assignment = inst.sample_all(seed);
    let mut rng = rng_from(derive(seed, &[u64::MAX]));
    let mut violated: BTreeSet<usize> = inst.occurring_events(&assignment).into_iter().collect();
    let mut resamples = 0u64;
    while let Some(&v) = violated.iter().next() {
        if resamples == max_resamples {
            return Err(LllError::ResampleLimit { resamples, violated: violated.len() });
        }
        resamples += 1;
        for &x in inst.scope(v) {
            assignment[x] = inst.var(x).sample(&mut rng);
        }
        // only events sharing a variable can change
        for (w, _) in inst.tree().ball(v, inst.r()) {
            if inst.occurs(w, &assignment) {
                violated.insert(w);
            } else {
                violated.remove(&w);
            }
        }
    }
    Ok(MtOutcome { assignment, resamples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{build_graph, Graph};
    use crate::lll::{EventSpec, Variable};
    use std::collections::BTreeMap;

    #[test]
    fn never_occurring_events_need_no_resampling() {
        let g = build_graph(&[(0, 1), (1, 2)], None).unwrap();
        let vars = vec![vec![Variable::fair_coin()]; 3];
        let none = EventSpec::CustomTable { tables: BTreeMap::new() };
        let inst = LLLInstance::new(g, 2, vars, none, None).unwrap();
        let out = moser_tardos(&inst, 3, 0).unwrap();
        assert_eq!(out.resamples, 0);
        assert_eq!(out.assignment, inst.sample_all(3));
    }

    #[test]
    fn single_coin_ends_on_tails() {
        let heads = EventSpec::CustomTable { tables: BTreeMap::from([(0, vec![0, 1])]) };
        let g = Graph::from_edges(1, &[], None).unwrap();
        let inst = LLLInstance::new(g, 2, vec![vec![Variable::fair_coin()]], heads, None).unwrap();
        let mut total = 0;
        for seed in 0..400 {
            let out = moser_tardos(&inst, seed, 1000).unwrap();
            assert_eq!(out.assignment, vec![0]);
            total += out.resamples;
        }
        // geometric: one initial failure half the time, then mean 2 draws
        let mean = total as f64 / 400.0;
        assert!((mean - 1.0).abs() < 0.25, "{mean}");
    }

    #[test]
    fn path_all_equal_balls() {
        let g = build_graph(&(1..100).map(|i| (i - 1, i)).collect::<Vec<_>>(), None).unwrap();
        let inst = LLLInstance::all_equal_coins(g, 2).unwrap();
        for seed in 0..100 {
            let out = moser_tardos(&inst, seed, 100_000).unwrap();
            assert!(inst.occurring_events(&out.assignment).is_empty());
        }
    }

    #[test]
    fn unsatisfiable_hits_the_limit() {
        // a lone vertex sees only its own coin: "all equal" always holds
        let inst = LLLInstance::all_equal_coins(Graph::from_edges(1, &[], None).unwrap(), 2).unwrap();
        assert_eq!(moser_tardos(&inst, 0, 5), Err(LllError::ResampleLimit { resamples: 5, violated: 1 }));
    }
}
