//! Round-synchronous LOCAL simulation.
//!
//! [`run_local`] materializes every entity's radius-`t` ball and hands the program
//! nothing else, so an output can only depend on what the ball contains.
//! [`iterate_local`] threads per-vertex state through radius-1 rounds.
//!
//! Edge programs run on the line graph of the host.

use crate::graph_core::{EdgeId, Graph, VertexId};
use crate::rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;

/// Everything an entity sees after `radius` rounds: the subgraph induced by its ball,
/// the inputs of the entities inside, and their random tapes.
///
/// Local index 0 is the center. Neighbor lists keep the host port order.
pub struct NeighborhoodView<'a, I> {
    center: VertexId,
    radius: usize,
    ids: Vec<VertexId>,
    dist: Vec<usize>,
    adj: Vec<Vec<(usize, EdgeId)>>,
    inputs: &'a [I],
    tape_seeds: &'a [u64],
}

impl<'a, I> NeighborhoodView<'a, I> {
    fn build(g: &Graph, center: VertexId, radius: usize, inputs: &'a [I], tape_seeds: &'a [u64]) -> Self {
        let ball = g.ball(center, radius);
        let local: HashMap<VertexId, usize> =
            ball.iter().enumerate().map(|(i, &(v, _))| (v, i)).collect();
        let adj = ball
            .iter()
            .map(|&(v, _)| {
                g.neighbors(v)
                    .iter()
                    .filter_map(|&(w, e)| local.get(&w).map(|&j| (j, e)))
                    .collect()
            })
            .collect();
        NeighborhoodView {
            center,
            radius,
            ids: ball.iter().map(|&(v, _)| v).collect(),
            dist: ball.iter().map(|&(_, d)| d).collect(),
            adj,
            inputs,
            tape_seeds,
        }
    }

    pub fn center(&self) -> VertexId {
        self.center
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Number of entities in the ball.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Global id of local entity `i`.
    pub fn id(&self, i: usize) -> VertexId {
        self.ids[i]
    }

    pub fn dist(&self, i: usize) -> usize {
        self.dist[i]
    }

    /// Local neighbors of `i` inside the ball with the host edge ids.
    pub fn neighbors(&self, i: usize) -> &[(usize, EdgeId)] {
        &self.adj[i]
    }

    pub fn input(&self, i: usize) -> &I {
        &self.inputs[self.ids[i]]
    }

    /// Fresh copy of entity `i`'s random tape.
    pub fn tape(&self, i: usize) -> ChaCha8Rng {
        rng::rng_from(self.tape_seeds[self.ids[i]])
    }

    pub fn local_index(&self, global: VertexId) -> Option<usize> {
        self.ids.iter().position(|&v| v == global)
    }
}

/// A LOCAL algorithm: a declared radius per entity and an output function of the view.
///
/// The radius may depend on the entity's own input, which gives irregular time
/// profiles.
pub trait NodeProgram: Sync {
    type Input: Sync;
    type Output: Send;

    fn radius(&self, entity: VertexId, input: &Self::Input) -> usize;
    fn output(&self, view: &NeighborhoodView<'_, Self::Input>) -> Self::Output;
}

/// Closure-backed [`NodeProgram`].
pub struct FnProgram<I, O, R, F> {
    radius: R,
    output: F,
    _marker: std::marker::PhantomData<fn(&I) -> O>,
}

impl<I, O, R, F> FnProgram<I, O, R, F>
where
    R: Fn(VertexId, &I) -> usize + Sync,
    F: Fn(&NeighborhoodView<'_, I>) -> O + Sync,
{
    pub fn new(radius: R, output: F) -> Self {
        FnProgram {
            radius,
            output,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<I: Sync, O: Send, R, F> NodeProgram for FnProgram<I, O, R, F>
where
    R: Fn(VertexId, &I) -> usize + Sync,
    F: Fn(&NeighborhoodView<'_, I>) -> O + Sync,
{
    type Input = I;
    type Output = O;

    fn radius(&self, entity: VertexId, input: &I) -> usize {
        (self.radius)(entity, input)
    }

    fn output(&self, view: &NeighborhoodView<'_, I>) -> O {
        (self.output)(view)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord<O> {
    pub outputs: Vec<O>,
    pub rounds_used: usize,
    pub seed: u64,
}

/// Tape seeds derived from `(seed, entity id)`.
pub fn tape_seeds(n: usize, seed: u64) -> Vec<u64> {
    (0..n as u64).map(|id| rng::derive(seed, &[id])).collect()
}

/// Runs `program` on every vertex of `g`.
pub fn run_local<P: NodeProgram>(g: &Graph, inputs: &[P::Input], program: &P, seed: u64) -> RunRecord<P::Output> {
    let seeds = tape_seeds(g.n(), seed);
    let mut rec = run_local_with_tapes(g, inputs, program, &seeds);
    rec.seed = seed;
    rec
}

/// [`run_local`] with explicit per-entity tape seeds.
pub fn run_local_with_tapes<P: NodeProgram>(
    g: &Graph,
    inputs: &[P::Input],
    program: &P,
    tape_seeds: &[u64],
) -> RunRecord<P::Output> {
    assert_eq!(inputs.len(), g.n(), "one input per entity");
    assert_eq!(tape_seeds.len(), g.n(), "one tape per entity");
    let radii: Vec<usize> = (0..g.n()).map(|v| program.radius(v, &inputs[v])).collect();
    let outputs = (0..g.n())
        .into_par_iter()
        .map(|v| program.output(&NeighborhoodView::build(g, v, radii[v], inputs, tape_seeds)))
        .collect();
    RunRecord {
        outputs,
        rounds_used: radii.iter().copied().max().unwrap_or(0),
        seed: 0,
    }
}

/// Runs an edge program: entities are the edges of `g`, adjacency is the line graph.
pub fn run_local_edges<P: NodeProgram>(g: &Graph, inputs: &[P::Input], program: &P, seed: u64) -> RunRecord<P::Output> {
    run_local(&g.line_graph(), inputs, program, seed)
}

/// What a vertex sees in one synchronous round.
pub struct RoundCtx<'a, S> {
    pub round: usize,
    pub id: VertexId,
    pub state: &'a S,
    /// `(neighbor, edge, neighbor's state)` in port order.
    pub neighbors: Vec<(VertexId, EdgeId, &'a S)>,
    pub tape_seed: u64,
}

impl<S> RoundCtx<'_, S> {
    pub fn tape(&self) -> ChaCha8Rng {
        rng::rng_from(self.tape_seed)
    }
}

/// Runs `rounds` synchronous rounds. In round `r` every vertex computes its new state
/// from its own and its neighbors' round-`r` states.
pub fn iterate_local<S, F>(g: &Graph, init: Vec<S>, rounds: usize, seed: u64, round_fn: F) -> RunRecord<S>
where
    S: Send + Sync,
    F: Fn(&RoundCtx<'_, S>) -> S + Sync,
{
    assert_eq!(init.len(), g.n(), "one state per vertex");
    let mut state = init;
    for r in 0..rounds {
        state = (0..g.n())
            .into_par_iter()
            .map(|v| {
                let ctx = RoundCtx {
                    round: r,
                    id: v,
                    state: &state[v],
                    neighbors: g.neighbors(v).iter().map(|&(w, e)| (w, e, &state[w])).collect(),
                    tape_seed: rng::derive(seed, &[v as u64, r as u64]),
                };
                round_fn(&ctx)
            })
            .collect();
    }
    RunRecord {
        outputs: state,
        rounds_used: rounds,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::{build_graph, random_tree};
    use rand::Rng;

    fn path(n: usize) -> Graph {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        build_graph(&e, None).unwrap()
    }

    #[test]
    fn radius_zero_and_one() {
        let g = build_graph(&[(0, 1), (0, 2), (0, 3)], Some(vec![7, 1, 2, 3])).unwrap();
        let labels: Vec<u32> = g.labels().unwrap().to_vec();
        let own = FnProgram::new(|_, _: &u32| 0, |v: &NeighborhoodView<'_, u32>| *v.input(0));
        assert_eq!(run_local(&g, &labels, &own, 1).outputs, labels);
        let deg = FnProgram::new(|_, _: &u32| 1, |v: &NeighborhoodView<'_, u32>| v.neighbors(0).len());
        let rec = run_local(&g, &labels, &deg, 1);
        assert_eq!(rec.outputs[0], 3);
        assert_eq!(rec.rounds_used, 1);
    }

    #[test]
    fn same_seed_same_record() {
        let t = random_tree(40, 3).unwrap();
        let inputs = vec![(); 40];
        let prog = FnProgram::new(
            |v, _: &()| v % 3,
            |view: &NeighborhoodView<'_, ()>| (0..view.len()).fold(0u32, |a, i| a.wrapping_add(view.tape(i).gen::<u32>())),
        );
        assert_eq!(run_local(&t.graph, &inputs, &prog, 9), run_local(&t.graph, &inputs, &prog, 9));
        assert_eq!(run_local(&t.graph, &inputs, &prog, 9).rounds_used, 2);
    }

    fn flood(g: &Graph, rounds: usize) -> Vec<usize> {
        iterate_local(g, (0..g.n()).collect(), rounds, 0, |ctx| {
            ctx.neighbors.iter().map(|&(_, _, &s)| s).fold(*ctx.state, usize::max)
        })
        .outputs
    }

    #[test]
    fn flooding_max_id() {
        let g = path(5);
        assert_eq!(flood(&g, 0), vec![0, 1, 2, 3, 4]);
        assert_eq!(flood(&g, 4), vec![4; 5]);
        assert_eq!(flood(&g, 2)[0], 2);
    }

    #[test]
    fn iterate_matches_run_local_for_flooding() {
        for seed in 0..10 {
            let t = random_tree(80, seed).unwrap();
            let inputs: Vec<usize> = (0..80).collect();
            for r in 0..5 {
                let prog = FnProgram::new(
                    move |_, _: &usize| r,
                    |v: &NeighborhoodView<'_, usize>| (0..v.len()).map(|i| *v.input(i)).max().unwrap(),
                );
                assert_eq!(run_local(&t.graph, &inputs, &prog, 0).outputs, flood(&t.graph, r));
            }
        }
    }

    #[test]
    fn edge_programs_see_line_graph() {
        let g = build_graph(&[(0, 1), (1, 2), (2, 3)], None).unwrap();
        let prog = FnProgram::new(|_, _: &()| 1, |v: &NeighborhoodView<'_, ()>| v.neighbors(0).len());
        assert_eq!(run_local_edges(&g, &[(); 3], &prog, 0).outputs, vec![1, 2, 1]);
    }

    // hash of everything visible: ids, distances, structure, inputs, tapes
    fn digest(v: &NeighborhoodView<'_, u32>) -> u64 {
        let mut h = 0u64;
        for i in 0..v.len() {
            let mut t = v.tape(i);
            let nb: u64 = v.neighbors(i).iter().map(|&(j, e)| (v.id(j) * 31 + e) as u64).sum();
            h = rng::mix64(h ^ rng::derive(v.id(i) as u64, &[v.dist(i) as u64, *v.input(i) as u64, t.gen(), nb]));
        }
        h
    }

    #[test]
    fn perturbations_outside_the_ball_are_invisible() {
        let mut r = rng::rng_from(5);
        for trial in 0..40 {
            let n = r.gen_range(2..200);
            let t = random_tree(n, trial).unwrap();
            let radius = r.gen_range(0..4);
            let inputs: Vec<u32> = (0..n).map(|_| r.gen_range(0..5)).collect();
            let seeds = tape_seeds(n, trial);
            let prog = FnProgram::new(move |_, _: &u32| radius, digest);
            let base = run_local_with_tapes(&t.graph, &inputs, &prog, &seeds);
            let far = r.gen_range(0..n);
            let dist = t.graph.bfs_distances(far);
            let mut in2 = inputs.clone();
            in2[far] += 1;
            let mut s2 = seeds.clone();
            s2[far] ^= 0xdead_beef;
            let pert = run_local_with_tapes(&t.graph, &in2, &prog, &s2);
            for v in 0..n {
                if dist[v] > radius {
                    assert_eq!(base.outputs[v], pert.outputs[v], "trial {trial} v {v}");
                } else {
                    assert_ne!(base.outputs[v], pert.outputs[v], "trial {trial} v {v}");
                }
            }
        }
    }
}
