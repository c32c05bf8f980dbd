use super::LowerBoundError;
use crate::graph_core::{verify_proper_edge_coloring, Color, EdgeId, Graph, PartialEdgeColoring, VertexId};
use crate::local_runtime::{run_local_edges, FnProgram, NodeProgram, RunRecord};
use crate::rng::rng_from;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// `direction[e] = (tail, head)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orientation {
    pub direction: Vec<(VertexId, VertexId)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SinkReport {
    /// Vertices with out-degree zero.
    pub sinks: Vec<VertexId>,
    /// Vertices of degree below `Δ_min`, where a sink may be unavoidable.
    pub low_degree: Vec<VertexId>,
    /// Edges whose stored direction does not match their endpoints.
    pub misoriented: Vec<EdgeId>,
}

impl SinkReport {
    pub fn sinkless(&self) -> bool {
        self.sinks.is_empty() && self.misoriented.is_empty()
    }
}

pub fn verify_sinkless(g: &Graph, o: &Orientation, delta_min: usize) -> SinkReport {
    let mut out_deg = vec![0usize; g.n()];
    let mut rep = SinkReport::default();
    for e in 0..g.m() {
        let (a, b) = g.endpoints(e);
        match o.direction.get(e) {
            Some(&(t, h)) if (t, h) == (a, b) || (t, h) == (b, a) => out_deg[t] += 1,
            _ => rep.misoriented.push(e),
        }
    }
    rep.misoriented.extend(g.m()..o.direction.len());
    rep.sinks = (0..g.n()).filter(|&v| out_deg[v] == 0).collect();
    rep.low_degree = (0..g.n()).filter(|&v| g.degree(v) < delta_min).collect();
    rep
}

/// An edge-coloring algorithm run on the subgraph of doubly selected edges. Outputs
/// are colors in `1..=2Δ−2` or `None` for ⊥.
pub trait EdgeColorer: Sync {
    fn color(&self, g: &Graph, delta: usize, seed: u64) -> RunRecord<Option<Color>>;
}

/// Stands in for a perfect algorithm: a proper coloring is computed globally, handed to
/// every edge as input, and read back by a program of the declared radius. Colors are
/// a seeded injection of `1..=Δ` into `1..=2Δ−2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectOracle {
    pub rounds: usize,
}

impl EdgeColorer for PerfectOracle {
    fn color(&self, g: &Graph, delta: usize, seed: u64) -> RunRecord<Option<Color>> {
        let base = bipartite_edge_coloring(g).expect("doubly selected subgraph of a bipartite graph");
        let mut palette: Vec<Color> = (1..=(2 * delta - 2).max(delta) as Color).collect();
        palette.shuffle(&mut rng_from(seed));
        let inputs: Vec<Option<Color>> = base.iter().map(|&c| Some(palette[c as usize - 1])).collect();
        let program = FnProgram::new(|_, _: &Option<Color>| self.rounds, |view| *view.input(0));
        run_local_edges(g, &inputs, &program, seed)
    }
}

/// Every edge outputs ⊥.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllBottom {
    pub rounds: usize,
}

impl EdgeColorer for AllBottom {
    fn color(&self, g: &Graph, _delta: usize, seed: u64) -> RunRecord<Option<Color>> {
        let program = FnProgram::new(|_, _: &()| self.rounds, |_| None);
        run_local_edges(g, &vec![(); g.m()], &program, seed)
    }
}

/// Any edge program without inputs, run on the line graph.
pub struct LocalColorer<P>(pub P);

impl<P: NodeProgram<Input = (), Output = Option<Color>>> EdgeColorer for LocalColorer<P> {
    fn color(&self, g: &Graph, _delta: usize, seed: u64) -> RunRecord<Option<Color>> {
        run_local_edges(g, &vec![(); g.m()], &self.0, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinklessRun {
    pub orientation: Orientation,
    /// Edges of `g` selected by both endpoints, in the order of the subgraph's edge ids.
    pub doubly_selected: Vec<EdgeId>,
    pub colors: Vec<Option<Color>>,
    pub color_rounds: usize,
    pub rounds: usize,
    pub sinks: Vec<VertexId>,
    /// Whether the colorer's output was a proper partial coloring.
    pub proper: bool,
}

fn check_input(g: &Graph, delta: usize) -> Result<&[u32], LowerBoundError> {
    if delta < 2 {
        return Err(LowerBoundError::DeltaOutOfRange { delta, min: 2, max: usize::MAX });
    }
    let labels = g.labels().ok_or(LowerBoundError::MissingLabels)?;
    if let Some(v) = (0..g.n()).find(|&v| labels[v] > 1) {
        return Err(LowerBoundError::NotBipartite(format!("vertex {v} has label {}", labels[v])));
    }
    if let Some(e) = (0..g.m()).find(|&e| {
        let (a, b) = g.endpoints(e);
        labels[a] == labels[b]
    }) {
        return Err(LowerBoundError::NotBipartite(format!("edge {e} joins two label-{} vertices", labels[g.endpoints(e).0])));
    }
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) < delta) {
        return Err(LowerBoundError::DegreeDeficient { vertex: v, degree: g.degree(v), delta });
    }
    Ok(labels)
}

/// Sinkless orientation from an edge coloring: every vertex selects its `Δ` lowest
/// ports, the colorer runs on the doubly selected edges, and each edge is oriented
/// from its color (low colors and ⊥ point at the label-1 endpoint) or from who
/// selected it. Edges nobody selected point at the label-1 endpoint.
pub fn ec_to_sinkless(
    g: &Graph,
    delta: usize,
    colorer: &dyn EdgeColorer,
    seed: u64,
) -> Result<SinklessRun, LowerBoundError> {
    let labels = check_input(g, delta)?;
    // bit j set: the label-j endpoint selected the edge
    let mut selected = vec![0u8; g.m()];
    for v in 0..g.n() {
        for &(_, e) in &g.neighbors(v)[..delta] {
            selected[e] |= 1 << labels[v];
        }
    }
    let doubly_selected: Vec<EdgeId> = (0..g.m()).filter(|&e| selected[e] == 3).collect();
    let sub_edges: Vec<(VertexId, VertexId)> = doubly_selected.iter().map(|&e| g.endpoints(e)).collect();
    let sub = Graph::from_edges(g.n(), &sub_edges, Some(labels.to_vec()))?;
    let record = colorer.color(&sub, delta, seed);
    let top = (2 * delta - 2) as Color;
    if let Some((i, &c)) = record.outputs.iter().enumerate().find(|(_, c)| c.map_or(false, |c| c == 0 || c > top)) {
        return Err(LowerBoundError::ColorOutOfRange { edge: doubly_selected[i], color: c.unwrap_or(0), max: top });
    }
    let mut color_of = vec![None; g.m()];
    for (i, &e) in doubly_selected.iter().enumerate() {
        color_of[e] = record.outputs[i];
    }
    let direction = (0..g.m())
        .map(|e| {
            let (a, b) = g.endpoints(e);
            let (u0, u1) = if labels[a] == 0 { (a, b) } else { (b, a) };
            let toward_one = match selected[e] {
                3 => color_of[e].map_or(true, |c| (c as usize) < delta),
                2 => false,
                _ => true,
            };
            if toward_one {
                (u0, u1)
            } else {
                (u1, u0)
            }
        })
        .collect();
    let orientation = Orientation { direction };
    let sinks = verify_sinkless(g, &orientation, delta).sinks;
    let proper = verify_proper_edge_coloring(&sub, &PartialEdgeColoring { colors: record.outputs.clone(), palette_size: top })?
        .is_proper();
    if proper {
        for &v in &sinks {
            let low = sub.neighbors(v).iter().all(|&(_, i)| record.outputs[i].map_or(true, |c| (c as usize) < delta));
            assert!(
                sub.degree(v) == delta && labels[v] == 1 && low,
                "sink {v} outside the three conditions"
            );
        }
    }
    Ok(SinklessRun {
        orientation,
        doubly_selected,
        colors: record.outputs,
        color_rounds: record.rounds_used,
        rounds: record.rounds_used + 1,
        sinks,
        proper,
    })
}

/// Proper edge coloring of a bipartite graph with `max_degree` colors (1-based), by
/// flipping alternating paths.
pub fn bipartite_edge_coloring(g: &Graph) -> Result<Vec<Color>, LowerBoundError> {
    let d = g.max_degree();
    // at[v][c] = edge of color c at v
    let mut at: Vec<Vec<Option<EdgeId>>> = vec![vec![None; d + 1]; g.n()];
    let mut color: Vec<usize> = vec![0; g.m()];
    let free = |at: &Vec<Vec<Option<EdgeId>>>, v: VertexId| (1..=d).find(|&c| at[v][c].is_none()).expect("degree bound");
    for e in 0..g.m() {
        let (u, v) = g.endpoints(e);
        let a = free(&at, u);
        if at[v][a].is_some() {
            let b = free(&at, v);
            // the a/b path from v never reaches u in a bipartite graph
            let mut path = Vec::new();
            let (mut x, mut want) = (v, a);
            while let Some(f) = at[x][want] {
                path.push(f);
                x = g.other(f, x);
                want = if want == a { b } else { a };
                if x == u {
                    return Err(LowerBoundError::NotBipartite(format!("odd cycle through edge {e}")));
                }
            }
            for &f in &path {
                let (p, q) = g.endpoints(f);
                at[p][color[f]] = None;
                at[q][color[f]] = None;
            }
            for &f in &path {
                let c = if color[f] == a { b } else { a };
                let (p, q) = g.endpoints(f);
                color[f] = c;
                at[p][c] = Some(f);
                at[q][c] = Some(f);
            }
        }
        color[e] = a;
        at[u][a] = Some(e);
        at[v][a] = Some(e);
    }
    Ok(color.into_iter().map(|c| c as Color).collect())
}
