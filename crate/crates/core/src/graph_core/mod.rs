//! Graphs, rooted trees, partial edge colorings and the structural helpers
//! shared by every other module.
//!
//! Vertices are dense `usize` ids in `[0, n)`. Edges get ids in insertion
//! order, and the port of an edge at a vertex is its position in that
//! vertex's adjacency list (1-based).

mod generators;
pub mod io;
mod metrics;

pub use generators::{
    power_graph, random_bounded_degree_tree, random_proper_coloring_t_delta, random_regular_bipartite_graph,
    random_regular_graph,
    random_tree, truncated_regular_tree,
};
pub use metrics::{
    component_metrics, connected_components, greedy_distance_dominating_set,
    ranked_dominating_set, verify_proper_edge_coloring, ColoringReport, ColoringViolation,
};

use std::collections::{HashSet, VecDeque};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;
pub type Color = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex id {id} out of range (n = {n})")]
    VertexOutOfRange { id: VertexId, n: usize },
    #[error("vertex ids are not dense: {0} never appears")]
    NonDense(VertexId),
    #[error("label vector has length {got}, expected {n}")]
    LabelLength { got: usize, n: usize },
    #[error("a tree needs at least one vertex")]
    EmptyTree,
    #[error("vertex set is not connected")]
    Disconnected,
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("not a truncated regular tree: {0}")]
    NotTruncatedRegular(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("json: {0}")]
    Json(String),
}

/// Undirected simple graph with port numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    adj: Vec<Vec<(VertexId, EdgeId)>>,
    // port of edge e at (first endpoint, second endpoint)
    ports: Vec<(u32, u32)>,
    labels: Option<Vec<u32>>,
}

impl Graph {
    /// Graph on `n` vertices. Ids must lie in `[0, n)`; isolated vertices allowed.
    pub fn from_edges(
        n: usize,
        edges: &[(VertexId, VertexId)],
        labels: Option<Vec<u32>>,
    ) -> Result<Graph, GraphError> {
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(GraphError::LabelLength { got: l.len(), n });
            }
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut g = Graph {
            n,
            edges: Vec::with_capacity(edges.len()),
            adj: vec![Vec::new(); n],
            ports: Vec::with_capacity(edges.len()),
            labels,
        };
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(GraphError::VertexOutOfRange { id, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            g.push_edge(u, v);
        }
        Ok(g)
    }

    fn push_edge(&mut self, u: VertexId, v: VertexId) -> EdgeId {
        let e = self.edges.len();
        self.edges.push((u, v));
        self.adj[u].push((v, e));
        self.adj[v].push((u, e));
        self.ports
            .push((self.adj[u].len() as u32, self.adj[v].len() as u32));
        e
    }

    /// Builds a graph without the duplicate check. Callers guarantee simplicity.
    pub(crate) fn from_edges_unchecked(
        n: usize,
        edges: &[(VertexId, VertexId)],
        labels: Option<Vec<u32>>,
    ) -> Graph {
        let mut g = Graph {
            n,
            edges: Vec::with_capacity(edges.len()),
            adj: vec![Vec::new(); n],
            ports: Vec::with_capacity(edges.len()),
            labels,
        };
        for &(u, v) in edges {
            debug_assert!(u != v && u < n && v < n);
            g.push_edge(u, v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    /// The endpoint of `e` that is not `v`.
    pub fn other(&self, e: EdgeId, v: VertexId) -> VertexId {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Port (1..=deg) of edge `e` at endpoint `v`.
    pub fn port(&self, v: VertexId, e: EdgeId) -> u32 {
        let (a, _) = self.edges[e];
        if a == v {
            self.ports[e].0
        } else {
            self.ports[e].1
        }
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: VertexId) -> Option<u32> {
        self.labels.as_ref().map(|l| l[v])
    }

    pub fn set_labels(&mut self, labels: Option<Vec<u32>>) -> Result<(), GraphError> {
        if let Some(l) = &labels {
            if l.len() != self.n {
                return Err(GraphError::LabelLength {
                    got: l.len(),
                    n: self.n,
                });
            }
        }
        self.labels = labels;
        Ok(())
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].iter().find(|&&(w, _)| w == b).map(|&(_, e)| e)
    }

    /// Vertices within distance `radius` of `center`, with their distances, in BFS order.
    pub fn ball(&self, center: VertexId, radius: usize) -> Vec<(VertexId, usize)> {
        let mut out = vec![(center, 0)];
        let mut seen = HashSet::new();
        seen.insert(center);
        let mut head = 0;
        while head < out.len() {
            let (v, d) = out[head];
            head += 1;
            if d == radius {
                continue;
            }
            for &(w, _) in &self.adj[v] {
                if seen.insert(w) {
                    out.push((w, d + 1));
                }
            }
        }
        out
    }

    /// Single-source BFS distances; `usize::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, src: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            for &(w, _) in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    /// Line graph: vertex i is edge i of `self`; labels are dropped.
    pub fn line_graph(&self) -> Graph {
        let mut ledges = Vec::new();
        for v in 0..self.n {
            let inc = &self.adj[v];
            for i in 0..inc.len() {
                for j in (i + 1)..inc.len() {
                    ledges.push((inc[i].1, inc[j].1));
                }
            }
        }
        Graph::from_edges_unchecked(self.m(), &ledges, None)
    }

    /// Subgraph induced by the vertices with `keep[v]`; returns the graph and the
    /// map from new ids to old ids.
    pub fn induced(&self, keep: &[bool]) -> (Graph, Vec<VertexId>) {
        let mut new_id = vec![usize::MAX; self.n];
        let mut old = Vec::new();
        for v in 0..self.n {
            if keep[v] {
                new_id[v] = old.len();
                old.push(v);
            }
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(a, b)| keep[a] && keep[b])
            .map(|&(a, b)| (new_id[a], new_id[b]))
            .collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| old.iter().map(|&v| l[v]).collect());
        (Graph::from_edges_unchecked(old.len(), &edges, labels), old)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs_distances(0).iter().all(|&d| d != usize::MAX)
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.m() + 1 == self.n && self.is_connected()
    }
}

/// Builds a graph from an edge list, inferring `n`.
///
/// With labels, `n` is the label count. Without, `n` is one past the largest id and
/// every id below it must occur in some edge.
pub fn build_graph(
    edges: &[(VertexId, VertexId)],
    labels: Option<Vec<u32>>,
) -> Result<Graph, GraphError> {
    let n = match &labels {
        Some(l) => l.len(),
        None => {
            let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
            let mut present = vec![false; n];
            for &(u, v) in edges {
                present[u] = true;
                present[v] = true;
            }
            if let Some(missing) = present.iter().position(|&p| !p) {
                return Err(GraphError::NonDense(missing));
            }
            n
        }
    };
    Graph::from_edges(n, edges, labels)
}

/// Tree with a designated root; `parent[v] = Some((parent vertex, edge))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    pub graph: Graph,
    pub root: VertexId,
    pub parent: Vec<Option<(VertexId, EdgeId)>>,
    pub depth: Vec<usize>,
}

impl RootedTree {
    pub fn new(graph: Graph, root: VertexId) -> Result<RootedTree, GraphError> {
        let n = graph.n();
        if n == 0 {
            return Err(GraphError::EmptyTree);
        }
        if root >= n {
            return Err(GraphError::VertexOutOfRange { id: root, n });
        }
        if graph.m() + 1 != n {
            return Err(GraphError::NotATree(format!(
                "{} edges on {} vertices",
                graph.m(),
                n
            )));
        }
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            for &(w, e) in graph.neighbors(v) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some((v, e));
                    q.push_back(w);
                }
            }
        }
        if depth.iter().any(|&d| d == usize::MAX) {
            return Err(GraphError::NotATree("disconnected".into()));
        }
        Ok(RootedTree {
            graph,
            root,
            parent,
            depth,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Children of `v` in adjacency (port) order.
    pub fn children(&self, v: VertexId) -> Vec<VertexId> {
        self.graph
            .neighbors(v)
            .iter()
            .filter(|&&(w, _)| self.parent[w].map(|(p, _)| p) == Some(v))
            .map(|&(w, _)| w)
            .collect()
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }
}

/// Edge coloring where `None` is the uncolored marker.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PartialEdgeColoring {
    pub colors: Vec<Option<Color>>,
    pub palette_size: Color,
}

impl PartialEdgeColoring {
    pub fn uncolored(m: usize, palette_size: Color) -> Self {
        PartialEdgeColoring {
            colors: vec![None; m],
            palette_size,
        }
    }

    pub fn from_total(colors: Vec<Color>, palette_size: Color) -> Self {
        PartialEdgeColoring {
            colors: colors.into_iter().map(Some).collect(),
            palette_size,
        }
    }

    pub fn is_total(&self) -> bool {
        self.colors.iter().all(Option::is_some)
    }

    pub fn max_color(&self) -> Option<Color> {
        self.colors.iter().flatten().copied().max()
    }

    pub fn distinct_colors(&self) -> usize {
        self.colors.iter().flatten().collect::<HashSet<_>>().len()
    }
}
