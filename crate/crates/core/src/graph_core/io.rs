//! Graph JSON: `{"n", "edges": [[u,v],...], "labels"?: {v: int}, "root"?: int,
//! "colors"?: {edge_index: int}}`.

use super::{Graph, GraphError, PartialEdgeColoring, RootedTree, VertexId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub n: usize,
    pub edges: Vec<[VertexId; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<usize, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<BTreeMap<usize, u32>>,
}

impl GraphDoc {
    pub fn from_graph(g: &Graph) -> GraphDoc {
        GraphDoc {
            n: g.n(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            labels: g
                .labels()
                .map(|l| l.iter().copied().enumerate().collect()),
            root: None,
            colors: None,
        }
    }

    pub fn with_root(mut self, root: VertexId) -> Self {
        self.root = Some(root);
        self
    }

    /// Colors of a partial coloring; uncolored edges are omitted.
    pub fn with_coloring(mut self, c: &PartialEdgeColoring) -> Self {
        self.colors = Some(
            c.colors
                .iter()
                .enumerate()
                .filter_map(|(e, col)| col.map(|x| (e, x)))
                .collect(),
        );
        self
    }

    pub fn graph(&self) -> Result<Graph, GraphError> {
        let labels = match &self.labels {
            None => None,
            Some(map) => {
                let mut l = vec![0u32; self.n];
                for (&v, &x) in map {
                    if v >= self.n {
                        return Err(GraphError::VertexOutOfRange { id: v, n: self.n });
                    }
                    l[v] = x;
                }
                Some(l)
            }
        };
        let edges: Vec<_> = self.edges.iter().map(|&[u, v]| (u, v)).collect();
        Graph::from_edges(self.n, &edges, labels)
    }

    pub fn rooted_tree(&self) -> Result<RootedTree, GraphError> {
        RootedTree::new(self.graph()?, self.root.unwrap_or(0))
    }

    /// The stored coloring, with palette size equal to the largest color present.
    pub fn coloring(&self) -> Result<Option<PartialEdgeColoring>, GraphError> {
        let Some(map) = &self.colors else {
            return Ok(None);
        };
        let m = self.edges.len();
        let mut c = PartialEdgeColoring::uncolored(m, 0);
        for (&e, &x) in map {
            if e >= m {
                return Err(GraphError::UnknownEdge(e));
            }
            c.colors[e] = Some(x);
        }
        c.palette_size = c.max_color().unwrap_or(0);
        Ok(Some(c))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph doc serializes")
    }

    pub fn from_json(s: &str) -> Result<GraphDoc, GraphError> {
        serde_json::from_str(s).map_err(|e| GraphError::Json(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<GraphDoc, GraphError> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| GraphError::Json(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn write(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| GraphError::Json(format!("{}: {e}", path.display())))
    }
}

/// Reads any serde document from a JSON file.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, GraphError> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| GraphError::Json(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| GraphError::Json(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), GraphError> {
    let s = serde_json::to_string_pretty(value).map_err(|e| GraphError::Json(e.to_string()))?;
    std::fs::write(path, s).map_err(|e| GraphError::Json(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::truncated_regular_tree;

    #[test]
    fn roundtrip_with_labels_and_colors() {
        let t = truncated_regular_tree(3, 2).unwrap();
        let c = PartialEdgeColoring {
            colors: (0..t.graph.m()).map(|e| (e % 2 == 0).then_some(e as u32 + 1)).collect(),
            palette_size: 9,
        };
        let doc = GraphDoc::from_graph(&t.graph).with_root(0).with_coloring(&c);
        let back = GraphDoc::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.graph().unwrap(), t.graph);
        assert_eq!(back.coloring().unwrap().unwrap().colors, c.colors);
        assert_eq!(back.rooted_tree().unwrap().root, 0);
    }

    #[test]
    fn parses_string_keyed_maps() {
        let doc = GraphDoc::from_json(r#"{"n":2,"edges":[[0,1]],"labels":{"0":0,"1":1},"colors":{"0":4}}"#)
            .unwrap();
        assert_eq!(doc.graph().unwrap().labels(), Some(&[0, 1][..]));
        assert_eq!(doc.coloring().unwrap().unwrap().colors, vec![Some(4)]);
        assert!(GraphDoc::from_json(r#"{"n":1,"edges":[[0,1]]}"#).unwrap().graph().is_err());
        assert!(matches!(GraphDoc::from_json("{"), Err(GraphError::Json(_))));
    }
}
