//! Scene graphs: concept-labeled nodes with role-labeled directed edges.
//!
//! This is the L3 instance representation and the source from which the
//! coarser views are derived (L1 drops edges, L2 rolls edges up into
//! relational facts). The JSON wire format is
//! `{"id", "class", "nodes": [{"id", "concept"}], "edges": [{"src", "role", "dst"}]}`.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneNode {
    pub id: String,
    pub concept: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneEdge {
    pub src: String,
    pub role: String,
    pub dst: String,
}

/// A labeled directed graph describing one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub id: String,
    pub class: String,
    pub nodes: Vec<SceneNode>,
    pub edges: Vec<SceneEdge>,
}

#[derive(Debug, Error)]
pub enum SceneGraphError {
    #[error("graph {graph}: duplicate node id {node}")]
    DuplicateNodeId { graph: String, node: String },
    #[error("graph {graph}: edge references missing node {node}")]
    MissingEndpoint { graph: String, node: String },
    #[error("graph {graph}: self-loop on node {node}")]
    SelfLoop { graph: String, node: String },
    #[error("graph {graph}: duplicate edge {src} -{role}-> {dst}")]
    DuplicateEdge {
        graph: String,
        src: String,
        role: String,
        dst: String,
    },
}

/// A validated view of a graph with nodes in canonical (id-sorted) order.
/// All distance and embedding computations run over this view, which makes
/// them invariant to the node/edge ordering of the input.
#[derive(Debug, Clone)]
pub struct IndexedGraph {
    /// Node ids sorted lexicographically.
    pub node_ids: Vec<String>,
    /// Concept labels aligned with `node_ids`.
    pub concepts: Vec<String>,
    /// Edges as (src index, role, dst index), sorted.
    pub edges: Vec<(usize, String, usize)>,
}

impl IndexedGraph {
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    /// Undirected unique-neighbor lists in ascending index order.
    pub fn neighbor_sets(&self) -> Vec<Vec<usize>> {
        let n = self.node_ids.len();
        let mut sets: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for &(s, _, d) in &self.edges {
            sets[s].insert(d);
            sets[d].insert(s);
        }
        sets.into_iter()
            .map(|s| {
                let mut v: Vec<usize> = s.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    /// Node indices with no incident edges.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        let mut touched = vec![false; self.node_ids.len()];
        for &(s, _, d) in &self.edges {
            touched[s] = true;
            touched[d] = true;
        }
        (0..self.node_ids.len()).filter(|&i| !touched[i]).collect()
    }

    /// Directed parallel-edge groups: roles listed per ordered node pair.
    pub fn edge_groups(&self) -> BTreeMap<(usize, usize), Vec<String>> {
        let mut groups: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
        for (s, role, d) in &self.edges {
            groups.entry((*s, *d)).or_default().push(role.clone());
        }
        for roles in groups.values_mut() {
            roles.sort();
        }
        groups
    }
}

impl SceneGraph {
    pub fn new(id: &str, class: &str) -> SceneGraph {
        SceneGraph {
            id: id.to_string(),
            class: class.to_string(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn with_node(mut self, id: &str, concept: &str) -> Self {
        self.nodes.push(SceneNode {
            id: id.to_string(),
            concept: concept.to_string(),
        });
        self
    }

    pub fn with_edge(mut self, src: &str, role: &str, dst: &str) -> Self {
        self.edges.push(SceneEdge {
            src: src.to_string(),
            role: role.to_string(),
            dst: dst.to_string(),
        });
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Check structural invariants: unique node ids, edges over existing
    /// nodes, no self-loops, no repeated (src, role, dst) triple.
    pub fn validate(&self) -> Result<(), SceneGraphError> {
        let mut ids = HashSet::new();
        for node in &self.nodes {
            if !ids.insert(node.id.as_str()) {
                return Err(SceneGraphError::DuplicateNodeId {
                    graph: self.id.clone(),
                    node: node.id.clone(),
                });
            }
        }
        let mut triples = HashSet::new();
        for edge in &self.edges {
            for endpoint in [&edge.src, &edge.dst] {
                if !ids.contains(endpoint.as_str()) {
                    return Err(SceneGraphError::MissingEndpoint {
                        graph: self.id.clone(),
                        node: endpoint.clone(),
                    });
                }
            }
            if edge.src == edge.dst {
                return Err(SceneGraphError::SelfLoop {
                    graph: self.id.clone(),
                    node: edge.src.clone(),
                });
            }
            if !triples.insert((edge.src.as_str(), edge.role.as_str(), edge.dst.as_str())) {
                return Err(SceneGraphError::DuplicateEdge {
                    graph: self.id.clone(),
                    src: edge.src.clone(),
                    role: edge.role.clone(),
                    dst: edge.dst.clone(),
                });
            }
        }
        Ok(())
    }

    /// Validate and build the canonical indexed view.
    pub fn indexed(&self) -> Result<IndexedGraph, SceneGraphError> {
        self.validate()?;
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| self.nodes[a].id.cmp(&self.nodes[b].id));
        let node_ids: Vec<String> = order.iter().map(|&i| self.nodes[i].id.clone()).collect();
        let concepts: Vec<String> = order.iter().map(|&i| self.nodes[i].concept.clone()).collect();
        let pos: HashMap<&str, usize> = node_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut edges: Vec<(usize, String, usize)> = self
            .edges
            .iter()
            .map(|e| (pos[e.src.as_str()], e.role.clone(), pos[e.dst.as_str()]))
            .collect();
        edges.sort();
        Ok(IndexedGraph {
            node_ids,
            concepts,
            edges,
        })
    }

    /// Parse a single graph from JSON and validate it.
    pub fn from_json(text: &str) -> Result<SceneGraph, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scene graph serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat_on_keyboard() -> SceneGraph {
        SceneGraph::new("g1", "office")
            .with_node("n1", "cat")
            .with_node("n2", "keyboard")
            .with_edge("n1", "on", "n2")
    }

    #[test]
    fn round_trips_through_json() {
        let g = cat_on_keyboard();
        let parsed = SceneGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(parsed, g);
    }

    #[test]
    fn wire_format_field_names() {
        let json = r#"{"id":"g","class":"c","nodes":[{"id":"a","concept":"cat"}],"edges":[]}"#;
        let g = SceneGraph::from_json(json).unwrap();
        assert_eq!(g.nodes[0].concept, "cat");
    }

    #[test]
    fn validation_catches_missing_endpoint() {
        let g = SceneGraph::new("g", "c")
            .with_node("a", "cat")
            .with_edge("a", "on", "ghost");
        assert!(matches!(
            g.validate(),
            Err(SceneGraphError::MissingEndpoint { .. })
        ));
    }

    #[test]
    fn validation_catches_self_loop_and_duplicates() {
        let dup_node = SceneGraph::new("g", "c").with_node("a", "x").with_node("a", "y");
        assert!(matches!(
            dup_node.validate(),
            Err(SceneGraphError::DuplicateNodeId { .. })
        ));
        let self_loop = SceneGraph::new("g", "c").with_node("a", "x").with_edge("a", "r", "a");
        assert!(matches!(
            self_loop.validate(),
            Err(SceneGraphError::SelfLoop { .. })
        ));
        let dup_edge = cat_on_keyboard().with_edge("n1", "on", "n2");
        assert!(matches!(
            dup_edge.validate(),
            Err(SceneGraphError::DuplicateEdge { .. })
        ));
    }

    #[test]
    fn indexed_view_is_order_invariant() {
        let g = cat_on_keyboard();
        let mut shuffled = g.clone();
        shuffled.nodes.reverse();
        shuffled.edges.reverse();
        let a = g.indexed().unwrap();
        let b = shuffled.indexed().unwrap();
        assert_eq!(a.node_ids, b.node_ids);
        assert_eq!(a.concepts, b.concepts);
        assert_eq!(a.edges, b.edges);
    }

    #[test]
    fn isolated_nodes_and_neighbors() {
        let g = cat_on_keyboard().with_node("n3", "rug");
        let ix = g.indexed().unwrap();
        assert_eq!(ix.isolated_nodes().len(), 1);
        let neigh = ix.neighbor_sets();
        assert_eq!(neigh[0], vec![1]);
        assert_eq!(neigh[1], vec![0]);
        assert!(neigh[2].is_empty());
    }
}
