//! Edit scripts: the ordered, priced R/D/I operations that constitute a
//! counterfactual explanation.
//!
//! Scripts come from two places: set matchings (L1/L2, concept-level ops
//! only) and graph assignments (L3, node and edge ops). A structural script
//! can be applied to its source graph, which is how script soundness is
//! checked, and exports to DOT (green=insert, red=delete, blue=replace,
//! grey=context) and to line-oriented JSON.

use crate::cost::Cost;
use crate::scene::{SceneEdge, SceneGraph, SceneNode};
use crate::taxonomy::EditKind;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Endpoint of an inserted edge: either a node that already exists in the
/// source graph or one created by a node-insert op (named by its id in the
/// counterfactual graph).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum NodeRef {
    Existing(String),
    Inserted(String),
}

impl NodeRef {
    pub fn id(&self) -> &str {
        match self {
            NodeRef::Existing(id) | NodeRef::Inserted(id) => id,
        }
    }
}

/// One priced edit operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    ReplaceNode {
        node: String,
        from: String,
        to: String,
        cost: Cost,
    },
    DeleteNode {
        node: String,
        concept: String,
        cost: Cost,
    },
    InsertNode {
        node: String,
        concept: String,
        cost: Cost,
    },
    ReplaceEdge {
        src: String,
        dst: String,
        from: String,
        to: String,
        cost: Cost,
    },
    DeleteEdge {
        src: String,
        dst: String,
        role: String,
        cost: Cost,
    },
    InsertEdge {
        src: NodeRef,
        dst: NodeRef,
        role: String,
        cost: Cost,
    },
}

impl EditOp {
    pub fn cost(&self) -> Cost {
        match self {
            EditOp::ReplaceNode { cost, .. }
            | EditOp::DeleteNode { cost, .. }
            | EditOp::InsertNode { cost, .. }
            | EditOp::ReplaceEdge { cost, .. }
            | EditOp::DeleteEdge { cost, .. }
            | EditOp::InsertEdge { cost, .. } => *cost,
        }
    }

    pub fn kind(&self) -> EditKind {
        match self {
            EditOp::ReplaceNode { .. } | EditOp::ReplaceEdge { .. } => EditKind::Replace,
            EditOp::DeleteNode { .. } | EditOp::DeleteEdge { .. } => EditKind::Delete,
            EditOp::InsertNode { .. } | EditOp::InsertEdge { .. } => EditKind::Insert,
        }
    }

    pub fn is_node_op(&self) -> bool {
        matches!(
            self,
            EditOp::ReplaceNode { .. } | EditOp::DeleteNode { .. } | EditOp::InsertNode { .. }
        )
    }

    fn sort_key(&self) -> (u8, String, String, String) {
        match self {
            EditOp::ReplaceNode { node, from, to, .. } => {
                (0, node.clone(), from.clone(), to.clone())
            }
            EditOp::DeleteNode { node, concept, .. } => (1, node.clone(), concept.clone(), String::new()),
            EditOp::InsertNode { node, concept, .. } => (2, node.clone(), concept.clone(), String::new()),
            EditOp::ReplaceEdge { src, dst, from, .. } => (3, src.clone(), dst.clone(), from.clone()),
            EditOp::DeleteEdge { src, dst, role, .. } => (4, src.clone(), dst.clone(), role.clone()),
            EditOp::InsertEdge { src, dst, role, .. } => {
                (5, src.id().to_string(), dst.id().to_string(), role.clone())
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("script refers to missing node {node}")]
    MissingNode { node: String },
    #[error("script refers to missing edge {src} -{role}-> {dst}")]
    MissingEdge {
        src: String,
        role: String,
        dst: String,
    },
    #[error("node {node} still has incident edges when deleted")]
    DanglingEdges { node: String },
    #[error("node {node} has concept {found}, expected {expected}")]
    ConceptMismatch {
        node: String,
        expected: String,
        found: String,
    },
    #[error("edge {src} -{role}-> {dst} already present")]
    EdgeExists {
        src: String,
        role: String,
        dst: String,
    },
}

/// An ordered list of priced edit operations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

impl EditScript {
    pub fn new(mut ops: Vec<EditOp>) -> EditScript {
        ops.sort_by_key(|op| op.sort_key());
        EditScript { ops }
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn total_cost(&self) -> Cost {
        self.ops.iter().map(EditOp::cost).sum()
    }

    pub fn node_edit_count(&self) -> usize {
        self.ops.iter().filter(|op| op.is_node_op()).count()
    }

    pub fn edge_edit_count(&self) -> usize {
        self.ops.len() - self.node_edit_count()
    }

    /// Apply the script to its source graph, producing the counterfactual
    /// graph. Ops execute in dependency order regardless of storage order:
    /// edge replaces/deletes, node deletes, node replaces, node inserts,
    /// edge inserts.
    pub fn apply(&self, source: &SceneGraph) -> Result<SceneGraph, ScriptError> {
        let mut concepts: HashMap<String, String> = source
            .nodes
            .iter()
            .map(|n| (n.id.clone(), n.concept.clone()))
            .collect();
        let mut edges: Vec<SceneEdge> = source.edges.clone();

        let find_edge = |edges: &[SceneEdge], src: &str, role: &str, dst: &str| {
            edges
                .iter()
                .position(|e| e.src == src && e.role == role && e.dst == dst)
        };

        for op in &self.ops {
            if let EditOp::ReplaceEdge { src, dst, from, to, .. } = op {
                let pos = find_edge(&edges, src, from, dst).ok_or_else(|| ScriptError::MissingEdge {
                    src: src.clone(),
                    role: from.clone(),
                    dst: dst.clone(),
                })?;
                edges[pos].role = to.clone();
            }
        }
        for op in &self.ops {
            if let EditOp::DeleteEdge { src, dst, role, .. } = op {
                let pos = find_edge(&edges, src, role, dst).ok_or_else(|| ScriptError::MissingEdge {
                    src: src.clone(),
                    role: role.clone(),
                    dst: dst.clone(),
                })?;
                edges.remove(pos);
            }
        }
        for op in &self.ops {
            if let EditOp::DeleteNode { node, .. } = op {
                if concepts.remove(node).is_none() {
                    return Err(ScriptError::MissingNode { node: node.clone() });
                }
                if edges.iter().any(|e| e.src == *node || e.dst == *node) {
                    return Err(ScriptError::DanglingEdges { node: node.clone() });
                }
            }
        }
        for op in &self.ops {
            if let EditOp::ReplaceNode { node, from, to, .. } = op {
                let concept = concepts
                    .get_mut(node)
                    .ok_or_else(|| ScriptError::MissingNode { node: node.clone() })?;
                if concept != from {
                    return Err(ScriptError::ConceptMismatch {
                        node: node.clone(),
                        expected: from.clone(),
                        found: concept.clone(),
                    });
                }
                *concept = to.clone();
            }
        }
        // Inserted nodes take their counterfactual-graph id, renamed with
        // apostrophes on collision with surviving source ids.
        let mut inserted_names: HashMap<String, String> = HashMap::new();
        for op in &self.ops {
            if let EditOp::InsertNode { node, concept, .. } = op {
                let mut name = node.clone();
                while concepts.contains_key(&name) {
                    name.push('\'');
                }
                concepts.insert(name.clone(), concept.clone());
                inserted_names.insert(node.clone(), name);
            }
        }
        for op in &self.ops {
            if let EditOp::InsertEdge { src, dst, role, .. } = op {
                let resolve = |r: &NodeRef| -> Result<String, ScriptError> {
                    let name = match r {
                        NodeRef::Existing(id) => id.clone(),
                        NodeRef::Inserted(id) => inserted_names
                            .get(id)
                            .cloned()
                            .ok_or_else(|| ScriptError::MissingNode { node: id.clone() })?,
                    };
                    if !concepts.contains_key(&name) {
                        return Err(ScriptError::MissingNode { node: name });
                    }
                    Ok(name)
                };
                let s = resolve(src)?;
                let d = resolve(dst)?;
                if find_edge(&edges, &s, role, &d).is_some() {
                    return Err(ScriptError::EdgeExists {
                        src: s,
                        role: role.clone(),
                        dst: d,
                    });
                }
                edges.push(SceneEdge {
                    src: s,
                    role: role.clone(),
                    dst: d,
                });
            }
        }

        let mut nodes: Vec<SceneNode> = concepts
            .into_iter()
            .map(|(id, concept)| SceneNode { id, concept })
            .collect();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| (&a.src, &a.role, &a.dst).cmp(&(&b.src, &b.role, &b.dst)));
        Ok(SceneGraph {
            id: format!("{}+edits", source.id),
            class: source.class.clone(),
            nodes,
            edges,
        })
    }

    /// Render the script against its source graph as DOT. Unedited nodes
    /// and edges appear as grey context.
    pub fn to_dot(&self, source: &SceneGraph) -> String {
        let mut replaced_nodes: HashMap<&str, (&str, &str)> = HashMap::new();
        let mut deleted_nodes: HashMap<&str, &str> = HashMap::new();
        let mut replaced_edges: HashMap<(&str, &str, &str), &str> = HashMap::new();
        let mut deleted_edges: HashMap<(&str, &str, &str), ()> = HashMap::new();
        for op in &self.ops {
            match op {
                EditOp::ReplaceNode { node, from, to, .. } => {
                    replaced_nodes.insert(node, (from, to));
                }
                EditOp::DeleteNode { node, concept, .. } => {
                    deleted_nodes.insert(node, concept);
                }
                EditOp::ReplaceEdge { src, dst, from, to, .. } => {
                    replaced_edges.insert((src, from, dst), to);
                }
                EditOp::DeleteEdge { src, dst, role, .. } => {
                    deleted_edges.insert((src, role, dst), ());
                }
                _ => {}
            }
        }

        let mut out = String::new();
        out.push_str("digraph edits {\n");
        out.push_str("  rankdir=LR;\n");
        out.push_str("  node [style=filled, fontname=\"Helvetica\"];\n");

        let mut nodes: Vec<&SceneNode> = source.nodes.iter().collect();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        for node in nodes {
            let (label, color) = if let Some((from, to)) = replaced_nodes.get(node.id.as_str()) {
                (format!("{from} \u{2192} {to}"), "blue")
            } else if deleted_nodes.contains_key(node.id.as_str()) {
                (node.concept.clone(), "red")
            } else {
                (node.concept.clone(), "grey")
            };
            let _ = writeln!(out, "  {:?} [label={:?}, fillcolor={color}];", node.id, label);
        }
        for op in &self.ops {
            if let EditOp::InsertNode { node, concept, .. } = op {
                let _ = writeln!(out, "  {:?} [label={:?}, fillcolor=green];", format!("+{node}"), concept);
            }
        }

        let mut edges: Vec<&SceneEdge> = source.edges.iter().collect();
        edges.sort_by(|a, b| (&a.src, &a.role, &a.dst).cmp(&(&b.src, &b.role, &b.dst)));
        for edge in edges {
            let key = (edge.src.as_str(), edge.role.as_str(), edge.dst.as_str());
            let (label, color) = if let Some(to) = replaced_edges.get(&key) {
                (format!("{} \u{2192} {to}", edge.role), "blue")
            } else if deleted_edges.contains_key(&key) {
                (edge.role.clone(), "red")
            } else {
                (edge.role.clone(), "grey")
            };
            let _ = writeln!(
                out,
                "  {:?} -> {:?} [label={:?}, color={color}, fontcolor={color}];",
                edge.src, edge.dst, label
            );
        }
        for op in &self.ops {
            if let EditOp::InsertEdge { src, dst, role, .. } = op {
                let name = |r: &NodeRef| match r {
                    NodeRef::Existing(id) => id.clone(),
                    NodeRef::Inserted(id) => format!("+{id}"),
                };
                let _ = writeln!(
                    out,
                    "  {:?} -> {:?} [label={:?}, color=green, fontcolor=green];",
                    name(src),
                    name(dst),
                    role
                );
            }
        }
        out.push_str("}\n");
        out
    }

    /// One JSON record per op, newline-separated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for op in &self.ops {
            out.push_str(&serde_json::to_string(op).expect("edit op serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source() -> SceneGraph {
        SceneGraph::new("g", "office")
            .with_node("a", "cat")
            .with_node("b", "keyboard")
            .with_edge("a", "on", "b")
    }

    #[test]
    fn empty_script_is_identity() {
        let script = EditScript::default();
        let applied = script.apply(&source()).unwrap();
        assert_eq!(applied.nodes, source().nodes);
        assert_eq!(applied.edges, source().edges);
        assert_eq!(script.total_cost(), Cost::ZERO);
    }

    #[test]
    fn apply_runs_ops_in_dependency_order() {
        let script = EditScript::new(vec![
            EditOp::InsertEdge {
                src: NodeRef::Inserted("x".into()),
                dst: NodeRef::Existing("b".into()),
                role: "near".into(),
                cost: Cost::finite(1.0),
            },
            EditOp::DeleteNode {
                node: "a".into(),
                concept: "cat".into(),
                cost: Cost::finite(2.0),
            },
            EditOp::DeleteEdge {
                src: "a".into(),
                dst: "b".into(),
                role: "on".into(),
                cost: Cost::finite(1.0),
            },
            EditOp::InsertNode {
                node: "x".into(),
                concept: "dog".into(),
                cost: Cost::finite(2.0),
            },
        ]);
        let applied = script.apply(&source()).unwrap();
        assert_eq!(applied.node_count(), 2);
        assert_eq!(applied.edge_count(), 1);
        assert!(applied.nodes.iter().any(|n| n.concept == "dog"));
        assert_eq!(script.node_edit_count(), 2);
        assert_eq!(script.edge_edit_count(), 2);
        assert_eq!(script.total_cost(), Cost::finite(6.0));
    }

    #[test]
    fn deleting_node_with_live_edges_fails() {
        let script = EditScript::new(vec![EditOp::DeleteNode {
            node: "a".into(),
            concept: "cat".into(),
            cost: Cost::finite(2.0),
        }]);
        assert!(matches!(
            script.apply(&source()),
            Err(ScriptError::DanglingEdges { .. })
        ));
    }

    #[test]
    fn inserted_node_id_collision_gets_renamed() {
        let script = EditScript::new(vec![EditOp::InsertNode {
            node: "a".into(),
            concept: "dog".into(),
            cost: Cost::finite(2.0),
        }]);
        let applied = script.apply(&source()).unwrap();
        assert!(applied.nodes.iter().any(|n| n.id == "a'"));
    }

    #[test]
    fn dot_marks_ops_with_colors() {
        let script = EditScript::new(vec![
            EditOp::ReplaceNode {
                node: "a".into(),
                from: "cat".into(),
                to: "dog".into(),
                cost: Cost::finite(2.0),
            },
            EditOp::DeleteEdge {
                src: "a".into(),
                dst: "b".into(),
                role: "on".into(),
                cost: Cost::finite(1.0),
            },
        ]);
        let dot = script.to_dot(&source());
        assert!(dot.contains("fillcolor=blue"));
        assert!(dot.contains("color=red"));
        assert!(dot.contains("fillcolor=grey"));
    }

    #[test]
    fn json_lines_one_record_per_op() {
        let script = EditScript::new(vec![EditOp::DeleteNode {
            node: "a".into(),
            concept: "cat".into(),
            cost: Cost::finite(2.0),
        }]);
        let lines = script.to_json_lines();
        assert_eq!(lines.lines().count(), 1);
        assert!(lines.contains("\"op\":\"delete_node\""));
    }
}
