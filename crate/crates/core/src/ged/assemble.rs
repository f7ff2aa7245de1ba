//! Derive a full edit script from a node assignment.
//!
//! Node ops follow directly from the mapping. Edge ops are induced: an edge
//! survives only when both endpoints map to non-dummies and the image pair
//! carries a matching edge (a replace when the role differs); otherwise it
//! is deleted. Candidate edges without a priced counterpart become inserts.
//! Every edge is covered by exactly one op or survives untouched.

use super::{match_role_groups, resolve_graph, GedError, ResolvedGraph};
use crate::relational::Taxonomies;
use crate::scene::SceneGraph;
use crate::script::{EditOp, EditScript, NodeRef};
use std::collections::BTreeSet;

/// A full node matching with dummies: entry `i` maps the i-th node of the
/// source graph (in canonical id order) to a canonical node index of the
/// candidate graph, or to `None` for deletion. Candidate nodes not covered
/// are insertions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAssignment {
    pub node_map: Vec<Option<usize>>,
}

impl GraphAssignment {
    fn validate(&self, n1: usize, n2: usize) -> Result<(), GedError> {
        if self.node_map.len() != n1 {
            return Err(GedError::InconsistentAssignment {
                reason: format!("map covers {} of {} nodes", self.node_map.len(), n1),
            });
        }
        let mut used = vec![false; n2];
        for target in self.node_map.iter().flatten() {
            if *target >= n2 {
                return Err(GedError::InconsistentAssignment {
                    reason: format!("target index {target} out of range"),
                });
            }
            if used[*target] {
                return Err(GedError::InconsistentAssignment {
                    reason: format!("target index {target} used twice"),
                });
            }
            used[*target] = true;
        }
        Ok(())
    }
}

pub fn edit_script_from_assignment(
    g1: &SceneGraph,
    g2: &SceneGraph,
    assignment: &GraphAssignment,
    tx: &Taxonomies,
) -> Result<EditScript, GedError> {
    let r1 = resolve_graph(g1, tx)?;
    let r2 = resolve_graph(g2, tx)?;
    assignment.validate(r1.node_count(), r2.node_count())?;
    Ok(assemble(&r1, &r2, assignment, tx))
}

pub(crate) fn assemble(
    r1: &ResolvedGraph,
    r2: &ResolvedGraph,
    assignment: &GraphAssignment,
    tx: &Taxonomies,
) -> EditScript {
    let mut ops = Vec::new();
    let map = &assignment.node_map;

    // Inverse map: candidate node -> source node.
    let mut pre = vec![None; r2.node_count()];
    for (u, target) in map.iter().enumerate() {
        if let Some(v) = target {
            pre[*v] = Some(u);
        }
    }

    for (u, target) in map.iter().enumerate() {
        match target {
            Some(v) => {
                if r1.labels[u] != r2.labels[*v] {
                    let cost = tx.concepts.distance_idx(r1.labels[u], r2.labels[*v]);
                    if cost > crate::cost::Cost::ZERO {
                        ops.push(EditOp::ReplaceNode {
                            node: r1.ids[u].clone(),
                            from: r1.label_names[u].clone(),
                            to: r2.label_names[*v].clone(),
                            cost,
                        });
                    }
                }
            }
            None => ops.push(EditOp::DeleteNode {
                node: r1.ids[u].clone(),
                concept: r1.label_names[u].clone(),
                cost: tx.concepts.deletion_cost_idx(r1.labels[u]),
            }),
        }
    }
    for (v, source) in pre.iter().enumerate() {
        if source.is_none() {
            ops.push(EditOp::InsertNode {
                node: r2.ids[v].clone(),
                concept: r2.label_names[v].clone(),
                cost: tx.concepts.insertion_cost_idx(r2.labels[v]),
            });
        }
    }

    // Ordered source-node pairs that carry edges on either side.
    let mut pairs: BTreeSet<(usize, usize)> = r1.groups.keys().copied().collect();
    for &(w1, w2) in r2.groups.keys() {
        if let (Some(u1), Some(u2)) = (pre[w1], pre[w2]) {
            pairs.insert((u1, u2));
        }
    }

    for (u1, u2) in pairs {
        let left = r1.roles_between(u1, u2);
        let right: &[_] = match (map[u1], map[u2]) {
            (Some(v1), Some(v2)) => r2.roles_between(v1, v2),
            _ => &[],
        };
        let left_idx: Vec<_> = left.iter().map(|(idx, _)| *idx).collect();
        let right_idx: Vec<_> = right.iter().map(|(idx, _)| *idx).collect();
        let (matched, _) = match_role_groups(&left_idx, &right_idx, tx);
        for (l, r, cost) in matched {
            match (l, r) {
                (Some(i), Some(j)) => {
                    if left[i].1 != right[j].1 {
                        ops.push(EditOp::ReplaceEdge {
                            src: r1.ids[u1].clone(),
                            dst: r1.ids[u2].clone(),
                            from: left[i].1.clone(),
                            to: right[j].1.clone(),
                            cost,
                        });
                    }
                }
                (Some(i), None) => ops.push(EditOp::DeleteEdge {
                    src: r1.ids[u1].clone(),
                    dst: r1.ids[u2].clone(),
                    role: left[i].1.clone(),
                    cost,
                }),
                (None, Some(j)) => ops.push(EditOp::InsertEdge {
                    src: NodeRef::Existing(r1.ids[u1].clone()),
                    dst: NodeRef::Existing(r1.ids[u2].clone()),
                    role: right[j].1.clone(),
                    cost,
                }),
                (None, None) => {}
            }
        }
    }

    // Candidate edges touching an inserted node have no counterpart above.
    for (&(w1, w2), roles) in &r2.groups {
        if pre[w1].is_some() && pre[w2].is_some() {
            continue;
        }
        let endpoint = |w: usize| match pre[w] {
            Some(u) => NodeRef::Existing(r1.ids[u].clone()),
            None => NodeRef::Inserted(r2.ids[w].clone()),
        };
        for (role_idx, role_name) in roles {
            ops.push(EditOp::InsertEdge {
                src: endpoint(w1),
                dst: endpoint(w2),
                role: role_name.clone(),
                cost: tx.roles.insertion_cost_idx(*role_idx),
            });
        }
    }

    EditScript::new(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Cost;
    use crate::taxonomy::Taxonomy;

    fn taxonomies() -> (Taxonomy, Taxonomy) {
        let concepts = Taxonomy::builder()
            .edge("animal", "cat")
            .edge("animal", "dog")
            .edge("furniture", "table")
            .build()
            .unwrap();
        let roles = Taxonomy::flat(["on", "under"]).unwrap();
        (concepts, roles)
    }

    #[test]
    fn identity_assignment_yields_empty_script() {
        let (c, r) = taxonomies();
        let tx = Taxonomies {
            concepts: &c,
            roles: &r,
        };
        let g = SceneGraph::new("g", "x")
            .with_node("a", "cat")
            .with_node("b", "table")
            .with_edge("a", "on", "b");
        let assignment = GraphAssignment {
            node_map: vec![Some(0), Some(1)],
        };
        let script = edit_script_from_assignment(&g, &g, &assignment, &tx).unwrap();
        assert!(script.is_empty());
    }

    #[test]
    fn deleted_node_drags_incident_edges() {
        let (c, r) = taxonomies();
        let tx = Taxonomies {
            concepts: &c,
            roles: &r,
        };
        let g1 = SceneGraph::new("g1", "x")
            .with_node("a", "cat")
            .with_node("b", "table")
            .with_node("z", "dog")
            .with_edge("z", "on", "a")
            .with_edge("z", "under", "b");
        let g2 = SceneGraph::new("g2", "y")
            .with_node("a", "cat")
            .with_node("b", "table");
        // Canonical order of g1 nodes: a, b, z.
        let assignment = GraphAssignment {
            node_map: vec![Some(0), Some(1), None],
        };
        let script = edit_script_from_assignment(&g1, &g2, &assignment, &tx).unwrap();
        assert_eq!(script.node_edit_count(), 1);
        assert_eq!(script.edge_edit_count(), 2);
        assert!(script
            .ops
            .iter()
            .all(|op| matches!(op, EditOp::DeleteNode { .. } | EditOp::DeleteEdge { .. })));
    }

    #[test]
    fn inconsistent_assignment_rejected() {
        let (c, r) = taxonomies();
        let tx = Taxonomies {
            concepts: &c,
            roles: &r,
        };
        let g1 = SceneGraph::new("g1", "x")
            .with_node("a", "cat")
            .with_node("b", "dog");
        let g2 = SceneGraph::new("g2", "y").with_node("a", "cat");
        let doubled = GraphAssignment {
            node_map: vec![Some(0), Some(0)],
        };
        assert!(matches!(
            edit_script_from_assignment(&g1, &g2, &doubled, &tx),
            Err(GedError::InconsistentAssignment { .. })
        ));
        let short = GraphAssignment {
            node_map: vec![Some(0)],
        };
        assert!(matches!(
            edit_script_from_assignment(&g1, &g2, &short, &tx),
            Err(GedError::InconsistentAssignment { .. })
        ));
    }

    #[test]
    fn replace_costs_come_from_taxonomies() {
        let (c, r) = taxonomies();
        let tx = Taxonomies {
            concepts: &c,
            roles: &r,
        };
        let g1 = SceneGraph::new("g1", "x").with_node("a", "cat");
        let g2 = SceneGraph::new("g2", "y").with_node("a", "dog");
        let assignment = GraphAssignment {
            node_map: vec![Some(0)],
        };
        let script = edit_script_from_assignment(&g1, &g2, &assignment, &tx).unwrap();
        assert_eq!(script.total_cost(), Cost::finite(2.0));
    }
}
