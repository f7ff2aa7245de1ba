//! GED approximation by reduction to a single linear assignment problem.
//!
//! The (|V1|+|V2|)-square matrix prices each node mapping together with half
//! of its incident-edge implications: substitution cells add a nested small
//! assignment between the incident role lists (out and in separately, so
//! direction is respected), deletion/insertion cells add half the incident
//! delete/insert mass. Halving splits each edge between its two endpoint
//! mappings. The raw LAP objective is never reported: the chosen assignment
//! is expanded into a full edit script and re-priced, so the returned value
//! is a genuine edit-path cost and an upper bound on the exact distance.

use super::assemble::{assemble, GraphAssignment};
use super::{match_role_groups, resolve_graph, GedError, GedMode, GedResult, ResolvedGraph};
use crate::atomic::match_with_dummies;
use crate::cost::Cost;
use crate::relational::Taxonomies;
use crate::scene::SceneGraph;
use crate::taxonomy::ConceptIdx;

pub fn approx_ged_bipartite(
    g1: &SceneGraph,
    g2: &SceneGraph,
    tx: &Taxonomies,
) -> Result<GedResult, GedError> {
    let r1 = resolve_graph(g1, tx)?;
    let r2 = resolve_graph(g2, tx)?;
    let assignment = lap_assignment(&r1, &r2, tx);
    let script = assemble(&r1, &r2, &assignment, tx);
    Ok(GedResult {
        cost: script.total_cost(),
        script,
        mode: GedMode::Approximate,
    })
}

/// Solve the node-mapping LAP and return the induced assignment.
pub(crate) fn lap_assignment(
    r1: &ResolvedGraph,
    r2: &ResolvedGraph,
    tx: &Taxonomies,
) -> GraphAssignment {
    let m = r1.node_count();
    let n = r2.node_count();

    let incident_mass = |roles: &[Vec<ConceptIdx>], node: usize| -> Cost {
        roles[node]
            .iter()
            .map(|idx| tx.roles.deletion_cost_idx(*idx))
            .sum()
    };

    let sub = |i: usize, j: usize| -> Cost {
        let node = tx.concepts.distance_idx(r1.labels[i], r2.labels[j]);
        let out = match_role_groups(&r1.out_roles[i], &r2.out_roles[j], tx).1;
        let inn = match_role_groups(&r1.in_roles[i], &r2.in_roles[j], tx).1;
        node + (out + inn).scale(0.5)
    };
    let del = |i: usize| -> Cost {
        tx.concepts.deletion_cost_idx(r1.labels[i])
            + (incident_mass(&r1.out_roles, i) + incident_mass(&r1.in_roles, i)).scale(0.5)
    };
    let ins = |j: usize| -> Cost {
        tx.concepts.insertion_cost_idx(r2.labels[j])
            + (incident_mass(&r2.out_roles, j) + incident_mass(&r2.in_roles, j)).scale(0.5)
    };

    let (pairs, _) = match_with_dummies(m, n, sub, del, ins);
    let mut node_map = vec![None; m];
    for (left, right, _) in pairs {
        if let Some(i) = left {
            node_map[i] = right;
        }
    }
    GraphAssignment { node_map }
}
