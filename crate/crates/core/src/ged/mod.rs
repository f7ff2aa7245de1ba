//! Level-3 expressivity: Graph Edit Distance over scene graphs.
//!
//! Two solvers share one cost model. [`exact_ged`] runs a best-first search
//! over partial node assignments with an admissible lower bound and is
//! capped at small graphs; [`approx_ged_bipartite`] reduces the problem to
//! a single cubic-time linear assignment over node mappings. Both derive a
//! full edit script from the chosen assignment and report the re-priced
//! script cost, so the approximate value is always a true edit-path cost
//! and therefore an upper bound on the exact distance.
//!
//! Cost model: node replace = concept distance, node delete/insert =
//! concept depth cost, edge replace = role distance, edge delete/insert =
//! role depth cost. Edges are directed; reversing an edge is a delete plus
//! an insert. Parallel edges between a node pair are matched per direction
//! by a nested small assignment over their roles.

mod approx;
mod assemble;
mod exact;
mod iso;
pub mod synthetic;

pub use approx::approx_ged_bipartite;
pub use assemble::{edit_script_from_assignment, GraphAssignment};
pub use exact::exact_ged;
pub use iso::isomorphic;

use crate::atomic::match_with_dummies;
use crate::cost::Cost;
use crate::relational::Taxonomies;
use crate::scene::{SceneGraph, SceneGraphError};
use crate::script::EditScript;
use crate::taxonomy::ConceptIdx;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GedMode {
    Exact,
    Approximate,
}

/// A solved graph comparison: total cost, the explaining script, and which
/// solver produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GedResult {
    pub cost: Cost,
    pub script: EditScript,
    pub mode: GedMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GedConfig {
    /// Maximum node count per graph accepted by the exact solver.
    pub exact_cap: usize,
}

impl Default for GedConfig {
    fn default() -> Self {
        GedConfig { exact_cap: 8 }
    }
}

#[derive(Debug, Error)]
pub enum GedError {
    #[error(transparent)]
    Scene(#[from] SceneGraphError),
    #[error("graph {graph}: unknown concept {id}")]
    UnknownConcept { graph: String, id: String },
    #[error("graph {graph}: unknown role {id}")]
    UnknownRole { graph: String, id: String },
    #[error(
        "graph {graph} has {nodes} nodes, above the exact-solver cap of {cap}; use approximate mode"
    )]
    ExactCapExceeded {
        graph: String,
        nodes: usize,
        cap: usize,
    },
    #[error("inconsistent assignment: {reason}")]
    InconsistentAssignment { reason: String },
    #[error("no eligible candidates: pool holds only instances of class {class}")]
    EmptyEligiblePool { class: String },
    #[error("taxonomy has no atomic leaf concepts to draw labels from")]
    EmptyTaxonomy,
}

/// A scene graph resolved against the taxonomies, nodes in canonical order.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedGraph {
    pub ids: Vec<String>,
    pub labels: Vec<ConceptIdx>,
    pub label_names: Vec<String>,
    /// Ordered node pair -> role indices of the parallel edges, roles
    /// sorted by name for determinism.
    pub groups: BTreeMap<(usize, usize), Vec<(ConceptIdx, String)>>,
    /// Outgoing / incoming role indices per node, sorted by name.
    pub out_roles: Vec<Vec<ConceptIdx>>,
    pub in_roles: Vec<Vec<ConceptIdx>>,
}

pub(crate) fn resolve_graph(
    graph: &SceneGraph,
    tx: &Taxonomies,
) -> Result<ResolvedGraph, GedError> {
    let indexed = graph.indexed()?;
    let labels: Vec<ConceptIdx> = indexed
        .concepts
        .iter()
        .map(|c| {
            tx.concepts.resolve(c).map_err(|_| GedError::UnknownConcept {
                graph: graph.id.clone(),
                id: c.clone(),
            })
        })
        .collect::<Result<_, _>>()?;
    let n = indexed.node_count();
    let mut groups: BTreeMap<(usize, usize), Vec<(ConceptIdx, String)>> = BTreeMap::new();
    let mut out_roles = vec![Vec::new(); n];
    let mut in_roles = vec![Vec::new(); n];
    for (src, role, dst) in &indexed.edges {
        let role_idx = tx.roles.resolve(role).map_err(|_| GedError::UnknownRole {
            graph: graph.id.clone(),
            id: role.clone(),
        })?;
        groups
            .entry((*src, *dst))
            .or_default()
            .push((role_idx, role.clone()));
        out_roles[*src].push((role.clone(), role_idx));
        in_roles[*dst].push((role.clone(), role_idx));
    }
    for roles in groups.values_mut() {
        roles.sort_by(|a, b| a.1.cmp(&b.1));
    }
    let tidy = |mut v: Vec<(String, ConceptIdx)>| -> Vec<ConceptIdx> {
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v.into_iter().map(|(_, idx)| idx).collect()
    };
    Ok(ResolvedGraph {
        ids: indexed.node_ids,
        label_names: indexed.concepts,
        labels,
        groups,
        out_roles: out_roles.into_iter().map(tidy).collect(),
        in_roles: in_roles.into_iter().map(tidy).collect(),
    })
}

impl ResolvedGraph {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn roles_between(&self, src: usize, dst: usize) -> &[(ConceptIdx, String)] {
        self.groups
            .get(&(src, dst))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Optimal matching between two parallel-edge role groups: substitutions
/// priced by role distance, dummies by role depth cost.
pub(crate) fn match_role_groups(
    left: &[ConceptIdx],
    right: &[ConceptIdx],
    tx: &Taxonomies,
) -> (crate::atomic::IndexPairs, Cost) {
    match_with_dummies(
        left.len(),
        right.len(),
        |i, j| tx.roles.distance_idx(left[i], right[j]),
        |i| tx.roles.deletion_cost_idx(left[i]),
        |j| tx.roles.insertion_cost_idx(right[j]),
    )
}

/// Compute GED in the requested mode.
pub fn ged(
    g1: &SceneGraph,
    g2: &SceneGraph,
    tx: &Taxonomies,
    mode: GedMode,
    config: &GedConfig,
) -> Result<GedResult, GedError> {
    match mode {
        GedMode::Exact => exact_ged(g1, g2, tx, config),
        GedMode::Approximate => approx_ged_bipartite(g1, g2, tx),
    }
}

/// Rank every different-class candidate by GED to the query. This is the
/// ground-truth ranker that embedding engines are trained against and
/// evaluated with.
pub fn retrieve_structural_exhaustive(
    query: &SceneGraph,
    pool: &[SceneGraph],
    tx: &Taxonomies,
    mode: GedMode,
    config: &GedConfig,
) -> Result<Vec<(String, GedResult)>, GedError> {
    let eligible: Vec<&SceneGraph> = pool.iter().filter(|c| c.class != query.class).collect();
    if eligible.is_empty() {
        return Err(GedError::EmptyEligiblePool {
            class: query.class.clone(),
        });
    }
    let mut results = eligible
        .par_iter()
        .map(|candidate| {
            ged(query, candidate, tx, mode, config).map(|r| (candidate.id.clone(), r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    results.sort_by(|a, b| a.1.cost.cmp(&b.1.cost).then_with(|| a.0.cmp(&b.0)));
    Ok(results)
}
