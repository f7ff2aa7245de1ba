//! Level-2 expressivity: roled-up concepts `∃r.C` and hierarchical
//! set-of-sets distances over exemplars.
//!
//! Rolling up turns each directed edge (s, r, o) into one exemplar element
//! pairing the source concept with the relational fact `∃r.o`. Isolated
//! nodes contribute nothing, which is exactly the blindness that separates
//! this tier from the structural one.

use crate::atomic::match_with_dummies;
use crate::cost::Cost;
use crate::rank::{sort_ranking, RankedCandidate};
use crate::scene::SceneGraph;
use crate::taxonomy::{Taxonomy, TaxonomyError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// An existential restriction `∃role.filler`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RoledConcept {
    pub role: String,
    pub filler: String,
}

impl fmt::Display for RoledConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\u{2203}{}.{}", self.role, self.filler)
    }
}

/// One relational fact of an exemplar: a source object paired with one of
/// its outgoing relations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExemplarElement {
    pub source: String,
    pub relation: RoledConcept,
}

impl fmt::Display for ExemplarElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\u{27e8}{}, {}\u{27e9}", self.source, self.relation)
    }
}

/// The L2 view of an instance: a bag of relational facts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub instance_id: String,
    pub class_label: String,
    /// Elements in canonical (sorted) order; one per graph edge.
    pub elements: Vec<ExemplarElement>,
}

impl Exemplar {
    pub fn new(instance_id: &str, class_label: &str, elements: Vec<ExemplarElement>) -> Exemplar {
        let mut elements = elements;
        elements.sort();
        Exemplar {
            instance_id: instance_id.to_string(),
            class_label: class_label.to_string(),
            elements,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Concept and role hierarchies used jointly by the relational and
/// structural tiers.
#[derive(Debug, Clone, Copy)]
pub struct Taxonomies<'a> {
    pub concepts: &'a Taxonomy,
    pub roles: &'a Taxonomy,
}

#[derive(Debug, Error)]
pub enum RelationalError {
    #[error("concept lookup failed: {0}")]
    Concept(TaxonomyError),
    #[error("role lookup failed: {0}")]
    Role(TaxonomyError),
    #[error("no eligible candidates: pool holds only instances of class {class}")]
    EmptyEligiblePool { class: String },
}

/// Derive the exemplar of a graph: one element per directed edge, isolated
/// nodes dropped. An edgeless graph yields an empty exemplar.
pub fn roll_up(graph: &SceneGraph) -> Exemplar {
    let concept_of = |id: &str| {
        graph
            .nodes
            .iter()
            .find(|n| n.id == id)
            .map(|n| n.concept.clone())
            .unwrap_or_default()
    };
    let elements = graph
        .edges
        .iter()
        .map(|e| ExemplarElement {
            source: concept_of(&e.src),
            relation: RoledConcept {
                role: e.role.clone(),
                filler: concept_of(&e.dst),
            },
        })
        .collect();
    Exemplar::new(&graph.id, &graph.class, elements)
}

/// Distance between two roled-up concepts: the set-edit distance between
/// their `{role, filler}` pairs, with roles priced by the role taxonomy,
/// fillers by the concept taxonomy, and cross-kind pairings infeasible so
/// the matching never mixes kinds.
pub fn role_distance(
    x: &RoledConcept,
    y: &RoledConcept,
    taxonomies: &Taxonomies,
) -> Result<Cost, RelationalError> {
    let rx = taxonomies.roles.resolve(&x.role).map_err(RelationalError::Role)?;
    let ry = taxonomies.roles.resolve(&y.role).map_err(RelationalError::Role)?;
    let fx = taxonomies
        .concepts
        .resolve(&x.filler)
        .map_err(RelationalError::Concept)?;
    let fy = taxonomies
        .concepts
        .resolve(&y.filler)
        .map_err(RelationalError::Concept)?;

    // Element 0 is the role, element 1 the filler, on both sides.
    let sub = |i: usize, j: usize| -> Cost {
        match (i, j) {
            (0, 0) => taxonomies.roles.distance_idx(rx, ry),
            (1, 1) => taxonomies.concepts.distance_idx(fx, fy),
            _ => Cost::Infinite,
        }
    };
    let del = |i: usize| -> Cost {
        if i == 0 {
            taxonomies.roles.deletion_cost_idx(rx)
        } else {
            taxonomies.concepts.deletion_cost_idx(fx)
        }
    };
    let ins = |j: usize| -> Cost {
        if j == 0 {
            taxonomies.roles.insertion_cost_idx(ry)
        } else {
            taxonomies.concepts.insertion_cost_idx(fy)
        }
    };
    let (_, total) = match_with_dummies(2, 2, sub, del, ins);
    Ok(total)
}

/// Full delete/insert price of one exemplar element: source plus role plus
/// filler depth costs.
pub fn element_dummy_cost(
    element: &ExemplarElement,
    taxonomies: &Taxonomies,
) -> Result<Cost, RelationalError> {
    let source = taxonomies
        .concepts
        .deletion_cost(&element.source)
        .map_err(RelationalError::Concept)?;
    let role = taxonomies
        .roles
        .deletion_cost(&element.relation.role)
        .map_err(RelationalError::Role)?;
    let filler = taxonomies
        .concepts
        .deletion_cost(&element.relation.filler)
        .map_err(RelationalError::Concept)?;
    Ok(source + role + filler)
}

/// A matched pair of exemplar elements; `None` marks a dummy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExemplarPair {
    pub left: Option<ExemplarElement>,
    pub right: Option<ExemplarElement>,
    pub cost: Cost,
}

/// Minimum-cost matching between two exemplars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExemplarMatching {
    pub pairs: Vec<ExemplarPair>,
    pub total_cost: Cost,
}

impl ExemplarMatching {
    pub fn is_feasible(&self) -> bool {
        self.total_cost.is_finite()
    }
}

/// Minimum-cost bipartite matching between two bags of relational facts.
/// An element pair costs the source-concept distance plus the roled-concept
/// distance; a dummy pairing costs the element's full delete/insert price.
pub fn exemplar_distance(
    e1: &Exemplar,
    e2: &Exemplar,
    taxonomies: &Taxonomies,
) -> Result<ExemplarMatching, RelationalError> {
    // Resolve everything up front so cost closures are infallible.
    let mut sub_costs = vec![Cost::ZERO; e1.len() * e2.len()];
    for (i, a) in e1.elements.iter().enumerate() {
        let src_a = taxonomies
            .concepts
            .resolve(&a.source)
            .map_err(RelationalError::Concept)?;
        for (j, b) in e2.elements.iter().enumerate() {
            let src_b = taxonomies
                .concepts
                .resolve(&b.source)
                .map_err(RelationalError::Concept)?;
            let source_cost = taxonomies.concepts.distance_idx(src_a, src_b);
            let relation_cost = role_distance(&a.relation, &b.relation, taxonomies)?;
            sub_costs[i * e2.len() + j] = source_cost + relation_cost;
        }
    }
    let del_costs: Vec<Cost> = e1
        .elements
        .iter()
        .map(|el| element_dummy_cost(el, taxonomies))
        .collect::<Result<_, _>>()?;
    let ins_costs: Vec<Cost> = e2
        .elements
        .iter()
        .map(|el| element_dummy_cost(el, taxonomies))
        .collect::<Result<_, _>>()?;

    let (pairs, total) = match_with_dummies(
        e1.len(),
        e2.len(),
        |i, j| sub_costs[i * e2.len() + j],
        |i| del_costs[i],
        |j| ins_costs[j],
    );
    let pairs = pairs
        .into_iter()
        .map(|(l, r, cost)| ExemplarPair {
            left: l.map(|i| e1.elements[i].clone()),
            right: r.map(|j| e2.elements[j].clone()),
            cost,
        })
        .collect();
    Ok(ExemplarMatching {
        pairs,
        total_cost: total,
    })
}

/// Rank different-class candidates by exemplar distance to the query.
pub fn retrieve_relational(
    query: &Exemplar,
    pool: &[Exemplar],
    taxonomies: &Taxonomies,
) -> Result<Vec<RankedCandidate>, RelationalError> {
    let eligible: Vec<&Exemplar> = pool
        .iter()
        .filter(|c| c.class_label != query.class_label)
        .collect();
    if eligible.is_empty() {
        return Err(RelationalError::EmptyEligiblePool {
            class: query.class_label.clone(),
        });
    }
    let mut ranking = eligible
        .par_iter()
        .map(|candidate| {
            exemplar_distance(query, candidate, taxonomies).map(|m| RankedCandidate {
                instance_id: candidate.instance_id.clone(),
                cost: m.total_cost,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    sort_ranking(&mut ranking);
    Ok(ranking)
}
