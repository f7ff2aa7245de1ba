//! Level-1 expressivity: instances as unordered concept multisets, compared
//! by minimum-cost set-edit distance.
//!
//! The edit distance between two sets is a minimum-cost bipartite matching
//! over a square matrix padded with dummy rows/columns. Pairing an element
//! with a dummy prices its deletion (left side) or insertion (right side);
//! by default that price is the element's taxonomy depth cost, with an
//! optional constant-penalty override.

use crate::assignment::{self, CostMatrix};
use crate::cost::Cost;
use crate::rank::{sort_ranking, RankedCandidate};
use crate::scene::SceneGraph;
use crate::script::{EditOp, EditScript};
use crate::taxonomy::{Taxonomy, TaxonomyError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// An instance abstracted to a multiset of concepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptSet {
    pub instance_id: String,
    pub class_label: String,
    /// Concept ids in canonical (sorted) order; duplicates allowed since
    /// scenes repeat objects.
    pub elements: Vec<String>,
}

impl ConceptSet {
    pub fn new(instance_id: &str, class_label: &str, elements: Vec<String>) -> ConceptSet {
        let mut elements = elements;
        elements.sort();
        ConceptSet {
            instance_id: instance_id.to_string(),
            class_label: class_label.to_string(),
            elements,
        }
    }

    /// The L1 view of a scene graph: node concepts with all edges dropped.
    pub fn from_graph(graph: &SceneGraph) -> ConceptSet {
        ConceptSet::new(
            &graph.id,
            &graph.class,
            graph.nodes.iter().map(|n| n.concept.clone()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Price of pairing an element with a dummy in the matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DummyPenalty {
    /// The element's own delete/insert cost (taxonomy depth).
    DepthCost,
    /// A fixed constant for every element.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetEditConfig {
    pub dummy_penalty: DummyPenalty,
}

impl Default for SetEditConfig {
    fn default() -> Self {
        SetEditConfig {
            dummy_penalty: DummyPenalty::DepthCost,
        }
    }
}

/// One pair of a full matching; `None` marks a dummy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub left: Option<String>,
    pub right: Option<String>,
    pub cost: Cost,
}

/// A full minimum-cost matching between two sets. An infinite total is the
/// distinguished infeasible outcome: some required edit has no finite cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetMatching {
    pub pairs: Vec<MatchedPair>,
    pub total_cost: Cost,
}

impl SetMatching {
    pub fn is_feasible(&self) -> bool {
        self.total_cost.is_finite()
    }
}

#[derive(Debug, Error)]
pub enum AtomicError {
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("no eligible candidates: pool holds only instances of class {class}")]
    EmptyEligiblePool { class: String },
}

/// Index pairs of a full matching; `None` marks a dummy.
pub(crate) type IndexPairs = Vec<(Option<usize>, Option<usize>, Cost)>;

/// Minimum-cost full matching over indexed elements with dummy padding.
/// Shared by the L1 set metric, the L2 exemplar metric, and role distances.
pub(crate) fn match_with_dummies(
    n_left: usize,
    n_right: usize,
    sub: impl Fn(usize, usize) -> Cost,
    del: impl Fn(usize) -> Cost,
    ins: impl Fn(usize) -> Cost,
) -> (IndexPairs, Cost) {
    let size = n_left + n_right;
    let matrix = CostMatrix::from_fn(size, |i, j| {
        match (i < n_left, j < n_right) {
            (true, true) => sub(i, j),
            (true, false) => {
                if j - n_right == i {
                    del(i)
                } else {
                    Cost::Infinite
                }
            }
            (false, true) => {
                if i - n_left == j {
                    ins(j)
                } else {
                    Cost::Infinite
                }
            }
            (false, false) => Cost::ZERO,
        }
    });
    let solved = assignment::solve(&matrix);
    let mut pairs = Vec::new();
    for (i, &j) in solved.row_to_col.iter().enumerate() {
        let cost = matrix.get(i, j);
        match (i < n_left, j < n_right) {
            (true, true) => pairs.push((Some(i), Some(j), cost)),
            (true, false) => pairs.push((Some(i), None, cost)),
            (false, true) => pairs.push((None, Some(j), cost)),
            (false, false) => {}
        }
    }
    (pairs, solved.total)
}

/// Minimum-cost set-edit distance between two concept multisets.
pub fn set_edit_distance(
    s1: &ConceptSet,
    s2: &ConceptSet,
    taxonomy: &Taxonomy,
    config: &SetEditConfig,
) -> Result<SetMatching, AtomicError> {
    let left: Vec<_> = s1
        .elements
        .iter()
        .map(|id| taxonomy.resolve(id))
        .collect::<Result<_, _>>()?;
    let right: Vec<_> = s2
        .elements
        .iter()
        .map(|id| taxonomy.resolve(id))
        .collect::<Result<_, _>>()?;

    let dummy = |idx| match config.dummy_penalty {
        DummyPenalty::DepthCost => taxonomy.deletion_cost_idx(idx),
        DummyPenalty::Constant(c) => Cost::finite(c),
    };
    let (pairs, total) = match_with_dummies(
        left.len(),
        right.len(),
        |i, j| taxonomy.distance_idx(left[i], right[j]),
        |i| dummy(left[i]),
        |j| dummy(right[j]),
    );

    let pairs = pairs
        .into_iter()
        .map(|(l, r, cost)| MatchedPair {
            left: l.map(|i| s1.elements[i].clone()),
            right: r.map(|j| s2.elements[j].clone()),
            cost,
        })
        .collect();
    Ok(SetMatching {
        pairs,
        total_cost: total,
    })
}

/// Turn a finite matching into an explanation script: costly matched pairs
/// become replaces, dummy pairs become deletes/inserts, free pairs vanish.
pub fn atomic_edit_script(matching: &SetMatching) -> EditScript {
    assert!(
        matching.is_feasible(),
        "cannot script an infeasible matching"
    );
    let mut occurrence: HashMap<String, usize> = HashMap::new();
    let mut name = |concept: &str| -> String {
        let count = occurrence.entry(concept.to_string()).or_insert(0);
        *count += 1;
        if *count == 1 {
            concept.to_string()
        } else {
            format!("{concept}#{count}")
        }
    };
    let mut ops = Vec::new();
    for pair in &matching.pairs {
        match (&pair.left, &pair.right) {
            (Some(left), Some(right)) => {
                if pair.cost > Cost::ZERO {
                    ops.push(EditOp::ReplaceNode {
                        node: name(left),
                        from: left.clone(),
                        to: right.clone(),
                        cost: pair.cost,
                    });
                }
            }
            (Some(left), None) => ops.push(EditOp::DeleteNode {
                node: name(left),
                concept: left.clone(),
                cost: pair.cost,
            }),
            (None, Some(right)) => ops.push(EditOp::InsertNode {
                node: name(right),
                concept: right.clone(),
                cost: pair.cost,
            }),
            (None, None) => {}
        }
    }
    EditScript::new(ops)
}

/// Rank different-class candidates by set-edit distance to the query.
pub fn retrieve_atomic(
    query: &ConceptSet,
    pool: &[ConceptSet],
    taxonomy: &Taxonomy,
    config: &SetEditConfig,
) -> Result<Vec<RankedCandidate>, AtomicError> {
    let eligible: Vec<&ConceptSet> = pool
        .iter()
        .filter(|c| c.class_label != query.class_label)
        .collect();
    if eligible.is_empty() {
        return Err(AtomicError::EmptyEligiblePool {
            class: query.class_label.clone(),
        });
    }
    let mut ranking = eligible
        .par_iter()
        .map(|candidate| {
            set_edit_distance(query, candidate, taxonomy, config).map(|m| RankedCandidate {
                instance_id: candidate.instance_id.clone(),
                cost: m.total_cost,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    sort_ranking(&mut ranking);
    Ok(ranking)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn animals() -> Taxonomy {
        Taxonomy::builder()
            .edge("animal", "cat")
            .edge("animal", "dog")
            .build()
            .unwrap()
    }

    fn set(id: &str, class: &str, elems: &[&str]) -> ConceptSet {
        ConceptSet::new(id, class, elems.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn identical_sets_cost_zero() {
        let t = animals();
        let s = set("a", "x", &["cat"]);
        let m = set_edit_distance(&s, &s, &t, &SetEditConfig::default()).unwrap();
        assert_eq!(m.total_cost, Cost::ZERO);
        assert!(atomic_edit_script(&m).is_empty());
    }

    #[test]
    fn singleton_substitution_prices_the_path() {
        let t = animals();
        let m = set_edit_distance(
            &set("a", "x", &["cat"]),
            &set("b", "y", &["dog"]),
            &t,
            &SetEditConfig::default(),
        )
        .unwrap();
        assert_eq!(m.total_cost, Cost::finite(2.0));
        let script = atomic_edit_script(&m);
        assert_eq!(script.ops.len(), 1);
        assert!(matches!(
            &script.ops[0],
            EditOp::ReplaceNode { from, to, .. } if from == "cat" && to == "dog"
        ));
    }

    #[test]
    fn surplus_element_is_deleted() {
        let t = animals();
        let m = set_edit_distance(
            &set("a", "x", &["cat", "dog"]),
            &set("b", "y", &["dog"]),
            &t,
            &SetEditConfig::default(),
        )
        .unwrap();
        assert_eq!(m.total_cost, Cost::finite(2.0));
        let script = atomic_edit_script(&m);
        assert_eq!(script.ops.len(), 1);
        assert!(matches!(
            &script.ops[0],
            EditOp::DeleteNode { concept, cost, .. } if concept == "cat" && *cost == Cost::finite(2.0)
        ));
    }

    #[test]
    fn constant_dummy_penalty_override() {
        let t = animals();
        let cfg = SetEditConfig {
            dummy_penalty: DummyPenalty::Constant(0.5),
        };
        let m = set_edit_distance(
            &set("a", "x", &["cat", "dog"]),
            &set("b", "y", &["dog"]),
            &t,
            &cfg,
        )
        .unwrap();
        assert_eq!(m.total_cost, Cost::finite(0.5));
    }

    #[test]
    fn infeasible_matching_is_distinguished() {
        let t = Taxonomy::builder()
            .edge(crate::taxonomy::TOP_ID, "cat")
            .edge("island", "palm")
            .build()
            .unwrap();
        // palm is disconnected from ⊤: deleting it is infeasible.
        let m = set_edit_distance(
            &set("a", "x", &["palm"]),
            &set("b", "y", &[]),
            &t,
            &SetEditConfig::default(),
        )
        .unwrap();
        assert!(!m.is_feasible());
    }

    #[test]
    fn retrieval_ranks_identical_candidate_first() {
        let t = animals();
        let query = set("q", "x", &["cat"]);
        let pool = vec![set("p1", "y", &["cat"]), set("p2", "y", &["dog"])];
        let ranking = retrieve_atomic(&query, &pool, &t, &SetEditConfig::default()).unwrap();
        assert_eq!(ranking[0].instance_id, "p1");
        assert_eq!(ranking[0].cost, Cost::ZERO);
        assert_eq!(ranking[1].cost, Cost::finite(2.0));
    }

    #[test]
    fn same_class_pool_is_empty_error() {
        let t = animals();
        let query = set("q", "x", &["cat"]);
        let pool = vec![set("p1", "x", &["dog"])];
        assert!(matches!(
            retrieve_atomic(&query, &pool, &t, &SetEditConfig::default()),
            Err(AtomicError::EmptyEligiblePool { .. })
        ));
    }

    #[test]
    fn from_graph_drops_edges() {
        let g = SceneGraph::new("g", "c")
            .with_node("n1", "dog")
            .with_node("n2", "cat")
            .with_edge("n1", "near", "n2");
        let s = ConceptSet::from_graph(&g);
        assert_eq!(s.elements, vec!["cat".to_string(), "dog".to_string()]);
    }
}
