//! Property tests for the distance primitives.

use ccf::cost::Cost;
use ccf::relational::{exemplar_distance, roll_up, Taxonomies};
use ccf::scene::SceneGraph;
use ccf::taxonomy::{DistanceAlgo, Taxonomy};
use proptest::prelude::*;

/// Random tree taxonomy encoded as a parent list: node i>0 hangs off
/// parents[i-1] % i. Unit weights unless `weights` supplies others.
fn tree_taxonomy(parents: &[usize], weights: Option<&[f64]>) -> Taxonomy {
    let mut builder = Taxonomy::builder();
    for (i, p) in parents.iter().enumerate() {
        let child = i + 1;
        let parent = p % child;
        match weights {
            Some(w) => {
                builder =
                    builder.weighted_edge(&format!("c{parent}"), &format!("c{child}"), w[i]);
            }
            None => builder = builder.edge(&format!("c{parent}"), &format!("c{child}")),
        }
    }
    builder.build().unwrap()
}

proptest! {
    #[test]
    fn distance_is_a_metric_on_trees(
        parents in prop::collection::vec(0usize..100, 1..15),
        picks in prop::collection::vec(0usize..100, 3),
    ) {
        let t = tree_taxonomy(&parents, None);
        let n = parents.len() + 1;
        let a = format!("c{}", picks[0] % n);
        let b = format!("c{}", picks[1] % n);
        let c = format!("c{}", picks[2] % n);

        let d = |x: &str, y: &str| t.concept_distance(x, y).unwrap().expect_finite();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn weighted_distance_is_a_metric(
        parents in prop::collection::vec(0usize..100, 1..12),
        raw_weights in prop::collection::vec(0.0f64..5.0, 11),
        picks in prop::collection::vec(0usize..100, 3),
    ) {
        let weights: Vec<f64> = raw_weights.iter().take(parents.len()).copied().collect();
        prop_assume!(weights.len() == parents.len());
        let t = tree_taxonomy(&parents, Some(&weights));
        let n = parents.len() + 1;
        let a = format!("c{}", picks[0] % n);
        let b = format!("c{}", picks[1] % n);
        let c = format!("c{}", picks[2] % n);

        let d = |x: &str, y: &str| t.concept_distance(x, y).unwrap().expect_finite();
        prop_assert_eq!(d(&a, &a), 0.0);
        // Real-valued weights accumulate in opposite orders along the two
        // directions, so symmetry holds up to float rounding.
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-9);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn bfs_equals_dijkstra_on_unit_weights(
        parents in prop::collection::vec(0usize..100, 1..15),
    ) {
        let t = tree_taxonomy(&parents, None);
        let ids: Vec<String> = t.concepts().map(|c| c.id.clone()).collect();
        for a in &ids {
            for b in &ids {
                prop_assert_eq!(
                    t.distance_with(a, b, DistanceAlgo::Bfs).unwrap(),
                    t.distance_with(a, b, DistanceAlgo::Dijkstra).unwrap()
                );
            }
        }
    }
}

#[test]
fn exemplar_distance_ignores_graph_ordering() {
    let concepts = Taxonomy::builder()
        .edge("animal", "cat")
        .edge("animal", "dog")
        .edge("furniture", "table")
        .build()
        .unwrap();
    let roles = Taxonomy::flat(["on", "near"]).unwrap();
    let tx = Taxonomies {
        concepts: &concepts,
        roles: &roles,
    };
    let g1 = SceneGraph::new("g1", "x")
        .with_node("a", "cat")
        .with_node("b", "table")
        .with_node("c", "dog")
        .with_edge("a", "on", "b")
        .with_edge("c", "near", "a");
    let g2 = SceneGraph::new("g2", "y")
        .with_node("a", "dog")
        .with_node("b", "table")
        .with_edge("a", "on", "b");
    let base = exemplar_distance(&roll_up(&g1), &roll_up(&g2), &tx)
        .unwrap()
        .total_cost;

    let mut reordered = g1.clone();
    reordered.nodes.reverse();
    reordered.edges.reverse();
    let shuffled = exemplar_distance(&roll_up(&reordered), &roll_up(&g2), &tx)
        .unwrap()
        .total_cost;
    assert_eq!(base, shuffled);
    assert_eq!(
        exemplar_distance(&roll_up(&g1), &roll_up(&g1), &tx)
            .unwrap()
            .total_cost,
        Cost::ZERO
    );
}
